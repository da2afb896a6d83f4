# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled kernels; same contract and enumeration order as _kernels_py."""

from libc.stdlib cimport malloc, free


cdef bint _invariant(const long long[:, ::1] K, int n, const int* lab, int d,
                     long long* v, long long* ref, char* seen) noexcept nogil:
    cdef int c, i, j, m, lj
    cdef long long acc, val
    for c in range(1, d + 1):
        for i in range(n):
            acc = 0
            for j in range(n):
                lj = lab[j]
                if lj == c:
                    acc += K[i, j]
                elif lj == -c:
                    acc -= K[i, j]
            v[i] = acc
        for m in range(d + 1):
            seen[m] = 0
        for i in range(n):
            if lab[i] == 0:
                if v[i] != 0:
                    return False
            else:
                if lab[i] > 0:
                    m = lab[i]
                    val = v[i]
                else:
                    m = -lab[i]
                    val = -v[i]
                if seen[m]:
                    if ref[m] != val:
                        return False
                else:
                    seen[m] = 1
                    ref[m] = val
    return True


cdef struct Work:
    int n
    bint antisync
    int* lab
    long long* v
    long long* ref
    char* seen


cdef int _dfs(const long long[:, ::1] K, Work* w, int row, int ncols, list out) except -1:
    cdef int c, i
    if row == w.n:
        if ncols > 0 and _invariant(K, w.n, w.lab, ncols, w.v, w.ref, w.seen):
            out.append(tuple([w.lab[i] for i in range(w.n)]))
        return 0
    if w.antisync:
        w.lab[row] = 0
        _dfs(K, w, row + 1, ncols, out)
    for c in range(1, ncols + 1):
        w.lab[row] = c
        _dfs(K, w, row + 1, ncols, out)
        if w.antisync:
            w.lab[row] = -c
            _dfs(K, w, row + 1, ncols, out)
    w.lab[row] = ncols + 1
    _dfs(K, w, row + 1, ncols + 1, out)
    w.lab[row] = 0
    return 0


cdef Work _alloc(int n):
    cdef Work w
    w.n = n
    w.lab = <int*> malloc(max(n, 1) * sizeof(int))
    w.v = <long long*> malloc(max(n, 1) * sizeof(long long))
    w.ref = <long long*> malloc((n + 1) * sizeof(long long))
    w.seen = <char*> malloc((n + 1) * sizeof(char))
    if w.lab == NULL or w.v == NULL or w.ref == NULL or w.seen == NULL:
        raise MemoryError()
    return w


cdef void _release(Work* w) noexcept:
    free(w.lab)
    free(w.v)
    free(w.ref)
    free(w.seen)


def enumerate_labels(const long long[:, ::1] K, bint antisync):
    cdef int n = K.shape[0]
    cdef Work w = _alloc(n)
    cdef list out = []
    cdef int i
    w.antisync = antisync
    try:
        for i in range(n):
            w.lab[i] = 0
        _dfs(K, &w, 0, 0, out)
    finally:
        _release(&w)
    return out


def labels_invariant(const long long[:, ::1] K, labels):
    cdef int n = K.shape[0]
    cdef Work w = _alloc(n)
    cdef int i, d = 0
    cdef bint ok
    try:
        for i in range(n):
            w.lab[i] = labels[i]
            if abs(w.lab[i]) > d:
                d = abs(w.lab[i])
        ok = _invariant(K, n, w.lab, d, w.v, w.ref, w.seen)
    finally:
        _release(&w)
    return ok
