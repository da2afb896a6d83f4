"""Pure-Python kernels; reference implementation and import-time fallback.

Labels encode a polydiagonal basis matrix row by row: ``0`` for a zero row,
``+c`` / ``-c`` for a +1 / -1 entry in column ``c`` (1-based).
"""


def labels_invariant(K, labels):
    """Exact test that col(B) is K-invariant for an integer matrix K."""
    n = len(labels)
    d = max((abs(v) for v in labels), default=0)
    for c in range(1, d + 1):
        members = [(j, 1 if labels[j] > 0 else -1) for j in range(n) if abs(labels[j]) == c]
        ref = {}
        for i in range(n):
            row = K[i]
            acc = 0
            for j, sgn in members:
                acc += sgn * row[j]
            lab = labels[i]
            if lab == 0:
                if acc != 0:
                    return False
                continue
            m = abs(lab)
            val = acc if lab > 0 else -acc
            prev = ref.setdefault(m, val)
            if prev != val:
                return False
    return True


def enumerate_labels(K, antisync):
    """All non-zero canonical labelings whose column space is K-invariant."""
    n = len(K)
    out = []
    lab = [0] * n

    def dfs(row, ncols):
        if row == n:
            if ncols > 0 and labels_invariant(K, lab):
                out.append(tuple(lab))
            return
        if antisync:
            lab[row] = 0
            dfs(row + 1, ncols)
        for c in range(1, ncols + 1):
            lab[row] = c
            dfs(row + 1, ncols)
            if antisync:
                lab[row] = -c
                dfs(row + 1, ncols)
        lab[row] = ncols + 1
        dfs(row + 1, ncols + 1)
        lab[row] = 0

    dfs(0, 0)
    return out
