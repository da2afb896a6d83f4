import numpy as np
import pytest

from polybif.bifurcation import explore
from polybif.network import InternalDynamics, NetworkSystem, laplacian
from polybif.polydiag import build_lattice, enumerate_invariant
from polybif.symmetry import group_for

DIAMOND_EDGES = [(1, 2), (2, 3), (3, 4), (4, 1), (2, 4)]
DIAMOND_INT = [[2, -1, 0, -1], [-1, 3, -1, -1], [0, -1, 2, -1], [-1, -1, -1, 3]]


def diamond():
    return laplacian(4, DIAMOND_EDGES)


def k3():
    return laplacian(3, [(1, 2), (2, 3), (1, 3)])


def p3():
    return laplacian(3, [(1, 2), (2, 3)])


def random_matrices(count=20, seed=20240611):
    """Ten random Laplacians of random graphs and ten random integer matrices, n <= 5."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(2, 6))
        if k % 2 == 0:
            edges = [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
            out.append(laplacian(n, edges))
        else:
            out.append(rng.integers(-2, 3, size=(n, n)).astype(object))
    return out


def setup(M, f=None):
    f = f or InternalDynamics()
    subs = enumerate_invariant(M)
    G = group_for(M, f.odd)
    return NetworkSystem(M, f), build_lattice(subs, G), G


def by_labels(lattice, labels):
    """The lattice member whose typical element has the given labels."""
    for s in lattice.subspaces:
        if tuple(s.labels) == tuple(labels):
            return s
    raise KeyError(labels)


@pytest.fixture(scope="session")
def diamond_setup():
    return setup(diamond())


@pytest.fixture(scope="session")
def diamond_forest(diamond_setup):
    system, lattice, G = diamond_setup
    return explore(system, lattice, G, (-3.0, 5.0))
