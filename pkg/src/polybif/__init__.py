"""Equilibrium bifurcation diagrams of coupled cell networks.

Branches are followed inside nested invariant polydiagonal subspaces and
switched at bifurcation points where a simple eigenvalue of the Jacobian
restricted to a larger invariant subspace crosses zero.
"""

__version__ = "0.1.0"

from .errors import NumericalError, PolybifError, ValidationError  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .polydiag import (PolyBasisMatrix, Subspace, SubspaceLattice, build_lattice, canonicalize,  # noqa: E402
                       contains, enumerate_invariant, is_invariant, pseudoinverse, validate)
from .network import (InternalDynamics, NetworkSystem, QuotientSystem, eval_F, eval_F_B, jac_s,  # noqa: E402
                      jac_x, laplacian, quotient_matrix)
from .symmetry import SymmetryGroup, act_on_subspace, find_automorphisms, group_for, orbit_partition  # noqa: E402
from .continuation import Branch, BranchPoint, Tolerances, compute_tangent, follow_branch, newton_correct  # noqa: E402
from .bifurcation import BifurcationEvent, BranchForest, daughter_candidates, explore  # noqa: E402
