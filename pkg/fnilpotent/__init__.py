"""
Frobenius nilpotence of graded hypersurface singularities and of surface singularities given by exceptional curve
configurations, decided by explicit semilinear algebra over finite fields.
"""

VERSION: tuple[int, int, int] = (1, 0, 0)

from .Errors import FNilpotentError  # noqa: E402
from .Fields import FieldElement, FiniteField, field_make, frobenius  # noqa: E402
from .LocalCohomology import (  # noqa: E402
    CohomPiece,
    HypersurfaceData,
    Verdict,
    a_invariant,
    classify_graded,
    degree_piece,
    frobenius_degree_map,
    frobenius_on_degree_zero,
    isolated_check,
    neg_monomials,
)
from .Polynomials import (  # noqa: E402
    IntegerPolynomial,
    SparsePoly,
    WeightSystem,
    coefficient,
    is_quasi_homogeneous,
    power_pminus1,
    reduce_mod_p,
    weighted_degree,
)
from .Semilinear import (  # noqa: E402
    FittingSplit,
    SemilinearOperator,
    apply,
    brute_force_oracle,
    fitting_decomposition,
    fixed_points,
    is_nilpotent,
    power_matrix,
)
from .Snc import Component, DualGraph, SncConfig, betti1, classify_surface, component_h1_frobenius, h1_frobenius  # noqa: E402
from .Sweep import (  # noqa: E402
    IntegerModel,
    SurfaceModel,
    SweepReport,
    aggregate_verdict,
    enumerate_primes,
    export,
    residue_breakdown,
    sweep_hypersurface,
    sweep_surface,
)
