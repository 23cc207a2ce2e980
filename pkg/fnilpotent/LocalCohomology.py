import functools
import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from typing import Any, NamedTuple, Optional

import numpy as np

from .Errors import DimensionError, NotQuasiHomogeneousError
from .Fields import MAX_EXTENSION_ORDER, FieldElement, FiniteField, field_make
from .Polynomials import (
    IntegerPolynomial,
    Monomial,
    SparsePoly,
    WeightSystem,
    coefficient,
    is_quasi_homogeneous,
    power_pminus1,
    reduce_mod_p,
)
from .Semilinear import (
    Matrix,
    SemilinearOperator,
    Vector,
    fitting_decomposition,
    fixed_points,
    kernel_basis,
)
from .Utils import logger

# Largest number of points isolated_check examines over a single field.
DEFAULT_POINT_LIMIT = 10**6

# Points are evaluated with numpy in blocks of this many.
POINT_BLOCK = 1 << 16

ISOLATED_LOCUS_ASSUMPTION = (
    "The singularity is isolated: R is F-rational away from the maximal ideal. This is asserted by the user; "
    "isolated_check only searches for counterexamples."
)
FINITE_LENGTH_ASSUMPTION = (
    "The tight closure of zero in the top local cohomology has finite length, so nilpotence can be read off the "
    "degree-zero piece. This is not verified."
)
GRADED_ASSUMPTIONS: tuple[str, ...] = (ISOLATED_LOCUS_ASSUMPTION, FINITE_LENGTH_ASSUMPTION)


class Verdict(Enum):
    F_NILPOTENT = "F_NILPOTENT"
    NOT_F_NILPOTENT = "NOT_F_NILPOTENT"


class IsolatedStatus(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"
    NOT_RUN = "NOT_RUN"


class IsolatedCheck(NamedTuple):
    status: IsolatedStatus
    point: Optional[tuple[FieldElement, ...]] = None
    extension_degree: int = 0
    points_searched: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": self.status.value,
            "point": [str(x) for x in self.point] if self.point is not None else None,
            "extension_degree": self.extension_degree,
            "points_searched": self.points_searched,
        }


NOT_RUN = IsolatedCheck(IsolatedStatus.NOT_RUN)


@dataclass(frozen=True)
class HypersurfaceData:
    """
    The graded hypersurface ring R = k[x_0, ..., x_n]/(f) for a quasi-homogeneous f.

    :param f: The defining polynomial, over the field k.
    :param weights: Positive weights of the variables.
    :raises DimensionError: For fewer than two variables or a weight count that does not match f.
    :raises PolynomialError: If f is zero.
    :raises NotQuasiHomogeneousError: If the terms of f have different weighted degrees.
    """

    f: SparsePoly
    weights: WeightSystem
    degree: int = dataclass_field(init=False)

    def __post_init__(self) -> None:
        if self.f.nvars < 2:
            raise DimensionError(f"A hypersurface ring needs at least two variables, got {self.f.nvars}")
        if len(self.weights) != self.f.nvars:
            raise DimensionError(f"{len(self.weights)} weights for a polynomial in {self.f.nvars} variables")
        d = is_quasi_homogeneous(self.f, self.weights)
        if d is None:
            raise NotQuasiHomogeneousError(f"{self.f} is not quasi-homogeneous for weights {self.weights.weights}")
        object.__setattr__(self, "degree", d)

    __hash__ = None

    @classmethod
    def from_integer(
        cls, f: IntegerPolynomial, weights: WeightSystem, p: int, field: Optional[FiniteField] = None
    ) -> "HypersurfaceData":
        return cls(reduce_mod_p(f, p, field), weights)

    @property
    def field(self) -> FiniteField:
        return self.f.field

    @property
    def nvars(self) -> int:
        return self.f.nvars

    @property
    def a_invariant(self) -> int:
        return self.degree - self.weights.total

    def scaled(self, factor: int) -> "HypersurfaceData":
        """
        The same ring with every weight multiplied by factor; the degree scales along.
        """
        return HypersurfaceData(self.f, self.weights.scaled(factor))


@dataclass(frozen=True)
class CohomPiece:
    """
    A graded piece of the top local cohomology of R: classes of sums of x^(-a) over the ambient basis that are killed
    by multiplication with f.
    """

    degree: int
    ambient_basis: tuple[Monomial, ...]
    kernel_basis: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.kernel_basis)


class DegreeMap(NamedTuple):
    source_basis: tuple[Monomial, ...]
    target_basis: tuple[Monomial, ...]
    matrix: Matrix

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.target_basis), len(self.source_basis)


def a_invariant(H: HypersurfaceData) -> int:
    return H.a_invariant


@functools.lru_cache(maxsize=4096)
def _neg_monomials(weights: tuple[int, ...], s: int) -> tuple[Monomial, ...]:
    n = len(weights)
    out: list[Monomial] = []
    # Smallest weighted degree reachable by the variables from position i onwards.
    tails = [sum(weights[i:]) for i in range(n + 1)]

    def extend(i: int, remaining: int, prefix: Monomial) -> None:
        w = weights[i]
        if i == n - 1:
            if remaining >= w and remaining % w == 0:
                out.append(prefix + (remaining // w,))
            return
        a = 1
        while a * w + tails[i + 1] <= remaining:
            extend(i + 1, remaining - a * w, prefix + (a,))
            a += 1

    if s >= tails[0]:
        extend(0, s, ())
    return tuple(out)


def neg_monomials(H: HypersurfaceData, s: int) -> list[Monomial]:
    """
    Every exponent vector a with all a_i >= 1 and weighted degree s, in lexicographic order. These index the Čech
    classes x^(-a) of weighted degree -s.
    """
    return list(_neg_monomials(H.weights.weights, s))


def multiplication_matrix(H: HypersurfaceData, e: int) -> Matrix:
    """
    The matrix of multiplication by f from the classes of degree e - d to those of degree e. Column a collects the
    surviving terms of f·x^(-a): a term x^(u-a) survives when every u_i - a_i <= -1.
    """
    source = _neg_monomials(H.weights.weights, H.degree - e)
    target = _neg_monomials(H.weights.weights, -e)
    row_of = {b: i for i, b in enumerate(target)}
    zero = H.field.zero
    rows = [[zero] * len(source) for _ in target]
    for j, a in enumerate(source):
        for u, c in H.f.terms.items():
            b = tuple(ai - ui for ai, ui in zip(a, u))
            if min(b) >= 1:
                rows[row_of[b]][j] = rows[row_of[b]][j] + c
    return tuple(tuple(row) for row in rows)


def degree_piece(H: HypersurfaceData, e: int) -> CohomPiece:
    """
    The degree e piece of the top local cohomology of R, the kernel of multiplication by f on the negative monomials
    of degree e - d. When there are no target monomials the kernel is the whole ambient span.
    """
    field = H.field
    ambient = _neg_monomials(H.weights.weights, H.degree - e)
    target = _neg_monomials(H.weights.weights, -e)
    n = len(ambient)
    if not target:
        basis = tuple(tuple(field.one if i == j else field.zero for i in range(n)) for j in range(n))
    else:
        basis = tuple(kernel_basis(multiplication_matrix(H, e), n, field))
    return CohomPiece(e, ambient, basis)


def _frobenius_entries(
    H: HypersurfaceData, g: SparsePoly, source: Sequence[Monomial], target: Sequence[Monomial]
) -> Matrix:
    p = H.field.p
    zero = H.field.zero
    rows = []
    for b in target:
        row = []
        for a in source:
            m = tuple(p * ai - bi for ai, bi in zip(a, b))
            row.append(coefficient(g, m) if min(m) >= 0 else zero)
        rows.append(tuple(row))
    return tuple(rows)


def frobenius_on_degree_zero(H: HypersurfaceData) -> SemilinearOperator:
    """
    The Frobenius action on the degree-zero piece, the Hasse-Witt matrix of the cone. The class x^(-a) goes to
    f^(p-1)·x^(-p·a), so the entry in row b and column a is the coefficient of x^(p·a - b) in f^(p-1).
    """
    basis = _neg_monomials(H.weights.weights, H.degree)
    if not basis:
        return SemilinearOperator(H.field, ())
    g = power_pminus1(H.f)
    return SemilinearOperator(H.field, _frobenius_entries(H, g, basis, basis))


def frobenius_degree_map(H: HypersurfaceData, e: int) -> DegreeMap:
    """
    The Frobenius map from the ambient span in degree e to the ambient span in degree p·e, with the same coefficient
    rule as frobenius_on_degree_zero.
    """
    weights = H.weights.weights
    source = _neg_monomials(weights, H.degree - e)
    target = _neg_monomials(weights, H.degree - H.field.p * e)
    if not source or not target:
        return DegreeMap(source, target, tuple(() for _ in target))
    g = power_pminus1(H.f)
    return DegreeMap(source, target, _frobenius_entries(H, g, source, target))


@dataclass(frozen=True)
class GradedVerdict:
    """
    The outcome of classify_graded, with the data that certifies it.
    """

    verdict: Verdict
    reason: str
    degree: int
    a_invariant: int
    basis: tuple[Monomial, ...]
    ss_dim: int
    nil_dim: int
    fixed_vector: Optional[Vector] = None
    isolated: IsolatedCheck = NOT_RUN
    assumptions: tuple[str, ...] = GRADED_ASSUMPTIONS

    @property
    def basis_dim(self) -> int:
        return len(self.basis)

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "reason": self.reason,
            "degree": self.degree,
            "a_invariant": self.a_invariant,
            "basis_dim": self.basis_dim,
            "ss_dim": self.ss_dim,
            "nil_dim": self.nil_dim,
            "basis": [list(m) for m in self.basis],
            "fixed_vector": [str(x) for x in self.fixed_vector] if self.fixed_vector is not None else None,
            "isolated": self.isolated.status.value,
            "isolated_witness": self.isolated.to_dict()["point"],
            "assumptions": list(self.assumptions),
        }


def classify_graded(H: HypersurfaceData, isolated: IsolatedCheck = NOT_RUN) -> GradedVerdict:
    """
    Decide whether the graded isolated singularity of R at the maximal ideal is F-nilpotent, by deciding whether
    Frobenius is nilpotent on the degree-zero piece of the top local cohomology.

    :param H: The hypersurface.
    :param isolated: An isolated_check result to attach to the verdict. It never changes the verdict.
    """
    a = H.a_invariant
    if a < 0:
        return GradedVerdict(Verdict.F_NILPOTENT, "negative a-invariant", H.degree, a, (), 0, 0, isolated=isolated)

    basis = tuple(neg_monomials(H, H.degree))
    if not basis:
        return GradedVerdict(Verdict.F_NILPOTENT, "empty degree-zero piece", H.degree, a, (), 0, 0, isolated=isolated)

    phi = frobenius_on_degree_zero(H)
    split = fitting_decomposition(phi)
    if split.ss_dim == 0:
        return GradedVerdict(
            Verdict.F_NILPOTENT, "Frobenius is nilpotent in degree zero", H.degree, a, basis, 0, split.nil_dim,
            isolated=isolated,
        )

    fixed = fixed_points(phi)
    return GradedVerdict(
        Verdict.NOT_F_NILPOTENT,
        "Frobenius has a stable part in degree zero",
        H.degree,
        a,
        basis,
        split.ss_dim,
        split.nil_dim,
        fixed_vector=fixed[0] if fixed else None,
        isolated=isolated,
    )


def _point_count(q: int, n: int, uniform: bool) -> int:
    return (q**n - 1) // (q - 1) if uniform else q**n - 1


def _digits(index: np.ndarray, p: int, width: int) -> np.ndarray:
    """
    Base-p digits of every index, most significant first, as a (len(index), width) array.
    """
    out = np.empty((len(index), width), dtype=np.int64)
    for j in range(width):
        out[:, width - 1 - j] = index % p
        index = index // p
    return out


def _point_blocks(p: int, n: int, uniform: bool) -> Iterator[np.ndarray]:
    """
    Yield blocks of candidate points over F_p. With uniform weights these are the normalised representatives of
    projective points (first nonzero coordinate equal to 1); otherwise every nonzero affine point.
    """
    if uniform:
        for lead in range(n):
            free = n - 1 - lead
            total = p**free
            for start in range(0, total, POINT_BLOCK):
                index = np.arange(start, min(start + POINT_BLOCK, total), dtype=np.int64)
                block = np.zeros((len(index), n), dtype=np.int64)
                block[:, lead] = 1
                if free:
                    block[:, lead + 1:] = _digits(index, p, free)
                yield block
    else:
        total = p**n
        for start in range(1, total, POINT_BLOCK):
            index = np.arange(start, min(start + POINT_BLOCK, total), dtype=np.int64)
            yield _digits(index, p, n)


def _numpy_power(x: np.ndarray, a: int, p: int) -> np.ndarray:
    result = np.ones_like(x)
    base = x % p
    while a:
        if a & 1:
            result = result * base % p
        base = base * base % p
        a >>= 1
    return result


def _numpy_search(polys: Sequence[SparsePoly], p: int, n: int, uniform: bool) -> Optional[tuple[int, ...]]:
    terms = [[(int(c), m) for m, c in poly.terms.items()] for poly in polys]
    for block in _point_blocks(p, n, uniform):
        powers: dict[tuple[int, int], np.ndarray] = {}
        mask = np.ones(len(block), dtype=bool)
        for poly_terms in terms:
            value = np.zeros(len(block), dtype=np.int64)
            for c, m in poly_terms:
                term = np.full(len(block), c, dtype=np.int64)
                for j, a in enumerate(m):
                    if a:
                        if (j, a) not in powers:
                            powers[(j, a)] = _numpy_power(block[:, j], a, p)
                        term = term * powers[(j, a)] % p
                value = (value + term) % p
            mask &= value == 0
            if not mask.any():
                break
        if mask.any():
            return tuple(int(x) for x in block[int(np.argmax(mask))])
    return None


def _python_search(polys: Sequence[SparsePoly], field: FiniteField, n: int, uniform: bool) -> Optional[Vector]:
    elements = list(field.elements())
    if uniform:
        candidates = (
            (field.zero,) * lead + (field.one,) + rest
            for lead in range(n)
            for rest in itertools.product(elements, repeat=n - 1 - lead)
        )
    else:
        candidates = (point for point in itertools.product(elements, repeat=n) if any(point))
    for point in candidates:
        if all(not poly.evaluate(point) for poly in polys):
            return point
    return None


def isolated_check(H: HypersurfaceData, maxext: int = 1, limit: int = DEFAULT_POINT_LIMIT) -> IsolatedCheck:
    """
    Search for singular points of f away from the origin over F_{p^e} for e up to maxext: points where f and all of
    its partial derivatives vanish. With uniform weights the search runs over projective points, otherwise over all
    nonzero affine points.

    This is a heuristic for the hypothesis that the singularity is isolated. PASS only means nothing was found.

    :param H: The hypersurface.
    :param maxext: Largest extension degree searched; 0 skips the check.
    :param limit: Largest number of points examined over one field. Larger fields give INCONCLUSIVE.
    :return: PASS, FAIL with a witness point, INCONCLUSIVE, or NOT_RUN.
    """
    if maxext < 1:
        return NOT_RUN

    base = H.field
    n = H.nvars
    uniform = len(set(H.weights.weights)) == 1
    partials = [H.f.derivative(i) for i in range(n)]
    searched = 0
    for e in range(1, maxext + 1):
        if e == 1:
            field = base
        elif not base.is_prime_field or base.p**e > MAX_EXTENSION_ORDER:
            logger.debug(f"isolated_check: no search over degree {e} extensions of {base}")
            return IsolatedCheck(IsolatedStatus.INCONCLUSIVE, None, e - 1, searched)
        else:
            field = field_make(base.p, e)

        count = _point_count(field.order, n, uniform)
        if count > limit:
            logger.debug(f"isolated_check: {count} points over {field} exceed the limit {limit}")
            return IsolatedCheck(IsolatedStatus.INCONCLUSIVE, None, e - 1, searched)

        polys = [H.f] + partials
        if field.is_prime_field:
            found = _numpy_search(polys, field.p, n, uniform)
            point = tuple(field(x) for x in found) if found is not None else None
        elif field == base:
            point = _python_search(polys, field, n, uniform)
        else:
            # Extensions are only built over a prime base, so every coefficient is a residue.
            lifted = [SparsePoly.from_terms(field, n, {m: int(c) for m, c in poly.terms.items()}) for poly in polys]
            point = _python_search(lifted, field, n, uniform)
        searched += count
        if point is not None:
            return IsolatedCheck(IsolatedStatus.FAIL, point, e, searched)
    return IsolatedCheck(IsolatedStatus.PASS, None, maxext, searched)
