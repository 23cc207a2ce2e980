import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import NamedTuple, Union

from .Errors import DimensionError, FieldError, SearchSpaceError
from .Fields import FieldElement, FiniteField, field_make

Vector = tuple[FieldElement, ...]
Matrix = tuple[tuple[FieldElement, ...], ...]

# Largest number of vectors brute_force_oracle will enumerate.
ORACLE_LIMIT = 10**6


def as_matrix(field: FiniteField, rows: Iterable[Iterable[Union[int, FieldElement]]]) -> Matrix:
    return tuple(tuple(field(x) for x in row) for row in rows)


def identity_matrix(field: FiniteField, n: int) -> Matrix:
    return tuple(tuple(field.one if i == j else field.zero for j in range(n)) for i in range(n))


def zero_matrix(field: FiniteField, rows: int, cols: int) -> Matrix:
    return tuple(tuple(field.zero for _ in range(cols)) for _ in range(rows))


def mat_mul(a: Matrix, b: Matrix, field: FiniteField) -> Matrix:
    """
    The ordinary product a·b. An empty a yields an empty product.
    """
    if not a:
        return ()
    inner = len(a[0])
    if inner != len(b):
        raise DimensionError(f"Cannot multiply a {len(a)}x{inner} matrix by a {len(b)}-row matrix")
    cols = len(b[0]) if b else 0
    zero = field.zero
    result = []
    for row in a:
        out = []
        for j in range(cols):
            acc = zero
            for k in range(inner):
                if row[k]:
                    acc = acc + row[k] * b[k][j]
            out.append(acc)
        result.append(tuple(out))
    return tuple(result)


def twist(m: Matrix) -> Matrix:
    """
    Raise every entry to the p-th power.
    """
    return tuple(tuple(x.frobenius() for x in row) for row in m)


def row_reduce(rows: Sequence[Sequence[FieldElement]], ncols: int) -> tuple[list[list[FieldElement]], list[int]]:
    """
    Reduced row echelon form by Gaussian elimination. Pivots are chosen as the first nonzero entry in column order,
    so the result is deterministic.

    :param rows: The matrix rows.
    :param ncols: Number of columns; needed when there are no rows.
    :return: The nonzero rows of the reduced form and the pivot column of each.
    """
    work = [list(row) for row in rows]
    for row in work:
        if len(row) != ncols:
            raise DimensionError(f"Row of length {len(row)} in a matrix with {ncols} columns")
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot_row = next((i for i in range(r, len(work)) if work[i][col]), None)
        if pivot_row is None:
            continue
        work[r], work[pivot_row] = work[pivot_row], work[r]
        inv = work[r][col].inverse()
        work[r] = [x * inv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col]:
                factor = work[i][col]
                work[i] = [x - factor * y for x, y in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(m: Matrix, ncols: int | None = None) -> int:
    if ncols is None:
        ncols = len(m[0]) if m else 0
    return len(row_reduce(m, ncols)[1])


def kernel_basis(m: Matrix, ncols: int, field: FiniteField) -> list[Vector]:
    """
    A basis of {v : m·v = 0}, one vector per free column in increasing column order.
    """
    reduced, pivots = row_reduce(m, ncols)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [field.zero] * ncols
        v[free] = field.one
        for row, pivot in zip(reduced, pivots):
            v[pivot] = -row[free]
        basis.append(tuple(v))
    return basis


def column_space_basis(m: Matrix) -> list[Vector]:
    """
    The columns of m sitting at pivot positions; they are independent and span the column space.
    """
    ncols = len(m[0]) if m else 0
    _, pivots = row_reduce(m, ncols)
    return [tuple(row[j] for row in m) for j in pivots]


@dataclass(frozen=True)
class SemilinearOperator:
    """
    A p-semilinear map phi on field^dim given by a square matrix A whose column j is phi(e_j), acting as
    phi(v) = A·v^[p] with v^[p] the entrywise p-th power.
    """

    field: FiniteField
    matrix: Matrix

    def __post_init__(self) -> None:
        n = len(self.matrix)
        for row in self.matrix:
            if len(row) != n:
                raise DimensionError(f"Operator matrix must be square, got a row of length {len(row)} in {n} rows")
            for x in row:
                if not isinstance(x, FieldElement) or x.field != self.field:
                    raise FieldError(f"Matrix entry {x!r} is not an element of {self.field}")

    @property
    def dim(self) -> int:
        return len(self.matrix)

    @classmethod
    def from_ints(cls, field: FiniteField, rows: Iterable[Iterable[Union[int, FieldElement]]]) -> "SemilinearOperator":
        return cls(field, as_matrix(field, rows))

    @classmethod
    def zero(cls, field: FiniteField, dim: int) -> "SemilinearOperator":
        return cls(field, zero_matrix(field, dim, dim))

    @classmethod
    def identity(cls, field: FiniteField, dim: int) -> "SemilinearOperator":
        return cls(field, identity_matrix(field, dim))

    @classmethod
    def block_diagonal(cls, field: FiniteField, operators: Sequence["SemilinearOperator"]) -> "SemilinearOperator":
        n = sum(op.dim for op in operators)
        rows = [[field.zero] * n for _ in range(n)]
        offset = 0
        for op in operators:
            if op.field != field:
                raise FieldError(f"Block over {op.field} cannot sit in an operator over {field}")
            for i, row in enumerate(op.matrix):
                rows[offset + i][offset:offset + op.dim] = row
            offset += op.dim
        return cls(field, tuple(tuple(row) for row in rows))

    def to_ints(self) -> list[list[int]]:
        """
        Matrix entries as field indices; for a prime field these are the residues in [0, p).
        """
        return [[x.to_index() for x in row] for row in self.matrix]


class FittingSplit(NamedTuple):
    ss_dim: int
    nil_dim: int
    ss_image_basis: tuple[Vector, ...]
    nil_basis: tuple[Vector, ...]


class OracleResult(NamedTuple):
    fixed_set: frozenset[Vector]
    nilpotent: bool


def _check_vector(phi: SemilinearOperator, v: Sequence[Union[int, FieldElement]]) -> Vector:
    if len(v) != phi.dim:
        raise DimensionError(f"Vector of length {len(v)} for an operator of dimension {phi.dim}")
    return tuple(phi.field(x) for x in v)


def apply(phi: SemilinearOperator, v: Sequence[Union[int, FieldElement]]) -> Vector:
    """
    Compute phi(v) = A·v^[p].

    :raises DimensionError: If v has the wrong length.
    :raises FieldError: If v has entries from another field.
    """
    twisted = [x.frobenius() for x in _check_vector(phi, v)]
    zero = phi.field.zero
    out = []
    for row in phi.matrix:
        acc = zero
        for a, x in zip(row, twisted):
            if a and x:
                acc = acc + a * x
        out.append(acc)
    return tuple(out)


def power_matrix(phi: SemilinearOperator, m: int) -> Matrix:
    """
    The matrix of phi^m, namely A·A^(p)·A^(p^2)···A^(p^(m-1)), where A^(q) raises every entry to the q-th power.

    :param phi: The operator.
    :param m: The number of iterations; 0 gives the identity.
    """
    if m < 0:
        raise DimensionError(f"Iterate count must be non-negative, got {m}")
    field = phi.field
    result = identity_matrix(field, phi.dim)
    factor = phi.matrix
    for k in range(m):
        result = mat_mul(result, factor, field)
        # Over F_p every twist is trivial.
        if not field.is_prime_field and k + 1 < m:
            factor = twist(factor)
    return result


def _inverse_frobenius_power(x: FieldElement, m: int) -> FieldElement:
    field = x.field
    k = (-m) % field.e
    return x ** (field.p**k) if k else x


def fitting_decomposition(phi: SemilinearOperator) -> FittingSplit:
    """
    Split the space into the phi-stable part, on which phi is bijective, and the part killed by a power of phi.
    Both are read off the matrix M of phi^dim: the stable part is its column space, and the nilpotent part is
    {v : M·v^[p^dim] = 0}, the kernel of M pulled back through the inverse entrywise Frobenius.
    """
    dim = phi.dim
    field = phi.field
    m = power_matrix(phi, dim)
    image = tuple(column_space_basis(m))
    nil = tuple(
        tuple(_inverse_frobenius_power(x, dim) for x in v) for v in kernel_basis(m, dim, field)
    )
    return FittingSplit(len(image), dim - len(image), image, nil)


def is_nilpotent(phi: SemilinearOperator) -> bool:
    return not any(x for row in power_matrix(phi, phi.dim) for x in row)


def fixed_points(phi: SemilinearOperator) -> tuple[Vector, ...]:
    """
    An F_p-basis of the fixed space {v : phi(v) = v} over the operator's own field.

    For a prime field this is the kernel of A - I. For F_{p^e} each coordinate is written as Σ x_l t^l with x_l in
    F_p, which turns phi(v) = v into an F_p-linear system of size dim·e.

    :return: Basis vectors; empty when 0 is the only fixed point.
    """
    field = phi.field
    dim, e = phi.dim, field.e
    if field.is_prime_field:
        shifted = tuple(
            tuple(x - 1 if i == j else x for j, x in enumerate(row)) for i, row in enumerate(phi.matrix)
        )
        return tuple(kernel_basis(shifted, dim, field))

    prime_field = field_make(field.p)
    powers = [field.generator**l for l in range(e)]
    columns = []
    for j in range(dim):
        for l, beta in enumerate(powers):
            beta_p = beta.frobenius()
            column = []
            for i in range(dim):
                w = phi.matrix[i][j] * beta_p
                if i == j:
                    w = w - beta
                column.extend(w.coords)
            columns.append(column)
    system = tuple(
        tuple(prime_field(columns[c][r]) for c in range(dim * e)) for r in range(dim * e)
    )
    solutions = kernel_basis(system, dim * e, prime_field)
    return tuple(
        tuple(field(tuple(int(x) for x in sol[j * e:(j + 1) * e])) for j in range(dim)) for sol in solutions
    )


def is_fixed_point_free(phi: SemilinearOperator) -> bool:
    """
    Whether phi(v) != v for every nonzero v over the operator's field.
    """
    return not fixed_points(phi)


def brute_force_oracle(phi: SemilinearOperator, limit: int = ORACLE_LIMIT) -> OracleResult:
    """
    Find the fixed points and decide nilpotence by enumerating every vector. Only meant as a reference for tests.

    :raises SearchSpaceError: If the space has more than limit vectors.
    """
    field = phi.field
    size = field.order**phi.dim
    if size > limit:
        raise SearchSpaceError(f"{size} vectors exceed the oracle limit of {limit}")

    vectors = list(itertools.product(list(field.elements()), repeat=phi.dim))
    fixed = frozenset(v for v in vectors if apply(phi, v) == v)

    # The images of phi^k shrink; phi is nilpotent exactly when phi^dim collapses everything to zero.
    current = set(vectors)
    for _ in range(phi.dim):
        current = {apply(phi, v) for v in current}
    nilpotent = current == {tuple(field.zero for _ in range(phi.dim))}
    return OracleResult(fixed, nilpotent)
