import math
from collections.abc import Callable, Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Optional, Union

import sympy

from .Errors import DimensionError, ExponentOverflowError, PolynomialError
from .Fields import FieldElement, FiniteField, field_make

Monomial = tuple[int, ...]

# Every exponent, including those of f^(p-1) and of p·a in the Frobenius matrix, stays below this bound.
EXPONENT_LIMIT = 1 << 31


@dataclass(frozen=True)
class WeightSystem:
    """
    Positive integer weights w_0, ..., w_n for a grading of k[x_0, ..., x_n].
    """

    weights: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.weights:
            raise PolynomialError("A weight system needs at least one weight")
        for w in self.weights:
            if not isinstance(w, int) or w < 1:
                raise PolynomialError(f"Weights must be positive integers, got {w!r}")

    @classmethod
    def uniform(cls, nvars: int) -> "WeightSystem":
        return cls((1,) * nvars)

    def __len__(self) -> int:
        return len(self.weights)

    def __iter__(self) -> Iterator[int]:
        return iter(self.weights)

    @property
    def total(self) -> int:
        return sum(self.weights)

    def scaled(self, factor: int) -> "WeightSystem":
        return WeightSystem(tuple(w * factor for w in self.weights))


def weighted_degree(m: Sequence[int], w: WeightSystem) -> int:
    """
    :raises DimensionError: If the exponent vector and the weights differ in length.
    """
    if len(m) != len(w.weights):
        raise DimensionError(f"Exponent vector of length {len(m)} against {len(w.weights)} weights")
    return sum(a * b for a, b in zip(m, w.weights))


def _add_monomials(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def _multiply_terms(a: Mapping[Monomial, Any], b: Mapping[Monomial, Any], reduce: Callable[[Any], Any]) -> dict:
    acc: dict[Monomial, Any] = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = _add_monomials(ma, mb)
            acc[m] = acc.get(m, 0) + ca * cb
    return {m: r for m, c in acc.items() if (r := reduce(c))}


@dataclass(frozen=True)
class SparsePoly:
    """
    A polynomial over a finite field in nvars variables, stored as a map from exponent vectors to nonzero
    coefficients. Build instances with from_terms, which drops zero coefficients.
    """

    field: FiniteField
    nvars: int
    terms: Mapping[Monomial, FieldElement]

    def __post_init__(self) -> None:
        for m, c in self.terms.items():
            if len(m) != self.nvars:
                raise DimensionError(f"Exponent vector {m} in a polynomial of {self.nvars} variables")
            if any(a < 0 for a in m):
                raise PolynomialError(f"Negative exponent in {m}")
            if not isinstance(c, FieldElement) or c.field != self.field:
                raise PolynomialError(f"Coefficient {c!r} of {m} is not an element of {self.field}")
            if not c:
                raise PolynomialError(f"Zero coefficient stored for {m}")
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))

    __hash__ = None

    @classmethod
    def from_terms(
        cls, field: FiniteField, nvars: int, terms: Union[Mapping, Iterable[tuple[Sequence[int], Any]]]
    ) -> "SparsePoly":
        """
        Build a polynomial from (exponents, coefficient) pairs, adding up repeated exponents and dropping zeros.
        Coefficients may be integers or field elements.
        """
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, FieldElement] = {}
        for m, c in items:
            m = tuple(int(a) for a in m)
            acc[m] = acc.get(m, field.zero) + field(c)
        return cls(field, nvars, {m: c for m, c in acc.items() if c})

    @classmethod
    def zero(cls, field: FiniteField, nvars: int) -> "SparsePoly":
        return cls(field, nvars, {})

    @classmethod
    def monomial(cls, field: FiniteField, exponents: Sequence[int], coefficient: Any = 1) -> "SparsePoly":
        return cls.from_terms(field, len(exponents), [(exponents, coefficient)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.field == other.field and self.nvars == other.nvars and dict(self.terms) == dict(other.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def monomials(self) -> list[Monomial]:
        return sorted(self.terms)

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def max_exponent(self) -> int:
        return max((max(m) for m in self.terms if m), default=0)

    def _check_compatible(self, other: "SparsePoly") -> None:
        if other.field != self.field or other.nvars != self.nvars:
            raise DimensionError(
                f"Cannot combine polynomials over {self.field} in {self.nvars} variables and over {other.field} "
                f"in {other.nvars} variables"
            )

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        self._check_compatible(other)
        return SparsePoly.from_terms(self.field, self.nvars, list(self.terms.items()) + list(other.terms.items()))

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(self.field, self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other: "SparsePoly") -> "SparsePoly":
        self._check_compatible(other)
        return SparsePoly(self.field, self.nvars, _multiply_terms(self.terms, other.terms, lambda c: c))

    def __pow__(self, n: int) -> "SparsePoly":
        if n < 0:
            raise PolynomialError(f"Negative power {n} of a polynomial")
        result = SparsePoly.monomial(self.field, (0,) * self.nvars)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Any) -> "SparsePoly":
        c = self.field(c)
        return SparsePoly(self.field, self.nvars, {m: v * c for m, v in self.terms.items() if v * c})

    def derivative(self, i: int) -> "SparsePoly":
        """
        The formal partial derivative with respect to variable i.
        """
        if not 0 <= i < self.nvars:
            raise DimensionError(f"No variable {i} in a polynomial of {self.nvars} variables")
        out = []
        for m, c in self.terms.items():
            if m[i]:
                out.append((m[:i] + (m[i] - 1,) + m[i + 1:], c * m[i]))
        return SparsePoly.from_terms(self.field, self.nvars, out)

    def evaluate(self, point: Sequence[Any]) -> FieldElement:
        if len(point) != self.nvars:
            raise DimensionError(f"Point of length {len(point)} for a polynomial of {self.nvars} variables")
        values = [self.field(x) for x in point]
        total = self.field.zero
        for m, c in self.terms.items():
            term = c
            for x, a in zip(values, m):
                if a:
                    term = term * x**a
            total = total + term
        return total

    def format(self, variables: Optional[Sequence[str]] = None) -> str:
        if variables is None:
            variables = [f"x{i}" for i in range(self.nvars)]
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            factors = [v if a == 1 else f"{v}^{a}" for v, a in zip(variables, m) if a]
            coefficient = str(c)
            if " + " in coefficient and factors:
                coefficient = f"({coefficient})"
            if not factors:
                parts.append(coefficient)
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([coefficient] + factors))
        return " + ".join(parts) if parts else "0"

    def __str__(self) -> str:
        return self.format()


def is_quasi_homogeneous(f: SparsePoly, w: WeightSystem) -> Optional[int]:
    """
    :return: The common weighted degree of all terms of f, or None if the terms have different degrees.
    :raises PolynomialError: If f is zero.
    """
    if f.is_zero():
        raise PolynomialError("The zero polynomial has no weighted degree")
    degrees = {weighted_degree(m, w) for m in f.terms}
    return degrees.pop() if len(degrees) == 1 else None


def _check_exponent_bound(f: SparsePoly) -> None:
    p = f.field.p
    if p * f.max_exponent() >= EXPONENT_LIMIT:
        raise ExponentOverflowError(
            f"p * max exponent = {p} * {f.max_exponent()} reaches the exponent limit {EXPONENT_LIMIT}"
        )


def _multinomial_expansion(f: SparsePoly, n: int) -> dict[Monomial, Any]:
    """
    Expand f^n term by term with the multinomial theorem, assuming n < p so every factorial is invertible mod p.
    """
    field = f.field
    p = field.p
    prime = field.is_prime_field
    items = sorted(f.terms.items())
    t = len(items)

    factorials = [1] * (n + 1)
    for k in range(1, n + 1):
        factorials[k] = factorials[k - 1] * k % p
    inverse_factorials = [pow(x, -1, p) for x in factorials]

    # Powers of each coefficient and the matching scaled exponent vectors.
    coefficient_powers = []
    exponent_powers = []
    for m, c in items:
        value = int(c) if prime else c
        powers = [1 if prime else field.one]
        for _ in range(n):
            powers.append(powers[-1] * value % p if prime else powers[-1] * value)
        coefficient_powers.append(powers)
        exponent_powers.append([tuple(a * k for a in m) for k in range(n + 1)])

    acc: dict[Monomial, Any] = {}
    zero_monomial = (0,) * f.nvars

    def expand(index: int, remaining: int, monomial: Monomial, coefficient: Any) -> None:
        if index == t - 1:
            k = remaining
            m = _add_monomials(monomial, exponent_powers[index][k])
            c = coefficient * coefficient_powers[index][k] * inverse_factorials[k]
            acc[m] = acc.get(m, 0) + c
            return
        for k in range(remaining + 1):
            c = coefficient * coefficient_powers[index][k] * inverse_factorials[k]
            if prime:
                c %= p
            expand(index + 1, remaining - k, _add_monomials(monomial, exponent_powers[index][k]), c)

    expand(0, n, zero_monomial, factorials[n] if prime else field(factorials[n]))
    if prime:
        return {m: field(c) for m, c in acc.items() if c % p}
    return {m: c for m, c in acc.items() if c}


def _multinomial_is_cheaper(f: SparsePoly, n: int) -> bool:
    t = len(f.terms)
    expansion_cost = math.comb(n + t - 1, t - 1)
    # The last squaring of square-and-multiply costs about the square of the result size.
    result_size = min(expansion_cost, math.comb(n * f.total_degree() + f.nvars, f.nvars))
    return expansion_cost <= result_size * result_size


def _square_and_multiply(f: SparsePoly, n: int) -> dict[Monomial, FieldElement]:
    field = f.field
    p = field.p
    if field.is_prime_field:
        base: dict[Monomial, Any] = {m: int(c) for m, c in f.terms.items()}
        reduce: Callable[[Any], Any] = lambda c: c % p
        result: dict[Monomial, Any] = {(0,) * f.nvars: 1}
    else:
        base = dict(f.terms)
        reduce = lambda c: c
        result = {(0,) * f.nvars: field.one}
    while n:
        if n & 1:
            result = _multiply_terms(result, base, reduce)
        n >>= 1
        if n:
            base = _multiply_terms(base, base, reduce)
    if field.is_prime_field:
        return {m: field(c) for m, c in result.items()}
    return result


def power_pminus1(f: SparsePoly) -> SparsePoly:
    """
    Compute f^(p-1) exactly over the field of f, the polynomial whose coefficients give the Frobenius action on the
    top local cohomology of k[x]/(f).

    Two strategies are available: sparse square-and-multiply, and the multinomial expansion, which is exact here
    because p - 1 < p. The one with the smaller predicted cost is used, so few-term polynomials (Fermat and
    Brieskorn type) stay fast for large p.

    :raises ExponentOverflowError: If p times the largest exponent of f reaches 2^31.
    """
    _check_exponent_bound(f)
    n = f.field.p - 1
    if f.is_zero():
        return f
    if _multinomial_is_cheaper(f, n):
        terms = _multinomial_expansion(f, n)
    else:
        terms = _square_and_multiply(f, n)
    return SparsePoly(f.field, f.nvars, terms)


def coefficient(f: SparsePoly, m: Sequence[int]) -> FieldElement:
    """
    The coefficient of x^m in f, zero when absent. Exponent vectors with negative entries have coefficient zero.

    :raises DimensionError: If m has the wrong length.
    """
    if len(m) != f.nvars:
        raise DimensionError(f"Exponent vector of length {len(m)} for a polynomial of {f.nvars} variables")
    return f.terms.get(tuple(m), f.field.zero)


@dataclass(frozen=True)
class IntegerPolynomial:
    """
    A polynomial with integer coefficients, as read from the shared model schema: a list of
    {"coeff": int, "exponents": [int, ...]} records.
    """

    nvars: int
    terms: Mapping[Monomial, int]

    def __post_init__(self) -> None:
        if self.nvars < 1:
            raise PolynomialError("A polynomial needs at least one variable")
        for m, c in self.terms.items():
            if len(m) != self.nvars:
                raise DimensionError(f"Exponent vector {list(m)} in a polynomial of {self.nvars} variables")
            if any(not isinstance(a, int) or a < 0 for a in m):
                raise PolynomialError(f"Exponents must be non-negative integers, got {list(m)}")
            if not isinstance(c, int) or c == 0:
                raise PolynomialError(f"Coefficient of {list(m)} must be a nonzero integer, got {c!r}")
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))

    __hash__ = None

    # Models travel to sweep worker processes; mapping proxies do not pickle.
    def __reduce__(self) -> tuple[Any, ...]:
        return IntegerPolynomial, (self.nvars, dict(self.terms))

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[tuple[Sequence[int], int]]) -> "IntegerPolynomial":
        acc: dict[Monomial, int] = {}
        for m, c in terms:
            m = tuple(m)
            acc[m] = acc.get(m, 0) + c
        return cls(nvars, {m: c for m, c in acc.items() if c})

    @classmethod
    def from_records(cls, records: Any, nvars: Optional[int] = None) -> "IntegerPolynomial":
        """
        Parse schema term records.

        :raises PolynomialError: For records that are not {"coeff": int, "exponents": [int, ...]}.
        """
        if not isinstance(records, list) or not records:
            raise PolynomialError("Terms must be a non-empty list of {coeff, exponents} records")
        terms = []
        for record in records:
            if not isinstance(record, dict) or set(record) != {"coeff", "exponents"}:
                raise PolynomialError(f"Malformed term record {record!r}")
            coeff, exponents = record["coeff"], record["exponents"]
            if isinstance(coeff, bool) or not isinstance(coeff, int):
                raise PolynomialError(f"Coefficient {coeff!r} is not an integer")
            if not isinstance(exponents, list) or any(isinstance(a, bool) or not isinstance(a, int) for a in exponents):
                raise PolynomialError(f"Exponents {exponents!r} are not a list of integers")
            terms.append((tuple(exponents), coeff))
        if nvars is None:
            nvars = len(terms[0][0])
        return cls.from_terms(nvars, terms)

    def to_records(self) -> list[dict[str, Any]]:
        return [{"coeff": self.terms[m], "exponents": list(m)} for m in sorted(self.terms)]

    def __add__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        if other.nvars != self.nvars:
            raise DimensionError(f"Cannot add polynomials in {self.nvars} and {other.nvars} variables")
        return IntegerPolynomial.from_terms(self.nvars, list(self.terms.items()) + list(other.terms.items()))

    def __mul__(self, other: "IntegerPolynomial") -> "IntegerPolynomial":
        if other.nvars != self.nvars:
            raise DimensionError(f"Cannot multiply polynomials in {self.nvars} and {other.nvars} variables")
        return IntegerPolynomial(self.nvars, _multiply_terms(self.terms, other.terms, lambda c: c))

    def coefficient_primes(self) -> set[int]:
        """
        Every prime dividing some coefficient.
        """
        primes: set[int] = set()
        for c in self.terms.values():
            if abs(c) > 1:
                primes.update(sympy.primefactors(abs(c)))
        return primes

    def weighted_degrees(self, w: WeightSystem) -> set[int]:
        return {weighted_degree(m, w) for m in self.terms}


def reduce_mod_p(f: IntegerPolynomial, p: int, field: Optional[FiniteField] = None) -> SparsePoly:
    """
    Reduce integer coefficients into F_p, or into a given field of characteristic p, dropping vanishing terms.
    """
    if field is None:
        field = field_make(p)
    elif field.p != p:
        raise DimensionError(f"{field} does not have characteristic {p}")
    return SparsePoly.from_terms(field, f.nvars, f.terms.items())
