import functools
import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Optional, Union

import sympy

from .Errors import FieldError

# Extension fields are limited to this many elements; prime fields are unbounded.
MAX_EXTENSION_ORDER = 1 << 16

# Conway polynomials for the small fields used most often, coefficients listed from the constant term upwards.
CONWAY_POLYNOMIALS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 2): (3, 6, 1),
    (11, 2): (2, 7, 1),
    (13, 2): (2, 12, 1),
}


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    """
    Reduce a polynomial over F_p modulo a monic polynomial g. Both are coefficient lists, constant term first.
    """
    a = [x % p for x in a]
    dg = len(g) - 1
    for i in range(len(a) - 1, dg - 1, -1):
        c = a[i]
        if c:
            for j in range(dg + 1):
                a[i - dg + j] = (a[i - dg + j] - c * g[j]) % p
    return _trim(a[:dg])


def _poly_mulmod(a: Sequence[int], b: Sequence[int], g: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _poly_mod(prod, g, p)


def _poly_powmod(base: Sequence[int], n: int, g: Sequence[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(base, g, p)
    while n:
        if n & 1:
            result = _poly_mulmod(result, base, g, p)
        base = _poly_mulmod(base, base, g, p)
        n >>= 1
    return result


def _poly_gcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim([x % p for x in a]), _trim([x % p for x in b])
    while b:
        # Make b monic so _poly_mod can divide by it.
        inv = pow(b[-1], -1, p)
        b = [(x * inv) % p for x in b]
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(g: Sequence[int], p: int) -> bool:
    """
    Decide whether a monic polynomial over F_p is irreducible, by checking that gcd(t^(p^i) - t, g) = 1 for every
    i up to half its degree.

    :param g: Monic coefficient list, constant term first.
    :param p: The characteristic.
    :return: Whether g is irreducible.
    """
    degree = len(g) - 1
    if degree < 1:
        return False
    h = [0, 1]
    for _ in range(degree // 2):
        h = _poly_powmod(h, p, g, p)
        diff = list(h) + [0] * max(0, 2 - len(h))
        diff[1] -= 1
        if len(_poly_gcd(g, _trim(diff), p)) > 1:
            return False
    return True


def is_primitive(g: Sequence[int], p: int) -> bool:
    """
    Decide whether the class of t generates the multiplicative group of F_p[t]/(g), assuming g is irreducible.
    """
    order = p ** (len(g) - 1) - 1
    return all(_poly_powmod([0, 1], order // r, g, p) != [1] for r in sympy.primefactors(order))


@functools.cache
def default_modulus(p: int, e: int) -> tuple[int, ...]:
    """
    The default defining polynomial of F_{p^e}: the Conway polynomial from the fixed table when present, otherwise the
    lexicographically smallest primitive monic polynomial of degree e. The result is deterministic across runs.

    :raises FieldError: If the field is too large to search.
    """
    if (p, e) in CONWAY_POLYNOMIALS:
        return CONWAY_POLYNOMIALS[(p, e)]
    if p**e > MAX_EXTENSION_ORDER:
        raise FieldError(f"No default modulus for F_{p}^{e}: extension fields are limited to {MAX_EXTENSION_ORDER} elements")

    # Coefficients are enumerated from t^(e-1) down to the constant term.
    for high_to_low in itertools.product(range(p), repeat=e):
        if high_to_low[-1] == 0:
            continue
        g = tuple(reversed(high_to_low)) + (1,)
        if is_irreducible(g, p) and is_primitive(g, p):
            return g
    raise FieldError(f"No primitive polynomial of degree {e} found over F_{p}")


@dataclass(frozen=True)
class FiniteField:
    """
    The finite field F_{p^e}, realised as F_p[t]/(modulus) for e > 1. Build instances with field_make, which validates
    the characteristic and the modulus.
    """

    p: int
    e: int = 1
    modulus: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.e == 1 and self.modulus is not None:
            raise FieldError("Prime fields carry no modulus")
        if self.e > 1 and (self.modulus is None or len(self.modulus) != self.e + 1 or self.modulus[-1] != 1):
            raise FieldError(f"F_{self.p}^{self.e} needs a monic modulus of degree {self.e}")

    @property
    def order(self) -> int:
        return self.p**self.e

    @property
    def is_prime_field(self) -> bool:
        return self.e == 1

    @functools.cached_property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.e)

    @functools.cached_property
    def one(self) -> "FieldElement":
        return FieldElement(self, (1,) + (0,) * (self.e - 1))

    @functools.cached_property
    def generator(self) -> "FieldElement":
        """
        The class of t, or 1 in a prime field.
        """
        if self.e == 1:
            return self.one
        return FieldElement(self, (0, 1) + (0,) * (self.e - 2))

    def __call__(self, value: Union[int, Sequence[int], "FieldElement"]) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.field != self:
                raise FieldError(f"Element of {value.field} does not belong to {self}")
            return value
        if isinstance(value, int):
            return self.from_int(value)
        coords = [int(c) % self.p for c in value]
        if len(coords) > self.e:
            if self.modulus is None:
                raise FieldError(f"{len(coords)} coordinates given for an element of {self}")
            coords = _poly_mod(coords, self.modulus, self.p)
        return FieldElement(self, tuple(coords) + (0,) * (self.e - len(coords)))

    def from_int(self, n: int) -> "FieldElement":
        return FieldElement(self, (n % self.p,) + (0,) * (self.e - 1))

    def from_index(self, index: int) -> "FieldElement":
        """
        The element whose coordinates are the base-p digits of index, lowest digit first.
        """
        if not 0 <= index < self.order:
            raise FieldError(f"Index {index} out of range for a field of {self.order} elements")
        coords = []
        for _ in range(self.e):
            index, digit = divmod(index, self.p)
            coords.append(digit)
        return FieldElement(self, tuple(coords))

    def elements(self) -> Iterator["FieldElement"]:
        """
        Enumerate every element, in index order (zero first).

        :raises FieldError: If the field is too large to enumerate.
        """
        if self.order > MAX_EXTENSION_ORDER:
            raise FieldError(f"Refusing to enumerate {self}: more than {MAX_EXTENSION_ORDER} elements")
        for index in range(self.order):
            yield self.from_index(index)

    def _mul(self, a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
        p, e = self.p, self.e
        if e == 1:
            return ((a[0] * b[0]) % p,)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        mod = self.modulus
        for k in range(2 * e - 2, e - 1, -1):
            c = prod[k]
            if c:
                for i in range(e):
                    prod[k - e + i] -= c * mod[i]
        return tuple(x % p for x in prod[:e])

    def __str__(self) -> str:
        return f"F_{self.order}"


@dataclass(frozen=True, eq=False)
class FieldElement:
    """
    An element of a finite field, stored as its coordinate vector over F_p in the basis 1, t, ..., t^(e-1).
    Integers are accepted on either side of every operator and read as elements of the prime subfield.
    """

    field: FiniteField
    coords: tuple[int, ...]

    def _coerce(self, other: object) -> Optional[tuple[int, ...]]:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError(f"Cannot combine elements of {self.field} and {other.field}")
            return other.coords
        if isinstance(other, int):
            return self.field.from_int(other).coords
        return None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement) and other.field != self.field:
            return False
        coords = self._coerce(other)
        if coords is None:
            return NotImplemented
        return self.coords == coords

    def __hash__(self) -> int:
        # Elements of the prime subfield compare equal to their residue, so they must hash like it.
        if not any(self.coords[1:]):
            return hash(self.coords[0])
        return hash((self.field.p, self.field.e, self.coords))

    def __bool__(self) -> bool:
        return any(self.coords)

    def __int__(self) -> int:
        if not self.field.is_prime_field:
            raise FieldError(f"{self} is not an element of a prime field")
        return self.coords[0]

    def __add__(self, other: object) -> "FieldElement":
        coords = self._coerce(other)
        if coords is None:
            return NotImplemented
        p = self.field.p
        return FieldElement(self.field, tuple((x + y) % p for x, y in zip(self.coords, coords)))

    __radd__ = __add__

    def __neg__(self) -> "FieldElement":
        p = self.field.p
        return FieldElement(self.field, tuple((-x) % p for x in self.coords))

    def __sub__(self, other: object) -> "FieldElement":
        coords = self._coerce(other)
        if coords is None:
            return NotImplemented
        p = self.field.p
        return FieldElement(self.field, tuple((x - y) % p for x, y in zip(self.coords, coords)))

    def __rsub__(self, other: object) -> "FieldElement":
        return -self + other

    def __mul__(self, other: object) -> "FieldElement":
        coords = self._coerce(other)
        if coords is None:
            return NotImplemented
        return FieldElement(self.field, self.field._mul(self.coords, coords))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        """
        :raises FieldError: If the element is zero.
        """
        if not self:
            raise FieldError("Zero has no inverse")
        if self.field.is_prime_field:
            return FieldElement(self.field, (pow(self.coords[0], -1, self.field.p),))
        return self ** (self.field.order - 2)

    def __truediv__(self, other: object) -> "FieldElement":
        coords = self._coerce(other)
        if coords is None:
            return NotImplemented
        return self * FieldElement(self.field, coords).inverse()

    def __rtruediv__(self, other: object) -> "FieldElement":
        return self.inverse() * other

    def __pow__(self, n: int) -> "FieldElement":
        field = self.field
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return field.one
        if not self:
            return field.zero
        if field.is_prime_field:
            return FieldElement(field, (pow(self.coords[0], n, field.p),))
        # The multiplicative group has order q - 1.
        n %= field.order - 1
        result, base = field.one.coords, self.coords
        while n:
            if n & 1:
                result = field._mul(result, base)
            base = field._mul(base, base)
            n >>= 1
        return FieldElement(field, result)

    def frobenius(self) -> "FieldElement":
        if self.field.is_prime_field:
            return self
        return self**self.field.p

    def to_index(self) -> int:
        return sum(c * self.field.p**i for i, c in enumerate(self.coords))

    def __str__(self) -> str:
        if self.field.is_prime_field:
            return str(self.coords[0])
        parts = []
        for i in range(self.field.e - 1, -1, -1):
            c = self.coords[i]
            if not c:
                continue
            power = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
            if i == 0:
                parts.append(str(c))
            else:
                parts.append(power if c == 1 else f"{c}{power}")
        return " + ".join(parts) if parts else "0"

    def __repr__(self) -> str:
        return f"FieldElement({self}, {self.field})"


@functools.lru_cache(maxsize=None)
def _make_field(p: int, e: int, modulus: Optional[tuple[int, ...]]) -> FiniteField:
    if not sympy.isprime(p):
        raise FieldError(f"Characteristic {p} is not prime")
    if e < 1:
        raise FieldError(f"Extension degree must be at least 1, got {e}")
    if e == 1:
        if modulus is not None and len(_trim([c % p for c in modulus])) != 2:
            raise FieldError(f"Modulus {modulus} does not have degree 1")
        return FiniteField(p)
    if p**e > MAX_EXTENSION_ORDER:
        raise FieldError(f"F_{p}^{e} has more than {MAX_EXTENSION_ORDER} elements")

    if modulus is None:
        modulus = default_modulus(p, e)
    else:
        reduced = _trim([c % p for c in modulus])
        if len(reduced) != e + 1:
            raise FieldError(f"Modulus {modulus} does not have degree {e} over F_{p}")
        inv = pow(reduced[-1], -1, p)
        modulus = tuple((c * inv) % p for c in reduced)
    if not is_irreducible(modulus, p):
        raise FieldError(f"Modulus {modulus} is reducible over F_{p}")
    return FiniteField(p, e, modulus)


def field_make(p: int, e: int = 1, modulus: Optional[Sequence[int]] = None) -> FiniteField:
    """
    Build the finite field with p^e elements.

    :param p: The characteristic; must be prime.
    :param e: The extension degree.
    :param modulus: Defining polynomial of degree e as coefficients from the constant term upwards. It is made monic.
        When omitted for e > 1 the default modulus is used.
    :return: The field. Equal arguments return the same object.
    :raises FieldError: For a non-prime p, e < 1, a modulus of the wrong degree, a reducible modulus, or an
        extension with more than 2^16 elements.
    """
    return _make_field(int(p), int(e), tuple(int(c) for c in modulus) if modulus is not None else None)


def frobenius(x: FieldElement) -> FieldElement:
    """
    The Frobenius automorphism x -> x^p.
    """
    return x.frobenius()
