import itertools
import json
import random
import unittest

from ..Errors import DimensionError, NotQuasiHomogeneousError, PolynomialError
from ..Fields import field_make
from ..LocalCohomology import (
    NOT_RUN,
    HypersurfaceData,
    IsolatedStatus,
    Verdict,
    a_invariant,
    classify_graded,
    degree_piece,
    frobenius_degree_map,
    frobenius_on_degree_zero,
    isolated_check,
    multiplication_matrix,
    neg_monomials,
)
from ..Polynomials import SparsePoly, WeightSystem, weighted_degree
from ..Semilinear import is_nilpotent, rank


def hypersurface(p: int, weights: tuple[int, ...], *terms: tuple[int, tuple[int, ...]], e: int = 1) -> HypersurfaceData:
    field = field_make(p, e)
    f = SparsePoly.from_terms(field, len(weights), [(m, c) for c, m in terms])
    return HypersurfaceData(f, WeightSystem(weights))


def fermat(p: int, d: int, nvars: int = 3, e: int = 1) -> HypersurfaceData:
    terms = [(1, tuple(d if i == j else 0 for j in range(nvars))) for i in range(nvars)]
    return hypersurface(p, (1,) * nvars, *terms, e=e)


def brieskorn(p: int) -> HypersurfaceData:
    return hypersurface(p, (21, 14, 6), (1, (2, 0, 0)), (1, (0, 3, 0)), (1, (0, 0, 7)))


def cusp(p: int) -> HypersurfaceData:
    return hypersurface(p, (2, 3), (-1, (3, 0)), (1, (0, 2)))


def node(p: int) -> HypersurfaceData:
    return hypersurface(p, (1, 1), (1, (1, 1)))


def monomials_of_degree(weights: tuple[int, ...], d: int) -> list[tuple[int, ...]]:
    ranges = [range(d // w + 1) for w in weights]
    return [m for m in itertools.product(*ranges) if weighted_degree(m, WeightSystem(weights)) == d]


def random_hypersurface(rng: random.Random, p: int) -> HypersurfaceData:
    """
    A random quasi-homogeneous polynomial in three variables of degree at most 6 whose degree-zero piece is nonzero.
    """
    field = field_make(p)
    while True:
        weights = rng.choice([(1, 1, 1), (1, 1, 1), (1, 1, 2), (1, 2, 3)])
        d = rng.randint(sum(weights), 6)
        candidates = monomials_of_degree(weights, d)
        chosen = rng.sample(candidates, rng.randint(1, min(5, len(candidates))))
        f = SparsePoly.from_terms(field, 3, [(m, rng.randrange(1, p)) for m in chosen])
        if not f.is_zero():
            return HypersurfaceData(f, WeightSystem(weights))


def repeated_power(f: SparsePoly, n: int) -> SparsePoly:
    result = SparsePoly.monomial(f.field, (0,) * f.nvars)
    for _ in range(n):
        result = result * f
    return result


def truncation_images(H: HypersurfaceData, source: list[tuple[int, ...]]) -> dict[tuple[int, ...], dict]:
    """
    For every source exponent a, the surviving terms of f^(p-1)·x^(-p·a) as {b: coefficient of x^(-b)}.
    """
    p = H.field.p
    g = repeated_power(H.f, p - 1)
    images = {}
    for a in source:
        image: dict = {}
        for u, c in g.terms.items():
            b = tuple(p * ai - ui for ai, ui in zip(a, u))
            if min(b) >= 1:
                image[b] = image.get(b, H.field.zero) + c
        images[a] = image
    return images


class TestHypersurfaceData(unittest.TestCase):
    def test_a_invariant(self) -> None:
        self.assertEqual(a_invariant(brieskorn(5)), 1)
        self.assertEqual(a_invariant(fermat(5, 4)), 1)
        self.assertEqual(a_invariant(fermat(3, 2)), -1)
        self.assertEqual(brieskorn(5).degree, 42)

    def test_rejects_bad_input(self) -> None:
        with self.assertRaises(NotQuasiHomogeneousError):
            hypersurface(5, (1, 1), (1, (2, 0)), (1, (0, 3)))
        with self.assertRaises(PolynomialError):
            HypersurfaceData(SparsePoly.zero(field_make(5), 2), WeightSystem.uniform(2))
        with self.assertRaises(DimensionError):
            hypersurface(5, (1,), (1, (3,)))
        with self.assertRaises(DimensionError):
            HypersurfaceData(fermat(5, 4).f, WeightSystem.uniform(2))


class TestNegativeMonomials(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(neg_monomials(fermat(5, 4), 4), [(1, 1, 2), (1, 2, 1), (2, 1, 1)])
        self.assertEqual(neg_monomials(brieskorn(5), 42), [])
        self.assertEqual(neg_monomials(cusp(5), 6), [])
        self.assertEqual(neg_monomials(fermat(5, 4), 0), [])

    def test_genus(self) -> None:
        for d in (3, 4, 5, 6):
            H = fermat(11, d)
            self.assertEqual(len(neg_monomials(H, H.degree)), (d - 1) * (d - 2) // 2)

    def test_weighted_degrees(self) -> None:
        H = hypersurface(5, (1, 2, 3), (1, (6, 0, 0)), (1, (0, 3, 0)), (1, (0, 0, 2)))
        for s in range(0, 15):
            found = neg_monomials(H, s)
            self.assertEqual(found, sorted(found))
            for a in found:
                self.assertGreaterEqual(min(a), 1)
                self.assertEqual(weighted_degree(a, H.weights), s)
            expected = [m for m in monomials_of_degree((1, 2, 3), s) if min(m) >= 1]
            self.assertEqual(sorted(expected), found)


class TestDegreePiece(unittest.TestCase):
    def test_node(self) -> None:
        piece = degree_piece(node(5), 0)
        self.assertEqual(piece.ambient_basis, ((1, 1),))
        self.assertEqual(piece.dim, 1)

    def test_conic_in_degree_minus_two(self) -> None:
        H = hypersurface(5, (1, 1), (1, (2, 0)), (1, (0, 2)))
        piece = degree_piece(H, -2)
        self.assertEqual(piece.ambient_basis, ((1, 3), (2, 2), (3, 1)))
        self.assertEqual(piece.dim, 2)

        m = multiplication_matrix(H, -2)
        for v in piece.kernel_basis:
            self.assertFalse(any(sum((row[j] * v[j] for j in range(3)), H.field.zero) for row in m))
        f5 = H.field
        expected = [(f5.zero, f5.one, f5.zero), (f5.one, f5.zero, -f5.one)]
        self.assertEqual(rank(piece.kernel_basis + tuple(expected), 3), 2)

    def test_fermat_quartic_degree_zero(self) -> None:
        piece = degree_piece(fermat(5, 4), 0)
        self.assertEqual(piece.dim, 3)
        self.assertEqual(len(piece.ambient_basis), 3)

    def test_negative_degrees_are_bounded_by_ambient(self) -> None:
        H = fermat(7, 3)
        for e in range(-4, 1):
            piece = degree_piece(H, e)
            self.assertLessEqual(piece.dim, len(piece.ambient_basis))
            self.assertEqual(list(piece.ambient_basis), neg_monomials(H, H.degree - e))


class TestFrobenius(unittest.TestCase):
    def test_examples(self) -> None:
        self.assertEqual(frobenius_on_degree_zero(fermat(5, 4)).to_ints(), [[2, 0, 0], [0, 2, 0], [0, 0, 2]])
        self.assertEqual(frobenius_on_degree_zero(fermat(3, 4)).to_ints(), [[0, 0, 0]] * 3)
        for p in (2, 3, 5, 7, 101):
            self.assertEqual(frobenius_on_degree_zero(node(p)).to_ints(), [[1]])
        self.assertEqual(frobenius_on_degree_zero(fermat(7, 3)).to_ints(), [[6]])
        self.assertEqual(frobenius_on_degree_zero(fermat(5, 3)).to_ints(), [[0]])
        self.assertEqual(frobenius_on_degree_zero(brieskorn(11)).dim, 0)

    def test_matches_truncation(self) -> None:
        rng = random.Random(1234)
        for _ in range(100):
            p = rng.choice([3, 5, 7])
            H = random_hypersurface(rng, p)
            basis = neg_monomials(H, H.degree)
            phi = frobenius_on_degree_zero(H)
            self.assertEqual(phi.dim, len(basis))
            images = truncation_images(H, basis)
            for j, a in enumerate(basis):
                for b in images[a]:
                    self.assertIn(b, basis)
                for i, b in enumerate(basis):
                    self.assertEqual(phi.matrix[i][j], images[a].get(b, 0))

    def test_degree_map(self) -> None:
        rng = random.Random(99)
        for _ in range(40):
            p = rng.choice([2, 3, 5, 7])
            H = random_hypersurface(rng, p)
            for e in (-2, -1, 0):
                dm = frobenius_degree_map(H, e)
                self.assertEqual(list(dm.source_basis), neg_monomials(H, H.degree - e))
                self.assertEqual(list(dm.target_basis), neg_monomials(H, H.degree - p * e))
                self.assertEqual(len(dm.matrix), len(dm.target_basis))
                for a, image in truncation_images(H, list(dm.source_basis)).items():
                    for b in image:
                        self.assertEqual(weighted_degree(b, H.weights), H.degree - p * e)
                        self.assertIn(b, dm.target_basis)
                if e == 0:
                    self.assertEqual(dm.matrix, frobenius_on_degree_zero(H).matrix)

    def test_degree_map_of_quartic(self) -> None:
        dm = frobenius_degree_map(fermat(3, 4), -1)
        self.assertEqual(dm.shape, (15, 6))
        dm = frobenius_degree_map(brieskorn(5), 0)
        self.assertEqual(dm.shape, (0, 0))

    def test_weight_scaling(self) -> None:
        for H in (fermat(5, 4), fermat(7, 3), cusp(7), node(3)):
            scaled = H.scaled(3)
            self.assertEqual(scaled.degree, 3 * H.degree)
            self.assertEqual(neg_monomials(scaled, scaled.degree), neg_monomials(H, H.degree))
            self.assertEqual(frobenius_on_degree_zero(scaled), frobenius_on_degree_zero(H))
            self.assertEqual(classify_graded(scaled).verdict, classify_graded(H).verdict)

    def test_constant_scaling(self) -> None:
        H = fermat(7, 3, e=2)
        c = H.field.generator
        scaled = HypersurfaceData(H.f.scale(c), H.weights)
        phi, psi = frobenius_on_degree_zero(H), frobenius_on_degree_zero(scaled)
        factor = c ** (H.field.p - 1)
        for row, scaled_row in zip(phi.matrix, psi.matrix):
            self.assertEqual(tuple(x * factor for x in row), scaled_row)
        self.assertEqual(is_nilpotent(phi), is_nilpotent(psi))
        self.assertEqual(classify_graded(H).verdict, classify_graded(scaled).verdict)


class TestClassifyGraded(unittest.TestCase):
    def test_brieskorn(self) -> None:
        for p in (5, 11, 13, 101):
            result = classify_graded(brieskorn(p))
            self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
            self.assertEqual(result.reason, "empty degree-zero piece")
            self.assertEqual(result.basis_dim, 0)

    def test_cusp(self) -> None:
        for p in (5, 7, 97):
            result = classify_graded(cusp(p))
            self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
            self.assertEqual(result.basis, ())

    def test_fermat_quartic(self) -> None:
        result = classify_graded(fermat(5, 4))
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        self.assertEqual(result.reason, "Frobenius has a stable part in degree zero")
        self.assertEqual((result.ss_dim, result.nil_dim), (3, 0))
        # 2·v = v has no nonzero solution over F_5.
        self.assertIsNone(result.fixed_vector)

        result = classify_graded(fermat(3, 4))
        self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
        self.assertEqual(result.reason, "Frobenius is nilpotent in degree zero")
        self.assertEqual((result.ss_dim, result.nil_dim), (0, 3))

        for p in (7, 11, 13, 17, 19, 29):
            expected = Verdict.NOT_F_NILPOTENT if p % 4 == 1 else Verdict.F_NILPOTENT
            self.assertEqual(classify_graded(fermat(p, 4)).verdict, expected)

    def test_negative_a_invariant(self) -> None:
        result = classify_graded(fermat(3, 2))
        self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
        self.assertEqual(result.reason, "negative a-invariant")
        self.assertEqual(result.a_invariant, -1)

    def test_node_fixed_vector(self) -> None:
        result = classify_graded(node(7))
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        self.assertEqual(result.fixed_vector, (1,))

    def test_extension_field(self) -> None:
        result = classify_graded(node(2))
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        result = classify_graded(fermat(3, 4, e=2))
        self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
        result = classify_graded(fermat(5, 4, e=2))
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        self.assertEqual(result.ss_dim, 3)

    def test_to_dict(self) -> None:
        H = fermat(5, 4)
        record = classify_graded(H, isolated_check(H)).to_dict()
        self.assertEqual(record["verdict"], "NOT_F_NILPOTENT")
        self.assertEqual(record["basis"], [[1, 1, 2], [1, 2, 1], [2, 1, 1]])
        self.assertEqual(record["isolated"], "PASS")
        self.assertIsNone(record["isolated_witness"])
        self.assertEqual(len(record["assumptions"]), 2)
        json.dumps(record)

    def test_isolated_check_does_not_change_verdict(self) -> None:
        H = fermat(2, 4)
        check = isolated_check(H)
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        self.assertEqual(classify_graded(H, check).verdict, classify_graded(H).verdict)


class TestIsolatedCheck(unittest.TestCase):
    def test_smooth_quartic(self) -> None:
        check = isolated_check(fermat(5, 4), 2)
        self.assertEqual(check.status, IsolatedStatus.PASS)
        self.assertEqual(check.extension_degree, 2)
        self.assertEqual(check.points_searched, 31 + 651)

    def test_non_isolated(self) -> None:
        H = hypersurface(5, (1, 1, 1), (1, (2, 1, 0)))
        check = isolated_check(H, 1)
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        self.assertEqual(check.point, (0, 1, 0))
        self.assertEqual(check.extension_degree, 1)

    def test_quartic_in_characteristic_two(self) -> None:
        check = isolated_check(fermat(2, 4))
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        self.assertEqual(check.point, (1, 0, 1))
        self.assertEqual(check.to_dict()["point"], ["1", "0", "1"])

    def test_weighted_search(self) -> None:
        check = isolated_check(cusp(5))
        self.assertEqual(check.status, IsolatedStatus.PASS)
        self.assertEqual(check.points_searched, 24)
        check = isolated_check(hypersurface(5, (1, 2), (1, (2, 1))))
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        self.assertEqual(check.point, (0, 1))

    def test_extension_base_field(self) -> None:
        check = isolated_check(fermat(3, 4, e=2), 1)
        self.assertEqual(check.status, IsolatedStatus.PASS)
        self.assertEqual(check.points_searched, 91)
        check = isolated_check(hypersurface(3, (1, 1, 1), (1, (2, 1, 0)), e=2), 1)
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        self.assertEqual(check.point, (0, 1, 0))
        self.assertEqual(check.extension_degree, 1)

    def test_bounds(self) -> None:
        self.assertIs(isolated_check(fermat(5, 4), 0), NOT_RUN)
        check = isolated_check(fermat(5, 4), 1, limit=10)
        self.assertEqual(check.status, IsolatedStatus.INCONCLUSIVE)
        self.assertEqual(check.extension_degree, 0)
        check = isolated_check(fermat(2, 4, e=2), 2)
        self.assertEqual(check.status, IsolatedStatus.FAIL)
        check = isolated_check(fermat(3, 4, e=2), 2)
        self.assertEqual(check.status, IsolatedStatus.INCONCLUSIVE)
        self.assertEqual(check.extension_degree, 1)
