import json
import random
import unittest

from ..Errors import ConfigurationError, DimensionError, NotQuasiHomogeneousError, SchemaError
from ..LocalCohomology import IsolatedStatus, Verdict
from ..Models import MODEL_TABLE
from ..Polynomials import IntegerPolynomial
from ..Semilinear import fitting_decomposition
from ..Snc import (
    Component,
    ComponentKind,
    DualGraph,
    SncConfig,
    betti1,
    classify_surface,
    component_h1_frobenius,
    h1_frobenius,
    h1_operator,
)

FERMAT_CUBIC = IntegerPolynomial.from_terms(3, [((3, 0, 0), 1), ((0, 3, 0), 1), ((0, 0, 3), 1)])

# y^2 z - x^3 - x^2 z, singular at (0 : 0 : 1).
NODAL_CUBIC = IntegerPolynomial.from_terms(3, [((0, 2, 1), 1), ((3, 0, 0), -1), ((2, 0, 1), -1)])


def rationals(n: int) -> list[Component]:
    return [Component.rational(f"E{i}") for i in range(n)]


def elliptic(id: str = "C") -> Component:
    return Component.plane_curve(id, FERMAT_CUBIC, 3)


def random_tree(rng: random.Random, n: int) -> list[tuple[str, str]]:
    return [(f"E{rng.randrange(i)}", f"E{i}") for i in range(1, n)]


class TestDualGraph(unittest.TestCase):
    def test_betti1(self) -> None:
        self.assertEqual(betti1(DualGraph(["A", "B", "C"], [["A", "B"], ["B", "C"]])), 0)
        self.assertEqual(betti1(DualGraph(["A", "B"], [["A", "B"], ["A", "B"]])), 1)
        self.assertEqual(betti1(DualGraph(["A"], [])), 0)
        self.assertEqual(betti1(DualGraph(["A", "B", "C"], [["A", "B"], ["B", "C"], ["C", "A"]])), 1)
        self.assertEqual(betti1(DualGraph([], [])), 0)

    def test_invalid_graphs(self) -> None:
        with self.assertRaises(ConfigurationError):
            DualGraph(["A", "A"], [])
        with self.assertRaises(ConfigurationError):
            DualGraph(["A", "B", "C"], [["A", "B", "C"]])
        with self.assertRaises(ConfigurationError):
            DualGraph(["A", "B"], [["A", "D"]])
        with self.assertRaises(ConfigurationError):
            DualGraph(["A"], [["A", "A"]])

    def test_equality_ignores_order(self) -> None:
        self.assertEqual(
            DualGraph(["A", "B", "C"], [["A", "B"], ["C", "B"]]), DualGraph(["C", "B", "A"], [["B", "C"], ["B", "A"]])
        )
        self.assertNotEqual(DualGraph(["A", "B"], [["A", "B"]]), DualGraph(["A", "B"], [["A", "B"], ["A", "B"]]))


class TestComponents(unittest.TestCase):
    def test_h1_frobenius(self) -> None:
        self.assertEqual(component_h1_frobenius(Component.rational("P"), 5).dim, 0)
        self.assertEqual(component_h1_frobenius(elliptic(), 7).to_ints(), [[6]])
        self.assertEqual(component_h1_frobenius(elliptic(), 5).to_ints(), [[0]])
        self.assertEqual(component_h1_frobenius(Component.explicit("X", [[4, 1], [0, 0]]), 3).to_ints(), [[1, 1], [0, 0]])

    def test_h1_dim(self) -> None:
        quartic = IntegerPolynomial.from_terms(3, [((4, 0, 0), 1), ((0, 4, 0), 1), ((0, 0, 4), 1)])
        self.assertEqual(Component.plane_curve("Q", quartic, 4).h1_dim, 3)
        self.assertEqual(elliptic().h1_dim, 1)
        self.assertEqual(Component.rational("P").h1_dim, 0)

    def test_invalid_components(self) -> None:
        with self.assertRaises(NotQuasiHomogeneousError):
            Component.plane_curve("C", FERMAT_CUBIC, 4)
        with self.assertRaises(NotQuasiHomogeneousError):
            Component.plane_curve("C", FERMAT_CUBIC + IntegerPolynomial.from_terms(3, [((1, 0, 0), 1)]), 3)
        with self.assertRaises(DimensionError):
            Component.plane_curve("C", IntegerPolynomial.from_terms(2, [((3, 0), 1), ((0, 3), 1)]), 3)
        with self.assertRaises(DimensionError):
            Component.explicit("X", [[1, 0], [0]])
        with self.assertRaises(ConfigurationError):
            Component("C", ComponentKind.PLANE_CURVE)

    def test_records(self) -> None:
        for c in (Component.rational("P"), elliptic(), Component.explicit("X", [[1, 2], [3, 4]])):
            self.assertEqual(Component.from_dict(c.to_dict()), c)
        for record in (
            {"id": "A"},
            {"id": "A", "kind": "line"},
            {"id": "A", "kind": "plane_curve", "data": {"degree": "3", "terms": []}},
            {"id": "A", "kind": "plane_curve", "data": {"degree": 3, "terms": [{"coeff": 1}]}},
            {"id": "A", "kind": "explicit", "data": {"matrix": [[1.5]]}},
            {"id": "A", "kind": "explicit", "data": []},
        ):
            with self.assertRaises(SchemaError):
                Component.from_dict(record)


class TestSncConfig(unittest.TestCase):
    def test_invalid_configurations(self) -> None:
        with self.assertRaises(ConfigurationError):
            SncConfig.build(rationals(2), [["E0", "E1"]], 4)
        with self.assertRaises(ConfigurationError):
            SncConfig(tuple(rationals(2)), DualGraph(["E0", "E2"], []), 5)
        with self.assertRaises(ConfigurationError):
            SncConfig.build(rationals(3), [["E0", "E1", "E2"]], 5)

    def test_disconnected_warning(self) -> None:
        with self.assertLogs("FNilpotent", level="WARNING") as logs:
            SncConfig.build(rationals(2), [], 5)
        self.assertIn("2 connected components", logs.output[0])

    def test_documents(self) -> None:
        document = MODEL_TABLE["elliptic"].document
        z = SncConfig.from_dict(document)
        self.assertEqual(z.prime, 5)
        self.assertEqual(SncConfig.from_dict(z.to_dict()), z)
        self.assertEqual(SncConfig.from_dict(document, prime=7).prime, 7)
        self.assertEqual(z.with_prime(7), SncConfig.from_dict(document, prime=7))

        for bad in (
            [],
            {"prime": 5},
            {"prime": 5, "components": [], "edges": "E0-E1"},
            {"components": [{"id": "E0", "kind": "rational"}]},
            {"prime": True, "components": [{"id": "E0", "kind": "rational"}]},
        ):
            with self.assertRaises(SchemaError):
                SncConfig.from_dict(bad)


class TestH1Frobenius(unittest.TestCase):
    def test_examples(self) -> None:
        tree = SncConfig.build(rationals(3), [["E0", "E1"], ["E1", "E2"]], 5)
        h1 = h1_frobenius(tree)
        self.assertEqual((h1.ss_dim, h1.nil_dim, h1.graph_part), (0, 0, 0))

        cycle = SncConfig.build(rationals(2), [["E0", "E1"], ["E0", "E1"]], 5)
        h1 = h1_frobenius(cycle)
        self.assertEqual((h1.ss_dim, h1.nil_dim, h1.graph_part), (1, 0, 1))

        supersingular = SncConfig.build([elliptic()], [], 5)
        h1 = h1_frobenius(supersingular)
        self.assertEqual((h1.ss_dim, h1.nil_dim), (0, 1))
        self.assertEqual(h1.components[0].smooth.status, IsolatedStatus.PASS)

    def test_dimension_is_betti1_plus_genera(self) -> None:
        components = [elliptic("C1"), elliptic("C2"), Component.rational("P")]
        edges = [["C1", "P"], ["C2", "P"], ["C1", "C2"]]
        for p in (5, 7, 11, 13):
            z = SncConfig.build(components, edges, p)
            h1 = h1_frobenius(z, smooth_depth=0)
            self.assertEqual(h1.dim, betti1(z.graph) + sum(c.h1_dim for c in components))

    def test_operator(self) -> None:
        z = SncConfig.build([elliptic(), Component.rational("P")], [["C", "P"], ["C", "P"]], 7)
        phi = h1_operator(z)
        self.assertEqual(phi.to_ints(), [[1, 0], [0, 6]])
        self.assertEqual(fitting_decomposition(phi).ss_dim, h1_frobenius(z).ss_dim)

    def test_singular_component_warning(self) -> None:
        z = SncConfig.build([Component.plane_curve("N", NODAL_CUBIC, 3)], [], 5)
        with self.assertLogs("FNilpotent", level="WARNING") as logs:
            h1 = h1_frobenius(z)
        self.assertEqual(h1.components[0].smooth.status, IsolatedStatus.FAIL)
        self.assertIn("looks singular", logs.output[0])


class TestClassifySurface(unittest.TestCase):
    def test_examples(self) -> None:
        tree = SncConfig.build(rationals(3), [["E0", "E1"], ["E1", "E2"]], 5)
        result = classify_surface(tree)
        self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
        self.assertEqual(result.obstructions, ())

        cycle = SncConfig.build(rationals(2), [["E0", "E1"], ["E0", "E1"]], 5)
        result = classify_surface(cycle)
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        self.assertEqual(result.obstructions, ("graph",))

        ordinary = SncConfig.build([elliptic()], [], 7)
        result = classify_surface(ordinary)
        self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
        self.assertEqual(result.obstructions, ("component:C",))

        both = SncConfig.build([elliptic(), Component.explicit("X", [[1]])], [["C", "X"], ["X", "C"]], 7)
        result = classify_surface(both)
        self.assertEqual(result.obstructions, ("graph", "component:C", "component:X"))
        self.assertEqual(result.ss_dim, 3)

        nilpotent = SncConfig.build([Component.explicit("X", [[0, 1], [0, 0]]), elliptic()], [["X", "C"]], 5)
        result = classify_surface(nilpotent)
        self.assertEqual(result.verdict, Verdict.F_NILPOTENT)
        self.assertEqual((result.ss_dim, result.nil_dim), (0, 3))

    def test_to_dict(self) -> None:
        record = classify_surface(SncConfig.build([elliptic()], [], 7)).to_dict()
        self.assertEqual(record["verdict"], "NOT_F_NILPOTENT")
        self.assertEqual(record["per_component"][0]["smooth_check"], "PASS")
        json.dumps(record)

    def test_random_trees_and_cycles(self) -> None:
        rng = random.Random(2024)
        for i in range(200):
            n = rng.randint(1, 12)
            edges = random_tree(rng, n)
            if i % 2 and n > 1:
                extra = rng.randint(1, 3)
                for _ in range(extra):
                    u, v = rng.sample(range(n), 2)
                    edges.append((f"E{u}", f"E{v}"))
                z = SncConfig.build(rationals(n), edges, rng.choice([2, 3, 5, 7]))
                result = classify_surface(z)
                self.assertEqual(betti1(z.graph), extra)
                self.assertEqual(result.verdict, Verdict.NOT_F_NILPOTENT)
                self.assertEqual(result.obstructions, ("graph",))
                self.assertEqual(result.ss_dim, extra)
            else:
                z = SncConfig.build(rationals(n), edges, rng.choice([2, 3, 5, 7]))
                self.assertEqual(classify_surface(z).verdict, Verdict.F_NILPOTENT)
                self.assertEqual(h1_frobenius(z).dim, 0)

    def test_elliptic_law(self) -> None:
        for p in (5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97):
            result = classify_surface(SncConfig.build([elliptic()], [], p), smooth_depth=0)
            expected = Verdict.NOT_F_NILPOTENT if p % 3 == 1 else Verdict.F_NILPOTENT
            self.assertEqual(result.verdict, expected, p)

    def test_rational_leaf_invariance(self) -> None:
        rng = random.Random(5)
        base_components = [elliptic(), Component.rational("E0"), Component.rational("E1")]
        base_edges = [["C", "E0"], ["E0", "E1"], ["E1", "C"]]
        for p in (7, 11, 13):
            z = SncConfig.build(base_components, base_edges, p)
            before = h1_frobenius(z, smooth_depth=0)
            components, edges = list(base_components), list(base_edges)
            for k in range(4):
                leaf = Component.rational(f"L{k}")
                edges.append([rng.choice([c.id for c in components]), leaf.id])
                components.append(leaf)
                extended = SncConfig.build(components, edges, p)
                after = h1_frobenius(extended, smooth_depth=0)
                self.assertEqual(betti1(extended.graph), betti1(z.graph))
                self.assertEqual(after.ss_dim, before.ss_dim)

    def test_additive_over_connected_components(self) -> None:
        cycle_edges = [["E0", "E1"], ["E0", "E1"]]
        first = SncConfig.build(rationals(2), cycle_edges, 7)
        second = SncConfig.build([elliptic()], [], 7)
        with self.assertLogs("FNilpotent", level="WARNING"):
            union = SncConfig.build(rationals(2) + [elliptic()], cycle_edges, 7)
        self.assertEqual(
            h1_frobenius(union).ss_dim, h1_frobenius(first).ss_dim + h1_frobenius(second).ss_dim
        )
