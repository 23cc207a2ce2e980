from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple, Optional

import networkx as nx
import sympy

from .Errors import ConfigurationError, DimensionError, NotQuasiHomogeneousError, PolynomialError, SchemaError
from .Fields import field_make
from .LocalCohomology import (
    NOT_RUN,
    HypersurfaceData,
    IsolatedCheck,
    IsolatedStatus,
    Verdict,
    frobenius_on_degree_zero,
    isolated_check,
)
from .Polynomials import IntegerPolynomial, WeightSystem
from .Semilinear import FittingSplit, SemilinearOperator, fitting_decomposition
from .Utils import logger

SURFACE_ASSUMPTIONS: tuple[str, ...] = (
    "The configuration is the reduced exceptional fiber of a log resolution of a normal surface singularity. "
    "This is asserted by the user.",
    "Every intersection point is defined over F_p; Frobenius acts as the identity on dual graph cohomology.",
)


class ComponentKind(Enum):
    RATIONAL = "rational"
    PLANE_CURVE = "plane_curve"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Component:
    """
    One curve of a simple normal crossing configuration, described by the data needed for the Frobenius action on
    its H^1(O).

    RATIONAL components carry no data. PLANE_CURVE components carry a homogeneous integer polynomial in three
    variables and its degree. EXPLICIT components carry a square integer matrix, read over F_p.
    """

    id: str
    kind: ComponentKind
    polynomial: Optional[IntegerPolynomial] = None
    degree: Optional[int] = None
    matrix: Optional[tuple[tuple[int, ...], ...]] = None

    def __post_init__(self) -> None:
        if self.kind == ComponentKind.PLANE_CURVE:
            if self.polynomial is None or self.degree is None:
                raise ConfigurationError(f"Plane curve component {self.id} needs a polynomial and a degree")
            if self.polynomial.nvars != 3:
                raise DimensionError(
                    f"Plane curve component {self.id} must be given in 3 variables, not {self.polynomial.nvars}"
                )
            if self.degree < 1 or self.polynomial.weighted_degrees(WeightSystem.uniform(3)) != {self.degree}:
                raise NotQuasiHomogeneousError(
                    f"Plane curve component {self.id} is not homogeneous of degree {self.degree}"
                )
        elif self.kind == ComponentKind.EXPLICIT:
            if self.matrix is None:
                raise ConfigurationError(f"Explicit component {self.id} needs a matrix")
            for row in self.matrix:
                if len(row) != len(self.matrix):
                    raise DimensionError(f"Matrix of explicit component {self.id} is not square")
        elif self.polynomial is not None or self.matrix is not None:
            raise ConfigurationError(f"Rational component {self.id} takes no data")

    __hash__ = None

    @classmethod
    def rational(cls, id: str) -> "Component":
        return cls(str(id), ComponentKind.RATIONAL)

    @classmethod
    def plane_curve(cls, id: str, polynomial: IntegerPolynomial, degree: int) -> "Component":
        return cls(str(id), ComponentKind.PLANE_CURVE, polynomial=polynomial, degree=degree)

    @classmethod
    def explicit(cls, id: str, rows: Iterable[Iterable[int]]) -> "Component":
        return cls(str(id), ComponentKind.EXPLICIT, matrix=tuple(tuple(int(x) for x in row) for row in rows))

    @classmethod
    def from_dict(cls, data: Any) -> "Component":
        """
        Read a component record {"id", "kind", "data"}.

        :raises SchemaError: For records that do not follow the schema.
        """
        if not isinstance(data, dict) or "id" not in data or "kind" not in data:
            raise SchemaError(f"Malformed component record {data!r}")
        try:
            kind = ComponentKind(data["kind"])
        except ValueError:
            raise SchemaError(f"Unknown component kind {data['kind']!r}") from None
        payload = data.get("data") or {}
        if not isinstance(payload, dict):
            raise SchemaError(f"Component data must be an object, got {payload!r}")
        if kind == ComponentKind.RATIONAL:
            return cls.rational(data["id"])
        if kind == ComponentKind.PLANE_CURVE:
            if "terms" not in payload or not isinstance(payload.get("degree"), int):
                raise SchemaError(f"Plane curve component {data['id']} needs integer 'degree' and 'terms'")
            try:
                polynomial = IntegerPolynomial.from_records(payload["terms"], 3)
            except PolynomialError as e:
                raise SchemaError(f"Plane curve component {data['id']}: {e}") from e
            return cls.plane_curve(data["id"], polynomial, payload["degree"])
        matrix = payload.get("matrix")
        if not isinstance(matrix, list) or not all(
            isinstance(row, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in row) for row in matrix
        ):
            raise SchemaError(f"Explicit component {data['id']} needs an integer 'matrix'")
        return cls.explicit(data["id"], matrix)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {}
        if self.kind == ComponentKind.PLANE_CURVE:
            data = {"degree": self.degree, "terms": self.polynomial.to_records()}
        elif self.kind == ComponentKind.EXPLICIT:
            data = {"matrix": [list(row) for row in self.matrix]}
        return {"id": self.id, "kind": self.kind.value, "data": data}

    @property
    def h1_dim(self) -> int:
        if self.kind == ComponentKind.PLANE_CURVE:
            return (self.degree - 1) * (self.degree - 2) // 2
        if self.kind == ComponentKind.EXPLICIT:
            return len(self.matrix)
        return 0


class DualGraph:
    """
    The dual graph of a curve configuration: one vertex per component and one edge per intersection point, so two
    components meeting twice are joined by two parallel edges.

    :param vertices: Component ids.
    :param edges: Pairs of component ids.
    :raises ConfigurationError: For repeated vertices, unknown ids, self-loops, or an intersection listing a number of
        components other than two (a triple point).
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[Sequence[str]]) -> None:
        self.graph = nx.MultiGraph()
        for v in vertices:
            v = str(v)
            if v in self.graph:
                raise ConfigurationError(f"Component {v} is listed twice")
            self.graph.add_node(v)

        self._edges: list[tuple[str, str]] = []
        for edge in edges:
            ids = [str(x) for x in edge]
            if len(ids) != 2:
                raise ConfigurationError(
                    f"Intersection {ids} does not join exactly two components; triple points are not normal crossings"
                )
            u, v = ids
            for x in ids:
                if x not in self.graph:
                    raise ConfigurationError(f"Intersection {ids} names unknown component {x}")
            if u == v:
                raise ConfigurationError(f"Self-intersection of component {u} is not allowed")
            self.graph.add_edge(u, v)
            self._edges.append((u, v))

    @property
    def vertices(self) -> tuple[str, ...]:
        return tuple(self.graph.nodes)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return tuple(self._edges)

    def connected_components(self) -> int:
        if self.graph.number_of_nodes() == 0:
            return 0
        return nx.number_connected_components(self.graph)

    def is_connected(self) -> bool:
        return self.connected_components() <= 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DualGraph):
            return NotImplemented
        return set(self.vertices) == set(other.vertices) and Counter(map(frozenset, self.edges)) == Counter(
            map(frozenset, other.edges)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"DualGraph(vertices={list(self.vertices)}, edges={[list(e) for e in self.edges]})"


def betti1(g: DualGraph) -> int:
    """
    The first Betti number |E| - |V| + (number of connected components) of the dual graph.
    """
    return g.graph.number_of_edges() - g.graph.number_of_nodes() + g.connected_components()


@dataclass(frozen=True)
class SncConfig:
    """
    A simple normal crossing configuration of curves with its dual graph, to be examined in characteristic p.
    """

    components: tuple[Component, ...]
    graph: DualGraph
    prime: int

    def __post_init__(self) -> None:
        if not isinstance(self.prime, int) or not sympy.isprime(self.prime):
            raise ConfigurationError(f"{self.prime!r} is not a prime")
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"Component ids are not unique: {ids}")
        if set(ids) != set(self.graph.vertices):
            raise ConfigurationError(f"Dual graph vertices {list(self.graph.vertices)} do not match components {ids}")
        if not self.graph.is_connected():
            logger.warning(
                f"Dual graph has {self.graph.connected_components()} connected components; "
                f"an exceptional fiber is connected"
            )

    __hash__ = None

    @classmethod
    def build(cls, components: Sequence[Component], edges: Iterable[Sequence[str]], prime: int) -> "SncConfig":
        return cls(tuple(components), DualGraph([c.id for c in components], edges), prime)

    @classmethod
    def from_dict(cls, data: Any, prime: Optional[int] = None) -> "SncConfig":
        """
        Read an SNC document {"prime", "components", "edges"}. An explicit prime overrides the document's.

        :raises SchemaError: For documents that do not follow the schema.
        :raises ConfigurationError: For configurations that are not simple normal crossings.
        """
        if not isinstance(data, dict) or not isinstance(data.get("components"), list):
            raise SchemaError("An SNC document needs a 'components' list")
        edges = data.get("edges", [])
        if not isinstance(edges, list) or not all(isinstance(e, list) for e in edges):
            raise SchemaError("SNC 'edges' must be a list of id lists")
        if prime is None:
            prime = data.get("prime")
        if isinstance(prime, bool) or not isinstance(prime, int):
            raise SchemaError(f"SNC document needs an integer 'prime', got {prime!r}")
        components = [Component.from_dict(c) for c in data["components"]]
        return cls.build(components, edges, prime)

    def to_dict(self) -> dict[str, Any]:
        return {
            "prime": self.prime,
            "components": [c.to_dict() for c in self.components],
            "edges": [list(e) for e in self.graph.edges],
        }

    def with_prime(self, p: int) -> "SncConfig":
        return SncConfig(self.components, self.graph, p)


class ComponentReport(NamedTuple):
    id: str
    kind: ComponentKind
    dim: int
    ss_dim: int
    nil_dim: int
    smooth: IsolatedCheck = NOT_RUN

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "dim": self.dim,
            "ss_dim": self.ss_dim,
            "nil_dim": self.nil_dim,
            "smooth_check": self.smooth.status.value,
        }


class H1Frobenius(NamedTuple):
    ss_dim: int
    nil_dim: int
    graph_part: int
    component_part: FittingSplit
    components: tuple[ComponentReport, ...]

    @property
    def dim(self) -> int:
        return self.ss_dim + self.nil_dim


def _curve_cone(c: Component, p: int) -> HypersurfaceData:
    return HypersurfaceData.from_integer(c.polynomial, WeightSystem.uniform(3), p)


def component_h1_frobenius(c: Component, p: int) -> SemilinearOperator:
    """
    The Frobenius action on H^1(O) of one component, over F_p. For a smooth plane curve this is the action on the
    degree-zero local cohomology of its cone, which has dimension (d-1)(d-2)/2.

    :raises DimensionError: If an explicit matrix is not square.
    :raises PolynomialError: If a plane curve vanishes modulo p.
    """
    field = field_make(p)
    if c.kind == ComponentKind.RATIONAL:
        return SemilinearOperator(field, ())
    if c.kind == ComponentKind.PLANE_CURVE:
        return frobenius_on_degree_zero(_curve_cone(c, p))
    return SemilinearOperator.from_ints(field, c.matrix)


def component_smoothness(c: Component, p: int, maxext: int = 1) -> IsolatedCheck:
    """
    Heuristic smoothness check for a plane curve component: its cone has an isolated singularity exactly when the
    curve is smooth. Other kinds are not checked.
    """
    if c.kind != ComponentKind.PLANE_CURVE:
        return NOT_RUN
    return isolated_check(_curve_cone(c, p), maxext)


def _component_reports(z: SncConfig, smooth_depth: int) -> tuple[list[SemilinearOperator], list[ComponentReport]]:
    operators = []
    reports = []
    for c in z.components:
        phi = component_h1_frobenius(c, z.prime)
        split = fitting_decomposition(phi)
        smooth = component_smoothness(c, z.prime, smooth_depth)
        if smooth.status == IsolatedStatus.FAIL:
            logger.warning(
                f"Component {c.id} looks singular modulo {z.prime} at {[str(x) for x in smooth.point]}; "
                f"computing anyway"
            )
        operators.append(phi)
        reports.append(ComponentReport(c.id, c.kind, phi.dim, split.ss_dim, split.nil_dim, smooth))
    return operators, reports


def h1_frobenius(z: SncConfig, smooth_depth: int = 1) -> H1Frobenius:
    """
    The Fitting split of Frobenius on H^1(Z, O_Z). H^1 is an extension of the component part, the direct sum of the
    components' H^1(O), by the first cohomology of the dual graph, on which Frobenius is the identity. So the stable
    dimension is betti1 plus the stable dimensions of the components.

    :param z: The configuration.
    :param smooth_depth: Extension depth for the plane curve smoothness heuristic; 0 skips it.
    """
    field = field_make(z.prime)
    b1 = betti1(z.graph)
    operators, reports = _component_reports(z, smooth_depth)
    split = fitting_decomposition(SemilinearOperator.block_diagonal(field, operators))
    return H1Frobenius(b1 + split.ss_dim, split.nil_dim, b1, split, tuple(reports))


def h1_operator(z: SncConfig) -> SemilinearOperator:
    """
    A matrix for Frobenius on all of H^1(Z, O_Z): the identity on the betti1 graph classes followed by the component
    blocks.
    """
    field = field_make(z.prime)
    blocks = [SemilinearOperator.identity(field, betti1(z.graph))]
    blocks.extend(component_h1_frobenius(c, z.prime) for c in z.components)
    return SemilinearOperator.block_diagonal(field, blocks)


@dataclass(frozen=True)
class SurfaceVerdict:
    verdict: Verdict
    betti1: int
    ss_dim: int
    nil_dim: int
    obstructions: tuple[str, ...]
    per_component: tuple[ComponentReport, ...]
    assumptions: tuple[str, ...] = SURFACE_ASSUMPTIONS

    @property
    def basis_dim(self) -> int:
        return self.ss_dim + self.nil_dim

    def to_dict(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "betti1": self.betti1,
            "ss_dim": self.ss_dim,
            "nil_dim": self.nil_dim,
            "obstructions": list(self.obstructions),
            "per_component": [c.to_dict() for c in self.per_component],
            "assumptions": list(self.assumptions),
        }


def classify_surface(z: SncConfig, smooth_depth: int = 1) -> SurfaceVerdict:
    """
    Decide F-nilpotence of the two-dimensional singularity whose exceptional fiber is z: it holds exactly when
    Frobenius is nilpotent on H^1(Z, O_Z). The obstructions name the graph cycles and the components with a stable
    part.
    """
    b1 = betti1(z.graph)
    if b1 == 0 and all(c.kind == ComponentKind.RATIONAL for c in z.components):
        logger.debug("classify_surface: tree of rational curves")
        reports = tuple(ComponentReport(c.id, c.kind, 0, 0, 0) for c in z.components)
        return SurfaceVerdict(Verdict.F_NILPOTENT, 0, 0, 0, (), reports)

    h1 = h1_frobenius(z, smooth_depth)
    obstructions = []
    if h1.graph_part:
        obstructions.append("graph")
    obstructions.extend(f"component:{r.id}" for r in h1.components if r.ss_dim)
    verdict = Verdict.F_NILPOTENT if h1.ss_dim == 0 else Verdict.NOT_F_NILPOTENT
    return SurfaceVerdict(verdict, b1, h1.ss_dim, h1.nil_dim, tuple(obstructions), h1.components)
