import json
from pathlib import Path
from typing import Any, NamedTuple

import yaml

from .Errors import SchemaError


class ModelData(NamedTuple):
    kind: str
    description: str
    document: dict[str, Any]


def _terms(*pairs: tuple[int, list[int]]) -> list[dict[str, Any]]:
    return [{"coeff": c, "exponents": e} for c, e in pairs]


FERMAT_CUBIC_TERMS = _terms((1, [3, 0, 0]), (1, [0, 3, 0]), (1, [0, 0, 3]))

MODEL_TABLE: dict[str, ModelData] = {
    "fermat-quartic": ModelData(
        "hypersurface",
        "Cone over the Fermat quartic curve; F-nilpotent exactly when p = 3 mod 4.",
        {
            "variables": ["x", "y", "z"],
            "weights": [1, 1, 1],
            "terms": _terms((1, [4, 0, 0]), (1, [0, 4, 0]), (1, [0, 0, 4])),
        },
    ),
    "brieskorn-2-3-7": ModelData(
        "hypersurface",
        "x^2 + y^3 + z^7 with weights (21, 14, 6); the degree-zero piece is zero, so F-nilpotent at every good prime.",
        {
            "variables": ["x", "y", "z"],
            "weights": [21, 14, 6],
            "terms": _terms((1, [2, 0, 0]), (1, [0, 3, 0]), (1, [0, 0, 7])),
        },
    ),
    "cusp": ModelData(
        "hypersurface",
        "The cusp y^2 - x^3 with weights (2, 3); F-nilpotent at every good prime.",
        {
            "variables": ["x", "y"],
            "weights": [2, 3],
            "terms": _terms((-1, [3, 0]), (1, [0, 2])),
        },
    ),
    "node": ModelData(
        "hypersurface",
        "The node xy; Frobenius fixes its one degree-zero class at every prime.",
        {
            "variables": ["x", "y"],
            "weights": [1, 1],
            "terms": _terms((1, [1, 1])),
        },
    ),
    "fermat-cubic": ModelData(
        "hypersurface",
        "Cone over the Fermat cubic curve; not F-nilpotent exactly when p = 1 mod 3.",
        {"variables": ["x", "y", "z"], "weights": [1, 1, 1], "terms": FERMAT_CUBIC_TERMS},
    ),
    "quartic-surface-cone": ModelData(
        "hypersurface",
        "Cone over the Fermat quartic surface, a three-dimensional singularity; not F-nilpotent exactly when "
        "p = 1 mod 4.",
        {
            "variables": ["x", "y", "z", "w"],
            "weights": [1, 1, 1, 1],
            "terms": _terms((1, [4, 0, 0, 0]), (1, [0, 4, 0, 0]), (1, [0, 0, 4, 0]), (1, [0, 0, 0, 4])),
        },
    ),
    "rational-chain": ModelData(
        "surface",
        "Three rational curves in a chain; F-nilpotent.",
        {
            "prime": 5,
            "components": [{"id": name, "kind": "rational"} for name in ("E1", "E2", "E3")],
            "edges": [["E1", "E2"], ["E2", "E3"]],
        },
    ),
    "rational-cycle": ModelData(
        "surface",
        "Two rational curves meeting in two points; the cycle in the dual graph is Frobenius-fixed.",
        {
            "prime": 5,
            "components": [{"id": name, "kind": "rational"} for name in ("E1", "E2")],
            "edges": [["E1", "E2"], ["E1", "E2"]],
        },
    ),
    "elliptic": ModelData(
        "surface",
        "A single Fermat cubic curve, the exceptional fiber of a simple elliptic singularity; not F-nilpotent "
        "exactly when p = 1 mod 3.",
        {
            "prime": 5,
            "components": [{"id": "E", "kind": "plane_curve", "data": {"degree": 3, "terms": FERMAT_CUBIC_TERMS}}],
            "edges": [],
        },
    ),
}


def example_document(name: str) -> ModelData:
    """
    :raises SchemaError: If no built-in model has this name.
    """
    if name not in MODEL_TABLE:
        raise SchemaError(f"Unknown example {name!r}; choose from {', '.join(MODEL_TABLE)}")
    return MODEL_TABLE[name]


def load_document(path: Path) -> Any:
    """
    Read an input document. Files ending in .json are parsed as JSON, everything else as YAML.

    :raises SchemaError: If the file cannot be parsed.
    :raises OSError: If the file cannot be read.
    """
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise SchemaError(f"{path} is not a valid document: {e}") from e
