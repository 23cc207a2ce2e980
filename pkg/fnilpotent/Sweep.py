import asyncio
import csv
import functools
import io
import json
import time
import traceback
from collections.abc import Callable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from enum import Enum
from math import gcd
from typing import Any, NamedTuple, Optional, Union

import sympy
import yaml

from .Errors import (
    DimensionError,
    FNilpotentError,
    NotQuasiHomogeneousError,
    PolynomialError,
    SchemaError,
    SweepError,
)
from .LocalCohomology import HypersurfaceData, IsolatedStatus, Verdict, classify_graded, isolated_check
from .Polynomials import IntegerPolynomial, WeightSystem
from .Snc import Component, ComponentKind, DualGraph, SncConfig, classify_surface
from .Utils import logger

SCHEMA_VERSION = 1

# Largest prime a sweep may reach.
MAX_PRIME = 10**6

CSV_COLUMNS: tuple[str, ...] = ("prime", "status", "basis_dim", "ss_dim", "nil_dim", "isolated", "runtime_ms")

FINITE_EVIDENCE_CAVEAT = (
    "Type verdicts are finite-evidence proxies computed from the primes in the swept range. They do not certify "
    "the behaviour of almost all primes."
)


class PrimeStatus(Enum):
    NILPOTENT = "NILPOTENT"
    NON_NILPOTENT = "NON_NILPOTENT"
    SKIPPED = "SKIPPED"


class AggregateKind(Enum):
    EMPIRICALLY_F_NILPOTENT_TYPE = "EMPIRICALLY_F_NILPOTENT_TYPE"
    EMPIRICALLY_DENSE_TYPE = "EMPIRICALLY_DENSE_TYPE"
    EMPIRICALLY_NOT = "EMPIRICALLY_NOT"


class SkipMode(Enum):
    DIVISORS = "divisors"
    SMALL = "small"


class ExportFormat(Enum):
    CSV = "csv"
    JSON = "json"
    YAML = "yaml"


def _prime_factors(n: int) -> set[int]:
    return set(sympy.primefactors(n)) if n > 1 else set()


@dataclass(frozen=True)
class IntegerModel:
    """
    A quasi-homogeneous polynomial with integer coefficients, the model whose reductions modulo primes are swept.

    :raises NotQuasiHomogeneousError: If the terms have different weighted degrees.
    :raises DimensionError: If variables, weights and exponent vectors disagree in length.
    """

    polynomial: IntegerPolynomial
    weights: WeightSystem
    variables: tuple[str, ...]
    degree: int = dataclass_field(init=False)

    def __post_init__(self) -> None:
        n = self.polynomial.nvars
        if len(self.variables) != n or len(self.weights) != n:
            raise DimensionError(
                f"{len(self.variables)} variables and {len(self.weights)} weights for exponent vectors of length {n}"
            )
        if len(set(self.variables)) != n:
            raise DimensionError(f"Variable names {list(self.variables)} are not distinct")
        if n < 2:
            raise DimensionError("A hypersurface model needs at least two variables")
        degrees = self.polynomial.weighted_degrees(self.weights)
        if len(degrees) != 1:
            raise NotQuasiHomogeneousError(
                f"Terms have weighted degrees {sorted(degrees)} for weights {list(self.weights.weights)}"
            )
        object.__setattr__(self, "degree", degrees.pop())

    __hash__ = None

    @classmethod
    def from_dict(cls, data: Any) -> "IntegerModel":
        """
        Read a model document {"variables", "weights", "terms"}. Missing weights default to 1.

        :raises SchemaError: For documents that do not follow the schema.
        """
        if not isinstance(data, dict) or "terms" not in data:
            raise SchemaError("A model document needs 'terms'")
        try:
            polynomial = IntegerPolynomial.from_records(data["terms"])
        except (PolynomialError, DimensionError) as e:
            raise SchemaError(f"Invalid terms: {e}") from e
        variables = data.get("variables", [f"x{i}" for i in range(polynomial.nvars)])
        weights = data.get("weights", [1] * polynomial.nvars)
        if not isinstance(variables, list) or not all(isinstance(v, str) for v in variables):
            raise SchemaError(f"'variables' must be a list of names, got {variables!r}")
        if not isinstance(weights, list) or any(isinstance(w, bool) or not isinstance(w, int) for w in weights):
            raise SchemaError(f"'weights' must be a list of integers, got {weights!r}")
        try:
            return cls(polynomial, WeightSystem(tuple(weights)), tuple(variables))
        except NotQuasiHomogeneousError:
            raise
        except (PolynomialError, DimensionError) as e:
            raise SchemaError(str(e)) from e

    def to_dict(self) -> dict[str, Any]:
        return {
            "variables": list(self.variables),
            "weights": list(self.weights.weights),
            "terms": self.polynomial.to_records(),
        }

    @property
    def skip_bound(self) -> int:
        return max(max(self.weights.weights), self.degree)

    def bad_primes(self) -> set[int]:
        """
        Primes dividing the degree, a weight or a coefficient.
        """
        primes = _prime_factors(self.degree) | self.polynomial.coefficient_primes()
        for w in self.weights.weights:
            primes |= _prime_factors(w)
        return primes

    def at_prime(self, p: int) -> HypersurfaceData:
        return HypersurfaceData.from_integer(self.polynomial, self.weights, p)


@dataclass(frozen=True)
class SurfaceModel:
    """
    A curve configuration with integer data, reduced modulo each swept prime.
    """

    components: tuple[Component, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        # Validates ids, loops and triple points once, before any prime is tried.
        DualGraph([c.id for c in self.components], self.edges)

    __hash__ = None

    @classmethod
    def from_dict(cls, data: Any) -> "SurfaceModel":
        config = SncConfig.from_dict(data, prime=2)
        return cls(config.components, config.graph.edges)

    def to_dict(self) -> dict[str, Any]:
        return {
            "components": [c.to_dict() for c in self.components],
            "edges": [list(e) for e in self.edges],
        }

    @property
    def skip_bound(self) -> int:
        return max((c.degree for c in self.components if c.kind == ComponentKind.PLANE_CURVE), default=1)

    def bad_primes(self) -> set[int]:
        primes: set[int] = set()
        for c in self.components:
            if c.kind == ComponentKind.PLANE_CURVE:
                primes |= _prime_factors(c.degree) | c.polynomial.coefficient_primes()
        return primes

    def at_prime(self, p: int) -> SncConfig:
        return SncConfig.build(self.components, self.edges, p)


Model = Union[IntegerModel, SurfaceModel]


@dataclass(frozen=True)
class SkipPolicy:
    """
    Which primes a sweep leaves out. The default skips primes dividing the degree, a weight or a coefficient; the
    small mode also skips every prime up to the model's skip bound. Primes in extra are always skipped.
    """

    mode: SkipMode = SkipMode.DIVISORS
    extra: frozenset[int] = frozenset()

    def reason(self, model: Model, p: int) -> Optional[str]:
        if p in self.extra:
            return "user skip list"
        if p in model.bad_primes():
            return "bad prime"
        if self.mode == SkipMode.SMALL and p <= model.skip_bound:
            return "small prime"
        return None


@dataclass(frozen=True)
class PrimeVerdict:
    """
    The classification of one reduction. Skipped primes carry a reason and no dimensions.
    """

    prime: int
    status: PrimeStatus
    reason: Optional[str] = None
    basis_dim: Optional[int] = None
    ss_dim: Optional[int] = None
    nil_dim: Optional[int] = None
    isolated: str = IsolatedStatus.NOT_RUN.value
    runtime_ms: int = 0

    def __post_init__(self) -> None:
        if self.status == PrimeStatus.SKIPPED:
            if not self.reason or "," in self.reason or "\n" in self.reason:
                raise SchemaError(f"Skipped prime {self.prime} needs a one-line reason without commas")
        elif None in (self.basis_dim, self.ss_dim, self.nil_dim) or self.ss_dim + self.nil_dim != self.basis_dim:
            raise SchemaError(
                f"Prime {self.prime}: ss_dim {self.ss_dim} + nil_dim {self.nil_dim} != basis_dim {self.basis_dim}"
            )

    @classmethod
    def skipped(cls, p: int, reason: str) -> "PrimeVerdict":
        return cls(p, PrimeStatus.SKIPPED, reason)

    @property
    def is_skipped(self) -> bool:
        return self.status == PrimeStatus.SKIPPED

    @property
    def status_text(self) -> str:
        if self.is_skipped:
            return f"SKIPPED({self.reason})"
        return self.status.value

    def csv_row(self) -> list[Any]:
        def blank(x: Optional[int]) -> Any:
            return "" if x is None else x

        return [
            self.prime,
            self.status_text,
            blank(self.basis_dim),
            blank(self.ss_dim),
            blank(self.nil_dim),
            self.isolated,
            self.runtime_ms,
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "prime": self.prime,
            "status": self.status.value,
            "reason": self.reason,
            "basis_dim": self.basis_dim,
            "ss_dim": self.ss_dim,
            "nil_dim": self.nil_dim,
            "isolated": self.isolated,
            "runtime_ms": self.runtime_ms,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "PrimeVerdict":
        try:
            return cls(
                prime=data["prime"],
                status=PrimeStatus(data["status"]),
                reason=data.get("reason"),
                basis_dim=data.get("basis_dim"),
                ss_dim=data.get("ss_dim"),
                nil_dim=data.get("nil_dim"),
                isolated=data.get("isolated", IsolatedStatus.NOT_RUN.value),
                runtime_ms=data.get("runtime_ms", 0),
            )
        except (KeyError, ValueError, TypeError) as e:
            raise SchemaError(f"Malformed verdict record {dict(data)!r}") from e


class Aggregate(NamedTuple):
    kind: AggregateKind
    nilpotent: int
    considered: int
    threshold: int
    caveat: str = FINITE_EVIDENCE_CAVEAT

    @property
    def fraction(self) -> float:
        return self.nilpotent / self.considered

    def describe(self) -> str:
        if self.kind == AggregateKind.EMPIRICALLY_F_NILPOTENT_TYPE:
            return self.kind.value
        return f"{self.kind.value}({self.fraction:.3f})"

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "nilpotent": self.nilpotent,
            "considered": self.considered,
            "fraction": round(self.fraction, 6),
            "threshold": self.threshold,
            "caveat": self.caveat,
        }


class ResidueCounts(NamedTuple):
    nilpotent: int
    non_nilpotent: int


@dataclass(frozen=True)
class SweepReport:
    """
    Per-prime verdicts of a sweep, kept in ascending prime order, with the model they were computed for.
    """

    kind: str
    model: Mapping[str, Any]
    lo: int
    hi: int
    threshold: int
    verdicts: tuple[PrimeVerdict, ...]

    def __post_init__(self) -> None:
        if self.kind not in ("hypersurface", "surface"):
            raise SchemaError(f"Unknown report kind {self.kind!r}")
        ordered = tuple(sorted(self.verdicts, key=lambda v: v.prime))
        primes = [v.prime for v in ordered]
        if len(set(primes)) != len(primes):
            raise SchemaError("A report lists some prime twice")
        object.__setattr__(self, "verdicts", ordered)

    __hash__ = None

    @property
    def aggregate(self) -> Aggregate:
        return aggregate_verdict(self)

    def to_dict(self) -> dict[str, Any]:
        has_evidence = any(not v.is_skipped for v in self.verdicts)
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "model": dict(self.model),
            "range": {"lo": self.lo, "hi": self.hi},
            "threshold": self.threshold,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "aggregate": self.aggregate.to_dict() if has_evidence else None,
            "caveat": FINITE_EVIDENCE_CAVEAT,
        }

    @classmethod
    def from_dict(cls, data: Any) -> "SweepReport":
        if not isinstance(data, dict):
            raise SchemaError("A report must be an object")
        if data.get("schema_version") != SCHEMA_VERSION:
            raise SchemaError(f"Unsupported report schema version {data.get('schema_version')!r}")
        try:
            return cls(
                kind=data["kind"],
                model=data["model"],
                lo=data["range"]["lo"],
                hi=data["range"]["hi"],
                threshold=data["threshold"],
                verdicts=tuple(PrimeVerdict.from_dict(v) for v in data["verdicts"]),
            )
        except (KeyError, TypeError) as e:
            raise SchemaError(f"Report is missing {e}") from e


def enumerate_primes(lo: int, hi: int) -> list[int]:
    """
    Every prime in [lo, hi], ascending.

    :raises SweepError: Unless 2 <= lo <= hi <= 10^6.
    """
    if not 2 <= lo <= hi <= MAX_PRIME:
        raise SweepError(f"Prime range [{lo}, {hi}] must satisfy 2 <= lo <= hi <= {MAX_PRIME}")
    return list(sympy.primerange(lo, hi + 1))


def _elapsed_ms(start: float, record_timing: bool) -> int:
    return round((time.perf_counter() - start) * 1000) if record_timing else 0


def classify_prime(
    model: IntegerModel, p: int, *, policy: SkipPolicy, isolated_depth: int = 1, record_timing: bool = False
) -> PrimeVerdict:
    """
    Classify the reduction of a hypersurface model at one prime. Errors become skipped verdicts.
    """
    reason = policy.reason(model, p)
    if reason:
        return PrimeVerdict.skipped(p, reason)

    start = time.perf_counter()
    try:
        H = model.at_prime(p)
        check = isolated_check(H, isolated_depth)
        result = classify_graded(H, check)
    except FNilpotentError as e:
        logger.warning(f"p = {p}: {e}")
        return PrimeVerdict.skipped(p, f"error: {type(e).__name__}")
    except Exception:
        logger.error(traceback.format_exc())
        return PrimeVerdict.skipped(p, "error: unexpected")

    if check.status == IsolatedStatus.FAIL:
        logger.info(f"p = {p}: singular point found away from the origin; the verdict assumes an isolated singularity")
    status = PrimeStatus.NILPOTENT if result.verdict == Verdict.F_NILPOTENT else PrimeStatus.NON_NILPOTENT
    logger.debug(f"p = {p}: {status.value}")
    return PrimeVerdict(
        p,
        status,
        basis_dim=result.basis_dim,
        ss_dim=result.ss_dim,
        nil_dim=result.nil_dim,
        isolated=check.status.value,
        runtime_ms=_elapsed_ms(start, record_timing),
    )


def _smoothness_summary(statuses: Sequence[IsolatedStatus]) -> str:
    for status in (IsolatedStatus.FAIL, IsolatedStatus.INCONCLUSIVE, IsolatedStatus.PASS):
        if status in statuses:
            return status.value
    return IsolatedStatus.NOT_RUN.value


def classify_surface_prime(
    model: SurfaceModel, p: int, *, policy: SkipPolicy, isolated_depth: int = 1, record_timing: bool = False
) -> PrimeVerdict:
    """
    Classify a curve configuration at one prime. The isolated column summarises the plane curve smoothness checks.
    """
    reason = policy.reason(model, p)
    if reason:
        return PrimeVerdict.skipped(p, reason)

    start = time.perf_counter()
    try:
        result = classify_surface(model.at_prime(p), isolated_depth)
    except FNilpotentError as e:
        logger.warning(f"p = {p}: {e}")
        return PrimeVerdict.skipped(p, f"error: {type(e).__name__}")
    except Exception:
        logger.error(traceback.format_exc())
        return PrimeVerdict.skipped(p, "error: unexpected")

    status = PrimeStatus.NILPOTENT if result.verdict == Verdict.F_NILPOTENT else PrimeStatus.NON_NILPOTENT
    return PrimeVerdict(
        p,
        status,
        basis_dim=result.basis_dim,
        ss_dim=result.ss_dim,
        nil_dim=result.nil_dim,
        isolated=_smoothness_summary([c.smooth.status for c in result.per_component]),
        runtime_ms=_elapsed_ms(start, record_timing),
    )


async def _gather_verdicts(task: Callable[[int], PrimeVerdict], primes: Sequence[int], jobs: int) -> list[PrimeVerdict]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(await asyncio.gather(*(loop.run_in_executor(pool, task, p) for p in primes)))


def _run_primes(task: Callable[[int], PrimeVerdict], primes: Sequence[int], jobs: int) -> list[PrimeVerdict]:
    if jobs <= 1 or len(primes) <= 1:
        return [task(p) for p in primes]
    return asyncio.run(_gather_verdicts(task, primes, min(jobs, len(primes))))


def _sweep(
    kind: str,
    worker: Callable[..., PrimeVerdict],
    model: Model,
    lo: int,
    hi: int,
    skip_policy: Optional[SkipPolicy],
    jobs: int,
    isolated_depth: int,
    threshold: Optional[int],
    record_timing: bool,
) -> SweepReport:
    primes = enumerate_primes(lo, hi)
    policy = skip_policy or SkipPolicy()
    task = functools.partial(
        worker, model, policy=policy, isolated_depth=isolated_depth, record_timing=record_timing
    )
    logger.info(f"Sweeping {len(primes)} primes in [{lo}, {hi}] with {jobs} job(s)")
    verdicts = _run_primes(task, primes, jobs)
    return SweepReport(
        kind,
        model.to_dict(),
        lo,
        hi,
        model.skip_bound if threshold is None else threshold,
        tuple(verdicts),
    )


def sweep_hypersurface(
    m: IntegerModel,
    lo: int,
    hi: int,
    skip_policy: Optional[SkipPolicy] = None,
    *,
    jobs: int = 1,
    isolated_depth: int = 1,
    threshold: Optional[int] = None,
    record_timing: bool = False,
) -> SweepReport:
    """
    Reduce a hypersurface model modulo every prime in [lo, hi] and classify each reduction.

    :param m: The model.
    :param lo: Smallest prime candidate.
    :param hi: Largest prime candidate.
    :param skip_policy: Which primes to leave out; the divisor policy by default.
    :param jobs: Worker processes. The report does not depend on it.
    :param isolated_depth: Extension depth for isolated_check; 0 skips it.
    :param threshold: Primes at or below it are ignored by the aggregate when larger ones exist. Defaults to the
        larger of the largest weight and the degree.
    :param record_timing: Record measured runtimes. Off by default, so every runtime is 0 and exports depend only on
        the model and the range.
    """
    return _sweep(
        "hypersurface", classify_prime, m, lo, hi, skip_policy, jobs, isolated_depth, threshold, record_timing
    )


def sweep_surface(
    m: SurfaceModel,
    lo: int,
    hi: int,
    skip_policy: Optional[SkipPolicy] = None,
    *,
    jobs: int = 1,
    isolated_depth: int = 1,
    threshold: Optional[int] = None,
    record_timing: bool = False,
) -> SweepReport:
    """
    Classify a curve configuration at every prime in [lo, hi]; parameters as in sweep_hypersurface.
    """
    return _sweep(
        "surface", classify_surface_prime, m, lo, hi, skip_policy, jobs, isolated_depth, threshold, record_timing
    )


def merge_reports(first: SweepReport, second: SweepReport) -> SweepReport:
    """
    Join the reports of two adjacent ranges of the same sweep.

    :raises SweepError: If the reports describe different sweeps or the ranges are not adjacent.
    """
    if (first.kind, dict(first.model), first.threshold) != (second.kind, dict(second.model), second.threshold):
        raise SweepError("Only reports of the same model and threshold can be merged")
    if second.lo != first.hi + 1:
        raise SweepError(f"Range [{second.lo}, {second.hi}] does not follow [{first.lo}, {first.hi}]")
    return SweepReport(
        first.kind, first.model, first.lo, second.hi, first.threshold, first.verdicts + second.verdicts
    )


def residue_breakdown(r: SweepReport, modulus: int) -> dict[int, ResidueCounts]:
    """
    Count nilpotent and non-nilpotent verdicts in every residue class coprime to the modulus.

    :raises SweepError: If the modulus is below 2.
    """
    if modulus < 2:
        raise SweepError(f"Residue modulus must be at least 2, got {modulus}")
    counts = {c: [0, 0] for c in range(modulus) if gcd(c, modulus) == 1}
    for v in r.verdicts:
        c = v.prime % modulus
        if v.is_skipped or c not in counts:
            continue
        counts[c][0 if v.status == PrimeStatus.NILPOTENT else 1] += 1
    return {c: ResidueCounts(*n) for c, n in counts.items()}


def aggregate_verdict(r: SweepReport) -> Aggregate:
    """
    Turn the per-prime verdicts into an empirical type verdict. Only non-skipped primes above the threshold count,
    unless there are none, in which case every non-skipped prime counts.

    :raises SweepError: If every prime was skipped.
    """
    evidence = [v for v in r.verdicts if not v.is_skipped]
    if not evidence:
        raise SweepError("No prime was classified; there is no evidence to aggregate")
    pool = [v for v in evidence if v.prime > r.threshold] or evidence
    nilpotent = sum(v.status == PrimeStatus.NILPOTENT for v in pool)
    if nilpotent == len(pool):
        kind = AggregateKind.EMPIRICALLY_F_NILPOTENT_TYPE
    elif nilpotent == 0:
        kind = AggregateKind.EMPIRICALLY_NOT
    else:
        kind = AggregateKind.EMPIRICALLY_DENSE_TYPE
    return Aggregate(kind, nilpotent, len(pool), r.threshold)


def _parse_format(fmt: Union[str, ExportFormat]) -> ExportFormat:
    if isinstance(fmt, ExportFormat):
        return fmt
    try:
        return ExportFormat(str(fmt).lower())
    except ValueError:
        raise SchemaError(f"Unknown export format {fmt!r}") from None


def export(r: SweepReport, fmt: Union[str, ExportFormat]) -> bytes:
    """
    Serialize a report. CSV has exactly the columns of CSV_COLUMNS; JSON and YAML mirror the report structure. The
    output depends only on the report.

    :raises SchemaError: For an unknown format.
    """
    fmt = _parse_format(fmt)
    if fmt == ExportFormat.CSV:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for v in r.verdicts:
            writer.writerow(v.csv_row())
        return buffer.getvalue().encode("utf-8")
    if fmt == ExportFormat.JSON:
        return (json.dumps(r.to_dict(), indent=2, sort_keys=True) + "\n").encode("utf-8")
    return yaml.safe_dump(r.to_dict(), sort_keys=False).encode("utf-8")


def load_report(data: Union[bytes, str], fmt: Union[str, ExportFormat] = ExportFormat.JSON) -> SweepReport:
    """
    Read a JSON or YAML export back into a report.

    :raises SchemaError: For CSV, which does not carry the model, or malformed documents.
    """
    fmt = _parse_format(fmt)
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        if fmt == ExportFormat.JSON:
            document = json.loads(text)
        elif fmt == ExportFormat.YAML:
            document = yaml.safe_load(text)
        else:
            raise SchemaError("CSV exports cannot be loaded back; use JSON or YAML")
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise SchemaError(f"Report is not valid {fmt.value}: {e}") from e
    return SweepReport.from_dict(document)
