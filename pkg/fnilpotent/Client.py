import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Optional

import colorama
from colorama import Fore

from . import VERSION
from .Errors import FNilpotentError, OptionError, SweepError
from .LocalCohomology import (
    HypersurfaceData,
    Verdict,
    classify_graded,
    frobenius_on_degree_zero,
    isolated_check,
    neg_monomials,
)
from .Models import example_document, load_document
from .Options import (
    IsolatedCheckDepth,
    Prime,
    SweepOptions,
    add_option_groups,
    input_options,
    sweep_option_groups,
)
from .Snc import SncConfig, classify_surface
from .Sweep import (
    SCHEMA_VERSION,
    AggregateKind,
    IntegerModel,
    SurfaceModel,
    aggregate_verdict,
    enumerate_primes,
    export,
    residue_breakdown,
    sweep_hypersurface,
    sweep_surface,
)
from .Utils import colorize, init_logging, logger

EXIT_F_NILPOTENT = 0
EXIT_NOT_F_NILPOTENT = 1
EXIT_INPUT_ERROR = 2

COMMANDS = ("classify", "hasse-witt", "snc", "sweep")


@dataclass
class JobSpec:
    """
    One validated command-line invocation.
    """

    command: str
    input: Optional[Path]
    example: Optional[str]
    prime: Optional[int]
    isolated_check_depth: int = IsolatedCheckDepth.default
    sweep: Optional[SweepOptions] = None

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "JobSpec":
        """
        :raises OptionError: If the options do not fit the command.
        """
        if (args.input is None) == (args.example is None):
            raise OptionError("Give exactly one of an input file and --example")
        prime = Prime.validate(args.prime)
        if args.command in ("classify", "hasse-witt") and prime is None:
            raise OptionError(f"{args.command} needs {Prime.flag}")
        return cls(
            command=args.command,
            input=Path(args.input) if args.input is not None else None,
            example=args.example,
            prime=prime,
            isolated_check_depth=IsolatedCheckDepth.validate(getattr(args, "isolated_check_depth", 1)),
            sweep=SweepOptions.from_namespace(args) if args.command == "sweep" else None,
        )

    @property
    def kind(self) -> str:
        """
        The sweep kind: as given, else the built-in example's, else hypersurface.
        """
        if self.sweep is not None and self.sweep.kind is not None:
            return self.sweep.kind
        if self.example is not None:
            return example_document(self.example).kind
        return "hypersurface"

    def document(self) -> Any:
        if self.example is not None:
            return example_document(self.example).document
        return load_document(self.input)

    @property
    def name(self) -> str:
        return self.example if self.example is not None else self.input.stem


def _emit(record: dict[str, Any]) -> None:
    sys.stdout.write(json.dumps(record, indent=2) + "\n")


def _verdict_exit(verdict: Verdict) -> int:
    color = Fore.GREEN if verdict == Verdict.F_NILPOTENT else Fore.RED
    logger.info(colorize(verdict.value, color, sys.stderr.isatty()))
    return EXIT_F_NILPOTENT if verdict == Verdict.F_NILPOTENT else EXIT_NOT_F_NILPOTENT


def _hypersurface(job: JobSpec) -> HypersurfaceData:
    return IntegerModel.from_dict(job.document()).at_prime(job.prime)


def cmd_classify(job: JobSpec) -> int:
    """
    Classify a hypersurface model at one prime and print the verdict record.
    """
    H = _hypersurface(job)
    result = classify_graded(H, isolated_check(H, job.isolated_check_depth))
    _emit({"schema_version": SCHEMA_VERSION, "prime": job.prime, **result.to_dict()})
    return _verdict_exit(result.verdict)


def cmd_hasse_witt(job: JobSpec) -> int:
    """
    Print the degree-zero basis and the matrix of Frobenius on it, row by row, entries in [0, p).
    """
    H = _hypersurface(job)
    phi = frobenius_on_degree_zero(H)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "prime": job.prime,
            "basis": [list(m) for m in neg_monomials(H, H.degree)],
            "matrix": phi.to_ints(),
        }
    )
    return EXIT_F_NILPOTENT


def cmd_snc(job: JobSpec) -> int:
    """
    Classify the singularity with the given exceptional curve configuration.
    """
    config = SncConfig.from_dict(job.document(), prime=job.prime)
    result = classify_surface(config, job.isolated_check_depth)
    _emit({"schema_version": SCHEMA_VERSION, "prime": config.prime, **result.to_dict()})
    return _verdict_exit(result.verdict)


def cmd_sweep(job: JobSpec) -> int:
    """
    Sweep a model over a prime range, write the report files and print the aggregate verdict.
    """
    options = job.sweep
    if not enumerate_primes(options.lo, options.hi):
        raise SweepError(f"No primes in [{options.lo}, {options.hi}]")

    document = job.document()
    kwargs = dict(
        jobs=options.jobs,
        isolated_depth=options.isolated_check_depth,
        threshold=options.threshold,
        record_timing=options.record_timing,
    )
    if job.kind == "surface":
        report = sweep_surface(SurfaceModel.from_dict(document), options.lo, options.hi, options.skip_policy, **kwargs)
    else:
        report = sweep_hypersurface(
            IntegerModel.from_dict(document), options.lo, options.hi, options.skip_policy, **kwargs
        )
    aggregate = aggregate_verdict(report)

    prefix = options.output or job.name
    files = []
    for fmt in options.formats:
        path = Path(f"{prefix}.{fmt.value}")
        path.write_bytes(export(report, fmt))
        files.append(str(path))
        logger.info(f"Wrote {path}")

    summary: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "aggregate": aggregate.to_dict(),
        "files": files,
    }
    if options.modulus is not None:
        summary["residues"] = {
            str(c): counts._asdict() for c, counts in residue_breakdown(report, options.modulus).items()
        }
    _emit(summary)

    nilpotent_type = aggregate.kind == AggregateKind.EMPIRICALLY_F_NILPOTENT_TYPE
    logger.info(colorize(aggregate.describe(), Fore.GREEN if nilpotent_type else Fore.RED, sys.stderr.isatty()))
    return EXIT_F_NILPOTENT if nilpotent_type else EXIT_NOT_F_NILPOTENT


COMMAND_TABLE: dict[str, Callable[[JobSpec], int]] = {
    "classify": cmd_classify,
    "hasse-witt": cmd_hasse_witt,
    "snc": cmd_snc,
    "sweep": cmd_sweep,
}


def get_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fnilpotent",
        description="Decide F-nilpotence of graded hypersurface singularities and of surface singularities given "
        "by their exceptional curves, over finite fields and across ranges of primes.",
    )
    parser.add_argument("--version", action="version", version=".".join(map(str, VERSION)))
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--verbose", action="store_true", help="Log debugging output.")
    verbosity.add_argument("--quiet", action="store_true", help="Only log warnings and errors.")

    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "Classify a hypersurface model at one prime.",
        "hasse-witt": "Print the Frobenius matrix on the degree-zero piece.",
        "snc": "Classify a surface singularity from its exceptional curve configuration.",
        "sweep": "Classify a model at every prime of a range.",
    }
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=helps[command], description=helps[command])
        sub.add_argument("input", nargs="?", help="Model file (.json, otherwise read as YAML).")
        for option in input_options:
            option.add_to(sub)
        if command in ("classify", "snc"):
            IsolatedCheckDepth.add_to(sub)
        if command == "sweep":
            add_option_groups(sub, sweep_option_groups)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """
    Run the command line and return its exit code: 0 for F-nilpotent results, 1 for the opposite, 2 for invalid
    input.
    """
    colorama.just_fix_windows_console()
    parser = get_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else 0

    init_logging(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)
    try:
        job = JobSpec.from_namespace(args)
        return COMMAND_TABLE[job.command](job)
    except (FNilpotentError, OSError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
