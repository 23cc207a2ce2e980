import argparse
import inspect
from dataclasses import dataclass
from typing import Any, ClassVar, NamedTuple, Optional

from .Errors import OptionError
from .Models import MODEL_TABLE
from .Sweep import MAX_PRIME, ExportFormat, SkipMode, SkipPolicy


class CommandOption:
    """
    Base class for command-line options. The docstring of a subclass is its help text.
    """

    display_name: ClassVar[str]
    flag: ClassVar[str]
    dest: ClassVar[Optional[str]] = None
    default: ClassVar[Any] = None

    @classmethod
    def destination(cls) -> str:
        return cls.dest or cls.flag.lstrip("-").replace("-", "_")

    @classmethod
    def help_text(cls) -> str:
        return inspect.cleandoc(cls.__doc__ or cls.display_name)

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        raise NotImplementedError

    @classmethod
    def validate(cls, value: Any) -> Any:
        return value


class Toggle(CommandOption):
    default = False

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(cls.flag, dest=cls.destination(), action="store_true", help=cls.help_text())


class Range(CommandOption):
    range_start: ClassVar[int]
    range_end: ClassVar[int]

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(
            cls.flag, dest=cls.destination(), type=int, default=cls.default, metavar="N", help=cls.help_text()
        )

    @classmethod
    def validate(cls, value: Optional[int]) -> Optional[int]:
        if value is None:
            return None
        if not cls.range_start <= value <= cls.range_end:
            raise OptionError(
                f"{cls.display_name} must be between {cls.range_start} and {cls.range_end}, got {value}"
            )
        return value


class Choice(CommandOption):
    choices: ClassVar[tuple[str, ...]]

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(
            cls.flag, dest=cls.destination(), choices=cls.choices, default=cls.default, help=cls.help_text()
        )


class Prime(Range):
    """
    The characteristic to compute in.
    """

    display_name = "Prime"
    flag = "--prime"
    range_start = 2
    range_end = (1 << 31) - 1


class Example(Choice):
    """
    Use a built-in model instead of an input file.
    """

    display_name = "Example"
    flag = "--example"
    choices = tuple(MODEL_TABLE)

    @classmethod
    def help_text(cls) -> str:
        listing = "; ".join(f"{name}: {model.description}" for name, model in MODEL_TABLE.items())
        return f"{super().help_text()} {listing}"


class RangeStart(Range):
    """
    The smallest prime candidate of a sweep.
    """

    display_name = "Range Start"
    flag = "--from"
    dest = "lo"
    range_start = 2
    range_end = MAX_PRIME
    default = 2


class RangeEnd(Range):
    """
    The largest prime candidate of a sweep.
    """

    display_name = "Range End"
    flag = "--to"
    dest = "hi"
    range_start = 2
    range_end = MAX_PRIME


class SkipPrimes(CommandOption):
    """
    Comma-separated primes to leave out of a sweep, in addition to the bad primes of the model.
    """

    display_name = "Skip Primes"
    flag = "--skip"
    default = ""

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(cls.flag, dest=cls.destination(), default=cls.default, metavar="P,Q,...", help=cls.help_text())

    @classmethod
    def validate(cls, value: str) -> frozenset[int]:
        primes = set()
        for part in filter(None, (s.strip() for s in value.split(","))):
            try:
                primes.add(int(part))
            except ValueError:
                raise OptionError(f"{cls.display_name}: {part!r} is not an integer") from None
        return frozenset(primes)


class SkipSmallPrimes(Toggle):
    """
    Also skip every prime up to the larger of the largest weight and the degree.
    """

    display_name = "Skip Small Primes"
    flag = "--skip-small"


class SweepKind(Choice):
    """
    Whether the input is a hypersurface model or a curve configuration. Defaults to the kind of the built-in example,
    and to hypersurface for input files.
    """

    display_name = "Sweep Kind"
    flag = "--kind"
    choices = ("hypersurface", "surface")


class IsolatedCheckDepth(Range):
    """
    Largest extension degree over which to search for singular points away from the origin. 0 disables the search.
    The search only annotates reports; it never changes a verdict.
    """

    display_name = "Isolated Check Depth"
    flag = "--isolated-check-depth"
    range_start = 0
    range_end = 4
    default = 1


class NilpotentThreshold(Range):
    """
    Primes at or below this value do not count towards the aggregate verdict. Defaults to the larger of the largest
    weight and the degree.
    """

    display_name = "Nilpotent Threshold"
    flag = "--threshold"
    range_start = 0
    range_end = MAX_PRIME


class ResidueModulus(Range):
    """
    Also print the verdict counts in each residue class modulo this number.
    """

    display_name = "Residue Modulus"
    flag = "--mod"
    range_start = 2
    range_end = MAX_PRIME


class ExportFormats(CommandOption):
    """
    Report format to write; may be repeated. Writes CSV and JSON when not given.
    """

    display_name = "Export Formats"
    flag = "--format"
    choices = tuple(f.value for f in ExportFormat)

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(cls.flag, dest=cls.destination(), action="append", choices=cls.choices, help=cls.help_text())

    @classmethod
    def validate(cls, value: Optional[list[str]]) -> tuple[ExportFormat, ...]:
        if not value:
            return ExportFormat.CSV, ExportFormat.JSON
        return tuple(ExportFormat(v) for v in dict.fromkeys(value))


class OutputPrefix(CommandOption):
    """
    Path prefix of the report files. Defaults to the input file name without its suffix, or the example name.
    """

    display_name = "Output Prefix"
    flag = "--output"

    @classmethod
    def add_to(cls, group: "argparse._ActionsContainer") -> None:
        group.add_argument(cls.flag, dest=cls.destination(), default=None, metavar="PREFIX", help=cls.help_text())


class Timing(Toggle):
    """
    Record how long each prime took. Without it every runtime is 0 and repeated sweeps write identical files.
    """

    display_name = "Timing"
    flag = "--timing"


class Jobs(Range):
    """
    Number of worker processes for a sweep. The reports do not depend on it.
    """

    display_name = "Jobs"
    flag = "--jobs"
    range_start = 1
    range_end = 64
    default = 1


class OptionGroup(NamedTuple):
    name: str
    options: list[type[CommandOption]]


input_options: list[type[CommandOption]] = [Example, Prime]

sweep_option_groups: list[OptionGroup] = [
    OptionGroup("Prime Range", [RangeStart, RangeEnd, SkipPrimes, SkipSmallPrimes]),
    OptionGroup("Classification", [SweepKind, IsolatedCheckDepth, NilpotentThreshold]),
    OptionGroup("Output", [ExportFormats, OutputPrefix, ResidueModulus, Timing]),
    OptionGroup("Execution", [Jobs]),
]


def add_option_groups(parser: argparse.ArgumentParser, groups: list[OptionGroup]) -> None:
    for group in groups:
        container = parser.add_argument_group(group.name)
        for option in group.options:
            option.add_to(container)


@dataclass
class SweepOptions:
    """
    Validated settings of the sweep command.
    """

    lo: int
    hi: int
    skip: frozenset[int]
    skip_small: bool
    kind: Optional[str]
    isolated_check_depth: int
    threshold: Optional[int]
    modulus: Optional[int]
    formats: tuple[ExportFormat, ...]
    output: Optional[str]
    record_timing: bool
    jobs: int

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "SweepOptions":
        """
        :raises OptionError: For missing or out-of-range values.
        """
        if args.hi is None:
            raise OptionError(f"{RangeEnd.display_name} ({RangeEnd.flag}) is required for a sweep")
        return cls(
            lo=RangeStart.validate(args.lo),
            hi=RangeEnd.validate(args.hi),
            skip=SkipPrimes.validate(args.skip),
            skip_small=args.skip_small,
            kind=args.kind,
            isolated_check_depth=IsolatedCheckDepth.validate(args.isolated_check_depth),
            threshold=NilpotentThreshold.validate(args.threshold),
            modulus=ResidueModulus.validate(args.mod),
            formats=ExportFormats.validate(args.format),
            output=args.output,
            record_timing=args.timing,
            jobs=Jobs.validate(args.jobs),
        )

    @property
    def skip_policy(self) -> SkipPolicy:
        return SkipPolicy(SkipMode.SMALL if self.skip_small else SkipMode.DIVISORS, self.skip)
