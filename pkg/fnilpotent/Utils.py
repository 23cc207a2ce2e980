import logging
import sys

from colorama import Fore, Style

logger = logging.getLogger("FNilpotent")

LEVEL_COLORS: dict[int, str] = {
    logging.DEBUG: Style.DIM,
    logging.INFO: "",
    logging.WARNING: Fore.YELLOW,
    logging.ERROR: Fore.RED,
    logging.CRITICAL: Fore.RED + Style.BRIGHT,
}


class ColorFormatter(logging.Formatter):
    """
    Formatter that wraps each record in the colour for its level.

    :param colored: Whether to emit colour codes at all.
    """

    def __init__(self, colored: bool) -> None:
        super().__init__("%(levelname)s: %(message)s")
        self.colored = colored

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        if not self.colored:
            return message
        color = LEVEL_COLORS.get(record.levelno, "")
        return f"{color}{message}{Style.RESET_ALL}" if color else message


def init_logging(level: int = logging.INFO, colored: bool | None = None) -> None:
    """
    Configure the package logger with a single stderr handler. Calling it again replaces the previous handler.

    :param level: The logging level for the package logger.
    :param colored: Force colour on or off; by default colour is used when stderr is a terminal.
    """
    if colored is None:
        colored = sys.stderr.isatty()

    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter(colored))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False


def colorize(text: str, color: str, enabled: bool) -> str:
    """
    Wrap text in a colorama colour when enabled.
    """
    return f"{color}{text}{Style.RESET_ALL}" if enabled else text
