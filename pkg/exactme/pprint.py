"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import enum
import shutil
import sys
from typing import TYPE_CHECKING

from .args import CachedArgs, ColorFlagValues
from .i18n import translate
from .lock import FancyLock

if TYPE_CHECKING:
    from typing import Any, Final


FALLBACK_TERMINAL_SIZE: "Final" = (80, 24)
ESCAPE: "Final" = "\033["
RESET: "Final" = f"{ESCAPE}0;0m"
BOLD: "Final" = f"{ESCAPE}0;1m"


class Color(enum.IntEnum):
    """ANSI palette; values from 8 up are the bold variants of the first eight."""

    RED = 1
    GREEN = 2
    YELLOW = 3
    BLUE = 4
    PURPLE = 5
    CYAN = 6
    WHITE = 7
    BRIGHT_RED = 9
    BRIGHT_GREEN = 10
    BRIGHT_YELLOW = 11
    BRIGHT_BLUE = 12
    BRIGHT_PURPLE = 13
    BRIGHT_CYAN = 14
    BRIGHT_WHITE = 15

    @property
    def escape(self) -> str:
        base = self.value % 8
        prefix = BOLD if self.value >= 8 else ""  # noqa: PLR2004
        return f"{prefix}{ESCAPE}03{base}m"


def color_enabled() -> bool:
    args = CachedArgs.args
    flag = args.color if args else ColorFlagValues.AUTO
    if flag in (ColorFlagValues.ALWAYS, ColorFlagValues.NEVER):
        return flag == ColorFlagValues.ALWAYS
    try:
        return sys.stdout.isatty() and sys.stderr.isatty()
    except (AttributeError, ValueError):
        # closed or replaced streams
        return False


def color_line(line: str, color: int, *, reset: bool = True, force: bool = False) -> str:
    if not (force or color_enabled()):
        return line
    return f"{Color(color).escape}{line}{RESET if reset else ''}"


def bold_line(line: str) -> str:
    return f"{BOLD}{line}{RESET}" if color_enabled() else line


class PrintLock(FancyLock):
    pass


def _write(stream_name: str, message: "Any", end: str, *, flush: bool, lock: bool) -> None:
    # looked up on every call so patched streams are honoured:
    stream = getattr(sys, stream_name)
    text = f"{message}{end}"
    if lock:
        with PrintLock():
            stream.write(text)
    else:
        stream.write(text)
    if flush:
        stream.flush()


def print_stdout(message: "Any" = "", end: str = "\n", *, flush: bool = False, lock: bool = True) -> None:
    _write("stdout", message, end, flush=flush, lock=lock)


def print_stderr(message: "Any" = "", end: str = "\n", *, flush: bool = False, lock: bool = True) -> None:
    _write("stderr", message, end, flush=flush, lock=lock)


def _tagged(tag: str, color: Color, message: str) -> str:
    return f"{color_line(tag, color)} {message}"


def print_warning(message: str = "", *, flush: bool = False, lock: bool = True) -> None:
    print_stderr(
        _tagged(":: " + translate("warning:"), Color.BRIGHT_YELLOW, message),
        flush=flush, lock=lock,
    )


def print_error(message: str = "", *, flush: bool = False, lock: bool = True) -> None:
    print_stderr(
        _tagged(":: " + translate("error:"), Color.BRIGHT_RED, message),
        flush=flush, lock=lock,
    )


def print_ok(message: str = "") -> None:
    print_stderr(_tagged("::", Color.BRIGHT_GREEN, message))


def get_term_width() -> int:
    return shutil.get_terminal_size(FALLBACK_TERMINAL_SIZE).columns
