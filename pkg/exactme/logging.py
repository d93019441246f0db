"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import itertools
from logging import Logger
from threading import Lock
from typing import TYPE_CHECKING

from .args import CachedArgs
from .i18n import translate
from .pprint import Color, color_line, print_stderr

if TYPE_CHECKING:
    from collections.abc import Iterator
    from typing import Any, Final


# cyan marks the debug prefix itself, bright red and yellow are taken by errors and warnings:
MODULE_COLORS: "Final" = tuple(
    color for color in Color
    if color not in {Color.CYAN, Color.BRIGHT_RED, Color.BRIGHT_YELLOW}
)


class ModuleColors:
    """Hands out module colors round-robin so neighbouring modules stay distinguishable."""

    _cycle: "Iterator[Color]" = itertools.cycle(MODULE_COLORS)
    _lock = Lock()

    @classmethod
    def next_color(cls) -> Color:
        with cls._lock:
            return next(cls._cycle)


def debug_enabled() -> bool:
    # the command line is never parsed when exactme is imported as a library:
    args = CachedArgs.args
    return bool(args and args.debug)


class ExactMELogger(Logger):  # subclassed only so pylint checks the brace-style calls
    """Per-module debug printer: `logger.debug("step {} of {}", k, n)`."""

    def __init__(  # pylint: disable=super-init-not-called
            self, module_name: str, color: Color, lock: bool | None = None,
    ) -> None:
        self.module_name = module_name
        self.color = color
        self.default_lock = lock

    def debug(
        self, msg: "Any", *args: "Any", lock: bool | None = None, **kwargs: "Any",
    ) -> None:
        if not debug_enabled():
            return
        text = msg.format(*args, **kwargs) if isinstance(msg, str) else str(msg)
        if lock is None:
            lock = self.default_lock if self.default_lock is not None else True
        print_stderr(
            f"{color_line(':: ' + translate('debug:'), Color.CYAN)} "
            f"{color_line(self.module_name, self.color)}: {text}",
            lock=lock,
        )


def create_logger(module_name: str, *, lock: bool | None = None) -> ExactMELogger:
    return ExactMELogger(module_name=module_name, color=ModuleColors.next_color(), lock=lock)
