"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

from threading import Lock
from typing import TYPE_CHECKING, ClassVar

from .pprint import color_enabled, get_term_width, print_stderr

if TYPE_CHECKING:
    from typing import Final


class ProgressBar:
    """Fixed-width bar on stderr for solver loops; silent unless the output is a terminal."""

    OPEN: "Final" = "["
    CLOSE: "Final" = "]"
    PENDING: "Final" = "-"
    DONE: "Final" = "#"

    def __init__(self, length: int, message: str = "") -> None:
        self.width = max(get_term_width() - len(message) - len(self.OPEN) - len(self.CLOSE), 1)
        self.length = max(length, 1)
        self.steps = 0
        self.drawn = 0
        self.lock = Lock()
        self.enabled = color_enabled()
        if self.enabled:
            back = f"{chr(27)}[{self.width + len(self.CLOSE)}D"
            print_stderr(f"{message}{self.OPEN}{self.PENDING * self.width}{self.CLOSE}{back}", end="")

    def update(self) -> None:
        with self.lock:
            self.steps += 1
            target = min(self.steps * self.width // self.length, self.width)
            if target > self.drawn and self.enabled:
                print_stderr(self.DONE * (target - self.drawn), end="", flush=True)
            self.drawn = max(self.drawn, target)

    def close(self) -> None:
        if self.enabled:
            print_stderr()


class ThreadSafeProgressBar:
    """One bar per id, shared by every worker that reports progress for it."""

    _bars: ClassVar[dict[str, ProgressBar]] = {}
    _lock = Lock()

    @classmethod
    def get(cls, progressbar_length: int, progressbar_id: str, message: str = "") -> ProgressBar:
        with cls._lock:
            if progressbar_id not in cls._bars:
                cls._bars[progressbar_id] = ProgressBar(length=progressbar_length, message=message)
            return cls._bars[progressbar_id]

    @classmethod
    def finish(cls, progressbar_id: str) -> None:
        with cls._lock:
            progressbar = cls._bars.pop(progressbar_id, None)
        if progressbar:
            progressbar.close()
