"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

from threading import Lock, RLock
from typing import ClassVar


class FancyLock:
    """
    Class-level lock shared by every instance of the same subclass.

    Each subclass gets its own re-entrant lock; `PrintLock` serialises terminal output.
    """

    _fancy_locks: ClassVar[dict[type, RLock]] = {}
    _registry_lock: ClassVar[Lock] = Lock()

    @classmethod
    def get_lock(cls) -> RLock:
        with FancyLock._registry_lock:
            if cls not in FancyLock._fancy_locks:
                FancyLock._fancy_locks[cls] = RLock()
            return FancyLock._fancy_locks[cls]

    @property
    def fancy_lock(self) -> RLock:
        return self.get_lock()

    def __enter__(self) -> None:
        self.fancy_lock.acquire()

    def __exit__(self, *_exc_details: object) -> None:
        self.fancy_lock.release()
