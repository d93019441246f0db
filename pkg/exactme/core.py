"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import enum
from multiprocessing.pool import ThreadPool
from pathlib import Path
from typing import TYPE_CHECKING, TypeVar

import numpy as np

from .i18n import translate

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from typing import Any, Final

    import numpy.typing as npt


DEFAULT_INPUT_ENCODING: "Final" = "utf-8"
HERMITIAN_RTOL: "Final" = 1e-12

ItemT = TypeVar("ItemT")
ResultT = TypeVar("ResultT")


class ComparableType:

    __ignore_in_eq__: tuple[str, ...] = ()

    __hash__ = object.__hash__

    @property
    def public_values(self) -> dict[str, "Any"]:
        return {
            var: val for var, val in vars(self).items()
            if not var.startswith("__") and var not in self.__ignore_in_eq__
        }

    def __eq__(self, other: "ComparableType") -> bool:  # type: ignore[override]
        if not isinstance(other, self.__class__):
            return False
        self_values = self.public_values
        others_values = other.public_values
        if self_values.keys() != others_values.keys():
            return False
        return all(
            _values_equal(value, others_values[key])
            for key, value in self_values.items()
        )


def _values_equal(first: "Any", second: "Any") -> bool:
    if isinstance(first, np.ndarray) or isinstance(second, np.ndarray):
        return bool(np.array_equal(first, second))
    if isinstance(first, list | tuple) and isinstance(second, list | tuple):
        return len(first) == len(second) and all(
            _values_equal(left, right) for left, right in zip(first, second, strict=True)
        )
    return bool(first == second)


class DataType(ComparableType):

    ignore_extra_properties: bool

    @property
    def __all_annotations__(self) -> dict[str, type]:
        annotations: dict[str, type] = {}
        for parent_class in reversed(self.__class__.mro()):
            annotations.update(**getattr(parent_class, "__annotations__", {}))
        return annotations

    def _key_exists(self, key: str) -> bool:
        return key in dir(self)

    def __init__(self, *, ignore_extra_properties: bool = False, **kwargs: "Any") -> None:
        self.ignore_extra_properties = ignore_extra_properties
        for key, value in kwargs.items():
            setattr(self, key, value)
        for key in self.__all_annotations__:
            if not self._key_exists(key):
                missing_required_attribute = translate(
                    "'{class_name}' does not have required attribute '{key}' set.",
                ).format(
                    class_name=self.__class__.__name__, key=key,
                )
                raise TypeError(missing_required_attribute)

    def __setattr__(self, key: str, value: "Any") -> None:
        if not (
            (
                key in self.__all_annotations__
            ) or self._key_exists(key)
        ):
            unknown_attribute = translate(
                "'{class_name}' does not have attribute '{key}' defined.",
            ).format(
                class_name=self.__class__.__name__, key=key,
            )
            if not self.ignore_extra_properties:
                raise TypeError(unknown_attribute)
        super().__setattr__(key, value)


class Statistics(enum.Enum):
    BOSON = enum.auto()
    FERMION = enum.auto()

    @property
    def sign(self) -> int:
        """+1 for bosons, -1 for fermions: the upper/lower sign of every +/- formula."""
        return 1 if self is Statistics.BOSON else -1

    @classmethod
    def from_name(cls, name: str) -> "Statistics":
        try:
            return cls[name.strip().upper()]
        except KeyError as exc:
            unknown_statistics = translate(
                "unknown statistics '{name}', expected 'boson' or 'fermion'",
            ).format(name=name)
            raise ValueError(unknown_statistics) from exc


def as_matrix(value: "npt.ArrayLike") -> "npt.NDArray[np.complex128]":
    matrix = np.atleast_2d(np.asarray(value, dtype=np.complex128))
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:  # noqa: PLR2004
        not_square = translate("expected a square matrix, got shape {}").format(matrix.shape)
        raise ValueError(not_square)
    return matrix


def is_hermitian(matrix: "npt.NDArray[Any]", rtol: float = HERMITIAN_RTOL) -> bool:
    scale = max(float(np.max(np.abs(matrix), initial=0.0)), 1.0)
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= rtol * scale)


def hermitize(matrix: "npt.NDArray[Any]") -> "npt.NDArray[Any]":
    return (matrix + np.swapaxes(matrix, -1, -2).conj()) / 2


def mkdir(to_path: Path) -> None:
    to_path.mkdir(parents=True, exist_ok=True)


def pool_map(
        func: "Callable[[ItemT], ResultT]", items: "Sequence[ItemT]", threads: int = 1,
) -> list["ResultT"]:
    """Apply `func` to every item on a thread pool, results kept in input order."""
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPool(processes=min(threads, len(items))) as pool:
        requests = [pool.apply_async(func, [item]) for item in items]
        pool.close()
        results = [request.get() for request in requests]
        pool.join()
    return results
