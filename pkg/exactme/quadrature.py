"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import functools
from typing import TYPE_CHECKING

import numpy as np

from .config import ExactMEConfig
from .core import DataType
from .exceptions import NumericalFailureError
from .i18n import translate
from .logging import create_logger

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable
    from typing import Final

    import numpy.typing as npt

    RealFunction = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]


logger = create_logger("quadrature")


MAX_BISECTION_DEPTH: "Final" = 60
MAX_PANELS: "Final" = 400_000
# keeps end nodes of a panel off its endpoints in floating point:
MIN_PANEL_RATIO: "Final" = 1e-12
# panels never span more than this many radians of the fastest phase e^{-i eps tau_max}:
MAX_PHASE_PER_PANEL: "Final" = 10.0
PHASE_REANCHOR_EVERY: "Final" = 256


def default_order() -> int:
    return ExactMEConfig().solver.QuadratureOrder.get_int()


def default_tolerance() -> float:
    return ExactMEConfig().solver.QuadratureTolerance.get_float()


@functools.cache
def gauss_legendre(order: int) -> tuple["npt.NDArray[np.float64]", "npt.NDArray[np.float64]"]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _panel(
        lower: float, upper: float, order: int,
) -> tuple["npt.NDArray[np.float64]", "npt.NDArray[np.float64]"]:
    nodes, weights = gauss_legendre(order)
    half = (upper - lower) / 2
    return (lower + upper) / 2 + half * nodes, half * weights


class CompositeRule(DataType):
    """Nodes and weights of a composite rule plus its estimated absolute error for the fitted integrand."""

    nodes: "npt.NDArray[np.float64]"
    weights: "npt.NDArray[np.float64]"
    error: float

    @classmethod
    def empty(cls) -> "CompositeRule":
        return cls(nodes=np.zeros(0), weights=np.zeros(0), error=0.0)

    def integrate(self, values: "npt.NDArray[np.generic]") -> complex | float:
        result = np.dot(self.weights, values)
        if np.iscomplexobj(result):
            return complex(result)
        return float(result)

    def __len__(self) -> int:
        return len(self.nodes)


def split_points(
        lower: float, upper: float, breakpoints: "Iterable[float]", max_width: float | None,
) -> list[float]:
    points = sorted({lower, upper, *(
        point for point in breakpoints if lower < point < upper
    )})
    if max_width is None:
        return points
    result = [points[0]]
    for left, right in zip(points[:-1], points[1:], strict=True):
        pieces = max(1, int(np.ceil((right - left) / max_width)))
        result.extend(np.linspace(left, right, pieces + 1)[1:].tolist())
    if len(result) > MAX_PANELS:
        too_many = translate("{} panels needed to resolve the kernel oscillation").format(len(result))
        raise NumericalFailureError(too_many, estimate=float("inf"))
    return result


def adaptive_rule(  # pylint: disable=too-many-arguments,too-many-locals
        func: "RealFunction",
        intervals: "Iterable[tuple[float, float]]",
        *,
        breakpoints: "Iterable[float]" = (),
        max_width: float | None = None,
        tolerance: float | None = None,
        absolute_floor: float = 0.0,
        order: int | None = None,
) -> CompositeRule:
    """
    Build a composite Gauss-Legendre rule adapted to `func` over `intervals`.

    Every panel is bisected until its coarse and refined estimates agree to a share
    (proportional to its width) of `tolerance` times the integral magnitude.
    """
    order = order or default_order()
    tolerance = default_tolerance() if tolerance is None else tolerance
    breakpoints = list(breakpoints)

    initial_panels: list[tuple[float, float]] = []
    for lower, upper in intervals:
        if upper <= lower:
            continue
        points = split_points(lower, upper, breakpoints, max_width)
        initial_panels.extend(zip(points[:-1], points[1:], strict=True))
    if not initial_panels:
        return CompositeRule.empty()

    total_width = sum(upper - lower for lower, upper in initial_panels)
    rough = 0.0
    for lower, upper in initial_panels:
        nodes, weights = _panel(lower, upper, order)
        rough += float(np.dot(weights, np.abs(func(nodes))))
    target = max(tolerance * rough, absolute_floor)

    all_nodes: list[npt.NDArray[np.float64]] = []
    all_weights: list[npt.NDArray[np.float64]] = []
    total_error = 0.0
    stack = [(lower, upper, 0) for lower, upper in reversed(initial_panels)]
    panel_count = 0
    while stack:
        lower, upper, depth = stack.pop()
        middle = (lower + upper) / 2
        nodes, weights = _panel(lower, upper, order)
        coarse = np.dot(weights, func(nodes))
        left_nodes, left_weights = _panel(lower, middle, order)
        right_nodes, right_weights = _panel(middle, upper, order)
        fine_nodes = np.concatenate([left_nodes, right_nodes])
        fine_weights = np.concatenate([left_weights, right_weights])
        fine = np.dot(fine_weights, func(fine_nodes))
        panel_error = float(abs(fine - coarse))
        allowed = target * (upper - lower) / total_width
        too_narrow = upper - lower < MIN_PANEL_RATIO * max(total_width, abs(lower), abs(upper))
        if panel_error <= allowed or too_narrow or depth >= MAX_BISECTION_DEPTH or panel_count > MAX_PANELS:
            all_nodes.append(fine_nodes)
            all_weights.append(fine_weights)
            total_error += panel_error
            panel_count += 1
            continue
        stack.append((middle, upper, depth + 1))
        stack.append((lower, middle, depth + 1))

    logger.debug(
        "{} panels, {} nodes, error estimate {:.3e}",
        panel_count, panel_count * 2 * order, total_error,
    )
    return CompositeRule(
        nodes=np.concatenate(all_nodes),
        weights=np.concatenate(all_weights),
        error=total_error,
    )


def fourier_sums(
        nodes: "npt.NDArray[np.float64]",
        weighted_values: "npt.NDArray[np.generic]",
        step: float,
        count: int,
) -> "npt.NDArray[np.complex128]":
    """Return sum_i w_i f(eps_i) exp(-i eps_i k step) for k = 0..count-1."""
    result = np.zeros(count, dtype=np.complex128)
    if len(nodes) == 0:
        return result
    weighted = np.asarray(weighted_values, dtype=np.complex128)
    increment = np.exp(-1j * nodes * step)
    phase = np.ones_like(increment)
    for index in range(count):
        if index and index % PHASE_REANCHOR_EVERY == 0:
            phase = np.exp(-1j * nodes * (index * step))
        result[index] = np.dot(weighted, phase)
        phase *= increment
    return result


def fourier_at(
        nodes: "npt.NDArray[np.float64]",
        weighted_values: "npt.NDArray[np.generic]",
        times: "npt.ArrayLike",
) -> "npt.NDArray[np.complex128]":
    """Return sum_i w_i f(eps_i) exp(-i eps_i t) for arbitrary times."""
    times_array = np.atleast_1d(np.asarray(times, dtype=np.float64))
    weighted = np.asarray(weighted_values, dtype=np.complex128)
    return np.array([
        np.dot(weighted, np.exp(-1j * nodes * time)) for time in times_array
    ], dtype=np.complex128)
