"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

from typing import TYPE_CHECKING

import numpy as np
from scipy import linalg

from .config import ExactMEConfig
from .core import DataType, hermitize, pool_map
from .exceptions import InstabilityError, InvalidInputError, PreconditionError
from .i18n import translate
from .logging import create_logger
from .quadrature import MAX_PHASE_PER_PANEL, adaptive_rule, fourier_at, fourier_sums
from .spectral import TWO_PI

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from typing import Final

    import numpy.typing as npt

    from .spectral import Reservoir, SystemSpec

    ComplexArray = npt.NDArray[np.complex128]


logger = create_logger("greens")


NORM_LIMIT: "Final" = 1 + 1e-3
RESOLUTION_FACTOR: "Final" = 0.1


class TimeGrid(DataType):
    dt: float
    n_steps: int
    t0: float = 0.0

    def __init__(self, dt: float, n_steps: int, t0: float = 0.0) -> None:
        super().__init__(dt=float(dt), n_steps=int(n_steps), t0=float(t0))
        if not np.isfinite(self.dt) or self.dt <= 0:
            bad_step = translate("time step must be positive, got {}").format(dt)
            raise InvalidInputError(bad_step)
        if self.n_steps < 2:  # noqa: PLR2004
            too_short = translate("a time grid needs at least 2 steps, got {}").format(n_steps)
            raise InvalidInputError(too_short)

    @classmethod
    def from_horizon(cls, t_max: float, dt: float) -> "TimeGrid":
        return cls(dt=dt, n_steps=round(t_max / dt))

    @property
    def times(self) -> "npt.NDArray[np.float64]":
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def t_max(self) -> float:
        return self.dt * self.n_steps

    def index_of(self, time: float) -> int:
        index = round((time - self.t0) / self.dt)
        if not 0 <= index <= self.n_steps or abs(self.t0 + index * self.dt - time) > 1e-9 * max(1.0, abs(time)):
            off_grid = translate("time {} is not a point of the grid").format(time)
            raise InvalidInputError(off_grid)
        return index


class GreenFunctions(DataType):
    """
    Propagator u(t_k) with its derivative, the kernels it was marched with,
    and, once `solve_v` ran, the equal-time v(t_k, t_k) and v(tau, t) slices keyed by anchor index.
    """

    system: "SystemSpec"
    grid: TimeGrid
    u: "ComplexArray"
    u_dot: "ComplexArray"
    memory: "ComplexArray"
    noise: "ComplexArray | None" = None
    v_diag: "ComplexArray | None" = None
    v_slices: dict[int, "ComplexArray"]
    v_stride: int = 1
    warnings: list[str]

    @property
    def dimension(self) -> int:
        return int(self.u.shape[1])

    def require_v(self) -> "ComplexArray":
        if self.v_diag is None:
            missing = translate("v(t, t) has not been computed, run solve_v first")
            raise PreconditionError(missing)
        return self.v_diag

    def slice_at(self, anchor_index: int) -> "ComplexArray":
        if anchor_index not in self.v_slices:
            missing = translate("no v(tau, t) slice at anchor step {}").format(anchor_index)
            raise PreconditionError(missing)
        return self.v_slices[anchor_index]

    def scalar_u(self) -> "npt.NDArray[np.complex128]":
        return self.u[:, 0, 0]


def kernel_values(
        reservoir: "Reservoir", tau_max: float, *, thermal: bool, order: int | None = None,
) -> tuple["npt.NDArray[np.float64]", "npt.NDArray[np.float64]"]:
    """Quadrature nodes and weights * J (or J f) / 2pi for the Fourier integral of one reservoir."""
    density = reservoir.density
    if density.is_zero:
        return np.zeros(0), np.zeros(0)

    def weight(energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        if thermal:
            return np.asarray(reservoir.thermal_weight(energies))
        return np.asarray(density(energies))

    max_width = MAX_PHASE_PER_PANEL / tau_max if tau_max > 0 else None
    rule = adaptive_rule(
        weight,
        density.support,
        breakpoints=reservoir.thermal_breakpoints if thermal else density.breakpoints,
        max_width=max_width,
        order=order,
    )
    return rule.nodes, rule.weights * weight(rule.nodes) / TWO_PI


def _assemble(
        system: "SystemSpec",
        scalars: "Sequence[npt.NDArray[np.complex128]]",
        count: int,
) -> "ComplexArray":
    dimension = system.dimension
    result = np.zeros((count, dimension, dimension), dtype=np.complex128)
    for reservoir, scalar in zip(system.reservoirs, scalars, strict=True):
        result += scalar[:, None, None] * reservoir.weight[None, :, :]
    return result


def kernel_lattice(
        system: "SystemSpec",
        grid: TimeGrid,
        *,
        thermal: bool,
        threads: int = 1,
        order: int | None = None,
) -> "ComplexArray":
    """g(k dt) (or the noise kernel) for k = 0..n_steps, summed over reservoirs."""
    count = grid.n_steps + 1

    def one_reservoir(reservoir: "Reservoir") -> "npt.NDArray[np.complex128]":
        nodes, weighted = kernel_values(reservoir, grid.t_max, thermal=thermal, order=order)
        return fourier_sums(nodes, weighted, grid.dt, count)

    scalars = pool_map(one_reservoir, system.reservoirs, threads)
    return _assemble(system, scalars, count)


def _kernel_at(system: "SystemSpec", tau: float, *, thermal: bool) -> "ComplexArray":
    scalars = []
    for reservoir in system.reservoirs:
        nodes, weighted = kernel_values(reservoir, abs(tau), thermal=thermal)
        scalars.append(fourier_at(nodes, weighted, [tau]))
    return _assemble(system, scalars, 1)[0]


def memory_kernel(system: "SystemSpec", tau: float) -> "ComplexArray":
    return _kernel_at(system, tau, thermal=False)


def noise_kernel(system: "SystemSpec", tau: float) -> "ComplexArray":
    return _kernel_at(system, tau, thermal=True)


def _spectral_norm(matrix: "ComplexArray") -> float:
    if matrix.shape == (1, 1):
        return float(abs(matrix[0, 0]))
    return float(np.linalg.norm(matrix, 2))


def march(  # pylint: disable=too-many-arguments,too-many-locals
        energy: "ComplexArray",
        kernel: "ComplexArray",
        dt: float,
        *,
        source: "ComplexArray | None" = None,
        initial: "ComplexArray | None" = None,
        norm_limit: float | None = None,
        progress: "Callable[[], None] | None" = None,
) -> tuple["ComplexArray", "ComplexArray"]:
    """
    March x' = -i eps x - int_0^t g(t - s) x(s) ds + F(t) on the kernel's grid.

    The free evolution is integrated exactly through exp(-i eps dt), the memory
    and source terms by the trapezoidal rule, and the end-point memory term is
    solved implicitly. Returns x and x'.
    """
    count, dimension, _ = kernel.shape
    identity = np.eye(dimension, dtype=np.complex128)
    propagator = linalg.expm(-1j * dt * energy)
    implicit = np.linalg.inv(identity + dt * dt / 4 * kernel[0])

    values = np.zeros((count, dimension, dimension), dtype=np.complex128)
    derivatives = np.zeros_like(values)
    values[0] = identity if initial is None else initial
    memory = np.zeros((dimension, dimension), dtype=np.complex128)
    derivatives[0] = -1j * energy @ values[0]
    if source is not None:
        derivatives[0] += source[0]

    for step in range(count - 1):
        following = step + 1
        # memory integral up to t_{k+1} without the implicit end-point term:
        partial = dt * (
            kernel[following] @ values[0] / 2
            + np.einsum("jab,jbc->ac", kernel[step:0:-1], values[1:following])
        )
        right = propagator @ values[step] - dt / 2 * (propagator @ memory + partial)
        if source is not None:
            right += dt / 2 * (propagator @ source[step] + source[following])
        values[following] = implicit @ right
        memory = partial + dt / 2 * kernel[0] @ values[following]
        derivatives[following] = -1j * energy @ values[following] - memory
        if source is not None:
            derivatives[following] += source[following]
        if norm_limit is not None:
            norm = _spectral_norm(values[following])
            if not np.isfinite(norm) or norm > norm_limit:
                unstable = translate(
                    "|u| reached {:.6f} at step {}, reduce dt",
                ).format(norm, following)
                raise InstabilityError(unstable, step=following, norm=norm)
        if progress:
            progress()
    return values, derivatives


def resolution_warnings(system: "SystemSpec", grid: TimeGrid) -> list[str]:
    scale = system.energy_scale
    if scale > 0 and grid.dt > RESOLUTION_FACTOR / scale:
        return [translate(
            "dt = {} does not resolve the fastest energy scale {}, expected dt <= {:.3g}",
        ).format(grid.dt, scale, RESOLUTION_FACTOR / scale)]
    return []


def solve_u(
        system: "SystemSpec",
        grid: TimeGrid,
        *,
        threads: int = 1,
        order: int | None = None,
        progress: "Callable[[], None] | None" = None,
) -> GreenFunctions:
    memory = kernel_lattice(system, grid, thermal=False, threads=threads, order=order)
    return solve_u_with_kernel(system, grid, memory, progress=progress)


def solve_u_with_kernel(
        system: "SystemSpec",
        grid: TimeGrid,
        memory: "ComplexArray",
        *,
        progress: "Callable[[], None] | None" = None,
) -> GreenFunctions:
    warnings = resolution_warnings(system, grid)
    for warning in warnings:
        logger.debug(warning)
    u, u_dot = march(
        system.energy, memory, grid.dt, norm_limit=NORM_LIMIT, progress=progress,
    )
    logger.debug("u solved on {} steps, |u(t_max)| = {:.6e}", grid.n_steps, _spectral_norm(u[-1]))
    return GreenFunctions(
        system=system,
        grid=grid,
        u=u,
        u_dot=u_dot,
        memory=memory,
        v_slices={},
        warnings=warnings,
    )


def _trapezoid_weights(count: int) -> "npt.NDArray[np.float64]":
    weights = np.ones(count)
    weights[0] = weights[-1] = 0.5
    return weights


def _lag(noise: "ComplexArray", lag: int) -> "ComplexArray":
    """g~ at a signed lattice offset, using g~(-t) = g~(t)^dagger."""
    if lag >= 0:
        return noise[lag]
    return noise[-lag].conj().T


def v_diagonal(u: "ComplexArray", noise: "ComplexArray", dt: float) -> "ComplexArray":
    """
    v(t_k, t_k) = dt^2 sum_pq w_p w_q u_p g~_(q-p) u_q^dagger for every k.

    Rows and the inner block of the trapezoidal quadratic form are carried
    from one step to the next, so the whole diagonal costs O(n^2).
    """
    count, dimension, _ = u.shape
    u_dagger = np.conj(np.swapaxes(u, 1, 2))
    half_first = np.ones(count)
    half_first[0] = 0.5
    weighted_u = half_first[:, None, None] * u
    result = np.zeros_like(u)
    inner = np.zeros((dimension, dimension), dtype=np.complex128)
    for step in range(count):
        if step:
            row = np.einsum("pab,pbc->ac", weighted_u[:step], noise[step:0:-1])
            cross = row @ u_dagger[step]
            result[step] = dt * dt * hermitize(
                inner + (cross + cross.conj().T) / 2 + u[step] @ noise[0] @ u_dagger[step] / 4,
            )
        else:
            row = np.zeros((dimension, dimension), dtype=np.complex128)
            cross = row
        inner = inner + half_first[step] * (cross + cross.conj().T) + (
            half_first[step] ** 2 * u[step] @ noise[0] @ u_dagger[step]
        )
    return result


def _slice_source(u: "ComplexArray", noise: "ComplexArray", anchor: int) -> "ComplexArray":
    """H_m = sum_p b_p g~_(m-k+p) u_p^dagger for m = 0..n at anchor step k."""
    count, dimension, _ = u.shape
    extended = np.concatenate([
        np.conj(np.swapaxes(noise[anchor:0:-1], 1, 2)),
        noise,
    ])
    weights = _trapezoid_weights(anchor + 1)
    result = np.zeros((count, dimension, dimension), dtype=np.complex128)
    for row in range(dimension):
        for column in range(dimension):
            for inner in range(dimension):
                # np.correlate conjugates its second argument:
                result[:, row, column] += np.correlate(
                    extended[:, row, inner], weights * u[:anchor + 1, column, inner], "valid",
                )
    return result


def v_slice(u: "ComplexArray", noise: "ComplexArray", dt: float, anchor: int) -> "ComplexArray":
    """v(t_m, t_k) for every m at the anchor step k, by the trapezoidal double sum."""
    count, dimension, _ = u.shape
    result = np.zeros_like(u)
    if anchor == 0:
        return result
    source = _slice_source(u, noise, anchor)
    half_first = np.ones(count)
    half_first[0] = 0.5
    for row in range(dimension):
        for column in range(dimension):
            for inner in range(dimension):
                result[:, row, column] += (
                    np.convolve(half_first * u[:, row, inner], source[:, inner, column])[:count]
                    - u[:, row, inner] * source[0, inner, column] / 2
                )
    return dt * dt * result


def solve_v(  # pylint: disable=too-many-arguments
        gf: GreenFunctions | None,
        anchors: "Sequence[int]" = (),
        *,
        v_stride: int = 1,
        noise: "ComplexArray | None" = None,
        threads: int = 1,
        order: int | None = None,
) -> GreenFunctions:
    """Fill v(t, t) on the whole grid and v(tau, t) slices at the anchor steps."""
    if gf is None:
        missing = translate("u must be solved before v")
        raise PreconditionError(missing)
    if v_stride < 1:
        bad_stride = translate("v stride must be >= 1, got {}").format(v_stride)
        raise InvalidInputError(bad_stride)
    grid = gf.grid
    if noise is None:
        noise = gf.noise if gf.noise is not None else kernel_lattice(
            gf.system, grid, thermal=True, threads=threads, order=order,
        )
    gf.noise = noise
    gf.v_diag = v_diagonal(gf.u, noise, grid.dt)
    gf.v_stride = v_stride
    for anchor in anchors:
        if not 0 <= anchor <= grid.n_steps:
            off_grid = translate("anchor step {} lies outside the grid").format(anchor)
            raise InvalidInputError(off_grid)
    new_anchors = [anchor for anchor in dict.fromkeys(anchors) if anchor not in gf.v_slices]
    slices = pool_map(
        lambda anchor: v_slice(gf.u, noise, grid.dt, anchor), new_anchors, threads,
    )
    gf.v_slices.update(zip(new_anchors, slices, strict=True))
    logger.debug("v solved, {} anchors", len(gf.v_slices))
    return gf


def march_v_slice(gf: GreenFunctions, anchor: int) -> "ComplexArray":
    """v(tau, t_k) from the integro-differential equation it obeys in tau, with u^dagger(t - tau') in the source."""
    if gf.noise is None:
        missing = translate("noise kernel missing, run solve_v first")
        raise PreconditionError(missing)
    if anchor == 0:
        return np.zeros_like(gf.u)
    source = gf.grid.dt * _slice_source(gf.u, gf.noise, anchor)
    values, _derivatives = march(
        gf.system.energy, gf.memory, gf.grid.dt,
        source=source, initial=np.zeros_like(gf.u[0]),
    )
    return values


def cross_check_v(gf: GreenFunctions, anchor: int, tolerance: float | None = None) -> float:
    """Relative discrepancy between the quadratic-form slice and the marched slice."""
    tolerance = (
        ExactMEConfig().solver.VCrossCheckTolerance.get_float() if tolerance is None else tolerance
    )
    closed = gf.slice_at(anchor)
    marched = march_v_slice(gf, anchor)
    scale = float(np.max(np.abs(closed), initial=0.0))
    difference = float(np.max(np.abs(closed - marched), initial=0.0))
    relative = difference / scale if scale > 0 else difference
    if relative > tolerance:
        mismatch = translate(
            "v slice at step {} disagrees with direct marching by {:.3e} (relative)",
        ).format(anchor, relative)
        logger.debug(mismatch)
        gf.warnings.append(mismatch)
    return relative
