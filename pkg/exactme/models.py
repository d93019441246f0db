"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import enum
import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate

from .core import DataType, Statistics, hermitize
from .exceptions import InvalidConfigurationError, InvalidInputError
from .greens import NORM_LIMIT, kernel_lattice, march, solve_u, solve_v
from .i18n import translate
from .logging import create_logger
from .mastereq import compute_coefficients
from .spectral import SystemSpec, lamb_shift_limit

if TYPE_CHECKING:
    from collections.abc import Callable
    from typing import Final

    import numpy.typing as npt

    from .greens import TimeGrid
    from .spectral import Reservoir

    ComplexArray = npt.NDArray[np.complex128]


logger = create_logger("models")


COTH_SERIES_BELOW: "Final" = 1e-3
QUAD_TOLERANCE: "Final" = 1e-11
SINGULAR_AMPLITUDE: "Final" = 1e-12

# two-level operators in the (ground, excited) = (empty, occupied) ordering:
LOWERING: "Final" = np.array([[0, 1], [0, 0]], dtype=np.complex128)
RAISING: "Final" = LOWERING.conj().T
SIGMA_Z: "Final" = np.diag([-1, 1]).astype(np.complex128)
SIGMA_X: "Final" = np.array([[0, 1], [1, 0]], dtype=np.complex128)


class ModelKind(enum.Enum):
    SPIN_ZERO_T = "spin_zero_T"
    PURE_DEPHASING = "pure_dephasing"
    MAJORANA = "majorana"

    @classmethod
    def from_name(cls, name: str) -> "ModelKind":
        for kind in cls:
            if kind.value.lower() == name.strip().lower():
                return kind
        unknown_kind = translate("unknown model kind '{}', expected one of: {}").format(
            name, ", ".join(kind.value for kind in cls),
        )
        raise InvalidConfigurationError(unknown_kind)


class SpecialModel(DataType):
    kind: ModelKind
    bath: "Reservoir"
    splitting: float = 0.0

    def __init__(self, kind: ModelKind, bath: "Reservoir", splitting: float = 0.0) -> None:
        super().__init__(kind=kind, bath=bath, splitting=float(splitting))
        statistics = bath.statistics
        if kind is ModelKind.SPIN_ZERO_T:
            if statistics is not Statistics.BOSON:
                not_boson = translate("spin amplitude damping needs a boson bath")
                raise InvalidConfigurationError(not_boson)
            if bath.temperature != 0:
                warm = translate(
                    "spin amplitude damping is exact only at zero temperature, got T = {}",
                ).format(bath.temperature)
                raise InvalidConfigurationError(warm)
        elif kind is ModelKind.PURE_DEPHASING:
            if statistics is not Statistics.BOSON:
                not_boson = translate("pure dephasing needs a boson bath")
                raise InvalidConfigurationError(not_boson)
            if bath.density.support and bath.density.infimum < 0:
                negative = translate("pure dephasing needs a spectral density on positive frequencies")
                raise InvalidConfigurationError(negative)
            if bath.temperature > 0 and bath.density.support and float(bath.density(0.0)) > 0:
                divergent = translate(
                    "J(0) > 0 at T > 0 makes the dephasing rate diverge",
                )
                raise InvalidConfigurationError(divergent)
        elif statistics is not Statistics.FERMION:
            not_fermion = translate("the Majorana model needs a fermion bath")
            raise InvalidConfigurationError(not_fermion)

    def level_system(self) -> SystemSpec:
        return SystemSpec(statistics=self.bath.statistics, energy=self.splitting, reservoirs=[self.bath])


class ModelSeries(DataType):
    kind: ModelKind
    times: "npt.NDArray[np.float64]"
    states: "ComplexArray"
    columns: dict[str, "npt.NDArray[np.generic]"]
    backflow_times: list[float]
    warnings: list[str]

    def trace_drift(self) -> float:
        traces = np.trace(self.states, axis1=1, axis2=2).real
        return float(np.max(np.abs(traces - traces[0])))


def _check_state(rho0: "npt.ArrayLike") -> "ComplexArray":
    matrix = np.asarray(rho0, dtype=np.complex128)
    if matrix.shape != (2, 2):
        wrong_shape = translate("two-level models need a 2x2 density matrix, got shape {}").format(matrix.shape)
        raise InvalidInputError(wrong_shape)
    return matrix


def _runge_kutta(
        rho0: "ComplexArray",
        dt: float,
        count: int,
        derivative: "Callable[[ComplexArray, float], ComplexArray]",
) -> "ComplexArray":
    """RK4 where `derivative(matrix, position)` takes the position in steps (halves allowed)."""
    states = np.zeros((count, 2, 2), dtype=np.complex128)
    states[0] = rho0
    for step in range(count - 1):
        current = states[step]
        first = derivative(current, step)
        second = derivative(current + dt / 2 * first, step + 0.5)
        third = derivative(current + dt / 2 * second, step + 0.5)
        fourth = derivative(current + dt * third, step + 1)
        states[step + 1] = hermitize(current + dt / 6 * (first + 2 * second + 2 * third + fourth))
    return states


def _at_position(values: "npt.NDArray[np.generic]", position: float) -> "npt.NDArray[np.generic]":
    step = int(position)
    if position == step:
        return values[step]
    last = len(values) - 1
    if 1 <= step <= last - 2:
        return (-values[step - 1] + 9 * values[step] + 9 * values[step + 1] - values[step + 2]) / 16
    return (values[step] + values[step + 1]) / 2


def spin_zero_t_dynamics(model: SpecialModel, grid: "TimeGrid", rho0: "npt.ArrayLike") -> ModelSeries:
    """Amplitude damping -i(eps'/2)[sigma_z, rho] + gamma(2 s- rho s+ - s+ s- rho - rho s+ s-)."""
    if model.kind is not ModelKind.SPIN_ZERO_T:
        wrong_kind = translate("expected a spin_zero_T model, got {}").format(model.kind.value)
        raise InvalidConfigurationError(wrong_kind)
    matrix = _check_state(rho0)
    gf = solve_u(model.level_system(), grid)
    solve_v(gf, noise=np.zeros_like(gf.memory))
    coefficients = compute_coefficients(gf)
    eps_prime = coefficients.eps_prime[:, 0, 0].real
    gamma = coefficients.gamma[:, 0, 0].real
    excited = RAISING @ LOWERING

    def derivative(state: "ComplexArray", position: float) -> "ComplexArray":
        energy = float(_at_position(eps_prime, position))
        rate = float(_at_position(gamma, position))
        return (
            -1j * energy / 2 * (SIGMA_Z @ state - state @ SIGMA_Z)
            + rate * (2 * LOWERING @ state @ RAISING - excited @ state - state @ excited)
        )

    states = _runge_kutta(matrix, grid.dt, grid.n_steps + 1, derivative)
    return ModelSeries(
        kind=model.kind,
        times=grid.times,
        states=states,
        columns={"u": gf.scalar_u(), "eps_prime": eps_prime, "gamma": gamma},
        backflow_times=sign_changes(grid.times, gamma),
        warnings=gf.warnings + coefficients.warnings,
    )


def coth(value: float) -> float:
    if value < COTH_SERIES_BELOW:
        return 1 / value + value / 3
    return 1 / math.tanh(value)


def _thermal_factor(model: SpecialModel, frequency: float) -> float:
    temperature = model.bath.temperature
    if temperature == 0:
        return 1.0
    return coth(frequency / (2 * temperature))


def _quad(
        func: "Callable[[float], float]", lower: float, upper: float, **kwargs: object,
) -> float:
    result = integrate.quad(
        func, lower, upper,
        epsabs=QUAD_TOLERANCE, epsrel=QUAD_TOLERANCE, limit=lamb_shift_limit(), full_output=1,
        **kwargs,  # type: ignore[arg-type]
    )
    return float(result[0])


def _require_dephasing(model: SpecialModel) -> None:
    if model.kind is not ModelKind.PURE_DEPHASING:
        wrong_kind = translate("expected a pure_dephasing model, got {}").format(model.kind.value)
        raise InvalidConfigurationError(wrong_kind)


def _split(lower: float, upper: float, time: float) -> float:
    """End of the low-frequency piece, where at most half an oscillation fits."""
    if time <= 0:
        return upper
    return min(upper, lower + math.pi / time)


def dephasing_rate(model: SpecialModel, time: float) -> float:
    """gamma2(t) = 2 int J(w) coth(w/2T) cos(w t) dw."""
    _require_dephasing(model)
    density = model.bath.density

    def weighted(frequency: float) -> float:
        if frequency <= 0:
            return float(density(0.0)) if model.bath.temperature == 0 else 0.0
        return float(density(frequency)) * _thermal_factor(model, frequency)

    total = 0.0
    for lower, upper in density.support:
        middle = _split(lower, upper, time)
        total += _quad(lambda frequency: weighted(frequency) * math.cos(frequency * time), lower, middle)
        if middle < upper:
            total += _quad(weighted, middle, upper, weight="cos", wvar=time)
    return 2 * total


def dephasing_factor(model: SpecialModel, time: float) -> float:
    """Gamma(t) = 2 int J(w) coth(w/2T) sin(w t)/w dw, the time integral of the dephasing rate."""
    _require_dephasing(model)
    density = model.bath.density

    def weighted(frequency: float) -> float:
        if frequency <= 0:
            return float(density(0.0)) if model.bath.temperature == 0 else 0.0
        return float(density(frequency)) * _thermal_factor(model, frequency)

    total = 0.0
    for lower, upper in density.support:
        middle = _split(lower, upper, time)
        total += _quad(
            lambda frequency: weighted(frequency) * time * float(np.sinc(frequency * time / math.pi)),
            lower, middle,
        )
        if middle < upper:
            total += _quad(
                lambda frequency: weighted(frequency) / frequency,
                middle, upper, weight="sin", wvar=time,
            )
    return 2 * total


def dephasing_dynamics(model: SpecialModel, grid: "TimeGrid", rho0: "npt.ArrayLike") -> ModelSeries:
    """Populations stay fixed; rho_01 picks up exp(-2 Gamma(t)) exp(-2 i eps t)."""
    _require_dephasing(model)
    matrix = _check_state(rho0)
    times = grid.times
    rates = np.array([dephasing_rate(model, time) for time in times])
    factors = np.array([dephasing_factor(model, time) for time in times])
    states = np.repeat(matrix[None, :, :], len(times), axis=0)
    coherence = matrix[0, 1] * np.exp(-2 * factors) * np.exp(-2j * model.splitting * times)
    states[:, 0, 1] = coherence
    states[:, 1, 0] = np.conj(coherence)
    return ModelSeries(
        kind=model.kind,
        times=times,
        states=states,
        columns={"gamma2": rates, "decoherence": factors},
        backflow_times=sign_changes(times, rates),
        warnings=[],
    )


def symmetrized_kernel(model: SpecialModel, grid: "TimeGrid") -> "ComplexArray":
    """g(tau) + g(-tau) = 2 Re g(tau) on the grid lattice."""
    memory = kernel_lattice(model.level_system(), grid, thermal=False)
    return (2 * memory.real).astype(np.complex128)


def majorana_dynamics(model: SpecialModel, grid: "TimeGrid", rho0: "npt.ArrayLike") -> ModelSeries:
    """gamma(t)(lambda rho lambda - rho) with lambda = sigma_x and gamma = -u'/u from the symmetrized kernel."""
    if model.kind is not ModelKind.MAJORANA:
        wrong_kind = translate("expected a majorana model, got {}").format(model.kind.value)
        raise InvalidConfigurationError(wrong_kind)
    matrix = _check_state(rho0)
    kernel = symmetrized_kernel(model, grid)
    u, u_dot = march(np.zeros((1, 1), dtype=np.complex128), kernel, grid.dt, norm_limit=NORM_LIMIT)
    amplitude = u[:, 0, 0].real
    warnings = []
    singular = np.abs(amplitude) < SINGULAR_AMPLITUDE
    gamma = np.full(len(amplitude), np.nan)
    gamma[~singular] = -u_dot[~singular, 0, 0].real / amplitude[~singular]
    if np.any(singular):
        warnings.append(translate("u vanishes at {} step(s), the decoherence rate is interpolated there").format(
            int(np.sum(singular)),
        ))
        regular = np.flatnonzero(~singular)
        gamma[singular] = np.interp(np.flatnonzero(singular), regular, gamma[regular])

    def derivative(state: "ComplexArray", position: float) -> "ComplexArray":
        rate = float(_at_position(gamma, position))
        return rate * (SIGMA_X @ state @ SIGMA_X - state)

    states = _runge_kutta(matrix, grid.dt, grid.n_steps + 1, derivative)
    backflow = sign_changes(grid.times, gamma)
    for time in backflow:
        logger.debug("decoherence rate changes sign at t = {}", time)
    return ModelSeries(
        kind=model.kind,
        times=grid.times,
        states=states,
        columns={"u": amplitude, "gamma": gamma},
        backflow_times=backflow,
        warnings=warnings,
    )


def lambda_coherence(states: "ComplexArray") -> "npt.NDArray[np.complex128]":
    """Off-diagonal element in the sigma_x eigenbasis (|+>, |->)."""
    plus = np.array([1, 1], dtype=np.complex128) / math.sqrt(2)
    minus = np.array([1, -1], dtype=np.complex128) / math.sqrt(2)
    return np.einsum("i,kij,j->k", plus.conj(), states, minus)


def sign_changes(times: "npt.NDArray[np.float64]", values: "npt.NDArray[np.generic]") -> list[float]:
    """Times at which the series strictly changes sign."""
    real = np.real(np.asarray(values))
    product = real[:-1] * real[1:]
    return [float(times[index + 1]) for index in np.flatnonzero(product < 0)]


def run_model(model: SpecialModel, grid: "TimeGrid", rho0: "npt.ArrayLike") -> ModelSeries:
    return {
        ModelKind.SPIN_ZERO_T: spin_zero_t_dynamics,
        ModelKind.PURE_DEPHASING: dephasing_dynamics,
        ModelKind.MAJORANA: majorana_dynamics,
    }[model.kind](model, grid, rho0)
