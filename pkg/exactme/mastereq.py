"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import functools
from typing import TYPE_CHECKING

import numpy as np

from .config import ExactMEConfig
from .core import DataType, Statistics, hermitize
from .exceptions import BridgingError, CutoffOverflowError, InvalidInputError
from .fock import DensityMatrix
from .i18n import translate
from .logging import create_logger

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from typing import Final

    import numpy.typing as npt

    from .fock import FockBasis
    from .greens import GreenFunctions, TimeGrid

    ComplexArray = npt.NDArray[np.complex128]


logger = create_logger("mastereq")


SINGULAR_DETERMINANT: "Final" = 1e-12
CENTRAL_OFFSETS: "Final" = (-2, -1, 0, 1, 2)
STENCIL_SIZE: "Final" = 5


@functools.cache
def difference_weights(offsets: tuple[int, ...]) -> "npt.NDArray[np.float64]":
    """First-derivative weights on integer offsets, exact for polynomials of degree len(offsets) - 1."""
    points = np.asarray(offsets, dtype=np.float64)
    vandermonde = np.vander(points, increasing=True).T
    target = np.zeros(len(points))
    target[1] = 1.0
    weights = np.linalg.solve(vandermonde, target)
    weights.setflags(write=False)
    return weights


def _stencil(step: int, last: int) -> tuple[int, ...]:
    start = min(max(step - 2, 0), last - STENCIL_SIZE + 1)
    return tuple(index - step for index in range(start, start + STENCIL_SIZE))


def differentiate(values: "ComplexArray", dt: float) -> "ComplexArray":
    """
    Five-point first derivative along axis 0: central inside, off-centred near the ends.

    The value at step 0 is set to zero, as v(t, t) starts quadratically.
    """
    last = len(values) - 1
    result = np.zeros_like(values)
    if last < STENCIL_SIZE - 1:
        result[1:] = np.gradient(values, dt, axis=0)[1:]
        return result
    central = difference_weights(CENTRAL_OFFSETS)
    result[2:last - 1] = sum(
        weight * values[2 + offset:last - 1 + offset]
        for weight, offset in zip(central, CENTRAL_OFFSETS, strict=True)
    ) / dt
    for step in (1, last - 1, last):
        offsets = _stencil(step, last)
        weights = difference_weights(offsets)
        result[step] = sum(
            weight * values[step + offset] for weight, offset in zip(weights, offsets, strict=True)
        ) / dt
    return result


class CoefficientsAt(DataType):
    eps_prime: "ComplexArray"
    gamma: "ComplexArray"
    gamma_tilde: "ComplexArray"

    @property
    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.eps_prime))
            and np.all(np.isfinite(self.gamma))
            and np.all(np.isfinite(self.gamma_tilde)),
        )

    def interpolate(self, other: "CoefficientsAt", fraction: float) -> "CoefficientsAt":
        return CoefficientsAt(
            eps_prime=(1 - fraction) * self.eps_prime + fraction * other.eps_prime,
            gamma=(1 - fraction) * self.gamma + fraction * other.gamma,
            gamma_tilde=(1 - fraction) * self.gamma_tilde + fraction * other.gamma_tilde,
        )


class MECoefficients(DataType):
    grid: "TimeGrid"
    statistics: Statistics
    eps_prime: "ComplexArray"
    gamma: "ComplexArray"
    gamma_tilde: "ComplexArray"
    singular: "npt.NDArray[np.bool_]"
    warnings: list[str]

    def at(self, step: int) -> CoefficientsAt:
        return CoefficientsAt(
            eps_prime=self.eps_prime[step],
            gamma=self.gamma[step],
            gamma_tilde=self.gamma_tilde[step],
        )

    @property
    def dimension(self) -> int:
        return int(self.eps_prime.shape[1])

    def half_step(self, step: int) -> CoefficientsAt:
        """Coefficients at t_k + dt/2: cubic from four neighbours, linear next to the ends."""
        last = len(self.eps_prime) - 1
        if 1 <= step <= last - 2:
            # a linear midpoint would hold RK4 to second order
            weights = ((step - 1, -1 / 16), (step, 9 / 16), (step + 1, 9 / 16), (step + 2, -1 / 16))
            return CoefficientsAt(**{
                name: sum(weight * getattr(self, name)[index] for index, weight in weights)
                for name in ("eps_prime", "gamma", "gamma_tilde")
            })
        return self.at(step).interpolate(self.at(step + 1), 0.5)


def compute_coefficients(gf: "GreenFunctions") -> MECoefficients:
    """eps', gamma and gamma~ from kappa = u' u^-1 and the equal-time v."""
    v_diag = gf.require_v()
    u = gf.u
    count, dimension, _ = u.shape
    determinants = np.abs(np.linalg.det(u))
    singular = determinants < SINGULAR_DETERMINANT
    kappa = np.full_like(u, np.nan)
    regular = ~singular
    # kappa = u' u^-1  <=>  u^T kappa^T = u'^T
    kappa[regular] = np.swapaxes(np.linalg.solve(
        np.swapaxes(u[regular], 1, 2), np.swapaxes(gf.u_dot[regular], 1, 2),
    ), 1, 2)
    kappa_dagger = np.conj(np.swapaxes(kappa, 1, 2))
    v_dot = differentiate(v_diag, gf.grid.dt)
    eps_prime = hermitize(0.5j * (kappa - kappa_dagger))
    gamma = hermitize(-0.5 * (kappa + kappa_dagger))
    drift = kappa @ v_diag
    gamma_tilde = hermitize(v_dot - drift - np.conj(np.swapaxes(drift, 1, 2)))
    warnings = []
    if np.any(singular):
        steps = np.flatnonzero(singular)
        warning = translate(
            "u is singular at {} step(s), first at t = {}; the generator is bridged there",
        ).format(len(steps), gf.grid.times[steps[0]])
        logger.debug(warning)
        warnings.append(warning)
    logger.debug("coefficients computed for {} steps of {} level(s)", count, dimension)
    return MECoefficients(
        grid=gf.grid,
        statistics=gf.system.statistics,
        eps_prime=eps_prime,
        gamma=gamma,
        gamma_tilde=gamma_tilde,
        singular=singular,
        warnings=warnings,
    )


def _commutator(first: "ComplexArray", second: "ComplexArray") -> "ComplexArray":
    return first @ second - second @ first


def generator_apply(
        rho: DensityMatrix, coefficients: CoefficientsAt, statistics: Statistics,
) -> "ComplexArray":
    """
    Right-hand side of the exact master equation.

    -i[H', rho] + sum gamma_ij (2 a_j rho a_i^+ - a_i^+ a_j rho - rho a_i^+ a_j)
    + sum gamma~_ij (a_i^+ rho a_j +- a_j rho a_i^+ -+ a_i^+ a_j rho - rho a_j a_i^+),
    upper signs for bosons.
    """
    basis = rho.basis
    levels = coefficients.gamma.shape[0]
    basis.check_levels(levels, statistics)
    sign = statistics.sign
    matrix = rho.matrix
    hamiltonian = basis.quadratic(coefficients.eps_prime)
    result = -1j * _commutator(hamiltonian, matrix)
    for row in range(levels):
        creator = basis.creators[row]
        for column in range(levels):
            annihilator = basis.annihilators[column]
            normal = basis.normal_products[row][column]
            anti_normal = basis.anti_normal_products[row][column]
            rate = coefficients.gamma[row, column]
            if rate:
                result += rate * (
                    2 * annihilator @ matrix @ creator - normal @ matrix - matrix @ normal
                )
            noise = coefficients.gamma_tilde[row, column]
            if noise:
                result += noise * (
                    creator @ matrix @ annihilator
                    + sign * annihilator @ matrix @ creator
                    - sign * normal @ matrix
                    - matrix @ anti_normal
                )
    return result


def _dissipator(
        jump: "ComplexArray", partner: "ComplexArray", matrix: "ComplexArray",
) -> "ComplexArray":
    """L_{A,B} rho = A rho B - (B A rho + rho B A)/2."""
    product = partner @ jump
    return jump @ matrix @ partner - (product @ matrix + matrix @ product) / 2


class LindbladForm(DataType):
    """
    Generator rewritten as a Hamiltonian part and weighted dissipators L_{A,B}.

    `correction` is the part of the Hamiltonian that reduces to a multiple of the
    identity in the full Fock space; it survives only through truncation.
    """

    hamiltonian: "ComplexArray"
    correction: "ComplexArray"
    channels: list[tuple[complex, "ComplexArray", "ComplexArray"]]

    @property
    def weights(self) -> list[complex]:
        return [weight for weight, _jump, _partner in self.channels]

    def apply(self, rho: DensityMatrix) -> "ComplexArray":
        matrix = rho.matrix
        result = -1j * _commutator(self.hamiltonian + self.correction, matrix)
        for weight, jump, partner in self.channels:
            result += weight * _dissipator(jump, partner, matrix)
        return result


def lindblad_form(
        coefficients: CoefficientsAt, basis: "FockBasis", statistics: Statistics,
) -> LindbladForm:
    """Gain channels weighted by gamma~ on L_{a^+, a}, loss channels by 2 gamma +- gamma~ on L_{a, a^+}."""
    levels = coefficients.gamma.shape[0]
    basis.check_levels(levels, statistics)
    sign = statistics.sign
    correction = np.zeros((basis.dimension, basis.dimension), dtype=np.complex128)
    channels: list[tuple[complex, ComplexArray, ComplexArray]] = []
    for row in range(levels):
        for column in range(levels):
            noise = complex(coefficients.gamma_tilde[row, column])
            rate = complex(coefficients.gamma[row, column])
            creator = basis.creators[row]
            annihilator = basis.annihilators[column]
            if noise:
                channels.append((noise, creator, annihilator))
                correction += 0.5j * noise * (
                    basis.anti_normal_products[row][column] - sign * basis.normal_products[row][column]
                )
            loss = 2 * rate + sign * noise
            if loss:
                channels.append((loss, annihilator, creator))
    return LindbladForm(
        hamiltonian=basis.quadratic(coefficients.eps_prime),
        correction=correction,
        channels=channels,
    )


class RhoSeries(DataType):
    times: "npt.NDArray[np.float64]"
    basis: "FockBasis"
    states: "ComplexArray"
    trace_drift: float
    min_eigenvalue: float
    warnings: list[str]

    def at(self, step: int) -> DensityMatrix:
        return DensityMatrix(basis=self.basis, matrix=self.states[step])

    def occupations(self) -> "ComplexArray":
        return np.array([self.at(step).occupation() for step in range(len(self.times))])


def bridge_singular(coefficients: MECoefficients) -> tuple[list[CoefficientsAt], list[str]]:
    """Replace non-finite steps by linear interpolation between the nearest finite neighbours."""
    count = len(coefficients.eps_prime)
    instants = [coefficients.at(step) for step in range(count)]
    finite = [instant.is_finite for instant in instants]
    bridged = [step for step in range(count) if not finite[step]]
    for step in bridged:
        before = next((index for index in range(step - 1, -1, -1) if finite[index]), None)
        after = next((index for index in range(step + 1, count) if finite[index]), None)
        if before is None or after is None:
            no_neighbour = translate(
                "coefficients at t = {} are not finite and have no finite neighbour on both sides",
            ).format(coefficients.grid.times[step])
            raise BridgingError(no_neighbour)
        instants[step] = instants[before].interpolate(
            instants[after], (step - before) / (after - before),
        )
    warnings = []
    if bridged:
        warnings.append(translate("generator interpolated across {} singular step(s)").format(len(bridged)))
    return instants, warnings


def propagate_rho(  # pylint: disable=too-many-locals
        rho0: DensityMatrix,
        coefficients: MECoefficients,
        *,
        cutoff_population: float | None = None,
        progress: "Callable[[], None] | None" = None,
) -> RhoSeries:
    """RK4 over the coefficient grid with Hermitisation after every step."""
    if cutoff_population is None:
        cutoff_population = ExactMEConfig().solver.CutoffPopulation.get_float()
    basis = rho0.basis
    statistics = coefficients.statistics
    basis.check_levels(coefficients.dimension, statistics)
    instants, warnings = bridge_singular(coefficients)
    grid = coefficients.grid
    dt = grid.dt
    count = len(instants)
    half_steps = [_bridged_half_step(coefficients, instants, step) for step in range(count - 1)]

    def derivative(matrix: "ComplexArray", instant: CoefficientsAt) -> "ComplexArray":
        return generator_apply(DensityMatrix(basis=basis, matrix=matrix), instant, statistics)

    states = np.zeros((count, basis.dimension, basis.dimension), dtype=np.complex128)
    states[0] = hermitize(rho0.matrix)
    initial_trace = float(np.trace(states[0]).real)
    trace_drift = 0.0
    min_eigenvalue = float(np.linalg.eigvalsh(states[0])[0])
    for step in range(count - 1):
        current = states[step]
        middle = half_steps[step]
        first = derivative(current, instants[step])
        second = derivative(current + dt / 2 * first, middle)
        third = derivative(current + dt / 2 * second, middle)
        fourth = derivative(current + dt * third, instants[step + 1])
        following = hermitize(current + dt / 6 * (first + 2 * second + 2 * third + fourth))
        states[step + 1] = following
        trace_drift = max(trace_drift, abs(float(np.trace(following).real) - initial_trace))
        min_eigenvalue = min(min_eigenvalue, float(np.linalg.eigvalsh(following)[0]))
        if statistics is Statistics.BOSON:
            top = float(following[-1, -1].real)
            if top > cutoff_population:
                overflow = translate(
                    "population {:.3e} of the top Fock level at t = {} exceeds {:.1e}, raise the cutoff",
                ).format(top, grid.times[step + 1], cutoff_population)
                raise CutoffOverflowError(overflow, population=top)
        if progress:
            progress()
    logger.debug("rho propagated, trace drift {:.3e}, min eigenvalue {:.3e}", trace_drift, min_eigenvalue)
    return RhoSeries(
        times=grid.times,
        basis=basis,
        states=states,
        trace_drift=trace_drift,
        min_eigenvalue=min_eigenvalue,
        warnings=warnings,
    )


def _bridged_half_step(
        coefficients: MECoefficients, instants: "Sequence[CoefficientsAt]", step: int,
) -> CoefficientsAt:
    last = len(instants) - 1
    neighbours = range(max(step - 1, 0), min(step + 2, last) + 1)
    if all(not coefficients.singular[index] for index in neighbours):
        return coefficients.half_step(step)
    return instants[step].interpolate(instants[step + 1], 0.5)


def occupation(gf: "GreenFunctions", initial: "npt.ArrayLike") -> "ComplexArray":
    """<a_i^+ a_j>(t) for every step, with `initial` given in the same convention."""
    v_diag = gf.require_v()
    initial_matrix = np.atleast_2d(np.asarray(initial, dtype=np.complex128))
    if initial_matrix.shape != gf.u.shape[1:]:
        wrong_shape = translate("initial occupation has shape {}, expected {}").format(
            initial_matrix.shape, gf.u.shape[1:],
        )
        raise InvalidInputError(wrong_shape)
    u_dagger = np.conj(np.swapaxes(gf.u, 1, 2))
    transported = gf.u @ initial_matrix.T @ u_dagger + v_diag
    return np.swapaxes(transported, 1, 2)
