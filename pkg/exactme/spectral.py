"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import math
from abc import ABCMeta, abstractmethod
from typing import TYPE_CHECKING

import numpy as np
from scipy import integrate, optimize, special

from .config import ExactMEConfig
from .core import DataType, Statistics, as_matrix, is_hermitian
from .exceptions import DomainError, InvalidInputError, NumericalFailureError
from .i18n import translate
from .logging import create_logger

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Final

    import numpy.typing as npt

    Interval = tuple[float, float]


logger = create_logger("spectral")


TWO_PI: "Final" = 2 * math.pi
TRUNCATION_RATIO: "Final" = 1e-12
LORENTZIAN_TAIL_WIDTHS: "Final" = 1e3
LAMB_SHIFT_TARGET: "Final" = 1e-6
LAMB_SHIFT_QUAD_TOLERANCE: "Final" = 1e-10
# |eps| / cutoff below which the ohmic Lamb shift comes from its series:
NEAR_EDGE_RATIO: "Final" = 0.5
NEAR_EDGE_TERMS: "Final" = 40
INTEGER_EXPONENT_TOLERANCE: "Final" = 1e-9


def _as_energies(energy: "npt.ArrayLike") -> "npt.NDArray[np.float64]":
    energies = np.asarray(energy, dtype=np.float64)
    if not np.all(np.isfinite(energies)):
        not_finite = translate("energy must be finite, got {}").format(energy)
        raise InvalidInputError(not_finite)
    return energies


def _scalar_or_array(
        value: "npt.NDArray[np.float64]", like: "npt.ArrayLike",
) -> "float | npt.NDArray[np.float64]":
    if np.ndim(like) == 0:
        return float(value)
    return value


def merge_intervals(intervals: "Sequence[Interval]") -> list["Interval"]:
    merged: list[Interval] = []
    for lower, upper in sorted(intervals):
        if merged and lower <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], upper))
        else:
            merged.append((lower, upper))
    return merged


class SpectralDensity(metaclass=ABCMeta):
    """Reservoir spectral density J(eps), zero outside `support`."""

    kind: str

    @property
    @abstractmethod
    def support(self) -> list["Interval"]:
        pass

    @property
    @abstractmethod
    def coupling_scale(self) -> float:
        """Energy setting the size of the Lamb shift, used for tolerances and search margins."""

    @property
    @abstractmethod
    def peak(self) -> float:
        pass

    @abstractmethod
    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        pass

    @property
    def breakpoints(self) -> list[float]:
        return [point for interval in self.support for point in interval]

    @property
    def energy_scale(self) -> float:
        """Fastest energy scale of the density, used for time-step checks."""
        return self.supremum - self.infimum if self.support else 0.0

    @property
    def is_zero(self) -> bool:
        return not self.support

    @property
    def infimum(self) -> float:
        return self.support[0][0] if self.support else math.inf

    @property
    def supremum(self) -> float:
        return self.support[-1][1] if self.support else -math.inf

    def __call__(self, energy: "npt.ArrayLike") -> "float | npt.NDArray[np.float64]":
        energies = _as_energies(energy)
        values = np.zeros(np.shape(energies), dtype=np.float64)
        inside = self.contains(energies)
        if np.any(inside):
            values[inside] = self._values(energies[inside])
        return _scalar_or_array(values, energy)

    def contains(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.bool_]":
        inside = np.zeros(np.shape(energies), dtype=bool)
        for lower, upper in self.support:
            inside |= (energies >= lower) & (energies <= upper)
        return inside

    def total_weight(self) -> float:
        """(1/2pi) integral of J, the equal-time memory kernel."""
        total = 0.0
        for lower, upper in self.support:
            points = [point for point in self.breakpoints if lower < point < upper]
            value, _error = integrate.quad(
                lambda energy: float(self(energy)), lower, upper,
                points=points or None, limit=lamb_shift_limit(),
            )
            total += value
        return total / TWO_PI

    def lamb_shift(self, energy: float) -> float:
        return principal_value(self, energy)


class ZeroDensity(SpectralDensity):

    kind = "none"

    @property
    def support(self) -> list["Interval"]:
        return []

    @property
    def coupling_scale(self) -> float:
        return 0.0

    @property
    def peak(self) -> float:
        return 0.0

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        return np.zeros_like(energies)

    def lamb_shift(self, energy: float) -> float:
        _as_energies(energy)
        return 0.0


class OhmicDensity(SpectralDensity):
    """J = 2 pi eta eps (eps/cutoff)^(s-1) exp(-eps/cutoff), truncated where it falls below 1e-12 of its peak."""

    kind = "ohmic"

    def __init__(self, coupling: float, exponent: float, cutoff: float) -> None:
        if coupling < 0 or exponent <= 0 or cutoff <= 0:
            bad_parameters = translate(
                "ohmic density needs eta >= 0, s > 0 and cutoff > 0, got {}, {}, {}",
            ).format(coupling, exponent, cutoff)
            raise InvalidInputError(bad_parameters)
        self.coupling = coupling
        self.exponent = exponent
        self.cutoff = cutoff
        self.upper_edge = self._truncation_energy()

    def __repr__(self) -> str:
        return f"OhmicDensity(eta={self.coupling}, s={self.exponent}, cutoff={self.cutoff})"

    def _log_value(self, energy: float) -> float:
        return (
            math.log(TWO_PI * self.coupling)
            + self.exponent * math.log(energy)
            - (self.exponent - 1) * math.log(self.cutoff)
            - energy / self.cutoff
        )

    def _truncation_energy(self) -> float:
        if self.coupling == 0:
            return 0.0
        peak_energy = self.exponent * self.cutoff
        threshold = math.log(TRUNCATION_RATIO * self.peak)
        upper = 2 * peak_energy + self.cutoff
        while self._log_value(upper) > threshold:
            upper *= 2
        return float(optimize.brentq(
            lambda energy: self._log_value(energy) - threshold, peak_energy, upper,
        ))

    @property
    def support(self) -> list["Interval"]:
        if self.coupling == 0:
            return []
        return [(0.0, self.upper_edge)]

    @property
    def breakpoints(self) -> list[float]:
        if self.coupling == 0:
            return []
        peak_energy = self.exponent * self.cutoff
        return [0.0, self.cutoff, peak_energy, self.upper_edge]

    @property
    def coupling_scale(self) -> float:
        return self.coupling * self.cutoff

    @property
    def peak(self) -> float:
        return (
            TWO_PI * self.coupling * self.cutoff
            * self.exponent ** self.exponent * math.exp(-self.exponent)
        )

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        return (
            TWO_PI * self.coupling * self.cutoff
            * np.power(energies / self.cutoff, self.exponent)
            * np.exp(-energies / self.cutoff)
        )

    def fourier_transform(self, tau: "npt.ArrayLike") -> "npt.NDArray[np.complex128]":
        """Closed form of (1/2pi) int J exp(-i eps tau) over the untruncated half line."""
        taus = np.asarray(tau, dtype=np.float64)
        return (
            self.coupling * self.cutoff ** 2 * special.gamma(self.exponent + 1)
            * np.power(1 + 1j * self.cutoff * taus, -(self.exponent + 1))
        )

    @property
    def energy_scale(self) -> float:
        return self.cutoff

    def lamb_shift_at_zero(self) -> float:
        return -self.coupling * self.cutoff * float(special.gamma(self.exponent))

    def near_edge_lamb_shift(self, energy: float) -> float:
        """
        Lamb shift of the untruncated density from its small-|eps| expansion.

        With y = eps/cutoff the shift is -eta cutoff G(y), G(y) = P int x^s e^-x / (x - y) dx.
        Integer s goes through the exponential integral, other s through the series of
        the incomplete gamma function plus its branch term c |y|^s.
        """
        ratio = energy / self.cutoff
        exponent = self.exponent
        nearest = round(exponent)
        if nearest >= 1 and abs(exponent - nearest) < INTEGER_EXPONENT_TOLERANCE:
            transform = sum(ratio ** power * math.gamma(nearest - power) for power in range(nearest))
            if ratio != 0:
                transform -= ratio ** nearest * math.exp(-ratio) * float(special.expi(ratio))
        else:
            series = sum(
                ratio ** power / (math.factorial(power) * (power - exponent))
                for power in range(NEAR_EDGE_TERMS)
            )
            bracket = math.gamma(exponent + 1) * series
            if ratio > 0:
                bracket += math.pi / math.tan(math.pi * exponent) * ratio ** exponent
            elif ratio < 0:
                bracket += math.pi / math.sin(math.pi * exponent) * (-ratio) ** exponent
            transform = -math.exp(-ratio) * bracket
        return -self.coupling * self.cutoff * transform

    def lamb_shift(self, energy: float) -> float:
        _as_energies(energy)
        if self.coupling == 0:
            return 0.0
        # quadrature of the |eps|^s cusp at the edge stalls for s < 1
        if abs(energy) <= NEAR_EDGE_RATIO * self.cutoff:
            return self.near_edge_lamb_shift(float(energy))
        return principal_value(self, energy)


class LorentzianDensity(SpectralDensity):

    kind = "lorentzian"

    def __init__(self, coupling: float, center: float, width: float) -> None:
        if coupling < 0 or width <= 0:
            bad_parameters = translate(
                "lorentzian density needs eta >= 0 and width > 0, got {}, {}",
            ).format(coupling, width)
            raise InvalidInputError(bad_parameters)
        self.coupling = coupling
        self.center = center
        self.width = width

    def __repr__(self) -> str:
        return f"LorentzianDensity(eta={self.coupling}, center={self.center}, width={self.width})"

    @property
    def support(self) -> list["Interval"]:
        if self.coupling == 0:
            return []
        tail = LORENTZIAN_TAIL_WIDTHS * self.width
        return [(self.center - tail, self.center + tail)]

    @property
    def breakpoints(self) -> list[float]:
        if self.coupling == 0:
            return []
        lower, upper = self.support[0]
        return [lower, *(
            self.center + widths * self.width for widths in (-10, -1, 0, 1, 10)
        ), upper]

    @property
    def coupling_scale(self) -> float:
        return self.coupling * self.width / 2

    @property
    def peak(self) -> float:
        return self.coupling

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        return self.coupling * self.width ** 2 / ((energies - self.center) ** 2 + self.width ** 2)

    @property
    def energy_scale(self) -> float:
        return self.width

    def untruncated_lamb_shift(self, energy: float) -> float:
        detuning = energy - self.center
        return self.coupling * self.width * detuning / (2 * (detuning ** 2 + self.width ** 2))


class FlatBandDensity(SpectralDensity):

    kind = "flat"

    def __init__(self, rate: float, lower: float, upper: float) -> None:
        if rate < 0 or upper <= lower:
            bad_parameters = translate(
                "flat band needs kappa >= 0 and lower < upper, got {}, [{}, {}]",
            ).format(rate, lower, upper)
            raise InvalidInputError(bad_parameters)
        self.rate = rate
        self.lower = lower
        self.upper = upper

    def __repr__(self) -> str:
        return f"FlatBandDensity(kappa={self.rate}, lower={self.lower}, upper={self.upper})"

    @property
    def support(self) -> list["Interval"]:
        if self.rate == 0:
            return []
        return [(self.lower, self.upper)]

    @property
    def coupling_scale(self) -> float:
        return self.rate

    @property
    def peak(self) -> float:
        return self.rate

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        return np.full_like(energies, self.rate)

    def lamb_shift(self, energy: float) -> float:
        _as_energies(energy)
        if self.rate == 0:
            return 0.0
        if energy in (self.lower, self.upper):
            at_edge = translate("Lamb shift diverges at the band edge {}").format(energy)
            raise DomainError(at_edge)
        return self.rate / TWO_PI * math.log(abs((energy - self.lower) / (energy - self.upper)))


class TabulatedDensity(SpectralDensity):
    """Piecewise-linear J through (energy, value) samples; zero outside the first and last sample."""

    kind = "tabulated"

    def __init__(self, energies: "npt.ArrayLike", values: "npt.ArrayLike") -> None:
        self.energies = np.asarray(energies, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if (
                self.energies.ndim != 1
                or self.energies.shape != self.values.shape
                or len(self.energies) < 2  # noqa: PLR2004
        ):
            bad_shape = translate("tabulated density needs two equally long lists of at least 2 samples")
            raise InvalidInputError(bad_shape)
        if np.any(np.diff(self.energies) <= 0):
            not_increasing = translate("tabulated energies must be strictly increasing")
            raise InvalidInputError(not_increasing)
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            negative = translate("tabulated values must be finite and non-negative")
            raise InvalidInputError(negative)

    def __repr__(self) -> str:
        return f"TabulatedDensity({len(self.energies)} samples)"

    @property
    def support(self) -> list["Interval"]:
        intervals: list[Interval] = []
        for index in range(len(self.energies) - 1):
            if self.values[index] > 0 or self.values[index + 1] > 0:
                intervals.append((float(self.energies[index]), float(self.energies[index + 1])))
        return merge_intervals(intervals)

    @property
    def breakpoints(self) -> list[float]:
        return self.energies.tolist()

    @property
    def coupling_scale(self) -> float:
        return self.peak

    @property
    def peak(self) -> float:
        return float(np.max(self.values))

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        return np.interp(energies, self.energies, self.values, left=0.0, right=0.0)


class CompositeDensity(SpectralDensity):
    """Weighted sum of densities; also used for gapped bands made of disjoint pieces."""

    kind = "composite"

    def __init__(self, components: "Sequence[tuple[float, SpectralDensity]]") -> None:
        self.components = [
            (weight, density) for weight, density in components
            if weight != 0 and not density.is_zero
        ]
        if any(weight < 0 for weight, _density in self.components):
            negative = translate("composite weights must be non-negative")
            raise InvalidInputError(negative)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.components!r})"

    @property
    def support(self) -> list["Interval"]:
        return merge_intervals([
            interval for _weight, density in self.components for interval in density.support
        ])

    @property
    def breakpoints(self) -> list[float]:
        return sorted({
            point for _weight, density in self.components for point in density.breakpoints
        })

    @property
    def coupling_scale(self) -> float:
        return max(
            (weight * density.coupling_scale for weight, density in self.components),
            default=0.0,
        )

    @property
    def energy_scale(self) -> float:
        return max((density.energy_scale for _weight, density in self.components), default=0.0)

    @property
    def peak(self) -> float:
        return max((weight * density.peak for weight, density in self.components), default=0.0)

    def _values(self, energies: "npt.NDArray[np.float64]") -> "npt.NDArray[np.float64]":
        result = np.zeros_like(energies)
        for weight, density in self.components:
            result += weight * np.asarray(density(energies))
        return result

    def lamb_shift(self, energy: float) -> float:
        _as_energies(energy)
        return sum(
            (weight * density.lamb_shift(energy) for weight, density in self.components),
            0.0,
        )


class GappedBandDensity(CompositeDensity):

    kind = "gapped"

    def __init__(self, bands: "Sequence[FlatBandDensity | TabulatedDensity]") -> None:
        super().__init__([(1.0, band) for band in bands])
        supports = sorted(
            interval for _weight, band in self.components for interval in band.support
        )
        for (_lower, upper), (next_lower, _next_upper) in zip(supports[:-1], supports[1:], strict=True):
            if next_lower <= upper:
                overlapping = translate("gapped bands must be disjoint, [..., {}] overlaps [{}, ...]").format(
                    upper, next_lower,
                )
                raise InvalidInputError(overlapping)


def lamb_shift_limit() -> int:
    return ExactMEConfig().solver.LambShiftLimit.get_int()


def _quad(
        func: "object", lower: float, upper: float, points: list[float], tolerance: float,
) -> tuple[float, float]:
    inner = [point for point in points if lower < point < upper]
    result = integrate.quad(
        func, lower, upper,  # type: ignore[arg-type]
        points=inner or None,
        epsabs=tolerance, epsrel=LAMB_SHIFT_QUAD_TOLERANCE,
        limit=lamb_shift_limit(), full_output=1,
    )
    return float(result[0]), float(result[1])


def principal_value(density: SpectralDensity, energy: float) -> float:
    """
    P int deps'/2pi J(eps')/(eps - eps').

    Inside a support interval the integrand is folded symmetrically about the pole,
    [J(eps-x) - J(eps+x)]/x, which is regular at x = 0; the rest is ordinary quadrature.
    """
    _as_energies(energy)
    if density.is_zero:
        return 0.0
    scale = density.coupling_scale
    tolerance = LAMB_SHIFT_QUAD_TOLERANCE * scale
    points = density.breakpoints

    def plain(eps: float) -> float:
        return float(density(eps)) / (energy - eps)

    def folded(offset: float) -> float:
        return (float(density(energy - offset)) - float(density(energy + offset))) / offset

    total = 0.0
    error = 0.0
    for lower, upper in density.support:
        if lower < energy < upper:
            half = min(energy - lower, upper - energy)
            folded_points = [abs(point - energy) for point in points]
            value, value_error = _quad(folded, 0.0, half, folded_points, tolerance)
            total += value
            error += value_error
            if energy - lower > half:
                value, value_error = _quad(plain, lower, energy - half, points, tolerance)
            else:
                value, value_error = _quad(plain, energy + half, upper, points, tolerance)
            total += value
            error += value_error
            continue
        if energy in (lower, upper) and float(density(energy)) > 0:
            at_edge = translate("Lamb shift diverges at the band edge {}").format(energy)
            raise DomainError(at_edge)
        value, value_error = _quad(plain, lower, upper, points, tolerance)
        total += value
        error += value_error

    if error > LAMB_SHIFT_TARGET * max(scale, abs(total)):
        not_converged = translate(
            "principal value at {} did not converge, error estimate {:.3e}",
        ).format(energy, error)
        raise NumericalFailureError(not_converged, estimate=error / TWO_PI)
    return total / TWO_PI


def evaluate_j(density: SpectralDensity, energy: float) -> float:
    return float(density(energy))


def lamb_shift(density: SpectralDensity, energy: float) -> float:
    return density.lamb_shift(energy)


def self_energy(density: SpectralDensity, energy: float) -> complex:
    """Retarded self-energy Delta(eps) - i J(eps)/2."""
    return complex(density.lamb_shift(energy), -float(density(energy)) / 2)


class Reservoir(DataType):
    statistics: Statistics
    temperature: float
    chemical_potential: float
    density: SpectralDensity
    weight: "npt.NDArray[np.complex128]"

    def __init__(  # pylint: disable=too-many-arguments
            self,
            *,
            statistics: Statistics,
            density: SpectralDensity,
            temperature: float = 0.0,
            chemical_potential: float = 0.0,
            weight: "npt.ArrayLike" = 1.0,
    ) -> None:
        super().__init__(
            statistics=statistics,
            temperature=float(temperature),
            chemical_potential=float(chemical_potential),
            density=density,
            weight=as_matrix(weight),
        )
        if not math.isfinite(self.temperature) or self.temperature < 0:
            negative_temperature = translate("temperature must be >= 0, got {}").format(temperature)
            raise InvalidInputError(negative_temperature)
        if not is_hermitian(self.weight):
            not_hermitian = translate("reservoir coupling weights must be Hermitian")
            raise InvalidInputError(not_hermitian)
        if statistics is Statistics.BOSON and not density.is_zero:
            edge = density.infimum
            edge_allowed = float(density(edge)) == 0
            if self.chemical_potential > edge or (
                    self.chemical_potential == edge and not edge_allowed
            ):
                condensation = translate(
                    "boson chemical potential {} must lie below the spectral support starting at {}",
                ).format(self.chemical_potential, edge)
                raise InvalidInputError(condensation)

    @property
    def thermal_breakpoints(self) -> list[float]:
        points = self.density.breakpoints
        if self.statistics is Statistics.FERMION:
            points = sorted({*points, self.chemical_potential})
        return points

    def distribution(self, energy: "npt.ArrayLike") -> "float | npt.NDArray[np.float64]":
        return distribution(self, energy)

    def thermal_weight(self, energy: "npt.ArrayLike") -> "float | npt.NDArray[np.float64]":
        """J f, set to 0 wherever J vanishes (so bosons are never evaluated below mu)."""
        energies = _as_energies(energy)
        values = np.atleast_1d(np.asarray(self.density(energies), dtype=np.float64))
        flat = np.atleast_1d(energies)
        result = np.zeros_like(values)
        positive = values > 0
        if np.any(positive):
            result[positive] = values[positive] * np.asarray(
                distribution(self, flat[positive]),
            )
        return _scalar_or_array(result.reshape(np.shape(energies)), energy)


def distribution(reservoir: Reservoir, energy: "npt.ArrayLike") -> "float | npt.NDArray[np.float64]":
    energies = _as_energies(energy)
    detuning = energies - reservoir.chemical_potential
    temperature = reservoir.temperature
    if reservoir.statistics is Statistics.BOSON:
        if np.any(detuning <= 0):
            below_mu = translate(
                "Bose-Einstein occupation is undefined at eps <= mu = {}",
            ).format(reservoir.chemical_potential)
            raise DomainError(below_mu)
        if temperature == 0:
            result = np.zeros_like(detuning)
        else:
            result = 1 / np.expm1(detuning / temperature)
    elif temperature == 0:
        result = np.where(detuning < 0, 1.0, np.where(detuning == 0, 0.5, 0.0))
    else:
        result = special.expit(-detuning / temperature)
    return _scalar_or_array(np.asarray(result, dtype=np.float64), energy)


class SystemSpec(DataType):
    statistics: Statistics
    energy: "npt.NDArray[np.complex128]"
    reservoirs: list[Reservoir]

    def __init__(
            self,
            *,
            statistics: Statistics,
            energy: "npt.ArrayLike",
            reservoirs: "Sequence[Reservoir]" = (),
    ) -> None:
        super().__init__(
            statistics=statistics,
            energy=as_matrix(energy),
            reservoirs=list(reservoirs),
        )
        if not np.all(np.isfinite(self.energy)):
            not_finite = translate("system energies must be finite")
            raise InvalidInputError(not_finite)
        if not is_hermitian(self.energy):
            not_hermitian = translate("system energy matrix must be Hermitian")
            raise InvalidInputError(not_hermitian)
        for reservoir in self.reservoirs:
            if reservoir.statistics is not statistics:
                mixed = translate("every reservoir must share the system statistics ({})").format(
                    statistics.name.lower(),
                )
                raise InvalidInputError(mixed)
            if reservoir.weight.shape == (1, 1) and self.dimension > 1:
                reservoir.weight = reservoir.weight[0, 0] * np.eye(self.dimension, dtype=np.complex128)
            if reservoir.weight.shape != self.energy.shape:
                wrong_shape = translate("reservoir weights have shape {}, expected {}").format(
                    reservoir.weight.shape, self.energy.shape,
                )
                raise InvalidInputError(wrong_shape)

    @property
    def dimension(self) -> int:
        return int(self.energy.shape[0])

    @property
    def is_scalar(self) -> bool:
        return self.dimension == 1

    @property
    def level(self) -> float:
        return float(self.energy[0, 0].real)

    @property
    def is_decoupled(self) -> bool:
        return all(
            reservoir.density.is_zero or not np.any(reservoir.weight)
            for reservoir in self.reservoirs
        )

    def scalar_weight(self, reservoir: Reservoir) -> float:
        return float(reservoir.weight[0, 0].real)

    @property
    def total_density(self) -> SpectralDensity:
        """Sum of the reservoir densities weighted by the [0, 0] coupling weight."""
        components = [
            (self.scalar_weight(reservoir), reservoir.density) for reservoir in self.reservoirs
        ]
        components = [(weight, density) for weight, density in components if weight and not density.is_zero]
        if not components:
            return ZeroDensity()
        if len(components) == 1 and components[0][0] == 1:
            return components[0][1]
        return CompositeDensity(components)

    def effective_distribution(self, energy: "npt.ArrayLike") -> "float | npt.NDArray[np.float64]":
        """sum w J_a f_a / sum w J_a, the occupation seen by a scalar level."""
        energies = _as_energies(energy)
        numerator = np.zeros(np.shape(energies))
        denominator = np.zeros(np.shape(energies))
        for reservoir in self.reservoirs:
            weight = self.scalar_weight(reservoir)
            if not weight:
                continue
            numerator += weight * np.asarray(reservoir.thermal_weight(energies))
            denominator += weight * np.asarray(reservoir.density(energies))
        result = np.divide(
            numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0,
        )
        return _scalar_or_array(result, energy)

    @property
    def energy_scale(self) -> float:
        """Fastest energy scale of the problem, for time-step checks."""
        scales = [float(np.max(np.abs(np.linalg.eigvalsh(self.energy))))]
        scales.extend(reservoir.density.energy_scale for reservoir in self.reservoirs)
        return max(scales)
