"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy import optimize, special

from .core import DataType
from .exceptions import DomainError, InvalidInputError, PoleError
from .i18n import translate
from .logging import create_logger
from .quadrature import MAX_PHASE_PER_PANEL, CompositeRule, adaptive_rule, fourier_at
from .spectral import TWO_PI

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from typing import Final

    import numpy.typing as npt

    from .spectral import SpectralDensity, SystemSpec


logger = create_logger("resolvent")


SEARCH_MARGIN: "Final" = 20.0
EDGE_OFFSET: "Final" = 1e-9
EDGE_WARNING_DISTANCE: "Final" = 1e-6
ROOT_TOLERANCE: "Final" = 1e-14
DERIVATIVE_STEP: "Final" = 1e-5
MIN_RESIDUE: "Final" = 1e-6
SPECTRUM_TOLERANCE: "Final" = 1e-8
MIN_INITIAL_PANELS: "Final" = 64


class BoundState(DataType):
    energy: float
    residue: float
    warning: str | None = None


def _require_scalar(system: "SystemSpec") -> None:
    if not system.is_scalar:
        not_scalar = translate("only single-level systems are supported here, got {} levels").format(
            system.dimension,
        )
        raise InvalidInputError(not_scalar)


def pole_function(system: "SystemSpec", energy: float) -> float:
    """eps - eps_s - Delta(eps), increasing off the spectral support."""
    return energy - system.level - system.total_density.lamb_shift(energy)


def _edge_value_point(density: "SpectralDensity", edge: float, direction: float) -> float:
    if float(density(edge)) == 0:
        return edge
    return edge + direction * EDGE_OFFSET * max(density.coupling_scale, abs(edge), 1.0)


def _search_intervals(system: "SystemSpec") -> list[tuple[float, float]]:
    density = system.total_density
    support = density.support
    scale = max(density.coupling_scale, 1.0)
    lower_edge = _edge_value_point(density, support[0][0], -1)
    lowest = min(support[0][0], system.level) - SEARCH_MARGIN * scale
    while pole_function(system, lowest) >= 0:
        lowest -= 2 * (lower_edge - lowest)
    upper_edge = _edge_value_point(density, support[-1][1], +1)
    highest = max(support[-1][1], system.level) + SEARCH_MARGIN * scale
    while pole_function(system, highest) <= 0:
        highest += 2 * (highest - upper_edge)
    intervals = [(lowest, lower_edge)]
    for (_lower, gap_start), (gap_end, _upper) in zip(support[:-1], support[1:], strict=True):
        intervals.append((
            _edge_value_point(density, gap_start, +1),
            _edge_value_point(density, gap_end, -1),
        ))
    intervals.append((upper_edge, highest))
    return intervals


def _residue(system: "SystemSpec", energy: float, edge_distance: float) -> float:
    density = system.total_density
    step = min(DERIVATIVE_STEP, edge_distance / 2)
    slope = (density.lamb_shift(energy + step) - density.lamb_shift(energy - step)) / (2 * step)
    return 1 / (1 - slope)


def find_bound_states(system: "SystemSpec") -> list[BoundState]:
    """Real roots of eps - eps_s - Delta(eps) outside the support with residues 1/(1 - Delta'(eps))."""
    _require_scalar(system)
    density = system.total_density
    if density.is_zero:
        return [BoundState(energy=system.level, residue=1.0)]

    edges = [point for interval in density.support for point in interval]
    result = []
    for lower, upper in _search_intervals(system):
        if upper <= lower:
            continue
        lower_value = pole_function(system, lower)
        upper_value = pole_function(system, upper)
        if not lower_value < 0 < upper_value:
            continue
        energy = float(optimize.brentq(
            lambda eps: pole_function(system, eps), lower, upper, xtol=ROOT_TOLERANCE,
        ))
        edge_distance = min(abs(energy - edge) for edge in edges)
        warning = None
        if edge_distance < EDGE_WARNING_DISTANCE:
            warning = translate(
                "bound state at {} lies within {:.1e} of a band edge and is unreliable",
            ).format(energy, edge_distance)
        residue = _residue(system, energy, edge_distance) if edge_distance > 0 else 0.0
        if residue < MIN_RESIDUE:
            logger.debug(
                "dropping pole at {} with residue {:.3e}, indistinguishable from the continuum",
                energy, residue,
            )
            continue
        logger.debug("bound state at {:.12g}, residue {:.12g}", energy, residue)
        result.append(BoundState(energy=energy, residue=residue, warning=warning))
    return result


def dissipation_spectrum(system: "SystemSpec", energy: float) -> float:
    _require_scalar(system)
    density = system.total_density
    value = float(density(energy))
    if value == 0:
        return 0.0
    try:
        shift = density.lamb_shift(energy)
    except DomainError:
        # log-divergent shift at a band edge where J > 0, the spectrum vanishes there
        return 0.0
    detuning = energy - system.level - shift
    return (value / TWO_PI) / (detuning ** 2 + (value / 2) ** 2)


def _spectrum_breakpoints(system: "SystemSpec") -> list[float]:
    density = system.total_density
    points = list(density.breakpoints)
    level = system.level
    points.append(level)
    if density.contains(np.array([level]))[0]:
        try:
            center = level + density.lamb_shift(level)
        except DomainError:
            center = level
        half_width = max(float(density(level)) / 2, EDGE_OFFSET)
        for widths in (0, 1, 4, 16):
            points.extend([center - widths * half_width, center + widths * half_width])
    return points


def spectral_rule(
        system: "SystemSpec",
        func: "Callable[[float], float]",
        *,
        horizon: float = 0.0,
        tolerance: float = SPECTRUM_TOLERANCE,
) -> tuple[CompositeRule, "npt.NDArray[np.float64]"]:
    """
    Adaptive rule over the support for a spectrum, resolving exp(-i eps t) up to `horizon`.

    Returns the rule with the spectrum at its nodes; every energy is evaluated once.
    """
    density = system.total_density
    if density.is_zero:
        return CompositeRule.empty(), np.zeros(0)
    evaluated: dict[float, float] = {}

    def memoized(energy: float) -> float:
        if energy not in evaluated:
            evaluated[energy] = func(energy)
        return evaluated[energy]

    span = density.supremum - density.infimum
    max_width = span / MIN_INITIAL_PANELS
    if horizon > 0:
        max_width = min(max_width, MAX_PHASE_PER_PANEL / horizon)
    rule = adaptive_rule(
        np.vectorize(memoized, otypes=[np.float64]),
        density.support,
        breakpoints=_spectrum_breakpoints(system),
        max_width=max_width,
        tolerance=tolerance,
    )
    return rule, np.array([memoized(float(energy)) for energy in rule.nodes])


def dissipation_weight(system: "SystemSpec") -> float:
    rule, values = spectral_rule(system, lambda eps: dissipation_spectrum(system, eps))
    return float(rule.integrate(values)) if len(rule) else 0.0


def sum_rule(system: "SystemSpec", bound_states: "Sequence[BoundState] | None" = None) -> float:
    """Total bound-state residue plus continuum weight, 1 for an exact propagator."""
    if bound_states is None:
        bound_states = find_bound_states(system)
    continuum = 0.0 if system.total_density.is_zero else dissipation_weight(system)
    return sum(state.residue for state in bound_states) + continuum


def reconstruct_u(
        system: "SystemSpec",
        times: "npt.ArrayLike",
        bound_states: "Sequence[BoundState] | None" = None,
) -> "npt.NDArray[np.complex128]":
    """u(t) = sum_b Z_b exp(-i eps_b t) + int D_d(eps) exp(-i eps t) deps."""
    _require_scalar(system)
    times_array = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if bound_states is None:
        bound_states = find_bound_states(system)
    result = np.zeros(len(times_array), dtype=np.complex128)
    for state in bound_states:
        result += state.residue * np.exp(-1j * state.energy * times_array)
    if system.total_density.is_zero:
        return result
    horizon = float(np.max(np.abs(times_array), initial=0.0))
    rule, values = spectral_rule(
        system, lambda eps: dissipation_spectrum(system, eps), horizon=horizon,
    )
    result += fourier_at(rule.nodes, rule.weights * values, times_array)
    return result


def bound_spectrum(
        system: "SystemSpec",
        energy: float,
        time: float,
        bound_states: "Sequence[BoundState]",
) -> float:
    """Bound-state part of the fluctuation spectrum at steady time `time`."""
    for state in bound_states:
        if energy == state.energy:
            at_pole = translate("fluctuation spectrum has a pole at the bound state {}").format(energy)
            raise PoleError(at_pole)
    value = float(system.total_density(energy))
    if value == 0:
        return 0.0
    total = 0.0
    for first in bound_states:
        for second in bound_states:
            total += (
                first.residue * second.residue
                * math.cos((first.energy - second.energy) * time)
                / ((energy - first.energy) * (energy - second.energy))
            )
    return value / TWO_PI * total


def steady_fluctuation_spectrum(
        system: "SystemSpec",
        energy: float,
        time: float,
        bound_states: "Sequence[BoundState] | None" = None,
) -> float:
    """chi(eps) = [D_b(eps, t) + D_d(eps)] f(eps), with f the J-weighted reservoir occupation."""
    _require_scalar(system)
    if bound_states is None:
        bound_states = find_bound_states(system)
    if system.total_density.is_zero:
        return 0.0
    bound = bound_spectrum(system, energy, time, bound_states)
    occupation = float(system.effective_distribution(energy))
    if occupation == 0:
        return 0.0
    return (bound + dissipation_spectrum(system, energy)) * occupation


def fluctuation_weight(
        system: "SystemSpec",
        time: float,
        bound_states: "Sequence[BoundState] | None" = None,
) -> float:
    """Integral of the fluctuation spectrum, the steady-state v(t, t)."""
    _require_scalar(system)
    if system.total_density.is_zero:
        return 0.0
    if bound_states is None:
        bound_states = find_bound_states(system)

    def spectrum(eps: float) -> float:
        return steady_fluctuation_spectrum(system, eps, time, bound_states)

    rule, values = spectral_rule(system, spectrum)
    return float(rule.integrate(values)) if len(rule) else 0.0


def steady_occupation(
        system: "SystemSpec",
        initial_occupation: float,
        time: float,
        bound_states: "Sequence[BoundState] | None" = None,
) -> float:
    """|sum_b Z_b exp(-i eps_b t)|^2 n0 + int chi, the long-time particle number."""
    if bound_states is None:
        bound_states = find_bound_states(system)
    if system.total_density.is_zero:
        return initial_occupation
    amplitude = sum(
        (state.residue * np.exp(-1j * state.energy * time) for state in bound_states),
        0j,
    )
    return float(abs(amplitude) ** 2 * initial_occupation) + fluctuation_weight(
        system, time, bound_states,
    )


def critical_coupling(exponent: float, cutoff: float, level: float) -> float:
    """Ohmic-family coupling above which a bound state splits off below the band."""
    return level / (cutoff * float(special.gamma(exponent)))
