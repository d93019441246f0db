"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import math
from typing import TYPE_CHECKING

import numpy as np

from .core import DataType, Statistics
from .exceptions import BMUndefinedError, InvalidInputError, PreconditionError
from .i18n import translate
from .logging import create_logger
from .mastereq import occupation

if TYPE_CHECKING:
    from collections.abc import Sequence
    from typing import Final

    import numpy.typing as npt

    from .greens import GreenFunctions
    from .spectral import SystemSpec

    ComplexArray = npt.NDArray[np.complex128]
    FloatArray = npt.NDArray[np.float64]


logger = create_logger("correlations")


MIN_EQUAL_TIME: "Final" = 1e-12


class TwoTimeSeries(DataType):
    """
    <a_l^+(t) a_l(t + tau)> on anchors x lags for one level l.

    `equal_time_start[a]` is the occupation at the anchor and `equal_time_end[a, k]`
    the occupation at anchor + lag, the two factors of the measure's normalisation.
    """

    anchors: "FloatArray"
    lags: "FloatArray"
    values: "ComplexArray"
    equal_time_start: "FloatArray"
    equal_time_end: "FloatArray"
    level_index: int = 0
    source: str = "exact"

    def normalized(self, anchor_index: int, lag_index: int) -> complex | None:
        denominator = self.equal_time_start[anchor_index] * self.equal_time_end[anchor_index, lag_index]
        if min(self.equal_time_start[anchor_index], self.equal_time_end[anchor_index, lag_index]) < MIN_EQUAL_TIME:
            return None
        return complex(self.values[anchor_index, lag_index] / math.sqrt(denominator))


class BMParameters(DataType):
    """Constant Born-Markov rates taken at the bare level."""

    statistics: Statistics
    level: float
    rate: float
    lamb_shift: float
    mean_occupation: float


class MeasureSeries(DataType):
    anchors: "FloatArray"
    lags: "FloatArray"
    values: "FloatArray"
    defined: "npt.NDArray[np.bool_]"

    def supremum(self, anchor_index: int) -> float | None:
        row = self.values[anchor_index][self.defined[anchor_index]]
        if not len(row):
            return None
        return float(np.max(row))


def exact_two_time(
        gf: "GreenFunctions", initial: "npt.ArrayLike", anchor: int, lag: int,
) -> "ComplexArray":
    """
    Matrix C_ij = <a_i^+(t) a_j(t + tau)> with t = anchor * dt and tau = lag * dt,
    from the slice v(tau, t) stored at the anchor step.
    """
    grid = gf.grid
    if lag < 0:
        negative = translate("lag must be >= 0, got {}").format(lag)
        raise InvalidInputError(negative)
    if anchor + lag > grid.n_steps:
        beyond = translate("anchor step {} plus lag {} runs past the grid end {}").format(
            anchor, lag, grid.n_steps,
        )
        raise PreconditionError(beyond)
    v_slice = gf.slice_at(anchor)
    initial_matrix = np.atleast_2d(np.asarray(initial, dtype=np.complex128))
    if initial_matrix.shape != gf.u.shape[1:]:
        wrong_shape = translate("initial occupation has shape {}, expected {}").format(
            initial_matrix.shape, gf.u.shape[1:],
        )
        raise InvalidInputError(wrong_shape)
    later = gf.u[anchor + lag]
    earlier_dagger = gf.u[anchor].conj().T
    return (later @ initial_matrix.T @ earlier_dagger + v_slice[anchor + lag]).T


def exact_two_time_series(
        gf: "GreenFunctions",
        initial: "npt.ArrayLike",
        anchors: "Sequence[int]",
        lags: "Sequence[int]",
        level_index: int = 0,
) -> TwoTimeSeries:
    if not 0 <= level_index < gf.dimension:
        bad_level = translate("level {} does not exist in a {}-level system").format(
            level_index, gf.dimension,
        )
        raise InvalidInputError(bad_level)
    occupations = occupation(gf, initial)[:, level_index, level_index].real
    values = np.zeros((len(anchors), len(lags)), dtype=np.complex128)
    end = np.zeros((len(anchors), len(lags)))
    for row, anchor in enumerate(anchors):
        for column, lag in enumerate(lags):
            values[row, column] = exact_two_time(gf, initial, anchor, lag)[level_index, level_index]
            end[row, column] = occupations[anchor + lag]
    times = gf.grid.times
    return TwoTimeSeries(
        anchors=times[list(anchors)],
        lags=np.asarray(lags, dtype=np.float64) * gf.grid.dt,
        values=values,
        equal_time_start=occupations[list(anchors)].copy(),
        equal_time_end=end,
        level_index=level_index,
        source="exact",
    )


def bm_reference(system: "SystemSpec") -> BMParameters:
    if not system.is_scalar:
        not_scalar = translate("Born-Markov reference needs a single level, got {}").format(
            system.dimension,
        )
        raise InvalidInputError(not_scalar)
    density = system.total_density
    level = system.level
    rate = float(density(level))
    if rate <= 0:
        no_decay = translate(
            "J vanishes at the level energy {}, the Born-Markov reference is undefined",
        ).format(level)
        raise BMUndefinedError(no_decay)
    parameters = BMParameters(
        statistics=system.statistics,
        level=level,
        rate=rate,
        lamb_shift=float(density.lamb_shift(level)),
        mean_occupation=float(system.effective_distribution(level)),
    )
    logger.debug(
        "Born-Markov rate {:.6g}, shift {:.6g}, occupation {:.6g}",
        parameters.rate, parameters.lamb_shift, parameters.mean_occupation,
    )
    return parameters


def bm_occupation(
        parameters: BMParameters, initial: float, times: "npt.ArrayLike",
) -> "float | FloatArray":
    decay = np.exp(-parameters.rate * np.asarray(times, dtype=np.float64))
    result = initial * decay + parameters.mean_occupation * (1 - decay)
    if np.ndim(result) == 0:
        return float(result)
    return result


def bm_two_time(parameters: BMParameters, occupation_at_t: float, lag: float) -> complex:
    """Quantum regression: the coherence rotates at the shifted level and decays at half the rate."""
    if lag < 0:
        negative = translate("lag must be >= 0, got {}").format(lag)
        raise InvalidInputError(negative)
    phase = -1j * (parameters.level + parameters.lamb_shift) * lag
    return complex(np.exp(phase - parameters.rate * lag / 2) * occupation_at_t)


def bm_two_time_series(
        parameters: BMParameters,
        initial: float,
        anchors: "npt.ArrayLike",
        lags: "npt.ArrayLike",
) -> TwoTimeSeries:
    anchor_times = np.asarray(anchors, dtype=np.float64)
    lag_times = np.asarray(lags, dtype=np.float64)
    if np.any(lag_times < 0):
        negative = translate("lags must be >= 0")
        raise InvalidInputError(negative)
    start = np.asarray(bm_occupation(parameters, initial, anchor_times), dtype=np.float64)
    end = np.asarray(
        bm_occupation(parameters, initial, anchor_times[:, None] + lag_times[None, :]),
        dtype=np.float64,
    )
    rotation = np.exp(
        -1j * (parameters.level + parameters.lamb_shift) * lag_times - parameters.rate * lag_times / 2,
    )
    return TwoTimeSeries(
        anchors=anchor_times,
        lags=lag_times,
        values=start[:, None] * rotation[None, :],
        equal_time_start=start,
        equal_time_end=end.reshape(len(anchor_times), len(lag_times)),
        source="born-markov",
    )


def _check_matching(exact: TwoTimeSeries, reference: TwoTimeSeries) -> None:
    if (
            exact.values.shape != reference.values.shape
            or not np.allclose(exact.anchors, reference.anchors)
            or not np.allclose(exact.lags, reference.lags)
    ):
        mismatch = translate("two-time series are sampled on different anchors or lags")
        raise InvalidInputError(mismatch)


def nonmarkov_measure(
        exact: TwoTimeSeries, reference: TwoTimeSeries, anchor_index: int, lag_index: int,
) -> float | None:
    """|exact - reference| of the normalised correlators; None once an occupation has decayed away."""
    _check_matching(exact, reference)
    exact_value = exact.normalized(anchor_index, lag_index)
    reference_value = reference.normalized(anchor_index, lag_index)
    if exact_value is None or reference_value is None:
        return None
    return abs(exact_value - reference_value)


def measure_series(exact: TwoTimeSeries, reference: TwoTimeSeries) -> MeasureSeries:
    _check_matching(exact, reference)
    values = np.full(exact.values.shape, np.nan)
    for anchor_index in range(len(exact.anchors)):
        for lag_index in range(len(exact.lags)):
            value = nonmarkov_measure(exact, reference, anchor_index, lag_index)
            if value is not None:
                values[anchor_index, lag_index] = value
    defined = ~np.isnan(values)
    if not np.all(defined):
        logger.debug("measure undefined at {} of {} points", int(np.sum(~defined)), defined.size)
    return MeasureSeries(
        anchors=exact.anchors, lags=exact.lags, values=values, defined=defined,
    )
