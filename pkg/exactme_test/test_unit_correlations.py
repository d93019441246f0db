"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def

import math

import numpy as np

from exactme.core import Statistics
from exactme.correlations import (
    BMParameters,
    bm_occupation,
    bm_reference,
    bm_two_time,
    bm_two_time_series,
    exact_two_time,
    exact_two_time_series,
    measure_series,
    nonmarkov_measure,
)
from exactme.exceptions import BMUndefinedError, InvalidInputError, PreconditionError
from exactme.greens import TimeGrid, solve_u, solve_v
from exactme.mastereq import occupation
from exactme.spectral import OhmicDensity, Reservoir, SystemSpec
from exactme_test.helpers import ExactMETestCase


def ohmic_boson(coupling, temperature, exponent=1.0, cutoff=5.0, level=1.0):
    reservoir = Reservoir(
        statistics=Statistics.BOSON,
        density=OhmicDensity(coupling=coupling, exponent=exponent, cutoff=cutoff),
        temperature=temperature,
    )
    return SystemSpec(statistics=Statistics.BOSON, energy=level, reservoirs=[reservoir])


def measure_for(system, grid, anchors, lags, initial=1.0):
    gf = solve_v(solve_u(system, grid), anchors)
    exact = exact_two_time_series(gf, initial, anchors, lags)
    reference = bm_two_time_series(bm_reference(system), initial, exact.anchors, exact.lags)
    return measure_series(exact, reference)


class ExactTwoTimeTestCase(ExactMETestCase):

    @classmethod
    def setUpClass(cls):
        cls.system = ohmic_boson(0.1, 1.0)
        cls.gf = solve_v(solve_u(cls.system, TimeGrid(dt=0.01, n_steps=1000)), [0, 200, 500])

    def test_zero_lag_is_occupation(self):
        occupations = occupation(self.gf, 0.7)
        for anchor in (0, 200, 500):
            self.assertAllClose(exact_two_time(self.gf, 0.7, anchor, 0), occupations[anchor], atol=1e-10)

    def test_series_shapes(self):
        series = exact_two_time_series(self.gf, 1.0, [200, 500], [0, 10, 100])
        self.assertEqual(series.values.shape, (2, 3))
        self.assertAllClose(series.anchors, [2.0, 5.0], atol=1e-12)
        self.assertAllClose(series.lags, [0.0, 0.1, 1.0], atol=1e-12)
        self.assertAllClose(series.equal_time_end[:, 0], series.equal_time_start, atol=1e-15)
        self.assertAlmostEqual(series.normalized(0, 0).real, 1.0, places=8)

    def test_errors(self):
        with self.assertRaises(InvalidInputError):
            exact_two_time(self.gf, 1.0, 200, -1)
        with self.assertRaises(PreconditionError):
            exact_two_time(self.gf, 1.0, 500, 501)
        with self.assertRaises(PreconditionError):
            exact_two_time(self.gf, 1.0, 300, 0)
        with self.assertRaises(InvalidInputError):
            exact_two_time(self.gf, np.eye(2), 200, 0)
        with self.assertRaises(InvalidInputError):
            exact_two_time_series(self.gf, 1.0, [200], [0], level_index=1)


class LimitingCasesTestCase(ExactMETestCase):

    def test_decoupled(self):
        system = SystemSpec(statistics=Statistics.BOSON, energy=2.0)
        grid = TimeGrid(dt=0.01, n_steps=400)
        gf = solve_v(solve_u(system, grid), [100])
        for lag in (0, 50, 300):
            self.assertAllClose(
                exact_two_time(gf, 0.4, 100, lag), 0.4 * np.exp(-2j * lag * grid.dt), atol=1e-10,
            )

    def test_zero_temperature(self):
        system = ohmic_boson(0.1, 0.0)
        gf = solve_v(solve_u(system, TimeGrid(dt=0.01, n_steps=600)), [200])
        u = gf.scalar_u()
        for lag in (0, 150, 400):
            self.assertAllClose(
                exact_two_time(gf, 0.5, 200, lag)[0, 0],
                0.5 * u[200 + lag] * np.conj(u[200]),
                atol=1e-14,
            )


class BornMarkovTestCase(ExactMETestCase):

    def setUp(self):
        self.parameters = BMParameters(
            statistics=Statistics.BOSON, level=1.0, rate=0.5, lamb_shift=-0.1, mean_occupation=0.2,
        )

    def test_occupation(self):
        self.assertAlmostEqual(bm_occupation(self.parameters, 1.0, 0.0), 1.0, places=15)
        halfway = math.log(2) / self.parameters.rate
        self.assertAlmostEqual(bm_occupation(self.parameters, 1.0, halfway), 0.6, places=14)
        self.assertAlmostEqual(bm_occupation(self.parameters, 1.0, 1e3), 0.2, places=14)

    def test_two_time(self):
        halving = 2 * math.log(2) / self.parameters.rate
        value = bm_two_time(self.parameters, 0.8, halving)
        self.assertAlmostEqual(abs(value), 0.4, places=14)
        self.assertAlmostEqual(
            value / abs(value), complex(np.exp(-0.9j * halving)), places=12,
        )
        with self.assertRaises(InvalidInputError):
            bm_two_time(self.parameters, 0.8, -1.0)

    def test_series(self):
        series = bm_two_time_series(self.parameters, 1.0, [0.0, 2.0], [0.0, 1.0, 3.0])
        self.assertEqual(series.source, "born-markov")
        self.assertAllClose(
            series.values[1, 2],
            bm_two_time(self.parameters, bm_occupation(self.parameters, 1.0, 2.0), 3.0),
            atol=1e-15,
        )
        self.assertAlmostEqual(series.equal_time_end[1, 2], bm_occupation(self.parameters, 1.0, 5.0), places=15)
        with self.assertRaises(InvalidInputError):
            bm_two_time_series(self.parameters, 1.0, [0.0], [-1.0])

    def test_reference(self):
        system = ohmic_boson(0.1, 1.0)
        parameters = bm_reference(system)
        density = system.total_density
        self.assertAlmostEqual(parameters.rate, density(1.0), places=15)
        self.assertAlmostEqual(parameters.mean_occupation, 1 / math.expm1(1.0), places=14)
        self.assertAlmostEqual(parameters.lamb_shift, density.lamb_shift(1.0), places=12)

    def test_reference_undefined(self):
        with self.assertRaises(BMUndefinedError):
            bm_reference(ohmic_boson(0.1, 0.0, level=-1.0))
        with self.assertRaises(InvalidInputError):
            bm_reference(SystemSpec(statistics=Statistics.BOSON, energy=np.eye(2)))


class MeasureTestCase(ExactMETestCase):

    def test_zero_lag_and_bounds(self):
        measure = measure_for(
            ohmic_boson(0.1, 1.0), TimeGrid(dt=0.01, n_steps=1000), [100, 400], list(range(0, 601, 20)),
        )
        self.assertTrue(np.all(measure.defined))
        self.assertAllClose(measure.values[:, 0], 0.0, atol=1e-8)
        self.assertTrue(np.all(measure.values <= 2 + 1e-8))
        self.assertTrue(np.all(measure.values >= 0))

    def test_undefined_without_particles(self):
        system = ohmic_boson(0.1, 0.0)
        grid = TimeGrid(dt=0.01, n_steps=200)
        gf = solve_v(solve_u(system, grid), [50])
        exact = exact_two_time_series(gf, 0.0, [50], [0, 10])
        reference = bm_two_time_series(bm_reference(system), 0.0, exact.anchors, exact.lags)
        self.assertIsNone(nonmarkov_measure(exact, reference, 0, 1))
        measure = measure_series(exact, reference)
        self.assertFalse(np.any(measure.defined))
        self.assertIsNone(measure.supremum(0))

    def test_mismatched_series(self):
        parameters = bm_reference(ohmic_boson(0.1, 1.0))
        first = bm_two_time_series(parameters, 1.0, [0.0], [0.0, 1.0])
        second = bm_two_time_series(parameters, 1.0, [0.0], [0.0, 2.0])
        with self.assertRaises(InvalidInputError):
            measure_series(first, second)

    def test_weak_and_strong_coupling(self):
        # thermal bath at the level energy, anchored at t = 100 with lags up to 20
        grid = TimeGrid(dt=0.02, n_steps=6000)
        anchors = [5000]
        lags = list(range(0, 1001, 10))
        weak = measure_for(ohmic_boson(0.05, 1.0), grid, anchors, lags).supremum(0)
        strong = measure_for(ohmic_boson(0.3, 1.0), grid, anchors, lags).supremum(0)
        self.assertIsNotNone(weak)
        self.assertIsNotNone(strong)
        self.assertLess(weak, 0.3)
        self.assertGreater(strong, 0.6)
