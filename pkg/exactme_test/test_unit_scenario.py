"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def

import numpy as np

from exactme.core import Statistics
from exactme.exceptions import ScenarioError
from exactme.models import ModelKind
from exactme.scenario import (
    lag_count,
    load_scenario,
    parse_matrix,
    parse_override,
    parse_scenario,
    parse_weight,
)
from exactme.spectral import OhmicDensity
from exactme_test.helpers import SCENARIOS_DIR, ExactMETestCase

SUBOHMIC = """\
[system]
statistics = boson
energy = 1

[reservoir]
kind = ohmic
coupling = 0.1
exponent = 0.5
cutoff = 1
temperature = 1

[grid]
t_max = 10
dt = 0.01

[run]
tasks = u, coefficients
"""

FERMION_PAIR = """\
[system]
statistics = fermion
energy = 0, 0.1; 0.1, 1
initial_value = 1, 0

[reservoir]
kind = flat
rate = 0.5
lower = -10
upper = 10
chemical_potential = 0.5

[grid]
t_max = 5
dt = 0.01

[run]
tasks = u, v, occupation, rho
"""


class ScenarioParseTest(ExactMETestCase):

    def diagnostics_of(self, text: str, **kwargs) -> list[str]:
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(text, **kwargs)
        return context.exception.diagnostics

    def assertDiagnostic(self, diagnostics: list[str], fragment: str) -> None:  # noqa: N802
        self.assertTrue(
            any(fragment in diagnostic for diagnostic in diagnostics),
            f"{fragment!r} not in {diagnostics}",
        )

    def test_subohmic_scenario_is_accepted(self):
        scenario = parse_scenario(SUBOHMIC)
        self.assertEqual(scenario.tasks, ["u", "coefficients"])
        self.assertIs(scenario.system.statistics, Statistics.BOSON)
        self.assertEqual(scenario.system.level, 1.0)
        self.assertEqual(scenario.grid.n_steps, 1000)
        self.assertAlmostEqual(scenario.grid.dt, 0.01)
        reservoir = scenario.system.reservoirs[0]
        self.assertIsInstance(reservoir.density, OhmicDensity)
        self.assertEqual(reservoir.density.exponent, 0.5)
        self.assertEqual(reservoir.temperature, 1.0)

    def test_defaults_are_filled(self):
        scenario = parse_scenario(SUBOHMIC)
        self.assertEqual(scenario.unit, 1.0)
        self.assertEqual(scenario.v_stride, 1)
        self.assertIsNone(scenario.quadrature_order)
        self.assertEqual(scenario.initial_kind, "fock")
        self.assertEqual(scenario.initial_values, [1.0])
        self.assertEqual(scenario.cutoff, 20)
        self.assertEqual(scenario.anchor_times, [])
        self.assertEqual(scenario.model_initial, "superposition")
        self.assertEqual(scenario.output_directory, "")
        self.assertEqual(scenario.precision, 0)
        self.assertTrue(scenario.cross_check)

    def test_zero_dt_names_key_and_line(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("dt = 0.01", "dt = 0"))
        self.assertEqual(diagnostics, ["line 14: [grid] dt: must be > 0, got 0"])

    def test_negative_temperature(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("temperature = 1", "temperature = -1"))
        self.assertEqual(diagnostics, ["line 10: [reservoir] temperature: must be >= 0, got -1"])

    def test_every_problem_is_reported_at_once(self):
        text = SUBOHMIC.replace("dt = 0.01", "dt = 0").replace("temperature = 1", "temperature = -1")
        diagnostics = self.diagnostics_of(text)
        self.assertEqual(len(diagnostics), 2)
        self.assertDiagnostic(diagnostics, "[reservoir] temperature")
        self.assertDiagnostic(diagnostics, "[grid] dt")

    def test_unknown_key(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("dt = 0.01", "dt = 0.01\ncolour = red"))
        self.assertEqual(diagnostics, ["line 15: [grid] colour: unknown key"])

    def test_unknown_section(self):
        diagnostics = self.diagnostics_of(SUBOHMIC + "\n[extras]\nanswer = 42\n")
        self.assertEqual(diagnostics, ["line 19: [extras]: unknown section"])

    def test_missing_section(self):
        text = SUBOHMIC.replace("[grid]\nt_max = 10\ndt = 0.01\n", "")
        diagnostics = self.diagnostics_of(text)
        self.assertEqual(diagnostics, ["end of file: [grid]: required section is missing"])

    def test_missing_key(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("exponent = 0.5\n", ""))
        self.assertEqual(diagnostics, ["line 5: [reservoir] exponent: required key is missing"])

    def test_bad_number(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("t_max = 10", "t_max = ten"))
        self.assertEqual(diagnostics, ["line 13: [grid] t_max: 'ten' is not a valid float"])

    def test_unknown_spectral_kind(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("kind = ohmic", "kind = cubic"))
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith("line 6: [reservoir] kind: 'cubic' is not one of:"))

    def test_key_foreign_to_kind(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("cutoff = 1", "cutoff = 1\nwidth = 2"))
        self.assertEqual(diagnostics, ["line 10: [reservoir] width: not used by kind 'ohmic'"])

    def test_key_outside_section(self):
        diagnostics = self.diagnostics_of("energy = 1\n" + SUBOHMIC)
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith("line 1: key outside of any section"))

    def test_line_without_value(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("energy = 1", "energy = 1\nnonsense"))
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith("line 4: cannot parse"))

    def test_grid_needs_whole_steps(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("dt = 0.01", "dt = 0.3"))
        self.assertEqual(len(diagnostics), 1)
        self.assertDiagnostic(diagnostics, "is not a whole number of steps")

    def test_reservoir_statistics_must_match(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("kind = ohmic", "statistics = fermion\nkind = ohmic"))
        self.assertEqual(diagnostics, ["line 6: [reservoir] statistics: must match the system statistics"])

    def test_non_square_energy(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("energy = 1", "energy = 1, 2"))
        self.assertDiagnostic(diagnostics, "[system] energy: '1, 2' is not a square matrix")

    def test_unit_scales_energies_and_times(self):
        scenario = parse_scenario(SUBOHMIC.replace("energy = 1", "energy = 1\nunit = 2"))
        self.assertEqual(scenario.system.level, 2.0)
        self.assertEqual(scenario.system.reservoirs[0].temperature, 2.0)
        self.assertEqual(scenario.system.reservoirs[0].density.cutoff, 2.0)
        self.assertAlmostEqual(scenario.grid.dt, 0.005)
        self.assertAlmostEqual(scenario.grid.t_max, 5.0)


class ScenarioTasksTest(ExactMETestCase):

    def diagnostics_of(self, text: str) -> list[str]:
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(text)
        return context.exception.diagnostics

    def test_tasks_are_normalized_and_deduplicated(self):
        scenario = parse_scenario(SUBOHMIC.replace("tasks = u, coefficients", "tasks = U, u, Coefficients"))
        self.assertEqual(scenario.tasks, ["u", "coefficients"])

    def test_unknown_task(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("tasks = u, coefficients", "tasks = u, bogus"))
        self.assertEqual(diagnostics, ["line 17: [run] tasks: unknown task 'bogus'"])

    def test_at_least_one_task(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("tasks = u, coefficients", "tasks ="))
        self.assertEqual(diagnostics, ["line 17: [run] tasks: at least one task is required"])

    def test_unknown_model(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("tasks = u, coefficients", "tasks = model:laser"))
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith("line 17: [run] tasks: unknown model kind 'laser'"))

    def test_model_kind(self):
        text = SUBOHMIC.replace("temperature = 1", "temperature = 0").replace(
            "tasks = u, coefficients", "tasks = model:SPIN_ZERO_T",
        )
        scenario = parse_scenario(text)
        self.assertEqual(scenario.tasks, ["model:spin_zero_T"])
        self.assertEqual(scenario.model_kinds, [ModelKind.SPIN_ZERO_T])

    def test_model_rejects_its_bath(self):
        diagnostics = self.diagnostics_of(SUBOHMIC.replace("tasks = u, coefficients", "tasks = model:spin_zero_T"))
        self.assertEqual(len(diagnostics), 1)
        self.assertTrue(diagnostics[0].startswith(
            "line 17: [run] tasks: spin amplitude damping is exact only at zero temperature",
        ))

    def test_model_needs_one_reservoir(self):
        text = SUBOHMIC.replace("temperature = 1", "temperature = 0").replace(
            "tasks = u, coefficients", "tasks = model:spin_zero_T",
        ) + "\n[reservoir.second]\nkind = none\n"
        diagnostics = self.diagnostics_of(text)
        self.assertEqual(diagnostics, ["line 17: [run] tasks: model:spin_zero_T needs exactly one reservoir"])

    def test_scalar_only_tasks(self):
        text = SUBOHMIC.replace("energy = 1", "energy = 1, 0.1; 0.1, 2").replace(
            "tasks = u, coefficients", "tasks = u, bound_states, spectra",
        )
        diagnostics = self.diagnostics_of(text)
        self.assertEqual(diagnostics, [
            "line 17: [run] tasks: bound_states needs a single-level system",
            "line 17: [run] tasks: spectra needs a single-level system",
        ])

    def test_rho_single_boson_mode(self):
        text = SUBOHMIC.replace("energy = 1", "energy = 1, 0.1; 0.1, 2").replace(
            "tasks = u, coefficients", "tasks = rho",
        )
        self.assertEqual(self.diagnostics_of(text), ["line 17: [run] tasks: rho supports a single boson mode"])


class ScenarioStateTest(ExactMETestCase):

    def test_fermion_pair(self):
        scenario = parse_scenario(FERMION_PAIR)
        self.assertIs(scenario.system.statistics, Statistics.FERMION)
        self.assertEqual(scenario.system.dimension, 2)
        self.assertEqual(scenario.initial_kind, "occupation")
        self.assertAllClose(scenario.initial_occupation(), np.diag([1.0, 0.0]), atol=1e-15)
        state = scenario.initial_state()
        self.assertAlmostEqual(float(np.trace(state.matrix).real), 1.0, places=12)

    def test_reservoir_weights(self):
        weights = {
            "1, 0.5": [[1, 0.5], [0.5, 0.25]],
            "1, 0; 0, 0.5": [[1, 0], [0, 0.5]],
        }
        for text, expected in weights.items():
            source = FERMION_PAIR.replace("chemical_potential = 0.5", f"chemical_potential = 0.5\nweight = {text}")
            scenario = parse_scenario(source)
            with self.subTest(weight=text):
                self.assertAllClose(scenario.system.reservoirs[0].weight, expected, atol=0)

    def test_fermion_values_count(self):
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(FERMION_PAIR.replace("initial_value = 1, 0", "initial_value = 1"))
        self.assertEqual(
            context.exception.diagnostics,
            ["line 4: [system] initial_value: expected 2 value(s), got 1"],
        )

    def test_boson_state_on_fermions(self):
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(FERMION_PAIR.replace("initial_value = 1, 0", "initial_value = 1, 0\ninitial = coherent"))
        self.assertEqual(
            context.exception.diagnostics,
            ["line 5: [system] initial: 'coherent' is not a fermion initial state"],
        )

    def test_coherent_state(self):
        scenario = parse_scenario(SUBOHMIC.replace("energy = 1", "energy = 1\ninitial = coherent\ninitial_value = 2"))
        self.assertAllClose(scenario.initial_occupation(), [[4.0]], atol=1e-15)
        self.assertEqual(scenario.cutoff, 50)

    def test_explicit_cutoff(self):
        scenario = parse_scenario(SUBOHMIC.replace("energy = 1", "energy = 1\ncutoff = 12"))
        self.assertEqual(scenario.cutoff, 12)
        self.assertEqual(scenario.initial_state().matrix.shape, (13, 13))


class ScenarioAnchorsTest(ExactMETestCase):

    text = SUBOHMIC.replace("t_max = 10", "t_max = 100").replace(
        "tasks = u, coefficients", "tasks = measure",
    ) + "\n[correlations]\nanchors = 4\nmax_lag = 20\n"

    def test_anchors_leave_room_for_lags(self):
        scenario = parse_scenario(self.text)
        self.assertEqual(len(scenario.anchor_times), 4)
        self.assertEqual(scenario.max_lag, 20.0)
        lags = scenario.lag_steps()
        self.assertEqual(lags[-1], 2000)
        for step in scenario.anchor_steps():
            self.assertLessEqual(step + lags[-1], scenario.grid.n_steps)
        self.assertAlmostEqual(scenario.anchor_times[-1], 80.0)
        self.assertAlmostEqual(scenario.anchor_times[0], 1.0)

    def test_lag_longer_than_grid(self):
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(self.text.replace("max_lag = 20", "max_lag = 150"))
        self.assertEqual(len(context.exception.diagnostics), 1)
        self.assertTrue(context.exception.diagnostics[0].startswith("line 21: [correlations] max_lag:"))

    def test_lag_count_floors_to_whole_steps(self):
        self.assertEqual(lag_count(20.0, 0.01), 2000)
        self.assertEqual(lag_count(20.0, 0.03), 666)
        self.assertEqual(lag_count(0.3, 0.1), 3)


class ScenarioOverrideTest(ExactMETestCase):

    def test_parse_override(self):
        self.assertEqual(parse_override("grid.dt", "0.02"), {("grid", "dt"): "0.02"})
        self.assertEqual(
            parse_override("reservoir.bath.Coupling", "0.3"),
            {("reservoir.bath", "coupling"): "0.3"},
        )

    def test_override_without_section(self):
        with self.assertRaises(ScenarioError):
            parse_override("dt", "0.02")

    def test_override_applies(self):
        scenario = parse_scenario(SUBOHMIC, overrides=parse_override("grid.dt", "0.02"))
        self.assertEqual(scenario.grid.n_steps, 500)

    def test_override_diagnostic_names_param(self):
        with self.assertRaises(ScenarioError) as context:
            parse_scenario(SUBOHMIC, overrides=parse_override("grid.dt", "0"))
        self.assertEqual(context.exception.diagnostics, ["--param grid.dt: [grid] dt: must be > 0, got 0"])


class ScenarioMatrixTest(ExactMETestCase):

    def test_scalar(self):
        self.assertAllClose(parse_matrix("1.5"), [[1.5]], atol=0)

    def test_two_levels(self):
        self.assertAllClose(parse_matrix("1, 0.1; 0.1, 2"), [[1, 0.1], [0.1, 2]], atol=0)

    def test_complex_entries(self):
        self.assertAllClose(parse_matrix("0, 0.1j; -0.1j, 1"), [[0, 0.1j], [-0.1j, 1]], atol=0)

    def test_coupling_vector(self):
        self.assertAllClose(parse_weight("1, 0.5j"), [[1, -0.5j], [0.5j, 0.25]], atol=1e-15)
        self.assertAllClose(parse_weight("0.3"), [[0.3]], atol=0)

    def test_ragged(self):
        with self.assertRaises(ValueError):
            parse_matrix("1, 2; 3")


class ScenarioFilesTest(ExactMETestCase):

    def test_bundled_scenarios_are_valid(self):
        paths = sorted(SCENARIOS_DIR.glob("*.ini"))
        self.assertTrue(paths)
        for path in paths:
            with self.subTest(scenario=path.name):
                scenario = load_scenario(path)
                self.assertTrue(scenario.tasks)

    def test_missing_file(self):
        with self.assertRaises(ScenarioError) as context:
            load_scenario(SCENARIOS_DIR / "does_not_exist.ini")
        self.assertTrue(context.exception.diagnostics[0].startswith("cannot read scenario"))

    def test_tabulated_density_is_relative_to_scenario(self):
        path = self.write_scenario(SUBOHMIC.replace(
            "kind = ohmic\ncoupling = 0.1\nexponent = 0.5\ncutoff = 1\n",
            "kind = tabulated\nfile = density.csv\n",
        ))
        energies = np.linspace(0.0, 5.0, 51)
        table = np.column_stack([energies, energies * np.exp(-energies)])
        np.savetxt(path.parent / "density.csv", table, delimiter=",")
        scenario = load_scenario(path)
        density = scenario.system.reservoirs[0].density
        self.assertAlmostEqual(float(density(1.0)), np.exp(-1.0), places=2)
