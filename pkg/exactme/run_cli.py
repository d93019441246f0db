"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import functools
import time
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .args import parse_args
from .config import OutputRoot
from .core import Statistics, pool_map
from .correlations import (
    bm_reference,
    bm_two_time_series,
    exact_two_time_series,
    measure_series,
)
from .exceptions import (
    NUMERICAL_ERRORS,
    VALIDATION_ERRORS,
    DomainError,
    NumericalFailureError,
    ScenarioError,
    SysExit,
)
from .greens import cross_check_v, solve_u, solve_v
from .i18n import translate, translate_many
from .logging import create_logger
from .mastereq import compute_coefficients, occupation, propagate_rho
from .models import lambda_coherence, run_model
from .pprint import bold_line, print_error, print_ok, print_stdout, print_warning
from .progressbar import ThreadSafeProgressBar
from .report import (
    ExitCode,
    RunReport,
    TaskReport,
    TaskStatus,
    matrix_columns,
    write_csv,
)
from .resolvent import (
    dissipation_spectrum,
    find_bound_states,
    steady_fluctuation_spectrum,
    sum_rule,
)
from .scenario import MODEL_TASK_PREFIX, load_scenario, parse_override

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence
    from typing import Final

    import numpy.typing as npt

    from .correlations import MeasureSeries, TwoTimeSeries
    from .greens import GreenFunctions
    from .mastereq import MECoefficients
    from .resolvent import BoundState
    from .scenario import Scenario


logger = create_logger("run")


TASK_ORDER: "Final" = (
    "u", "v", "coefficients", "rho", "occupation", "measure", "bound_states", "spectra",
)
# a task is skipped once one of these has failed or been skipped:
TASK_DEPENDS: "Final[dict[str, tuple[str, ...]]]" = {
    "v": ("u",),
    "coefficients": ("u", "v"),
    "rho": ("u", "v", "coefficients"),
    "occupation": ("u", "v"),
    "measure": ("u", "v"),
    "spectra": ("bound_states",),
}
SUM_RULE_TOLERANCE: "Final" = 1e-3
TRACE_TOLERANCE: "Final" = 1e-8
POSITIVITY_TOLERANCE: "Final" = -1e-8
OCCUPATION_TOLERANCE: "Final" = 1e-4


def ordered_tasks(tasks: "Sequence[str]") -> list[str]:
    simple = [task for task in TASK_ORDER if task in tasks]
    return simple + [task for task in tasks if task.startswith(MODEL_TASK_PREFIX)]


def blocking_tasks(name: str, failed: "set[str]") -> list[str]:
    return [dependency for dependency in TASK_DEPENDS.get(name, ()) if dependency in failed]


class ScenarioRun:
    """Runs the tasks of one scenario in dependency order, caching shared intermediate results."""

    def __init__(self, scenario: "Scenario", output_dir: Path, *, threads: int = 1) -> None:
        self.scenario = scenario
        self.output_dir = output_dir
        self.threads = threads
        self.report = RunReport(
            scenario=scenario.source,
            output_directory=str(output_dir),
            tasks=[],
            checksums={},
        )
        self._gf: GreenFunctions | None = None
        self._coefficients: MECoefficients | None = None
        self._bound_states: list[BoundState] | None = None

    @property
    def times(self) -> "npt.NDArray[np.float64]":
        return self.scenario.grid.times

    def _write(self, task: TaskReport, name: str, headers: list[str], columns: list["npt.ArrayLike"]) -> None:
        path = self.output_dir / f"{name}.csv"
        write_csv(path, headers, columns, self.scenario.precision)
        self.report.add_file(task, path, self.output_dir)

    def green_functions(self) -> "GreenFunctions":
        if self._gf is None:
            grid = self.scenario.grid
            progressbar_id = f"u:{self.scenario.source}:{id(self)}"
            progressbar = ThreadSafeProgressBar.get(
                progressbar_length=grid.n_steps,
                progressbar_id=progressbar_id,
                message=translate("Solving u(t): "),
            )
            try:
                self._gf = solve_u(
                    self.scenario.system, grid,
                    threads=self.threads,
                    order=self.scenario.quadrature_order,
                    progress=progressbar.update,
                )
            finally:
                ThreadSafeProgressBar.finish(progressbar_id)
        return self._gf

    def green_functions_with_v(self) -> "GreenFunctions":
        gf = self.green_functions()
        if gf.v_diag is None:
            anchors = self.scenario.anchor_steps()
            if self.scenario.cross_check:
                anchors = [*anchors, self.scenario.grid.n_steps // 2]
            solve_v(
                gf, anchors,
                v_stride=self.scenario.v_stride,
                threads=self.threads,
                order=self.scenario.quadrature_order,
            )
        return gf

    def coefficients(self) -> "MECoefficients":
        if self._coefficients is None:
            self._coefficients = compute_coefficients(self.green_functions_with_v())
        return self._coefficients

    def bound_states(self) -> list["BoundState"]:
        if self._bound_states is None:
            self._bound_states = find_bound_states(self.scenario.system)
        return self._bound_states

    def task_u(self, task: TaskReport) -> None:
        gf = self.green_functions()
        headers, columns = matrix_columns("u", gf.u)
        if gf.dimension == 1:
            headers.append("abs_u")
            columns.append(np.abs(gf.scalar_u()))
        self._write(task, "u", ["t", *headers], [self.times, *columns])
        task.warnings += gf.warnings

    def task_v(self, task: TaskReport) -> None:
        gf = self.green_functions_with_v()
        stride = gf.v_stride
        headers, columns = matrix_columns("v", gf.require_v()[::stride])
        self._write(task, "v", ["t", *headers], [self.times[::stride], *columns])
        if self.scenario.cross_check:
            before = len(gf.warnings)
            relative = cross_check_v(gf, self.scenario.grid.n_steps // 2)
            logger.debug("v cross-check discrepancy {:.3e}", relative)
            task.warnings += gf.warnings[before:]

    def task_coefficients(self, task: TaskReport) -> None:
        coefficients = self.coefficients()
        headers = ["t"]
        columns: list[npt.ArrayLike] = [self.times]
        for name in ("eps_prime", "gamma", "gamma_tilde"):
            values = getattr(coefficients, name)
            if coefficients.dimension == 1:
                headers.append(name)
                columns.append(values[:, 0, 0].real)
            else:
                names, parts = matrix_columns(name, values)
                headers += names
                columns += parts
        headers.append("singular")
        columns.append(coefficients.singular)
        self._write(task, "coefficients", headers, columns)
        task.warnings += coefficients.warnings

    def task_rho(self, task: TaskReport) -> None:
        scenario = self.scenario
        series = propagate_rho(scenario.initial_state(), self.coefficients())
        occupations = series.occupations()
        exact = occupation(self.green_functions_with_v(), scenario.initial_occupation())
        states = series.states
        headers = ["t", "trace", "purity"]
        columns: list[npt.ArrayLike] = [
            np.trace(states, axis1=1, axis2=2).real,
            np.einsum("kij,kji->k", states, states).real,
        ]
        for level in range(occupations.shape[1]):
            suffix = "" if occupations.shape[1] == 1 else f"_{level}"
            headers += [f"n{suffix}", f"n_exact{suffix}"]
            columns += [occupations[:, level, level].real, exact[:, level, level].real]
        if scenario.system.statistics is Statistics.BOSON:
            headers.append("top_population")
            columns.append(states[:, -1, -1].real)
        self._write(task, "rho", headers, [self.times, *columns])
        task.warnings += series.warnings
        mismatch = float(np.max(np.abs(occupations - exact)))
        if series.trace_drift > TRACE_TOLERANCE:
            task.warnings.append(translate("trace drifted by {:.3e}").format(series.trace_drift))
        if series.min_eigenvalue < POSITIVITY_TOLERANCE:
            task.warnings.append(translate("density matrix eigenvalue fell to {:.3e}").format(
                series.min_eigenvalue,
            ))
        if mismatch > OCCUPATION_TOLERANCE:
            task.warnings.append(translate(
                "occupation from rho differs from the Green-function occupation by {:.3e}",
            ).format(mismatch))

    def task_occupation(self, task: TaskReport) -> None:
        values = occupation(self.green_functions_with_v(), self.scenario.initial_occupation())
        if values.shape[1] == 1:
            headers, columns = ["n"], [values[:, 0, 0].real]
        else:
            headers, columns = matrix_columns("n", values)
        self._write(task, "occupation", ["t", *headers], [self.times, *columns])

    def _two_time(self) -> tuple["TwoTimeSeries", "TwoTimeSeries", "MeasureSeries"]:
        scenario = self.scenario
        gf = self.green_functions_with_v()
        initial = scenario.initial_occupation()
        anchors = scenario.anchor_steps()
        lags = scenario.lag_steps()
        exact = exact_two_time_series(gf, initial, anchors, lags)
        reference = bm_two_time_series(
            bm_reference(scenario.system), float(initial[0, 0].real),
            exact.anchors, exact.lags,
        )
        return exact, reference, measure_series(exact, reference)

    def task_measure(self, task: TaskReport) -> None:
        exact, reference, measure = self._two_time()
        anchor_grid, lag_grid = np.meshgrid(exact.anchors, exact.lags, indexing="ij")
        self._write(
            task, "measure",
            ["t", "tau", "re_exact", "im_exact", "re_bm", "im_bm", "measure", "defined"],
            [
                anchor_grid.ravel(), lag_grid.ravel(),
                exact.values.real.ravel(), exact.values.imag.ravel(),
                reference.values.real.ravel(), reference.values.imag.ravel(),
                measure.values.ravel(), measure.defined.ravel(),
            ],
        )
        undefined = int(np.sum(~measure.defined))
        if undefined:
            task.warnings.append(translate_many(
                "measure undefined at {} point, the occupation has decayed away",
                "measure undefined at {} points, the occupation has decayed away",
                undefined,
            ).format(undefined))

    def task_bound_states(self, task: TaskReport) -> None:
        states = self.bound_states()
        total = sum_rule(self.scenario.system, states)
        self._write(
            task, "bound_states",
            ["energy", "residue"],
            [[state.energy for state in states], [state.residue for state in states]],
        )
        task.warnings += [state.warning for state in states if state.warning]
        if abs(total - 1) > SUM_RULE_TOLERANCE:
            task.warnings.append(translate("sum rule gives {:.6f} instead of 1").format(total))

    def task_spectra(self, task: TaskReport) -> None:
        system = self.scenario.system
        settings = self.scenario.spectra
        density = system.total_density
        states = self.bound_states()
        energies = settings.energies
        lamb_shift = np.full(len(energies), np.nan)
        dissipation = np.full(len(energies), np.nan)
        fluctuation = np.full(len(energies), np.nan)
        evaluations: "list[tuple[npt.NDArray[np.float64], Callable[[float], float]]]" = [
            (lamb_shift, density.lamb_shift),
            (dissipation, functools.partial(dissipation_spectrum, system)),
            (fluctuation, lambda at: steady_fluctuation_spectrum(system, at, settings.steady_time, states)),
        ]
        undefined = 0
        for index, energy in enumerate(energies):
            for column, evaluate in evaluations:
                try:
                    column[index] = evaluate(float(energy))
                except (DomainError, NumericalFailureError) as exc:
                    logger.debug("spectrum undefined at {}: {}", energy, exc)
                    undefined += 1
        if undefined:
            task.warnings.append(translate_many(
                "{} spectrum value is undefined",
                "{} spectrum values are undefined",
                undefined,
            ).format(undefined))
        self._write(
            task, "spectra",
            ["energy", "j", "lamb_shift", "dissipation", "fluctuation"],
            [energies, density(energies), lamb_shift, dissipation, fluctuation],
        )

    def task_model(self, task: TaskReport) -> None:
        kind = next(
            kind for kind in self.scenario.model_kinds
            if MODEL_TASK_PREFIX + kind.value == task.name
        )
        series = run_model(self.scenario.model(kind), self.scenario.grid, self.scenario.model_state())
        states = series.states
        coherence = lambda_coherence(states)
        headers = ["t", "rho_00", "rho_11", "re_rho_01", "im_rho_01", "re_lambda_01", "im_lambda_01"]
        columns: list[npt.ArrayLike] = [
            series.times,
            states[:, 0, 0].real, states[:, 1, 1].real,
            states[:, 0, 1].real, states[:, 0, 1].imag,
            coherence.real, coherence.imag,
        ]
        for name, values in series.columns.items():
            if np.iscomplexobj(values):
                headers += [f"re_{name}", f"im_{name}"]
                columns += [np.real(values), np.imag(values)]
            else:
                headers.append(name)
                columns.append(values)
        self._write(task, f"model_{kind.value}", headers, columns)
        task.warnings += series.warnings
        for moment in series.backflow_times:
            logger.debug("{}: rate changes sign at t = {}", kind.value, moment)

    def handler(self, name: str) -> "Callable[[TaskReport], None]":
        if name.startswith(MODEL_TASK_PREFIX):
            return self.task_model
        handler: Callable[[TaskReport], None] = getattr(self, f"task_{name}")
        return handler

    def run(self, *, strict: bool = False) -> RunReport:
        report = self.report
        report.strict = strict
        failed: set[str] = set()
        for name in ordered_tasks(self.scenario.tasks):
            task = TaskReport(name=name, status=TaskStatus.SKIPPED, wall_time=0.0, warnings=[], files=[])
            report.tasks.append(task)
            blocking = blocking_tasks(name, failed)
            if blocking:
                logger.debug("task {} skipped, {} did not complete", name, ", ".join(blocking))
                failed.add(name)
                continue
            started = time.monotonic()
            try:
                self.handler(name)(task)
                task.status = TaskStatus.OK
            except VALIDATION_ERRORS as exc:
                task.status, task.error = TaskStatus.FAILED, exc.message
                report.exit_code = ExitCode.VALIDATION
                failed.add(name)
            except NUMERICAL_ERRORS as exc:
                task.status, task.error = TaskStatus.FAILED, exc.message
                if report.exit_code == ExitCode.SUCCESS:
                    report.exit_code = ExitCode.NUMERICAL
                failed.add(name)
            task.wall_time = time.monotonic() - started
            logger.debug("task {} {} in {:.3f}s", name, task.status, task.wall_time)
        if strict and report.exit_code == ExitCode.SUCCESS and report.warnings:
            report.exit_code = ExitCode.NUMERICAL
        report.write(self.output_dir)
        return report


def run_scenario(
        scenario: "Scenario", output_dir: Path, *, threads: int = 1, strict: bool = False,
) -> RunReport:
    return ScenarioRun(scenario, output_dir, threads=threads).run(strict=strict)


def output_dir_for(scenario: "Scenario") -> Path:
    args = parse_args()
    if args.out:
        return Path(args.out)
    if scenario.output_directory:
        return Path(scenario.output_directory)
    return OutputRoot()()


def print_report(report: RunReport) -> None:
    for task in report.tasks:
        line = f"{bold_line(task.name)}: {task.status}"
        if task.status == TaskStatus.OK:
            print_ok(line)
        elif task.status == TaskStatus.FAILED:
            print_error(f"{line}: {task.error}")
        else:
            print_stdout(f"   {line}")
        for warning in task.warnings:
            print_warning(warning)
    if report.strict and report.exit_code == ExitCode.NUMERICAL and not any(
            task.status == TaskStatus.FAILED for task in report.tasks
    ):
        print_error(translate("warnings are treated as failures (--strict)"))
    print_stdout(translate("Results written to {}").format(report.output_directory))


def print_scenario_error(exc: ScenarioError) -> None:
    for diagnostic in exc.diagnostics:
        print_error(diagnostic)


def _scenario_path() -> Path:
    scenario = parse_args().scenario
    if scenario is None:
        no_scenario = translate("no scenario given")
        raise ScenarioError([no_scenario])
    return Path(scenario)


def cli_check() -> None:
    try:
        scenario = load_scenario(_scenario_path())
    except ScenarioError as exc:
        print_scenario_error(exc)
        raise SysExit(ExitCode.VALIDATION) from exc
    print_ok(translate("{}: valid, tasks: {}").format(scenario.source, ", ".join(scenario.tasks)))


def cli_run() -> None:
    args = parse_args()
    try:
        scenario = load_scenario(_scenario_path())
    except ScenarioError as exc:
        print_scenario_error(exc)
        raise SysExit(ExitCode.VALIDATION) from exc
    report = run_scenario(
        scenario, output_dir_for(scenario),
        threads=args.threads or 1,
        strict=bool(args.strict),
    )
    print_report(report)
    raise SysExit(report.exit_code)


def _sweep_point(path: Path, param: str, output_root: Path, value: str, *, strict: bool) -> RunReport:
    scenario = load_scenario(path, overrides=parse_override(param, value))
    return run_scenario(scenario, output_root / f"{param}={value}", strict=strict)


def cli_sweep() -> None:
    args = parse_args()
    path = _scenario_path()
    param = args.param or ""
    values = args.sweep_values
    try:
        base = load_scenario(path)
        for value in values:
            load_scenario(path, overrides=parse_override(param, value))
    except ScenarioError as exc:
        print_scenario_error(exc)
        raise SysExit(ExitCode.VALIDATION) from exc
    output_root = output_dir_for(base)
    reports = pool_map(
        functools.partial(_sweep_point, path, param, output_root, strict=bool(args.strict)),
        values,
        args.threads or 1,
    )
    for value, report in zip(values, reports, strict=True):
        print_stdout(bold_line(f"{param} = {value}"))
        print_report(report)
    raise SysExit(max((report.exit_code for report in reports), default=ExitCode.SUCCESS))
