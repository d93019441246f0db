"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def
# pylint: disable=invalid-name

import csv
import hashlib
import json
import os
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np

from exactme.config import VERSION
from exactme.run_cli import blocking_tasks
from exactme_test.helpers import SCENARIOS_DIR, ExactMETestCase, exactme

DECOUPLED = """\
[system]
statistics = boson
energy = 1

[reservoir]
kind = none

[grid]
t_max = 5
dt = {dt}

[run]
tasks = {tasks}
"""

WEAK_OHMIC = """\
[system]
statistics = boson
energy = 1

[reservoir]
kind = ohmic
coupling = 0.05
exponent = 1
cutoff = 5

[grid]
t_max = 2
dt = 0.01

[run]
tasks = u, v, coefficients
"""


SUB_OHMIC_SPECTRA = """\
[system]
statistics = boson
energy = 1

[reservoir]
kind = ohmic
coupling = 0.1
exponent = 0.5
cutoff = 1

[grid]
t_max = 2
dt = 0.01

[spectra]
points = 31
lower = -2
upper = 4

[run]
tasks = bound_states, spectra
"""


def read_csv(path: Path) -> tuple[list[str], "np.ndarray"]:
    with path.open(encoding="utf-8", newline="") as csv_file:
        rows = list(csv.reader(csv_file))
    return rows[0], np.array(rows[1:], dtype=np.float64)


class CliTest(ExactMETestCase):

    def out_dir(self) -> Path:
        return Path(tempfile.mkdtemp(prefix="exactme_out_"))

    def decoupled(self, *, dt: str = "0.01", tasks: str = "u") -> Path:
        return self.write_scenario(DECOUPLED.format(dt=dt, tasks=tasks))

    def test_version(self):
        result = exactme("--version")
        self.assertEqual(result.returncode, 0)
        self.assertEqual(result.stdout.strip(), f"exactme v{VERSION}")

    def test_help(self):
        result = exactme("--help")
        self.assertEqual(result.returncode, 0)
        self.assertIn("usage:", result.stdout)
        self.assertIn("exactme sweep <scenario>", result.stdout)

    def test_operation_help(self):
        result = exactme("run --help")
        self.assertEqual(result.returncode, 0)
        self.assertIn("exactme run <scenario>", result.stdout)
        self.assertIn("--threads", result.stdout)
        self.assertNotIn("exactme check <scenario>", result.stdout)

    def test_missing_scenario(self):
        result = exactme("run")
        self.assertEqual(result.returncode, 22)
        self.assertIn("'run' requires option '<scenario>'", result.stderr)

    def test_sweep_needs_values(self):
        result = exactme(f"sweep {self.decoupled()} --param grid.dt")
        self.assertEqual(result.returncode, 22)
        self.assertIn("'--values'", result.stderr)

    def test_unexpected_positional(self):
        result = exactme("frobnicate")
        self.assertEqual(result.returncode, 22)
        self.assertIn("unexpected arguments: 'frobnicate'", result.stderr)

    def test_check_valid(self):
        result = exactme(f"check {self.decoupled(tasks='u, v')}")
        self.assertEqual(result.returncode, 0)
        self.assertIn("valid, tasks: u, v", result.stderr)

    def test_check_invalid(self):
        result = exactme(f"check {self.decoupled(dt='0')}")
        self.assertEqual(result.returncode, 2)
        self.assertIn("line 10: [grid] dt: must be > 0, got 0", result.stderr)

    def test_check_unreadable(self):
        result = exactme("check /nonexistent/scenario.ini")
        self.assertEqual(result.returncode, 2)
        self.assertIn("cannot read scenario", result.stderr)

    def test_check_bundled_scenarios(self):
        for path in sorted(SCENARIOS_DIR.glob("*.ini")):
            with self.subTest(scenario=path.name):
                self.assertEqual(exactme(f"check {path}").returncode, 0)

    def test_run_decoupled_u(self):
        out = self.out_dir()
        result = exactme(f"run {self.decoupled()} --out {out}")
        self.assertEqual(result.returncode, 0)
        headers, table = read_csv(out / "u.csv")
        self.assertEqual(headers, ["t", "re_u", "im_u", "abs_u"])
        self.assertEqual(len(table), 501)
        times = table[:, 0]
        self.assertAllClose(table[:, 3], 1.0, atol=1e-10)
        self.assertAllClose(table[:, 1] + 1j * table[:, 2], np.exp(-1j * times), atol=1e-10)

    def test_run_report(self):
        out = self.out_dir()
        exactme(f"run {self.decoupled(tasks='occupation, u')} --out {out}")
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(
            list(report),
            ["exactme_version", "scenario", "output_directory", "exit_code", "strict", "tasks", "files"],
        )
        self.assertEqual(report["exit_code"], 0)
        self.assertEqual([task["name"] for task in report["tasks"]], ["u", "occupation"])
        self.assertEqual([task["status"] for task in report["tasks"]], ["ok", "ok"])
        self.assertEqual([entry["path"] for entry in report["files"]], ["u.csv", "occupation.csv"])
        for entry in report["files"]:
            digest = hashlib.sha256((out / entry["path"]).read_bytes()).hexdigest()
            self.assertEqual(entry["sha256"], digest)

    def test_csv_line_endings(self):
        out = self.out_dir()
        exactme(f"run {self.decoupled()} --out {out}")
        raw = (out / "u.csv").read_bytes()
        self.assertTrue(raw.startswith(b"t,re_u,im_u,abs_u\r\n"))

    def test_run_is_reproducible(self):
        scenario = self.write_scenario(WEAK_OHMIC)
        first, second, threaded = self.out_dir(), self.out_dir(), self.out_dir()
        self.assertEqual(exactme(f"run {scenario} --out {first}").returncode, 0)
        self.assertEqual(exactme(f"run {scenario} --out {second}").returncode, 0)
        self.assertEqual(exactme(f"run {scenario} --out {threaded} -j 3").returncode, 0)
        for name in ("u.csv", "v.csv", "coefficients.csv"):
            with self.subTest(name=name):
                self.assertEqual((first / name).read_bytes(), (second / name).read_bytes())
                _headers, single = read_csv(first / name)
                _headers, parallel = read_csv(threaded / name)
                self.assertAllClose(parallel, single, atol=1e-12)

    def test_warnings_pass_without_strict(self):
        out = self.out_dir()
        result = exactme(f"run {self.decoupled(dt='0.5')} --out {out}")
        self.assertEqual(result.returncode, 0)
        self.assertIn("does not resolve the fastest energy scale", result.stderr)

    def test_strict_fails_on_warnings(self):
        out = self.out_dir()
        result = exactme(f"run {self.decoupled(dt='0.5')} --out {out} --strict")
        self.assertEqual(result.returncode, 3)
        self.assertIn("warnings are treated as failures", result.stderr)
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(report["exit_code"], 3)
        self.assertTrue(report["strict"])

    def test_numerical_failure(self):
        scenario = self.write_scenario(
            DECOUPLED.format(dt="0.01", tasks="u, rho, occupation").replace("energy = 1", "energy = 1\ncutoff = 1"),
        )
        out = self.out_dir()
        result = exactme(f"run {scenario} --out {out}")
        self.assertEqual(result.returncode, 3)
        self.assertIn("raise the cutoff", result.stderr)
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(
            [(task["name"], task["status"]) for task in report["tasks"]],
            [("u", "ok"), ("rho", "failed"), ("occupation", "ok")],
        )

    def test_failure_skips_dependent_tasks(self):
        self.assertEqual(blocking_tasks("occupation", {"rho"}), [])
        self.assertEqual(blocking_tasks("rho", {"u", "v"}), ["u", "v"])
        self.assertEqual(blocking_tasks("spectra", {"u", "bound_states"}), ["bound_states"])
        self.assertEqual(blocking_tasks("bound_states", {"u"}), [])
        self.assertEqual(blocking_tasks("model_majorana", {"u"}), [])

    def test_run_sub_ohmic_spectra(self):
        out = self.out_dir()
        result = exactme(f"run {self.write_scenario(SUB_OHMIC_SPECTRA)} --out {out}")
        self.assertEqual(result.returncode, 0)
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        self.assertEqual(
            [(task["name"], task["status"]) for task in report["tasks"]],
            [("bound_states", "ok"), ("spectra", "ok")],
        )
        headers, table = read_csv(out / "spectra.csv")
        self.assertEqual(headers, ["energy", "j", "lamb_shift", "dissipation", "fluctuation"])
        self.assertEqual(len(table), 31)
        self.assertFalse(np.any(np.isnan(table[:, 2:4])))

    def test_run_invalid(self):
        out = self.out_dir()
        result = exactme(f"run {self.decoupled(tasks='u, bogus')} --out {out}")
        self.assertEqual(result.returncode, 2)
        self.assertIn("unknown task 'bogus'", result.stderr)
        self.assertFalse((out / "report.json").exists())

    def test_output_dir_from_environment(self):
        out = self.out_dir()
        with mock.patch.dict(os.environ, {"EXACTME_OUTPUT_DIR": str(out)}):
            result = exactme(f"run {self.decoupled()}")
        self.assertEqual(result.returncode, 0)
        self.assertTrue((out / "u.csv").exists())

    def test_sweep(self):
        out = self.out_dir()
        result = exactme(f"sweep {self.decoupled()} --param grid.dt --values 0.01,0.02 --out {out} -j 2")
        self.assertEqual(result.returncode, 0)
        self.assertIn("grid.dt = 0.01", result.stdout)
        self.assertIn("grid.dt = 0.02", result.stdout)
        _headers, fine = read_csv(out / "grid.dt=0.01" / "u.csv")
        _headers, coarse = read_csv(out / "grid.dt=0.02" / "u.csv")
        self.assertEqual(len(fine), 501)
        self.assertEqual(len(coarse), 251)
        self.assertTrue((out / "grid.dt=0.02" / "report.json").exists())

    def test_sweep_invalid_value(self):
        out = self.out_dir()
        result = exactme(f"sweep {self.decoupled()} --param grid.dt --values 0.01,-1 --out {out}")
        self.assertEqual(result.returncode, 2)
        self.assertIn("--param grid.dt: [grid] dt: must be > 0, got -1", result.stderr)
        self.assertFalse(any(out.iterdir()))

    def test_unknown_option(self):
        result = exactme(f"check {self.decoupled()} --bogus")
        self.assertEqual(result.returncode, 22)
        self.assertIn("unrecognized option: --bogus", result.stderr)

    def test_bad_threads(self):
        result = exactme(f"run {self.decoupled()} -j 0")
        self.assertEqual(result.returncode, 22)
        self.assertIn("'threads=0'", result.stderr)
