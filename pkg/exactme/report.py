"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import csv
import hashlib
import json
import math
from typing import TYPE_CHECKING

import numpy as np

from .config import VERSION
from .core import DEFAULT_INPUT_ENCODING, DataType, mkdir

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path
    from typing import Any, Final

    import numpy.typing as npt


CSV_LINE_TERMINATOR: "Final" = "\r\n"
REPORT_FILE_NAME: "Final" = "report.json"


class TaskStatus:
    OK: "Final" = "ok"
    FAILED: "Final" = "failed"
    SKIPPED: "Final" = "skipped"


class ExitCode:
    SUCCESS: "Final" = 0
    VALIDATION: "Final" = 2
    NUMERICAL: "Final" = 3


def format_value(value: "Any", precision: int = 0) -> str:
    """Shortest round-trip repr for floats, or `precision` significant digits."""
    if isinstance(value, bool | np.bool_):
        return "1" if value else "0"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        number = float(value)
        if precision and math.isfinite(number):
            return f"{number:.{precision}g}"
        return repr(number)
    if value is None:
        return ""
    return str(value)


def matrix_columns(
        name: str, values: "npt.NDArray[np.generic]",
) -> tuple[list[str], list["npt.NDArray[np.generic]"]]:
    """re_/im_ columns of a (steps, N, N) series; indices are dropped for a single level."""
    headers = []
    columns = []
    _count, rows, cols = values.shape
    for row in range(rows):
        for column in range(cols):
            suffix = "" if rows == cols == 1 else f"_{row}_{column}"
            entry = values[:, row, column]
            headers += [f"re_{name}{suffix}", f"im_{name}{suffix}"]
            columns += [np.real(entry), np.imag(entry)]
    return headers, columns


def write_csv(
        path: "Path",
        headers: "Sequence[str]",
        columns: "Sequence[npt.ArrayLike]",
        precision: int = 0,
) -> None:
    mkdir(path.parent)
    table = [list(np.asarray(column).tolist()) for column in columns]
    with path.open("w", encoding=DEFAULT_INPUT_ENCODING, newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator=CSV_LINE_TERMINATOR)
        writer.writerow(headers)
        for row in zip(*table, strict=True):
            writer.writerow([format_value(value, precision) for value in row])


def sha256_of(path: "Path") -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TaskReport(DataType):
    name: str
    status: str
    wall_time: float
    warnings: list[str]
    files: list[str]
    error: str | None = None

    def as_dict(self) -> dict[str, "Any"]:
        return {
            "name": self.name,
            "status": self.status,
            "wall_time": round(self.wall_time, 6),
            "warnings": self.warnings,
            "files": self.files,
            "error": self.error,
        }


class RunReport(DataType):
    scenario: str
    output_directory: str
    tasks: list[TaskReport]
    checksums: dict[str, str]
    exit_code: int = ExitCode.SUCCESS
    strict: bool = False

    @property
    def warnings(self) -> list[str]:
        return [warning for task in self.tasks for warning in task.warnings]

    def add_file(self, task: TaskReport, path: "Path", root: "Path") -> None:
        name = path.relative_to(root).as_posix()
        task.files.append(name)
        self.checksums[name] = sha256_of(path)

    def as_dict(self) -> dict[str, "Any"]:
        return {
            "exactme_version": VERSION,
            "scenario": self.scenario,
            "output_directory": self.output_directory,
            "exit_code": self.exit_code,
            "strict": self.strict,
            "tasks": [task.as_dict() for task in self.tasks],
            "files": [
                {"path": name, "sha256": checksum}
                for name, checksum in self.checksums.items()
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, ensure_ascii=False) + "\n"

    def write(self, directory: "Path") -> "Path":
        mkdir(directory)
        path = directory / REPORT_FILE_NAME
        path.write_text(self.to_json(), encoding=DEFAULT_INPUT_ENCODING)
        return path
