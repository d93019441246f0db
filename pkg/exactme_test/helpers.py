"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import contextlib
import io
import os
import sys
import tempfile
import traceback
from pathlib import Path
from time import monotonic
from typing import TYPE_CHECKING
from unittest import TestCase, mock

import numpy as np

from exactme.args import CachedArgs
from exactme.main import main
from exactme.pprint import Color, color_line, get_term_width

if TYPE_CHECKING:
    from typing import NoReturn
    from unittest import TestResult

    import numpy.typing as npt


TEST_DIR = Path(os.path.realpath(__file__)).parent
SCENARIOS_DIR = TEST_DIR.parent / "scenarios"


def log_stderr(line: str) -> None:
    stream = sys.__stderr__ or sys.stderr
    stream.write(line + "\n")
    stream.flush()


class CmdResult:

    def __init__(self, returncode: int | None, stdout: str = "", stderr: str = "") -> None:
        self.returncode = returncode
        self.stdout = stdout
        self.stderr = stderr

    def __repr__(self) -> str:
        return f"<{self.returncode}>:\n{self.stderr}\n{self.stdout}\n"


class FakeExit(Exception):  # noqa: N818
    pass


class TextCapture(io.StringIO):

    def isatty(self) -> bool:
        return False


class InterceptSysOutput(contextlib.ExitStack):
    """Captures stdout/stderr and turns `sys.exit()` into a recorded return code."""

    returncode: int | None = None

    def __init__(self, *, capture_stdout: bool = True, capture_stderr: bool = True) -> None:
        super().__init__()
        self.stdout = TextCapture()
        self.stderr = TextCapture()
        self.capture_stdout = capture_stdout
        self.capture_stderr = capture_stderr

    def _fake_exit(self, code: int = 0) -> "NoReturn":
        self.returncode = code
        raise FakeExit

    def __enter__(self) -> "InterceptSysOutput":
        super().__enter__()
        if self.capture_stdout:
            self.enter_context(mock.patch("sys.stdout", new=self.stdout))
        if self.capture_stderr:
            self.enter_context(mock.patch("sys.stderr", new=self.stderr))
        self.enter_context(mock.patch("sys.exit", new=self._fake_exit))
        return self


def exactme(
        cmd: str,
        *,
        capture_stdout: bool = True,
        capture_stderr: bool = True,
        print_on_fails: bool = False,
) -> CmdResult:
    """Runs the CLI in-process, like `exactme <cmd>` from a shell."""
    argv = ["exactme", *cmd.split(" ")]
    log_stderr(color_line("\n => ", Color.BRIGHT_GREEN, force=True) + " ".join(argv))

    intercepted = InterceptSysOutput(capture_stdout=capture_stdout, capture_stderr=capture_stderr)
    try:
        with intercepted, contextlib.suppress(FakeExit), mock.patch("sys.argv", new=argv):
            CachedArgs.args = None
            main(embed=True)
    except Exception as exc:
        log_stderr(f"{exc}\n{traceback.format_exc()}")
    finally:
        CachedArgs.args = None

    result = CmdResult(
        returncode=intercepted.returncode,
        stdout=intercepted.stdout.getvalue(),
        stderr=intercepted.stderr.getvalue(),
    )
    if print_on_fails and result.returncode != 0:
        log_stderr(repr(result))
    return result


class ExactMETestCase(TestCase):
    # pylint: disable=invalid-name

    separator = color_line(f"\n{'-' * get_term_width()}", Color.BRIGHT_BLUE, force=True)

    def run(self, result: "TestResult | None" = None) -> "TestResult | None":
        started = monotonic()
        log_stderr(self.separator)
        result = super().run(result)
        log_stderr(f":: Took {(monotonic() - started):.2f} seconds")
        return result

    def assertAllClose(  # noqa: N802
            self,
            actual: "npt.ArrayLike",
            expected: "npt.ArrayLike",
            *,
            atol: float = 0.0,
            rtol: float = 0.0,
            msg: str | None = None,
    ) -> None:
        actual_array = np.asarray(actual)
        expected_array = np.asarray(expected)
        if np.allclose(actual_array, expected_array, atol=atol, rtol=rtol):
            return
        worst = float(np.max(np.abs(actual_array - expected_array)))
        self.fail(msg or f"arrays differ by up to {worst:.3e} (atol={atol}, rtol={rtol})")

    def write_scenario(self, text: str, name: str = "scenario.ini") -> Path:
        path = Path(tempfile.mkdtemp(prefix="exactme_scenario_")) / name
        path.write_text(text, encoding="utf-8")
        return path
