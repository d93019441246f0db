"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def

from unittest import mock

from exactme.args import CachedArgs, ColorFlagValues, ExactMEArgs
from exactme.logging import MODULE_COLORS, create_logger
from exactme.lock import FancyLock
from exactme.pprint import Color, PrintLock, bold_line, color_line, print_error, print_warning
from exactme.progressbar import ProgressBar, ThreadSafeProgressBar
from exactme_test.helpers import ExactMETestCase, TextCapture


def cli_args(*, color: str = ColorFlagValues.NEVER, debug: bool = False) -> ExactMEArgs:
    args = ExactMEArgs()
    args.color = color
    args.debug = debug
    return args


class ColorTest(ExactMETestCase):

    def test_escape_codes(self):
        self.assertEqual(Color.GREEN.escape, "\033[032m")
        self.assertEqual(Color.BRIGHT_GREEN.escape, "\033[0;1m\033[032m")

    def test_forced(self):
        with mock.patch.object(CachedArgs, "args", cli_args()):
            self.assertEqual(color_line("ok", Color.RED, force=True), "\033[031mok\033[0;0m")
            self.assertEqual(color_line("ok", Color.RED, force=True, reset=False), "\033[031mok")

    def test_never(self):
        with mock.patch.object(CachedArgs, "args", cli_args()):
            self.assertEqual(color_line("ok", Color.RED), "ok")
            self.assertEqual(bold_line("ok"), "ok")

    def test_always(self):
        with mock.patch.object(CachedArgs, "args", cli_args(color=ColorFlagValues.ALWAYS)):
            self.assertEqual(bold_line("ok"), "\033[0;1mok\033[0;0m")

    def test_prefixes(self):
        stderr = TextCapture()
        with mock.patch.object(CachedArgs, "args", cli_args()), mock.patch("sys.stderr", new=stderr):
            print_warning("coarse grid")
            print_error("no bound state")
        self.assertEqual(stderr.getvalue(), ":: warning: coarse grid\n:: error: no bound state\n")


class LoggerTest(ExactMETestCase):

    def test_silent_without_debug(self):
        stderr = TextCapture()
        logger = create_logger("greens")
        with mock.patch.object(CachedArgs, "args", cli_args()), mock.patch("sys.stderr", new=stderr):
            logger.debug("step {}", 3)
        self.assertEqual(stderr.getvalue(), "")

    def test_debug_line(self):
        stderr = TextCapture()
        logger = create_logger("greens")
        with (
                mock.patch.object(CachedArgs, "args", cli_args(debug=True)),
                mock.patch("sys.stderr", new=stderr),
        ):
            logger.debug("step {} of {}", 3, 10)
        self.assertEqual(stderr.getvalue(), ":: debug: greens: step 3 of 10\n")

    def test_palette_skips_reserved_colors(self):
        self.assertNotIn(Color.CYAN, MODULE_COLORS)
        self.assertNotIn(Color.BRIGHT_RED, MODULE_COLORS)
        self.assertNotIn(Color.BRIGHT_YELLOW, MODULE_COLORS)


class ProgressBarTest(ExactMETestCase):

    def test_disabled_bar_counts_silently(self):
        stderr = TextCapture()
        with mock.patch.object(CachedArgs, "args", cli_args()), mock.patch("sys.stderr", new=stderr):
            bar = ProgressBar(length=7)
            for _step in range(7):
                bar.update()
            bar.close()
        self.assertEqual(bar.steps, 7)
        self.assertEqual(stderr.getvalue(), "")

    def test_enabled_bar_fills(self):
        stderr = TextCapture()
        with (
                mock.patch.object(CachedArgs, "args", cli_args(color=ColorFlagValues.ALWAYS)),
                mock.patch("sys.stderr", new=stderr),
                mock.patch("exactme.progressbar.get_term_width", return_value=12),
        ):
            bar = ThreadSafeProgressBar.get(progressbar_length=20, progressbar_id="test")
            self.assertIs(ThreadSafeProgressBar.get(progressbar_length=20, progressbar_id="test"), bar)
            for _step in range(20):
                bar.update()
            ThreadSafeProgressBar.finish("test")
        self.assertEqual(bar.width, 10)
        self.assertEqual(bar.drawn, 10)
        self.assertEqual(stderr.getvalue().count("#"), 10)
        self.assertTrue(stderr.getvalue().startswith("[----------]"))
        self.assertTrue(stderr.getvalue().endswith("\n"))


class FancyLockTest(ExactMETestCase):

    def test_one_lock_per_subclass(self):
        class OtherLock(FancyLock):
            pass

        self.assertIs(PrintLock().fancy_lock, PrintLock().fancy_lock)
        self.assertIsNot(PrintLock.get_lock(), OtherLock.get_lock())
        with PrintLock(), PrintLock():
            self.assertTrue(OtherLock.get_lock().acquire(blocking=False))
            OtherLock.get_lock().release()
