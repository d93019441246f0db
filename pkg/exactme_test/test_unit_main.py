"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
# mypy: disable-error-code=no-untyped-def

import sys
from unittest import mock

from exactme.main import OutputEncodingWrapper
from exactme_test.helpers import ExactMETestCase


class OutputEncodingWrapperTest(ExactMETestCase):

    def test_streams_are_restored(self):
        real_stdout = sys.stdout
        real_stderr = sys.stderr
        with OutputEncodingWrapper():
            print("solving")
        self.assertEqual(real_stdout, sys.stdout)
        self.assertEqual(real_stderr, sys.stderr)

    def test_unhandled_error_exits(self):
        real_stdout = sys.stdout
        real_stderr = sys.stderr
        with (
                self.assertRaises(SystemExit) as context,
                OutputEncodingWrapper(),
        ):
            raise RuntimeError("kernel exploded")  # noqa: EM101
        self.assertEqual(context.exception.code, 121)
        self.assertEqual(real_stdout, sys.stdout)
        self.assertEqual(real_stderr, sys.stderr)

    def test_ascii_streams(self):
        with mock.patch("exactme.main.DEFAULT_INPUT_ENCODING", new="ascii"):
            real_stdout = sys.stdout
            real_stderr = sys.stderr
            with OutputEncodingWrapper():
                print("solving")
            self.assertEqual(real_stdout, sys.stdout)
            self.assertEqual(real_stderr, sys.stderr)
