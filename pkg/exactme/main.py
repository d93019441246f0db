"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import io
import signal
import sys
import traceback
from argparse import ArgumentError
from contextlib import AbstractContextManager, nullcontext
from typing import TYPE_CHECKING

from .args import EXIT_CODE_USAGE, Operations, parse_args
from .config import VERSION, ExactMEConfig
from .core import DEFAULT_INPUT_ENCODING
from .exceptions import SysExit
from .help_cli import cli_print_help
from .i18n import EXACTME_NAME, translate
from .logging import create_logger
from .pprint import print_stderr, print_stdout
from .run_cli import cli_check, cli_run, cli_sweep

if TYPE_CHECKING:
    from collections.abc import Callable
    from types import FrameType, TracebackType
    from typing import Final, NoReturn, TextIO


logger = create_logger("main")


EXIT_CODE_UNHANDLED: "Final" = 121
EXIT_CODE_INTERRUPTED: "Final" = 125
STREAMS: "Final" = ("stdout", "stderr")


class OutputEncodingWrapper(AbstractContextManager[None]):
    """
    Reopens stdout and stderr in UTF-8 for the duration of a CLI call.

    Anything other than SysExit escaping the block is printed with its traceback
    and turned into EXIT_CODE_UNHANDLED.
    """

    original_stdout: "TextIO"
    original_stderr: "TextIO"

    def _reopen(self, name: str) -> None:
        stream = getattr(sys, name)
        if stream.encoding == DEFAULT_INPUT_ENCODING:
            return
        stream.flush()
        try:
            reopened = open(  # noqa: SIM115,PTH123
                stream.fileno(), mode="w", encoding=DEFAULT_INPUT_ENCODING, closefd=False,
            )
        except io.UnsupportedOperation as exc:
            logger.debug("{} stays in {}: {}", name, stream.encoding, exc, lock=False)
            return
        setattr(self, f"original_{name}", stream)
        setattr(sys, name, reopened)

    def _restore(self, name: str) -> None:
        original = getattr(self, f"original_{name}", None)
        current = getattr(sys, name)
        if original is None or original is current:
            return
        current.flush()
        setattr(sys, name, original)
        current.close()
        logger.debug("{} restored", name, lock=False)

    def __enter__(self) -> None:
        for name in STREAMS:
            self._reopen(name)

    def __exit__(
            self,
            exc_class: type[BaseException] | None,
            exc_instance: BaseException | None,
            exc_tb: "TracebackType | None",
    ) -> None:
        try:
            if exc_instance is not None and exc_class not in (SysExit, SystemExit):
                if exc_tb:
                    print_stderr("".join(traceback.format_tb(exc_tb)), lock=False)
                print_stderr(f"{type(exc_instance).__name__}: {exc_instance}", lock=False)
                sys.exit(EXIT_CODE_UNHANDLED)
        finally:
            for name in STREAMS:
                self._restore(name)


def cli_print_version() -> None:
    print_stdout(f"{EXACTME_NAME} v{VERSION}")


OPERATIONS: "Final[dict[str | None, Callable[[], None]]]" = {
    Operations.RUN: cli_run,
    Operations.CHECK: cli_check,
    Operations.SWEEP: cli_sweep,
}


def cli_entry_point() -> None:
    args = parse_args()
    operation: Callable[[], None]
    if args.help:
        operation = cli_print_help
    elif args.version:
        operation = cli_print_version
    else:
        operation = OPERATIONS.get(args.operation, cli_print_help)
    logger.debug("{} handles {}", operation.__name__, args.raw)
    operation()


def create_handle_stop(reason: str = "SIGINT") -> "Callable[[int, FrameType | None], NoReturn]":
    def handle_stop(_sig: int, _frame: "FrameType | None") -> "NoReturn":  # pragma: no cover
        if parse_args().debug:
            raise KeyboardInterrupt
        print_stderr("\n\n" + translate("Canceled by user ({})").format(reason), lock=False)
        raise SysExit(EXIT_CODE_INTERRUPTED)
    return handle_stop


def install_signal_handlers() -> None:
    signal.signal(signal.SIGPIPE, signal.SIG_DFL)
    signal.signal(signal.SIGINT, create_handle_stop())
    signal.signal(signal.SIGTERM, create_handle_stop("SIGTERM"))


def main(*, embed: bool = False) -> None:
    """CLI entry; `embed` keeps the caller's streams and signal handlers (used by the tests)."""
    wrapper: AbstractContextManager[None] = nullcontext() if embed else OutputEncodingWrapper()
    with wrapper:
        try:
            parse_args()
        except ArgumentError as exc:
            print_stderr(exc)
            sys.exit(EXIT_CODE_USAGE)

        # read the config once here so worker threads never race on creating it:
        ExactMEConfig.get_config()

        if not embed:
            install_signal_handlers()

        try:
            cli_entry_point()
        except BrokenPipeError:
            sys.exit(0)
        except SysExit as exc:
            sys.exit(exc.code)
        sys.exit(0)


if __name__ == "__main__":
    main()
