"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import sys
from argparse import ArgumentError, ArgumentParser, Namespace
from typing import TYPE_CHECKING

from .config import ExactMEConfig
from .i18n import EXACTME_NAME, translate, translate_many

if TYPE_CHECKING:
    from typing import Final, NoReturn

ArgSchema = list[tuple[str | None, str, None | bool | str | int, str | None]]
PossibleArgValuesTypes = list[str] | str | bool | int | None
HelpMessage = tuple[str | None, str, str | None]


class Operations:
    RUN: "Final" = "run"
    CHECK: "Final" = "check"
    SWEEP: "Final" = "sweep"


ALL_OPERATIONS: "Final[list[str]]" = [Operations.RUN, Operations.CHECK, Operations.SWEEP]

EXIT_CODE_USAGE: "Final" = 22


def print_stderr(msg: str | None = None) -> None:
    sys.stderr.write(f'{msg or ""}\n')


class ColorFlagValues:
    ALWAYS: "Final" = "always"
    NEVER: "Final" = "never"
    AUTO: "Final" = "auto"


def get_bool_opts(operation: str | None = None) -> ArgSchema:
    result: ArgSchema = [
        ("h", "help", None, translate("show this help message")),
        ("V", "version", None, translate("print version and exit")),
        (None, "debug", None, translate("print debug messages of every module")),
    ]
    if operation in (Operations.RUN, Operations.SWEEP):
        result += [
            (
                None, "strict", ExactMEConfig().run.Strict.get_bool(),
                translate("treat solver warnings as numerical failures"),
            ),
        ]
    return result


def get_str_opts(operation: str | None = None) -> ArgSchema:
    result: ArgSchema = [
        (
            None, "color", ColorFlagValues.AUTO,
            translate("colorize the output ('always', 'never' or 'auto')"),
        ),
        (
            None, "exactme-config", None,
            translate("path to custom exactme config"),
        ),
    ]
    if operation in (Operations.RUN, Operations.SWEEP):
        result += [
            (
                "o", "out", None,
                translate("directory for CSV files and the run report"),
            ),
        ]
    if operation == Operations.SWEEP:
        result += [
            (
                None, "param", None,
                translate("scenario key to sweep, as 'section.key'"),
            ),
            (
                None, "values", None,
                translate("comma-separated values for the swept key"),
            ),
        ]
    return result


def get_int_opts(operation: str | None = None) -> ArgSchema:
    result: ArgSchema = []
    if operation in (Operations.RUN, Operations.SWEEP):
        result += [
            (
                "j", "threads", ExactMEConfig().run.Threads.get_int(),
                translate("worker threads for kernels, slices and sweep points"),
            ),
        ]
    return result


ARG_DEPENDS: "Final[dict[str, list[str]]]" = {
    Operations.SWEEP: ["param", "values"],
}


class IncompatibleArgumentsError(Exception):
    pass


class MissingArgumentError(Exception):
    pass


class ExactMEArgs(Namespace):
    positional: list[str]
    raw: list[str]
    operation: str | None
    scenario: str | None
    # typehints:
    help: bool | None
    version: bool | None
    debug: bool | None
    strict: bool | None
    color: str
    out: str | None
    param: str | None
    values: str | None
    threads: int | None

    def __getattr__(self, name: str) -> PossibleArgValuesTypes:
        # options of other operations are never registered, so they read as None:
        if name.startswith("__"):
            raise AttributeError(name)
        underscored = name.replace("-", "_")
        if underscored != name:
            value: PossibleArgValuesTypes = getattr(self, underscored)
            return value
        return None

    def post_process_args(self) -> None:
        # pylint: disable=attribute-defined-outside-init
        first = self.positional[0] if self.positional else None
        self.operation = first if first in ALL_OPERATIONS else None
        self.scenario = self.positional[1] if self.operation and len(self.positional) > 1 else None

    @property
    def sweep_values(self) -> list[str]:
        return [value.strip() for value in (self.values or "").split(",") if value.strip()]

    def validate(self) -> None:
        if self.positional and not self.operation:
            raise IncompatibleArgumentsError(self.positional[0])
        if len(self.positional) > 2:  # noqa: PLR2004
            raise IncompatibleArgumentsError(*self.positional[2:])
        if self.help:
            return
        if self.operation and not self.scenario:
            raise MissingArgumentError(self.operation, "<scenario>")
        missing = [name for name in ARG_DEPENDS.get(self.operation or "", []) if not getattr(self, name)]
        if missing:
            raise MissingArgumentError(self.operation, *missing)
        if self.threads is not None and self.threads < 1:
            raise IncompatibleArgumentsError(f"threads={self.threads}")

    @classmethod
    def from_namespace(cls, namespace: Namespace, raw_args: list[str]) -> "ExactMEArgs":
        result = cls()
        result.__dict__.update(vars(namespace))
        result.raw = raw_args
        result.post_process_args()
        return result


class ExactMEArgumentParser(ArgumentParser):

    def error(self, message: str) -> "NoReturn":
        # argparse reports through here; re-raise instead of printing usage and exiting 2:
        active = sys.exc_info()[1]
        raise active if active else ArgumentError(None, message)

    def parse_exactme_args(self, raw_args: list[str]) -> ExactMEArgs:
        parsed_args, unknown_args = self.parse_known_args(raw_args)
        options = [arg for arg in unknown_args if arg.startswith("-")]
        if options:
            raise ArgumentError(None, translate("unrecognized option: {}").format(options[0]))
        parsed_args.positional.extend(unknown_args)
        return ExactMEArgs.from_namespace(parsed_args, raw_args)

    def add_schema_option(
            self,
            letter: str | None,
            opt: str,
            default: PossibleArgValuesTypes,
            *,
            action: str | None = None,
            arg_type: type | None = None,
    ) -> None:
        flags = [f"-{letter}", f"--{opt}"] if letter else [f"--{opt}"]
        if action:
            self.add_argument(*flags, action=action, default=default)
        else:
            self.add_argument(*flags, default=default, type=arg_type)


class CachedArgs:
    args: ExactMEArgs | None = None


def build_parser(args: list[str]) -> tuple[ExactMEArgumentParser, list[HelpMessage]]:
    """Only the options of the operation named in `args` are registered."""
    operation = next((arg for arg in args if arg in ALL_OPERATIONS), None)
    parser = ExactMEArgumentParser(prog=EXACTME_NAME, add_help=False)
    parser.add_argument("positional", nargs="*")

    help_msgs: list[HelpMessage] = []
    schemas: list[tuple[ArgSchema, str | None, type | None]] = [
        (get_bool_opts(operation), "store_true", None),
        (get_str_opts(operation), None, None),
        (get_int_opts(operation), None, int),
    ]
    for schema, action, arg_type in schemas:
        for letter, opt, default, help_msg in schema:
            parser.add_schema_option(letter, opt, default, action=action, arg_type=arg_type)
            help_msgs.append((letter, opt, help_msg))
    return parser, help_msgs


def _print_usage_error(message: str) -> "NoReturn":
    print_stderr(message)
    sys.exit(EXIT_CODE_USAGE)


def _parse_args(args: list[str] | None = None) -> ExactMEArgs:
    raw_args = sys.argv[1:] if args is None else args
    parser, _help_msgs = build_parser(raw_args)
    parsed_args = parser.parse_exactme_args(raw_args)
    try:
        parsed_args.validate()
    except IncompatibleArgumentsError as exc:
        unexpected = ", ".join(f"'{opt}'" for opt in exc.args)
        _print_usage_error(translate(":: error: unexpected arguments: {}.").format(unexpected))
    except MissingArgumentError as exc:
        operation, *required = exc.args
        wanted = ", ".join(f"'{opt}'" if opt.startswith("<") else f"'--{opt}'" for opt in required)
        _print_usage_error(translate_many(
            ":: error: {} requires option {}.",
            ":: error: {} requires options {}.",
            len(required),
        ).format(f"'{operation}'", wanted))
    return parsed_args


def parse_args(args: list[str] | None = None) -> ExactMEArgs:
    if CachedArgs.args is None:
        CachedArgs.args = _parse_args(args=args)
    return CachedArgs.args


def get_help() -> list[HelpMessage]:
    _parser, help_msgs = build_parser(parse_args().raw)
    return help_msgs
