"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""
from typing import TYPE_CHECKING

from .args import HelpMessage, Operations, get_help, parse_args
from .i18n import EXACTME_NAME, translate
from .pprint import print_stdout

if TYPE_CHECKING:
    from typing import Final

FIRST_COLUMN_MARGIN: "Final" = 5
FIRST_COLUMN_WIDTH: "Final" = 18


def _format_options_help(options: list[HelpMessage]) -> str:
    return "\n".join([
        "{:>{first_column_margin}} {:<{first_column_width}} {}".format(
            short_opt and ("-" + short_opt + ",") or "",
            long_opt and ("--" + long_opt) or "",
            descr if (
                (len(short_opt or "") + 1 + len(long_opt) + 2) < FIRST_COLUMN_WIDTH
            ) else f"\n{(FIRST_COLUMN_MARGIN + FIRST_COLUMN_WIDTH + 2) * ' '}{descr}",
            first_column_margin=FIRST_COLUMN_MARGIN,
            first_column_width=FIRST_COLUMN_WIDTH,
        )
        for short_opt, long_opt, descr in options
        if descr
    ])


def _usage(operation: str | None) -> str:
    usages = {
        Operations.RUN: translate("{} run <scenario> [options]"),
        Operations.CHECK: translate("{} check <scenario> [options]"),
        Operations.SWEEP: translate(
            "{} sweep <scenario> --param <section.key> --values <v1,v2,...> [options]",
        ),
    }
    selected = [usages[operation]] if operation in usages else list(usages.values())
    return translate("usage:") + "\n" + "\n".join(
        "    " + usage.format(EXACTME_NAME) for usage in selected
    )


def cli_print_help() -> None:
    args = parse_args()
    description = translate(
        "Exact master equations for Fano-Anderson open systems: "
        "Green functions, master-equation coefficients, bound states and memory measures.",
    )
    options_help = get_help()
    print_stdout("".join([
        _usage(args.operation),
        "" if args.operation else "\n\n" + description,
        "\n\n" + translate("options:") + "\n" if options_help else "",
        _format_options_help(options_help),
    ]))
