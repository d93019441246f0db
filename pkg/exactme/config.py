"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import configparser
import os
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from .i18n import EXACTME_NAME, translate

if TYPE_CHECKING:
    from collections.abc import Callable
    from typing import Any, Final, NotRequired

    from typing_extensions import TypedDict

    class ConfigValueType(TypedDict):
        data_type: str
        default: NotRequired[str]
        minimum: NotRequired[float]


VERSION: "Final" = "0.1.0"

DEFAULT_CONFIG_ENCODING: "Final" = "utf-8"
CONFIG_OPTION: "Final" = "--exactme-config"
OUTPUT_DIR_ENV_VAR: "Final" = "EXACTME_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR: "Final" = "exactme_output"
BOOL: "Final" = "bool"
INT: "Final" = "int"
STR: "Final" = "str"
FLOAT: "Final" = "float"
NUMERIC_TYPES: "Final" = (INT, FLOAT)
CONFIG_YES_VALUES: "Final" = ("yes", "y", "true", "1")


def option_from_argv(option: str, fallback: str) -> str:
    """
    Peeks at one `--option value` or `--option=value` pair before argparse runs.

    The config file has to be known before the parser is built,
    because option defaults come from it.
    """
    for position, arg in enumerate(sys.argv):
        if arg == option and position + 1 < len(sys.argv):
            return sys.argv[position + 1]
        prefix, separator, value = arg.partition("=")
        if separator and prefix == option:
            return value
    return fallback


class ConfigPath:
    """`--exactme-config`, else `$XDG_CONFIG_HOME/exactme.conf`, else `~/.config/exactme.conf`."""

    def __call__(self) -> Path:
        overridden = option_from_argv(CONFIG_OPTION, "")
        if overridden:
            return Path(overridden)
        config_home = os.environ.get("XDG_CONFIG_HOME") or Path.home() / ".config"
        return Path(config_home) / f"{EXACTME_NAME}.conf"


class OutputRoot:
    """
    Default output directory: environment first, then the user config, then the cwd.

    An explicit `--out` always wins and is handled by the caller.
    """

    def __call__(self) -> Path:
        return Path(
            os.environ.get(OUTPUT_DIR_ENV_VAR)
            or ExactMEConfig().output.Directory.get_str()
            or DEFAULT_OUTPUT_DIR,
        )


ConfigSchemaT = dict[str, dict[str, "ConfigValueType"]]


CONFIG_SCHEMA: ConfigSchemaT = {
    "solver": {
        "QuadratureOrder": {
            "data_type": INT,
            "default": "16",
            "minimum": 4,
        },
        "QuadratureTolerance": {
            "data_type": FLOAT,
            "default": "1e-10",
            "minimum": 0,
        },
        "LambShiftLimit": {
            "data_type": INT,
            "default": "200",
            "minimum": 50,
        },
        "CutoffPopulation": {
            "data_type": FLOAT,
            "default": "1e-8",
            "minimum": 0,
        },
        "VCrossCheckTolerance": {
            "data_type": FLOAT,
            "default": "1e-3",
            "minimum": 0,
        },
    },
    "output": {
        "Directory": {
            "data_type": STR,
            "default": "",
        },
        "Anchors": {
            "data_type": INT,
            "default": "8",
            "minimum": 1,
        },
        "SpectrumPoints": {
            "data_type": INT,
            "default": "400",
            "minimum": 2,
        },
    },
    "run": {
        "Threads": {
            "data_type": INT,
            "default": "1",
            "minimum": 1,
        },
        "Strict": {
            "data_type": BOOL,
            "default": "no",
        },
    },
}


def schema_type(section_name: str, key_name: str) -> str | None:
    entry = CONFIG_SCHEMA.get(section_name, {}).get(key_name)
    return entry["data_type"] if entry else None


def add_missing_defaults(config: configparser.ConfigParser) -> bool:
    """Returns True when anything had to be added."""
    added = False
    for section_name, options in CONFIG_SCHEMA.items():
        if not config.has_section(section_name):
            config.add_section(section_name)
        section = config[section_name]
        for option_name, option_schema in options.items():
            if option_name in section:
                continue
            section[option_name] = option_schema.get("default", "")
            added = True
    return added


def save_config(config: configparser.ConfigParser) -> None:
    config_path = ConfigPath()()
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with config_path.open("w", encoding=DEFAULT_CONFIG_ENCODING) as config_file:
        config.write(config_file)


def str_to_bool(value: str) -> bool:
    return value.lower() in CONFIG_YES_VALUES


class ExactMEConfigItem:
    """One raw config value; the typed getters refuse keys whose schema type differs."""

    def __init__(self, section: configparser.SectionProxy, key: str) -> None:
        self.section = section
        self.key = key
        self.value = section.get(key)

    def _typed(self, typeof: str, convert: "Callable[[str], Any]") -> "Any":
        if schema_type(self.section.name, self.key) != typeof:
            wrong_type = translate("{key} is not '{typeof}'").format(key=self.key, typeof=typeof)
            raise TypeError(wrong_type)
        return convert(self.value)

    def get_bool(self) -> bool:
        return bool(self._typed(BOOL, str_to_bool))

    def get_int(self) -> int:
        return int(self._typed(INT, int))

    def get_float(self) -> float:
        return float(self._typed(FLOAT, float))

    def get_str(self) -> str:
        return str(self._typed(STR, str))

    def __str__(self) -> str:
        return self.get_str()

    def __eq__(self, other: "Any") -> bool:
        return bool(self.get_str() == other)


class ExactMEConfigSection:

    def __init__(self, section: configparser.SectionProxy) -> None:
        self.section = section

    def __getattr__(self, key: str) -> ExactMEConfigItem:
        return ExactMEConfigItem(self.section, key)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} [{self.section.name}]>"


class ExactMEConfig:
    """`ExactMEConfig().solver.QuadratureOrder.get_int()`; the file is read once per process."""

    _config: configparser.ConfigParser | None = None

    @classmethod
    def get_config(cls) -> configparser.ConfigParser:
        if cls._config is None:
            config = configparser.ConfigParser()
            config.read(ConfigPath()(), encoding=DEFAULT_CONFIG_ENCODING)
            if add_missing_defaults(config):
                save_config(config)
            cls.validate_config(config)
            cls._config = config
        return cls._config

    @classmethod
    def validate_config(cls, config: configparser.ConfigParser) -> None:
        for section_name, options in CONFIG_SCHEMA.items():
            for option_name, option_schema in options.items():
                data_type = option_schema["data_type"]
                if data_type not in NUMERIC_TYPES:
                    continue
                raw_value = config[section_name][option_name]
                where = {
                    "section": section_name, "option": option_name,
                    "value": raw_value, "path": ConfigPath()(),
                }
                try:
                    value = float(raw_value) if data_type == FLOAT else int(raw_value)
                except ValueError as exc:
                    not_a_number = translate("[{section}]{option}={value} in {path} is not '{typeof}'")
                    raise TypeError(not_a_number.format(typeof=data_type, **where)) from exc
                minimum = option_schema.get("minimum")
                if minimum is not None and value < minimum:
                    too_small = translate("[{section}]{option}={value} in {path} is below {minimum}")
                    raise ValueError(too_small.format(minimum=minimum, **where))

    @classmethod
    def reset(cls) -> None:
        cls._config = None

    def __getattr__(self, section_name: str) -> ExactMEConfigSection:
        return ExactMEConfigSection(self.get_config()[section_name])
