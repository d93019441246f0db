"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

import configparser
import functools
import math
from pathlib import Path
from typing import TYPE_CHECKING

import numpy as np

from .config import BOOL, FLOAT, INT, STR, ExactMEConfig, str_to_bool
from .core import DEFAULT_INPUT_ENCODING, DataType, Statistics
from .exceptions import VALIDATION_ERRORS, ScenarioError
from .fock import (
    DensityMatrix,
    FockBasis,
    coherent_state,
    default_cutoff,
    fock_state,
    occupation_state,
    thermal_state,
)
from .greens import TimeGrid
from .i18n import translate
from .logging import create_logger
from .models import ModelKind, SpecialModel
from .spectral import (
    FlatBandDensity,
    GappedBandDensity,
    LorentzianDensity,
    OhmicDensity,
    Reservoir,
    SystemSpec,
    TabulatedDensity,
    ZeroDensity,
)

if TYPE_CHECKING:
    from collections.abc import Callable
    from typing import Any, Final, NotRequired

    import numpy.typing as npt
    from typing_extensions import TypedDict

    from .spectral import SpectralDensity

    class ScenarioValueType(TypedDict):
        data_type: str
        default: NotRequired[str]
        minimum: NotRequired[float]
        above: NotRequired[float]
        choices: NotRequired[list[str]]


logger = create_logger("scenario")


LIST: "Final" = "list"
RESERVOIR_SECTION: "Final" = "reservoir"
MODEL_TASK_PREFIX: "Final" = "model:"
SIMPLE_TASKS: "Final" = (
    "u", "v", "coefficients", "rho", "occupation", "bound_states", "spectra", "measure",
)
SCALAR_ONLY_TASKS: "Final" = ("bound_states", "spectra", "measure")
DENSITY_KINDS: "Final[dict[str, tuple[str, ...]]]" = {
    "none": (),
    "ohmic": ("coupling", "exponent", "cutoff"),
    "lorentzian": ("coupling", "center", "width"),
    "flat": ("rate", "lower", "upper"),
    "tabulated": ("file",),
    "gapped": ("bands",),
}
DENSITY_KEYS: "Final" = frozenset(key for keys in DENSITY_KINDS.values() for key in keys)
BOSON_STATES: "Final" = ("fock", "coherent", "thermal")
FERMION_STATES: "Final" = ("occupation",)
MODEL_STATES: "Final" = ("ground", "excited", "superposition")
DEFAULT_FIRST_ANCHOR: "Final" = 1.0
DEFAULT_MAX_LAG: "Final" = 20.0
GRID_MATCH_TOLERANCE: "Final" = 1e-9


ScenarioSchemaT = dict[str, dict[str, "ScenarioValueType"]]


SCENARIO_SCHEMA: ScenarioSchemaT = {
    "system": {
        "statistics": {"data_type": STR, "choices": ["boson", "fermion"]},
        "energy": {"data_type": STR},
        "unit": {"data_type": FLOAT, "default": "1", "above": 0},
        "initial": {"data_type": STR, "default": "", "choices": ["", *BOSON_STATES, *FERMION_STATES]},
        "initial_value": {"data_type": LIST, "default": ""},
        "cutoff": {"data_type": INT, "default": "0", "minimum": 0},
    },
    RESERVOIR_SECTION: {
        "statistics": {"data_type": STR, "default": "", "choices": ["", "boson", "fermion"]},
        "kind": {"data_type": STR, "choices": list(DENSITY_KINDS)},
        "temperature": {"data_type": FLOAT, "default": "0", "minimum": 0},
        "chemical_potential": {"data_type": FLOAT, "default": "0"},
        "weight": {"data_type": STR, "default": "1"},
        "coupling": {"data_type": FLOAT, "minimum": 0},
        "exponent": {"data_type": FLOAT, "above": 0},
        "cutoff": {"data_type": FLOAT, "above": 0},
        "center": {"data_type": FLOAT},
        "width": {"data_type": FLOAT, "above": 0},
        "rate": {"data_type": FLOAT, "minimum": 0},
        "lower": {"data_type": FLOAT},
        "upper": {"data_type": FLOAT},
        "file": {"data_type": STR},
        "bands": {"data_type": LIST},
    },
    "grid": {
        "t_max": {"data_type": FLOAT, "above": 0},
        "dt": {"data_type": FLOAT, "above": 0},
        "v_stride": {"data_type": INT, "default": "1", "minimum": 1},
        "quadrature_order": {"data_type": INT, "default": "0", "minimum": 0},
    },
    "run": {
        "tasks": {"data_type": LIST},
    },
    "correlations": {
        "anchors": {"data_type": INT, "default": "0", "minimum": 0},
        "first_anchor": {"data_type": FLOAT, "default": str(DEFAULT_FIRST_ANCHOR), "above": 0},
        "max_lag": {"data_type": FLOAT, "default": str(DEFAULT_MAX_LAG), "above": 0},
    },
    "spectra": {
        "points": {"data_type": INT, "default": "0", "minimum": 0},
        "lower": {"data_type": FLOAT, "default": "nan"},
        "upper": {"data_type": FLOAT, "default": "nan"},
        "steady_time": {"data_type": FLOAT, "default": "nan"},
    },
    "model": {
        "initial": {"data_type": STR, "default": "superposition", "choices": list(MODEL_STATES)},
    },
    "output": {
        "directory": {"data_type": STR, "default": ""},
        "precision": {"data_type": INT, "default": "0", "minimum": 0},
        "cross_check": {"data_type": BOOL, "default": "yes"},
    },
}


def lag_count(max_lag: float, dt: float) -> int:
    """Whole steps of dt that fit into max_lag."""
    return math.floor(max_lag / dt + GRID_MATCH_TOLERANCE)


def schema_name(section: str) -> str:
    if section == RESERVOIR_SECTION or section.startswith(RESERVOIR_SECTION + "."):
        return RESERVOIR_SECTION
    return section


class SpectraSettings(DataType):
    points: int
    lower: float
    upper: float
    steady_time: float

    @property
    def energies(self) -> "npt.NDArray[np.float64]":
        return np.linspace(self.lower, self.upper, self.points)


class Scenario(DataType):
    """A validated run: the system, its grid, initial state and the tasks to emit."""

    source: str
    system: SystemSpec
    grid: TimeGrid
    tasks: list[str]
    unit: float
    quadrature_order: int | None
    v_stride: int
    initial_kind: str
    initial_values: list[float]
    cutoff: int
    anchor_times: list[float]
    max_lag: float
    spectra: SpectraSettings
    model_initial: str
    output_directory: str
    precision: int
    cross_check: bool

    @property
    def model_kinds(self) -> list[ModelKind]:
        return [
            ModelKind.from_name(task.removeprefix(MODEL_TASK_PREFIX))
            for task in self.tasks if task.startswith(MODEL_TASK_PREFIX)
        ]

    def initial_occupation(self) -> "npt.NDArray[np.complex128]":
        """<a_i^+ a_j> at t = 0 for the Green-function occupation formula."""
        if self.system.statistics is Statistics.FERMION:
            return np.diag(self.initial_values).astype(np.complex128)
        value = self.initial_values[0]
        if self.initial_kind == "coherent":
            value = value ** 2
        return np.eye(self.system.dimension, dtype=np.complex128) * value

    def initial_state(self) -> DensityMatrix:
        if self.system.statistics is Statistics.FERMION:
            return occupation_state(FockBasis.fermion(self.system.dimension), self.initial_values)
        basis = FockBasis.boson(self.cutoff)
        value = self.initial_values[0]
        if self.initial_kind == "coherent":
            return coherent_state(basis, value)
        if self.initial_kind == "thermal":
            return thermal_state(basis, value)
        return fock_state(basis, round(value))

    def model(self, kind: ModelKind) -> SpecialModel:
        return SpecialModel(kind, bath=self.system.reservoirs[0], splitting=self.system.level)

    def model_state(self) -> "npt.NDArray[np.complex128]":
        if self.model_initial == "ground":
            return np.diag([1, 0]).astype(np.complex128)
        if self.model_initial == "excited":
            return np.diag([0, 1]).astype(np.complex128)
        return np.full((2, 2), 0.5, dtype=np.complex128)

    def anchor_steps(self) -> list[int]:
        return sorted({self.grid.index_of(time) for time in self.anchor_times})

    def lag_steps(self) -> list[int]:
        return list(range(lag_count(self.max_lag, self.grid.dt) + 1))


class LineIndex:
    """Line numbers of section headers and keys, for diagnostics configparser cannot anchor."""

    COMMENT_PREFIXES: "Final" = ("#", ";")
    KEY_VALUE_DELIMITERS: "Final" = ("=", ":")

    def __init__(self, text: str) -> None:
        self.sections: dict[str, int] = {}
        self.keys: dict[tuple[str, str], int] = {}
        section = None
        for number, raw_line in enumerate(text.splitlines(), start=1):
            line = raw_line.strip()
            if not line or line.startswith(self.COMMENT_PREFIXES) or raw_line[:1].isspace():
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                self.sections.setdefault(section, number)
                continue
            positions = [line.find(delimiter) for delimiter in self.KEY_VALUE_DELIMITERS]
            positions = [position for position in positions if position > 0]
            if section is not None and positions:
                key = line[:min(positions)].strip().lower()
                self.keys.setdefault((section, key), number)

    def where(self, section: str, key: str | None = None) -> str:
        if key is not None and (section, key) in self.keys:
            return translate("line {}").format(self.keys[section, key])
        if section in self.sections:
            return translate("line {}").format(self.sections[section])
        return translate("end of file")


class ScenarioReader:

    def __init__(
            self,
            parser: configparser.ConfigParser,
            lines: LineIndex,
            overrides: dict[tuple[str, str], str],
    ) -> None:
        self.parser = parser
        self.lines = lines
        self.overrides = overrides
        self.diagnostics: list[str] = []

    def report(self, section: str, key: str | None, message: str) -> None:
        if key is not None and (section, key) in self.overrides:
            location = f"--param {section}.{key}"
        else:
            location = self.lines.where(section, key)
        target = f"[{section}]" if key is None else f"[{section}] {key}"
        self.diagnostics.append(f"{location}: {target}: {message}")

    def has(self, section: str, key: str) -> bool:
        return self.parser.has_option(section, key)

    def raw(self, section: str, key: str) -> str | None:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        default = SCENARIO_SCHEMA[schema_name(section)][key].get("default")
        return default

    def get(self, section: str, key: str) -> "Any":
        """Typed, range-checked value; None (with a diagnostic) if missing or invalid."""
        schema = SCENARIO_SCHEMA[schema_name(section)][key]
        raw_value = self.raw(section, key)
        if raw_value is None:
            self.report(section, key, translate("required key is missing"))
            return None
        data_type = schema["data_type"]
        try:
            value = self._convert(raw_value, data_type)
        except ValueError:
            self.report(section, key, translate("'{}' is not a valid {}").format(raw_value, data_type))
            return None
        if data_type in (INT, FLOAT) and not (isinstance(value, float) and math.isnan(value)):
            if "minimum" in schema and value < schema["minimum"]:
                self.report(section, key, translate("must be >= {}, got {}").format(schema["minimum"], raw_value))
                return None
            if "above" in schema and value <= schema["above"]:
                self.report(section, key, translate("must be > {}, got {}").format(schema["above"], raw_value))
                return None
        if "choices" in schema:
            value = value.lower()
        if "choices" in schema and value not in schema["choices"]:
            self.report(section, key, translate("'{}' is not one of: {}").format(
                raw_value, ", ".join(choice for choice in schema["choices"] if choice),
            ))
            return None
        return value

    @staticmethod
    def _convert(raw_value: str, data_type: str) -> "Any":
        if data_type == INT:
            return int(raw_value)
        if data_type == FLOAT:
            value = float(raw_value)
            if math.isinf(value):
                raise ValueError(raw_value)
            return value
        if data_type == BOOL:
            return str_to_bool(raw_value)
        if data_type == LIST:
            return [item.strip() for item in raw_value.split(",") if item.strip()]
        return raw_value

    def guarded(self, section: str, key: str | None, action: "Callable[[], Any]") -> "Any":
        try:
            return action()
        except (*VALIDATION_ERRORS, ValueError) as exc:
            self.report(section, key, str(exc))
            return None


def parse_matrix(text: str) -> "npt.NDArray[np.complex128]":
    """'1' or '1, 0.1; 0.1, 2' (rows separated by ';')."""
    rows = [
        [complex(entry.replace(" ", "")) for entry in row.split(",") if entry.strip()]
        for row in text.split(";") if row.strip()
    ]
    if not rows or any(len(row) != len(rows) for row in rows):
        not_square = translate("'{}' is not a square matrix").format(text)
        raise ValueError(not_square)
    return np.array(rows, dtype=np.complex128)


def parse_weight(text: str) -> "npt.NDArray[np.complex128]":
    """A coupling matrix as in `parse_matrix`, or one row of per-level couplings c giving c c^+."""
    if ";" not in text and "," in text:
        couplings = np.array([complex(entry.replace(" ", "")) for entry in text.split(",") if entry.strip()])
        return np.outer(couplings, couplings.conj())
    return parse_matrix(text)


def _check_structure(reader: ScenarioReader) -> None:
    for section in reader.parser.sections():
        name = schema_name(section)
        if name not in SCENARIO_SCHEMA:
            reader.report(section, None, translate("unknown section"))
            continue
        for key in reader.parser.options(section):
            if key not in SCENARIO_SCHEMA[name]:
                reader.report(section, key, translate("unknown key"))
    for required in ("system", "grid", "run"):
        if not reader.parser.has_section(required):
            reader.report(required, None, translate("required section is missing"))


def _density(reader: ScenarioReader, section: str, unit: float, base_dir: Path) -> "SpectralDensity | None":
    kind = reader.get(section, "kind")
    if kind is None:
        return None
    needed = DENSITY_KINDS[kind]
    for key in sorted(DENSITY_KEYS - set(needed)):
        if reader.has(section, key):
            reader.report(section, key, translate("not used by kind '{}'").format(kind))
    values = {key: reader.get(section, key) for key in needed}
    if any(value is None for value in values.values()):
        return None
    if kind == "none":
        return ZeroDensity()
    if kind == "ohmic":
        return reader.guarded(section, None, lambda: OhmicDensity(
            values["coupling"], values["exponent"], values["cutoff"] * unit,
        ))
    if kind == "lorentzian":
        return reader.guarded(section, None, lambda: LorentzianDensity(
            values["coupling"] * unit, values["center"] * unit, values["width"] * unit,
        ))
    if kind == "flat":
        return reader.guarded(section, None, lambda: FlatBandDensity(
            values["rate"] * unit, values["lower"] * unit, values["upper"] * unit,
        ))
    if kind == "tabulated":
        return reader.guarded(section, "file", lambda: _tabulated(base_dir / values["file"], unit))
    return reader.guarded(section, "bands", lambda: GappedBandDensity([
        FlatBandDensity(rate * unit, lower * unit, upper * unit)
        for lower, upper, rate in (_band(item) for item in values["bands"])
    ]))


def _band(item: str) -> tuple[float, float, float]:
    parts = item.split(":")
    if len(parts) != 3:  # noqa: PLR2004
        bad_band = translate("band '{}' is not lower:upper:rate").format(item)
        raise ValueError(bad_band)
    lower, upper, rate = (float(part) for part in parts)
    return lower, upper, rate


def _tabulated(path: Path, unit: float) -> TabulatedDensity:
    try:
        table = np.loadtxt(path, delimiter=",", ndmin=2, encoding=DEFAULT_INPUT_ENCODING)
    except OSError as exc:
        unreadable = translate("cannot read '{}': {}").format(path, exc.strerror)
        raise ValueError(unreadable) from exc
    if table.shape[1] != 2:  # noqa: PLR2004
        bad_columns = translate("'{}' must hold two columns, energy and J").format(path)
        raise ValueError(bad_columns)
    return TabulatedDensity(table[:, 0] * unit, table[:, 1] * unit)


def _reservoirs(
        reader: ScenarioReader, statistics: Statistics, unit: float, base_dir: Path,
) -> list[Reservoir]:
    result = []
    for section in reader.parser.sections():
        if schema_name(section) != RESERVOIR_SECTION:
            continue
        declared = reader.get(section, "statistics")
        if declared and Statistics.from_name(declared) is not statistics:
            reader.report(section, "statistics", translate("must match the system statistics"))
            continue
        density = _density(reader, section, unit, base_dir)
        temperature = reader.get(section, "temperature")
        chemical_potential = reader.get(section, "chemical_potential")
        weight_text = reader.get(section, "weight")
        weight = reader.guarded(section, "weight", functools.partial(parse_weight, weight_text))
        if density is None or weight is None or None in (temperature, chemical_potential):
            continue
        reservoir = reader.guarded(section, None, functools.partial(
            Reservoir,
            statistics=statistics,
            density=density,
            temperature=temperature * unit,
            chemical_potential=chemical_potential * unit,
            weight=weight,
        ))
        if reservoir is not None:
            result.append(reservoir)
    return result


def _system(reader: ScenarioReader, base_dir: Path) -> tuple[SystemSpec | None, float]:
    unit = reader.get("system", "unit") or 1.0
    statistics_name = reader.get("system", "statistics")
    energy_text = reader.get("system", "energy")
    if statistics_name is None or energy_text is None:
        return None, unit
    statistics = Statistics.from_name(statistics_name)
    energy = reader.guarded("system", "energy", lambda: parse_matrix(energy_text) * unit)
    reservoirs = _reservoirs(reader, statistics, unit, base_dir)
    if energy is None:
        return None, unit
    system = reader.guarded("system", None, lambda: SystemSpec(
        statistics=statistics, energy=energy, reservoirs=reservoirs,
    ))
    return system, unit


def _grid(reader: ScenarioReader, unit: float) -> TimeGrid | None:
    t_max = reader.get("grid", "t_max")
    dt = reader.get("grid", "dt")
    if t_max is None or dt is None:
        return None
    steps = round(t_max / dt)
    if abs(steps * dt - t_max) > GRID_MATCH_TOLERANCE * t_max:
        reader.report("grid", "dt", translate("t_max = {} is not a whole number of steps of {}").format(t_max, dt))
        return None
    return reader.guarded("grid", "dt", lambda: TimeGrid(dt=dt / unit, n_steps=steps))


def _tasks(reader: ScenarioReader, system: SystemSpec | None) -> list[str]:
    tasks = reader.get("run", "tasks")
    if tasks is None:
        return []
    if not tasks:
        reader.report("run", "tasks", translate("at least one task is required"))
    result = []
    for task in (task.strip() for task in tasks):
        if task.startswith(MODEL_TASK_PREFIX):
            kind = reader.guarded(
                "run", "tasks", functools.partial(ModelKind.from_name, task.removeprefix(MODEL_TASK_PREFIX)),
            )
            if kind is None:
                continue
            task = MODEL_TASK_PREFIX + kind.value  # noqa: PLW2901
            if system is not None and len(system.reservoirs) != 1:
                reader.report("run", "tasks", translate("{} needs exactly one reservoir").format(task))
        elif task.lower() not in SIMPLE_TASKS:
            reader.report("run", "tasks", translate("unknown task '{}'").format(task))
            continue
        else:
            task = task.lower()  # noqa: PLW2901
            if task in SCALAR_ONLY_TASKS and system is not None and not system.is_scalar:
                reader.report("run", "tasks", translate("{} needs a single-level system").format(task))
            if (
                    task == "rho" and system is not None
                    and system.statistics is Statistics.BOSON and not system.is_scalar
            ):
                reader.report("run", "tasks", translate("rho supports a single boson mode"))
        if task not in result:
            result.append(task)
    return result


def _initial(reader: ScenarioReader, system: SystemSpec) -> tuple[str, list[float], int]:
    statistics = system.statistics
    kind = reader.get("system", "initial")
    if not kind:
        kind = "fock" if statistics is Statistics.BOSON else "occupation"
    allowed = BOSON_STATES if statistics is Statistics.BOSON else FERMION_STATES
    if kind not in allowed:
        reader.report("system", "initial", translate("'{}' is not a {} initial state").format(
            kind, statistics.name.lower(),
        ))
    items = reader.get("system", "initial_value") or []
    try:
        values = [float(item) for item in items]
    except ValueError:
        reader.report("system", "initial_value", translate("'{}' is not a list of numbers").format(", ".join(items)))
        values = []
    expected = system.dimension if statistics is Statistics.FERMION else 1
    if not values:
        values = [0.0] * expected if statistics is Statistics.FERMION else [1.0]
    if len(values) != expected:
        reader.report("system", "initial_value", translate("expected {} value(s), got {}").format(
            expected, len(values),
        ))
    cutoff = reader.get("system", "cutoff") or 0
    if statistics is Statistics.BOSON and not cutoff:
        mean = values[0] ** 2 if kind == "coherent" else values[0]
        cutoff = default_cutoff(mean)
    return kind, values, cutoff


def _anchors(reader: ScenarioReader, grid: TimeGrid, unit: float) -> tuple[list[float], float]:
    count = reader.get("correlations", "anchors") or ExactMEConfig().output.Anchors.get_int()
    first = (reader.get("correlations", "first_anchor") or DEFAULT_FIRST_ANCHOR) / unit
    max_lag = (reader.get("correlations", "max_lag") or DEFAULT_MAX_LAG) / unit
    last = grid.t_max - max_lag
    if last < first:
        reader.report("correlations", "max_lag", translate(
            "anchors need max_lag + first_anchor <= t_max, got {} + {} > {}",
        ).format(max_lag, first, grid.t_max))
        return [], max_lag
    times = np.geomspace(first, last, count) if count > 1 else np.array([last])
    last_step = grid.n_steps - lag_count(max_lag, grid.dt)
    return [float(grid.times[min(round(time / grid.dt), last_step)]) for time in times], max_lag


def _spectra(reader: ScenarioReader, system: SystemSpec, grid: TimeGrid, unit: float) -> SpectraSettings:
    points = reader.get("spectra", "points") or ExactMEConfig().output.SpectrumPoints.get_int()
    lower = reader.get("spectra", "lower")
    upper = reader.get("spectra", "upper")
    steady_time = reader.get("spectra", "steady_time")
    density = system.total_density
    scale = system.energy_scale
    if lower is None or math.isnan(lower):
        lower = max(density.infimum, system.level - 10 * scale) if not density.is_zero else system.level - 1
    else:
        lower *= unit
    if upper is None or math.isnan(upper):
        upper = min(density.supremum, system.level + 10 * scale) if not density.is_zero else system.level + 1
    else:
        upper *= unit
    if upper <= lower:
        reader.report("spectra", "upper", translate("energy window [{}, {}] is empty").format(lower, upper))
    if steady_time is None or math.isnan(steady_time):
        steady_time = grid.t_max
    else:
        steady_time /= unit
    return SpectraSettings(points=max(points, 2), lower=lower, upper=upper, steady_time=steady_time)


def _read(text: str, source: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None,
        comment_prefixes=LineIndex.COMMENT_PREFIXES,
        inline_comment_prefixes=("#",),
        default_section="__defaults__",
    )
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ScenarioError([
            translate("line {}: key outside of any section: {}").format(exc.lineno, exc.line.strip()),
        ]) from exc
    except configparser.ParsingError as exc:
        raise ScenarioError([
            translate("line {}: cannot parse {}").format(lineno, line.strip())
            for lineno, line in exc.errors
        ]) from exc
    except configparser.DuplicateSectionError as exc:
        raise ScenarioError([
            translate("line {}: duplicate section [{}]").format(exc.lineno, exc.section),
        ]) from exc
    except configparser.DuplicateOptionError as exc:
        raise ScenarioError([
            translate("line {}: [{}] {}: duplicate key").format(exc.lineno, exc.section, exc.option),
        ]) from exc
    return parser


def parse_scenario(  # pylint: disable=too-many-locals
        text: str,
        *,
        source: str = "<scenario>",
        base_dir: Path | None = None,
        overrides: dict[tuple[str, str], str] | None = None,
) -> Scenario:
    """Validate a scenario; every problem found is reported at once through ScenarioError."""
    overrides = overrides or {}
    parser = _read(text, source)
    for (section, key), value in overrides.items():
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)
    reader = ScenarioReader(parser, LineIndex(text), overrides)
    _check_structure(reader)
    if reader.diagnostics:
        raise ScenarioError(reader.diagnostics)

    base_dir = base_dir or Path()
    system, unit = _system(reader, base_dir)
    grid = _grid(reader, unit)
    tasks = _tasks(reader, system)
    v_stride = reader.get("grid", "v_stride") or 1
    order = reader.get("grid", "quadrature_order") or None
    if order is not None and order < 4:  # noqa: PLR2004
        reader.report("grid", "quadrature_order", translate("must be 0 (config default) or >= 4"))
    model_initial = reader.get("model", "initial") or "superposition"
    directory = reader.get("output", "directory") or ""
    precision = reader.get("output", "precision") or 0
    cross_check = reader.get("output", "cross_check")
    if system is None or grid is None:
        raise ScenarioError(reader.diagnostics or [translate("scenario is incomplete")])

    initial_kind, initial_values, cutoff = _initial(reader, system)
    anchor_times: list[float] = []
    max_lag = DEFAULT_MAX_LAG
    if "measure" in tasks:
        anchor_times, max_lag = _anchors(reader, grid, unit)
    spectra = _spectra(reader, system, grid, unit)
    if reader.diagnostics:
        raise ScenarioError(reader.diagnostics)

    scenario = Scenario(
        source=source,
        system=system,
        grid=grid,
        tasks=tasks,
        unit=unit,
        quadrature_order=order,
        v_stride=v_stride,
        initial_kind=initial_kind,
        initial_values=initial_values,
        cutoff=cutoff,
        anchor_times=anchor_times,
        max_lag=max_lag,
        spectra=spectra,
        model_initial=model_initial,
        output_directory=directory,
        precision=precision,
        cross_check=cross_check is not False,
    )
    if "rho" in tasks:
        reader.guarded("system", "initial", scenario.initial_state)
    for kind in scenario.model_kinds:
        reader.guarded("run", "tasks", functools.partial(scenario.model, kind))
    if reader.diagnostics:
        raise ScenarioError(reader.diagnostics)
    logger.debug("scenario {} parsed, tasks: {}", source, ", ".join(tasks))
    return scenario


def load_scenario(path: Path, overrides: dict[tuple[str, str], str] | None = None) -> Scenario:
    try:
        text = path.read_text(encoding=DEFAULT_INPUT_ENCODING)
    except OSError as exc:
        unreadable = translate("cannot read scenario '{}': {}").format(path, exc.strerror)
        raise ScenarioError([unreadable]) from exc
    return parse_scenario(text, source=str(path), base_dir=path.parent, overrides=overrides)


def parse_override(param: str, value: str) -> dict[tuple[str, str], str]:
    section, _sep, key = param.rpartition(".")
    if not section or not key:
        bad_param = translate("--param must look like section.key, got '{}'").format(param)
        raise ScenarioError([bad_param])
    return {(section, key.lower()): value}
