"""Run configuration: INI-style files, validation and shipped presets.

A configuration file has the sections ``[system]``, ``[bath]``,
``[coupling]``, ``[sweep]`` and ``[output]``, plus two optional ones:
``[response]`` (operator pair, kernel toggles, threads) and ``[family]``
(a list of values for one or more keys, producing one curve per value).
Unknown sections or keys are rejected.  Numeric values accept simple
arithmetic with ``pi``, ``magic`` (the magic angle), ``sqrt``, ``arccos``
and friends, e.g. ``theta = pi/2`` or ``lambda1 = 0, pi/4, pi/2``.

A bare name such as ``fig1`` that is not an existing file resolves to a
shipped preset.
"""
from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .bath import BathSpec
from .hamiltonian import CouplingSpec, PairGeometry, SpinSystemSpec, triangle_pairs
from .kernel import BORN_MARKOV, FULL, KernelToggles

__all__ = [
    "ConfigError", "SweepSpec", "RunConfig", "parse_config", "parse_config_text",
    "preset_names", "resolve_config_path", "expand_family", "render_config",
    "read_config_echo", "safe_eval", "override",
]


class ConfigError(ValueError):
    """Invalid configuration; the message names the line or the key."""


# ---------------------------------------------------------------------------
# safe arithmetic
# ---------------------------------------------------------------------------

_CONSTANTS = {"pi": math.pi, "e": math.e, "magic": math.acos(1.0 / math.sqrt(3.0)),
              "inf": math.inf}
_FUNCTIONS = {"sqrt": math.sqrt, "sin": math.sin, "cos": math.cos, "tan": math.tan,
              "arccos": math.acos, "arcsin": math.asin, "arctan": math.atan, "exp": math.exp,
              "log": math.log, "abs": abs}
_BINARY = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def safe_eval(text: str) -> float:
    """Evaluate a numeric expression without ``eval``.

    Only literals, the names in ``_CONSTANTS``, calls to ``_FUNCTIONS`` and
    ``+ - * / **`` are accepted.

    Examples
    --------
    >>> safe_eval("pi/2") == math.pi / 2
    True
    >>> safe_eval("1/150")
    0.006666666666666667
    """
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse {text!r}") from exc

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
                and not isinstance(node.value, bool):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTANTS:
            return _CONSTANTS[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINARY:
            return _BINARY[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
            return _UNARY[type(node.op)](walk(node.operand))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCTIONS and not node.keywords):
            return float(_FUNCTIONS[node.func.id](*[walk(a) for a in node.args]))
        raise ValueError(f"unsupported expression {text!r}")

    try:
        return float(walk(tree))
    except (ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ValueError(f"cannot evaluate {text!r}: {exc}") from None


# ---------------------------------------------------------------------------
# schema
# ---------------------------------------------------------------------------

_BOOL = {"yes": True, "true": True, "on": True, "1": True,
         "no": False, "false": False, "off": False, "0": False}

# section -> key -> (kind, default); default None means required
_SCHEMA: dict[str, dict[str, tuple[str, object]]] = {
    "system": {
        "num_spins": ("int", None),
        "omega0": ("float", 1.0),
        "J": ("float", 0.0),
        "anisotropy": ("float", 1.0),
        "D0": ("float", 0.0),
        "geometry": ("choice:none,pair,triangle", "none"),
        "theta": ("float", 0.0),
        "phi": ("float", 0.0),
    },
    "bath": {
        "s": ("float", None),
        "omega_c": ("float", None),
        "kT": ("float", None),
    },
    "coupling": {
        "lambda1": ("float", 0.0),
        "lambda2": ("float", 0.0),
    },
    "sweep": {
        "kind": ("choice:omega,field", "omega"),
        "start": ("float", None),
        "stop": ("float", None),
        "step": ("float", None),
        "omega_fixed": ("float", 0.0),
    },
    "output": {
        "prefix": ("str", "lineshape"),
        "plots": ("bool", True),
    },
    "response": {
        "pair": ("choice:+-,-+,xx,yy,zz,xy,yx", "+-"),
        "frequency_shift": ("bool", True),
        "initial_correlation": ("bool", True),
        "mode": (f"choice:{FULL},{BORN_MARKOV}", FULL),
        "epsilon": ("float", 0.0),
        "threads": ("int", 0),
    },
}
_REQUIRED_SECTIONS = ("system", "bath", "coupling", "sweep", "output")
_OPTIONAL_SECTIONS = ("response", "family")
_FAMILY_KEYS = {f"{sec}.{key}" for sec in ("system", "bath", "coupling")
                for key, (kind, _) in _SCHEMA[sec].items() if kind == "float"}
_FAMILY_KEYS |= {"response.frequency_shift", "response.initial_correlation"}


@dataclass(frozen=True)
class SweepSpec:
    """Grid description; ``kind`` is ``"omega"`` or ``"field"``."""

    kind: str
    start: float
    stop: float
    step: float
    omega_fixed: float = 0.0

    def grid(self) -> np.ndarray:
        """Inclusive grid ``start, start + step, ...`` up to ``stop``.

        Values are rounded to 12 decimals so decimal steps give clean
        coordinates in the output tables.
        """
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return np.round(self.start + self.step * np.arange(count), 12)


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run description.

    ``values`` keeps every resolved key (defaults included) so that the
    configuration can be echoed verbatim into output headers; ``family``
    lists ``(qualified key, values)`` pairs that all share one length.
    """

    system: SpinSystemSpec
    bath: BathSpec
    coupling: CouplingSpec
    pair: str
    toggles: KernelToggles
    sweep: SweepSpec
    prefix: str
    plots: bool
    threads: int
    epsilon: float
    values: dict = field(repr=False)
    family: tuple = ()
    source: str = ""

    @property
    def num_spins(self) -> int:
        return self.system.num_spins


def _convert(kind: str, raw: str, where: str):
    text = raw.strip()
    if kind == "float":
        try:
            return safe_eval(text)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
    if kind == "int":
        try:
            value = safe_eval(text)
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if value != int(value):
            raise ConfigError(f"{where}: expected an integer, got {text!r}")
        return int(value)
    if kind == "bool":
        if text.lower() not in _BOOL:
            raise ConfigError(f"{where}: expected yes/no, got {text!r}")
        return _BOOL[text.lower()]
    if kind.startswith("choice:"):
        options = kind.split(":", 1)[1].split(",")
        if text not in options:
            raise ConfigError(f"{where}: expected one of {options}, got {text!r}")
        return text
    return text


def _read_parser(text: str, name: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None, strict=True,
                                       inline_comment_prefixes=("#", ";"),
                                       default_section="__unused__")
    parser.optionxform = str  # keys are case sensitive (J vs j)
    try:
        parser.read_string(text, source=name)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{name}, line {exc.lineno}: key outside of any section") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"{name}, line {lineno}: cannot parse {line.strip()!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"{name}, line {exc.lineno}: {exc.message.split(': ', 1)[-1]}") \
            from None
    return parser


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line number of ``[section]`` or of ``key`` inside it."""
    current = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            current = stripped[1:-1].strip()
            if key is None and current == section:
                return number
            continue
        if current == section and key is not None:
            name = stripped.split("=", 1)[0].split(":", 1)[0].strip()
            if name == key:
                return number
    return 0


def _build(values: dict, family: tuple, source: str) -> RunConfig:
    sysv, bathv, cplv = values["system"], values["bath"], values["coupling"]
    swv, outv, rspv = values["sweep"], values["output"], values["response"]
    try:
        num = sysv["num_spins"]
        geometry = sysv["geometry"]
        if geometry == "triangle":
            if num != 3:
                raise ConfigError("system.geometry: triangle needs num_spins = 3")
            pairs = triangle_pairs(sysv["theta"])
        elif geometry == "pair":
            if num != 2:
                raise ConfigError("system.geometry: pair needs num_spins = 2")
            pairs = (PairGeometry(1, 2, sysv["theta"], sysv["phi"]),)
        else:
            pairs = ()
        system = SpinSystemSpec(num, sysv["omega0"], sysv["J"], sysv["anisotropy"], sysv["D0"],
                                pairs)
        if bathv["kT"] <= 0:
            raise ConfigError("bath.kT: must be positive")
        bath = BathSpec(bathv["s"], bathv["omega_c"], 1.0 / bathv["kT"])
        coupling = CouplingSpec.uniform(num, cplv["lambda1"], cplv["lambda2"])
        mode = rspv["mode"]
        ic = rspv["initial_correlation"] and mode != BORN_MARKOV
        toggles = KernelToggles(rspv["frequency_shift"], ic, mode)
        sweep = SweepSpec(swv["kind"], swv["start"], swv["stop"], swv["step"],
                          swv["omega_fixed"])
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid value: {exc}") from None
    if not sweep.step > 0:
        raise ConfigError("sweep.step: must be positive")
    if not sweep.stop >= sweep.start:
        raise ConfigError("sweep.stop: must not be below sweep.start")
    if sweep.kind == "field" and sweep.omega_fixed <= 0:
        raise ConfigError("sweep.omega_fixed: a field sweep needs a positive drive frequency")
    if sweep.kind == "field" and sweep.start <= 0:
        raise ConfigError("sweep.start: field values must be positive")
    if rspv["threads"] < 0:
        raise ConfigError("response.threads: must be >= 0 (0 picks the core count)")
    if rspv["epsilon"] < 0:
        raise ConfigError("response.epsilon: must be >= 0")
    return RunConfig(system, bath, coupling, rspv["pair"], toggles, sweep, outv["prefix"],
                     outv["plots"], rspv["threads"], rspv["epsilon"], values, family, source)


def parse_config_text(text: str, name: str = "<config>") -> RunConfig:
    """Parse configuration text; see the module docstring for the format.

    Raises
    ------
    ConfigError
        With a line number for syntax problems and unknown keys, and with
        the qualified key name for invalid values.
    """
    parser = _read_parser(text, name)
    sections = parser.sections()
    for sec in sections:
        if sec not in _REQUIRED_SECTIONS + _OPTIONAL_SECTIONS:
            raise ConfigError(f"{name}, line {_line_of(text, sec)}: unknown section [{sec}]")
    for sec in _REQUIRED_SECTIONS:
        if sec not in sections:
            raise ConfigError(f"{name}: missing section [{sec}]")

    values: dict[str, dict] = {}
    for sec, schema in _SCHEMA.items():
        got = dict(parser.items(sec)) if sec in sections else {}
        for key in got:
            if key not in schema:
                raise ConfigError(
                    f"{name}, line {_line_of(text, sec, key)}: unknown key {sec}.{key}")
        resolved = {}
        for key, (kind, default) in schema.items():
            if key in got:
                resolved[key] = _convert(kind, got[key], _where(text, name, sec, key))
            elif default is None:
                raise ConfigError(f"{name}: missing required key {sec}.{key}")
            else:
                resolved[key] = default
        values[sec] = resolved

    family = []
    if "family" in sections:
        for key, raw in parser.items("family"):
            if key not in _FAMILY_KEYS:
                raise ConfigError(f"{name}, line {_line_of(text, 'family', key)}: "
                                  f"unknown family key {key}")
            sec, sub = key.split(".")
            kind = _SCHEMA[sec][sub][0]
            items = [item for item in raw.split(",") if item.strip()]
            if not items:
                raise ConfigError(f"{_where(text, name, 'family', key)}: empty value list")
            where = _where(text, name, "family", key)
            family.append((key, tuple(_convert(kind, item, where) for item in items)))
        lengths = {len(vals) for _, vals in family}
        if len(lengths) > 1:
            raise ConfigError("family: all value lists must have the same length")
    try:
        cfg = _build(values, tuple(family), text)
        expand_family(cfg)   # validates every member up front
    except ConfigError as exc:
        raise _locate(exc, text, name) from None
    return cfg


def _where(text: str, name: str, section: str, key: str) -> str:
    return f"{name}, line {_line_of(text, section, key)}: {section}.{key}"


def _locate(exc: ConfigError, text: str, name: str) -> ConfigError:
    """Prefix a ``section.key: ...`` message with the line of that key."""
    head = str(exc).split(":", 1)[0]
    if "." in head and " " not in head:
        sec, key = head.split(".", 1)
        line = _line_of(text, sec, key)
        if line:
            return ConfigError(f"{name}, line {line}: {exc}")
    return exc


def preset_names() -> list[str]:
    """Names of the shipped presets (``fig1``, ``fig6a``, ...)."""
    root = resources.files("lineshape") / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def resolve_config_path(name: str | Path):
    """Return the text and a display name for a path or preset name."""
    path = Path(name)
    if path.is_file():
        return path.read_text(), str(path)
    stem = path.name[:-4] if path.name.endswith(".ini") else path.name
    preset = resources.files("lineshape") / "presets" / f"{stem}.ini"
    if preset.is_file():
        return preset.read_text(), f"preset:{stem}"
    raise ConfigError(f"no such config file or preset: {name} "
                      f"(presets: {', '.join(preset_names())})")


def parse_config(path: str | Path) -> RunConfig:
    """Read and validate a configuration file or a shipped preset name."""
    text, name = resolve_config_path(path)
    return parse_config_text(text, name)


def _format(value) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def expand_family(cfg: RunConfig) -> list[tuple[str, RunConfig]]:
    """One ``(label, config)`` per family member; a single entry otherwise.

    Labels are ``key=value`` strings usable in file names and legends.
    """
    if not cfg.family:
        return [("", cfg)]
    count = len(cfg.family[0][1])
    members = []
    for idx in range(count):
        values = {sec: dict(sub) for sec, sub in cfg.values.items()}
        parts = []
        for key, vals in cfg.family:
            sec, sub = key.split(".")
            values[sec][sub] = vals[idx]
            value = vals[idx]
            parts.append(f"{sub}={value:.4g}" if isinstance(value, float) and
                         not isinstance(value, bool) else f"{sub}={_format(value)}")
        member = replace(_build(values, (), cfg.source), threads=cfg.threads)
        members.append(("_".join(parts), member))
    return members


def render_config(cfg: RunConfig, include_family: bool = True) -> str:
    """Canonical text of a configuration with every default spelled out.

    Parsing the result gives an equivalent :class:`RunConfig`.  The thread
    count is left out: it never changes results.
    """
    lines = []
    for sec in _REQUIRED_SECTIONS + ("response",):
        lines.append(f"[{sec}]")
        for key, value in cfg.values[sec].items():
            if sec == "response" and key == "threads":
                continue
            lines.append(f"{key} = {_format(value)}")
    if include_family and cfg.family:
        lines.append("[family]")
        for key, vals in cfg.family:
            lines.append(f"{key} = " + ", ".join(_format(v) for v in vals))
    return "\n".join(lines) + "\n"


ECHO_BEGIN = "# --- config ---"
ECHO_END = "# --- end config ---"


def read_config_echo(path: str | Path) -> RunConfig:
    """Rebuild the configuration echoed in the header of an output table."""
    body, inside = [], False
    for line in Path(path).read_text().splitlines():
        if line == ECHO_BEGIN:
            inside = True
        elif line == ECHO_END:
            break
        elif inside:
            body.append(line[2:] if line.startswith("# ") else line.lstrip("#"))
    if not body:
        raise ConfigError(f"{path}: no configuration echo found")
    return parse_config_text("\n".join(body) + "\n", f"echo:{path}")


def override(cfg: RunConfig, updates: dict) -> RunConfig:
    """Copy of ``cfg`` with ``{"section.key": value}`` replaced and revalidated.

    The family, if any, is dropped: the result describes a single curve.
    """
    values = {sec: dict(sub) for sec, sub in cfg.values.items()}
    for key, value in updates.items():
        sec, sub = key.split(".")
        if sec not in _SCHEMA or sub not in _SCHEMA[sec]:
            raise ConfigError(f"unknown key {key}")
        values[sec][sub] = value
    return replace(_build(values, (), cfg.source), threads=cfg.threads)
