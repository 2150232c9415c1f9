"""Scenario files: a flat ``key = value`` format with an optional ``[screen]`` section.

    # comments run to the end of the line
    experiment = double_slit_eraser
    marker = 90 deg
    eraser = polarizer:45deg

    [screen]
    points = 401

Values are booleans (true/false), integers, reals, angles (a number followed
by ``deg`` or ``rad``) or bare words. Every key is checked against the schema
of the named experiment before anything runs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields

from .errors import ScenarioError
from .experiments import BRAINWASH_VARIANTS
from .optics import ScreenConfig

MAX_SEED = 2**64 - 1

_KEY = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_INT = re.compile(r"[+-]?\d+")
_REAL = re.compile(_NUM)
_ANGLE = re.compile(rf"({_NUM})\s*(deg|rad)")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?::\S+)?")


@dataclass(frozen=True)
class Value:
    kind: str  # bool, int, real, angle, word
    value: object
    text: str
    line: int
    column: int


def lex_value(text: str, line: int, column: int) -> Value:
    if text in ("true", "false"):
        return Value("bool", text == "true", text, line, column)
    if _INT.fullmatch(text):
        return Value("int", int(text), text, line, column)
    if _REAL.fullmatch(text):
        return Value("real", float(text), text, line, column)
    m = _ANGLE.fullmatch(text)
    if m:
        num = float(m.group(1))
        rad = math.radians(num) if m.group(2) == "deg" else num
        return Value("angle", rad, text, line, column)
    if _WORD.fullmatch(text):
        return Value("word", text, text, line, column)
    raise ScenarioError(f"cannot read value {text!r}", line, column)


def _describe(v: Value) -> str:
    names = {"bool": "boolean", "int": "integer", "real": "real", "angle": "angle", "word": "word"}
    return f"{names[v.kind]} {v.text!r}"


# ---- schema ----

@dataclass(frozen=True)
class Field:
    name: str
    kind: str  # bool, int, real, angle, angle_or_none, choice, eraser
    default: object = None
    choices: tuple = ()
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    doc: str = ""

    def describe(self) -> str:
        if self.kind == "choice":
            kind = "one of " + "|".join(self.choices)
        elif self.kind == "eraser":
            kind = "none|hwp_upper|hwp_lower|qwp_pair|polarizer:<angle>"
        elif self.kind == "angle_or_none":
            kind = "angle or none"
        else:
            kind = self.kind
        rng = ""
        if self.lo is not None or self.hi is not None:
            left = "(" if self.lo_open else "["
            lo = "-inf" if self.lo is None else format_number(self.lo)
            hi = "inf" if self.hi is None else format_number(self.hi)
            rng = f" in {left}{lo}, {hi}]"
        return f"{self.name}: {kind}{rng} (default {format_setting(self, self.default)})"

    def convert(self, v: Value):
        bad = ScenarioError(f"type mismatch: {self.name} expects {self._expect()}, got {_describe(v)}",
                            v.line, v.column)
        if self.kind == "bool":
            if v.kind != "bool":
                raise bad
            return v.value
        if self.kind == "int":
            if v.kind != "int":
                raise bad
            return self._range(int(v.value), v)
        if self.kind == "real":
            if v.kind not in ("int", "real"):
                raise bad
            return self._range(float(v.value), v)
        if self.kind == "angle":
            if v.kind != "angle":
                raise bad
            return self._range(float(v.value), v)
        if self.kind == "angle_or_none":
            if v.kind == "word" and v.value == "none":
                return None
            if v.kind != "angle":
                raise bad
            return float(v.value)
        if self.kind == "choice":
            if v.kind != "word":
                raise bad
            if v.value not in self.choices:
                raise ScenarioError(
                    f"{self.name} must be one of {', '.join(self.choices)}; got {v.value!r}", v.line, v.column)
            return v.value
        if self.kind == "eraser":
            return _convert_eraser(self, v, bad)
        raise AssertionError(self.kind)

    def _expect(self) -> str:
        return {
            "bool": "true or false",
            "int": "an integer",
            "real": "a real number",
            "angle": "an angle such as '90 deg' or '1.5708 rad'",
            "angle_or_none": "an angle such as '90 deg' or 'none'",
            "choice": "one of " + ", ".join(self.choices),
            "eraser": "none, hwp_upper, hwp_lower, qwp_pair or polarizer:<angle>",
        }[self.kind]

    def _range(self, x, v: Value):
        if not math.isfinite(x):
            raise ScenarioError(f"{self.name} must be finite", v.line, v.column)
        if self.lo is not None and (x <= self.lo if self.lo_open else x < self.lo):
            raise ScenarioError(f"{self.name} = {v.text} is out of range ({self.describe()})", v.line, v.column)
        if self.hi is not None and x > self.hi:
            raise ScenarioError(f"{self.name} = {v.text} is out of range ({self.describe()})", v.line, v.column)
        return x


def _convert_eraser(f: Field, v: Value, bad):
    if v.kind != "word":
        raise bad
    text = v.value
    if text in ("none", "hwp_upper", "hwp_lower", "qwp_pair"):
        return text
    if text.startswith("polarizer:"):
        inner = text[len("polarizer:"):]
        col = v.column + len("polarizer:")
        try:
            a = lex_value(inner, v.line, col)
        except ScenarioError:
            a = None
        if a is None or a.kind != "angle":
            raise ScenarioError(f"polarizer angle must look like '45deg', got {inner!r}", v.line, col)
        return ("polarizer", float(a.value))
    raise bad


def format_number(x) -> str:
    return repr(float(x)) if not isinstance(x, int) else str(x)


def format_setting(f: Field, value) -> str:
    """Text that reads back to ``value`` under field ``f``."""
    if value is None:
        return "none"
    if f.kind == "bool":
        return "true" if value else "false"
    if f.kind in ("angle", "angle_or_none"):
        return f"{float(value)!r} rad"
    if f.kind == "eraser" and isinstance(value, tuple):
        return f"polarizer:{float(value[1])!r}rad"
    if f.kind == "real":
        return repr(float(value))
    return str(value)


RIGHT_ANGLE = math.pi / 2

SCHEMAS: dict[str, tuple[Field, ...]] = {
    "wheeler": (
        Field("choice", "choice", "interference", ("interference", "which_path")),
    ),
    "double_slit_eraser": (
        Field("marker", "angle_or_none", None),
        Field("eraser", "eraser", "none"),
    ),
    "herzog": (
        Field("qwp", "bool", False),
        Field("filter", "bool", False),
        Field("phase_points", "int", 73, lo=2, hi=100_000),
    ),
    "free_will": (
        Field("choice", "choice", "not_push", ("push", "not_push")),
    ),
    "entanglement_swapping": (
        Field("victor", "choice", "bell", ("bell", "separable")),
    ),
    "tradeoff": (
        Field("family_points", "int", 21, lo=2, hi=100_000),
    ),
    "brainwash": (
        Field("variant", "choice", "switching_unit", BRAINWASH_VARIANTS),
    ),
    "nocomm": (
        Field("cases", "int", 1000, lo=1, hi=1_000_000),
        Field("tol", "real", 1e-10, lo=0.0, lo_open=True),
    ),
    "temporal": (
        Field("model", "choice", "decay", ("decay", "cat", "passive_zeno")),
        Field("rate", "real", 1.0, lo=0.0, lo_open=True),
        Field("period", "real", 2.0, lo=0.0, lo_open=True),
        Field("t", "real", 1.0, lo=0.0),
        Field("t0", "real", 0.5, lo=0.0),
        Field("step", "real", 1e-4, lo=0.0, lo_open=True, hi=0.1),
        Field("samples", "int", 101, lo=3, hi=100_000),
    ),
    "zeno": (
        Field("measurements", "int", 10, lo=1, hi=100_000),
        Field("total_time", "real", RIGHT_ANGLE, lo=0.0, lo_open=True),
    ),
    "histories": (
        Field("marked", "bool", False),
        Field("tol", "real", 1e-10, lo=0.0, lo_open=True),
    ),
    "time_ordering": (
        Field("cases", "int", 20, lo=1, hi=100_000),
        Field("tol", "real", 1e-12, lo=0.0, lo_open=True),
    ),
}

TOP_LEVEL = (
    Field("experiment", "choice", None, tuple(SCHEMAS)),
    Field("name", "word", None),
    Field("seed", "int", 0, lo=0, hi=MAX_SEED),
    Field("shots", "int", 10_000, lo=1, hi=10**9),
    Field("output", "choice", "all", ("all", "summary")),
)

_SCREEN_KINDS = {"x_min": "real", "x_max": "real", "points": "int",
                 "slit_half_separation": "real", "envelope_sigma": "real", "fringe_wavenumber": "real"}
SCREEN_FIELDS = tuple(
    Field(f.name, _SCREEN_KINDS[f.name], f.default,
          lo={"points": 3, "slit_half_separation": 0.0, "envelope_sigma": 0.0,
              "fringe_wavenumber": 0.0}.get(f.name),
          hi=100_000 if f.name == "points" else None,
          lo_open=f.name in ("slit_half_separation", "envelope_sigma"))
    for f in fields(ScreenConfig)
)


@dataclass(frozen=True)
class Scenario:
    experiment: str
    name: str
    settings: dict = field(default_factory=dict)
    screen: ScreenConfig = field(default_factory=ScreenConfig)
    seed: int = 0
    shots: int = 10_000
    output: str = "all"

    def __post_init__(self):
        if self.experiment not in SCHEMAS:
            raise ScenarioError(f"unknown experiment {self.experiment!r}")
        schema = {f.name: f for f in SCHEMAS[self.experiment]}
        unknown = set(self.settings) - set(schema)
        if unknown:
            raise ScenarioError(f"unknown setting(s) for {self.experiment}: {sorted(unknown)}")
        full = {k: f.default for k, f in schema.items()}
        full.update(self.settings)
        object.__setattr__(self, "settings", full)
        if not _WORD.fullmatch(self.name) or ":" in self.name:
            raise ScenarioError(f"scenario name must be a plain word, got {self.name!r}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ScenarioError("seed must be a 64-bit unsigned integer")
        if self.shots < 1:
            raise ScenarioError("shots must be positive")

    def with_seed(self, seed: int) -> "Scenario":
        return Scenario(self.experiment, self.name, dict(self.settings), self.screen, seed,
                        self.shots, self.output)


def _split_line(raw: str, lineno: int):
    """(key, key_col, value_text, value_col) or a section name, or None for blank lines."""
    text = raw.split("#", 1)[0].rstrip()
    stripped = text.lstrip()
    if not stripped:
        return None
    indent = len(text) - len(stripped)
    if stripped.startswith("["):
        if not stripped.endswith("]"):
            raise ScenarioError("section header must end with ']'", lineno, len(text) + 1)
        return ("section", stripped[1:-1].strip(), indent + 1)
    m = _KEY.match(stripped)
    if not m:
        raise ScenarioError("expected a key", lineno, indent + 1)
    key = m.group(0)
    rest = stripped[m.end():]
    after = rest.lstrip()
    eq_col = indent + m.end() + (len(rest) - len(after)) + 1
    if not after.startswith("="):
        raise ScenarioError(f"expected '=' after key {key!r}", lineno, eq_col)
    value = after[1:].strip()
    if not value:
        raise ScenarioError(f"missing value for {key!r}", lineno, eq_col + 1)
    value_col = eq_col + 1 + (len(after[1:]) - len(after[1:].lstrip()))
    return ("entry", key, indent + 1, value, value_col)


def parse_scenario(text: str) -> Scenario:
    if text.startswith("﻿"):
        text = text[1:]
    entries: dict[str, tuple] = {}
    screen: dict[str, tuple] = {}
    section = None
    section_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parsed = _split_line(raw, lineno)
        if parsed is None:
            continue
        if parsed[0] == "section":
            _, name, col = parsed
            if name != "screen":
                raise ScenarioError(f"unknown section [{name}]", lineno, col)
            if section == "screen":
                raise ScenarioError("duplicate section [screen]", lineno, col)
            section, section_line = "screen", lineno
            continue
        _, key, key_col, value_text, value_col = parsed
        target = screen if section == "screen" else entries
        if key in target:
            first = target[key][0].line
            raise ScenarioError(f"duplicate key {key!r} (first set on line {first})", lineno, key_col)
        target[key] = (lex_value(value_text, lineno, value_col), key_col)

    top = {f.name: f for f in TOP_LEVEL}
    if "experiment" not in entries:
        raise ScenarioError("missing required key 'experiment'")
    exp_value, _ = entries["experiment"]
    if exp_value.kind != "word" or exp_value.value not in SCHEMAS:
        raise ScenarioError(f"unknown experiment {exp_value.text!r}; expected one of {', '.join(SCHEMAS)}",
                            exp_value.line, exp_value.column)
    experiment = exp_value.value
    schema = {f.name: f for f in SCHEMAS[experiment]}

    values = {}
    settings = {}
    for key, (v, key_col) in entries.items():
        if key in top:
            values[key] = top[key].convert(v) if top[key].kind != "word" else _plain_word(key, v)
        elif key in schema:
            settings[key] = schema[key].convert(v)
        else:
            raise ScenarioError(f"unknown key {key!r} for experiment {experiment}", v.line, key_col)

    screen_kwargs = {}
    sfields = {f.name: f for f in SCREEN_FIELDS}
    for key, (v, key_col) in screen.items():
        if key not in sfields:
            raise ScenarioError(f"unknown screen key {key!r}", v.line, key_col)
        screen_kwargs[key] = sfields[key].convert(v)
    try:
        cfg = ScreenConfig(**screen_kwargs)
    except ValueError as exc:
        raise ScenarioError(f"invalid screen: {exc}", section_line) from None

    return Scenario(
        experiment=experiment,
        name=values.get("name", experiment),
        settings=settings,
        screen=cfg,
        seed=values.get("seed", 0),
        shots=values.get("shots", 10_000),
        output=values.get("output", "all"),
    )


def _plain_word(key: str, v: Value) -> str:
    if v.kind != "word" or ":" in v.text:
        raise ScenarioError(f"type mismatch: {key} expects a plain word, got {_describe(v)}", v.line, v.column)
    return v.value


def serialize(s: Scenario) -> str:
    """Canonical text for ``s``; ``parse_scenario(serialize(s)) == s``."""
    lines = [
        f"experiment = {s.experiment}",
        f"name = {s.name}",
        f"seed = {s.seed}",
        f"shots = {s.shots}",
        f"output = {s.output}",
    ]
    for f in SCHEMAS[s.experiment]:
        lines.append(f"{f.name} = {format_setting(f, s.settings[f.name])}")
    lines.append("")
    lines.append("[screen]")
    for f in SCREEN_FIELDS:
        lines.append(f"{f.name} = {format_setting(f, getattr(s.screen, f.name))}")
    return "\n".join(lines) + "\n"


def describe_schemas() -> str:
    out = ["top level:"]
    out += [f"  {f.describe()}" for f in TOP_LEVEL if f.name != "experiment"]
    out.append("[screen]:")
    out += [f"  {f.describe()}" for f in SCREEN_FIELDS]
    for name, schema in SCHEMAS.items():
        out.append(f"experiment = {name}")
        out += [f"  {f.describe()}" for f in schema]
    return "\n".join(out) + "\n"
