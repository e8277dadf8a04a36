"""Flat key-value experiment configuration.

One `key = value` pair per line, dotted keys, `#` starts a comment, lists are
comma separated.  `echo` writes the canonical form, which parses back to an
equal config.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigurationError
from .fields import MAX_DIM, TWO_PI

# key -> (kind, default); kinds: int, float, str, path, ints, floats, strs
SCHEMA: dict[str, tuple[str, object]] = {
    "experiment": ("str", None),
    "seed": ("int", 0),
    "output_dir": ("path", None),
    "golden": ("path", None),
    "grid.n": ("int", 2),
    "grid.N": ("ints", (256,)),
    "grid.L": ("float", TWO_PI),
    "sweep.s": ("floats", ()),
    "sweep.q": ("floats", ()),
    "sweep.r": ("floats", ()),
    "sweep.J": ("ints", ()),
    "sweep.seeds": ("int", 0),
    "sweep.alpha": ("floats", ()),
    "sweep.p1": ("floats", ()),
    "sweep.p2": ("floats", ()),
    "sweep.families": ("strs", ()),
    "sweep.k": ("floats", ()),
    "gen.band": ("float", 8.0),
    "gen.beta": ("float", None),
    "construction.scales": ("floats", ()),
    "construction.annulus": ("floats", (2.0 / 3.0, 5.0 / 6.0)),
    "construction.min_ratio": ("float", 4.0),
    "construction.sqrt_exponent": ("float", 0.5),
    "construction.base_scale": ("float", None),
    "construction.carrier": ("float", 8.0),
    "construction.carrier_band": ("floats", (0.5, 1.5)),
    "construction.eta": ("float", 0.3),
    "construction.j0": ("int", 1),
    "construction.width": ("float", 0.5),
}


def _attr(key: str) -> str:
    return key.replace(".", "_")


def _parse_float(text: str, key: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise ConfigurationError(f"{key}: expected a number, got {text!r}") from None
    if math.isnan(v):
        raise ConfigurationError(f"{key}: NaN is not allowed")
    return v


def _parse_int(text: str, key: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ConfigurationError(f"{key}: expected an integer, got {text!r}") from None


def _items(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _parse_value(key: str, text: str):
    kind, _ = SCHEMA[key]
    text = text.strip()
    if kind == "int":
        return _parse_int(text, key)
    if kind == "float":
        return None if text.lower() == "none" else _parse_float(text, key)
    if kind in ("str", "path"):
        return None if text.lower() in ("", "none") else text
    if kind == "ints":
        return tuple(_parse_int(t, key) for t in _items(text))
    if kind == "floats":
        return tuple(_parse_float(t, key) for t in _items(text))
    if kind == "strs":
        return tuple(_items(text))
    raise AssertionError(kind)


def _format_float(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return format(v, ".17g")


def _format_value(key: str, value) -> str:
    kind, _ = SCHEMA[key]
    if value is None:
        return "none"
    if kind == "float":
        return _format_float(value)
    if kind == "floats":
        return ", ".join(_format_float(v) for v in value)
    if kind in ("ints", "strs"):
        return ", ".join(str(v) for v in value)
    return str(value)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int = 0
    output_dir: str | None = None
    golden: str | None = None
    grid_n: int = 2
    grid_N: tuple[int, ...] = (256,)
    grid_L: float = TWO_PI
    sweep_s: tuple[float, ...] = ()
    sweep_q: tuple[float, ...] = ()
    sweep_r: tuple[float, ...] = ()
    sweep_J: tuple[int, ...] = ()
    sweep_seeds: int = 0
    sweep_alpha: tuple[float, ...] = ()
    sweep_p1: tuple[float, ...] = ()
    sweep_p2: tuple[float, ...] = ()
    sweep_families: tuple[str, ...] = ()
    sweep_k: tuple[float, ...] = ()
    gen_band: float = 8.0
    gen_beta: float | None = None
    construction_scales: tuple[float, ...] = ()
    construction_annulus: tuple[float, ...] = (2.0 / 3.0, 5.0 / 6.0)
    construction_min_ratio: float = 4.0
    construction_sqrt_exponent: float = 0.5
    construction_base_scale: float | None = None
    construction_carrier: float = 8.0
    construction_carrier_band: tuple[float, ...] = (0.5, 1.5)
    construction_eta: float = 0.3
    construction_j0: int = 1
    construction_width: float = 0.5
    source: str | None = field(default=None, compare=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        from .experiments import REGISTRY

        if not self.experiment:
            raise ConfigurationError("experiment: missing")
        if self.experiment not in REGISTRY:
            raise ConfigurationError(f"experiment: unknown name {self.experiment!r}; "
                                     f"known: {', '.join(sorted(REGISTRY))}")
        if not 1 <= self.grid_n <= MAX_DIM:
            raise ConfigurationError(f"grid.n: dimension must lie in 1..{MAX_DIM}, got {self.grid_n}")
        for N in self.grid_N:
            if N < 2 or N & (N - 1):
                raise ConfigurationError(f"grid.N: {N} is not a power of two >= 2")
        if not self.grid_L > 0 or not math.isfinite(self.grid_L):
            raise ConfigurationError(f"grid.L: must be positive and finite, got {self.grid_L}")
        if self.sweep_seeds < 0:
            raise ConfigurationError("sweep.seeds: must be >= 0")
        if self.seed < 0:
            raise ConfigurationError("seed: must be >= 0")
        for q in self.sweep_q + self.sweep_r:
            if not q >= 1:
                raise ConfigurationError(f"sweep.q / sweep.r: exponents must lie in [1, inf], got {q}")
        for a in self.sweep_alpha:
            if not 0 < a < 1:
                raise ConfigurationError(f"sweep.alpha: {a} outside (0, 1)")
        for p in self.sweep_p1 + self.sweep_p2:
            if not 1 < p < math.inf:
                raise ConfigurationError(f"sweep.p1 / sweep.p2: {p} outside (1, inf)")
        if len(self.construction_annulus) != 2 or len(self.construction_carrier_band) != 2:
            raise ConfigurationError("construction.annulus and construction.carrier_band need two values")
        REGISTRY[self.experiment].validate(self)

    @property
    def grids(self):
        from .fields import Grid

        return [Grid(self.grid_n, N, self.grid_L) for N in self.grid_N]

    def get(self, key: str):
        return getattr(self, _attr(key))

    def with_values(self, **kw) -> "ExperimentConfig":
        return replace(self, **{_attr(k): v for k, v in kw.items()})

    def echo(self) -> str:
        lines = [f"{key} = {_format_value(key, self.get(key))}" for key in SCHEMA]
        return "\n".join(lines) + "\n"


def parse_config(text: str, source: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigurationError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_value(key, value)
    for key, value in (overrides or {}).items():
        if key not in SCHEMA:
            raise ConfigurationError(f"unknown key {key!r}")
        values[key] = _parse_value(key, value) if isinstance(value, str) else value
    if "experiment" not in values or values["experiment"] is None:
        raise ConfigurationError("experiment: missing")
    kw = {_attr(k): v for k, v in values.items()}
    return ExperimentConfig(source=source, **kw)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path), overrides=overrides)

