"""Run configuration: strict YAML parsing, defaults and normalized echo."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field as dc_field
from typing import Optional

import yaml

from .field import TWO_PI, PotentialSpec, TorusGrid
from .stationary import NEWTON_MAXITER, NEWTON_TOL, Params

COMMANDS = ("solve", "continue", "spectrum", "veff", "simulate", "reduce", "asymptotics")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""


@dataclass
class PotentialSection:
    mean: float = 0.1
    cosine: list = dc_field(default_factory=lambda: [0.5])
    sine: list = dc_field(default_factory=list)
    period: float = TWO_PI


@dataclass
class ParamsSection:
    d: float = 0.1
    zeta: float = 3.7
    mu: float = 1.0
    f0: float = 2.0
    eps: float = 0.0
    potential: PotentialSection = dc_field(default_factory=PotentialSection)


@dataclass
class FieldSection:
    n: int = 256
    length: float = TWO_PI


@dataclass
class StationarySection:
    guess: str = "auto"  # auto | bright | dark
    tol: float = NEWTON_TOL
    maxiter: int = NEWTON_MAXITER


@dataclass
class PinningSection:
    zero: str = "negative"  # negative | positive | all
    samples: int = 720


@dataclass
class ContinuationSection:
    parameter: str = "eps"
    half_width: float = 0.1
    ds: float = 1e-2
    ds_min: float = 1e-6
    ds_max: float = 5e-2
    max_points: int = 400


@dataclass
class EvolutionSection:
    eps: float = 0.05
    dt: float = 1e-3
    t_end: float = 100.0
    record_every: int = 100
    perturbation: str = "critical"  # critical | random
    scale: float = 1e-4


@dataclass
class DualPumpSection:
    d: float = 0.1
    zeta: float = 3.7
    mu: float = 1.0
    f0: float = 2.0
    f1: float = 0.1
    k1: int = 1
    nu1: float = 0.001


@dataclass
class AsymptoticsSection:
    zeta: float = 3.7
    d: float = 0.1
    f0: float = 2.0
    mus: list = dc_field(default_factory=lambda: [0.025, 0.05])
    samples: int = 64


@dataclass
class ReductionsSection:
    dual_pump: DualPumpSection = dc_field(default_factory=DualPumpSection)
    halve_f1: bool = True
    asymptotics: AsymptoticsSection = dc_field(default_factory=AsymptoticsSection)


@dataclass
class OutputSection:
    dir: str = "out"
    plots: bool = True


@dataclass
class RunConfig:
    command: str = "veff"
    seed: int = 0
    params: ParamsSection = dc_field(default_factory=ParamsSection)
    field: FieldSection = dc_field(default_factory=FieldSection)
    stationary: StationarySection = dc_field(default_factory=StationarySection)
    pinning: PinningSection = dc_field(default_factory=PinningSection)
    continuation: ContinuationSection = dc_field(default_factory=ContinuationSection)
    evolution: EvolutionSection = dc_field(default_factory=EvolutionSection)
    reductions: ReductionsSection = dc_field(default_factory=ReductionsSection)
    output: OutputSection = dc_field(default_factory=OutputSection)

    # derived objects -----------------------------------------------------------------
    def model_params(self) -> Params:
        s = self.params
        pot = PotentialSpec(s.potential.mean, tuple(s.potential.cosine), tuple(s.potential.sine),
                            s.potential.period)
        return Params(d=s.d, zeta=s.zeta, mu=s.mu, f0=s.f0, eps=s.eps, potential=pot)

    def grid(self) -> TorusGrid:
        return TorusGrid(self.field.n, self.field.length)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SCALARS = {float: (int, float), int: (int,), str: (str,), bool: (bool,)}


def _build(cls, data, path: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path or '<root>'}: expected a mapping, got {type(data).__name__}")
    hints = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(hints))
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"{where}{unknown[0]}: unknown key")
    kwargs = {}
    for name, f in hints.items():
        if name not in data:
            continue
        key = f"{path}.{name}" if path else name
        value = data[name]
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[name] = _build(type(default), value, key)
        elif isinstance(default, list):
            if not isinstance(value, list) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
            ):
                raise ConfigError(f"{key}: expected a list of numbers")
            kwargs[name] = [float(v) for v in value]
        else:
            want = type(default)
            ok = isinstance(value, _SCALARS[want]) and not (want is not bool and isinstance(value, bool))
            if not ok:
                raise ConfigError(f"{key}: expected {want.__name__}, got {type(value).__name__}")
            kwargs[name] = want(value)
    return cls(**kwargs)


def _choice(key: str, value: str, options):
    if value not in options:
        raise ConfigError(f"{key}: must be one of {', '.join(options)} (got {value!r})")


def _positive(key: str, value, strict: bool = True):
    if not (value > 0 if strict else value >= 0):
        raise ConfigError(f"{key}: must be {'positive' if strict else 'non-negative'}")


def validate(cfg: RunConfig) -> RunConfig:
    _choice("command", cfg.command, COMMANDS)
    try:
        p = cfg.model_params()
    except ValueError as exc:
        msg = str(exc)
        raise ConfigError(f"params.{msg.removeprefix('Params.')}") from exc
    try:
        grid = cfg.grid()
    except ValueError as exc:
        raise ConfigError(f"field.n: {exc}") from exc
    try:
        p.potential.sample(grid)
    except ValueError as exc:
        raise ConfigError(f"params.potential: {exc}") from exc
    _choice("stationary.guess", cfg.stationary.guess, ("auto", "bright", "dark"))
    _positive("stationary.tol", cfg.stationary.tol)
    _positive("stationary.maxiter", cfg.stationary.maxiter)
    _choice("pinning.zero", cfg.pinning.zero, ("negative", "positive", "all"))
    _positive("pinning.samples", cfg.pinning.samples)
    c = cfg.continuation
    _choice("continuation.parameter", c.parameter, ("eps", "zeta"))
    for name in ("half_width", "ds", "ds_min", "ds_max", "max_points"):
        _positive(f"continuation.{name}", getattr(c, name))
    if not c.ds_min <= c.ds <= c.ds_max:
        raise ConfigError("continuation.ds: must lie in [ds_min, ds_max]")
    e = cfg.evolution
    for name in ("dt", "t_end", "record_every", "scale"):
        _positive(f"evolution.{name}", getattr(e, name))
    _choice("evolution.perturbation", e.perturbation, ("critical", "random"))
    dp = cfg.reductions.dual_pump
    if dp.k1 == 0:
        raise ConfigError("reductions.dual_pump.k1: must be nonzero")
    if abs(dp.f1) >= abs(dp.f0):
        raise ConfigError("reductions.dual_pump.f1: reduction needs |f1| < |f0|")
    _positive("reductions.dual_pump.mu", dp.mu)
    a = cfg.reductions.asymptotics
    _positive("reductions.asymptotics.d", a.d)
    _positive("reductions.asymptotics.zeta", a.zeta)
    if len(a.mus) < 2 or any(m <= 0 for m in a.mus):
        raise ConfigError("reductions.asymptotics.mus: need at least two positive values")
    return cfg


def parse_config(text: str, overrides: Optional[dict] = None) -> RunConfig:
    """Parse and validate a YAML document; ``overrides`` are applied on top."""
    try:
        data = yaml.safe_load(text) if text.strip() else {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"<document>: not valid YAML ({exc})") from exc
    data = data or {}
    for path, value in (overrides or {}).items():
        node = data
        *head, last = path.split(".")
        for k in head:
            node = node.setdefault(k, {})
        node[last] = value
    return validate(_build(RunConfig, data, ""))


def echo(cfg: RunConfig) -> str:
    """Normalized YAML with every default spelled out."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)
