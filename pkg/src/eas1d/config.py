"""Run configuration: a flat ``section.key = value`` text format.

Example::

    # model
    kernel.type = power_pair
    kernel.alpha = 1.2
    grid.N = 256
    run.T = 1.0

Unknown keys, duplicate keys and out-of-range values are rejected with the
offending line number and key name.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

PRESETS = ("cosine", "near_vacuum", "random_bandlimited", "constant")
MODES = ("euler_alignment", "burgers")


def _num(lo=-math.inf, hi=math.inf, lo_open=False, hi_open=False):
    def check(v):
        if not math.isfinite(v):
            return "must be finite"
        if (v <= lo if lo_open else v < lo) or (v >= hi if hi_open else v > hi):
            lb = "(" if lo_open else "["
            rb = ")" if hi_open else "]"
            return f"must lie in {lb}{lo}, {hi}{rb}"
        return None
    return check


def _choice(*options):
    def check(v):
        return None if v in options else f"must be one of {', '.join(options)}"
    return check


def opt(default, check=None, doc=""):
    return field(default=default, metadata={"check": check, "doc": doc})


@dataclass(frozen=True)
class KernelConfig:
    type: str = opt("power_pair", _choice("power_pair", "custom_table"))
    alpha: float = opt(1.2, _num(0, 2, True, True))
    beta: float = opt(0.4, _num(0, 2, True, True))
    mu: float = opt(1.0, _num(0))
    table: str = opt("", None, "path of an x, phi table (custom_table)")
    a0: float = opt(0.5, _num(0, 0.5, True), "declared short-range radius (custom_table)")
    c1: float = opt(1.0, _num(1), "declared comparison constant (custom_table)")
    c2: float = opt(1.0, _num(0, lo_open=True), "declared tail bound (custom_table)")
    images: int = opt(64, _num(1, 10**6), "periodic images summed directly")


@dataclass(frozen=True)
class GridConfig:
    N: int = opt(256, _num(16, 2**22))


@dataclass(frozen=True)
class RunSection:
    T: float = opt(1.0, _num(0, lo_open=True))
    mode: str = opt("euler_alignment", _choice(*MODES))
    diag_dt: float = opt(0.01, _num(0, lo_open=True))
    snapshot_dt: float = opt(0.1, _num(0, lo_open=True))
    energy_every: int = opt(50, _num(0), "diagnostic samples between energy evaluations; 0 disables")


@dataclass(frozen=True)
class StepConfig:
    cfl: float = opt(0.4, _num(0, 10, True))
    cfl_grad: float = opt(0.05, _num(0, 10, True), "dt <= cfl_grad / max|u_x|")
    stab: float = opt(2.5, _num(0, 2.8, True))
    dt_min: float = opt(1e-8, _num(0, lo_open=True))
    dt_max: float = opt(1e-2, _num(0, lo_open=True))
    vacuum_eps: float = opt(1e-6, _num(0, lo_open=True))
    gradient_cap: float = opt(1e6, _num(0, lo_open=True))


@dataclass(frozen=True)
class InitConfig:
    preset: str = opt("cosine", _choice(*PRESETS))
    rho_bar: float = opt(1.0, _num(0, lo_open=True))
    a: float = opt(0.3, _num(0), "density amplitude")
    b: float = opt(0.0, _num(), "velocity amplitude")
    m: int = opt(1, _num(1), "density mode (cosine) or highest random mode")
    n: int = opt(1, _num(1), "velocity mode")
    seed: int = opt(0, _num(0, 2**63 - 1))
    velocity: str = opt("sine", _choice("sine", "balanced"),
                        "balanced adds L(varphi0) so that G0 carries only the sine part")


@dataclass(frozen=True)
class OutputConfig:
    dir: str = opt("out")
    snapshots: bool = opt(True)


@dataclass(frozen=True)
class SymbolConfig:
    method: str = opt("auto", _choice("auto", "closed_form", "quadrature"))


@dataclass(frozen=True)
class MocConfig:
    rho_min_mode: str = opt("theoretical", _choice("theoretical", "empirical"))


@dataclass(frozen=True)
class RunConfig:
    kernel: KernelConfig = field(default_factory=KernelConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    run: RunSection = field(default_factory=RunSection)
    step: StepConfig = field(default_factory=StepConfig)
    init: InitConfig = field(default_factory=InitConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    symbol: SymbolConfig = field(default_factory=SymbolConfig)
    moc: MocConfig = field(default_factory=MocConfig)

    def get(self, key: str):
        section, name = _split_key(key)
        return getattr(getattr(self, section), name)

    def with_value(self, key: str, value) -> "RunConfig":
        """Copy with one key replaced; ``value`` may be text or already typed."""
        section, name = _split_key(key)
        ftype = _field_type(section, name)
        if isinstance(value, str) and ftype is not str:
            value = _coerce(ftype, value, key, None)
        sec = replace(getattr(self, section), **{name: value})
        cfg = replace(self, **{section: sec})
        _validate(cfg, {})
        return cfg


_SECTION_TYPES = {
    "kernel": KernelConfig, "grid": GridConfig, "run": RunSection, "step": StepConfig,
    "init": InitConfig, "output": OutputConfig, "symbol": SymbolConfig, "moc": MocConfig,
}
_TYPES = {"float": float, "int": int, "str": str, "bool": bool}


def _split_key(key):
    if key.count(".") != 1:
        raise ConfigError(f"malformed key {key!r}", key=key)
    section, name = key.split(".")
    if section not in _SECTION_TYPES or name not in {f.name for f in fields(_SECTION_TYPES[section])}:
        raise ConfigError(f"unknown key {key!r}", key=key)
    return section, name


def _field(section, name):
    return next(f for f in fields(_SECTION_TYPES[section]) if f.name == name)


def _field_type(section, name):
    t = _field(section, name).type
    return _TYPES[t] if isinstance(t, str) else t


def all_keys():
    return [f"{s}.{f.name}" for s, cls in _SECTION_TYPES.items() for f in fields(cls)]


def _coerce(ftype, text, key, line):
    text = text.strip()
    try:
        if ftype is bool:
            low = text.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(text)
        if ftype is int:
            try:
                return int(text)  # exact, also beyond 2**53
            except ValueError:
                v = float(text)  # integral literals such as 1e3
                if not math.isfinite(v) or v != int(v):
                    raise ValueError(text) from None
                return int(v)
        if ftype is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"line {line}: {key} expects {ftype.__name__}, got {text!r}"
                          if line else f"{key} expects {ftype.__name__}, got {text!r}",
                          line=line, key=key) from None


def _fail(msg, key, lines):
    line = lines.get(key)
    prefix = f"line {line}: " if line else ""
    raise ConfigError(f"{prefix}{key} {msg}", line=line, key=key)


def _validate(cfg: RunConfig, lines):
    for section, cls in _SECTION_TYPES.items():
        sec = getattr(cfg, section)
        for f in fields(cls):
            check = f.metadata.get("check")
            if check is not None:
                msg = check(getattr(sec, f.name))
                if msg:
                    _fail(msg, f"{section}.{f.name}", lines)
    k = cfg.kernel
    if k.type == "power_pair" and not k.beta < k.alpha:
        _fail("must be smaller than kernel.alpha", "kernel.beta", lines)
    if k.type == "custom_table" and not k.table:
        _fail("is required for custom_table kernels", "kernel.table", lines)
    if cfg.grid.N % 2:
        _fail("must be even", "grid.N", lines)
    if cfg.step.dt_min > cfg.step.dt_max:
        _fail("must not exceed step.dt_max", "step.dt_min", lines)
    if 3 * cfg.init.m >= cfg.grid.N or 3 * cfg.init.n >= cfg.grid.N:
        _fail("must stay below grid.N / 3", "init.m" if 3 * cfg.init.m >= cfg.grid.N else "init.n", lines)
    if cfg.init.preset in ("cosine", "near_vacuum", "random_bandlimited") and cfg.init.a >= cfg.init.rho_bar:
        _fail("must be smaller than init.rho_bar", "init.a", lines)


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration text; missing keys take defaults."""
    values: dict[str, dict] = {s: {} for s in _SECTION_TYPES}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            section, name = _split_key(key)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}", line=lineno, key=key) from None
        if key in lines:
            raise ConfigError(f"line {lineno}: duplicate key {key} (first set on line {lines[key]})",
                              line=lineno, key=key)
        if value == "":
            raise ConfigError(f"line {lineno}: missing value for {key}", line=lineno, key=key)
        lines[key] = lineno
        values[section][name] = _coerce(_field_type(section, name), value, key, lineno)
    cfg = RunConfig(**{s: cls(**values[s]) for s, cls in _SECTION_TYPES.items()})
    _validate(cfg, lines)
    return cfg


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def serialize_config(cfg: RunConfig) -> str:
    """Every non-empty key in canonical order; ``parse_config`` inverts it exactly."""
    out = []
    for section, cls in _SECTION_TYPES.items():
        sec = getattr(cfg, section)
        for f in fields(cls):
            v = getattr(sec, f.name)
            if v == "":
                continue  # empty strings are the default and have no literal form
            out.append(f"{section}.{f.name} = {_format(v)}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def as_dict(cfg: RunConfig) -> dict:
    return {f"{s}.{k}": v for s, d in dataclasses.asdict(cfg).items() for k, v in d.items()}
