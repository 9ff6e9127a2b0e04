"""Scenario configuration read from JSON.

Field names match the dataclass attributes exactly; unknown keys, wrong
types and out-of-range values raise :class:`ConfigError` naming the field
path (for example ``fp.c_pq`` or ``initial_state.alpha``).
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "FPBlock",
    "InitialState",
    "GridBlock",
    "WignerBlock",
    "OutputBlock",
    "CustomBlock",
    "SCENARIOS",
    "load_config",
    "parse_config",
]

SCENARIOS = ("damped-oscillator", "fokker-planck", "algebra-check", "custom")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class FPBlock:
    c_qq: float = -0.05
    c_qp: float = 1.0
    c_pq: float = -1.0
    c_pp: float = -0.05
    d_qq: float = 0.025
    d_qp: float = 0.0
    d_pp: float = 0.025
    # "h_star" (trace preserving), "quoted" (-2(c_pp + c_qq)) or a number
    h: Any = "h_star"


@dataclass
class InitialState:
    kind: str = "coherent"
    alpha: Any = 1.0  # real number or [re, im]
    k: int = 0

    @property
    def alpha_complex(self) -> complex:
        a = self.alpha
        return complex(a[0], a[1]) if isinstance(a, list) else complex(a)


@dataclass
class GridBlock:
    q_min: float = -6.0
    q_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    nq: int = 121
    np: int = 121
    dt: float = 0.005


@dataclass
class WignerBlock:
    every: int = 1  # write every k-th recorded snapshot
    q_min: float = -5.0
    q_max: float = 5.0
    p_min: float = -5.0
    p_max: float = 5.0
    nq: int = 41
    np: int = 41


@dataclass
class OutputBlock:
    dir: str = "out"
    dump_generator: bool = False


@dataclass
class CustomBlock:
    # each term: [coeff, qpow, ppow, dqpow, dppow]
    terms: list = field(default_factory=list)
    form: str = "QP"
    picture: str = "schrodinger"


@dataclass
class ScenarioConfig:
    scenario: str = "damped-oscillator"
    N: int = 40
    hbar: float = 1.0
    mass: float = 1.0
    omega: float = 1.0
    gamma: float = 0.1
    fp: FPBlock = field(default_factory=FPBlock)
    dt: float = 0.01
    steps: int = 500
    snapshot_stride: int = 10
    method: str = "EXPM"
    initial_state: InitialState = field(default_factory=InitialState)
    grid: GridBlock | None = None
    wigner: WignerBlock | None = None
    custom: CustomBlock | None = None
    profile: str = "default"
    seed: int = 0
    output: OutputBlock = field(default_factory=OutputBlock)

    def to_dict(self) -> dict:
        return asdict(self)

    def echo(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


_BLOCKS = {"fp": FPBlock, "initial_state": InitialState, "grid": GridBlock, "wigner": WignerBlock,
           "output": OutputBlock, "custom": CustomBlock}


def _number(path, v, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(v).__name__}")
    if integer:
        if int(v) != v:
            raise ConfigError(path, f"expected an integer, got {v}")
        return int(v)
    return float(v)


def _fill(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(prefix, "expected an object")
    known = {f.name: f for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")
    kwargs = {}
    defaults = cls()
    for name, f in known.items():
        if name not in data:
            continue
        path = f"{prefix}.{name}" if prefix else name
        v = data[name]
        current = getattr(defaults, name)
        if prefix == "" and name in _BLOCKS:
            kwargs[name] = None if v is None else _fill(_BLOCKS[name], v, path)
        elif name in ("h", "alpha", "terms"):
            kwargs[name] = v
        elif isinstance(current, bool):
            if not isinstance(v, bool):
                raise ConfigError(path, "expected true or false")
            kwargs[name] = v
        elif isinstance(current, int):
            kwargs[name] = _number(path, v, integer=True)
        elif isinstance(current, float):
            kwargs[name] = _number(path, v)
        elif isinstance(current, str):
            if not isinstance(v, str):
                raise ConfigError(path, "expected a string")
            kwargs[name] = v
        else:
            kwargs[name] = v
    return cls(**kwargs)


def _validate(cfg: ScenarioConfig) -> None:
    if cfg.scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}")
    if cfg.N < 8:
        raise ConfigError("N", "must be at least 8")
    for name in ("hbar", "mass", "omega"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(name, "must be positive")
    if cfg.gamma < 0:
        raise ConfigError("gamma", "must be non-negative")
    if not cfg.dt > 0:
        raise ConfigError("dt", "must be positive")
    if cfg.steps < 1:
        raise ConfigError("steps", "must be at least 1")
    if cfg.snapshot_stride < 1:
        raise ConfigError("snapshot_stride", "must be at least 1")
    if cfg.method.upper() not in ("EXPM", "RK4"):
        raise ConfigError("method", "must be EXPM or RK4")
    cfg.method = cfg.method.upper()
    if cfg.profile not in ("default", "strict"):
        raise ConfigError("profile", "must be default or strict")
    if cfg.seed < 0:
        raise ConfigError("seed", "must be non-negative")
    st = cfg.initial_state
    if st.kind == "coherent":
        a = st.alpha
        if isinstance(a, list):
            if len(a) != 2:
                raise ConfigError("initial_state.alpha", "expected [re, im]")
            for i, x in enumerate(a):
                _number(f"initial_state.alpha[{i}]", x)
        else:
            _number("initial_state.alpha", a)
        if abs(st.alpha_complex) ** 2 > cfg.N / 4:
            raise ConfigError("initial_state.alpha", f"|alpha|^2 must not exceed N/4 = {cfg.N / 4:g}")
    elif st.kind == "fock":
        if not 0 <= st.k < cfg.N:
            raise ConfigError("initial_state.k", f"must lie in 0..{cfg.N - 1}")
    else:
        raise ConfigError("initial_state.kind", "must be coherent or fock")
    h = cfg.fp.h
    if not (h in ("h_star", "quoted") or (isinstance(h, (int, float)) and not isinstance(h, bool))):
        raise ConfigError("fp.h", "must be 'h_star', 'quoted' or a number")
    if cfg.scenario == "fokker-planck" and cfg.fp.c_pq == 0:
        raise ConfigError("fp.c_pq", "must be nonzero (mass -1/c_pq)")
    for blk in ("grid", "wigner"):
        g = getattr(cfg, blk)
        if g is not None:
            if not (g.q_max > g.q_min and g.p_max > g.p_min):
                raise ConfigError(blk, "bounds must satisfy max > min")
            if g.nq < 8 or g.np < 8:
                raise ConfigError(f"{blk}.nq", "need at least 8 points per axis")
    if cfg.grid is not None:
        ratio = cfg.dt * cfg.snapshot_stride / cfg.grid.dt
        if cfg.grid.dt <= 0 or abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigError("grid.dt", "must divide dt * snapshot_stride")
    if cfg.wigner is not None and cfg.wigner.every < 1:
        raise ConfigError("wigner.every", "must be at least 1")
    if cfg.scenario == "custom":
        c = cfg.custom
        if c is None or not c.terms:
            raise ConfigError("custom.terms", "custom scenario needs a non-empty term list")
        for i, t in enumerate(c.terms):
            if not isinstance(t, list) or len(t) != 5:
                raise ConfigError(f"custom.terms[{i}]", "expected [coeff, qpow, ppow, dqpow, dppow]")
            _number(f"custom.terms[{i}][0]", t[0])
            for j in range(1, 5):
                if _number(f"custom.terms[{i}][{j}]", t[j], integer=True) < 0:
                    raise ConfigError(f"custom.terms[{i}][{j}]", "powers must be non-negative")
        if c.form not in ("QP", "SYMMETRIC"):
            raise ConfigError("custom.form", "must be QP or SYMMETRIC")
        if c.picture not in ("schrodinger", "heisenberg"):
            raise ConfigError("custom.picture", "must be schrodinger or heisenberg")


def parse_config(data: dict) -> ScenarioConfig:
    cfg = _fill(ScenarioConfig, data, "")
    _validate(cfg)
    return cfg


def load_config(path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc})") from exc
    return parse_config(data)
