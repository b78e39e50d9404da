"""Run configuration: a flat ``key = value`` text format.

Blank lines and ``#`` comments are ignored.  Lists are comma separated, the
viewport is written ``WIDTHxHEIGHT`` and ``m = auto`` leaves the slice counts
to the planner.  Required keys are ``l0``, ``d0``, ``L`` and ``seed``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .gridgen import ParamSeed
from .planner import ParamPlan, PlanError, validate_plan

EXPERIMENTS = ("crossing", "fkg", "road", "scaling", "folded")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = ", ".join(x for x in (f"line {line}" if line else "", f"key '{key}'" if key else "") if x)
        super().__init__(f"{where}: {message}" if where else message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    l0: int
    d0: int
    L: tuple[int, ...]
    seed: int
    viewport: tuple[int, int] = (600, 600)
    gamma: float = 1.0
    nu0: int = 1
    c: float = 0.5
    p: tuple[float, ...] = (0.6,)
    trials: int = 1000
    experiments: tuple[str, ...] = EXPERIMENTS
    out: str = "out"
    m: tuple[int, ...] | None = None
    strict: bool = False
    jobs: int = 1

    @property
    def param_seed(self) -> ParamSeed:
        return ParamSeed(self.l0, self.d0, self.L, self.seed)

    @property
    def plan(self) -> ParamPlan:
        return ParamPlan(self.param_seed, self.gamma, self.nu0, self.c, self.m, self.strict)

    def replace(self, **kw) -> "RunConfig":
        return check_config(dataclasses.replace(self, **kw))


REQUIRED = ("l0", "d0", "L", "seed")
_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(",") if x.strip())


def _floats(s: str) -> tuple[float, ...]:
    return tuple(float(x) for x in s.split(",") if x.strip())


def _bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _viewport(s: str) -> tuple[int, int]:
    w, h = s.lower().split("x")
    return int(w), int(h)


_PARSE = {
    "l0": int,
    "d0": int,
    "L": _ints,
    "seed": int,
    "viewport": _viewport,
    "gamma": float,
    "nu0": int,
    "c": float,
    "p": _floats,
    "trials": int,
    "experiments": lambda s: tuple(x.strip() for x in s.split(",") if x.strip()),
    "out": str.strip,
    "m": lambda s: None if s.strip().lower() == "auto" else _ints(s),
    "strict": _bool,
    "jobs": int,
}


def _fmt_float(x: float) -> str:
    return repr(float(x))


_SERIALIZE = {
    "L": lambda v: ", ".join(map(str, v)),
    "viewport": lambda v: f"{v[0]}x{v[1]}",
    "gamma": _fmt_float,
    "c": _fmt_float,
    "p": lambda v: ", ".join(_fmt_float(x) for x in v),
    "experiments": lambda v: ", ".join(v),
    "m": lambda v: "auto" if v is None else ", ".join(map(str, v)),
    "strict": lambda v: "true" if v else "false",
}


def check_config(cfg: RunConfig, lines: dict[str, int] | None = None) -> RunConfig:
    """Range checks plus full plan validation; raises :class:`ConfigError`."""
    lines = lines or {}

    def fail(key, msg):
        raise ConfigError(msg, lines.get(key), key)

    if cfg.l0 < 1:
        fail("l0", "must be >= 1")
    if cfg.d0 < 1:
        fail("d0", "must be >= 1")
    if not cfg.L or any(x < 2 for x in cfg.L):
        fail("L", "needs at least one entry, each >= 2")
    if min(cfg.viewport) < 1:
        fail("viewport", "must be positive")
    if not cfg.gamma > 0:
        fail("gamma", "must be positive")
    if cfg.nu0 < 1:
        fail("nu0", "must be a positive integer")
    if not 0 < cfg.c < 1:
        fail("c", "must lie in (0, 1)")
    if not cfg.p or any(not 0 <= x <= 1 for x in cfg.p):
        fail("p", "each value must lie in [0, 1]")
    if cfg.trials < 1:
        fail("trials", "must be >= 1")
    if cfg.jobs == 0:
        fail("jobs", "must be nonzero")
    for e in cfg.experiments:
        if e not in EXPERIMENTS:
            fail("experiments", f"unknown experiment {e!r}")
    if not cfg.out:
        fail("out", "must not be empty")
    try:
        validate_plan(cfg.plan)
    except PlanError as exc:
        fail("m" if cfg.m is not None else "L", f"plan rejected: {exc}")
    except (ValueError, OverflowError) as exc:
        fail("L", f"plan rejected: {exc}")
    return cfg


def parse_config(text: str) -> RunConfig:
    values: dict = {}
    lines: dict[str, int] = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", no)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _FIELDS:
            raise ConfigError("unknown key", no, key)
        if key in values:
            raise ConfigError("duplicate key", no, key)
        try:
            values[key] = _PARSE[key](val)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"bad value {val!r} ({exc})", no, key) from None
        lines[key] = no
    for key in REQUIRED:
        if key not in values:
            raise ConfigError("missing required key", None, key)
    return check_config(RunConfig(**values), lines)


def serialize_config(cfg: RunConfig) -> str:
    out = []
    for name in _FIELDS:
        v = getattr(cfg, name)
        out.append(f"{name} = {_SERIALIZE.get(name, str)(v)}")
    return "\n".join(out) + "\n"


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
