"""Flat key=value experiment configuration.

The config file format is one ``key = value`` pair per line, ``#`` comments,
no sections and no nesting, so every knob stays greppable.  Types are fixed
by the defaults table; list-valued keys take comma-separated entries.
Environment variables GIBBSCHAIN_<KEY> (upper-cased key) override file
values, and CLI flags override both.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import ConfigError
from .profiles import DecayProfile

EXPERIMENTS = (
    "lr_sweep",
    "qbp_locality",
    "truncation_sweep",
    "clustering_sweep",
    "gamma_decay",
    "acceptance",
)

ENV_PREFIX = "GIBBSCHAIN_"


def _floats(text):
    return tuple(float(x) for x in str(text).split(",") if str(x).strip() != "")


def _ints(text):
    return tuple(int(x) for x in str(text).split(",") if str(x).strip() != "")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "acceptance"
    n: int = 10
    local_dim: int = 2
    generator: str = "ising_zz"
    profile: str = "finite_range"
    alpha: float = 3.0
    range_cutoff: int = 1
    kappa: float = 0.5
    stretch_c: float = 1.0
    rate: float = 0.7
    coupling: float = 1.0
    anisotropy: float = 1.5
    seed: int = 7
    beta_list: tuple = (0.5, 1.0)
    t_grid: tuple = (0.0, 0.25, 0.5, 1.0)
    r_list: tuple = ()
    block_len: int = 1
    block_len_list: tuple = ()
    half_width: int = 1
    m_list: tuple = (0, 1, 2, 3)
    x_width: int = 1
    y_width: int = 1
    eps: float = 1e-9
    tau_steps: int = 32
    integrator: str = "cf4"
    residual_gate: float = 1e-6
    dim_cap: int = 4096
    doubled_dim_cap: int = 4096
    branch_cap: int = 64
    obs_x_site: int = -1
    obs_y_site: int = -1
    bond_index: int = 1
    radius_list: tuple = (7, 8, 9, 10)
    threads: int = 1
    output_dir: str = "out"

    def make_profile(self) -> DecayProfile:
        if self.profile == "finite_range":
            return DecayProfile("finite_range", range_cutoff=self.range_cutoff)
        if self.profile == "power_law":
            return DecayProfile("power_law", alpha=self.alpha)
        if self.profile == "stretched_exp":
            return DecayProfile("stretched_exp", kappa=self.kappa, stretch_c=self.stretch_c)
        if self.profile == "exponential":
            return DecayProfile("exponential", rate=self.rate)
        raise ConfigError(f"unknown profile {self.profile!r}")

    def as_lines(self):
        """Config echo in file format, keys sorted."""
        out = []
        for f in sorted(fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) for x in v)
            out.append(f"{f.name} = {v}")
        return out


_PARSERS = {}
for _f in fields(ExperimentConfig):
    if isinstance(_f.default, tuple):
        _PARSERS[_f.name] = (
            _ints
            if _f.name in ("r_list", "m_list", "radius_list", "block_len_list")
            else _floats
        )
    elif isinstance(_f.default, bool):
        _PARSERS[_f.name] = lambda s: str(s).strip().lower() in ("1", "true", "yes")
    elif isinstance(_f.default, int):
        _PARSERS[_f.name] = int
    elif isinstance(_f.default, float):
        _PARSERS[_f.name] = float
    else:
        _PARSERS[_f.name] = lambda s: str(s).strip()


def parse_config_text(text) -> dict:
    """Raw key -> string dict from config text."""
    out = {}
    for lineno, line in enumerate(str(text).splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = body.partition("=")
        out[key.strip()] = value.strip()
    return out


def load_config(path=None, overrides=None, environ=None) -> ExperimentConfig:
    """Config from file, environment and explicit overrides, then validated."""
    raw = {}
    if path is not None:
        with open(path) as fh:
            raw.update(parse_config_text(fh.read()))
    environ = os.environ if environ is None else environ
    for key in _PARSERS:
        env_key = ENV_PREFIX + key.upper()
        if env_key in environ:
            raw[key] = environ[env_key]
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})

    unknown = set(raw) - set(_PARSERS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kwargs = {}
    for key, value in raw.items():
        try:
            kwargs[key] = _PARSERS[key](value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from exc
    cfg = ExperimentConfig(**kwargs)
    validate_config(cfg)
    return cfg


def validate_config(cfg: ExperimentConfig):
    """Reject invalid knobs before any matrix work."""
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {cfg.experiment!r}")
    if cfg.n < 2:
        raise ConfigError("n must be >= 2")
    if cfg.local_dim < 2:
        raise ConfigError("local_dim must be >= 2")
    if cfg.local_dim**cfg.n > cfg.dim_cap:
        raise ConfigError(
            f"dimension {cfg.local_dim**cfg.n} exceeds dim_cap {cfg.dim_cap}"
        )
    if not (0.0 < cfg.eps <= 1e-2):
        raise ConfigError("eps must lie in (0, 1e-2]")
    if cfg.tau_steps < 1:
        raise ConfigError("tau_steps must be >= 1")
    if cfg.integrator not in ("cf4", "midpoint"):
        raise ConfigError(f"unknown integrator {cfg.integrator!r}")
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    cfg.make_profile()
    if cfg.experiment in ("lr_sweep", "qbp_locality", "truncation_sweep"):
        width = cfg.n - cfg.x_width - cfg.y_width
        lens = cfg.block_len_list or (cfg.block_len,)
        for l0 in lens:
            if width % l0 != 0 or (width // l0) % 2 != 0:
                raise ConfigError(
                    f"interior width {width} with block_len {l0} "
                    "must give an even block count"
                )
    if cfg.experiment == "gamma_decay":
        if any(m < 0 for m in cfg.m_list):
            raise ConfigError("m_list entries must be >= 0")
