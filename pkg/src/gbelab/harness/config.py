"""Experiment configuration: a single JSON document with CLI overrides.

Any of ``n``, ``alpha`` and ``E`` may be given as a list; :func:`parse_sweep`
expands the Cartesian product into one config per grid point.
"""
from __future__ import annotations

import dataclasses
import itertools
import json
from dataclasses import dataclass, field

from ..parallel import default_workers

EXPERIMENTS = ("dos-table", "global-law", "clt", "sigma2-identity", "local-law",
               "bulk-poisson", "wegner-minami", "green-decay")
SWEEP_FIELDS = ("n", "alpha", "E")
REQUIRED = ("experiment", "alpha")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    alpha: float
    n: int = 200
    E: float = 0.0
    sigma: float = 0.0
    tau: float = 1.0
    replicas: int = 1000
    seed: int = 0
    W: float = 10.0
    out: str = "results"
    workers: int = field(default_factory=default_workers)
    # test function for clt and sigma2-identity
    function: str = "x^2"
    # dos-table grid and truncation oracle
    emin: float = -4.0
    emax: float = 4.0
    step: float = 0.5
    N: int = 5000
    eta: float = 1e-3
    # global-law
    kmax: int = 4
    # sigma2-identity
    grid_size: int = 11
    n_iid: int = 500
    replicas_iid: int = 5000
    # local-law: bin width in rescaled units
    bin_width: float = 0.5
    # bulk-poisson: half-open [lo, hi) intervals in rescaled units
    intervals: tuple = ((-2.0, 0.0), (0.0, 2.0))
    # spectral parameter for wegner-minami (default 0.5 + 0.01i) and
    # green-decay (default 0.001i); None picks the experiment default
    z: tuple | None = None
    # wegner-minami
    minami_n: int = 128
    minami_replicas: int = 50000
    block_length: int = 64
    minami_intervals: tuple = ((0.0, 1.0), (0.0, 0.5))
    # green-decay
    s: float = 0.2
    max_distance: int = 100
    fit_range: tuple = (10, 100)

    @property
    def zeta(self) -> complex:
        return complex(self.sigma, self.tau)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_INT = {"n", "replicas", "seed", "workers", "N", "kmax", "grid_size", "n_iid", "replicas_iid",
        "minami_n", "minami_replicas", "block_length", "max_distance"}
_STR = {"experiment", "out", "function"}
_PAIR = {"z", "fit_range"}
_PAIRS = {"intervals", "minami_intervals"}


def _number(path, v, integer):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(v).__name__}")
    if integer:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(path, "expected an integer")
        return int(v)
    return float(v)


def _pair(path, v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(path, "expected a two-element list")
    return tuple(_number(f"{path}[{i}]", x, False) for i, x in enumerate(v))


def _coerce(name, v):
    if v is None and name == "z":
        return None
    if name in _STR:
        if not isinstance(v, str):
            raise ConfigError(name, f"expected a string, got {type(v).__name__}")
        return v
    if name in _PAIR:
        p = _pair(name, v)
        return (int(p[0]), int(p[1])) if name == "fit_range" else p
    if name in _PAIRS:
        if not isinstance(v, (list, tuple)) or not v:
            raise ConfigError(name, "expected a nonempty list of [lo, hi] pairs")
        return tuple(_pair(f"{name}[{i}]", x) for i, x in enumerate(v))
    return _number(name, v, name in _INT)


def _validate(c: ExperimentConfig):
    if c.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {c.experiment!r}; "
                                        f"choose one of {', '.join(EXPERIMENTS)}")
    checks = [
        ("replicas", c.replicas >= 1, "must be at least 1"),
        ("n", c.n >= 1, "must be at least 1"),
        ("alpha", c.alpha >= 0, "must be non-negative"),
        ("tau", c.tau > 0, "must be positive"),
        ("W", c.W > 0, "must be positive"),
        ("workers", c.workers >= 1, "must be at least 1"),
        ("step", c.step > 0, "must be positive"),
        ("N", c.N >= 100, "must be at least 100"),
        ("eta", c.eta > 0, "must be positive"),
        ("grid_size", c.grid_size >= 5, "must be at least 5"),
        ("block_length", c.block_length >= 10, "must be at least 10"),
        ("s", 0 < c.s < 0.5, "must lie in (0, 1/2)"),
        ("seed", 0 <= c.seed < 2 ** 64, "must be a 64-bit unsigned integer"),
    ]
    for name, ok, msg in checks:
        if not ok:
            raise ConfigError(name, msg)


def _build(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    doc = dict(doc)
    if "zeta" in doc:
        zeta = _pair("zeta", doc.pop("zeta"))
        doc.setdefault("sigma", zeta[0])
        doc.setdefault("tau", zeta[1])
    for name in REQUIRED:
        if name not in doc:
            raise ConfigError(name, "required field is missing")
    kwargs = {}
    for k, v in doc.items():
        if k not in _FIELDS:
            raise ConfigError(k, "unknown field")
        kwargs[k] = _coerce(k, v)
    c = ExperimentConfig(**kwargs)
    _validate(c)
    return c


def _load(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("<document>", f"malformed JSON: {e}") from None


def parse_sweep(text: str, overrides: dict | None = None):
    """All configs of a (possibly swept) document, in product order."""
    doc = _load(text) if isinstance(text, str) else dict(text)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    doc.update({k: v for k, v in (overrides or {}).items() if v is not None})
    axes = [(k, doc[k]) for k in SWEEP_FIELDS if isinstance(doc.get(k), list)]
    for k, vals in axes:
        if not vals:
            raise ConfigError(k, "sweep list is empty")
    if not axes:
        return [_build(doc)]
    out = []
    for combo in itertools.product(*(v for _, v in axes)):
        d = dict(doc)
        d.update({k: v for (k, _), v in zip(axes, combo)})
        out.append(_build(d))
    return out


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Validated config with defaults filled.  Raises :class:`ConfigError`."""
    configs = parse_sweep(text, overrides)
    if len(configs) != 1:
        raise ConfigError(SWEEP_FIELDS[0], "document describes a sweep; use parse_sweep")
    return configs[0]


def config_to_dict(c: ExperimentConfig) -> dict:
    d = dataclasses.asdict(c)
    for k in _PAIR | _PAIRS:
        d[k] = json.loads(json.dumps(d[k]))  # tuples become lists
    return d


def serialize_config(c: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(c), indent=2, sort_keys=True)
