"""Experiment configuration: one JSON document per run."""

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import InvalidArgument
from .symbols import make_symbol

EXPERIMENTS = ("assemble", "profile", "certify", "verify", "example")


def _increasing(name, values, kind=float):
    try:
        values = [kind(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"{name} must be a list of numbers") from exc
    if not values:
        raise InvalidArgument(f"{name} must be non-empty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidArgument(f"{name} must be strictly increasing")
    return values


@dataclass
class ExperimentConfig:
    """Parsed and validated run configuration.

    ``symbol`` holds the family parameters plus ``n`` and ``d``.  Ladders
    must be non-empty and strictly increasing.  A fixed ``seed`` makes the
    whole run reproducible byte for byte.
    """

    experiment: str
    symbol: dict = field(default_factory=lambda: {"family": "constant", "n": 1, "d": 1})
    D_ladder: list = field(default_factory=lambda: [8])
    d_ladder: list = field(default_factory=lambda: [2, 8, 32])
    order: int = 32
    radii: list = field(default_factory=lambda: [0.5 * k for k in range(11)])
    out: str = "bargmann"
    seed: int = 0
    threads: int = 1
    example: str = "star1"
    suite: str = "full"
    functional: str = "stroethoff"
    g: list = None
    schur_radii: list = field(default_factory=lambda: [1.0, 2.0, 3.0])
    thresholds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not isinstance(self.symbol, dict) or "family" not in self.symbol:
            raise InvalidArgument("symbol must be an object with a 'family' entry")
        self.D_ladder = _increasing("D_ladder", self.D_ladder, int)
        self.d_ladder = _increasing("d_ladder", self.d_ladder, int)
        self.radii = _increasing("radii", self.radii)
        self.schur_radii = _increasing("schur_radii", self.schur_radii)
        if min(self.D_ladder) < 0 or min(self.d_ladder) < 1 or min(self.radii) < 0:
            raise InvalidArgument("ladders out of range")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")
        if int(self.order) < 1 or int(self.threads) < 1:
            raise InvalidArgument("order and threads must be positive")
        self.order, self.threads = int(self.order), int(self.threads)
        if self.suite not in ("quick", "full"):
            raise InvalidArgument(f"suite must be 'quick' or 'full', got {self.suite!r}")
        if self.functional not in ("stroethoff", "necessary"):
            raise InvalidArgument(f"functional must be 'stroethoff' or 'necessary', got {self.functional!r}")
        if self.example not in ("star1", "star2", "taebaek"):
            raise InvalidArgument(f"unknown example {self.example!r}")
        unknown = set(self.thresholds) - {"plateau", "decay", "stable"}
        if unknown:
            raise InvalidArgument(f"unknown thresholds {sorted(unknown)}")
        self.make_symbol()  # fail early on a bad symbol

    @property
    def n(self):
        return int(self.symbol.get("n", 1))

    @property
    def d(self):
        return int(self.symbol.get("d", 1))

    def make_symbol(self):
        params = {k: v for k, v in self.symbol.items() if k not in ("n", "d")}
        return make_symbol(params, self.n, self.d)

    def g_vector(self):
        if self.g is None:
            return None
        g = np.array([complex(*x) if isinstance(x, list) else complex(x) for x in self.g])
        if g.shape != (self.d,) or not np.linalg.norm(g) > 0:
            raise InvalidArgument("g must be a non-zero vector of length d")
        return g / np.linalg.norm(g)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise InvalidArgument("config must be a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgument(f"unknown config keys {sorted(unknown)}")
        if "experiment" not in data:
            raise InvalidArgument("config needs an 'experiment' entry")
        return cls(**data)

    @classmethod
    def load(cls, path, experiment=None):
        """Read a config file; ``experiment`` (the CLI subcommand) takes precedence."""
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise InvalidArgument(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"config {path} is not valid JSON: {exc}") from exc
        if experiment is not None and isinstance(data, dict):
            data = {**data, "experiment": experiment}
        return cls.from_dict(data)
