from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    pass


class Variant(str, enum.Enum):
    DEL_SI = "delSI"
    EVO_SI = "evoSI"
    AVO_SI = "avoSI"
    AB_AVO_SI = "abAvoSI"
    DEL_SIR = "delSIR"
    EVO_SIR = "evoSIR"
    SIR_OMEGA = "sirOmega"

    @property
    def is_si(self) -> bool:
        return self in (Variant.DEL_SI, Variant.EVO_SI, Variant.AVO_SI, Variant.AB_AVO_SI)

    @property
    def has_unstable_edges(self) -> bool:
        return self in (Variant.AVO_SI, Variant.AB_AVO_SI)

    @classmethod
    def parse(cls, text) -> "Variant":
        if isinstance(text, cls):
            return text
        for v in cls:
            if v.value.lower() == str(text).lower():
                return v
        raise ConfigError(f"unknown variant {text!r}; choose from {[v.value for v in cls]}")


RECORD_MODES = {"none": 0, "adaptive": 1, "grid": 2, "every": 3}


@dataclass
class EpidemicConfig:
    """Model variant, rates and run policy for one simulation."""

    variant: Variant
    lam: float
    rho: float = 0.0
    gamma: float = 0.0
    rewire_prob: float | None = None  # sirOmega only
    duration: str = "exponential"  # or "fixed" (infections last exactly 1)
    seed_vertex: int | None = None  # None = uniform random
    eta: float = 0.01
    record: str = "none"
    grid: np.ndarray | None = None
    time_changed: bool = False
    kmax: int = 20
    budget: int | None = None

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        for name in ("lam", "rho", "gamma"):
            val = getattr(self, name)
            if not (val >= 0 and np.isfinite(val)):
                raise ConfigError(f"{name} must be finite and >= 0, got {val}")
        if self.duration not in ("exponential", "fixed"):
            raise ConfigError("duration must be 'exponential' or 'fixed'")
        if self.variant.is_si:
            if self.gamma != 0:
                raise ConfigError(f"{self.variant.value} is an SI model; gamma must be 0")
            if self.duration == "fixed":
                raise ConfigError("fixed infection duration only applies to SIR variants")
        if self.variant is Variant.SIR_OMEGA:
            if self.rewire_prob is None or not 0 <= self.rewire_prob <= 1:
                raise ConfigError("sirOmega needs rewire_prob in [0, 1]")
        if not 0 < self.eta < 1:
            raise ConfigError("eta must lie in (0, 1)")
        if self.record not in RECORD_MODES:
            raise ConfigError(f"record must be one of {sorted(RECORD_MODES)}")
        if self.record == "grid":
            if self.grid is None or len(self.grid) == 0:
                raise ConfigError("grid recording needs sample times")
            self.grid = np.sort(np.asarray(self.grid, dtype=float))
        if self.kmax < 0:
            raise ConfigError("kmax must be >= 0")

    @property
    def rewire_probability(self) -> float:
        """Chance that a rho-event rewires rather than drops (basic kernel)."""
        if self.variant in (Variant.DEL_SI, Variant.DEL_SIR):
            return 0.0
        if self.variant is Variant.SIR_OMEGA:
            return float(self.rewire_prob)
        return 1.0


EVENT_NAMES = ("infection", "rewiring", "drop", "recovery", "blocked", "stabilized")
SAMPLE_COLUMNS_META = ("t", "S", "I", "R", "X", "X_I")


@dataclass
class Trajectory:
    """Outcome of one run: final size, event counts and optional samples.

    ``samples`` rows are ``t, S, I, R, X, X_I, S_0 .. S_kmax``; ``rates``
    holds the total event rate in force after each row (same length).
    """

    n: int
    final_size: int
    events: dict
    t_end: float
    status: str
    infected: np.ndarray = field(repr=False)
    samples: np.ndarray | None = field(default=None, repr=False)
    rates: np.ndarray | None = field(default=None, repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def budget_exceeded(self) -> bool:
        return self.status == "budget_exceeded"

    @property
    def infected_set(self) -> set:
        return set(np.nonzero(self.infected)[0].tolist())

    def columns(self) -> list[str]:
        if self.samples is None:
            return list(SAMPLE_COLUMNS_META)
        k = self.samples.shape[1] - len(SAMPLE_COLUMNS_META)
        return list(SAMPLE_COLUMNS_META) + [f"S_{i}" for i in range(k)]

    def write_csv(self, path) -> None:
        if self.samples is None:
            raise ValueError("run was not recorded")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns())
            for row in self.samples:
                w.writerow([f"{row[0]:.9g}"] + [int(x) for x in row[1:]])
