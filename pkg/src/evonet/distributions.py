"""Degree distributions with finite support, plus the textual spec grammar.

Named families are truncated at the smallest K whose discarded tail is
negligible (mass and moments up to order 5 both below ``TAIL_TOL``) and then
renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

TAIL_TOL = 1e-12

# Stirling numbers of the second kind S(i, j), i, j <= 5
_STIRLING2 = [
    [1],
    [0, 1],
    [0, 1, 1],
    [0, 1, 3, 1],
    [0, 1, 7, 6, 1],
    [0, 1, 15, 25, 10, 1],
]
MAX_MOMENT = 5


class DistributionError(ValueError):
    pass


def _truncate(pmf: np.ndarray) -> tuple[np.ndarray, float]:
    """Cut ``pmf`` at the smallest K with a negligible tail.

    The tail criterion is applied to k**i * p_k for i = 0..5 so that moment
    sums stay exact to well below 1e-9.
    """
    k = np.arange(pmf.size, dtype=float)
    # reverse cumulative sums: tail[j] = sum_{k >= j}
    worst = np.zeros(pmf.size)
    for i in range(MAX_MOMENT + 1):
        tail = np.cumsum((k**i * pmf)[::-1])[::-1]
        worst = np.maximum(worst, tail)
    # need tail strictly beyond K, i.e. worst[K + 1] < TAIL_TOL
    ok = np.nonzero(worst < TAIL_TOL)[0]
    if ok.size == 0:
        raise DistributionError("support too short to reach the truncation tolerance")
    cut = max(int(ok[0]), 1)
    tail_mass = float(pmf[cut:].sum())
    return pmf[:cut] / pmf[:cut].sum(), tail_mass


def _support_bound(mean: float, sd: float) -> int:
    return int(mean + 80.0 * sd + 200)


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """pmf p_0..p_K of the degree D, with optional family tag.

    ``family`` is ``(name, parameter)`` for named families, ``("pmf", None)``
    otherwise.
    """

    pmf: np.ndarray
    family: tuple = ("pmf", None)
    truncation_tail_mass: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DistributionError("pmf must be a nonempty vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise DistributionError("pmf entries must be finite and nonnegative")
        total = p.sum()
        if not (1 - 1e-9 <= total <= 1 + 1e-9):
            raise DistributionError(f"pmf sums to {total}, expected 1")
        p = p / total
        if p[1:].sum() <= 0:
            raise DistributionError("degree distribution must have positive mean")
        # trailing zeros only cost time
        last = int(np.nonzero(p)[0][-1])
        p = p[: last + 1]
        p.setflags(write=False)
        object.__setattr__(self, "pmf", p)

    # constructors -------------------------------------------------------
    @classmethod
    def poisson(cls, mu: float) -> "DegreeDistribution":
        if not mu > 0:
            raise DistributionError("poisson mean must be positive")
        k = np.arange(_support_bound(mu, np.sqrt(mu)) + 1)
        pmf, tail = _truncate(stats.poisson.pmf(k, mu))
        return cls(pmf, ("poisson", float(mu)), tail)

    @classmethod
    def geometric(cls, p: float) -> "DegreeDistribution":
        """Geometric on {1, 2, ...} with mean 1/p."""
        if not 0 < p <= 1:
            raise DistributionError("geometric parameter must lie in (0, 1]")
        mean, sd = 1 / p, np.sqrt(1 - p) / p
        k = np.arange(_support_bound(mean, sd) + 1)
        pmf, tail = _truncate(stats.geom.pmf(k, p))
        return cls(pmf, ("geometric", float(p)), tail)

    @classmethod
    def regular(cls, r: int) -> "DegreeDistribution":
        r = int(r)
        if r < 1:
            raise DistributionError("regular degree must be >= 1")
        pmf = np.zeros(r + 1)
        pmf[r] = 1.0
        return cls(pmf, ("regular", r), 0.0)

    @classmethod
    def from_pmf(cls, values) -> "DegreeDistribution":
        return cls(np.asarray(values, dtype=float), ("pmf", None), 0.0)

    # basic quantities ---------------------------------------------------
    @property
    def kmax(self) -> int:
        return self.pmf.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.pmf.size)

    def moment(self, i: int) -> float:
        """E[D^i]; exact family values for named families, summed otherwise."""
        if i not in range(1, MAX_MOMENT + 1):
            raise ValueError("moment order must be in 1..5")
        key = ("m", i)
        if key not in self._cache:
            if self.family[0] == "pmf":
                val = math.fsum(self.support.astype(float) ** i * self.pmf)
            else:
                # E[D^i] = sum_j S(i, j) E[(D)_j]
                val = math.fsum(_STIRLING2[i][j] * self._falling(j) for j in range(1, i + 1))
            self._cache[key] = float(val)
        return self._cache[key]

    def factorial_moment(self, k: int) -> float:
        if k not in range(1, MAX_MOMENT + 1):
            raise ValueError("factorial moment order must be in 1..5")
        return self._falling(k)

    def _falling(self, k: int) -> float:
        name, par = self.family
        if name == "poisson":
            return par**k
        if name == "regular":
            return float(math.perm(par, k))
        if name == "geometric":
            return math.factorial(k) * (1 - par) ** (k - 1) / par**k
        d = self.support.astype(float)
        falling = np.ones_like(d)
        for j in range(k):
            falling *= d - j
        return math.fsum(falling * self.pmf)

    @property
    def m1(self) -> float:
        return self.moment(1)

    def size_biased(self) -> np.ndarray:
        """pmf of D* (P(D* = j) = j p_j / m1)."""
        return self.support * self.pmf / self.m1

    def pgf(self, w, order: int = 0):
        """G^(order)(w) by direct power-series summation (any real w)."""
        if order not in (0, 1, 2, 3):
            raise ValueError("order must be 0..3")
        w = np.asarray(w, dtype=float)
        k = self.support
        coef = self.pmf.copy()
        for j in range(order):
            coef = coef * (k - j)
        coef = coef[order:]
        # Horner over the shifted polynomial
        out = np.zeros_like(w)
        for c in coef[::-1]:
            out = out * w + c
        return out if out.ndim else float(out)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return rng.choice(self.pmf.size, size=size, p=self.pmf)

    def __str__(self) -> str:
        name, par = self.family
        if name == "pmf":
            return "pmf:" + ",".join(f"{x:g}" for x in self.pmf)
        return f"{name}:{par:g}"


def parse_dist(text: str) -> DegreeDistribution:
    """Parse ``poisson:5``, ``geometric:0.5``, ``regular:3`` or ``pmf:p0,p1,...``."""
    name, sep, arg = text.strip().partition(":")
    if not sep or not arg:
        raise DistributionError(f"bad distribution spec {text!r}")
    name = name.lower()
    try:
        if name == "poisson":
            return DegreeDistribution.poisson(float(arg))
        if name == "geometric":
            return DegreeDistribution.geometric(float(arg))
        if name == "regular":
            if float(arg) != int(float(arg)):
                raise DistributionError("regular degree must be an integer")
            return DegreeDistribution.regular(int(float(arg)))
        if name == "pmf":
            return DegreeDistribution.from_pmf([float(x) for x in arg.split(",")])
    except ValueError as exc:
        if isinstance(exc, DistributionError):
            raise
        raise DistributionError(f"bad distribution spec {text!r}: {exc}") from exc
    raise DistributionError(f"unknown distribution family {name!r}")
