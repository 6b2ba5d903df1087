"""Closed-form and numerically solved quantities for SI/SIR on CM(n, D).

Every function is pure: it only reads the (immutable) distribution and its
scalar arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .distributions import DegreeDistribution

FIXED_POINT_TOL = 1e-12
SIGMA_START = 1 - 1e-6
SIGMA_STEP = 1e-4
SIGMA_XTOL = 1e-10
STAR_DELTA = 1e-3
STAR_POINTS = 32


class DomainError(ValueError):
    pass


class SubcriticalError(ValueError):
    """No infection rate makes the epidemic supercritical."""


def moments(dist: DegreeDistribution, i: int) -> float:
    return dist.moment(i)


def factorial_moment(dist: DegreeDistribution, k: int) -> float:
    return dist.factorial_moment(k)


def delta(dist: DegreeDistribution) -> float:
    """Sign of this decides whether the evoSI transition is discontinuous (> 0)."""
    mu1, mu2, mu3 = (dist.factorial_moment(k) for k in (1, 2, 3))
    return -mu3 / mu1 + 3.0 * (mu2 - mu1)


def alpha_of(dist: DegreeDistribution, lam: float, rho: float) -> float:
    """alpha = rho * m1 / lambda."""
    if lam <= 0:
        return math.inf
    return rho * dist.m1 / lam


def lambda_of(dist: DegreeDistribution, alpha: float, rho: float) -> float:
    return rho * dist.m1 / alpha


@dataclass(frozen=True)
class CriticalSummary:
    m1: float
    m2: float
    m3: float
    mu1: float
    mu2: float
    mu3: float
    alpha_c: float
    delta: float
    rho: float
    gamma: float
    lambda_c: float | None  # None when the graph has no supercritical regime

    @property
    def supercritical_possible(self) -> bool:
        return self.alpha_c > 0

    def lambda_c_at(self, rho: float, gamma: float = 0.0) -> float | None:
        if not self.supercritical_possible:
            return None
        return (gamma + rho) * self.m1 / self.alpha_c

    def rho_c_at(self, lam: float, gamma: float = 0.0) -> float | None:
        """Rewiring rate at which ``lam`` becomes critical (None if never)."""
        if not self.supercritical_possible:
            return None
        return max(lam * self.alpha_c / self.m1 - gamma, 0.0)

    def as_dict(self) -> dict:
        return {
            "m1": self.m1, "m2": self.m2, "m3": self.m3,
            "mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3,
            "alpha_c": self.alpha_c, "delta": self.delta,
            "rho": self.rho, "gamma": self.gamma, "lambda_c": self.lambda_c,
            "supercritical_possible": self.supercritical_possible,
        }


def critical_values(dist: DegreeDistribution, rho: float, gamma: float = 0.0) -> CriticalSummary:
    if rho < 0 or gamma < 0:
        raise ValueError("rates must be nonnegative")
    m1, m2, m3 = dist.moment(1), dist.moment(2), dist.moment(3)
    alpha_c = m2 - 2 * m1
    lam_c = (gamma + rho) * m1 / alpha_c if alpha_c > 0 else None
    return CriticalSummary(
        m1=m1, m2=m2, m3=m3,
        mu1=m1, mu2=m2 - m1, mu3=m3 - 3 * m2 + 2 * m1,
        alpha_c=alpha_c, delta=delta(dist), rho=rho, gamma=gamma, lambda_c=lam_c,
    )


def fixed_time_tau(lam: float, rho: float) -> float:
    """Transmission probability across an S-I edge with unit infectious period."""
    s = lam + rho
    if s == 0:
        return 0.0
    return lam / s * -math.expm1(-s)


def fixed_time_lambda_c(mu: float, rho: float) -> float:
    """Solve mu * tau_fixed(lambda, rho) = 1 for lambda."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    if mu <= 1:
        raise SubcriticalError("mean degree <= 1: always subcritical")

    def resid(lam):
        return mu * fixed_time_tau(lam, rho) - 1.0

    hi = 1.0
    while resid(hi) <= 0:
        hi *= 2
        if hi > 1e12:
            raise SubcriticalError("no root below 1e12")
    lam = brentq(resid, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if abs(resid(lam)) >= 1e-10:
        raise RuntimeError("fixed-time critical value did not converge")
    return lam


def gf_eval(dist: DegreeDistribution, w: float, order: int = 0) -> float:
    if not 0 <= w <= 1:
        raise DomainError("w must lie in [0, 1]")
    return dist.pgf(w, order)


def _f_numer_denom(dist, alpha, w):
    w = np.asarray(w, dtype=float)
    denom = dist.pgf(w, 1) + alpha * (1 - w) * dist.pgf(w, 0)
    return dist.m1 * w, denom


def f_function(dist: DegreeDistribution, alpha: float):
    """Vectorised f(w); accepts any w > 0 where the log argument is positive.

    Exposed separately from ``f_eval`` so finite differences can straddle w = 1.
    """

    def f(w):
        num, den = _f_numer_denom(dist, alpha, w)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.log(num / den) + 0.5 * alpha * (np.asarray(w) - 1) ** 2
        # m1 and G'(1) agree only to rounding; f(1) = 0 holds exactly
        out = np.where(np.asarray(w) == 1.0, 0.0, out)
        return out if np.ndim(out) else float(out)

    return f


def f_eval(dist: DegreeDistribution, alpha: float, w: float) -> float:
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    if not 0 < w <= 1:
        raise DomainError("w must lie in (0, 1]")
    if w == 1:
        return 0.0
    _, den = _f_numer_denom(dist, alpha, w)
    if not den > 0:
        raise DomainError("nonpositive denominator in f")
    return f_function(dist, alpha)(w)


def f_prime_at_one(dist: DegreeDistribution, alpha: float) -> float:
    """-((m2 - 2 m1)/m1 - rho/lambda) written in terms of alpha."""
    cs = critical_values(dist, 0.0)
    return -(cs.alpha_c - alpha) / cs.m1


def f_second_at_one(dist: DegreeDistribution, alpha: float) -> float:
    """f''(1) for any alpha; equals delta(dist) at alpha = alpha_c."""
    cs = critical_values(dist, 0.0)
    return -1.0 - cs.mu3 / cs.m1 + 3 * alpha + ((cs.mu2 - alpha) / cs.m1) ** 2


@dataclass(frozen=True)
class SigmaNu:
    sigma: float
    nu: float
    star_holds: bool
    star_min: float  # max of f over the sampled left neighbourhood (< 0 when star holds)


def sigma_nu(dist: DegreeDistribution, alpha: float) -> SigmaNu:
    """Largest zero of f in (0, 1) and the matching avoSI final-size fraction."""
    alpha_c = dist.moment(2) - 2 * dist.m1
    if not alpha < alpha_c:
        raise DomainError(f"alpha={alpha} is not below alpha_c={alpha_c}")
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    f = f_function(dist, alpha)
    grid = np.arange(SIGMA_START, 0.0, -SIGMA_STEP)
    vals = f(grid)
    # f > 0 just below 1 (f'(1) < 0); sigma is where it first drops to <= 0
    bad = np.nonzero(~(vals > 0))[0]
    if bad.size == 0:
        sigma = 0.0
    elif bad[0] == 0:
        # root lies in (SIGMA_START, 1); f(1) = 0 so bracket at the midpoint side
        hi = SIGMA_START + (1 - SIGMA_START) / 2
        sigma = hi if not f(hi) > 0 else brentq(f, SIGMA_START, hi, xtol=SIGMA_XTOL)
    else:
        j = bad[0]
        lo, hi = grid[j], grid[j - 1]
        if vals[j] == 0 or not np.isfinite(vals[j]):
            sigma = float(lo) if vals[j] == 0 else _bisect_finite(f, lo, hi)
        else:
            sigma = brentq(f, lo, hi, xtol=SIGMA_XTOL)
    sigma = float(sigma)
    if sigma > 0:
        left = np.linspace(max(sigma - STAR_DELTA, 1e-12), sigma, STAR_POINTS + 1, endpoint=False)[1:]
        star_min = float(np.max(f(left)))
        star = star_min < 0
    else:
        star_min = -math.inf
        star = True
    nu = 1.0 - math.exp(-0.5 * alpha * (sigma - 1) ** 2) * float(dist.pgf(sigma))
    return SigmaNu(sigma=sigma, nu=min(max(nu, 0.0), 1.0), star_holds=star, star_min=star_min)


def _bisect_finite(f, lo, hi):
    # f(lo) is nan/-inf (log of 0); shrink until finite-negative, then brentq
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = f(mid)
        if v > 0:
            hi = mid
        elif np.isfinite(v):
            return brentq(f, mid, hi, xtol=SIGMA_XTOL)
        else:
            lo = mid
        if hi - lo < SIGMA_XTOL:
            break
    return 0.5 * (lo + hi)


def _smallest_fixed_point(g, max_iter: int = 10_000_000) -> float:
    z = 0.0
    for _ in range(max_iter):
        z_new = float(g(z))
        if abs(z_new - z) < FIXED_POINT_TOL:
            return z_new
        z = z_new
    raise RuntimeError("fixed-point iteration did not converge")


def er_fixed_point(mu: float, tau: float) -> float:
    """Smallest root of z = exp(-mu tau (1 - z)) in [0, 1]."""
    if mu < 0 or not 0 <= tau <= 1:
        raise ValueError("need mu >= 0 and tau in [0, 1]")
    c = mu * tau
    if c <= 1:
        return 1.0
    return _smallest_fixed_point(lambda z: math.exp(-c * (1 - z)))


def bp_survival_tau(dist: DegreeDistribution, tau: float) -> float:
    """Survival of the two-phase branching process with thinning ``tau``."""
    if not 0 <= tau <= 1:
        raise ValueError("tau must lie in [0, 1]")
    m1, m2 = dist.moment(1), dist.moment(2)
    if tau * (m2 - m1) / m1 <= 1:
        return 0.0
    g1 = dist.pgf(1.0, 1)

    def ghat(x):
        return dist.pgf(x, 1) / g1

    xi = _smallest_fixed_point(lambda x: ghat(1 - tau + tau * x))
    return 1.0 - float(dist.pgf(1 - tau + tau * xi))


def bp_survival(dist: DegreeDistribution, lam: float, rho: float) -> float:
    if lam < 0 or rho < 0:
        raise ValueError("rates must be nonnegative")
    if lam == 0:
        return 0.0
    return bp_survival_tau(dist, lam / (lam + rho))


@dataclass(frozen=True)
class LimitPoint:
    x: float
    s: float
    x_s: float
    s_k: np.ndarray


def limit_curves(dist: DegreeDistribution, alpha: float, t: float) -> LimitPoint:
    """Deterministic limits of the time-changed half-edge process at time t."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    w = math.exp(-t)
    damp = math.exp(-0.5 * alpha * (w - 1) ** 2)
    G, G1 = float(dist.pgf(w)), float(dist.pgf(w, 1))
    x = dist.m1 * w * w
    s = damp * G
    x_s = damp * w * (G1 + alpha * (1 - w) * G)
    # s_k = exp(-(a/2)(1 - w^2)) w^k sum_l p_{k-l} (a(1-w))^l / l!
    p = dist.pmf
    K = p.size - 1
    # rewired-in half-edges add Poisson-like weights; support extends past K
    c = alpha * (1 - w)
    kk = np.arange(K + 1 + _extra_support(c))
    conv = np.convolve(p, _pois_unnormalised(c, kk.size))[: kk.size]
    with np.errstate(under="ignore"):
        s_k = math.exp(-0.5 * alpha * (1 - w * w)) * w**kk * conv
    return LimitPoint(x=x, s=s, x_s=x_s, s_k=s_k)


def _pois_unnormalised(c: float, size: int) -> np.ndarray:
    out = np.empty(size)
    out[0] = 1.0
    for l in range(1, size):
        out[l] = out[l - 1] * c / l
    return out


def _extra_support(c: float) -> int:
    return int(c + 12 * math.sqrt(c) + 40)
