"""Poisson-type tail bounds for ULC variables and their numerical checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from decimal import Decimal, localcontext
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .distributions import (
    DiscretePMF,
    is_ultra_log_concave,
    log_mgf,
    lower_tail,
    mean,
    upper_tail,
    variance,
)

SERIES_CROSSOVER = 1e-4
_SERIES_TERMS = 8
# below this |x| the closed form is evaluated in decimal arithmetic
_DECIMAL_BAND = 0.1
_DECIMAL_PREC = 40


def _h_series(x: float) -> float:
    # 2 * sum_k (-1)^k x^k / ((k+1)(k+2)), Horner form
    acc = 0.0
    for k in range(_SERIES_TERMS - 1, -1, -1):
        acc = acc * (-x) + 1.0 / ((k + 1) * (k + 2))
    return 2.0 * acc


def _h_direct(x: float) -> float:
    """Closed form ``2((1+x)log(1+x) - x)/x^2`` without cancellation loss."""
    if abs(x) < _DECIMAL_BAND:
        with localcontext() as ctx:
            ctx.prec = _DECIMAL_PREC
            d = Decimal(x)
            one = Decimal(1)
            return float(2 * ((one + d) * (one + d).ln() - d) / (d * d))
    return 2.0 * ((1.0 + x) * math.log1p(x) - x) / (x * x)


def bennett_h(x: float) -> float:
    """Bennett function on ``[-1, inf)``; ``h(-1) = 2`` and ``h(0) = 1``."""
    if math.isnan(x) or x < -1.0:
        raise ValueError(f"bennett_h is defined for x >= -1, got {x!r}")
    if x == -1.0:
        return 2.0
    if abs(x) < SERIES_CROSSOVER:
        return _h_series(x)
    if math.isinf(x):
        return 0.0
    return _h_direct(x)


def _bennett_exponent(scale: float, t: float, x: float) -> float:
    # scale * t^2/2 * h(x)
    if t == 0.0:
        return 0.0
    return 0.5 * scale * t * t * bennett_h(x)


def _clamp(p: float) -> float:
    return min(1.0, max(0.0, p))


def _check_mu(mu: float) -> None:
    if not mu > 0:
        raise ValueError(f"mean must be positive, got {mu!r}")


def _check_t(t: float) -> None:
    if not t >= 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")


def theorem1_upper(mu: float, t: float) -> float:
    """Bound on ``P(X - E[X] >= t)`` for ULC ``X`` with mean ``mu``."""
    _check_mu(mu)
    _check_t(t)
    return _clamp(math.exp(-_bennett_exponent(1.0 / mu, t, t / mu)))


def theorem1_lower(mu: float, t: float) -> float:
    """Bound on ``P(X - E[X] <= -t)``; zero once ``t > mu``."""
    _check_mu(mu)
    _check_t(t)
    if t > mu:
        return 0.0
    if t == mu:
        return math.exp(-mu)
    return _clamp(math.exp(-_bennett_exponent(1.0 / mu, t, -t / mu)))


def corollary2_upper(mu: float, t: float) -> float:
    _check_mu(mu)
    _check_t(t)
    return _clamp(math.exp(-t * t / (2.0 * (t + mu))))


def corollary2_lower(mu: float, t: float) -> float:
    _check_mu(mu)
    _check_t(t)
    return _clamp(math.exp(-t * t / (2.0 * mu)))


def johnson_bound(c: float, t: float) -> float:
    """Upper-tail bound ``exp(-(c t^2/2) h(ct))`` for c-log-concave variables."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    _check_t(t)
    return _clamp(math.exp(-_bennett_exponent(c, t, c * t)))


def chernoff_upper_oracle(pmf: DiscretePMF, t: float, grid: int = 10_000,
                          s_min: float = 1e-6, s_max: float = 50.0,
                          refine: bool = True) -> float:
    """Numerical Chernoff bound ``min_s exp(-s(E[X]+t)) E[exp(sX)]``.

    The minimum is taken over ``grid`` log-spaced values of ``s``; with
    ``refine`` the best grid cell is then polished by a bounded scalar
    search between its neighbours. No closed-form optimizer is used.
    """
    _check_t(t)
    thr = mean(pmf) + t

    def objective(s: float) -> float:
        return log_mgf(pmf, s) - s * thr

    s_grid = np.geomspace(s_min, s_max, grid)
    n = pmf.support.astype(float)
    log_w = np.log(pmf.as_array())
    expo = s_grid[:, None] * n[None, :] + log_w[None, :]
    top = expo.max(axis=1)
    vals = top + np.log(np.exp(expo - top[:, None]).sum(axis=1)) - s_grid * thr
    i = int(np.argmin(vals))
    best = float(vals[i])
    if refine:
        lo = s_grid[max(i - 1, 0)]
        hi = s_grid[min(i + 1, grid - 1)]
        res = minimize_scalar(objective, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * hi})
        best = min(best, float(res.fun))
    return min(1.0, math.exp(best))


@dataclass(frozen=True)
class VarianceReport:
    mean: float
    variance: float
    holds: bool


def verify_variance(pmf: DiscretePMF) -> VarianceReport:
    if not is_ultra_log_concave(pmf):
        raise ValueError("variance bound only applies to ultra log-concave input")
    mu = mean(pmf)
    var = variance(pmf)
    return VarianceReport(mu, var, var <= mu + 1e-12)


@dataclass(frozen=True)
class JohnsonValue:
    c: float
    value: float


@dataclass(frozen=True)
class TailBoundReport:
    t: float
    side: str
    exact: Optional[float]
    theorem1: float
    corollary2: float
    johnson: Optional[JohnsonValue] = None

    @property
    def gap_theorem1(self) -> Optional[float]:
        return None if self.exact is None else self.exact - self.theorem1

    def to_dict(self) -> dict:
        d = asdict(self)
        return d


def tail_bound_report(t: float, side: str, *, pmf: Optional[DiscretePMF] = None,
                      mu: Optional[float] = None,
                      c: Optional[float] = None) -> TailBoundReport:
    """All bounds for one threshold; ``exact`` is filled only when a pmf is given.

    Johnson's bound is an upper-tail statement, so it is reported on the
    upper side only.
    """
    if side not in ("upper", "lower"):
        raise ValueError(f"side must be 'upper' or 'lower', got {side!r}")
    if pmf is not None:
        mu = mean(pmf)
    if mu is None:
        raise ValueError("need a pmf or a mean")
    if side == "upper":
        exact = None if pmf is None else upper_tail(pmf, t)
        jv = None if c is None else JohnsonValue(c, johnson_bound(c, t))
        return TailBoundReport(t, side, exact, theorem1_upper(mu, t),
                               corollary2_upper(mu, t), jv)
    exact = None if pmf is None else lower_tail(pmf, t)
    return TailBoundReport(t, side, exact, theorem1_lower(mu, t),
                           corollary2_lower(mu, t), None)
