"""Truncated-Poisson extremizers and the MGF comparison behind them.

The extreme points of the ULC class under a mean constraint are the pmfs
``p(n) = p^n / (n! Psi_{k,l}(p))`` on ``[k, l]``, where ``Psi_{K,L}`` is the
partial exponential sum. On this family the MGF comparison with a Poisson of
equal mean reduces to convexity of a one-variable function ``f(y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from .distributions import DiscretePMF, make_truncated_poisson, mean

PSI_REL_TOL = 1e-12


@dataclass(frozen=True)
class ExtremizerParams:
    p: float
    k: int
    l: int

    def __post_init__(self):
        if not self.p > 0:
            raise ValueError(f"p must be positive, got {self.p!r}")
        if not 0 <= self.k <= self.l:
            raise ValueError(f"need 0 <= k <= l, got k={self.k}, l={self.l}")


def _indices(K: int, L: int) -> Optional[range]:
    if L < 0:
        return None
    return range(max(K, 0), L + 1)


def log_psi(K: int, L: int, x):
    """``log Psi_{K,L}(x)``; ``-inf`` when the sum is empty or zero.

    Accepts a scalar or an array of ``x`` values.
    """
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise ValueError(f"x must be nonnegative, got {x!r}")
    idx = _indices(K, L)
    if idx is None or len(idx) == 0:
        out = np.full(xs.shape, -np.inf)
    else:
        n = np.arange(idx.start, idx.stop, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = n * np.log(xs)[..., None] - gammaln(n + 1.0)
        if idx.start == 0:
            # 0 * log(0) is the n = 0 term x^0 = 1
            terms[..., 0] = 0.0
        out = logsumexp(terms, axis=-1)
    return float(out) if out.ndim == 0 else out


def psi(K: int, L: int, x: float) -> float:
    """Partial exponential sum ``sum_{n=K}^{L} x^n/n!``.

    ``K <= 0`` is read as ``K = 0`` and ``L < 0`` gives 0.
    """
    idx = _indices(K, L)
    if idx is None or len(idx) == 0:
        if x < 0:
            raise ValueError(f"x must be nonnegative, got {x!r}")
        return 0.0
    n = np.arange(idx.start, idx.stop, dtype=float)
    if x > 0:
        terms = n * math.log(x) - gammaln(n + 1.0)
        top = terms.max()
        return math.exp(top) * math.fsum(np.exp(terms - top))
    return math.exp(log_psi(K, L, x))


def psi_direct(K: int, L: int, x: float) -> float:
    """Term-by-term summation; cross-check path for small ``x`` and ``L``."""
    idx = _indices(K, L)
    if idx is None:
        return 0.0
    total = 0.0
    for n in idx:
        total += x ** n / math.factorial(n)
    return total


def extremizer_pmf(params: ExtremizerParams) -> DiscretePMF:
    return make_truncated_poisson(params.p, params.k, params.l)


def extremizer_mean(params: ExtremizerParams) -> float:
    """Closed form ``p Psi_{k-1,l-1}(p) / Psi_{k,l}(p)``."""
    p, k, l = params.p, params.k, params.l
    lb = log_psi(k - 1, l - 1, p)
    if lb == -math.inf:
        return 0.0
    return p * math.exp(lb - log_psi(k, l, p))


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


def f_value(params: ExtremizerParams, y):
    """``mu (y-1) - log Psi_{k,l}(yp) + log Psi_{k,l}(p)``, with mu the mean."""
    p, k, l = params.p, params.k, params.l
    y = np.asarray(y, dtype=float)
    return _scalar(extremizer_mean(params) * (y - 1.0) - log_psi(k, l, y * p)
                   + log_psi(k, l, p))


def f_prime(params: ExtremizerParams, y):
    p, k, l = params.p, params.k, params.l
    x = np.asarray(y, dtype=float) * p
    if l == 0:
        return _scalar(np.zeros_like(x))
    tilted = p * np.exp(log_psi(k - 1, l - 1, x) - log_psi(k, l, x))
    return _scalar(extremizer_mean(params) - tilted)


def f_second(params: ExtremizerParams, y):
    """``-p^2 (Psi_{k,l} Psi_{k-2,l-2} - Psi_{k-1,l-1}^2) / Psi_{k,l}^2`` at ``yp``.

    Evaluated as ``-(p B/A)^2 (AC/B^2 - 1)`` with the ratio taken in logs.
    """
    p, k, l = params.p, params.k, params.l
    x = np.asarray(y, dtype=float) * p
    if l == 0:
        return _scalar(np.zeros_like(x))
    la = log_psi(k, l, x)
    lb = log_psi(k - 1, l - 1, x)
    lead = (p * np.exp(lb - la)) ** 2
    if l == 1:
        # Psi_{k-2,l-2} = 0
        return _scalar(lead)
    lc = log_psi(k - 2, l - 2, x)
    return _scalar(-lead * np.expm1(la + lc - 2.0 * lb))


def psi_log_concavity_check(k: int, l: int, x: float) -> bool:
    """``Psi_{k,l} Psi_{k-2,l-2} <= Psi_{k-1,l-1}^2`` up to a relative 1e-12."""
    if not 0 <= k <= l:
        raise ValueError(f"need 0 <= k <= l, got k={k}, l={l}")
    if not x > 0:
        raise ValueError(f"x must be positive, got {x!r}")
    la = log_psi(k, l, x)
    lb = log_psi(k - 1, l - 1, x)
    lc = log_psi(k - 2, l - 2, x)
    if lc == -math.inf:
        return True
    return la + lc <= 2.0 * lb + math.log1p(PSI_REL_TOL)


def default_t_grid() -> list[float]:
    return [i / 10 for i in range(-20, 21)] + [-5.0, 5.0]


@dataclass
class DominationReport:
    params: ExtremizerParams
    worst_gap: float
    holds: bool
    grid: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "params": {"p": self.params.p, "k": self.params.k, "l": self.params.l},
            "worst_gap": self.worst_gap,
            "holds": self.holds,
            "grid": list(self.grid),
        }


def mgf_domination_gaps(pmf: DiscretePMF, t_grid: Sequence[float]) -> np.ndarray:
    """Relative excess ``E[e^{tX}] / e^{mu(e^t-1)} - 1`` at each ``t``."""
    mu = mean(pmf)
    t = np.asarray(t_grid, dtype=float)
    lm = logsumexp(t[:, None] * pmf.support + np.log(pmf.as_array()), axis=1)
    return np.expm1(lm - mu * np.expm1(t))


def verify_mgf_domination(params: ExtremizerParams,
                          t_grid: Optional[Iterable[float]] = None,
                          rel_tol: float = 1e-9) -> DominationReport:
    """Compare the extremizer's MGF with the Poisson MGF of the same mean."""
    grid = default_t_grid() if t_grid is None else [float(t) for t in t_grid]
    gaps = mgf_domination_gaps(extremizer_pmf(params), grid)
    worst = float(gaps.max())
    return DominationReport(params, worst, worst <= rel_tol, grid)
