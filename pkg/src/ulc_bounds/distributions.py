"""Finite-support pmfs on the nonnegative integers.

A :class:`DiscretePMF` stores an offset ``M`` and the strictly positive masses
``p(M), ..., p(N)``. Everything in the package (the ULC variable ``X``, the
truncated Poisson extremizers, the intrinsic-volume variable ``Z_K``) is
carried by this one type.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import gammaln, logsumexp, pdtrc

NORMALIZATION_TOL = 1e-12
DEFAULT_REL_TOL = 1e-9
DEFAULT_MASS_LOSS = 1e-12
# log of the largest finite double
_LOG_MAX = math.log(np.finfo(float).max)
# random_ulc drops endpoints below this mass so pairwise products stay normal
_MIN_LOG_MASS = math.log(1e-150)


class PMFError(ValueError):
    """Raised when masses do not describe a valid contiguous pmf."""


@dataclass(frozen=True)
class DiscretePMF:
    offset: int
    masses: tuple[float, ...]

    def __post_init__(self):
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        if int(self.offset) != self.offset or self.offset < 0:
            raise PMFError(f"offset must be a nonnegative integer, got {self.offset!r}")
        object.__setattr__(self, "offset", int(self.offset))
        if not masses:
            raise PMFError("masses must be nonempty")
        for i, m in enumerate(masses):
            if not math.isfinite(m) or m <= 0.0:
                raise PMFError(
                    f"masses must be strictly positive (contiguous support); "
                    f"mass at n={self.offset + i} is {m!r}")
            if m > 1.0:
                raise PMFError(f"mass at n={self.offset + i} exceeds 1: {m!r}")
        total = math.fsum(masses)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise PMFError(f"masses sum to {total:.12g}, not 1")

    @classmethod
    def from_weights(cls, offset: int, weights: Sequence[float]) -> "DiscretePMF":
        """Normalize nonnegative weights into a pmf starting at ``offset``."""
        w = np.asarray(weights, dtype=float)
        total = math.fsum(w)
        if not total > 0 or not math.isfinite(total):
            raise PMFError("weights must have a positive finite sum")
        return cls(offset, tuple(w / total))

    @classmethod
    def from_log_weights(cls, offset: int, log_weights: Sequence[float]) -> "DiscretePMF":
        lw = np.asarray(log_weights, dtype=float)
        w = np.exp(lw - logsumexp(lw))
        small = np.flatnonzero(w < np.finfo(float).tiny)
        if small.size:
            raise PMFError(f"mass at n={offset + small[0]} underflows double precision; "
                           f"shorten the support")
        return cls.from_weights(offset, w)

    @property
    def lower(self) -> int:
        return self.offset

    @property
    def upper(self) -> int:
        return self.offset + len(self.masses) - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.lower, self.upper + 1)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    def pmf(self, n: int) -> float:
        if self.lower <= n <= self.upper:
            return self.masses[n - self.offset]
        return 0.0

    def to_dict(self) -> dict:
        return {"offset": self.offset, "masses": list(self.masses)}

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscretePMF":
        try:
            offset = obj["offset"]
            masses = obj["masses"]
        except (KeyError, TypeError) as exc:
            raise PMFError(f"PMF JSON needs 'offset' and 'masses': {exc}") from None
        if not isinstance(offset, int) or isinstance(offset, bool):
            raise PMFError(f"offset must be an integer, got {offset!r}")
        if not isinstance(masses, list):
            raise PMFError("masses must be a list of numbers")
        return cls(offset, tuple(masses))

    def to_json(self) -> str:
        # repr of a float is the shortest string that round-trips (<= 17 digits)
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscretePMF":
        return cls.from_dict(json.loads(text))


def point_mass(k: int) -> DiscretePMF:
    return DiscretePMF(k, (1.0,))


# -- moments -----------------------------------------------------------------

def mean(pmf: DiscretePMF) -> float:
    return math.fsum(n * m for n, m in zip(pmf.support.tolist(), pmf.masses))


def variance(pmf: DiscretePMF) -> float:
    # centred second moment: no E[X^2] - E[X]^2 cancellation
    mu = mean(pmf)
    return math.fsum(m * (n - mu) ** 2 for n, m in zip(pmf.support.tolist(), pmf.masses))


def log_mgf(pmf: DiscretePMF, t: float) -> float:
    """``log E[exp(tX)]`` by log-sum-exp."""
    if not math.isfinite(t):
        raise ValueError(f"t must be finite, got {t!r}")
    if t == 0.0:
        return 0.0
    return float(logsumexp(t * pmf.support + np.log(pmf.as_array())))


def mgf(pmf: DiscretePMF, t: float) -> float:
    lm = log_mgf(pmf, t)
    if lm > _LOG_MAX:
        raise OverflowError(f"E[exp({t}X)] = exp({lm:.6g}) is not representable")
    return math.exp(lm)


# -- tails -------------------------------------------------------------------

def _snap(x: float) -> float:
    return 1e-12 * max(1.0, abs(x))


def survival(pmf: DiscretePMF, j: int) -> float:
    """``P(X >= j)`` summed from the top of the support down to ``j``."""
    lo = max(j, pmf.lower) - pmf.offset
    if lo >= len(pmf.masses):
        return 0.0
    return min(1.0, math.fsum(reversed(pmf.masses[lo:])))


def cdf(pmf: DiscretePMF, j: int) -> float:
    """``P(X <= j)`` summed from the bottom of the support up to ``j``."""
    hi = min(j, pmf.upper) - pmf.offset
    if hi < 0:
        return 0.0
    return min(1.0, math.fsum(pmf.masses[: hi + 1]))


def upper_tail(pmf: DiscretePMF, t: float) -> float:
    """Exact ``P(X >= E[X] + t)``.

    The threshold is snapped by a relative 1e-12 so that ``t = j - E[X]``
    computed in floating point still counts the atom at ``j``.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    thr = mean(pmf) + t
    return survival(pmf, math.ceil(thr - _snap(thr)))


def lower_tail(pmf: DiscretePMF, t: float) -> float:
    """Exact ``P(X <= E[X] - t)``."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t!r}")
    thr = mean(pmf) - t
    return cdf(pmf, math.floor(thr + _snap(thr)))


# -- shape predicates --------------------------------------------------------

def first_lc_violation(pmf: DiscretePMF, rel_tol: float = DEFAULT_REL_TOL) -> Optional[int]:
    lp = np.log(pmf.as_array())
    bad = 2 * lp[1:-1] < lp[:-2] + lp[2:] - rel_tol
    idx = np.flatnonzero(bad)
    return int(pmf.offset + 1 + idx[0]) if idx.size else None


def first_ulc_violation(pmf: DiscretePMF, rel_tol: float = DEFAULT_REL_TOL) -> Optional[int]:
    """Smallest interior ``n`` where ``n! p(n)`` fails log-concavity, else None."""
    lq = np.log(pmf.as_array()) + gammaln(pmf.support + 1.0)
    bad = 2 * lq[1:-1] < lq[:-2] + lq[2:] - rel_tol
    idx = np.flatnonzero(bad)
    return int(pmf.offset + 1 + idx[0]) if idx.size else None


def is_log_concave(pmf: DiscretePMF, rel_tol: float = DEFAULT_REL_TOL) -> bool:
    return first_lc_violation(pmf, rel_tol) is None


def is_ultra_log_concave(pmf: DiscretePMF, rel_tol: float = DEFAULT_REL_TOL) -> bool:
    """Check ``p(n)^2 >= (n+1)/n p(n-1) p(n+1)`` at every interior point.

    Performed as log-concavity of ``q(n) = n! p(n)`` in the log domain,
    with ``rel_tol`` as the allowed slack in ``2 log q(n)``.
    """
    return first_ulc_violation(pmf, rel_tol) is None


# -- arithmetic and constructors ---------------------------------------------

def convolve(a: DiscretePMF, b: DiscretePMF) -> DiscretePMF:
    """Distribution of the independent sum."""
    c = np.convolve(a.as_array(), b.as_array())
    nz = np.flatnonzero(c > 0)
    if nz.size == 0:
        raise PMFError("convolution underflowed to zero everywhere")
    # only endpoint products can underflow; interior masses dominate them
    lo, hi = nz[0], nz[-1]
    return DiscretePMF.from_weights(a.offset + b.offset + lo, c[lo: hi + 1])


def make_binomial(n: int, p: float) -> DiscretePMF:
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p!r}; build point masses explicitly")
    k = np.arange(n + 1)
    lw = (gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
          + k * math.log(p) + (n - k) * math.log1p(-p))
    return DiscretePMF.from_log_weights(0, lw)


def make_truncated_poisson(lam: float, k: int, l: int) -> DiscretePMF:
    """Poisson(lam) conditioned on ``[k, l]``: masses proportional to lam^n/n!."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if not 0 <= k <= l:
        raise ValueError(f"need 0 <= k <= l, got k={k}, l={l}")
    n = np.arange(k, l + 1)
    return DiscretePMF.from_log_weights(k, n * math.log(lam) - gammaln(n + 1.0))


def poisson_cutoff(lam: float, mass_loss: float = DEFAULT_MASS_LOSS) -> int:
    """Smallest ``l`` with ``P(Poisson(lam) > l) < mass_loss``."""
    l = max(1, int(lam))
    while pdtrc(l, lam) >= mass_loss:
        l += 1 + l // 8
    while l > 0 and pdtrc(l - 1, lam) < mass_loss:
        l -= 1
    return l


def make_poisson(lam: float, mass_loss: float = DEFAULT_MASS_LOSS) -> DiscretePMF:
    """Poisson(lam) truncated to ``[0, l]`` with upper mass loss below ``mass_loss``."""
    return make_truncated_poisson(lam, 0, poisson_cutoff(lam, mass_loss))


def make_geometric(p: float, upper: int) -> DiscretePMF:
    """Geometric ``P(X=n) ∝ (1-p)^n`` truncated to ``[0, upper]``."""
    n = np.arange(upper + 1)
    return DiscretePMF.from_log_weights(0, n * math.log1p(-p))


def random_ulc(seed: int, max_support: int) -> DiscretePMF:
    """Seeded random ULC pmf.

    ``log(n! p(n))`` is a random concave sequence on a random subinterval of
    ``[0, max_support]``: second differences are uniform on ``[-2, 0]`` and
    the initial log-rate is log-uniform on ``[0.1, 2 * max_support]``.
    Endpoints whose mass falls below 1e-150 are cut off, which keeps the
    restriction concave.
    """
    if max_support < 1:
        raise ValueError("max_support must be >= 1")
    rng = np.random.default_rng(seed)
    k, l = sorted(int(v) for v in rng.integers(0, max_support + 1, size=2))
    size = l - k + 1
    if size == 1:
        return point_mass(k)
    rate = rng.uniform(math.log(0.1), math.log(2.0 * max_support))
    slopes = rate + np.concatenate(([0.0], np.cumsum(rng.uniform(-2.0, 0.0, size=size - 2))))
    b = np.concatenate(([0.0], np.cumsum(slopes)))
    n = np.arange(k, l + 1)
    lp = b - gammaln(n + 1.0)
    lp = lp - logsumexp(lp)
    keep = np.flatnonzero(lp >= _MIN_LOG_MASS)
    lo, hi = keep[0], keep[-1]
    return DiscretePMF.from_log_weights(k + lo, lp[lo: hi + 1])


def total_variation(a: DiscretePMF, b: DiscretePMF) -> float:
    lo = min(a.lower, b.lower)
    hi = max(a.upper, b.upper)
    return 0.5 * math.fsum(abs(a.pmf(n) - b.pmf(n)) for n in range(lo, hi + 1))
