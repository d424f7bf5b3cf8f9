"""Intrinsic volumes of boxes, scaled cubes and balls, and the variable Z_K.

Volumes are kept in log form internally; the Wills functional grows
exponentially with dimension for large bodies and must not leak into the
normalized sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.special import gammaln, logsumexp

from .distributions import (
    DiscretePMF,
    PMFError,
    make_truncated_poisson,
    mean,
    poisson_cutoff,
    total_variation,
    variance,
)


_TINY = float(np.finfo(float).tiny)


class BodyError(ValueError):
    pass


def _positive(name: str, v: float) -> float:
    v = float(v)
    if not (math.isfinite(v) and v > 0):
        raise BodyError(f"{name} must be a positive finite number, got {v!r}")
    return v


def _dimension(n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise BodyError(f"dimension must be an integer >= 1, got {n!r}")
    return int(n)


@dataclass(frozen=True)
class Box:
    sides: tuple[float, ...]

    def __post_init__(self):
        if len(self.sides) < 1:
            raise BodyError("a box needs at least one side")
        object.__setattr__(self, "sides",
                           tuple(_positive(f"side {i}", a) for i, a in enumerate(self.sides)))

    @property
    def dim(self) -> int:
        return len(self.sides)


@dataclass(frozen=True)
class ScaledCube:
    r: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "r", _positive("r", self.r))
        object.__setattr__(self, "n", _dimension(self.n))

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True)
class Ball:
    radius: float
    n: int

    def __post_init__(self):
        object.__setattr__(self, "radius", _positive("radius", self.radius))
        object.__setattr__(self, "n", _dimension(self.n))

    @property
    def dim(self) -> int:
        return self.n


ConvexBody = Union[Box, ScaledCube, Ball]


def body_from_dict(obj: dict) -> ConvexBody:
    """Parse ``{"box": {...}} | {"cube": {...}} | {"ball": {...}}``."""
    if not isinstance(obj, dict) or len(obj) != 1:
        raise BodyError("body JSON must have exactly one of 'box', 'cube', 'ball'")
    (kind, body), = obj.items()
    try:
        if kind == "box":
            return Box(tuple(body["sides"]))
        if kind == "cube":
            return ScaledCube(body["r"], body["n"])
        if kind == "ball":
            return Ball(body["radius"], body["n"])
    except (KeyError, TypeError) as exc:
        raise BodyError(f"malformed {kind} body: {exc}") from None
    raise BodyError(f"unknown body kind {kind!r}")


def body_to_dict(body: ConvexBody) -> dict:
    if isinstance(body, Box):
        return {"box": {"sides": list(body.sides)}}
    if isinstance(body, ScaledCube):
        return {"cube": {"r": body.r, "n": body.n}}
    return {"ball": {"radius": body.radius, "n": body.n}}


def log_ball_volume(m: int) -> float:
    """log of the volume of the unit ball in R^m."""
    return 0.5 * m * math.log(math.pi) - float(gammaln(0.5 * m + 1.0))


def ball_volume(m: int) -> float:
    return math.exp(log_ball_volume(m))


def elementary_symmetric(values: Sequence[float]) -> np.ndarray:
    """``e_0, ..., e_n`` of ``values`` by the product recurrence.

    Multiplies out ``prod (1 + a_i z)`` one factor at a time; every update
    adds nonnegative terms, so nothing cancels for positive inputs.
    """
    e = np.zeros(len(values) + 1)
    e[0] = 1.0
    for i, a in enumerate(values, start=1):
        e[1: i + 1] = e[1: i + 1] + a * e[0:i]
    return e


@dataclass(frozen=True)
class IntrinsicVolumeProfile:
    dim: int
    log_volumes: tuple[float, ...]

    @property
    def volumes(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(np.asarray(self.log_volumes))

    @property
    def log_wills(self) -> float:
        return float(logsumexp(self.log_volumes))

    @property
    def wills(self) -> float:
        return math.fsum(self.volumes)

    @property
    def normalized(self) -> np.ndarray:
        lv = np.asarray(self.log_volumes)
        return np.exp(lv - logsumexp(lv))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "volumes": self.volumes.tolist(),
            "wills": self.wills,
            "normalized": self.normalized.tolist(),
        }


def intrinsic_volumes(body: ConvexBody) -> IntrinsicVolumeProfile:
    n = body.dim
    j = np.arange(n + 1)
    log_binom = gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)
    if isinstance(body, ScaledCube):
        lv = log_binom + j * math.log(body.r)
    elif isinstance(body, Ball):
        log_kappa = np.array([log_ball_volume(m) for m in range(n + 1)])
        lv = log_binom + log_kappa[n] - log_kappa[n - j] + j * math.log(body.radius)
    elif isinstance(body, Box):
        # scale sides to unit geometric mean so e_j neither overflows nor underflows
        logs = np.log(body.sides)
        shift = float(logs.mean())
        with np.errstate(divide="ignore"):
            lv = np.log(elementary_symmetric(np.exp(logs - shift))) + j * shift
    else:
        raise BodyError(f"unsupported body {body!r}")
    return IntrinsicVolumeProfile(n, tuple(float(v) for v in lv))


def zk_pmf(profile: IntrinsicVolumeProfile) -> DiscretePMF:
    """Law of ``Z_K``: ``P(Z_K = j) = V_j / W``.

    Zero volumes are dropped from the top only. Entries that are positive
    but fall below the smallest normal double after normalization (very
    large bodies) are dropped from either end, which moves the offset up.
    """
    lv = np.asarray(profile.log_volumes)
    positive = np.isfinite(lv)
    if not positive[0]:
        raise PMFError("V_0 must be positive")
    top = np.flatnonzero(positive)[-1]
    if not positive[: top + 1].all():
        raise PMFError("profile has an interior zero; support would not be contiguous")
    w = profile.normalized[: top + 1]
    nz = np.flatnonzero(w >= _TINY)
    lo, hi = nz[0], nz[-1]
    if np.any(w[lo: hi + 1] < _TINY):
        raise PMFError("normalized profile underflows in its interior")
    return DiscretePMF.from_weights(int(lo), w[lo: hi + 1])


@dataclass(frozen=True)
class Corollary6Report:
    t: float
    n: int
    deviation: float
    mean: float
    upper_exact: float
    lower_exact: float
    exact: float
    bound: float
    trivial_upper: bool
    small_mean_bound: float | None
    holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def corollary6_check(profile: IntrinsicVolumeProfile, t: float) -> Corollary6Report:
    """Exact ``P(|Z_K - E Z_K| >= t sqrt(n))`` against ``2 exp(-t^2/2)``.

    When ``n < t sqrt(n) + E[Z_K]`` the upper deviation is impossible since
    ``Z_K <= n``; that branch is flagged and its exact tail must be 0.
    The dimension-free bound ``2 exp(-t^2 sqrt(n) / (2(t+1)))`` is also
    reported whenever ``E[Z_K] <= sqrt(n)``.
    """
    n = profile.dim
    root = math.sqrt(n)
    if not 0.0 <= t <= root * (1 + 1e-12):
        raise ValueError(f"t must lie in [0, sqrt(n)] = [0, {root:.6g}], got {t!r}")
    pmf = zk_pmf(profile)
    mu = mean(pmf)
    s = t * root
    snap = 1e-12 * max(1.0, s, mu)
    support = pmf.support.tolist()
    masses = pmf.masses
    upper = math.fsum(reversed([m for j, m in zip(support, masses) if j - mu >= s - snap]))
    lower = math.fsum(m for j, m in zip(support, masses) if mu - j >= s - snap)
    exact = math.fsum(m for j, m in zip(support, masses) if abs(j - mu) >= s - snap)
    bound = 2.0 * math.exp(-0.5 * t * t)
    trivial = n < s + mu
    small = None
    if mu <= root:
        small = 2.0 * math.exp(-t * t * root / (2.0 * (t + 1.0)))
    holds = exact <= bound + 1e-12
    if trivial:
        holds = holds and upper == 0.0
    if small is not None:
        holds = holds and exact <= small + 1e-12
    return Corollary6Report(t, n, s, mu, min(upper, 1.0), min(lower, 1.0), min(exact, 1.0),
                            bound, trivial, small, holds)


@dataclass(frozen=True)
class PoissonLimitReport:
    lam: float
    rows: list[dict]
    decreasing: bool


def poisson_limit_demo(lam: float, n_list: Iterable[int]) -> PoissonLimitReport:
    """TV distance from ``Z_K`` of the cube ``(lam/(n-lam))[0,1]^n`` to Poisson(lam)."""
    lam = _positive("lambda", lam)
    ns = [int(n) for n in n_list]
    for n in ns:
        if n <= lam:
            raise ValueError(f"every n must exceed lambda={lam}, got n={n}")
    ref = make_truncated_poisson(lam, 0, poisson_cutoff(lam))
    rows = []
    for n in ns:
        r = lam / (n - lam)
        z = zk_pmf(intrinsic_volumes(ScaledCube(r, n)))
        rows.append({"n": n, "r": r, "tv": total_variation(z, ref)})
    tvs = [row["tv"] for row in rows]
    decreasing = all(b < a for a, b in zip(tvs, tvs[1:]))
    return PoissonLimitReport(lam, rows, decreasing)


def zk_summary(profile: IntrinsicVolumeProfile) -> dict:
    pmf = zk_pmf(profile)
    return {"mean": mean(pmf), "variance": variance(pmf), "pmf": pmf.to_dict()}
