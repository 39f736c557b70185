"""Truncated discrete Laplace noise for d-distant histogram release.

Noise is a non-negative integer drawn from a discrete Laplace centred near
``eta0``, with everything at or below zero folded into zero so it can be
realized purely by adding dummy words. Splitting segments over N providers
amplifies privacy, so each partition uses the weaker per-partition
``(eps_eff, delta_eff)``.

The formula centre ``eta0`` comes from the continuous mechanism. On the
integer grid it leaks slightly more than ``delta_eff`` below ``d``, so by
default the table is centred at the smallest ``c >= eta0`` whose mass on
``[0, d-1]`` is at most ``delta_eff``. ``calibrate=False`` keeps ``c = eta0``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

TAIL_RESIDUAL = 1e-12


@dataclass(frozen=True)
class DpParams:
    epsilon: float
    delta: float
    d: int
    n_providers: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ParameterError("epsilon must be > 0")
        if not 0 < self.delta < 1:
            raise ParameterError("delta must be in (0, 1)")
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError("d must be an integer >= 1")
        if int(self.n_providers) != self.n_providers or self.n_providers < 1:
            raise ParameterError("n_providers must be an integer >= 1")
        if (math.exp(self.epsilon / self.d) + 1.0) * self.delta >= 1.0:
            raise ParameterError("need (e^(epsilon/d) + 1) * delta < 1")

    @property
    def beta(self) -> float:
        return 1.0 / self.n_providers

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "delta": self.delta, "d": self.d, "n_providers": self.n_providers}


def amplified_params(params: DpParams) -> tuple[float, float]:
    """Per-partition (eps', delta') with eps' = ln(1 + (e^eps - 1)/beta), delta' = beta * delta."""
    if params.n_providers == 1:
        return params.epsilon, params.delta
    beta = params.beta
    return math.log1p(math.expm1(params.epsilon) / beta), beta * params.delta


def eta0_formula(eps_eff: float, delta_eff: float, d: int) -> float:
    return -(d / eps_eff) * math.log((math.exp(eps_eff / d) + 1.0) * delta_eff) + d


def _table(a: float, center: float) -> np.ndarray:
    """Renormalized pmf over 0..x_max of exp(-a|x - center|) with x <= 0 folded into 0."""
    r = math.exp(-a)
    # tail mass beyond x_max (relative to the peak) is r^(x_max + 1 - c) / (1 - r)
    span = math.log(TAIL_RESIDUAL * (1.0 - r)) / -a if r < 1 else 1e6
    x_max = max(1, int(math.ceil(center + span)))
    x = np.arange(x_max + 1, dtype=np.float64)
    w = np.exp(-a * np.abs(x - center))
    # center > 0, so every integer <= 0 lies on the rising side of the peak
    w[0] = math.exp(-a * center) / (1.0 - r)
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class TruncLaplaceDist:
    eps_eff: float
    delta_eff: float
    d: int
    eta0: float
    center: float
    pmf: np.ndarray = field(repr=False)

    def __post_init__(self):
        pmf = np.asarray(self.pmf, dtype=np.float64)
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        cdf = np.cumsum(pmf)
        cdf[-1] = 1.0
        cdf.setflags(write=False)
        object.__setattr__(self, "cdf", cdf)

    @property
    def r(self) -> float:
        return math.exp(-self.eps_eff / self.d)

    @property
    def p(self) -> float:
        e = math.exp(self.eps_eff / self.d)
        return (e - 1.0) / (e + 1.0)

    @property
    def x_max(self) -> int:
        return len(self.pmf) - 1

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    def to_dict(self) -> dict:
        return {
            "eps_eff": self.eps_eff,
            "delta_eff": self.delta_eff,
            "d": self.d,
            "eta0": self.eta0,
            "center": self.center,
        }


def build_dist(eps_eff: float, delta_eff: float, d: int, *, calibrate: bool = True) -> TruncLaplaceDist:
    if eps_eff <= 0 or not 0 < delta_eff < 1 or d < 1:
        raise ParameterError("need eps_eff > 0, 0 < delta_eff < 1, d >= 1")
    eta0 = eta0_formula(eps_eff, delta_eff, d)
    if eta0 <= 0:
        raise ParameterError(f"eta0 = {eta0:.4g} <= 0; increase delta or decrease epsilon/d")
    a = eps_eff / d
    center = eta0
    if calibrate:
        center = _calibrated_center(a, eta0, d, delta_eff)
    return TruncLaplaceDist(eps_eff, delta_eff, d, eta0, center, _table(a, center))


def _low_mass(a: float, center: float, d: int) -> float:
    return float(_table(a, center)[:d].sum())


def _calibrated_center(a: float, eta0: float, d: int, delta_eff: float) -> float:
    # aim a hair under delta' so float summation order never tips a check over
    delta_eff = delta_eff * (1.0 - 1e-9)
    if _low_mass(a, eta0, d) <= delta_eff:
        return eta0
    lo, step = eta0, 1.0 / a
    hi = eta0 + step
    while _low_mass(a, hi, d) > delta_eff:
        lo, hi = hi, hi + step
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _low_mass(a, mid, d) > delta_eff:
            lo = mid
        else:
            hi = mid
    return hi


def dist_for(params: DpParams, *, calibrate: bool = True) -> TruncLaplaceDist:
    eps_eff, delta_eff = amplified_params(params)
    return build_dist(eps_eff, delta_eff, params.d, calibrate=calibrate)


@dataclass(frozen=True, eq=False)
class NoisePlan:
    """Per-partition noise vectors; ``vectors[i, j]`` dummy words for vocab word j in partition i."""

    vectors: np.ndarray
    seed: int
    words: tuple[str, ...] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.int64)
        if v.ndim != 2:
            raise ValueError("noise vectors must be 2-D (partitions x vocab)")
        if (v < 0).any():
            raise ValueError("negative noise")
        if self.words is not None and len(self.words) != v.shape[1]:
            raise ValueError("words length must match vocab dimension")
        object.__setattr__(self, "vectors", v)

    @property
    def n_partitions(self) -> int:
        return self.vectors.shape[0]

    @property
    def total(self) -> int:
        return int(self.vectors.sum())

    def with_words(self, words) -> "NoisePlan":
        return NoisePlan(self.vectors, self.seed, tuple(words), dict(self.params))

    def to_json(self) -> str:
        names = self.words or tuple(str(j) for j in range(self.vectors.shape[1]))
        rows = [
            {"partition": i, "word": names[j], "count": int(self.vectors[i, j])}
            for i in range(self.n_partitions)
            for j in range(self.vectors.shape[1])
        ]
        doc = {
            "seed": self.seed,
            "params": self.params,
            "n_partitions": self.n_partitions,
            "words": list(names),
            "named": self.words is not None,
            "noise": rows,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "NoisePlan":
        doc = json.loads(text)
        words = list(doc["words"])
        v = np.zeros((doc["n_partitions"], len(words)), dtype=np.int64)
        col = {w: j for j, w in enumerate(words)}
        for r in doc["noise"]:
            v[r["partition"], col[r["word"]]] = r["count"]
        named = doc.get("named", True)
        return cls(v, doc["seed"], tuple(words) if named else None, doc.get("params", {}))


def sample_noise(dist: TruncLaplaceDist, size, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(size)
    idx = np.searchsorted(dist.cdf, u, side="right")
    return np.minimum(idx, dist.x_max).astype(np.int64)


def sample_noise_plan(dist: TruncLaplaceDist, vocab_size: int, n: int, seed: int) -> NoisePlan:
    if vocab_size < 0 or n < 1:
        raise ValueError("need vocab_size >= 0 and n >= 1")
    rng = np.random.default_rng(seed)
    params = dist.to_dict()
    params["n_providers"] = n
    return NoisePlan(sample_noise(dist, (n, vocab_size), rng), seed, params=params)


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    closed_form_variance: float

    @property
    def closed_form_deviation(self) -> float:
        if self.variance == 0:
            return math.inf
        return (self.closed_form_variance - self.variance) / self.variance


def closed_form_variance(dist: TruncLaplaceDist) -> float:
    """The closed-form variance expression v, evaluated as written with p, r and eta0 of ``dist``.

    Returns inf when the expression overflows double precision.
    """
    p, r, d = dist.p, dist.r, dist.d
    try:
        big = math.exp(dist.eps_eff * dist.eta0 / d)
    except OverflowError:
        return math.inf
    g = 1.0 - d * r ** (d - 1) + (d - 1) * r**d
    dg = -d * (d - 1) * r ** (d - 2) * (1.0 - r) if d >= 2 else 0.0
    f = r * g / (1.0 - r) ** 2
    df = g / (1.0 - r) ** 2 + r * dg / (1.0 - r) ** 2 + 2.0 * r * g / (1.0 - r) ** 3
    swing = 1.0 / big - big
    second = p * r * big * (1.0 / (1.0 - r) ** 2 + 2.0 * r / (1.0 - r) ** 3) + p * df * r * swing
    first = p * big * r / (1.0 - r) ** 2 + p * f * swing
    v = second - first * first
    return v if math.isfinite(v) else math.inf


def dist_moments(dist: TruncLaplaceDist) -> Moments:
    x = np.arange(len(dist.pmf), dtype=np.float64)
    mean = float(np.dot(x, dist.pmf))
    var = float(np.dot((x - mean) ** 2, dist.pmf))
    return Moments(mean, var, closed_form_variance(dist))


def _shift_vectors(dim: int, d: int):
    """All integer vectors in Z^dim with L1 norm exactly d."""
    for combo in itertools.product(range(-d, d + 1), repeat=dim):
        if sum(abs(c) for c in combo) == d:
            yield combo


def _shifted_grid(pmf: np.ndarray, shift: int, lo: int, hi: int) -> np.ndarray:
    """Probabilities of noise = y - shift for y in [lo, hi]."""
    out = np.zeros(hi - lo + 1)
    a = max(lo, shift)
    b = min(hi, shift + len(pmf) - 1)
    if b >= a:
        out[a - lo : b - lo + 1] = pmf[a - shift : b - shift + 1]
    return out


def delta_violation(dist: TruncLaplaceDist, shift, epsilon: float | None = None) -> float:
    """sum_y max(0, P1(y) - e^eps P2(y)) for histograms H and H + shift, by enumeration."""
    eps = dist.eps_eff if epsilon is None else epsilon
    pmf = dist.pmf
    n = len(pmf)
    axes1, axes2 = [], []
    for s in shift:
        lo, hi = min(0, s), n - 1 + max(0, s)
        axes1.append(_shifted_grid(pmf, 0, lo, hi))
        axes2.append(_shifted_grid(pmf, s, lo, hi))
    p1 = axes1[0]
    p2 = axes2[0]
    for a1, a2 in zip(axes1[1:], axes2[1:]):
        p1 = np.multiply.outer(p1, a1)
        p2 = np.multiply.outer(p2, a2)
    return float(np.maximum(p1 - math.exp(eps) * p2, 0.0).sum())


def verify_dp_small(
    dist: TruncLaplaceDist, d: int, vocab_size: int = 1, epsilon: float | None = None
) -> float:
    """Worst-case delta violation over every histogram pair at L1 distance ``d``.

    Enumerates every shift vector of L1 norm ``d`` (both signs, every split
    across coordinates) and every noisy output up to the tail cutoff.
    """
    if not 1 <= vocab_size <= 3:
        raise ValueError("vocab_size must be 1..3 for exhaustive enumeration")
    if d == 0:
        return delta_violation(dist, (0,) * vocab_size, epsilon)
    return max(delta_violation(dist, s, epsilon) for s in _shift_vectors(vocab_size, d))


def noise_mass_below(dist: TruncLaplaceDist, k: int) -> float:
    return float(dist.pmf[: max(0, k)].sum())
