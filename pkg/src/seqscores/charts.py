"""Normal-theory control charts fed with scores.

Engines are step functions over a small mutable state. They report the first
crossing of the decision limit and keep accumulating afterwards; nothing
resets on a signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

SIDES = ("upper", "lower", "both")


@dataclass(frozen=True)
class StepResult:
    step: int
    statistic: float
    limit: float
    signal: bool


@dataclass
class ChartVerdict:
    signaled: bool = False
    signal_step: int | None = None
    statistic_path: list[tuple[int, float, float]] = field(default_factory=list)


class _Engine:
    def __init__(self):
        self.verdict = ChartVerdict()

    def _record(self, res: StepResult) -> StepResult:
        v = self.verdict
        v.statistic_path.append((res.step, res.statistic, res.limit))
        if res.signal and not v.signaled:
            v.signaled = True
            v.signal_step = res.step
        return res


class CusumMean(_Engine):
    """Tabular CUSUM on individual scores.

    upper: ``c+ = max(0, c+ + z - k)``, signal when ``c+ > h``.
    lower: ``c- = min(0, c- + z + k)``, signal when ``c- < -h``.
    For ``side="both"`` the recorded statistic is ``max(c+, -c-)``.
    """

    def __init__(self, k: float = 0.25, h: float = 7.267, side: str = "upper"):
        super().__init__()
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {side!r}")
        if k < 0:
            raise ValueError("allowance k must be >= 0")
        if not h > 0:
            raise ValueError("decision interval h must be > 0")
        self.k, self.h, self.side = k, h, side
        self.c_plus = 0.0
        self.c_minus = 0.0
        self.t = 0
        self.last_zero_plus = 0
        self.last_zero_minus = 0

    def step(self, z: float) -> StepResult:
        self.t += 1
        self.c_plus = max(0.0, self.c_plus + z - self.k)
        self.c_minus = min(0.0, self.c_minus + z + self.k)
        if self.c_plus == 0.0:
            self.last_zero_plus = self.t
        if self.c_minus == 0.0:
            self.last_zero_minus = self.t
        up = self.c_plus > self.h
        down = self.c_minus < -self.h
        if self.side == "upper":
            res = StepResult(self.t, self.c_plus, self.h, up)
        elif self.side == "lower":
            res = StepResult(self.t, self.c_minus, -self.h, down)
        else:
            res = StepResult(self.t, max(self.c_plus, -self.c_minus), self.h, up or down)
        return self._record(res)

    @property
    def change_point(self) -> int:
        """Last step at which the monitored sum was zero."""
        if self.side == "lower":
            return self.last_zero_minus
        if self.side == "upper":
            return self.last_zero_plus
        return self.last_zero_plus if self.c_plus >= -self.c_minus else self.last_zero_minus


def sample_variance(scores: Sequence[float]) -> float:
    m = len(scores)
    if m < 2:
        raise ValueError(f"sample variance needs at least 2 scores, got {m}")
    mean = sum(scores) / m
    return sum((s - mean) ** 2 for s in scores) / (m - 1)


class CusumVariance(_Engine):
    """Downward CUSUM on batch sample variances: ``c = min(0, c + s^2 - k)``, signal when ``c < h``."""

    def __init__(self, k: float = 0.793, h: float = -1.645):
        super().__init__()
        if not h < 0:
            raise ValueError("decision limit h of the downward variance CUSUM must be negative")
        self.k, self.h = k, h
        self.c_minus = 0.0
        self.i = 0
        self.last_zero_index = 0

    def step(self, scores: Sequence[float]) -> StepResult:
        s2 = sample_variance(scores)
        self.i += 1
        self.c_minus = min(0.0, self.c_minus + s2 - self.k)
        if self.c_minus == 0.0:
            self.last_zero_index = self.i
        return self._record(StepResult(self.i, self.c_minus, self.h, self.c_minus < self.h))

    @property
    def change_point(self) -> int:
        return self.last_zero_index


def cusum_variance_k(sigma0: float, sigma1: float) -> float:
    """Reference value of the optimal CUSUM for a change between standard deviations.

    Returned as a magnitude; the downward recursion subtracts it.
    """
    if not (sigma0 > 0 and sigma1 > 0):
        raise ValueError("standard deviations must be positive")
    if sigma0 == sigma1:
        raise ValueError("sigma0 == sigma1: reference value is undefined")
    s0, s1 = sigma0 * sigma0, sigma1 * sigma1
    return abs(2.0 * math.log(sigma0 / sigma1) * s0 * s1 / (s1 - s0))


def ewma_limit(i: int, lam: float, rho: float, m: int, sigma: float = 1.0) -> float:
    """Time-varying EWMA half-width after ``i`` batches."""
    return rho * math.sqrt(lam / (2.0 - lam) * (1.0 - (1.0 - lam) ** (2 * i))) * sigma / math.sqrt(m)


class Ewma(_Engine):
    """EWMA of batch means, ``u = lam * mean + (1 - lam) * u``, with variable limits."""

    def __init__(self, lam: float = 0.1, rho: float = 2.714, m: int = 1, sigma: float = 1.0):
        super().__init__()
        if not 0 < lam <= 1:
            raise ValueError("lambda must lie in (0, 1]")
        if rho < 0:
            raise ValueError("rho must be >= 0")
        if m < 1:
            raise ValueError("batch size m must be >= 1")
        self.lam, self.rho, self.m, self.sigma = lam, rho, m, sigma
        self.u = 0.0
        self.i = 0

    def limit(self, i: int) -> float:
        return ewma_limit(i, self.lam, self.rho, self.m, self.sigma)

    def step(self, scores) -> StepResult:
        if isinstance(scores, (int, float)):
            scores = (scores,)
        if len(scores) != self.m:
            raise ValueError(f"expected {self.m} scores per step, got {len(scores)}")
        self.i += 1
        self.u = self.lam * (sum(scores) / self.m) + (1.0 - self.lam) * self.u
        lim = self.limit(self.i)
        return self._record(StepResult(self.i, self.u, lim, abs(self.u) > lim))


# Chart configurations: immutable parameter sets with one free limit, used by
# calibration and the CLI to build engines and vectorised simulators. The
# simulators consume one summary per chart step: the score itself
# (cusum-mean), the batch mean (ewma) or the batch sample variance
# (cusum-var).


@dataclass(frozen=True)
class CusumMeanConfig:
    k: float = 0.25
    h: float = 7.267
    side: str = "upper"
    name = "cusum-mean"
    limit_name = "h"
    m = 1

    @property
    def limit(self) -> float:
        return self.h

    def with_limit(self, value: float) -> "CusumMeanConfig":
        return replace(self, h=value)

    def engine(self) -> CusumMean:
        return CusumMean(self.k, self.h, self.side)

    def summarize(self, scores: Sequence[float]) -> float:
        return scores[0]

    def draw_normal(self, rng: np.random.Generator, shape) -> np.ndarray:
        return rng.standard_normal(shape)

    def perturb(self, x: np.ndarray, shift: float, scale: float) -> np.ndarray:
        return scale * x + shift

    def run_lengths(self, x: np.ndarray, state=None):
        """Vectorised recursion over ``x`` of shape (replications, steps).

        Returns (first signalling column per row or -1, carried state).
        """
        reps, steps = x.shape
        cp, cm = (np.zeros(reps), np.zeros(reps)) if state is None else state
        first = np.full(reps, -1)
        for t in range(steps):
            zt = x[:, t]
            np.maximum(cp + zt - self.k, 0.0, out=cp)
            np.minimum(cm + zt + self.k, 0.0, out=cm)
            if self.side == "upper":
                sig = cp > self.h
            elif self.side == "lower":
                sig = cm < -self.h
            else:
                sig = (cp > self.h) | (cm < -self.h)
            first[sig & (first < 0)] = t
        return first, (cp, cm)


@dataclass(frozen=True)
class CusumVarianceConfig:
    k: float = 0.793
    h: float = -1.645
    m: int = 10
    name = "cusum-var"
    limit_name = "h"

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("variance CUSUM needs batch size m >= 2")

    @property
    def limit(self) -> float:
        return self.h

    def with_limit(self, value: float) -> "CusumVarianceConfig":
        return replace(self, h=value)

    def engine(self) -> CusumVariance:
        return CusumVariance(self.k, self.h)

    def summarize(self, scores: Sequence[float]) -> float:
        return sample_variance(scores)

    def draw_normal(self, rng: np.random.Generator, shape) -> np.ndarray:
        # sample variance of m iid N(0, 1) values
        return rng.chisquare(self.m - 1, shape) / (self.m - 1)

    def perturb(self, x: np.ndarray, shift: float, scale: float) -> np.ndarray:
        return scale * scale * x

    def run_lengths(self, x: np.ndarray, state=None):
        reps, steps = x.shape
        c = np.zeros(reps) if state is None else state
        first = np.full(reps, -1)
        for t in range(steps):
            np.minimum(c + x[:, t] - self.k, 0.0, out=c)
            sig = c < self.h
            first[sig & (first < 0)] = t
        return first, c


@dataclass(frozen=True)
class EwmaConfig:
    lam: float = 0.1
    rho: float = 2.714
    m: int = 10
    name = "ewma"
    limit_name = "rho"

    @property
    def limit(self) -> float:
        return self.rho

    def with_limit(self, value: float) -> "EwmaConfig":
        return replace(self, rho=value)

    def engine(self) -> Ewma:
        return Ewma(self.lam, self.rho, self.m)

    def summarize(self, scores: Sequence[float]) -> float:
        return sum(scores) / len(scores)

    def draw_normal(self, rng: np.random.Generator, shape) -> np.ndarray:
        # mean of m iid N(0, 1) values
        return rng.standard_normal(shape) / math.sqrt(self.m)

    def perturb(self, x: np.ndarray, shift: float, scale: float) -> np.ndarray:
        return scale * x + shift

    def run_lengths(self, x: np.ndarray, state=None):
        """``state`` is (u, steps already done)."""
        reps, steps = x.shape
        u, done = (np.zeros(reps), 0) if state is None else state
        first = np.full(reps, -1)
        for t in range(steps):
            u = self.lam * x[:, t] + (1.0 - self.lam) * u
            lim = ewma_limit(done + t + 1, self.lam, self.rho, self.m)
            sig = np.abs(u) > lim
            first[sig & (first < 0)] = t
        return first, (u, done + steps)


ChartConfig = CusumMeanConfig | CusumVarianceConfig | EwmaConfig
