"""Sequential normal scores.

Each scorer turns raw observations into scores ``z = phi_inverse(p)`` where
``p`` estimates the cumulative probability of the new value from its
sequential rank among earlier values only. Four variants:

* :class:`IndividualScorer` - one value at a time, no prior knowledge.
* :class:`BatchScorer` - batches of ``m``; batch 1 is ranked within itself,
  later batches against previous batches only.
* :class:`ConditionalScorer` - a known quantile ``theta`` with known
  ``F(theta)``; values are ranked only among earlier values on the same side
  of ``theta`` and mapped into ``(0, F(theta)]`` or ``(F(theta), 1)``.
* :class:`ConditionalBatchScorer` - the batched form of the above.

All variants share the rank/probability rule

    R = 1 + #{prior < x} + 0.5 * #{prior == x}
    p = (R - 1 + a) / (n + b)

where ``n`` is the number of comparison values and ``(a, b)`` comes from a
:class:`ScoringConvention` evaluated at ``n + 1``. For the default rankit
convention this is ``(R - 0.5) / (n + 1)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .normal import phi_inverse
from .rankstore import RankStore

PRESETS: dict[str, tuple[float, float]] = {
    "rankit": (0.5, 1.0),
    "vdw": (1.0, 2.0),
    "blom": (5.0 / 8.0, 1.25),
    "tukey": (2.0 / 3.0, 4.0 / 3.0),
}


@dataclass(frozen=True)
class ScoringConvention:
    """Bias constants ``(a, b)`` of ``p = (R - 1 + a) / (i - 1 + b)``.

    ``kind`` is one of the preset names, ``"fixed"`` (with explicit ``b``)
    or ``"adaptive_b"`` (``b = 0.824 - 0.792 / i`` for ``i >= 2``, rankit at
    ``i = 1``). ``a`` is always ``b / 2`` so scores stay centred at zero.
    """

    kind: str = "rankit"
    b: float | None = None

    def __post_init__(self):
        if self.kind == "fixed":
            if self.b is None or not self.b > 0:
                raise ValueError("fixed convention needs b > 0")
        elif self.kind in PRESETS or self.kind == "adaptive_b":
            if self.b is not None:
                raise ValueError(f"convention {self.kind!r} does not take b")
        else:
            raise ValueError(f"unknown scoring convention {self.kind!r}")

    @classmethod
    def fixed(cls, b: float) -> "ScoringConvention":
        return cls("fixed", b)

    @classmethod
    def parse(cls, name: str) -> "ScoringConvention":
        """``rankit``, ``vdw``, ``blom``, ``tukey``, ``adaptive_b`` or ``fixed:<b>``."""
        if name.startswith("fixed:"):
            return cls.fixed(float(name.split(":", 1)[1]))
        return cls(name)

    def constants(self, i: int) -> tuple[float, float]:
        """``(a, b)`` for a sample of size ``i`` (comparison values plus the new one)."""
        if self.kind == "fixed":
            return self.b / 2.0, self.b
        if self.kind == "adaptive_b":
            if i < 2:
                return PRESETS["rankit"]
            b = 0.824 - 0.792 / i
            return b / 2.0, b
        return PRESETS[self.kind]

    def probability(self, rank: float, n_compared: int) -> float:
        a, b = self.constants(n_compared + 1)
        return (rank - 1.0 + a) / (n_compared + b)


RANKIT = ScoringConvention()


@dataclass(frozen=True)
class ScoredValue:
    index: int
    raw: float
    rank: float
    p: float
    z: float
    batch: int | None = None
    position: int | None = None


def variance_of_p(i: int, b: float) -> float:
    """Exact variance of the probability estimate ``p`` at step ``i`` when ``b = 2a``."""
    if i < 2:
        raise ValueError(f"variance_of_p needs i >= 2, got {i}")
    if not b > 0:
        raise ValueError("b must be positive")
    return (i * i - 1) / (12.0 * (i - 1 + b) ** 2)


def _finite(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"observation must be finite, got {x!r}")
    return x


def _midrank(x: float, others: Sequence[float]) -> float:
    lt = sum(1 for y in others if y < x)
    eq = sum(1 for y in others if y == x)
    return 1.0 + lt + 0.5 * eq


class IndividualScorer:
    """Scores single observations against everything seen before.

    With ``window`` set, only the most recent ``window`` observations are
    compared against, and the denominator uses that count in place of
    ``i - 1``.
    """

    def __init__(self, convention: ScoringConvention = RANKIT, window: int | None = None):
        self.convention = convention
        self.store = RankStore(window=window)
        self.i = 0

    def score(self, x: float) -> ScoredValue:
        x = _finite(x)
        lt, eq = self.store.counts(x)
        n = len(self.store)
        rank = 1.0 + lt + 0.5 * eq
        p = self.convention.probability(rank, n)
        self.i += 1
        self.store.insert(x)
        return ScoredValue(self.i, x, rank, p, phi_inverse(p))

    def score_many(self, xs) -> list[ScoredValue]:
        return [self.score(x) for x in xs]


class BatchScorer:
    """Scores batches of ``m`` values; a batch never ranks against itself after batch 1."""

    def __init__(self, m: int, convention: ScoringConvention = RANKIT, window: int | None = None):
        if m < 2:
            raise ValueError(f"batch size m must be >= 2, got {m}")
        self.m = m
        self.convention = convention
        self.store = RankStore(window=window)
        self.i = 0
        self.n_scored = 0

    def _check_batch(self, batch) -> list[float]:
        values = [_finite(x) for x in batch]
        if len(values) != self.m:
            raise ValueError(f"expected a batch of {self.m} values, got {len(values)}")
        return values

    def score_batch(self, batch: Sequence[float]) -> list[ScoredValue]:
        values = self._check_batch(batch)
        self.i += 1
        out = []
        n = len(self.store)
        for j, x in enumerate(values):
            if self.i == 1:
                rank = _midrank(x, values[:j] + values[j + 1:])
                p = self.convention.probability(rank, self.m - 1)
            else:
                lt, eq = self.store.counts(x)
                rank = 1.0 + lt + 0.5 * eq
                p = self.convention.probability(rank, n)
            self.n_scored += 1
            out.append(ScoredValue(self.n_scored, x, rank, p, phi_inverse(p), self.i, j + 1))
        for x in values:
            self.store.insert(x)
        return out


class _SidedStores:
    """Lower (``<= theta``) and upper (``> theta``) comparison stores.

    A window, when set, is a FIFO over the combined arrival order, so the
    two sides together hold at most ``window`` values.
    """

    def __init__(self, theta: float, window: int | None):
        if window is not None and window < 1:
            raise ValueError(f"window must be a positive integer, got {window}")
        self.theta = theta
        self.window = window
        self.lower = RankStore()
        self.upper = RankStore()
        self._arrivals: deque[float] | None = deque() if window is not None else None

    def side(self, x: float) -> RankStore:
        return self.lower if x <= self.theta else self.upper

    def insert(self, x: float) -> None:
        if self._arrivals is not None:
            if len(self._arrivals) == self.window:
                old = self._arrivals.popleft()
                self.side(old).remove(old)
            self._arrivals.append(x)
        self.side(x).insert(x)


def _check_conditional(theta: float, f_theta: float) -> tuple[float, float]:
    theta = _finite(theta)
    f_theta = float(f_theta)
    if not 0.0 < f_theta < 1.0:
        raise ValueError(f"F(theta) must lie strictly inside (0, 1), got {f_theta!r}")
    return theta, f_theta


class ConditionalScorer:
    """Individual scores given a known quantile ``theta`` with ``F(theta) = f_theta``.

    Values ``<= theta`` are ranked among earlier values ``<= theta`` and
    land in ``(0, f_theta)``; values ``> theta`` among earlier values
    ``> theta`` and land in ``(f_theta, 1)``.
    """

    def __init__(self, theta: float, f_theta: float, convention: ScoringConvention = RANKIT,
                 window: int | None = None):
        self.theta, self.f_theta = _check_conditional(theta, f_theta)
        self.convention = convention
        self.stores = _SidedStores(self.theta, window)
        self.n_minus = 0
        self.n_plus = 0
        self.i = 0

    def score(self, x: float) -> ScoredValue:
        x = _finite(x)
        store = self.stores.side(x)
        lt, eq = store.counts(x)
        rank = 1.0 + lt + 0.5 * eq
        q = self.convention.probability(rank, len(store))
        if x <= self.theta:
            self.n_minus += 1
            p = self.f_theta * q
        else:
            self.n_plus += 1
            p = self.f_theta + (1.0 - self.f_theta) * q
        self.i += 1
        self.stores.insert(x)
        return ScoredValue(self.i, x, rank, p, phi_inverse(p))

    def score_many(self, xs) -> list[ScoredValue]:
        return [self.score(x) for x in xs]


class ConditionalBatchScorer:
    """Batched conditional scores.

    Batch 1 is ranked within itself, side by side, with denominators taken
    from the batch-1 side counts. Later batches are ranked against the
    same side of all previous batches only. ``n_minus``/``n_plus`` count
    absorbed observations.
    """

    def __init__(self, theta: float, f_theta: float, m: int,
                 convention: ScoringConvention = RANKIT, window: int | None = None):
        if m < 2:
            raise ValueError(f"batch size m must be >= 2, got {m}")
        self.theta, self.f_theta = _check_conditional(theta, f_theta)
        self.m = m
        self.convention = convention
        self.stores = _SidedStores(self.theta, window)
        self.n_minus = 0
        self.n_plus = 0
        self.i = 0
        self.n_scored = 0

    def _splice(self, x: float, q: float) -> float:
        if x <= self.theta:
            return self.f_theta * q
        return self.f_theta + (1.0 - self.f_theta) * q

    def score_batch(self, batch: Sequence[float]) -> list[ScoredValue]:
        values = [_finite(x) for x in batch]
        if len(values) != self.m:
            raise ValueError(f"expected a batch of {self.m} values, got {len(values)}")
        self.i += 1
        out = []
        for j, x in enumerate(values):
            lower = x <= self.theta
            if self.i == 1:
                same_side = [y for k, y in enumerate(values) if k != j and (y <= self.theta) == lower]
                rank = _midrank(x, same_side)
                q = self.convention.probability(rank, len(same_side))
            else:
                store = self.stores.side(x)
                lt, eq = store.counts(x)
                rank = 1.0 + lt + 0.5 * eq
                q = self.convention.probability(rank, len(store))
            p = self._splice(x, q)
            self.n_scored += 1
            out.append(ScoredValue(self.n_scored, x, rank, p, phi_inverse(p), self.i, j + 1))
        for x in values:
            if x <= self.theta:
                self.n_minus += 1
            else:
                self.n_plus += 1
            self.stores.insert(x)
        return out


def make_scorer(variant: str, *, m: int | None = None, theta: float | None = None,
                f_theta: float | None = None, convention: ScoringConvention = RANKIT,
                window: int | None = None):
    """Build one of the four scorers from a variant name.

    Variants: ``individual``, ``batched``, ``conditional-individual``,
    ``conditional-batched``.
    """
    if variant in ("batched", "conditional-batched") and (m is None or m < 2):
        raise ValueError(f"variant {variant!r} needs a batch size m >= 2")
    if variant.startswith("conditional") and (theta is None or f_theta is None):
        raise ValueError(f"variant {variant!r} needs theta and f_theta")
    if variant == "individual":
        return IndividualScorer(convention, window)
    if variant == "batched":
        return BatchScorer(m, convention, window)
    if variant == "conditional-individual":
        return ConditionalScorer(theta, f_theta, convention, window)
    if variant == "conditional-batched":
        return ConditionalBatchScorer(theta, f_theta, m, convention, window)
    raise ValueError(f"unknown variant {variant!r}")


def is_batched(scorer) -> bool:
    return isinstance(scorer, (BatchScorer, ConditionalBatchScorer))
