"""Finite-sample behaviour of sequential normal scores.

Exact results use the fact that the n-th sequential rank is uniform on
``1..n`` for i.i.d. continuous data, so moments of the n-th score are finite
sums. The Monte-Carlo studies run the real scorer on simulated streams.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .normal import AdResult, anderson_darling_n01, phi, phi_inverse
from .scoring import IndividualScorer

TABLE1_I = (2, 3, 4, 5, 10, 20, 30, 31, 32, 100, 1000, 5000)
ECDF_GRID = np.linspace(-4.0, 4.0, 401)


def rank_probabilities(i: int, b: float) -> np.ndarray:
    """All ``i`` equally likely values of ``p`` at step ``i`` under ``a = b / 2``."""
    r = np.arange(1, i + 1, dtype=float)
    return (r - 1.0 + b / 2.0) / (i - 1.0 + b)


def exact_sd_zn(i: int, b: float) -> float:
    """Exact standard deviation of the i-th score (its mean is exactly zero)."""
    if i < 2:
        raise ValueError(f"exact_sd_zn needs i >= 2, got {i}")
    z = phi_inverse(rank_probabilities(i, b))
    return float(np.sqrt(np.mean(z * z)))


def exact_var_p(i: int, b: float) -> float:
    """Variance of ``p`` at step ``i`` by enumerating the ``i`` ranks."""
    p = rank_probabilities(i, b)
    return float(np.mean((p - p.mean()) ** 2))


def solve_b_for_unit_sd(i: int, lo: float = 0.05, hi: float = 2.0) -> float:
    """The ``b`` for which the i-th score has unit standard deviation."""
    if i < 2:
        raise ValueError(f"solve_b_for_unit_sd needs i >= 2, got {i}")
    f_lo, f_hi = exact_sd_zn(i, lo) - 1.0, exact_sd_zn(i, hi) - 1.0
    if f_lo * f_hi > 0:
        raise ValueError(f"b bracket [{lo}, {hi}] does not contain a root for i={i} "
                         f"(sd-1 = {f_lo:.3g}, {f_hi:.3g})")
    return bisect(lambda b: exact_sd_zn(i, b) - 1.0, lo, hi, xtol=1e-8)


def b_approximation(i: int) -> float:
    return 0.824 - 0.792 / i


@dataclass(frozen=True)
class Table1Row:
    i: int
    sd_b1: float
    b_for_unit_sd: float
    b_approx: float
    sd_with_b_approx: float


def table1(rows=TABLE1_I) -> list[Table1Row]:
    out = []
    for i in rows:
        ba = b_approximation(i)
        out.append(Table1Row(i, exact_sd_zn(i, 1.0), solve_b_for_unit_sd(i), ba, exact_sd_zn(i, ba)))
    return out


@dataclass(frozen=True)
class EcdfSummary:
    grid: np.ndarray
    mean_ecdf: np.ndarray
    n: int
    replications: int
    jump_at_zero: float

    @property
    def max_abs_deviation(self) -> float:
        return float(np.max(np.abs(self.mean_ecdf - phi(self.grid))))


def _score_paths(n: int, replications: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.random((replications, n))
    z = np.empty((replications, n))
    for r in range(replications):
        scorer = IndividualScorer()
        z[r] = [scorer.score(x).z for x in raw[r]]
    return z


def mean_ecdf_study(n: int, replications: int = 1000, grid=ECDF_GRID, seed: int = 0) -> EcdfSummary:
    """Average, over simulated streams, of the ECDF of the first ``n`` scores."""
    if replications < 100:
        raise ValueError("mean_ecdf_study needs at least 100 replications")
    grid = np.asarray(grid, dtype=float)
    z = _score_paths(n, replications, np.random.default_rng(seed))
    flat = np.sort(z.ravel())
    # every path has the same length, so the mean ECDF is the pooled ECDF
    mean_ecdf = np.searchsorted(flat, grid, side="right") / flat.size
    jump = float(np.mean(flat == 0.0))
    return EcdfSummary(grid, mean_ecdf, n, replications, jump)


def path_gof_study(checkpoints, seed: int = 0, source: str = "sns", shift: float = 0.0) -> list[AdResult]:
    """One simulated path, AD-tested against N(0, 1) on its first ``c`` values at each checkpoint.

    ``source="normal"`` replaces the scores by exact N(0, 1) draws (null
    self-check). A nonzero ``shift`` moves the raw data up by that amount
    from the halfway point of the longest checkpoint on.
    """
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    n = checkpoints[-1]
    rng = np.random.default_rng(seed)
    if source == "normal":
        z = rng.standard_normal(n)
    elif source == "sns":
        raw = rng.standard_normal(n)
        raw[n // 2:] += shift
        scorer = IndividualScorer()
        z = np.array([scorer.score(x).z for x in raw])
    else:
        raise ValueError(f"source must be 'sns' or 'normal', got {source!r}")
    return [anderson_darling_n01(z[:c]) for c in checkpoints]
