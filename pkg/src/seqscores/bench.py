"""Timing harness: sequential normal scores against re-ranking baselines.

The two baselines are deliberately naive cost yardsticks, not faithful
competitor implementations:

* ``mw-changepoint``: Mann-Whitney change-point scan over every split point,
  built from all n^2 pairwise comparisons (refused beyond ``MW_CAP``
  observations, the size the original statistic could not get past);
* ``lepage-ref``: Lepage statistic of the latest ``LEPAGE_WINDOW`` values
  against the first ``LEPAGE_REFERENCE`` values, re-ranking the pooled
  sample from scratch in pure Python.
"""

from __future__ import annotations

import statistics
import time
import warnings
from dataclasses import dataclass

import numpy as np

from .scoring import IndividualScorer

MW_CAP = 10_000
LEPAGE_REFERENCE = 500
LEPAGE_WINDOW = 500
METHODS = ("sns", "mw-changepoint", "lepage-ref")


@dataclass(frozen=True)
class BenchResult:
    method: str
    n: int
    wall_time: float | None
    repeats: int
    cumulative_time: float | None = None
    feasible: bool = True


def _median_time(fn, repeats: int) -> float:
    fn()  # warm-up, discarded
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _stream(n: int, seed: int) -> list[float]:
    return np.random.default_rng(seed).standard_normal(n).tolist()


def bench_sns(n: int, repeats: int = 5, seed: int = 0, window: int | None = None,
              tail: int = 1000) -> BenchResult:
    """Ingest ``n`` values through the individual scorer.

    ``cumulative_time`` is the median time to score the whole stream;
    ``wall_time`` is the median cost of a single update near the end of
    the stream (median over the last ``tail`` updates, since one update is
    below timer resolution).
    """
    if n < 100:
        raise ValueError("bench_sns needs n >= 100")
    xs = _stream(n, seed)
    tail = min(tail, n)
    cumulative = []
    per_update = []
    for _ in range(repeats + 1):
        scorer = IndividualScorer(window=window)
        score = scorer.score
        t0 = time.perf_counter()
        for x in xs[: n - tail]:
            score(x)
        stamps = [time.perf_counter()]
        for x in xs[n - tail:]:
            score(x)
            stamps.append(time.perf_counter())
        cumulative.append(stamps[-1] - t0)
        per_update.append(statistics.median(b - a for a, b in zip(stamps, stamps[1:])))
    # first pass is the warm-up
    return BenchResult("sns", n, statistics.median(per_update[1:]), repeats,
                       cumulative_time=statistics.median(cumulative[1:]))


def mann_whitney_changepoint(x) -> tuple[int, float]:
    """Maximum standardized Mann-Whitney statistic over split points 1..n-1.

    Returns (split, statistic) where the split is the size of the first segment.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    # U_k counts pairs (i < k <= j) with x_i < x_j (ties count 1/2). Moving the
    # split past x_k adds its comparisons with later values and drops those
    # with earlier ones: delta_k = row_k - col_k of the strict upper triangle.
    row = np.zeros(n)
    col = np.zeros(n)
    for a in range(0, n, 1024):
        block = x[a:a + 1024, None]
        wins = (block < x[None, :]) + 0.5 * (block == x[None, :])
        wins[np.arange(n)[None, :] <= np.arange(a, a + block.shape[0])[:, None]] = 0.0
        row[a:a + block.shape[0]] = wins.sum(axis=1)
        col += wins.sum(axis=0)
    u = np.cumsum(row - col)[:-1]
    k = np.arange(1, n)
    mean = k * (n - k) / 2.0
    sd = np.sqrt(k * (n - k) * (n + 1) / 12.0)
    stat = np.abs(u - mean) / sd
    best = int(np.argmax(stat))
    return best + 1, float(stat[best])


def _midranks(values: list[float]) -> list[float]:
    order = sorted(range(len(values)), key=values.__getitem__)
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def lepage(reference, test) -> float:
    """Lepage statistic: squared standardized Wilcoxon plus Ansari-Bradley of ``test``."""
    reference, test = list(reference), list(test)
    n1, n2 = len(reference), len(test)
    big_n = n1 + n2
    ranks = _midranks(reference + test)[n1:]
    w = sum(ranks)
    ew = n2 * (big_n + 1) / 2.0
    vw = n1 * n2 * (big_n + 1) / 12.0
    half = (big_n + 1) / 2.0
    ab = sum(half - abs(r - half) for r in ranks)
    if big_n % 2 == 0:
        eab = n2 * (big_n + 2) / 4.0
        vab = n1 * n2 * (big_n + 2) * (big_n - 2) / (48.0 * (big_n - 1))
    else:
        eab = n2 * (big_n + 1) ** 2 / (4.0 * big_n)
        vab = n1 * n2 * (big_n + 1) * (3 + big_n * big_n) / (48.0 * big_n * big_n)
    return (w - ew) ** 2 / vw + (ab - eab) ** 2 / vab


def bench_baseline_mw(n: int, repeats: int = 5, seed: int = 0) -> BenchResult:
    if n > MW_CAP:
        return BenchResult("mw-changepoint", n, None, 0, feasible=False)
    xs = np.asarray(_stream(n, seed))
    return BenchResult("mw-changepoint", n, _median_time(lambda: mann_whitney_changepoint(xs), repeats), repeats)


def bench_baseline_lepage(n: int, repeats: int = 5, seed: int = 0) -> BenchResult:
    if n < LEPAGE_REFERENCE + LEPAGE_WINDOW:
        raise ValueError(f"lepage-ref needs n >= {LEPAGE_REFERENCE + LEPAGE_WINDOW}")
    xs = _stream(n, seed)
    ref, win = xs[:LEPAGE_REFERENCE], xs[-LEPAGE_WINDOW:]
    return BenchResult("lepage-ref", n, _median_time(lambda: lepage(ref, win), repeats), repeats)


ALIASES = {"mw": "mw-changepoint", "lepage": "lepage-ref"}


def run(methods, sizes, repeats: int = 5, seed: int = 0) -> list[BenchResult]:
    table = {"sns": bench_sns, "mw-changepoint": bench_baseline_mw, "lepage-ref": bench_baseline_lepage}
    out = []
    for method in methods:
        method = ALIASES.get(method, method)
        if method not in table:
            raise ValueError(f"unknown bench method {method!r}; choose from {METHODS}")
        for n in sizes:
            out.append(table[method](int(n), repeats=repeats, seed=seed))
    return out


def speedup(sns: BenchResult, baseline: BenchResult, required: float = 10.0, soft: float = 5.0) -> float:
    """Baseline over SNS per-evaluation time; warns if below ``required`` but at least ``soft``."""
    ratio = baseline.wall_time / sns.wall_time
    if soft <= ratio < required:
        warnings.warn(f"SNS only {ratio:.1f}x faster than {baseline.method} at n={sns.n}", stacklevel=2)
    return ratio


def to_csv_rows(results) -> list[str]:
    rows = ["method,n,median_seconds,repeats"]
    for r in results:
        t = "infeasible" if not r.feasible else f"{r.wall_time:.9f}"
        rows.append(f"{r.method},{r.n},{t},{r.repeats}")
    return rows
