"""Monte-Carlo run-length estimation and control-limit search.

Randomness layout (this is what makes results reproducible, independent of
``n_jobs``, and monotone in the control limit under a fixed seed):

* the master seed is split with :class:`numpy.random.SeedSequence`;
* exact-normal streams are simulated in fixed blocks of ``BLOCK``
  replications, one child seed per block, advancing in chunks of ``CHUNK``
  steps that are always drawn in full, so a replication's t-th input never
  depends on when other replications stopped or on the limit being tried;
* SNS streams get one child seed per replication, drawn in chunks the same way.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .charts import ChartConfig, CusumMeanConfig, CusumVarianceConfig, EwmaConfig
from .normal import phi_inverse
from .scoring import ScoringConvention, is_batched, make_scorer

BLOCK = 512
CHUNK = 256


class CalibrationError(RuntimeError):
    pass


def _uniform(rng: np.random.Generator, shape) -> np.ndarray:
    # strictly inside (0, 1) so every quantile transform below is finite
    return (rng.integers(0, 2 ** 53, size=shape, dtype=np.int64) + 0.5) / 2.0 ** 53


DISTRIBUTIONS = {
    "normal": phi_inverse,
    "uniform": lambda u: u,
    "exponential": lambda u: -np.log1p(-u),
    "lognormal": lambda u: np.exp(phi_inverse(u)),
    "cauchy": lambda u: np.tan(np.pi * (u - 0.5)),
}


@dataclass(frozen=True)
class StreamModel:
    """Where chart inputs come from.

    ``kind="normal"`` feeds exact N(0, 1) values to the chart. ``kind="sns"``
    draws raw data from ``distribution`` and feeds its sequential normal
    scores; conditional variants use ``theta`` = the ``f_theta`` quantile of
    that distribution.

    ``shift``/``scale`` alter inputs from chart step ``change_point`` on
    (1-based): raw values (or exact normal draws) become ``scale * x + shift``.
    """

    kind: str = "normal"
    distribution: str = "normal"
    variant: str = "individual"
    f_theta: float = 0.5
    convention: str = "rankit"
    window: int | None = None
    shift: float = 0.0
    scale: float = 1.0
    change_point: int | None = None

    def __post_init__(self):
        if self.kind not in ("normal", "sns"):
            raise ValueError(f"stream kind must be 'normal' or 'sns', got {self.kind!r}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; "
                             f"choose from {sorted(DISTRIBUTIONS)}")

    @property
    def shifted(self) -> bool:
        return self.change_point is not None and (self.shift != 0.0 or self.scale != 1.0)

    def after_change(self, first_step: int, steps: int) -> np.ndarray:
        """Mask of chart steps ``first_step .. first_step + steps - 1`` at or past the change."""
        if not self.shifted:
            return np.zeros(steps, dtype=bool)
        return first_step + np.arange(steps) >= self.change_point


def check_compatible(config: ChartConfig, variant: str, m: int | None) -> None:
    """Raise ValueError if a chart cannot consume the scores of ``variant``."""
    batched = variant in ("batched", "conditional-batched")
    if isinstance(config, CusumMeanConfig):
        if batched:
            raise ValueError("cusum-mean consumes individual scores; use an individual variant")
    elif isinstance(config, CusumVarianceConfig):
        if not batched:
            raise ValueError("cusum-var needs batches; use a batched variant")
        if m != config.m:
            raise ValueError(f"cusum-var batch size {config.m} does not match m={m}")
    elif isinstance(config, EwmaConfig):
        if batched and m != config.m:
            raise ValueError(f"ewma batch size {config.m} does not match m={m}")
        if not batched and config.m != 1:
            raise ValueError("ewma on an individual variant needs m = 1")


@dataclass(frozen=True)
class ArlEstimate:
    mean_rl: float
    std_error: float
    replications: int
    truncation_cap: int
    censored_fraction: float
    run_lengths: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def valid(self) -> bool:
        return self.censored_fraction < 0.05

    @classmethod
    def from_run_lengths(cls, rl, cap: int) -> "ArlEstimate":
        rl = np.asarray(rl, dtype=np.int64)
        n = rl.size
        sd = float(rl.std(ddof=1)) if n > 1 else 0.0
        return cls(float(rl.mean()), sd / math.sqrt(n), n, cap,
                   float(np.mean(rl >= cap)), tuple(int(x) for x in rl))


def _drop(state, keep: np.ndarray):
    if isinstance(state, tuple):
        return tuple(_drop(s, keep) for s in state)
    if isinstance(state, np.ndarray):
        return state[keep]
    return state


def _normal_block(config: ChartConfig, model: StreamModel, seed: np.random.SeedSequence,
                  size: int, cap: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    rl = np.full(size, cap, dtype=np.int64)
    alive = np.arange(size)
    state = None
    done = 0
    while done < cap and alive.size:
        x = config.draw_normal(rng, (size, CHUNK))[alive]
        take = min(CHUNK, cap - done)
        x = x[:, :take]
        after = model.after_change(done + 1, take)
        if after.any():
            x[:, after] = config.perturb(x[:, after], model.shift, model.scale)
        first, state = config.run_lengths(x, state)
        hit = first >= 0
        rl[alive[hit]] = done + first[hit] + 1
        alive = alive[~hit]
        state = _drop(state, ~hit)
        done += take
    return rl


def _sns_run_length(config: ChartConfig, model: StreamModel, seed: np.random.SeedSequence,
                    cap: int) -> int:
    rng = np.random.default_rng(seed)
    ppf = DISTRIBUTIONS[model.distribution]
    conditional = model.variant.startswith("conditional")
    theta = float(ppf(np.array([model.f_theta]))[0]) if conditional else None
    batched = model.variant in ("batched", "conditional-batched")
    m = config.m if batched else None
    scorer = make_scorer(model.variant, m=m, theta=theta,
                         f_theta=model.f_theta if conditional else None,
                         convention=ScoringConvention.parse(model.convention),
                         window=model.window)
    engine = config.engine()
    per_step = config.m
    done = 0
    while done < cap:
        raw = ppf(_uniform(rng, (CHUNK, per_step)))
        after = model.after_change(done + 1, CHUNK)
        if after.any():
            raw[after] = model.scale * raw[after] + model.shift
        for row in raw[: cap - done]:
            done += 1
            if is_batched(scorer):
                scores = [s.z for s in scorer.score_batch(row)]
            else:
                scores = [scorer.score(x).z for x in row]
            res = engine.step(scores[0] if isinstance(config, CusumMeanConfig) else scores)
            if res.signal:
                return done
    return cap


def _sns_chunk(config, model, seeds, cap):
    return [_sns_run_length(config, model, s, cap) for s in seeds]


def _map(fn, jobs, n_jobs: int):
    if n_jobs <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        futures = [ex.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def estimate_arl(config: ChartConfig, model: StreamModel = StreamModel(), replications: int = 10_000,
                 cap: int = 100_000, seed: int = 0, n_jobs: int = 1) -> ArlEstimate:
    """Mean run length to the first signal over independent replications.

    Runs still silent at ``cap`` steps are censored at ``cap``; an estimate
    with 5% or more censored runs has ``valid == False``.
    """
    if replications < 100:
        raise ValueError("estimate_arl needs at least 100 replications")
    if cap < 1:
        raise ValueError("cap must be positive")
    root = np.random.SeedSequence(seed)
    if model.kind == "normal":
        n_blocks = -(-replications // BLOCK)
        seeds = root.spawn(n_blocks)
        sizes = [min(BLOCK, replications - b * BLOCK) for b in range(n_blocks)]
        parts = _map(_normal_block, [(config, model, s, n, cap) for s, n in zip(seeds, sizes)], n_jobs)
        rl = np.concatenate(parts)
    else:
        check_compatible(config, model.variant, config.m)
        seeds = root.spawn(replications)
        groups = [seeds[i:i + 64] for i in range(0, replications, 64)]
        parts = _map(_sns_chunk, [(config, model, g, cap) for g in groups], n_jobs)
        rl = np.array([x for part in parts for x in part], dtype=np.int64)
    return ArlEstimate.from_run_lengths(rl, cap)


DEFAULT_BRACKETS = {
    "cusum-mean": (1.0, 12.0),
    "cusum-var": (-0.5, -3.5),
    "ewma": (0.5, 4.0),
}


@dataclass(frozen=True)
class CalibrationTarget:
    chart_config: ChartConfig
    target_arl0: float
    stream_model: StreamModel = StreamModel()
    tolerance: float = 0.02

    def __post_init__(self):
        if not self.target_arl0 > 1:
            raise ValueError("target ARL0 must exceed 1")


def calibrate_limit(target: CalibrationTarget, seed: int = 0, bracket: tuple[float, float] | None = None,
                    replications: int = 10_000, cap_factor: float = 50.0, n_jobs: int = 1,
                    max_iter: int = 50) -> tuple[float, ArlEstimate]:
    """Search the chart's free limit until the estimated ARL0 is within tolerance of the target.

    Every evaluation reuses the same seed (common random numbers), which
    makes the estimated ARL0 a nondecreasing function of the limit's
    strictness. The search interpolates in log(ARL) and falls back to
    bisection.
    """
    config = target.chart_config
    goal = target.target_arl0
    cap = max(int(cap_factor * goal), 10)
    lo, hi = bracket if bracket is not None else DEFAULT_BRACKETS[config.name]

    def arl(limit: float) -> ArlEstimate:
        return estimate_arl(config.with_limit(limit), target.stream_model, replications, cap, seed, n_jobs)

    def close(est: ArlEstimate) -> bool:
        return abs(est.mean_rl - goal) / goal <= target.tolerance

    e_lo, e_hi = arl(lo), arl(hi)
    if (e_lo.mean_rl - goal) * (e_hi.mean_rl - goal) > 0:
        raise CalibrationError(
            f"bracket [{lo}, {hi}] for {config.limit_name} does not straddle target ARL0 {goal}: "
            f"ARL({lo}) = {e_lo.mean_rl:.1f} (censored {e_lo.censored_fraction:.1%}), "
            f"ARL({hi}) = {e_hi.mean_rl:.1f} (censored {e_hi.censored_fraction:.1%})")
    for limit, est in ((lo, e_lo), (hi, e_hi)):
        if close(est):
            return limit, est
    for it in range(max_iter):
        width = hi - lo
        frac = (math.log(goal) - math.log(e_lo.mean_rl)) / (math.log(e_hi.mean_rl) - math.log(e_lo.mean_rl))
        if it % 3 == 2 or not math.isfinite(frac):
            frac = 0.5
        mid = lo + width * min(max(frac, 0.1), 0.9)
        e_mid = arl(mid)
        if close(e_mid):
            return mid, e_mid
        if (e_mid.mean_rl - goal) * (e_lo.mean_rl - goal) > 0:
            lo, e_lo = mid, e_mid
        else:
            hi, e_hi = mid, e_mid
    raise CalibrationError(f"no {config.limit_name} within {target.tolerance:.0%} of ARL0 {goal} "
                           f"after {max_iter} iterations; last bracket [{lo}, {hi}]")


@dataclass(frozen=True)
class SnsComparison:
    normal: ArlEstimate
    sns: ArlEstimate

    @property
    def ratio(self) -> float:
        """SNS ARL0 over exact-normal ARL0."""
        return self.sns.mean_rl / self.normal.mean_rl


def compare_sns_vs_normal(config: ChartConfig, distribution: str = "normal", replications: int = 1000,
                          seed: int = 0, variant: str = "individual", cap: int = 100_000,
                          n_jobs: int = 1, **model_options) -> SnsComparison:
    """Run one chart on exact N(0, 1) inputs and on SNS of ``distribution`` draws."""
    normal = estimate_arl(config, StreamModel("normal"), replications, cap, seed, n_jobs)
    sns_model = StreamModel("sns", distribution, variant, **model_options)
    sns = estimate_arl(config, sns_model, replications, cap, seed, n_jobs)
    return SnsComparison(normal, sns)
