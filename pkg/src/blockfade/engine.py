"""Outer Monte Carlo: h(Y) = -E[log2 p(Y)] with a confidence-targeted
stopping rule, combined with the closed-form h(Y|X) into the per-symbol
mutual information.

Reproducibility model: worker w draws from the substream
SeedSequence(seed, spawn_key=(w,)).  Workers advance in lockstep rounds and
their running moments are merged in worker order with the exact pairwise
formula, so results are bit-identical for a given (seed, workers) regardless
of thread scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import _kernels as kernels
from .closedform import cond_entropy
from .density import DensityEvaluator, QuadratureSettings, build_grid
from .errors import NumericalHealthError
from .model import ChannelConfig, sample_gram_spectra

LOG2E = math.log2(math.e)

_FAILURE_RATE_LIMIT = 1e-3
_FAILURE_RATE_FLOOR = 10_000  # attempts assumed when judging early failures


@dataclass(frozen=True)
class StoppingRule:
    """Stop when the two-sided CI halfwidth of the per-symbol estimate drops
    below `halfwidth` bits/s/Hz at the given confidence."""

    confidence: float = 0.90
    halfwidth: float = 0.005
    min_samples: int = 1_000
    max_samples: int = 100_000_000

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError(f"confidence must lie in (0,1), got {self.confidence}")
        if not self.halfwidth > 0:
            raise ValueError(f"halfwidth must be positive, got {self.halfwidth}")
        if not 2 <= self.min_samples <= self.max_samples:
            raise ValueError(
                f"need 2 <= min_samples <= max_samples, got "
                f"{self.min_samples}, {self.max_samples}")

    @property
    def z_value(self) -> float:
        return NormalDist().inv_cdf(0.5 * (1.0 + self.confidence))


class RunningMoments:
    """One-pass count/mean/M2 accumulator with exact pairwise merging."""

    __slots__ = ("count", "mean", "m2")

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def push(self, value: float) -> None:
        if not math.isfinite(value):
            raise NumericalHealthError(f"non-finite sample {value!r}")
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def push_many(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return
        if not np.all(np.isfinite(values)):
            raise NumericalHealthError("non-finite sample in batch")
        other = RunningMoments()
        other.count = int(values.size)
        other.mean = float(values.mean())
        other.m2 = float(((values - other.mean) ** 2).sum())
        self.merge(other)

    def merge(self, other: "RunningMoments") -> None:
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean, other.m2
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / n
        self.m2 += other.m2 + delta * delta * self.count * other.count / n
        self.count = n

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count)


@dataclass(frozen=True)
class EntropyEstimate:
    """Monte-Carlo estimate of h(Y), total bits per fading block."""

    bits: float
    stderr_bits: float
    n_samples: int
    degenerate_resamples: int
    capped: bool


@dataclass(frozen=True)
class MIEstimate:
    """Per-symbol mutual information with its Monte-Carlo provenance."""

    mi_bits: float
    out_entropy_bits: float
    cond_entropy_bits: float
    stderr_bits: float
    n_samples: int
    confidence: float
    halfwidth_target: float
    degenerate_resamples: int = 0
    capped: bool = False


class _Worker:
    """Per-thread sampling state: substream RNG plus local accumulator."""

    def __init__(self, config, evaluator, seed_seq):
        self.config = config
        self.evaluator = evaluator
        self.rng = np.random.default_rng(seed_seq)
        self.moments = RunningMoments()
        self.degenerate = 0
        self.failures = 0
        self.attempts = 0

    def run_round(self, count: int) -> None:
        need = count
        while need > 0:
            d = sample_gram_spectra(self.config, self.rng, need)
            neg_lnp, status = self.evaluator.neg_log_density_batch(d)
            ok = status == kernels.STATUS_OK
            self.attempts += need
            self.degenerate += int((status == kernels.STATUS_DEGENERATE).sum())
            self.failures += int(
                ((status != kernels.STATUS_OK)
                 & (status != kernels.STATUS_DEGENERATE)).sum())
            if self.failures > _FAILURE_RATE_LIMIT * max(self.attempts,
                                                         _FAILURE_RATE_FLOOR):
                raise NumericalHealthError(
                    f"{self.failures} numerical failures in {self.attempts} "
                    f"samples (limit {_FAILURE_RATE_LIMIT:.1%})")
            self.moments.push_many(neg_lnp[ok])
            need -= int(ok.sum())


def _resolve_seed(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def estimate_output_entropy(evaluator: DensityEvaluator,
                            rule: StoppingRule | None = None,
                            seed=0, workers: int = 1,
                            batch: int = 1024) -> EntropyEstimate:
    """Estimate h(Y) by averaging -ln p(Y) over sampled blocks.

    Deterministic given (seed, workers).  Degenerate spectra are redrawn and
    counted; other per-sample numerical failures abort the run once their
    rate exceeds 0.1%.
    """
    if rule is None:
        rule = StoppingRule()
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    config = evaluator.config
    root = _resolve_seed(seed)
    states = [_Worker(config, evaluator,
                      np.random.SeedSequence(entropy=root.entropy,
                                             spawn_key=root.spawn_key + (w,)))
              for w in range(workers)]
    z = rule.z_value
    n_b = config.n_b
    # stop when z * stderr(mean of -ln p) * log2(e) / n_b <= halfwidth
    target_stderr_nats = rule.halfwidth * n_b / (z * LOG2E)
    # keep per-round scratch arrays (h, x, noise, y) to ~100 MB per worker
    round_cap = max(1024, 2_000_000 // (config.n_t * n_b))

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        total = RunningMoments()
        capped = False
        while True:
            done = total.count
            if done >= rule.min_samples:
                if total.stderr <= target_stderr_nats:
                    break
                if done >= rule.max_samples:
                    capped = True
                    break
                # size the next round from the current variance estimate
                predicted = (math.ceil(total.variance / target_stderr_nats ** 2)
                             - done)
                per_worker = max(batch, -(-predicted // workers))
            else:
                per_worker = max(batch, -(-(rule.min_samples - done) // workers))
            per_worker = min(per_worker, round_cap,
                             max(1, -(-(rule.max_samples - done) // workers)))
            if pool is None:
                states[0].run_round(per_worker)
            else:
                list(pool.map(lambda s: s.run_round(per_worker), states))
            total = RunningMoments()
            failures = 0
            attempts = 0
            for s in states:
                total.merge(s.moments)
                failures += s.failures
                attempts += s.attempts
            if failures > _FAILURE_RATE_LIMIT * max(attempts, _FAILURE_RATE_FLOOR):
                raise NumericalHealthError(
                    f"{failures} numerical failures in {attempts} samples "
                    f"(limit {_FAILURE_RATE_LIMIT:.1%})")
    finally:
        if pool is not None:
            pool.shutdown()

    degenerate = sum(s.degenerate for s in states)
    return EntropyEstimate(bits=total.mean * LOG2E,
                           stderr_bits=total.stderr * LOG2E,
                           n_samples=total.count,
                           degenerate_resamples=degenerate,
                           capped=capped)


def mutual_information(config: ChannelConfig,
                       rule: StoppingRule | None = None,
                       seed=0, workers: int = 1,
                       quad: QuadratureSettings | None = None,
                       grid_accel: bool = False,
                       grid_points: int = 4096) -> MIEstimate:
    """Per-symbol mutual information of IID Gaussian inputs, bits/s/Hz.

    Combines the Monte-Carlo output entropy with the closed-form conditional
    entropy.  `grid_accel` enables the interpolation table for the density
    (identical results to 1e-6 in ln p; large speedup for big batches).
    """
    if rule is None:
        rule = StoppingRule()
    h_cond = cond_entropy(config)  # also rejects n_b < n_t up front
    evaluator = DensityEvaluator(config, quad)
    if grid_accel:
        evaluator = build_grid(evaluator, points=grid_points)
    h_out = estimate_output_entropy(evaluator, rule, seed, workers)
    return MIEstimate(
        mi_bits=(h_out.bits - h_cond) / config.n_b,
        out_entropy_bits=h_out.bits,
        cond_entropy_bits=h_cond,
        stderr_bits=h_out.stderr_bits / config.n_b,
        n_samples=h_out.n_samples,
        confidence=rule.confidence,
        halfwidth_target=rule.halfwidth,
        degenerate_resamples=h_out.degenerate_resamples,
        capped=h_out.capped,
    )
