"""Batch-means estimates shared by the Monte Carlo samplers.

Standard errors come from non-overlapping batch means with at least 32
batches; the integrated autocorrelation time is inferred from the ratio of
the batch-mean variance to the raw sample variance (so an i.i.d. sequence
reports tau ~ 1/2 in the `1/2 + sum of autocorrelations` convention).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MIN_BATCHES = 32


@dataclass(frozen=True)
class ChainStats:
    """Estimates for a set of named observables from one (or merged) chains."""

    names: tuple[str, ...]
    mean: tuple[float, ...]
    stderr: tuple[float, ...]
    tau_int: tuple[float, ...]
    n_samples: int
    sweeps: int
    burn_in: int
    seed: int | tuple[int, ...]
    acceptance_rate: float | None = None
    step_size: float | None = None

    def __getitem__(self, name: str) -> tuple[float, float]:
        """(mean, stderr) of one observable."""
        k = self.names.index(name)
        return self.mean[k], self.stderr[k]

    def csv_header(self) -> str:
        cols = "observable,mean,stderr,tau_int,sweeps,seed"
        if self.acceptance_rate is not None:
            cols += ",acceptance_rate,step_size"
        return cols

    def to_csv(self) -> str:
        seed = self.seed if isinstance(self.seed, int) else ";".join(map(str, self.seed))
        lines = [self.csv_header()]
        for k, name in enumerate(self.names):
            row = (f"{name},{self.mean[k]!r},{self.stderr[k]!r},"
                   f"{self.tau_int[k]!r},{self.sweeps},{seed}")
            if self.acceptance_rate is not None:
                row += f",{self.acceptance_rate!r},{self.step_size!r}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def stats_from_batches(names, batch_sums: np.ndarray, batch_size: int,
                       raw_sum: np.ndarray, raw_sumsq: np.ndarray, *,
                       sweeps: int, burn_in: int, seed,
                       acceptance_rate=None, step_size=None) -> ChainStats:
    """Build :class:`ChainStats` from per-batch sums plus raw moment sums."""
    n_batches = batch_sums.shape[0]
    if n_batches < MIN_BATCHES:
        raise ValueError(f"need at least {MIN_BATCHES} batches")
    n = n_batches * batch_size
    mean = raw_sum / n
    var_raw = np.maximum(raw_sumsq / n - mean**2, 0.0)
    bmeans = batch_sums / batch_size
    var_batch = bmeans.var(axis=0, ddof=1)
    stderr = np.sqrt(var_batch / n_batches)
    tau = np.where(var_raw > 0,
                   0.5 * batch_size * var_batch / np.where(var_raw > 0, var_raw, 1.0),
                   0.5)
    return ChainStats(
        names=tuple(names),
        mean=tuple(float(x) for x in mean),
        stderr=tuple(float(x) for x in stderr),
        tau_int=tuple(float(x) for x in tau),
        n_samples=n,
        sweeps=sweeps,
        burn_in=burn_in,
        seed=seed,
        acceptance_rate=acceptance_rate,
        step_size=step_size,
    )


class BatchAccumulator:
    """Accumulates per-sample observable vectors into batch means."""

    def __init__(self, names, n_samples: int, n_batches: int = MIN_BATCHES):
        if n_batches < MIN_BATCHES:
            raise ValueError(f"need at least {MIN_BATCHES} batches")
        if n_samples < n_batches:
            raise ValueError("fewer samples than batches")
        self.names = tuple(names)
        n_obs = len(self.names)
        self.batch_size = n_samples // n_batches
        self.n_samples = self.batch_size * n_batches   # trailing remainder dropped
        self.n_batches = n_batches
        self.batch_sums = np.zeros((n_batches, n_obs))
        self.raw_sum = np.zeros(n_obs)
        self.raw_sumsq = np.zeros(n_obs)
        self.count = 0

    def add(self, values: np.ndarray):
        """Add one sample vector (ignored once the planned count is reached)."""
        if self.count >= self.n_samples:
            return
        b = self.count // self.batch_size
        self.batch_sums[b] += values
        self.raw_sum += values
        self.raw_sumsq += values * values
        self.count += 1

    def add_block(self, block: np.ndarray):
        for row in block:
            self.add(row)

    def finalize(self, sweeps: int, burn_in: int, seed,
                 acceptance_rate=None, step_size=None) -> ChainStats:
        if self.count < self.n_samples:
            raise ValueError("accumulator not filled")
        return stats_from_batches(self.names, self.batch_sums, self.batch_size,
                                  self.raw_sum, self.raw_sumsq,
                                  sweeps=sweeps, burn_in=burn_in, seed=seed,
                                  acceptance_rate=acceptance_rate,
                                  step_size=step_size)


def merge_stats(parts: list[ChainStats]) -> ChainStats:
    """Pool independent chains over the same observables.

    Means are sample-count weighted; the pooled standard error treats the
    chains as independent; tau is the sample-weighted average.
    """
    if not parts:
        raise ValueError("nothing to merge")
    names = parts[0].names
    for p in parts:
        if p.names != names:
            raise ValueError("observable sets differ between chains")
    w = np.array([p.n_samples for p in parts], dtype=float)
    w /= w.sum()
    means = np.array([p.mean for p in parts])
    errs = np.array([p.stderr for p in parts])
    taus = np.array([p.tau_int for p in parts])
    mean = w @ means
    stderr = np.sqrt(((w[:, None] * errs) ** 2).sum(axis=0))
    tau = w @ taus
    acc = None
    if all(p.acceptance_rate is not None for p in parts):
        acc = float(w @ np.array([p.acceptance_rate for p in parts]))
    steps = [p.step_size for p in parts if p.step_size is not None]
    return ChainStats(
        names=names,
        mean=tuple(float(x) for x in mean),
        stderr=tuple(float(x) for x in stderr),
        tau_int=tuple(float(x) for x in tau),
        n_samples=sum(p.n_samples for p in parts),
        sweeps=sum(p.sweeps for p in parts),
        burn_in=parts[0].burn_in,
        seed=tuple(s for p in parts
                   for s in ((p.seed,) if isinstance(p.seed, int) else tuple(p.seed))),
        acceptance_rate=acc,
        step_size=float(np.mean(steps)) if steps else None,
    )
