"""Elitist single-individual search with exact-cardinality bit-flip mutation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    BitString,
    InitDistribution,
    RngStream,
    flip_bits,
    sample_bitstring,
    sample_uniform_subset,
)
from .fitness import FitnessFunction, MajorityFitness

DEFAULT_CAP = 10**9
_BATCH = 4096


@dataclass(frozen=True)
class RlsMutation:
    """Flip a uniformly chosen set of exactly ``ell`` distinct positions."""

    ell: int

    def __post_init__(self) -> None:
        if self.ell < 1:
            raise ValueError(f"ell must be at least 1, got {self.ell}")


def mutate(x: BitString, op: RlsMutation, rng: np.random.Generator) -> BitString:
    """One mutation: the result differs from ``x`` in exactly ``op.ell`` positions."""
    if op.ell > x.n:
        raise ValueError(f"ell={op.ell} exceeds the bitstring length {x.n}")
    return flip_bits(x, sample_uniform_subset(x.n, op.ell, rng))


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; equal configs replay bit-identically."""

    fitness: FitnessFunction
    mutation: RlsMutation
    init: InitDistribution
    master_seed: int
    run_index: int = 0
    max_iters: int = DEFAULT_CAP
    record_trajectory: bool = False
    record_restart_stats: bool = False

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.mutation.ell > self.fitness.n:
            raise ValueError(
                f"ell={self.mutation.ell} exceeds the fitness arity {self.fitness.n}"
            )
        if self.record_restart_stats and not isinstance(self.fitness, MajorityFitness):
            raise ValueError(
                "restart statistics are defined for the one-sided majority objective"
            )


@dataclass(frozen=True)
class RestartStats:
    """Interleaved crossing/return bookkeeping of one run on the one-sided objective.

    ``plateau_hits`` records, per phase, the first time the incumbent is a
    two-sided-plateau optimum; ``half_returns`` records, per failed phase,
    the first later time with at least n/2 ones.  ``retries`` counts the
    plateau hits that preceded the actual majority hit; on a censored run
    the counts are lower bounds and ``partial`` is set.
    """

    plateau_hits: tuple[int, ...]
    half_returns: tuple[int, ...]
    retries: int
    retried: bool
    first_hit_majority: bool
    partial: bool


@dataclass(frozen=True, eq=False)
class RunResult:
    """Outcome of one run: hitting time (or censoring) plus instrumentation."""

    runtime: Optional[int]
    init_ones: int
    trajectory: Optional[np.ndarray] = None
    restart: Optional[RestartStats] = None

    @property
    def censored(self) -> bool:
        return self.runtime is None


def run(cfg: RunConfig) -> RunResult:
    """Execute one seeded run of the elitist loop.

    Proposals at least as fit as the incumbent are accepted; the runtime
    is the first iteration whose incumbent attains the fitness maximum
    (0 when the initial individual is already optimal), or None once
    ``max_iters`` proposals were exhausted.
    """
    fit = cfg.fitness
    n = fit.n
    rng = RngStream(cfg.master_seed, cfg.run_index).generator()
    x0 = sample_bitstring(n, cfg.init, rng)
    words = x0.words_list()
    ones = x0.ones
    init_ones = ones
    record = cfg.record_trajectory or cfg.record_restart_stats
    traj: Optional[list[int]] = [ones] if record else None
    fx = fit.value_packed(words, ones)
    if fx == fit.max_value:
        runtime: Optional[int] = 0
    elif cfg.mutation.ell == 1:
        runtime = _run_single_flip(fit, words, ones, fx, rng, cfg.max_iters, traj)
    else:
        runtime = _run_subset_flip(
            fit, cfg.mutation.ell, words, ones, fx, rng, cfg.max_iters, traj
        )
    traj_arr = np.asarray(traj, dtype=np.int64) if traj is not None else None
    restart = None
    if cfg.record_restart_stats:
        assert traj_arr is not None
        restart = extract_restart_stats(traj_arr, n, fit.r)
    return RunResult(
        runtime=runtime,
        init_ones=init_ones,
        trajectory=traj_arr if cfg.record_trajectory else None,
        restart=restart,
    )


def _run_single_flip(fit, words, ones, fx, rng, cap, traj):
    n = fit.n
    fmax = fit.max_value
    append = traj.append if traj is not None else None
    t = 0
    if fit.level_symmetric:
        level = fit.level_value
        while t < cap:
            for i in rng.integers(0, n, size=min(_BATCH, cap - t)).tolist():
                t += 1
                w = i >> 6
                mask = 1 << (i & 63)
                cand = ones - 1 if words[w] & mask else ones + 1
                fy = level(cand)
                if fy >= fx:
                    words[w] ^= mask
                    ones = cand
                    fx = fy
                if append is not None:
                    append(ones)
                if fx == fmax:
                    return t
        return None
    packed = fit.value_packed
    while t < cap:
        for i in rng.integers(0, n, size=min(_BATCH, cap - t)).tolist():
            t += 1
            w = i >> 6
            mask = 1 << (i & 63)
            cand = ones - 1 if words[w] & mask else ones + 1
            words[w] ^= mask
            fy = packed(words, cand)
            if fy >= fx:
                ones = cand
                fx = fy
            else:
                words[w] ^= mask
            if append is not None:
                append(ones)
            if fx == fmax:
                return t
    return None


def _run_subset_flip(fit, ell, words, ones, fx, rng, cap, traj):
    n = fit.n
    fmax = fit.max_value
    level_symmetric = fit.level_symmetric
    level = fit.level_value if level_symmetric else None
    packed = fit.value_packed
    append = traj.append if traj is not None else None
    for t in range(1, cap + 1):
        idx = sample_uniform_subset(n, ell, rng).tolist()
        if level_symmetric:
            hit = 0
            for i in idx:
                if words[i >> 6] & (1 << (i & 63)):
                    hit += 1
            cand = ones + ell - 2 * hit
            fy = level(cand)
            if fy >= fx:
                for i in idx:
                    words[i >> 6] ^= 1 << (i & 63)
                ones = cand
                fx = fy
        else:
            hit = 0
            for i in idx:
                w = i >> 6
                mask = 1 << (i & 63)
                if words[w] & mask:
                    hit += 1
                words[w] ^= mask
            cand = ones + ell - 2 * hit
            fy = packed(words, cand)
            if fy >= fx:
                ones = cand
                fx = fy
            else:
                for i in idx:
                    words[i >> 6] ^= 1 << (i & 63)
        if append is not None:
            append(ones)
        if fx == fmax:
            return t
    return None


def extract_restart_stats(
    trajectory: Sequence[int], n: int, r: int
) -> RestartStats:
    """Recover the crossing/return stopping times from a ones-count trajectory.

    ``trajectory[t]`` is the incumbent's ones count at iteration t; the
    final entry of an uncensored run on the one-sided objective is the
    first with at least n/2 + r ones.  Phases alternate between the next
    time the incumbent is a two-sided-plateau optimum and, after a hit on
    the zeros side, the next time it regains at least n/2 ones.
    """
    if n <= 0 or n % 2 or not 1 <= r <= n // 2:
        raise ValueError(f"invalid parameters n={n}, r={r}")
    arr = np.asarray(trajectory, dtype=np.int64)
    if arr.ndim != 1 or len(arr) == 0:
        raise ValueError("trajectory must be a non-empty sequence of ones counts")
    half, top = n // 2, n // 2 + r
    plateau_idx = np.flatnonzero((arr >= top) | ((n - arr) >= top))
    half_idx = np.flatnonzero(arr >= half)
    hits: list[int] = []
    returns: list[int] = []
    success = False
    pos = 0
    while True:
        k = int(np.searchsorted(plateau_idx, pos))
        if k == len(plateau_idx):
            break
        t = int(plateau_idx[k])
        hits.append(t)
        if arr[t] >= top:
            success = True
            break
        k2 = int(np.searchsorted(half_idx, t))
        if k2 == len(half_idx):
            break
        back = int(half_idx[k2])
        returns.append(back)
        if arr[back] >= top:
            success = True
            break
        pos = back + 1
    retries = len(hits) - 1 if success else len(hits)
    return RestartStats(
        plateau_hits=tuple(hits),
        half_returns=tuple(returns),
        retries=retries,
        retried=retries >= 1,
        first_hit_majority=bool(hits) and int(arr[hits[0]]) >= top,
        partial=not success,
    )
