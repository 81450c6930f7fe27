"""Finite-run estimation: outcome draws, empirical bins, Chernoff planning."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .binning import BinPartition, MPBResult, mpb_from_vector
from .distribution import BSDistribution

ALIAS_METHOD_THRESHOLD = 1 << 16


@dataclass(frozen=True)
class SamplePlan:
    """Sample-size plan for resolving the most probable bin.

    epsilon is the target accuracy on bin masses, delta the systematic-error
    allowance, eta the admissible failure probability and gamma its
    systematic counterpart. n_min draws suffice to separate bins whose
    masses differ by more than epsilon with confidence 1 - eta.
    """

    num_bins: int
    epsilon: float
    delta: float
    eta: float
    gamma: float
    n_min: int


def chernoff_sample_size(
    num_bins: int, epsilon: float, delta: float, eta: float, gamma: float
) -> SamplePlan:
    """n_min = ceil(3 d / (epsilon - delta)^2 * ln(2 (1 - gamma) / (eta - gamma))).

    Depends only on the bin count and the error budget, never on the mode or
    photon numbers.
    """
    if not isinstance(num_bins, (int, np.integer)) or num_bins < 2:
        raise ValueError(f"need an integer bin count >= 2, got {num_bins}")
    if not 0 <= delta < epsilon < 1:
        raise ValueError(f"need 0 <= delta < epsilon < 1, got delta={delta}, epsilon={epsilon}")
    if not 0 <= gamma < eta < 1:
        raise ValueError(f"need 0 <= gamma < eta < 1, got gamma={gamma}, eta={eta}")
    n = 3.0 * num_bins / (epsilon - delta) ** 2 * math.log(2.0 * (1.0 - gamma) / (eta - gamma))
    return SamplePlan(
        num_bins=int(num_bins),
        epsilon=float(epsilon),
        delta=float(delta),
        eta=float(eta),
        gamma=float(gamma),
        n_min=int(math.ceil(n)),
    )


def _draw_cumulative(probs: np.ndarray, runs: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs)
    u = rng.random(runs)
    idx = np.searchsorted(cdf, u, side="right")
    np.clip(idx, 0, len(probs) - 1, out=idx)
    return np.bincount(idx, minlength=len(probs)).astype(np.int64)


def _alias_tables(probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Vose's method; index stacks are processed back to front, fixed order
    n = len(probs)
    prob = np.ones(n, dtype=np.float64)
    alias = np.arange(n, dtype=np.int64)
    scaled = probs * n
    small = [i for i in range(n) if scaled[i] < 1.0]
    large = [i for i in range(n) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        l = large.pop()
        prob[s] = scaled[s]
        alias[s] = l
        scaled[l] -= 1.0 - scaled[s]
        if scaled[l] < 1.0:
            small.append(l)
        else:
            large.append(l)
    return prob, alias


def _draw_alias(probs: np.ndarray, runs: int, rng: np.random.Generator) -> np.ndarray:
    prob, alias = _alias_tables(probs)
    n = len(probs)
    k = rng.integers(0, n, size=runs)
    u = rng.random(runs)
    out = np.where(u < prob[k], k, alias[k])
    return np.bincount(out, minlength=n).astype(np.int64)


def draw_outcomes(
    dist: BSDistribution, runs: int, rng: np.random.Generator, method: str = "auto"
) -> np.ndarray:
    """Multinomially sample `runs` outcomes; returns per-outcome counts.

    method "auto" switches from inverse-CDF to alias sampling above
    ALIAS_METHOD_THRESHOLD outcomes, where the table setup cost amortizes.
    The method affects how generator output is consumed, so it is part of a
    run's provenance.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    if method not in ("auto", "cumulative", "alias"):
        raise ValueError(f"unknown sampling method {method!r}")
    if method == "auto":
        method = "alias" if dist.space.size > ALIAS_METHOD_THRESHOLD else "cumulative"
    if method == "cumulative":
        return _draw_cumulative(dist.probabilities, int(runs), rng)
    return _draw_alias(dist.probabilities, int(runs), rng)


@dataclass(eq=False)
class EmpiricalBinned:
    """Per-bin counts from a finite number of runs."""

    partition: BinPartition
    counts: np.ndarray
    runs: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.runs


def empirical_binned(outcome_counts: np.ndarray, partition: BinPartition) -> EmpiricalBinned:
    counts = np.asarray(outcome_counts)
    if counts.shape != (partition.space_size,):
        raise ValueError(
            f"expected counts for {partition.space_size} outcomes, got shape {counts.shape}"
        )
    starts = np.asarray(partition.offsets[:-1], dtype=np.intp)
    binned = np.add.reduceat(counts.astype(np.int64), starts)
    return EmpiricalBinned(partition=partition, counts=binned, runs=int(counts.sum()))


def estimate_mpb(
    dist: BSDistribution,
    partition: BinPartition,
    plan: SamplePlan,
    rng: np.random.Generator,
    method: str = "auto",
) -> tuple[MPBResult, EmpiricalBinned]:
    """Estimate the most probable bin from plan.n_min sampled runs.

    The tie threshold on empirical frequencies is epsilon - delta: anything
    closer than the resolvable accuracy is flagged as a tie.
    """
    if partition.num_bins != plan.num_bins:
        raise ValueError(
            f"plan covers {plan.num_bins} bins but partition has {partition.num_bins}"
        )
    counts = draw_outcomes(dist, plan.n_min, rng, method=method)
    emp = empirical_binned(counts, partition)
    result = mpb_from_vector(emp.frequencies, tie_epsilon=plan.epsilon - plan.delta)
    return result, emp


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {q.shape}")
    return 0.5 * float(np.abs(p - q).sum())
