"""Contiguous binning of configuration spaces and most-probable-bin results.

Bins partition the code-ordered space into d contiguous index ranges whose
widths differ by at most one: with q = size mod d, the first q bins get
floor(size / d) + 1 entries and the rest floor(size / d).
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .distribution import BSDistribution


@dataclass(frozen=True)
class BinPartition:
    num_bins: int
    space_size: int
    widths: tuple[int, ...]
    offsets: tuple[int, ...]  # length num_bins + 1; offsets[0] = 0, offsets[-1] = space_size


def make_partition(space_size: int, num_bins: int) -> BinPartition:
    if not isinstance(space_size, (int, np.integer)) or not isinstance(num_bins, (int, np.integer)):
        raise ValueError("space_size and num_bins must be integers")
    if num_bins < 2:
        raise ValueError(f"need at least 2 bins, got {num_bins}")
    if num_bins > space_size:
        raise ValueError(f"cannot split {space_size} outcomes into {num_bins} nonempty bins")
    base, extra = divmod(int(space_size), int(num_bins))
    widths = tuple(base + 1 if j < extra else base for j in range(num_bins))
    offsets = [0]
    for w in widths:
        offsets.append(offsets[-1] + w)
    return BinPartition(
        num_bins=int(num_bins),
        space_size=int(space_size),
        widths=widths,
        offsets=tuple(offsets),
    )


def bin_of(partition: BinPartition, index: int) -> int:
    """Bin label of a space index."""
    if not 0 <= index < partition.space_size:
        raise IndexError(f"index {index} out of range for size {partition.space_size}")
    return bisect_right(partition.offsets, index) - 1


@dataclass(eq=False)
class BinnedDistribution:
    """Per-bin probabilities plus where they came from."""

    partition: BinPartition
    probabilities: np.ndarray
    seed: tuple[int, ...] | None = None
    unitary_tag: str | None = None
    statistics: str | None = None


def bin_probabilities(dist: BSDistribution, partition: BinPartition) -> BinnedDistribution:
    if partition.space_size != dist.space.size:
        raise ValueError(
            f"partition covers {partition.space_size} outcomes, space has {dist.space.size}"
        )
    starts = np.asarray(partition.offsets[:-1], dtype=np.intp)
    probs = np.add.reduceat(dist.probabilities, starts)
    return BinnedDistribution(
        partition=partition,
        probabilities=probs,
        seed=dist.seed,
        unitary_tag=dist.unitary_tag,
        statistics=dist.statistics.value,
    )


@dataclass(frozen=True)
class MPBResult:
    """Most probable bin: label, its mass, the runner-up mass and their gap."""

    label: int
    p0: float
    p1: float
    gap: float
    tie_flag: bool


def mpb_from_vector(probabilities: np.ndarray, tie_epsilon: float = 0.0) -> MPBResult:
    """MPB of a raw per-bin vector (exact masses or empirical frequencies).

    Ties resolve to the smallest label; tie_flag is set when the winner
    leads the runner-up by at most tie_epsilon.
    """
    if tie_epsilon < 0:
        raise ValueError("tie_epsilon must be nonnegative")
    v = np.asarray(probabilities, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError("need a 1-d vector with at least 2 bins")
    label = int(np.argmax(v))
    p0 = float(v[label])
    p1 = float(np.partition(v, -2)[-2])
    gap = p0 - p1
    return MPBResult(label=label, p0=p0, p1=p1, gap=gap, tie_flag=gap <= tie_epsilon)


def most_probable_bin(binned: BinnedDistribution, tie_epsilon: float = 0.0) -> MPBResult:
    return mpb_from_vector(binned.probabilities, tie_epsilon=tie_epsilon)


def top_gap(binned: BinnedDistribution) -> float:
    """Margin p0 - p1 between the two heaviest bins."""
    return most_probable_bin(binned).gap
