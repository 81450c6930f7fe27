"""Enumeration of photon-number configurations over a fixed set of modes.

A configuration is a tuple ``(t_1, ..., t_M)`` of per-mode occupation
numbers with ``sum(t) == N``. The canonical order of the space is ascending
in the base-N positional code ``sum_j t_{j+1} * N**j``, which is injective
for N >= 2. Spaces with a single photon fall back to radix 2 internally so
the order stays total (it is then just ascending photon mode index).
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement
from typing import Iterator, Sequence

import numpy as np

DEFAULT_ENUMERATION_LIMIT = 2_000_000


class CapacityError(RuntimeError):
    """An operation would exceed the configured enumeration or size limit."""


def _validate_dims(modes: int, photons: int) -> None:
    if not isinstance(modes, (int, np.integer)) or not isinstance(photons, (int, np.integer)):
        raise ValueError("modes and photons must be integers")
    if modes < 1:
        raise ValueError(f"modes must be >= 1, got {modes}")
    if photons < 1:
        raise ValueError(f"photons must be >= 1, got {photons}")


def space_size(modes: int, photons: int) -> int:
    """Number of configurations of `photons` photons in `modes` modes."""
    _validate_dims(modes, photons)
    return math.comb(modes + photons - 1, photons)


def collision_free_count(modes: int, photons: int) -> int:
    """Number of configurations with every occupation 0 or 1."""
    _validate_dims(modes, photons)
    return math.comb(modes, photons)


def validate_configuration(configuration: Sequence[int], modes: int, photons: int) -> tuple[int, ...]:
    """Check mode count, nonnegativity and photon total; return as a tuple."""
    t = tuple(int(v) for v in configuration)
    if len(t) != modes:
        raise ValueError(f"configuration has {len(t)} modes, expected {modes}")
    if any(v < 0 for v in t):
        raise ValueError(f"occupations must be nonnegative, got {t}")
    if sum(t) != photons:
        raise ValueError(f"configuration sums to {sum(t)}, expected {photons}")
    return t


def is_collision_free(configuration: Sequence[int]) -> bool:
    return all(v <= 1 for v in configuration)


def integer_code(configuration: Sequence[int], photons: int | None = None) -> int:
    """Base-N positional code of a configuration, N being the photon total.

    The code is ``sum_j t[j] * N**j`` evaluated with exact integers. It is
    injective on the configuration space only when N >= 2, so smaller photon
    totals are rejected.
    """
    t = [int(v) for v in configuration]
    if any(v < 0 for v in t):
        raise ValueError("occupations must be nonnegative")
    total = sum(t)
    if photons is not None and total != photons:
        raise ValueError(f"configuration sums to {total}, expected {photons}")
    if total < 2:
        raise ValueError("integer codes need at least 2 photons to be injective")
    code = 0
    power = 1
    for v in t:
        code += v * power
        power *= total
    return code


def format_configuration(configuration: Sequence[int]) -> str:
    return ",".join(str(int(v)) for v in configuration)


def parse_configuration(text: str) -> tuple[int, ...]:
    """Parse a comma-separated occupation list like ``"1,0,2"``."""
    parts = [p.strip() for p in text.split(",")]
    try:
        t = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ValueError(f"malformed configuration {text!r}") from exc
    if any(v < 0 for v in t):
        raise ValueError(f"occupations must be nonnegative, got {text!r}")
    return t


class FockSpace:
    """All configurations of a (modes, photons) pair in canonical code order.

    Attributes:
        modes: mode count M.
        photons: photon count N.
        size: number of configurations.
        codes: ascending list of integer codes (exact Python ints).
        occupations: uint8 array of shape (size, modes); row i is
            configuration i.
    """

    def __init__(self, modes: int, photons: int, limit: int = DEFAULT_ENUMERATION_LIMIT):
        _validate_dims(modes, photons)
        size = space_size(modes, photons)
        if size > limit:
            raise CapacityError(
                f"space of ({modes} modes, {photons} photons) has {size} "
                f"configurations, exceeding the limit of {limit}"
            )
        self.modes = int(modes)
        self.photons = int(photons)
        self.size = size
        radix = max(self.photons, 2)
        powers = [radix**j for j in range(self.modes)]
        combos = list(combinations_with_replacement(range(self.modes), self.photons))
        codes = [sum(powers[m] for m in combo) for combo in combos]
        order = sorted(range(size), key=codes.__getitem__)
        self.codes = [codes[i] for i in order]
        # strict monotonicity doubles as an injectivity check of the code
        for a, b in zip(self.codes, self.codes[1:]):
            if a >= b:
                raise RuntimeError("integer codes are not strictly increasing")
        occ = np.zeros((size, self.modes), dtype=np.uint8)
        combo_arr = np.asarray([combos[i] for i in order], dtype=np.int64)
        np.add.at(occ, (np.arange(size)[:, None], combo_arr), 1)
        self.occupations = occ
        # row i lists the i-th configuration's photon mode indices, ascending
        self.mode_combos = combo_arr

    def __repr__(self) -> str:
        return f"FockSpace(modes={self.modes}, photons={self.photons}, size={self.size})"

    def __len__(self) -> int:
        return self.size

    def configuration(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for size {self.size}")
        return tuple(int(v) for v in self.occupations[index])

    @cached_property
    def configurations(self) -> list[tuple[int, ...]]:
        """All configurations as tuples; materialized on first access."""
        return [tuple(int(v) for v in row) for row in self.occupations]

    def iter_configurations(self) -> Iterator[tuple[int, ...]]:
        for row in self.occupations:
            yield tuple(int(v) for v in row)

    def index_of_code(self, code: int) -> int:
        pos = bisect_left(self.codes, code)
        if pos == self.size or self.codes[pos] != code:
            raise KeyError(f"code {code} not in space")
        return pos

    def index_of(self, configuration: Sequence[int]) -> int:
        t = validate_configuration(configuration, self.modes, self.photons)
        radix = max(self.photons, 2)
        code = 0
        power = 1
        for v in t:
            code += v * power
            power *= radix
        return self.index_of_code(code)

    @cached_property
    def collision_free_indices(self) -> np.ndarray:
        return np.nonzero((self.occupations <= 1).all(axis=1))[0]

    @cached_property
    def collision_free_positions(self) -> np.ndarray:
        """Occupied-mode indices per collision-free configuration, shape (n_cf, N)."""
        rows = self.occupations[self.collision_free_indices]
        _, cols = np.nonzero(rows)
        return cols.reshape(len(self.collision_free_indices), self.photons)

    # kernel support caches; contents are derived, never mutated
    @cached_property
    def occupancy_float(self) -> np.ndarray:
        return self.occupations.astype(np.float64)

    @cached_property
    def occupancy_complex(self) -> np.ndarray:
        return self.occupations.astype(np.complex128)

    @cached_property
    def factorial_products(self) -> np.ndarray:
        """prod_j t_j! per configuration, as float64."""
        table = np.array([math.factorial(k) for k in range(self.photons + 1)], dtype=np.float64)
        return table[self.occupations].prod(axis=1)


def enumerate_configurations(
    modes: int, photons: int, limit: int = DEFAULT_ENUMERATION_LIMIT
) -> FockSpace:
    """Enumerate the configuration space, refusing sizes above `limit`."""
    return FockSpace(modes, photons, limit=limit)


@dataclass(frozen=True)
class SeedDraw:
    """A uniformly drawn input configuration plus where it came from."""

    configuration: tuple[int, ...]
    index: int
    provenance: str


def random_seed(
    space: FockSpace, rng: np.random.Generator, collision_free_only: bool = False
) -> SeedDraw:
    """Draw a configuration uniformly from the space (or its collision-free part)."""
    if collision_free_only:
        pool = space.collision_free_indices
        if len(pool) == 0:
            raise ValueError(
                f"no collision-free configurations with {space.modes} modes "
                f"and {space.photons} photons"
            )
        index = int(pool[int(rng.integers(len(pool)))])
    else:
        index = int(rng.integers(space.size))
    return SeedDraw(
        configuration=space.configuration(index),
        index=index,
        provenance=type(rng.bit_generator).__name__.lower(),
    )
