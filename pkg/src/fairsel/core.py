"""Shared primitives: errors, validated fractional points, RNG stream derivation.

Everything downstream that draws randomness derives an independent generator
from a master seed plus an integer path (stream tag, index, ...). Identical
paths give identical streams on every platform, which is what makes whole
runs byte-reproducible.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# coordinates this close to an integer bound are treated as exactly 0 or 1
SNAP_EPS = 1e-9


class FeasibilityError(ValueError):
    """The fairness requirements cannot all be met within the budget."""


class SizeLimitError(ValueError):
    """An exhaustive routine was asked to run beyond its size cap."""


class ContractError(ValueError):
    """A caller handed a routine input that violates its stated contract."""


class FractionalPoint:
    """A vector in the unit box [0, 1]^n.

    Coordinates within ``SNAP_EPS`` of 0 or 1 are snapped to the exact bound
    so downstream integrality tests stay stable; anything further outside the
    box is rejected. Instances are immutable.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[float]):
        arr = np.array(coords, dtype=float)
        if arr.ndim != 1:
            raise ContractError(f"expected a 1-d vector, got shape {arr.shape}")
        arr[np.abs(arr) <= SNAP_EPS] = 0.0
        arr[np.abs(arr - 1.0) <= SNAP_EPS] = 1.0
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0 or not np.isfinite(arr).all()):
            bad = int(np.argmax((arr < 0.0) | (arr > 1.0) | ~np.isfinite(arr)))
            raise ContractError(f"coordinate {bad} = {arr[bad]!r} outside [0, 1]")
        arr.flags.writeable = False
        self.coords = arr

    @classmethod
    def coerce(cls, y: "FractionalPoint | Iterable[float]") -> "FractionalPoint":
        return y if isinstance(y, FractionalPoint) else cls(y)

    @classmethod
    def zeros(cls, n: int) -> "FractionalPoint":
        return cls(np.zeros(n))

    @property
    def n(self) -> int:
        return self.coords.size

    def or_basis(self, u: int) -> "FractionalPoint":
        """Coordinate-wise max with the u-th basis vector (force y_u = 1)."""
        out = self.coords.copy()
        out[u] = 1.0
        return FractionalPoint(out)

    def sum(self) -> float:
        return float(self.coords.sum())

    def __getitem__(self, u: int) -> float:
        return float(self.coords[u])

    def __len__(self) -> int:
        return self.coords.size

    def __iter__(self):
        return iter(self.coords.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FractionalPoint):
            return NotImplemented
        return self.coords.shape == other.coords.shape and bool(
            np.array_equal(self.coords, other.coords)
        )

    def __hash__(self):
        return hash(self.coords.tobytes())

    def __repr__(self) -> str:
        return f"FractionalPoint({self.coords.tolist()!r})"


def derive_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Deterministic generator for the stream identified by (seed, *path).

    Distinct paths give statistically independent streams; the derivation is
    stable across platforms and numpy releases, so anything seeded this way
    reproduces exactly.
    """
    entropy = [_entropy_term(master_seed)] + [_entropy_term(p) for p in path]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _entropy_term(value: int) -> int:
    term = int(value)
    if term < 0:
        raise ValueError(f"seed path terms must be non-negative, got {term}")
    return term


def format_float(x: float) -> str:
    """Shortest exact decimal form; used everywhere CSVs must be byte-stable."""
    return repr(float(x))


def ids_from_mask(mask: Sequence[bool]) -> tuple[int, ...]:
    return tuple(int(i) for i in np.nonzero(np.asarray(mask, dtype=bool))[0])
