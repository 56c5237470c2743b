"""Unit vectors, hyperplane arrangements and their generators.

A hyperplane through the origin of R^d is stored by its unit normal; its trace
on the unit sphere is a great circle (great sphere for d > 3).  Normals are
kept exactly as given: ``v`` and ``-v`` describe the same hyperplane and are
not deduplicated, which is harmless because every quantity in this package
depends only on ``|<v, u>|``.

Random arrangements use numpy's PCG64 generator (``np.random.default_rng``)
seeded with the user seed; each normal is a standard Gaussian vector of
length d divided by its norm, drawn row by row in one ``standard_normal((n, d))``
call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from zonecover.errors import (
    DimensionMismatch,
    InvalidCount,
    InvalidDimension,
    ZeroVector,
)

__all__ = [
    "UnitVector",
    "Arrangement",
    "ZoneSet",
    "normalize",
    "hyperplane_distance",
    "circle_distance",
    "apple_peel",
    "random_arrangement",
]

ZERO_NORM = 1e-300


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class UnitVector:
    """A direction on the unit sphere S^{d-1}, d >= 2.

    The coordinates are always divided by their norm on construction, so the
    stored vector is unit to rounding.  Instances are immutable.
    """

    __slots__ = ("_coords",)

    def __init__(self, coords: Iterable[float]):
        v = np.asarray(coords, dtype=float).reshape(-1)
        if v.size < 2:
            raise InvalidDimension(f"unit vectors need d >= 2, got d={v.size}")
        if not np.all(np.isfinite(v)):
            raise ZeroVector("vector has non-finite entries")
        r = float(np.linalg.norm(v))
        if r <= ZERO_NORM:
            raise ZeroVector("cannot normalize a zero vector")
        self._coords = _frozen(v / r)

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    @property
    def dim(self) -> int:
        return self._coords.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._coords
        return self._coords.astype(dtype)

    def __len__(self) -> int:
        return self._coords.size

    def __iter__(self):
        return iter(self._coords.tolist())

    def __neg__(self) -> "UnitVector":
        return UnitVector(-self._coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UnitVector):
            return NotImplemented
        return np.array_equal(self._coords, other._coords)

    def __hash__(self) -> int:
        return hash(self._coords.tobytes())

    def __repr__(self) -> str:
        return f"UnitVector({self._coords.tolist()!r})"


def normalize(v: Sequence[float] | np.ndarray) -> UnitVector:
    """Return ``v / |v|``; raises ZeroVector when ``|v| <= 1e-300``."""
    return UnitVector(v)


def _as_unit(u) -> UnitVector:
    return u if isinstance(u, UnitVector) else UnitVector(u)


def _inner(u, v) -> float:
    u, v = _as_unit(u), _as_unit(v)
    if u.dim != v.dim:
        raise DimensionMismatch(f"dimensions differ: {u.dim} vs {v.dim}")
    return float(np.dot(u.coords, v.coords))


def hyperplane_distance(u, v) -> float:
    """Euclidean distance |<v, u>| from the sphere point u to the hyperplane v^perp."""
    return min(1.0, abs(_inner(u, v)))


def circle_distance(u, v) -> float:
    """Geodesic distance from u to the great circle with normal v, in [0, pi/2]."""
    return math.asin(hyperplane_distance(u, v))


@dataclass(frozen=True)
class Arrangement:
    """n hyperplanes through the origin of R^dim, given by unit normals."""

    dim: int
    normals: tuple[UnitVector, ...]

    def __post_init__(self):
        normals = tuple(_as_unit(v) for v in self.normals)
        object.__setattr__(self, "normals", normals)
        if self.dim < 2:
            raise InvalidDimension(f"dim must be >= 2, got {self.dim}")
        if len(normals) < 1:
            raise InvalidCount("an arrangement needs at least one normal")
        for v in normals:
            if v.dim != self.dim:
                raise DimensionMismatch(f"normal of length {v.dim} in a dim={self.dim} arrangement")

    @classmethod
    def from_array(cls, normals) -> "Arrangement":
        a = np.asarray(normals, dtype=float)
        if a.ndim != 2:
            raise DimensionMismatch("normals must be a 2-D array of shape (n, d)")
        return cls(a.shape[1], tuple(UnitVector(row) for row in a))

    @property
    def n(self) -> int:
        return len(self.normals)

    @cached_property
    def matrix(self) -> np.ndarray:
        """Normals stacked as a read-only (n, d) array."""
        return _frozen(np.stack([v.coords for v in self.normals]))

    def inner_products(self, u) -> np.ndarray:
        u = _as_unit(u)
        if u.dim != self.dim:
            raise DimensionMismatch(f"point has d={u.dim}, arrangement has d={self.dim}")
        return self.matrix @ u.coords

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class ZoneSet:
    """One closed zone per great circle; ``half_widths[i]`` is its angular half-width."""

    arrangement: Arrangement
    half_widths: tuple[float, ...]

    def __post_init__(self):
        hw = tuple(float(h) for h in self.half_widths)
        object.__setattr__(self, "half_widths", hw)
        if len(hw) != self.arrangement.n:
            raise InvalidCount(f"{len(hw)} half-widths for {self.arrangement.n} normals")
        for h in hw:
            if not (0.0 < h <= math.pi / 2):
                raise ValueError(f"half-width {h!r} outside (0, pi/2]")

    @classmethod
    def equal(cls, arrangement: Arrangement, half_width: float) -> "ZoneSet":
        return cls(arrangement, (half_width,) * arrangement.n)


def apple_peel(n: int) -> Arrangement:
    """n evenly spaced meridians through both poles of S^2.

    Meridian k contains the north pole and the equator point at longitude
    k*pi/n; its normal is (-sin(k*pi/n), cos(k*pi/n), 0).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidCount(f"need at least one great circle, got {n!r}")
    t = np.arange(n) * math.pi / n
    normals = np.column_stack([-np.sin(t), np.cos(t), np.zeros(n)])
    return Arrangement.from_array(normals)


def random_arrangement(d: int, n: int, seed: int) -> Arrangement:
    """n normals uniform on S^{d-1}, reproducible for a fixed seed."""
    if d < 2:
        raise InvalidDimension(f"d must be >= 2, got {d}")
    if n < 1:
        raise InvalidCount(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d))
    return Arrangement.from_array(g / np.linalg.norm(g, axis=1, keepdims=True))
