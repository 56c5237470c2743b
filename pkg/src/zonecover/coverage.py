"""Covering radius of great-circle arrangements and zone-cover decisions.

The depth of a sphere point u is its geodesic distance to the nearest great
circle, ``min_i arcsin|<v_i, u>|``.  Depth (and its shifted form
``min_i (arcsin|<v_i, u>| - h_i)`` used for zones) is 1-Lipschitz in geodesic
distance, so if every sphere point lies within ``r`` of an evaluated sample,
the true maximum is at most ``max sample + r``.  Brackets reported here rest on
that argument:

* ``uniform_circle_s1`` (d = 2): N equispaced directions on a half circle,
  covering radius pi / 2N (depth is pi-periodic on S^1).
* ``fibonacci_s2`` (d = 3): a Fibonacci lattice whose covering radius is
  computed exactly from its convex hull (max spherical circumradius of the
  hull facets).  Where the coarse bound cannot rule out a deeper point, the
  cap of that radius around the sample is re-covered by a square grid in the
  tangent plane pushed through the exponential map.  The exponential map of
  the sphere does not increase distances, so a grid of spacing h covers the
  cap to within h / sqrt(2).
* ``heuristic_highdim``: seeded random samples plus local ascent.  No bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.spatial import ConvexHull
from scipy.special import logsumexp

from zonecover.errors import UncertifiedDimension, WrongDimension
from zonecover.sphere import Arrangement, UnitVector, ZoneSet

__all__ = [
    "GridCertificate",
    "CoverReport",
    "depth",
    "depth_many",
    "default_certificate",
    "fibonacci_lattice",
    "covering_radius",
    "covering_radius_2d_exact",
    "zones_cover",
]

Method = Literal["fibonacci_s2", "uniform_circle_s1", "heuristic_highdim"]

MAX_BASE_COUNT = 50_000
COVER_TOL = 1e-9
REFINE_STARTS = 8
TEMPERATURES = (1e-1, 1e-2, 1e-3, 1e-4)
_CHUNK = 200_000


def fibonacci_lattice(count: int) -> np.ndarray:
    """``count`` points on S^2: z_i = 1 - (2i+1)/count, longitude 2*pi*i/phi."""
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    lon = 2.0 * math.pi * i / ((1.0 + math.sqrt(5.0)) / 2.0)
    return np.column_stack([r * np.cos(lon), r * np.sin(lon), z])


@lru_cache(maxsize=8)
def _fibonacci_mesh(count: int) -> float:
    # Covering radius of the point set = largest Delaunay circumradius = largest hull facet cap.
    P = fibonacci_lattice(count)
    hull = ConvexHull(P)
    a, b, c = (P[hull.simplices[:, k]] for k in range(3))
    nrm = np.cross(b - a, c - a)
    nrm /= np.linalg.norm(nrm, axis=1)[:, None]
    cosr = np.abs((nrm * a).sum(axis=1))
    r = float(np.max(np.arccos(np.clip(cosr, -1.0, 1.0))))
    return r * (1.0 + 1e-9) + 1e-12


@dataclass(frozen=True)
class GridCertificate:
    """A deterministic sample set with a certified covering radius.

    ``mesh`` is the resolution the bracket is certified to; ``base_mesh`` is
    the covering radius of the ``sample_count`` base samples.  For
    ``fibonacci_s2`` the two differ when local refinement makes up the gap.
    """

    sample_count: int
    mesh: float
    method: Method
    base_mesh: float
    seed: int = 0

    def __post_init__(self):
        if not self.mesh > 0 or not self.base_mesh > 0:
            raise ValueError("mesh must be > 0")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")

    @property
    def certified(self) -> bool:
        return self.method != "heuristic_highdim"

    @classmethod
    def fibonacci(cls, mesh: float = 1e-3, base_count: int | None = None) -> "GridCertificate":
        if not mesh > 0:
            raise ValueError("mesh must be > 0")
        if base_count is None:
            base_count = int(min(MAX_BASE_COUNT, max(64, math.ceil((2.8 / mesh) ** 2))))
        base = _fibonacci_mesh(base_count)
        return cls(base_count, mesh, "fibonacci_s2", base)

    @classmethod
    def circle(cls, mesh: float = 1e-3) -> "GridCertificate":
        if not mesh > 0:
            raise ValueError("mesh must be > 0")
        count = max(2, math.ceil(math.pi / (2.0 * mesh)))
        return cls(count, math.pi / (2.0 * count), "uniform_circle_s1", math.pi / (2.0 * count))

    @classmethod
    def heuristic(cls, sample_count: int = 200_000, seed: int = 0) -> "GridCertificate":
        return cls(sample_count, math.inf, "heuristic_highdim", math.inf, seed)

    def points(self, dim: int) -> np.ndarray:
        if self.method == "uniform_circle_s1":
            t = np.arange(self.sample_count) * (math.pi / self.sample_count)
            return np.column_stack([np.cos(t), np.sin(t)])
        if self.method == "fibonacci_s2":
            return fibonacci_lattice(self.sample_count)
        rng = np.random.default_rng(self.seed)
        g = rng.standard_normal((self.sample_count, dim))
        return g / np.linalg.norm(g, axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "mesh": self.mesh,
            "method": self.method,
            "base_mesh": self.base_mesh,
            "seed": self.seed,
        }


def default_certificate(dim: int, mesh: float = 1e-3, seed: int = 0) -> GridCertificate:
    """Certified grid for d in {2, 3}; heuristic sampling above that."""
    if dim == 2:
        return GridCertificate.circle(mesh)
    if dim == 3:
        return GridCertificate.fibonacci(mesh)
    return GridCertificate.heuristic(seed=seed)


@dataclass(frozen=True)
class CoverReport:
    """Outcome of a covering-radius or zone-cover computation.

    ``covering_radius_lo <= rho <= covering_radius_hi`` whenever ``certified``.
    ``witness`` is present iff ``covers`` is False; for a bare arrangement
    (zero-width zones, which never cover) it is the deepest point found.
    ``excess_lo``/``excess_hi`` bracket max_u min_i(dist_i(u) - h_i).
    """

    covers: bool
    witness: UnitVector | None
    covering_radius_lo: float
    covering_radius_hi: float
    certified: bool = True
    excess_lo: float | None = None
    excess_hi: float | None = None
    samples_evaluated: int = 0

    def to_dict(self) -> dict:
        return {
            "covers": self.covers,
            "witness": None if self.witness is None else self.witness.coords.tolist(),
            "covering_radius_lo": self.covering_radius_lo,
            "covering_radius_hi": self.covering_radius_hi,
            "certified": self.certified,
            "excess_lo": self.excess_lo,
            "excess_hi": self.excess_hi,
            "samples_evaluated": self.samples_evaluated,
        }


def _excess(V: np.ndarray, hw: np.ndarray, U: np.ndarray) -> np.ndarray:
    out = np.empty(U.shape[0])
    for i in range(0, U.shape[0], _CHUNK):
        C = np.minimum(np.abs(U[i : i + _CHUNK] @ V.T), 1.0)
        out[i : i + _CHUNK] = (np.arcsin(C) - hw).min(axis=1)
    return out


def depth(arr: Arrangement, u) -> float:
    """Geodesic distance from u to the nearest great circle of the arrangement."""
    c = np.minimum(np.abs(arr.inner_products(u)), 1.0)
    return float(np.min(np.arcsin(c)))


def depth_many(arr: Arrangement, U: np.ndarray) -> np.ndarray:
    """Row-wise depth of an (m, d) array of unit vectors."""
    U = np.asarray(U, dtype=float)
    return _excess(arr.matrix, np.zeros(arr.n), U)


def _tangent_bases(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    k = np.argmin(np.abs(S), axis=1)
    a = np.zeros_like(S)
    a[np.arange(len(S)), k] = 1.0
    e1 = np.cross(S, a)
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    return e1, np.cross(S, e1)


def _patch_offsets(radius: float, spacing: float) -> np.ndarray:
    K = math.ceil(radius / spacing)
    ij = np.arange(-K, K + 1) * spacing
    X, Y = np.meshgrid(ij, ij, indexing="ij")
    xy = np.column_stack([X.ravel(), Y.ravel()])
    # any x with |x| <= radius has its nearest grid node within spacing/sqrt(2)
    keep = np.hypot(xy[:, 0], xy[:, 1]) <= radius + spacing / math.sqrt(2.0) + 1e-15
    return xy[keep]


def _patch_points(S: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    e1, e2 = _tangent_bases(S)
    r = np.hypot(offsets[:, 0], offsets[:, 1])
    sinc = np.where(r > 0, np.sin(r) / np.where(r > 0, r, 1.0), 1.0)
    a = (offsets[:, 0] * sinc)[None, :, None]
    b = (offsets[:, 1] * sinc)[None, :, None]
    P = np.cos(r)[None, :, None] * S[:, None, :] + a * e1[:, None, :] + b * e2[:, None, :]
    return P.reshape(-1, 3)


def _softmin_ascent(V: np.ndarray, hw: np.ndarray, X: np.ndarray, iters: int = 60):
    """Projected ascent on -T log sum exp(-e_i/T) for a falling temperature T.

    Returns the best point (by the true min) seen along each path.
    """
    X = X.copy()
    best_x = X.copy()
    best_e = _excess(V, hw, X)

    def smooth(Y, T):
        C = Y @ V.T
        A = np.minimum(np.abs(C), 1.0)
        e = np.arcsin(A) - hw
        return -T * logsumexp(-e / T, axis=1), C, A, e

    for T in TEMPERATURES:
        s = np.full(len(X), 0.1 * T + 1e-6)
        val, C, A, e = smooth(X, T)
        for _ in range(iters):
            p = np.exp(-(e - e.min(axis=1, keepdims=True)) / T)
            p /= p.sum(axis=1, keepdims=True)
            dd = np.sign(C) / np.sqrt(np.maximum(1.0 - A * A, 1e-300))
            G = (p * dd) @ V
            G -= (G * X).sum(axis=1)[:, None] * X
            gn = np.linalg.norm(G, axis=1)
            if np.all(gn < 1e-15):
                break
            Y = X + s[:, None] * G / np.maximum(gn, 1e-300)[:, None]
            Y /= np.linalg.norm(Y, axis=1)[:, None]
            nval, nC, nA, ne = smooth(Y, T)
            up = nval > val
            X[up], val[up], C[up], A[up], e[up] = Y[up], nval[up], nC[up], nA[up], ne[up]
            s = np.where(up, s * 1.5, s * 0.5)
            true_e = e.min(axis=1)
            better = true_e > best_e
            best_x[better], best_e[better] = X[better], true_e[better]
    return best_x, best_e


def _check_method(dim: int, cert: GridCertificate) -> None:
    if cert.method == "uniform_circle_s1" and dim != 2:
        raise WrongDimension(f"uniform_circle_s1 samples S^1, arrangement has d={dim}")
    if cert.method == "fibonacci_s2":
        if dim >= 4:
            raise UncertifiedDimension(f"no certified grid for d={dim}; use heuristic_highdim")
        if dim != 3:
            raise WrongDimension(f"fibonacci_s2 samples S^2, arrangement has d={dim}")


def _max_excess(arr: Arrangement, hw: np.ndarray, cert: GridCertificate):
    """Bracket max_u min_i(arcsin|<v_i,u>| - hw_i).  Returns (lo, hi, witness, evaluated)."""
    _check_method(arr.dim, cert)
    V = np.ascontiguousarray(arr.matrix)
    P = cert.points(arr.dim)
    e = _excess(V, hw, P)
    evaluated = len(P)
    lo0 = float(e.max())

    if cert.method == "fibonacci_s2" and cert.base_mesh > cert.mesh:
        refine = e + cert.base_mesh > lo0 + cert.mesh
        hi = float(np.max(e[~refine] + cert.base_mesh, initial=-math.inf))
        offsets = _patch_offsets(cert.base_mesh, cert.mesh * math.sqrt(2.0))
        S = P[refine]
        step = max(1, _CHUNK // len(offsets))
        patch_pts, patch_e = [], []
        for i in range(0, len(S), step):
            Q = _patch_points(S[i : i + step], offsets)
            q = _excess(V, hw, Q)
            evaluated += len(Q)
            hi = max(hi, float(q.max()) + cert.mesh)
            top = np.argsort(-q, kind="stable")[:REFINE_STARTS]
            patch_pts.append(Q[top])
            patch_e.append(q[top])
        pool = np.concatenate([P] + patch_pts)
        pool_e = np.concatenate([e] + patch_e)
    else:
        hi = lo0 + cert.base_mesh if cert.certified else math.nan
        pool, pool_e = P, e

    # stable sort: ties keep the lowest sample index first
    order = np.argsort(-pool_e, kind="stable")
    starts = []
    for k in order:
        x = pool[k]
        if all(abs(float(np.dot(x, y))) < 1.0 - 1e-10 for y in starts):
            starts.append(x)
        if len(starts) == REFINE_STARTS:
            break
    X, xe = _softmin_ascent(V, hw, np.array(starts))
    j = int(np.argmax(xe))
    if xe[j] > pool_e[order[0]]:
        lo, witness = float(xe[j]), X[j]
    else:
        lo, witness = float(pool_e[order[0]]), pool[order[0]]
    if not cert.certified:
        hi = lo
    # no point is farther than pi/2 from a great circle
    hi = min(hi, math.pi / 2 - float(np.max(hw)))
    return lo, max(hi, lo), witness, evaluated


def covering_radius(arr: Arrangement, cert: GridCertificate | None = None) -> CoverReport:
    """Bracket rho = max_u min_i arcsin|<v_i, u>| and return the deepest point found."""
    cert = cert or default_certificate(arr.dim)
    lo, hi, x, count = _max_excess(arr, np.zeros(arr.n), cert)
    return CoverReport(
        covers=False,
        witness=UnitVector(x),
        covering_radius_lo=lo,
        covering_radius_hi=hi,
        certified=cert.certified,
        excess_lo=lo,
        excess_hi=hi,
        samples_evaluated=count,
    )


def covering_radius_2d_exact(arr: Arrangement) -> float:
    """Half the largest circular gap between the lines, measured on a circle of length pi."""
    if arr.dim != 2:
        raise WrongDimension(f"exact method needs d=2, got d={arr.dim}")
    V = arr.matrix
    lines = np.sort(np.mod(np.arctan2(V[:, 1], V[:, 0]) + math.pi / 2, math.pi))
    gaps = np.diff(np.append(lines, lines[0] + math.pi))
    return float(gaps.max() / 2.0)


def zones_cover(zones: ZoneSet, cert: GridCertificate | None = None) -> CoverReport:
    """Decide whether closed zones of the given half-widths cover the sphere.

    A point exactly at distance ``half_width`` from a circle counts as covered.
    Reports ``covers=False`` with a witness when some point is found farther
    than ``half_widths[i] + 1e-9`` from every circle i.
    """
    arr = zones.arrangement
    cert = cert or default_certificate(arr.dim)
    hw = np.asarray(zones.half_widths)
    lo, hi, x, count = _max_excess(arr, hw, cert)
    if np.all(hw == hw[0]):
        rlo, rhi = lo + hw[0], hi + hw[0]
    else:
        rep = covering_radius(arr, cert)
        rlo, rhi = rep.covering_radius_lo, rep.covering_radius_hi
    covers = lo <= COVER_TOL
    return CoverReport(
        covers=covers,
        witness=None if covers else UnitVector(x),
        covering_radius_lo=float(rlo),
        covering_radius_hi=float(rhi),
        certified=cert.certified,
        excess_lo=lo,
        excess_hi=hi,
        samples_evaluated=count,
    )
