"""Numerical companions to the product-maximizer argument.

Given u and a tangent vector w (w orthogonal to u, |w| <= 1), the curve
u_theta = cos(theta) u + sin(theta) w traces an ellipse through u, and

    f(theta) = prod_i <v_i, u_theta> / <v_i, u>
             = prod_i (cos theta + sin theta * <v_i, w> / <v_i, u>)

is a trigonometric polynomial of degree <= n with f(0) = 1 and
f(theta + pi) = (-1)^n f(theta).  At a critical point u the linear term
vanishes and f(theta) - cos(n theta) = sin^2(theta) psi(theta) with psi of
degree <= n - 2, so f - cos(n theta) has at most 2n - 2 zeros on the circle.
At a point u that sits closer than sin(pi/2n) to some hyperplane, a shortened
w puts a zero of f at theta = pi/2n, and maximality would force 2n zeros.
This module computes each of those objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from zonecover.errors import (
    DegenerateOrthogonal,
    DimensionMismatch,
    GridTooCoarse,
    HypothesisNotViolated,
    InsufficientSamples,
    NotCritical,
    OnHyperplane,
)
from zonecover.sphere import Arrangement, UnitVector

__all__ = [
    "TrigPoly",
    "ProofTrace",
    "construct_w",
    "eval_f",
    "fit_trig",
    "critical_identity_residual",
    "psi2_residual",
    "count_sign_changes",
    "find_tangencies",
    "build_trace",
]

HYPERPLANE_EPS = 1e-14
ORTHO_TOL = 1e-10
CRITICAL_TOL = 1e-8
ZERO_TOL = 1e-12
TANGENCY_VALUE_TOL = 1e-8
TANGENCY_SLOPE_TOL = 1e-6
PSI2_EXCLUDE = 0.1


@dataclass(frozen=True)
class TrigPoly:
    """p(theta) = a_0 + sum_{k=1..m} (a_k cos k theta + b_k sin k theta).

    ``sin_coeffs[0]`` is b_1.  ``residual`` is the max deviation from the
    fitted function on the verification grid (0 when built from coefficients).
    """

    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]
    residual: float = 0.0

    def __post_init__(self):
        if len(self.sin_coeffs) != len(self.cos_coeffs) - 1:
            raise ValueError("need a_0..a_m and b_1..b_m")

    @property
    def degree(self) -> int:
        return len(self.cos_coeffs) - 1

    def __call__(self, theta):
        t = np.asarray(theta, dtype=float)
        k = np.arange(1, self.degree + 1)
        kt = np.multiply.outer(t, k)
        a = np.asarray(self.cos_coeffs)
        b = np.asarray(self.sin_coeffs)
        out = a[0] + np.cos(kt) @ a[1:] + np.sin(kt) @ b
        return out if out.ndim else float(out)

    @classmethod
    def from_samples(cls, values, degree: int) -> "TrigPoly":
        """Discrete Fourier coefficients of equispaced samples on [0, 2*pi)."""
        y = np.asarray(values, dtype=float)
        N = y.size
        if degree < 0 or N < 2 * degree + 1:
            raise InsufficientSamples(f"{N} samples cannot resolve degree {degree}")
        X = np.fft.rfft(y) / N
        a = np.concatenate([[X[0].real], 2.0 * X[1 : degree + 1].real])
        b = -2.0 * X[1 : degree + 1].imag
        return cls(tuple(a.tolist()), tuple(b.tolist()))

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "cos_coeffs": list(self.cos_coeffs),
            "sin_coeffs": list(self.sin_coeffs),
            "residual": self.residual,
        }


def fit_trig(
    func: Callable[[np.ndarray], np.ndarray],
    degree: int,
    samples: int | None = None,
    verify: int | None = None,
) -> TrigPoly:
    """Fit a degree-``degree`` trig polynomial to ``func`` from equispaced samples.

    Uses 4(degree + 1) samples by default, exact for trig polynomials of that
    degree.  The residual is measured on a finer grid offset by a quarter
    sample spacing, so no verification node coincides with a sample node.
    """
    N = samples if samples is not None else 4 * (degree + 1)
    if N < 2 * degree + 1:
        raise InsufficientSamples(f"{N} samples cannot resolve degree {degree}")
    theta = 2.0 * math.pi * np.arange(N) / N
    p = TrigPoly.from_samples(func(theta), degree)
    M = verify if verify is not None else max(8 * N, 256)
    tv = 2.0 * math.pi * (np.arange(M) + 0.25) / M
    res = float(np.max(np.abs(p(tv) - func(tv))))
    return TrigPoly(p.cos_coeffs, p.sin_coeffs, res)


def _lstsq_trig(theta: np.ndarray, y: np.ndarray, degree: int) -> TrigPoly:
    k = np.arange(1, degree + 1)
    kt = np.multiply.outer(theta, k)
    A = np.hstack([np.ones((theta.size, 1)), np.cos(kt), np.sin(kt)])
    c, *_ = np.linalg.lstsq(A, y, rcond=None)
    return TrigPoly(tuple(c[: degree + 1].tolist()), tuple(c[degree + 1 :].tolist()))


def _vec(x, d: int) -> np.ndarray:
    a = np.asarray(x.coords if isinstance(x, UnitVector) else x, dtype=float).reshape(-1)
    if a.size != d:
        raise DimensionMismatch(f"vector of length {a.size}, expected {d}")
    return a


def _ratios(arr: Arrangement, u, w) -> np.ndarray:
    """<v_i, w> / <v_i, u> for every normal."""
    x = _vec(u, arr.dim)
    y = _vec(w, arr.dim)
    c = arr.matrix @ x
    if np.min(np.abs(c)) <= HYPERPLANE_EPS:
        raise OnHyperplane(f"|<v_i, u>| = {np.min(np.abs(c)):.3g} for some i")
    if abs(float(np.dot(x, y))) > ORTHO_TOL:
        raise ValueError(f"w is not orthogonal to u: <w, u> = {np.dot(x, y):.3g}")
    return (arr.matrix @ y) / c


def construct_w(u, v1, n: int) -> tuple[np.ndarray, float]:
    """Tangent w at u with |w| < 1 and v1 orthogonal to u_{pi/2n}.

    Requires 0 < |<v1, u>| < sin(pi/2n).  Starting from the unit tangent p
    pointing away from v1, w = alpha * p with
    alpha = tan(arcsin|c|) / tan(pi/2n).
    """
    x = u.coords if isinstance(u, UnitVector) else UnitVector(u).coords
    v = v1.coords if isinstance(v1, UnitVector) else UnitVector(v1).coords
    if x.size != v.size:
        raise DimensionMismatch(f"dimensions differ: {x.size} vs {v.size}")
    c = float(np.dot(v, x))
    if c == 0.0:
        raise DegenerateOrthogonal("u already lies on the hyperplane of v1")
    half = math.pi / (2 * n)
    if abs(c) >= math.sin(half):
        raise HypothesisNotViolated(f"|<v1, u>| = {abs(c):.6g} >= sin(pi/2n) = {math.sin(half):.6g}")
    r = v - c * x
    r -= np.dot(r, x) * x
    p = -math.copysign(1.0, c) * r / np.linalg.norm(r)
    alpha = math.tan(math.asin(abs(c))) / math.tan(half)
    return alpha * p, alpha


def eval_f(arr: Arrangement, u, w, theta):
    """f(theta) = prod_i <v_i, u_theta> / <v_i, u>, vectorized over theta."""
    q = _ratios(arr, u, w)
    t = np.asarray(theta, dtype=float)
    out = np.prod(np.cos(t)[..., None] + np.sin(t)[..., None] * q, axis=-1)
    return out if out.ndim else float(out)


def critical_identity_residual(arr: Arrangement, u, w) -> float:
    """|sum_i <v_i, w> / <v_i, u>|, which is f'(0)."""
    return abs(float(np.sum(_ratios(arr, u, w))))


def psi2_residual(arr: Arrangement, u, w, n: int | None = None, samples: int | None = None) -> float:
    """How far (f - cos n theta) / sin^2 theta is from a degree n-2 trig polynomial.

    Samples avoid theta within 0.1 of 0 and pi, the fit is least squares, and
    the residual is the max error on a shifted grid.  Returns 0.0 for n < 2,
    where the quotient vanishes identically at a critical point.
    """
    n = arr.n if n is None else n
    if critical_identity_residual(arr, u, w) > CRITICAL_TOL:
        raise NotCritical(f"f'(0) = {critical_identity_residual(arr, u, w):.3g}; u is not critical along w")
    if n < 2:
        return 0.0

    def quotient(t):
        return (eval_f(arr, u, w, t) - np.cos(n * t)) / np.sin(t) ** 2

    def away(t):
        s = np.mod(t, math.pi)
        return (s > PSI2_EXCLUDE) & (s < math.pi - PSI2_EXCLUDE)

    N = samples if samples is not None else 32 * (n + 1)
    t = 2.0 * math.pi * np.arange(N) / N
    t = t[away(t)]
    psi = _lstsq_trig(t, quotient(t), n - 2)
    tv = 2.0 * math.pi * (np.arange(4 * N) + 0.37) / (4 * N)
    tv = tv[away(tv)]
    return float(np.max(np.abs(psi(tv) - quotient(tv))))


def count_sign_changes(p: Callable[[np.ndarray], np.ndarray], grid_size: int, n: int = 1) -> int:
    """Strict sign alternations of p on an equispaced cyclic grid over [0, 2*pi).

    Samples with |p| <= 1e-12 are dropped before counting, so touching zeros
    never count; see :func:`find_tangencies` for those.
    """
    if grid_size < 16 * n:
        raise GridTooCoarse(f"grid of {grid_size} points is too coarse for n={n}; need >= {16 * n}")
    t = 2.0 * math.pi * np.arange(grid_size) / grid_size
    y = np.asarray(p(t), dtype=float)
    s = np.sign(y[np.abs(y) > ZERO_TOL])
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s != np.roll(s, 1)))


def find_tangencies(p: Callable, points=(0.0, math.pi), h: float = 1e-4) -> list[float]:
    """Points among ``points`` where |p| <= 1e-8 and |p'| <= 1e-6 (central difference)."""
    out = []
    for t0 in points:
        val = float(p(np.array([t0]))[0])
        slope = float((p(np.array([t0 + h]))[0] - p(np.array([t0 - h]))[0]) / (2 * h))
        if abs(val) <= TANGENCY_VALUE_TOL and abs(slope) <= TANGENCY_SLOPE_TOL:
            out.append(float(t0))
    return out


@dataclass(frozen=True)
class ProofTrace:
    u: UnitVector
    w: np.ndarray
    violating_index: int | None
    alpha: float
    f: TrigPoly
    g_zero_count: int
    residual_psi2: float | None
    identity_residual: float
    n: int = 1
    tangencies: tuple[float, ...] = ()
    f_at_first_zero: float = 1.0
    max_abs_f: float = 1.0
    grid_size: int = 0
    arrangement: Arrangement | None = field(default=None, repr=False, compare=False)

    @property
    def zeros_forced(self) -> int:
        """Distinct zeros of f - cos n theta that maximality would force."""
        return 2 * self.n

    @property
    def zeros_allowed(self) -> int:
        """Upper bound on zeros available to sin^2 theta * psi."""
        return max(0, 2 * self.n - 2)

    def samples(self, count: int = 1000) -> np.ndarray:
        """(theta, f(theta), cos n theta) rows on an equispaced grid over [0, 2*pi)."""
        t = 2.0 * math.pi * np.arange(count) / count
        if self.arrangement is not None:
            fv = eval_f(self.arrangement, self.u, self.w, t)
        else:
            fv = self.f(t)
        return np.column_stack([t, fv, np.cos(self.n * t)])

    def to_dict(self, samples: int = 0) -> dict:
        d = {
            "n": self.n,
            "u": self.u.coords.tolist(),
            "w": np.asarray(self.w).tolist(),
            "violating_index": self.violating_index,
            "alpha": self.alpha,
            "f": self.f.to_dict(),
            "g_zero_count": self.g_zero_count,
            "zeros_forced_if_maximal": self.zeros_forced,
            "zeros_allowed": self.zeros_allowed,
            "tangencies": list(self.tangencies),
            "residual_psi2": self.residual_psi2,
            "identity_residual": self.identity_residual,
            "f_at_pi_over_2n": self.f_at_first_zero,
            "max_abs_f": self.max_abs_f,
            "grid_size": self.grid_size,
        }
        if samples:
            d["samples"] = self.samples(samples).tolist()
        return d


def _default_tangent(x: np.ndarray) -> np.ndarray:
    e = np.zeros_like(x)
    e[int(np.argmin(np.abs(x)))] = 1.0
    t = e - np.dot(e, x) * x
    return t / np.linalg.norm(t)


def build_trace(
    arr: Arrangement,
    u,
    n: int | None = None,
    w=None,
    grid_size: int | None = None,
    bound_tol: float = 1e-12,
) -> ProofTrace:
    """Run the whole pipeline at u.

    If u is closer than sin(pi/2n) - bound_tol to some hyperplane, w comes from
    :func:`construct_w` for the closest one.  Otherwise w is the supplied
    tangent, or the unit tangent obtained by projecting the coordinate axis
    least aligned with u.
    """
    n = arr.n if n is None else n
    u = u if isinstance(u, UnitVector) else UnitVector(u)
    c = arr.inner_products(u)
    if np.min(np.abs(c)) <= HYPERPLANE_EPS:
        raise OnHyperplane(f"|<v_i, u>| = {np.min(np.abs(c)):.3g} for some i")
    worst = int(np.argmin(np.abs(c)))
    violating = None
    if abs(c[worst]) < math.sin(math.pi / (2 * n)) - bound_tol:
        violating = worst
        wv, alpha = construct_w(u, arr.normals[worst], n)
    else:
        if w is None:
            wv = _default_tangent(u.coords)
        else:
            wv = np.asarray(w, dtype=float)
            wv = wv - np.dot(wv, u.coords) * u.coords
        alpha = float(np.linalg.norm(wv))

    def f(t):
        return eval_f(arr, u, wv, t)

    def g(t):
        return f(t) - np.cos(n * t)

    poly = fit_trig(f, n)
    G = grid_size if grid_size is not None else max(16 * n, 4096)
    zeros = count_sign_changes(g, G, n)
    ident = critical_identity_residual(arr, u, wv)
    try:
        psi = psi2_residual(arr, u, wv, n)
    except NotCritical:
        psi = None
    t_open = math.pi * (np.arange(1, 10_000) / 10_000)
    return ProofTrace(
        u=u,
        w=wv,
        violating_index=violating,
        alpha=float(alpha),
        f=poly,
        g_zero_count=zeros,
        residual_psi2=psi,
        identity_residual=ident,
        n=n,
        tangencies=tuple(find_tangencies(g)),
        f_at_first_zero=float(f(np.array([math.pi / (2 * n)]))[0]),
        max_abs_f=float(np.max(np.abs(f(t_open)))),
        grid_size=G,
        arrangement=arr,
    )
