"""Multistart Riemannian ascent for F(u) = prod_i |<v_i, u>| on the unit sphere.

The ascent runs on L(u) = sum_i log|<v_i, u>|.  Hyperplanes are -inf
barriers for L, so a well-behaved step never leaves the chamber it starts in.

Restart ``k`` draws its start from ``np.random.default_rng(SeedSequence(seed,
spawn_key=(k,)))``, so every start depends only on (seed, k).  The batched
iteration below touches each row with elementwise operations and last-axis
reductions only; a row's trajectory is therefore bit-identical however the
restarts are chunked or spread over threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from zonecover.errors import DimensionMismatch, NoValidStart, OnHyperplane
from zonecover.sphere import Arrangement, UnitVector

__all__ = [
    "SolverConfig",
    "SolveReport",
    "objective",
    "log_objective",
    "log_objective_gradient",
    "solve",
    "check_theorem",
    "theorem_bound",
]

HYPERPLANE_EPS = 1e-14
START_REJECT = 1e-10
MAX_REDRAWS = 100
ARMIJO = 0.25
MAX_HALVINGS = 60


def theorem_bound(n: int) -> float:
    """sin(pi / 2n): the guaranteed distance of the maximizer from every hyperplane."""
    return math.sin(math.pi / (2 * n))


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for :func:`solve`.

    ``restarts=None`` means max(64, 8n).  ``step`` is the initial trial step
    for backtracking and the constant step for ``step_rule="fixed"``.  After a
    converged run the winning start keeps iterating until its gradient drops
    to ``polish_tol`` or stops improving (at most ``polish_iters`` steps).
    """

    restarts: int | None = None
    max_iters: int = 5000
    grad_tol: float = 1e-9
    step_rule: Literal["fixed", "backtracking"] = "backtracking"
    seed: int = 0
    step: float = 1.0
    polish_tol: float = 1e-12
    polish_iters: int = 500
    workers: int = 1
    chunk_size: int = 64

    def __post_init__(self):
        if self.restarts is not None and self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be > 0")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.workers < 1 or self.chunk_size < 1:
            raise ValueError("workers and chunk_size must be >= 1")

    def restarts_for(self, n: int) -> int:
        return self.restarts if self.restarts is not None else max(64, 8 * n)


@dataclass(frozen=True)
class SolveReport:
    u_star: UnitVector
    objective: float
    inner_products: tuple[float, ...]
    min_abs_inner: float
    bound: float
    margin: float
    restarts_used: int
    grad_norm: float
    converged: bool
    iterations: int = 0
    converged_restarts: int = 0
    distinct_maxima: int = 0
    grad_tol: float = 1e-9

    @property
    def n(self) -> int:
        return len(self.inner_products)

    def to_dict(self) -> dict:
        return {
            "u_star": self.u_star.coords.tolist(),
            "objective": self.objective,
            "inner_products": list(self.inner_products),
            "min_abs_inner": self.min_abs_inner,
            "bound": self.bound,
            "margin": self.margin,
            "restarts_used": self.restarts_used,
            "grad_norm": self.grad_norm,
            "converged": self.converged,
            "iterations": self.iterations,
            "converged_restarts": self.converged_restarts,
            "distinct_maxima": self.distinct_maxima,
        }


def _coords(arr: Arrangement, u) -> np.ndarray:
    x = u.coords if isinstance(u, UnitVector) else UnitVector(u).coords
    if x.size != arr.dim:
        raise DimensionMismatch(f"point has d={x.size}, arrangement has d={arr.dim}")
    return x


def objective(arr: Arrangement, u) -> float:
    """prod_i |<v_i, u>|, in [0, 1]."""
    return float(np.prod(np.minimum(np.abs(arr.matrix @ _coords(arr, u)), 1.0)))


def log_objective(arr: Arrangement, u) -> float:
    c = arr.matrix @ _coords(arr, u)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(c))))


def log_objective_gradient(arr: Arrangement, u) -> np.ndarray:
    """Riemannian gradient of sum_i log|<v_i, u>|: the tangential part of sum_i v_i / <v_i, u>."""
    x = _coords(arr, u)
    c = arr.matrix @ x
    if np.min(np.abs(c)) <= HYPERPLANE_EPS:
        raise OnHyperplane(f"|<v_i, u>| = {np.min(np.abs(c)):.3g} for some i")
    G = arr.matrix.T @ (1.0 / c)
    return G - np.dot(G, x) * x


# -- batched kernels: row-local arithmetic only ------------------------------


def _rows_inner(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return (U[:, None, :] * V[None, :, :]).sum(axis=2)


def _rows_logf(C: np.ndarray) -> np.ndarray:
    return np.log(np.abs(C)).sum(axis=1)


def _rows_grad(U: np.ndarray, C: np.ndarray, VT: np.ndarray) -> np.ndarray:
    G = (VT[None, :, :] / C[:, None, :]).sum(axis=2)
    return G - (G * U).sum(axis=1)[:, None] * U


def _rows_normalize(X: np.ndarray) -> np.ndarray:
    return X / np.sqrt((X * X).sum(axis=1))[:, None]


def _ascend(V: np.ndarray, U: np.ndarray, cfg: SolverConfig, tol: float, max_iters: int, step0=None):
    """Run the ascent on every row of U.

    Returns (U, L, grad_norm, iterations, converged, last_step).
    """
    VT = np.ascontiguousarray(V.T)
    R = U.shape[0]
    U = U.copy()
    C = _rows_inner(U, V)
    L = _rows_logf(C)
    g = _rows_grad(U, C, VT)
    gn = np.sqrt((g * g).sum(axis=1))
    iters = np.zeros(R, dtype=np.int64)
    step = np.full(R, cfg.step) if step0 is None else np.array(step0, dtype=float)
    active = gn > tol
    stalled = np.zeros(R, dtype=bool)

    for _ in range(max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        Ua, Ca, La, ga, gna = U[idx], C[idx], L[idx], g[idx], gn[idx]
        if cfg.step_rule == "fixed":
            s = np.full(idx.size, cfg.step)
            Un = _rows_normalize(Ua + s[:, None] * ga)
            Cn = _rows_inner(Un, V)
            ok = np.min(np.abs(Cn), axis=1) > HYPERPLANE_EPS
            Ln = np.where(ok, _rows_logf(np.where(ok[:, None], Cn, 1.0)), -np.inf)
            gnext = _rows_grad(Un, np.where(ok[:, None], Cn, 1.0), VT)
            accepted = ok
        else:
            s = np.minimum(cfg.step, 2.0 * step[idx])
            Un = np.empty_like(Ua)
            Cn = np.empty_like(Ca)
            Ln = np.full(idx.size, -np.inf)
            gnext = np.empty_like(ga)
            accepted = np.zeros(idx.size, dtype=bool)
            pending = np.arange(idx.size)
            for _h in range(MAX_HALVINGS):
                if pending.size == 0:
                    break
                Ut = _rows_normalize(Ua[pending] + s[pending, None] * ga[pending])
                Ct = _rows_inner(Ut, V)
                safe = np.min(np.abs(Ct), axis=1) > HYPERPLANE_EPS
                Cs = np.where(safe[:, None], Ct, 1.0)
                Lt = np.where(safe, _rows_logf(Cs), -np.inf)
                gain = Lt - La[pending]
                armijo = gain >= ARMIJO * s[pending] * gna[pending] ** 2
                # below the resolution of L, accept while the slope along the step stays >= 0
                gt = _rows_grad(Ut, Cs, VT)
                flat = safe & (np.abs(gain) <= 1e-13 * (1.0 + np.abs(La[pending])))
                slope_ok = (gt * ga[pending]).sum(axis=1) >= 0.0
                ok = safe & (armijo | (flat & slope_ok))
                done = pending[ok]
                Un[done], Cn[done], Ln[done], gnext[done] = Ut[ok], Ct[ok], Lt[ok], gt[ok]
                accepted[done] = True
                pending = pending[~ok]
                s[pending] *= 0.5
            if pending.size:
                stalled[idx[pending]] = True
        acc = idx[accepted]
        U[acc], C[acc], L[acc], g[acc] = Un[accepted], Cn[accepted], Ln[accepted], gnext[accepted]
        gn[acc] = np.sqrt((g[acc] * g[acc]).sum(axis=1))
        step[acc] = s[accepted]
        iters[acc] += 1
        if cfg.step_rule == "fixed":
            stalled[idx[~accepted]] = True
        active = (gn > tol) & ~stalled

    return U, L, gn, iters, gn <= tol, step


def _draw_start(V: np.ndarray, seed: int, k: int) -> np.ndarray | None:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k,)))
    d = V.shape[1]
    for _ in range(MAX_REDRAWS):
        x = rng.standard_normal(d)
        x /= np.linalg.norm(x)
        if np.min(np.abs(V @ x)) > START_REJECT:
            return x
    return None


def _distinct(U: np.ndarray, tol: float = 1e-6) -> int:
    """Number of distinct points up to sign."""
    reps: list[np.ndarray] = []
    for x in U:
        if not any(abs(abs(float(np.dot(x, r))) - 1.0) < tol for r in reps):
            reps.append(x)
    return len(reps)


def solve(arr: Arrangement, cfg: SolverConfig | None = None) -> SolveReport:
    """Best-effort maximizer of prod_i |<v_i, u>| over the unit sphere.

    Global optimality is not guaranteed for d >= 3; ``converged_restarts`` and
    ``distinct_maxima`` summarize what the restarts found.
    """
    cfg = cfg or SolverConfig()
    V = np.ascontiguousarray(arr.matrix)
    R = cfg.restarts_for(arr.n)

    starts = [_draw_start(V, cfg.seed, k) for k in range(R)]
    valid = [k for k, x in enumerate(starts) if x is not None]
    if not valid:
        raise NoValidStart(f"all {R} starts landed on a hyperplane")
    U0 = np.stack([starts[k] for k in valid])

    chunks = [np.arange(i, min(i + cfg.chunk_size, len(valid))) for i in range(0, len(valid), cfg.chunk_size)]

    def run(ix):
        return _ascend(V, U0[ix], cfg, cfg.grad_tol, cfg.max_iters)

    if cfg.workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(ix) for ix in chunks]
    U = np.concatenate([p[0] for p in parts])
    L = np.concatenate([p[1] for p in parts])
    gn = np.concatenate([p[2] for p in parts])
    iters = np.concatenate([p[3] for p in parts])
    conv = np.concatenate([p[4] for p in parts])
    steps = np.concatenate([p[5] for p in parts])

    # highest objective wins; np.argmax returns the lowest index on exact ties
    best = int(np.argmax(L))
    u, g_best, it, ok = U[best : best + 1], gn[best], int(iters[best]), bool(conv[best])
    if ok and cfg.polish_tol < cfg.grad_tol:
        pu, _, pgn, pit, _, _ = _ascend(V, u, cfg, cfg.polish_tol, cfg.polish_iters, steps[best : best + 1])
        u, g_best, it = pu, float(pgn[0]), it + int(pit[0])

    x = u[0]
    c = V @ x
    min_abs = float(np.min(np.abs(c)))
    bound = theorem_bound(arr.n)
    return SolveReport(
        u_star=UnitVector(x),
        objective=float(np.prod(np.abs(c))),
        inner_products=tuple(float(t) for t in c),
        min_abs_inner=min_abs,
        bound=bound,
        margin=min_abs - bound,
        restarts_used=len(valid),
        grad_norm=float(g_best),
        converged=bool(g_best <= cfg.grad_tol),
        iterations=it,
        converged_restarts=int(conv.sum()),
        distinct_maxima=_distinct(U[conv]) if conv.any() else 0,
        grad_tol=cfg.grad_tol,
    )


def check_theorem(report: SolveReport, n: int | None = None, tol: float = 1e-7) -> bool:
    """True iff the reported point keeps distance >= sin(pi/2n) - tol from every hyperplane."""
    if n is not None and n != report.n:
        raise ValueError(f"report has {report.n} inner products, expected {n}")
    return report.margin >= -tol
