"""Full-information comparator oracles and the constant-hyperparameter baseline.

The oracles are measurement instruments: they see the true per-round loss as a
function of one node's own allocation (everyone else frozen) and locate
near-minimizers so regret can be reported. The learning algorithms never
observe them. BanSaP lives here too: the same primal-dual update run with
hyperparameters frozen mid-horizon, no adjustment and no ensemble, used as the
controlled ablation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .drs import Box, DrsAgent, DrsSchedule, ScheduleConstants, freeze_schedule

__all__ = [
    "ComparatorSequence",
    "path_length",
    "minimize_on_box",
    "per_round_minimizer",
    "best_fixed_action",
    "NeighborhoodShortfall",
    "NeighborhoodShortfallSum",
    "BansapAgent",
]


@dataclass
class ComparatorSequence:
    """Reference actions u_t for one node, with their realized losses."""

    node: int
    kind: str  # dynamic | static | user
    points: np.ndarray  # (T, dim)
    losses: np.ndarray  # (T,)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.losses = np.asarray(self.losses, dtype=float)
        if len(self.points) != len(self.losses):
            raise ValueError("points and losses must have equal length")

    @property
    def horizon(self) -> int:
        return len(self.points)


def path_length(points) -> float:
    """Total Euclidean movement sum_t ||u_t - u_{t-1}||; zero for constant sequences."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) < 1:
        raise ValueError("need at least one point")
    if len(pts) == 1:
        return 0.0
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def _eval(fn, x) -> float:
    v = float(fn(x))
    if not math.isfinite(v):
        raise ValueError(f"loss evaluated to non-finite value {v} at {x}")
    return v


def _subgradient(fn, x, box: Box) -> np.ndarray:
    if hasattr(fn, "subgradient"):
        return np.asarray(fn.subgradient(x), dtype=float)
    h = 1e-6 * box.x_max
    g = np.empty(box.dim)
    for j in range(box.dim):
        hi = x.copy()
        lo = x.copy()
        hi[j] = min(hi[j] + h, box.x_max)
        lo[j] = max(lo[j] - h, 0.0)
        width = hi[j] - lo[j]
        g[j] = (_eval(fn, hi) - _eval(fn, lo)) / width if width > 0 else 0.0
    return g


def _coord_scan(fn, x, j, vals) -> np.ndarray:
    if hasattr(fn, "coord_scan"):
        return np.asarray(fn.coord_scan(x, j, vals), dtype=float)
    out = np.empty(len(vals))
    probe = x.copy()
    for k, v in enumerate(vals):
        probe[j] = v
        out[k] = _eval(fn, probe)
    probe[j] = x[j]
    return out


def minimize_on_box(
    fn,
    box: Box,
    *,
    tol: float = 1e-3,
    grid: int = 201,
    sweeps: int = 3,
    subgradient_iters: int = 500,
):
    """Minimize a convex function over [0, x_max]^dim.

    Projected subgradient descent with diminishing steps (dims > 2), refined by
    cyclic coordinate grid sweeps; for dims <= 2 the grid alone resolves the
    box at `grid` points per axis. `fn` may expose .subgradient(x) and
    .coord_scan(x, j, vals) fast paths; plain callables fall back to finite
    differences and per-point evaluation.
    """
    x = np.full(box.dim, box.center)
    best_x, best_v = x.copy(), _eval(fn, x)

    if box.dim > 2 and subgradient_iters > 0:
        for k in range(1, subgradient_iters + 1):
            g = _subgradient(fn, x, box)
            norm = float(np.linalg.norm(g))
            if norm <= 0:
                break
            x = np.clip(x - (box.x_max / math.sqrt(k)) * g / norm, 0.0, box.x_max)
            v = _eval(fn, x)
            if v < best_v:
                best_x, best_v = x.copy(), v

    axis = np.linspace(0.0, box.x_max, grid)
    x = best_x.copy()
    for _ in range(max(1, sweeps)):
        improved = False
        for j in range(box.dim):
            scan = _coord_scan(fn, x, j, axis)
            k = int(np.argmin(scan))
            # strict improvement only: ties keep the current coordinate, so
            # minimizers stay put across flat plateaus
            if scan[k] < best_v - 1e-15:
                x[j] = axis[k]
                best_v = float(scan[k])
                best_x = x.copy()
                improved = True
        if not improved:
            break
    return best_x


def per_round_minimizer(fn, box: Box, tol: float = 1e-3, **kwargs) -> np.ndarray:
    """Point whose loss is within tol of the box minimum for one round's loss."""
    return minimize_on_box(fn, box, tol=tol, **kwargs)


class _SummedFast:
    """Sum of per-round losses where every term exposes the fast paths."""

    def __init__(self, fns):
        self.fns = fns

    def __call__(self, x):
        return sum(float(f(x)) for f in self.fns)

    def coord_scan(self, x, j, vals):
        return sum(np.asarray(f.coord_scan(x, j, vals), dtype=float) for f in self.fns)

    def subgradient(self, x):
        return sum(np.asarray(f.subgradient(x), dtype=float) for f in self.fns)


def best_fixed_action(round_losses, box: Box, tol: float = 1e-3, **kwargs) -> np.ndarray:
    """Minimizer of the summed loss over all rounds (the hindsight comparator)."""
    fns = list(round_losses)
    if not fns:
        raise ValueError("need at least one round loss")
    if len(fns) == 1:
        return minimize_on_box(fns[0], box, tol=tol, **kwargs)
    if all(hasattr(f, "coord_scan") and hasattr(f, "subgradient") for f in fns):
        return minimize_on_box(_SummedFast(fns), box, tol=tol, **kwargs)

    def plain(x):
        return sum(float(f(x)) for f in fns)

    return minimize_on_box(plain, box, tol=tol, **kwargs)


class NeighborhoodShortfall:
    """One agent's round loss as a function of its own allocation.

    value(x) = 1 - mean_j min((m_j + x_j) / l_j, 1), where m_j is what
    neighbor j already receives from everyone else and l_j its demand. Convex,
    piecewise linear, and separable per coordinate.
    """

    def __init__(self, baseline, demands):
        self.baseline = np.asarray(baseline, dtype=float)
        self.demands = np.asarray(demands, dtype=float)
        if self.baseline.shape != self.demands.shape or self.baseline.ndim != 1:
            raise ValueError("baseline and demands must be equal-length vectors")
        if (self.demands <= 0).any():
            raise ValueError("demands must be positive")
        self.dim = len(self.demands)

    def __call__(self, x):
        sat = np.minimum((self.baseline + np.asarray(x, dtype=float)) / self.demands, 1.0)
        return float(1.0 - sat.mean())

    def batch(self, xs):
        sat = np.minimum((self.baseline + np.asarray(xs, dtype=float)) / self.demands, 1.0)
        return 1.0 - sat.mean(axis=-1)

    def coord_scan(self, x, j, vals):
        sat = np.minimum((self.baseline + x) / self.demands, 1.0)
        rest = sat.sum() - sat[j]
        sat_j = np.minimum((self.baseline[j] + np.asarray(vals, dtype=float)) / self.demands[j], 1.0)
        return 1.0 - (rest + sat_j) / self.dim

    def subgradient(self, x):
        active = (self.baseline + x) < self.demands
        return -(active / self.demands) / self.dim


class NeighborhoodShortfallSum:
    """Sum over rounds of NeighborhoodShortfall losses with per-round baselines."""

    def __init__(self, baselines, demands):
        self.baselines = np.atleast_2d(np.asarray(baselines, dtype=float))
        self.demands = np.atleast_2d(np.asarray(demands, dtype=float))
        if self.baselines.shape != self.demands.shape:
            raise ValueError("baselines and demands must share shape (T, dim)")
        if (self.demands <= 0).any():
            raise ValueError("demands must be positive")
        self.horizon, self.dim = self.baselines.shape

    def __call__(self, x):
        sat = np.minimum((self.baselines + np.asarray(x, dtype=float)) / self.demands, 1.0)
        return float(self.horizon - sat.mean(axis=1).sum())

    def coord_scan(self, x, j, vals):
        sat = np.minimum((self.baselines + x) / self.demands, 1.0)
        base_total = float(self.horizon - sat.mean(axis=1).sum())
        col_sum = float(sat[:, j].sum())
        vals = np.asarray(vals, dtype=float)
        bj = self.baselines[:, j]
        lj = self.demands[:, j]
        scanned = np.empty(len(vals))
        chunk = max(1, 4_000_000 // max(1, self.horizon))  # bound the (V, T) temporary
        for s in range(0, len(vals), chunk):
            block = vals[s : s + chunk, None]
            scanned[s : s + chunk] = np.minimum((bj[None, :] + block) / lj[None, :], 1.0).sum(axis=1)
        return base_total + (col_sum - scanned) / self.dim

    def subgradient(self, x):
        active = (self.baselines + x) < self.demands
        return -(active / self.demands).sum(axis=0) / self.dim


class BansapAgent(DrsAgent):
    """Saddle-point baseline: the decay schedule frozen mid-horizon, no adjustment.

    Keeps the frozen shrink factor so perturbed plays stay inside the box.
    """

    def __init__(self, box: Box, constants: ScheduleConstants, horizon: int, rng, freeze_at: int | None = None, start=None):
        t0 = freeze_at if freeze_at is not None else max(1, horizon // 2)
        schedule = freeze_schedule(DrsSchedule(constants), t0)
        super().__init__(box, schedule, rng, adjust=False, start=start)
