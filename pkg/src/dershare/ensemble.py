"""Step-size expert ensemble combined by an exponentially weighted forecaster.

When the workload drifts, no single primal step size is right: a geometric
grid of candidates brackets the unknown best tuning, one expert runs gradient
descent per candidate (all sharing the same estimated direction), and a
multiplicative-weights meta layer tracks whichever expert is currently ahead.
Experts are scored with a linear surrogate anchored at the combined iterate,
since only function values at the played point are ever observed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .drs import (
    AgentState,
    Box,
    ScheduleConstants,
    _ScheduleBase,
    _play,
    estimate_direction,
    sample_unit_vector,
    update_dual,
)

__all__ = [
    "ExpertPool",
    "SurrogateLoss",
    "pool_size",
    "initial_weights",
    "pool_step_base",
    "build_pool",
    "expert_step",
    "combine",
    "update_weights",
    "meta_rate",
    "mansdrs_round",
    "MansdrsAgent",
]


def pool_size(horizon: int) -> int:
    """Number of candidate step sizes: ceil(log2(1+T)/2) + 1."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    return math.ceil(0.5 * math.log2(1 + horizon)) + 1


def initial_weights(k: int) -> np.ndarray:
    """Non-uniform prior (K+1)/K * 1/(k(k+1)); telescopes to sum 1."""
    if k < 1:
        raise ValueError("need at least one expert")
    ks = np.arange(1, k + 1, dtype=float)
    return (k + 1) / k / (ks * (ks + 1))


def pool_step_base(constants: ScheduleConstants) -> float:
    """Smallest pool step-size coefficient; expert k scales it by 2^(k-1)."""
    c = constants
    return math.sqrt(2.0 * c.radius_outer**3 / (2.0 * c.degree * c.loss_bound * c.lipschitz_eff))


@dataclass
class ExpertPool:
    """K parallel iterates with their geometric step grid and mixing weights."""

    base_step: float
    iterates: np.ndarray  # (K, dim)
    weights: np.ndarray  # (K,), nonneg, sums to 1

    @property
    def size(self) -> int:
        return len(self.weights)

    def step_sizes(self, t: int) -> np.ndarray:
        """eta_k(t) = 2^(k-1) * base * t^(-3/4) for k = 1..K."""
        if t < 1:
            raise ValueError("round index starts at 1")
        return self.base_step * 2.0 ** np.arange(self.size) * t**-0.75


def build_pool(horizon: int, constants: ScheduleConstants, box: Box, start=None) -> ExpertPool:
    """Pool sized for `horizon`, all experts starting from the same point."""
    k = pool_size(horizon)
    z0 = np.full(box.dim, box.center) if start is None else np.asarray(start, dtype=float)
    return ExpertPool(
        base_step=pool_step_base(constants),
        iterates=np.tile(z0, (k, 1)),
        weights=initial_weights(k),
    )


def expert_step(pool: ExpertPool, direction: np.ndarray, t: int, box: Box, xi: float) -> np.ndarray:
    """Every expert descends the shared direction at its own step size."""
    etas = pool.step_sizes(t)
    lo, hi = box.shrunk_bounds(xi)
    return np.clip(pool.iterates - etas[:, None] * direction[None, :], lo, hi)


def combine(pool: ExpertPool) -> np.ndarray:
    """Weighted average of expert iterates; stays in the (convex) shrunk box."""
    return pool.weights @ pool.iterates


@dataclass(frozen=True)
class SurrogateLoss:
    """Linear expert score <gradient, z - anchor>; zero at the anchor."""

    gradient: np.ndarray
    anchor: np.ndarray

    def __call__(self, z) -> float:
        return float(np.dot(self.gradient, np.asarray(z, dtype=float) - self.anchor))

    def batch(self, zs: np.ndarray) -> np.ndarray:
        return (np.asarray(zs, dtype=float) - self.anchor) @ self.gradient


def update_weights(weights: np.ndarray, losses: np.ndarray, eps: float) -> np.ndarray:
    """Multiplicative-weights update, computed in log space.

    Surrogate losses scale like dim * F * R / delta, so a naive exponential
    can overflow; shifting log-weights by their max keeps one entry at
    exp(0) = 1 no matter how extreme the scores get.
    """
    if eps < 0:
        raise ValueError("meta learning rate must be nonnegative")
    with np.errstate(divide="ignore"):
        logw = np.log(weights) - eps * np.asarray(losses, dtype=float)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def meta_rate(horizon: int, grad_bound: float, radius: float) -> float:
    """Forecaster rate sqrt(1 / (2 T (G_hat R)^2)) for surrogate losses bounded by G_hat*R."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if grad_bound <= 0 or radius <= 0:
        raise ValueError("bounds must be positive")
    return math.sqrt(1.0 / (2.0 * horizon * (grad_bound * radius) ** 2))


def mansdrs_round(
    pool: ExpertPool,
    state: AgentState,
    schedule: _ScheduleBase,
    observed: tuple[float, float],
    box: Box,
    rng,
    eps: float,
    *,
    t: int,
    generation=None,
    adjust: bool = False,
    adjust_mode: str = "proportional",
    self_index: int | None = None,
) -> tuple[ExpertPool, AgentState, np.ndarray]:
    """One ensemble round: dual, shared direction, expert steps, combine, play.

    Weights are refreshed after combining (they apply from the next round), so
    with a single expert the round collapses to the plain primal-dual update.
    """
    f_prev, g_prev = observed
    v = schedule.at(t)
    q = update_dual(state.q, g_prev, v.gamma, v.beta)
    direction = estimate_direction(f_prev, g_prev, state.u, q, state.delta, box.dim)
    iterates = expert_step(pool, direction, t, box, v.xi)
    pool = ExpertPool(pool.base_step, iterates, pool.weights)
    z = combine(pool)
    surrogate = SurrogateLoss(gradient=direction, anchor=z)
    pool.weights = update_weights(pool.weights, surrogate.batch(iterates), eps)
    u = sample_unit_vector(box.dim, rng)
    x = z + v.delta * u
    x_played = _play(x, generation, adjust, adjust_mode, self_index)
    new_state = AgentState(z=z, u=u, delta=v.delta, x=x, x_played=x_played, q=q)
    return pool, new_state, x_played


class MansdrsAgent:
    """Ensemble agent: expert pool + forecaster on top of the primal-dual core."""

    def __init__(
        self,
        box: Box,
        schedule: _ScheduleBase,
        pool: ExpertPool,
        eps: float,
        rng,
        *,
        adjust: bool = False,
        adjust_mode: str = "proportional",
        self_index: int | None = None,
    ):
        self.box = box
        self.schedule = schedule
        self.pool = pool
        self.eps = eps
        self.rng = rng
        self.adjust = adjust
        self.adjust_mode = adjust_mode
        self.self_index = self_index
        self.state: AgentState | None = None

    def start(self, generation=None) -> np.ndarray:
        v = self.schedule.at(1)
        z = combine(self.pool)
        u = sample_unit_vector(self.box.dim, self.rng)
        x = z + v.delta * u
        x_played = _play(x, generation, self.adjust, self.adjust_mode, self.self_index)
        self.state = AgentState(z=z, u=u, delta=v.delta, x=x, x_played=x_played, q=0.0)
        return x_played

    def step(self, t: int, loss_observed: float, constraint_observed: float, generation=None) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("call start() before step()")
        self.pool, self.state, x_played = mansdrs_round(
            self.pool,
            self.state,
            self.schedule,
            (loss_observed, constraint_observed),
            self.box,
            self.rng,
            self.eps,
            t=t,
            generation=generation,
            adjust=self.adjust,
            adjust_mode=self.adjust_mode,
            self_index=self.self_index,
        )
        return x_played
