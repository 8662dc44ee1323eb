"""Primal-dual bandit agent: one-point gradient estimates on a shrunk box.

Each agent's action set is a box over its closed neighborhood. Per round the
dual variable absorbs the observed constraint value, the primal iterate
descends the estimated direction (loss value + dual-weighted constraint value,
pushed along the last perturbation), and the played point is the iterate plus
a fresh spherical perturbation. Shrinking the box by xi = delta / r keeps the
perturbed play feasible. An optional adjustment rescales any play whose total
exceeds the node's generation so the hard constraint never trips.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Box",
    "ScheduleConstants",
    "ScheduleValues",
    "DrsSchedule",
    "EnsembleSchedule",
    "ConstantSchedule",
    "freeze_schedule",
    "AgentState",
    "DrsAgent",
    "sample_unit_vector",
    "estimate_direction",
    "project_shrunk",
    "update_primal",
    "update_dual",
    "adjust_allocation",
    "init_state",
    "drs_round",
]

logger = logging.getLogger(__name__)

XI_CAP = 0.5


@dataclass(frozen=True)
class Box:
    """Feasible box [0, x_max]^dim with its inscribed/enclosing radii."""

    dim: int
    x_max: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("box dimension must be >= 1")
        if not self.x_max > 0:
            raise ValueError("x_max must be positive")

    @property
    def center(self) -> float:
        return self.x_max / 2.0

    @property
    def inner_radius(self) -> float:
        return self.x_max / 2.0

    @property
    def outer_radius(self) -> float:
        return self.x_max * math.sqrt(self.dim)

    def shrunk_bounds(self, xi: float) -> tuple[float, float]:
        """Bounds of the box scaled by (1 - xi) about its center."""
        if not 0 <= xi < 1:
            raise ValueError("xi must lie in [0, 1)")
        margin = xi * self.center
        return margin, self.x_max - margin

    def sample(self, rng) -> np.ndarray:
        return rng.uniform(0.0, self.x_max, self.dim)


def sample_unit_vector(dim: int, rng) -> np.ndarray:
    """Uniform on the unit sphere (Gaussian draw, normalized)."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    while True:
        v = rng.standard_normal(dim)
        norm = float(np.linalg.norm(v))
        if norm > 1e-12:
            return v / norm


def estimate_direction(f_val: float, g_val: float, u, q: float, delta: float, dim: int) -> np.ndarray:
    """One-point estimate of the regularized-Lagrangian gradient.

    (dim / delta) * (f + g*q) * u, where f and g were observed at the point
    perturbed by delta*u.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    return (dim / delta) * (f_val + g_val * q) * np.asarray(u, dtype=float)


def project_shrunk(p, box: Box, xi: float) -> np.ndarray:
    """Euclidean projection onto the (1 - xi)-shrunk box (a per-coordinate clamp)."""
    lo, hi = box.shrunk_bounds(xi)
    return np.clip(np.asarray(p, dtype=float), lo, hi)


def update_primal(z_prev, direction, eta: float, box: Box, xi: float) -> np.ndarray:
    if eta <= 0:
        raise ValueError("eta must be positive")
    return project_shrunk(np.asarray(z_prev, dtype=float) - eta * np.asarray(direction, dtype=float), box, xi)


def update_dual(q_prev: float, g_val: float, gamma: float, beta: float) -> float:
    """Hinged dual ascent: max(0, q + gamma*(g - beta*q))."""
    if gamma <= 0 or beta <= 0:
        raise ValueError("gamma and beta must be positive")
    return max(0.0, q_prev + gamma * (g_val - beta * q_prev))


def adjust_allocation(values: np.ndarray, generation: float, mode: str = "proportional", self_index: int | None = None) -> np.ndarray:
    """Rescale an allocation whose total exceeds the available generation.

    proportional: scale the whole vector by generation/total so the constraint
    lands at zero (a nextafter loop guards the one-ulp case so the result never
    exceeds generation). self-only: rescale just the owner's own-share
    coordinate, for comparison; it does not zero the constraint in general.
    """
    if generation < 0:
        raise ValueError("generation must be nonnegative")
    total = float(values.sum())
    if total <= generation:
        return values
    if mode == "self-only":
        if self_index is None:
            raise ValueError("self-only adjustment needs the owner's coordinate index")
        out = values.copy()
        out[self_index] = values[self_index] * generation / total
        return out
    if mode != "proportional":
        raise ValueError(f"unknown adjustment mode {mode!r}")
    scale = generation / total
    out = values * scale
    while float(out.sum()) > generation:
        scale = np.nextafter(scale, 0.0)
        out = values * scale
    return out


@dataclass(frozen=True)
class ScheduleValues:
    delta: float
    eta: float
    beta: float
    gamma: float
    xi: float


@dataclass(frozen=True)
class ScheduleConstants:
    """Problem constants the step-size schedules are tuned with.

    degree is the neighbor count excluding the node itself, floored at 1 so
    isolated nodes keep a positive smoothing radius.
    """

    degree: int
    loss_bound: float
    constraint_bound: float
    lipschitz: float
    radius_outer: float
    radius_inner: float

    def __post_init__(self):
        if self.degree < 1:
            raise ValueError("degree must be >= 1 (floor isolated nodes at 1)")
        for name in ("loss_bound", "constraint_bound", "lipschitz", "radius_outer", "radius_inner"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def lipschitz_eff(self) -> float:
        """Effective Lipschitz constant 3L + L*R/r used by the schedules."""
        return 3.0 * self.lipschitz + self.lipschitz * self.radius_outer / self.radius_inner


class _ScheduleBase:
    def at(self, t: int) -> ScheduleValues:  # pragma: no cover - interface
        raise NotImplementedError

    def delta(self, t: int) -> float:
        return self.at(t).delta

    def eta(self, t: int) -> float:
        return self.at(t).eta

    def beta(self, t: int) -> float:
        return self.at(t).beta

    def gamma(self, t: int) -> float:
        return self.at(t).gamma

    def xi(self, t: int) -> float:
        return self.at(t).xi

    def _cap_xi(self, delta: float, r: float) -> tuple[float, float]:
        xi = delta / r
        if xi >= 1.0:
            if not getattr(self, "_xi_warned", False):
                logger.warning("shrink factor xi=%.3f >= 1 at small t; capping at %.2f and rescaling delta", xi, XI_CAP)
                self._xi_warned = True
            xi = XI_CAP
            delta = xi * r
        return delta, xi


class DrsSchedule(_ScheduleBase):
    """Polynomially decaying step sizes tuned by a path-length budget.

    delta ~ t^(-1/4), eta ~ t^(-3/4), beta and gamma ~ t^(-1/2), xi = delta/r.
    path_length = 0 is the stationary tuning.
    """

    def __init__(self, constants: ScheduleConstants, path_length: float = 0.0):
        if path_length < 0:
            raise ValueError("path_length must be nonnegative")
        c = constants
        self.constants = c
        self.path_length = float(path_length)
        self._pace = c.radius_outer**2 / 2.0 + c.radius_outer * self.path_length
        self._delta0 = math.sqrt(c.degree * c.loss_bound / c.lipschitz_eff)
        self._eta0 = math.sqrt(1.0 / (c.degree * c.loss_bound * c.lipschitz_eff))

    def at(self, t: int) -> ScheduleValues:
        if t < 1:
            raise ValueError("round index starts at 1")
        c = self.constants
        quarter = (self._pace / t) ** 0.25
        delta = self._delta0 * quarter
        eta = self._eta0 * quarter**3
        sqrt_t = math.sqrt(t)
        beta = 1.0 / (c.constraint_bound * sqrt_t)
        gamma = 1.0 / (c.constraint_bound**2 * sqrt_t)
        delta, xi = self._cap_xi(delta, c.radius_inner)
        return ScheduleValues(delta=delta, eta=eta, beta=beta, gamma=gamma, xi=xi)


class EnsembleSchedule(_ScheduleBase):
    """Path-length-free decay used under the expert ensemble.

    Only the smoothing/dual schedules matter here; eta comes from the expert
    pool (the value reported is the smallest pool step). constant_delta fixes
    delta at its horizon-end value for the whole run.
    """

    def __init__(self, constants: ScheduleConstants, horizon: int, constant_delta: bool = False):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        c = constants
        self.constants = c
        self.horizon = int(horizon)
        self.constant_delta = bool(constant_delta)
        self._delta0 = math.sqrt(c.degree * c.loss_bound * c.radius_outer / c.lipschitz_eff)
        self._eta0 = math.sqrt(c.radius_outer**3 / (c.degree * c.loss_bound * c.lipschitz_eff))

    def at(self, t: int) -> ScheduleValues:
        if t < 1:
            raise ValueError("round index starts at 1")
        c = self.constants
        t_delta = self.horizon if self.constant_delta else t
        delta = self._delta0 * t_delta**-0.25
        eta = self._eta0 * t**-0.75
        sqrt_t = math.sqrt(t)
        beta = 1.0 / (c.constraint_bound * sqrt_t)
        gamma = 1.0 / (c.constraint_bound**2 * sqrt_t)
        delta, xi = self._cap_xi(delta, c.radius_inner)
        return ScheduleValues(delta=delta, eta=eta, beta=beta, gamma=gamma, xi=xi)


class ConstantSchedule(_ScheduleBase):
    """Fixed hyperparameters for every round (the BanSaP-style tuning)."""

    def __init__(self, values: ScheduleValues):
        if min(values.delta, values.eta, values.beta, values.gamma) <= 0:
            raise ValueError("schedule values must be positive")
        if not 0 <= values.xi < 1:
            raise ValueError("xi must lie in [0, 1)")
        self.values = values

    def at(self, t: int) -> ScheduleValues:
        if t < 1:
            raise ValueError("round index starts at 1")
        return self.values


def freeze_schedule(schedule: _ScheduleBase, t: int) -> ConstantSchedule:
    """Constant schedule equal to `schedule` evaluated at round t."""
    return ConstantSchedule(schedule.at(t))


@dataclass
class AgentState:
    """Everything one agent carries between rounds."""

    z: np.ndarray  # primal iterate, inside the shrunk box
    u: np.ndarray  # unit perturbation used to build x
    delta: float  # smoothing radius used to build x
    x: np.ndarray  # z + delta*u, pre-adjustment
    x_played: np.ndarray  # action actually played
    q: float  # dual variable, >= 0


def _play(x: np.ndarray, generation, adjust: bool, adjust_mode: str, self_index) -> np.ndarray:
    if adjust and generation is not None:
        return adjust_allocation(x, generation, adjust_mode, self_index)
    return x


def init_state(
    box: Box,
    schedule: _ScheduleBase,
    rng,
    *,
    generation=None,
    adjust: bool = False,
    adjust_mode: str = "proportional",
    self_index: int | None = None,
    start=None,
) -> AgentState:
    """Round-1 state: iterate at the box center (or `start`), perturbed play."""
    v = schedule.at(1)
    if start is None:
        z = np.full(box.dim, box.center)
    else:
        z = project_shrunk(start, box, v.xi)
    u = sample_unit_vector(box.dim, rng)
    x = z + v.delta * u
    x_played = _play(x, generation, adjust, adjust_mode, self_index)
    return AgentState(z=z, u=u, delta=v.delta, x=x, x_played=x_played, q=0.0)


def drs_round(
    state: AgentState,
    schedule: _ScheduleBase,
    observed: tuple[float, float],
    box: Box,
    rng,
    *,
    t: int,
    generation=None,
    adjust: bool = False,
    adjust_mode: str = "proportional",
    self_index: int | None = None,
) -> tuple[AgentState, np.ndarray]:
    """One synchronous update from the previous round's observed (loss, constraint).

    The dual absorbs the observation first so the direction estimate uses the
    current multiplier; the primal then steps and the fresh play is perturbed
    (and adjusted when enabled, so the played constraint value stays <= 0).
    """
    f_prev, g_prev = observed
    v = schedule.at(t)
    q = update_dual(state.q, g_prev, v.gamma, v.beta)
    direction = estimate_direction(f_prev, g_prev, state.u, q, state.delta, box.dim)
    z = update_primal(state.z, direction, v.eta, box, v.xi)
    u = sample_unit_vector(box.dim, rng)
    x = z + v.delta * u
    x_played = _play(x, generation, adjust, adjust_mode, self_index)
    return AgentState(z=z, u=u, delta=v.delta, x=x, x_played=x_played, q=q), x_played


class DrsAgent:
    """Stateful wrapper running the primal-dual update for one node."""

    def __init__(
        self,
        box: Box,
        schedule: _ScheduleBase,
        rng,
        *,
        adjust: bool = False,
        adjust_mode: str = "proportional",
        self_index: int | None = None,
        start=None,
    ):
        self.box = box
        self.schedule = schedule
        self.rng = rng
        self.adjust = adjust
        self.adjust_mode = adjust_mode
        self.self_index = self_index
        self.start_point = start
        self.state: AgentState | None = None

    def start(self, generation=None) -> np.ndarray:
        self.state = init_state(
            self.box,
            self.schedule,
            self.rng,
            generation=generation,
            adjust=self.adjust,
            adjust_mode=self.adjust_mode,
            self_index=self.self_index,
            start=self.start_point,
        )
        return self.state.x_played

    def step(self, t: int, loss_observed: float, constraint_observed: float, generation=None) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("call start() before step()")
        self.state, x_played = drs_round(
            self.state,
            self.schedule,
            (loss_observed, constraint_observed),
            self.box,
            self.rng,
            t=t,
            generation=generation,
            adjust=self.adjust,
            adjust_mode=self.adjust_mode,
            self_index=self.self_index,
        )
        return x_played
