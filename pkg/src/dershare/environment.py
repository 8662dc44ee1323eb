"""Energy supply/demand processes and the satisfaction, loss, constraint evaluators.

Sampling is counter-based (one RNG per (seed, round)), so any round can be
regenerated independently of call order, and the evaluators are pure functions
of the current allocations: both properties keep round-synchronous simulation
deterministic and safe to parallelize.
"""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GenerationProcess",
    "DemandModel",
    "AllocationVector",
    "Environment",
    "received_totals",
    "satisfaction",
    "loss",
    "loss_discounted",
    "constraint",
]

GENERATION_KINDS = ("constant", "iid-uniform", "piecewise-stationary", "drifting-mean")

# stream tags keep environment draws independent of agent draws under one master seed
_ENV_STREAM = 0


class GenerationProcess:
    """Per-node renewable generation d_{i,t}: a mean schedule plus bounded noise.

    kinds:
      constant              d equals the mean exactly, every round
      iid-uniform           uniform on [mean - w, mean + w], clipped at 0
      piecewise-stationary  segment-wise means with change points, plus noise
      drifting-mean         mean ramps linearly start -> end over the horizon
    """

    def __init__(
        self,
        kind: str,
        means,
        *,
        half_widths=None,
        change_points=None,
        means_end=None,
        horizon: int | None = None,
        seed: int = 0,
    ):
        if kind not in GENERATION_KINDS:
            raise ValueError(f"unknown generation kind {kind!r}, expected one of {GENERATION_KINDS}")
        self.kind = kind
        self.seed = int(seed)
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

        means = np.array(means, dtype=float)
        if kind == "piecewise-stationary":
            if means.ndim != 2:
                raise ValueError("piecewise-stationary means must be one row per segment")
            if change_points is None or len(change_points) != means.shape[0] - 1:
                raise ValueError("need one change point per segment boundary")
            cps = [int(t) for t in change_points]
            if any(t < 2 for t in cps) or sorted(cps) != cps:
                raise ValueError("change points must be ascending round indices >= 2")
            self.change_points = cps
            self.node_count = means.shape[1]
        else:
            if means.ndim != 1:
                raise ValueError("means must be a vector (one entry per node)")
            self.change_points = []
            self.node_count = means.shape[0]
        if (means < 0).any():
            raise ValueError("generation means must be nonnegative")
        self._means = means

        if kind == "drifting-mean":
            if means_end is None or horizon is None:
                raise ValueError("drifting-mean needs means_end and horizon")
            end = np.array(means_end, dtype=float)
            if end.shape != means.shape:
                raise ValueError("means_end must match means in shape")
            if (end < 0).any():
                raise ValueError("generation means must be nonnegative")
            self._means_end = end
            self.horizon = int(horizon)
            if self.horizon < 1:
                raise ValueError("horizon must be >= 1")
        else:
            self._means_end = None
            self.horizon = int(horizon) if horizon is not None else None

        if half_widths is None:
            self._half_widths = np.zeros(self.node_count)
        else:
            hw = np.broadcast_to(np.array(half_widths, dtype=float), (self.node_count,)).copy()
            if (hw < 0).any():
                raise ValueError("half widths must be nonnegative")
            self._half_widths = hw
        if kind == "constant" and self._half_widths.any():
            raise ValueError("constant generation takes no noise width")

    def mean(self, t: int) -> np.ndarray:
        """Expected generation at round t (>= 1)."""
        if t < 1:
            raise ValueError("round index starts at 1")
        if self.kind == "piecewise-stationary":
            seg = bisect.bisect_right(self.change_points, t)
            return self._means[seg]
        if self.kind == "drifting-mean":
            if self.horizon == 1:
                return self._means
            frac = (min(t, self.horizon) - 1) / (self.horizon - 1)
            return self._means + frac * (self._means_end - self._means)
        return self._means

    def sample(self, t: int) -> np.ndarray:
        """Draw d_{.,t} >= 0; deterministic given (seed, t) regardless of call order."""
        mu = self.mean(t)
        if self.kind == "constant" or not self._half_widths.any():
            return mu.copy()
        rng = np.random.default_rng([self.seed, _ENV_STREAM, int(t)])
        noise = self._half_widths * (2.0 * rng.random(self.node_count) - 1.0)
        return np.maximum(mu + noise, 0.0)

    def mean_average(self, horizon: int) -> np.ndarray:
        """Per-node average of the mean schedule over rounds 1..horizon."""
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.kind == "piecewise-stationary":
            bounds = [1] + [min(cp, horizon + 1) for cp in self.change_points] + [horizon + 1]
            total = np.zeros(self.node_count)
            for seg in range(self._means.shape[0]):
                total += max(0, bounds[seg + 1] - bounds[seg]) * self._means[seg]
            return total / horizon
        if self.kind == "drifting-mean":
            return (self.mean(1) + self.mean(horizon)) / 2.0
        return self._means.copy()

    def mean_max(self, horizon: int) -> np.ndarray:
        """Per-node maximum of the mean schedule over rounds 1..horizon."""
        if self.kind == "piecewise-stationary":
            live = [seg for seg in range(self._means.shape[0]) if seg == 0 or self.change_points[seg - 1] <= horizon]
            return self._means[live].max(axis=0)
        if self.kind == "drifting-mean":
            return np.maximum(self.mean(1), self.mean(horizon))
        return self._means.copy()

    def upper_bound(self, horizon: int) -> np.ndarray:
        """Per-node almost-sure upper bound on sampled generation."""
        return self.mean_max(horizon) + self._half_widths


class DemandModel:
    """Per-node demand l_{i,t} > 0; balanced demand is constant over rounds."""

    def __init__(self, kind: str, *, demands=None, schedule=None):
        if kind not in ("balanced", "explicit"):
            raise ValueError(f"unknown demand kind {kind!r}")
        self.kind = kind
        if schedule is not None:
            self._starts = sorted(schedule)
            self._by_start = {int(t): np.array(schedule[t], dtype=float) for t in schedule}
            if self._starts[0] != 1:
                raise ValueError("explicit demand schedule must cover round 1")
            vals = np.concatenate(list(self._by_start.values()))
        else:
            if demands is None:
                raise ValueError("demand model needs demands or a schedule")
            self._starts = [1]
            self._by_start = {1: np.array(demands, dtype=float)}
            vals = self._by_start[1]
        if (vals <= 0).any():
            raise ValueError("demands must be strictly positive")
        self.node_count = len(self._by_start[self._starts[0]])
        for v in self._by_start.values():
            if len(v) != self.node_count:
                raise ValueError("all demand rows must have one entry per node")

    @classmethod
    def balanced(cls, generation: GenerationProcess, horizon: int) -> "DemandModel":
        """Equal per-node demand matching the network's average total generation."""
        total = generation.mean_average(horizon).sum()
        if total <= 0:
            raise ValueError("balanced demand needs positive total generation")
        share = total / generation.node_count
        return cls("balanced", demands=np.full(generation.node_count, share))

    @classmethod
    def from_csv(cls, path, node_count: int) -> "DemandModel":
        """Explicit demand file with header `t,node,demand`; values carry forward."""
        path = Path(path)
        schedule: dict[int, np.ndarray] = {}
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [f.strip() for f in reader.fieldnames[:3]] != ["t", "node", "demand"]:
                raise ValueError(f"{path}: expected header 't,node,demand'")
            for lineno, row in enumerate(reader, start=2):
                try:
                    t, node, demand = int(row["t"]), int(row["node"]), float(row["demand"])
                except (TypeError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad row {row}") from exc
                if not 0 <= node < node_count:
                    raise ValueError(f"{path}:{lineno}: node {node} out of range")
                schedule.setdefault(t, np.full(node_count, np.nan))[node] = demand
        if 1 not in schedule or np.isnan(schedule[1]).any():
            raise ValueError(f"{path}: round 1 must define demand for every node")
        # carry missing entries forward from the previous round with data
        last = schedule[1].copy()
        for t in sorted(schedule):
            row = schedule[t]
            row[np.isnan(row)] = last[np.isnan(row)]
            last = row
            schedule[t] = row
        return cls("explicit", schedule=schedule)

    def demand(self, t: int) -> np.ndarray:
        if t < 1:
            raise ValueError("round index starts at 1")
        idx = bisect.bisect_right(self._starts, t) - 1
        return self._by_start[self._starts[idx]]

    def min_over(self, horizon: int) -> float:
        """Smallest demand over rounds 1..horizon (the Lipschitz constant is 1/this)."""
        lows = [self._by_start[s].min() for s in self._starts if s <= horizon]
        return float(min(lows))


@dataclass
class AllocationVector:
    """One node's allocation over its closed neighborhood, aligned with `members`."""

    owner: int
    members: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.members),):
            raise ValueError("values must align with neighborhood members")
        if (self.values < 0).any():
            raise ValueError("allocations must be nonnegative")
        if self.owner not in self.members:
            raise ValueError("owner must belong to its own neighborhood")

    def total(self) -> float:
        return float(self.values.sum())


def received_totals(graph, allocations) -> np.ndarray:
    """Energy arriving at each node: sum over senders k of x_k(i)."""
    totals = np.zeros(graph.node_count)
    for a in allocations:
        totals[list(a.members)] += a.values
    return totals


def satisfaction(i: int, graph, allocations, demand: float) -> float:
    """Fraction of node i's demand covered by what it received, capped at 1."""
    if demand <= 0:
        raise ValueError("demand must be positive")
    received = received_totals(graph, allocations)[i]
    return min(received / demand, 1.0)


def loss(i: int, graph, allocations, demands) -> float:
    """Average unmet-demand level over node i's closed neighborhood, in [0, 1]."""
    demands = np.asarray(demands, dtype=float)
    if (demands <= 0).any():
        raise ValueError("demands must be positive")
    ratios = received_totals(graph, allocations) / demands
    sat = np.minimum(ratios, 1.0)
    members = list(graph.neighborhood(i).members)
    return float(1.0 - sat[members].mean())


def loss_discounted(i: int, graph, allocations, demands, discounts) -> float:
    """Like `loss`, but transfers from k to j shrink by the edge factor c(j,k).

    Discounts must lie in (0,1] with unit diagonal (keeping your own energy is
    free). With all-ones discounts this equals `loss` exactly.
    """
    demands = np.asarray(demands, dtype=float)
    if (demands <= 0).any():
        raise ValueError("demands must be positive")
    c = np.asarray(discounts, dtype=float)
    n = graph.node_count
    if c.shape != (n, n):
        raise ValueError(f"discounts must be an {n}x{n} matrix")
    if (c <= 0).any() or (c > 1).any():
        raise ValueError("discounts must lie in (0, 1]")
    if not np.allclose(np.diag(c), 1.0):
        raise ValueError("self-discounts c(i,i) must equal 1")
    totals = np.zeros(n)
    for a in allocations:
        m = list(a.members)
        totals[m] += c[m, a.owner] * a.values
    sat = np.minimum(totals / demands, 1.0)
    members = list(graph.neighborhood(i).members)
    return float(1.0 - sat[members].mean())


def constraint(i: int, allocation: AllocationVector, generation: float) -> float:
    """Distributed-minus-generated energy for node i; must stay <= 0 to be feasible."""
    return float(allocation.values.sum() - generation)


class Environment:
    """Bundles graph, generation, and demand; one sample per round."""

    def __init__(self, graph, generation: GenerationProcess, demand: DemandModel):
        if generation.node_count != graph.node_count:
            raise ValueError("generation process size must match the graph")
        if demand.node_count != graph.node_count:
            raise ValueError("demand model size must match the graph")
        self.graph = graph
        self.generation = generation
        self.demand = demand

    def sample_round(self, t: int):
        """(d_{.,t}, l_{.,t}) for round t >= 1; deterministic given (seed, t)."""
        if t < 1:
            raise ValueError("round index starts at 1")
        return self.generation.sample(t), self.demand.demand(t)
