"""Round-synchronous simulation harness: config, run loop, metrics, CSV/JSON output.

Round barrier: sample the environment, let every agent act, score all plays,
then hand each agent only the scalar satisfaction-derived feedback from its
own neighborhood (demands and generation never cross agent boundaries).
Feedback always lags one round, matching the bandit protocol. One master seed
spawns a counter-based environment stream plus one stream per agent keyed by
node id, so adding agents does not perturb anyone else's draws.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .drs import Box, DrsAgent, DrsSchedule, EnsembleSchedule, ScheduleConstants
from .ensemble import MansdrsAgent, build_pool, meta_rate
from .environment import DemandModel, Environment, GenerationProcess
from .network import NetworkGraph, build_from_edges, build_from_positions, load_edge_list, load_positions_csv
from .oracles import (
    BansapAgent,
    ComparatorSequence,
    NeighborhoodShortfall,
    NeighborhoodShortfallSum,
    minimize_on_box,
    path_length,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "load_config",
    "RoundRecords",
    "RunResult",
    "run",
    "violation_total",
    "dynamic_regret",
    "static_regret",
    "satisfaction_report",
    "build_dynamic_comparators",
    "build_static_comparators",
    "export_comparators_csv",
    "write_outputs",
]

ALGORITHMS = ("drs", "drs-adj", "mansdrs", "mansdrs-adj", "bansap")

_AGENT_STREAM = 1

CSV_BASE_COLUMNS = ["t", "node", "loss", "constraint", "violation", "satisfaction", "dual", "generation", "demand"]


class ConfigError(ValueError):
    """Configuration problem; message lists `section.field: problem` lines."""


@dataclass
class RunConfig:
    graph: NetworkGraph
    generation: GenerationProcess
    demand: DemandModel
    algorithm: str
    horizon: int
    seed: int
    path_length_estimate: float = 0.0
    adjust_mode: str = "proportional"
    constant_delta: bool = False
    meta_rate_override: float | None = None
    bansap_freeze_at: int | None = None
    x_max: np.ndarray | None = None
    loss_bound: float = 1.0
    constraint_bound: np.ndarray | None = None
    lipschitz: float | None = None
    with_oracle: bool = False
    oracle_tol: float = 1e-3
    output_dir: Path | None = None

    def __post_init__(self):
        errors = []
        if self.algorithm not in ALGORITHMS:
            errors.append(f"algorithm.name: {self.algorithm!r} not in {ALGORITHMS}")
        if self.horizon < 1:
            errors.append(f"horizon: must be >= 1, got {self.horizon}")
        if self.seed < 0:
            errors.append(f"seed: must be nonnegative, got {self.seed}")
        if self.path_length_estimate < 0:
            errors.append("algorithm.path_length_estimate: must be nonnegative")
        if self.adjust_mode not in ("proportional", "self-only"):
            errors.append(f"algorithm.adjust_mode: {self.adjust_mode!r} not in ('proportional', 'self-only')")
        n = self.graph.node_count
        if self.generation.node_count != n:
            errors.append(f"generation: sized for {self.generation.node_count} nodes, graph has {n}")
        if self.demand.node_count != n:
            errors.append(f"demand: sized for {self.demand.node_count} nodes, graph has {n}")
        if errors:
            # bail before deriving constants from inconsistently sized pieces
            raise ConfigError("\n".join(errors))
        if self.x_max is None:
            x = self.generation.mean_max(self.horizon)
            upper = self.generation.upper_bound(self.horizon)
            x = np.where(x > 0, x, np.maximum(upper, 1.0))
            self.x_max = x
        else:
            self.x_max = np.broadcast_to(np.asarray(self.x_max, dtype=float), (n,)).copy()
            if (self.x_max <= 0).any():
                errors.append("constants.x_max: entries must be positive")
        if self.lipschitz is None:
            dmin = self.demand.min_over(self.horizon)
            self.lipschitz = 1.0 / dmin
        elif self.lipschitz <= 0:
            errors.append("constants.lipschitz: must be positive")
        if self.constraint_bound is None:
            upper = self.generation.upper_bound(self.horizon)
            dims = np.array([self.graph.neighborhood(i).local_dim for i in range(n)], dtype=float)
            self.constraint_bound = dims * self.x_max + upper
        else:
            self.constraint_bound = np.broadcast_to(np.asarray(self.constraint_bound, dtype=float), (n,)).copy()
            if (self.constraint_bound <= 0).any():
                errors.append("constants.constraint_bound: entries must be positive")
        if self.loss_bound <= 0:
            errors.append("constants.loss_bound: must be positive")
        if errors:
            raise ConfigError("\n".join(errors))

    @property
    def adjust(self) -> bool:
        return self.algorithm.endswith("-adj")

    def constants_for(self, i: int) -> ScheduleConstants:
        box = self.box_for(i)
        return ScheduleConstants(
            degree=max(1, self.graph.degree(i)),
            loss_bound=self.loss_bound,
            constraint_bound=float(self.constraint_bound[i]),
            lipschitz=float(self.lipschitz),
            radius_outer=box.outer_radius,
            radius_inner=box.inner_radius,
        )

    def box_for(self, i: int) -> Box:
        return Box(dim=self.graph.neighborhood(i).local_dim, x_max=float(self.x_max[i]))


def _cfg_get(section: dict, key: str, errors: list, path: str, required=True, default=None):
    if key not in section:
        if required:
            errors.append(f"{path}.{key}: missing")
        return default
    return section[key]


def _build_graph(section, errors) -> NetworkGraph | None:
    kind = _cfg_get(section, "type", errors, "graph")
    try:
        if kind == "positions":
            threshold = _cfg_get(section, "threshold", errors, "graph")
            if "path" in section:
                positions = load_positions_csv(section["path"])
            else:
                positions = _cfg_get(section, "coords", errors, "graph")
            if positions is None or threshold is None:
                return None
            return build_from_positions(positions, float(threshold))
        if kind == "edges":
            n = _cfg_get(section, "n", errors, "graph")
            if "path" in section:
                edges = load_edge_list(section["path"])
            else:
                edges = _cfg_get(section, "edges", errors, "graph")
            if n is None or edges is None:
                return None
            return build_from_edges(int(n), edges)
        if kind is not None:
            errors.append(f"graph.type: unknown {kind!r}, expected 'positions' or 'edges'")
    except (ValueError, OSError) as exc:
        errors.append(f"graph: {exc}")
    return None


def _build_generation(section, horizon, seed, errors) -> GenerationProcess | None:
    kind = _cfg_get(section, "kind", errors, "generation")
    if kind is None:
        return None
    try:
        return GenerationProcess(
            kind,
            _cfg_get(section, "means", errors, "generation"),
            half_widths=section.get("half_widths"),
            change_points=section.get("change_points"),
            means_end=section.get("means_end"),
            horizon=horizon,
            seed=seed,
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"generation: {exc}")
        return None


def _build_demand(section, generation, horizon, node_count, errors) -> DemandModel | None:
    kind = _cfg_get(section, "kind", errors, "demand")
    try:
        if kind == "balanced":
            if generation is None:
                return None
            return DemandModel.balanced(generation, horizon)
        if kind == "explicit":
            if "path" in section:
                return DemandModel.from_csv(section["path"], node_count)
            demands = _cfg_get(section, "demands", errors, "demand")
            if demands is None:
                return None
            return DemandModel("explicit", demands=demands)
        if kind is not None:
            errors.append(f"demand.kind: unknown {kind!r}, expected 'balanced' or 'explicit'")
    except (ValueError, OSError) as exc:
        errors.append(f"demand: {exc}")
    return None


def load_config(source, **overrides) -> RunConfig:
    """Build a RunConfig from a JSON file/dict; CLI-style overrides win.

    Recognized overrides: algorithm, horizon, seed, with_oracle, output_dir.
    """
    if isinstance(source, (str, Path)):
        with open(source) as fh:
            raw = json.load(fh)
    else:
        raw = dict(source)

    errors: list[str] = []
    algo_section = raw.get("algorithm", {})
    if isinstance(algo_section, str):
        algo_section = {"name": algo_section}
    algorithm = overrides.get("algorithm") or algo_section.get("name")
    if algorithm is None:
        errors.append("algorithm.name: missing")
    horizon = overrides.get("horizon") or raw.get("horizon")
    if horizon is None:
        errors.append("horizon: missing")
    else:
        horizon = int(horizon)
    seed = overrides.get("seed")
    if seed is None:
        seed = raw.get("seed", 0)
    seed = int(seed)

    graph = _build_graph(raw.get("graph", {}), errors)
    generation = _build_generation(raw.get("generation", {}), horizon, seed, errors)
    node_count = graph.node_count if graph is not None else 0
    demand = _build_demand(raw.get("demand", {}), generation, horizon or 1, node_count, errors)

    constants = raw.get("constants", {})
    output = raw.get("output", {})
    out_dir = overrides.get("output_dir") or output.get("dir")

    if errors or graph is None or generation is None or demand is None or algorithm is None or horizon is None:
        if not errors:
            errors.append("config: incomplete")
        raise ConfigError("\n".join(errors))

    try:
        return RunConfig(
            graph=graph,
            generation=generation,
            demand=demand,
            algorithm=algorithm,
            horizon=horizon,
            seed=seed,
            path_length_estimate=float(algo_section.get("path_length_estimate", 0.0)),
            adjust_mode=algo_section.get("adjust_mode", "proportional"),
            constant_delta=bool(algo_section.get("constant_delta", False)),
            meta_rate_override=algo_section.get("meta_rate"),
            bansap_freeze_at=algo_section.get("bansap_freeze_at"),
            x_max=constants.get("x_max"),
            loss_bound=float(constants.get("loss_bound", 1.0)),
            constraint_bound=constants.get("constraint_bound"),
            lipschitz=constants.get("lipschitz"),
            with_oracle=bool(overrides.get("with_oracle", raw.get("with_oracle", False))),
            oracle_tol=float(constants.get("oracle_tol", 1e-3)),
            output_dir=Path(out_dir) if out_dir else None,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config: {exc}") from None


class RoundRecords:
    """Columnar per-round, per-node results.

    `satisfaction` holds the unclipped received/demand ratio (values above 1
    mean surplus); the loss itself is computed from the capped value.
    """

    def __init__(self, horizon: int, node_count: int, local_dims):
        self.horizon = horizon
        self.node_count = node_count
        self.local_dims = list(local_dims)
        shape = (horizon, node_count)
        self.loss = np.zeros(shape)
        self.constraint = np.zeros(shape)
        self.violation = np.zeros(shape)
        self.satisfaction = np.zeros(shape)
        self.dual = np.zeros(shape)
        self.generation = np.zeros(shape)
        self.demand = np.zeros(shape)
        self.allocations = [np.zeros((horizon, d)) for d in self.local_dims]

    def to_csv(self, path) -> None:
        path = Path(path)
        max_dim = max(self.local_dims) if self.local_dims else 0
        header = CSV_BASE_COLUMNS + [f"alloc_{k}" for k in range(max_dim)]
        lines = [",".join(header)]
        for t in range(self.horizon):
            for i in range(self.node_count):
                cells = [
                    str(t + 1),
                    str(i),
                    repr(float(self.loss[t, i])),
                    repr(float(self.constraint[t, i])),
                    repr(float(self.violation[t, i])),
                    repr(float(self.satisfaction[t, i])),
                    repr(float(self.dual[t, i])),
                    repr(float(self.generation[t, i])),
                    repr(float(self.demand[t, i])),
                ]
                cells += [repr(float(v)) for v in self.allocations[i][t]]
                cells += [""] * (max_dim - self.local_dims[i])
                lines.append(",".join(cells))
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path) -> "RoundRecords":
        path = Path(path)
        lines = path.read_text().splitlines()
        if not lines:
            raise ValueError(f"{path}: empty records file")
        header = lines[0].split(",")
        if header[: len(CSV_BASE_COLUMNS)] != CSV_BASE_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header[:9]}, expected {CSV_BASE_COLUMNS}")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            cells = line.split(",")
            if len(cells) < len(CSV_BASE_COLUMNS):
                raise ValueError(f"{path}:{lineno}: expected at least {len(CSV_BASE_COLUMNS)} columns")
            try:
                t, node = int(cells[0]), int(cells[1])
                nums = [float(c) for c in cells[2:9]]
                alloc = [float(c) for c in cells[9:] if c != ""]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            rows.append((t, node, nums, alloc))
        horizon = max(r[0] for r in rows)
        node_count = max(r[1] for r in rows) + 1
        dims = [0] * node_count
        for _, node, _, alloc in rows:
            dims[node] = max(dims[node], len(alloc))
        rec = cls(horizon, node_count, dims)
        for t, node, nums, alloc in rows:
            rec.loss[t - 1, node] = nums[0]
            rec.constraint[t - 1, node] = nums[1]
            rec.violation[t - 1, node] = nums[2]
            rec.satisfaction[t - 1, node] = nums[3]
            rec.dual[t - 1, node] = nums[4]
            rec.generation[t - 1, node] = nums[5]
            rec.demand[t - 1, node] = nums[6]
            rec.allocations[node][t - 1, : len(alloc)] = alloc
        return rec


@dataclass
class RunResult:
    records: RoundRecords
    summary: dict
    config: RunConfig
    comparators: dict = field(default_factory=dict)


def _make_agents(config: RunConfig):
    graph = config.graph
    agents = []
    for i in range(graph.node_count):
        nb = graph.neighborhood(i)
        box = config.box_for(i)
        constants = config.constants_for(i)
        rng = np.random.default_rng([config.seed, _AGENT_STREAM, i])
        self_index = nb.index_of(i)
        if config.algorithm in ("drs", "drs-adj"):
            schedule = DrsSchedule(constants, config.path_length_estimate)
            agents.append(
                DrsAgent(box, schedule, rng, adjust=config.adjust, adjust_mode=config.adjust_mode, self_index=self_index)
            )
        elif config.algorithm in ("mansdrs", "mansdrs-adj"):
            schedule = EnsembleSchedule(constants, config.horizon, config.constant_delta)
            pool = build_pool(config.horizon, constants, box)
            if config.meta_rate_override is not None:
                eps = float(config.meta_rate_override)
            else:
                grad_bound = constants.degree * constants.loss_bound / schedule.at(config.horizon).delta
                eps = meta_rate(config.horizon, grad_bound, constants.radius_outer)
            agents.append(
                MansdrsAgent(
                    box, schedule, pool, eps, rng, adjust=config.adjust, adjust_mode=config.adjust_mode, self_index=self_index
                )
            )
        else:  # bansap
            agents.append(BansapAgent(box, constants, config.horizon, rng, freeze_at=config.bansap_freeze_at))
    return agents


def run(config: RunConfig) -> RunResult:
    """Simulate `horizon` rounds; deterministic given (config, seed)."""
    t_start = time.perf_counter()
    graph = config.graph
    n = graph.node_count
    env = Environment(graph, config.generation, config.demand)
    agents = _make_agents(config)
    members = [np.array(graph.neighborhood(i).members) for i in range(n)]
    records = RoundRecords(config.horizon, n, [len(m) for m in members])

    f_prev = np.zeros(n)
    g_prev = np.zeros(n)
    for t in range(1, config.horizon + 1):
        d, demand = env.sample_round(t)
        plays = []
        if t == 1:
            for i, agent in enumerate(agents):
                plays.append(agent.start(d[i]))
        else:
            for i, agent in enumerate(agents):
                plays.append(agent.step(t, f_prev[i], g_prev[i], d[i]))

        received = np.zeros(n)
        for i in range(n):
            received[members[i]] += plays[i]
        ratio = received / demand
        capped = np.minimum(ratio, 1.0)
        row = t - 1
        for i in range(n):
            f_prev[i] = 1.0 - capped[members[i]].mean()
            g_prev[i] = plays[i].sum() - d[i]
            records.allocations[i][row] = plays[i]
            records.dual[row, i] = agents[i].state.q
        records.loss[row] = f_prev
        records.constraint[row] = g_prev
        records.violation[row] = np.maximum(g_prev, 0.0)
        records.satisfaction[row] = ratio
        records.generation[row] = d
        records.demand[row] = demand

    summary = {
        "algorithm": config.algorithm,
        "horizon": config.horizon,
        "seed": config.seed,
        "node_count": n,
        "cumulative_loss": records.loss.sum(axis=0).tolist(),
        "mean_cumulative_loss": float(records.loss.sum(axis=0).mean()),
        "violation_total": violation_total(records).tolist(),
        "mean_violation_total": float(violation_total(records).mean()),
    }

    result = RunResult(records=records, summary=summary, config=config)
    if config.with_oracle:
        dyn = build_dynamic_comparators(graph, records, config.x_max, tol=config.oracle_tol)
        stat = build_static_comparators(graph, records, config.x_max, tol=config.oracle_tol)
        result.comparators = {"dynamic": dyn, "static": stat}
        summary["dynamic_regret"] = dynamic_regret(records, dyn).tolist()
        summary["static_regret"] = static_regret(records, stat).tolist()
        summary["path_length"] = [path_length(c.points) for c in dyn]
    summary["wall_clock_seconds"] = time.perf_counter() - t_start
    return result


def violation_total(records: RoundRecords) -> np.ndarray:
    """Summed positive parts of the played constraint values, per node."""
    return records.violation.sum(axis=0)


def dynamic_regret(records: RoundRecords, comparators) -> np.ndarray:
    """Cumulative played loss minus the comparator sequence's loss, per node."""
    out = np.zeros(len(comparators))
    for k, comp in enumerate(comparators):
        if comp.horizon != records.horizon:
            raise ValueError(f"comparator for node {comp.node} has length {comp.horizon}, records have {records.horizon}")
        out[k] = records.loss[:, comp.node].sum() - comp.losses.sum()
    return out


def static_regret(records: RoundRecords, best_fixed) -> np.ndarray:
    """Regret against the best fixed action in hindsight (constant comparators)."""
    return dynamic_regret(records, best_fixed)


def satisfaction_report(records: RoundRecords, window: int) -> dict:
    """Mean received/demand ratio over the last `window` rounds, plus the
    keep-everything baseline (each node consumes only its own generation)."""
    if not 1 <= window <= records.horizon:
        raise ValueError(f"window must lie in [1, {records.horizon}]")
    tail = slice(records.horizon - window, records.horizon)
    ratios = records.satisfaction[tail].mean(axis=0)
    baseline = (records.generation[tail] / records.demand[tail]).mean(axis=0)
    return {"ratio": ratios, "no_sharing_ratio": baseline, "window": window}


def _received_matrix(graph: NetworkGraph, records: RoundRecords) -> np.ndarray:
    received = np.zeros((records.horizon, records.node_count))
    for i in range(records.node_count):
        members = list(graph.neighborhood(i).members)
        received[:, members] += records.allocations[i]
    return received


def node_loss_table(graph: NetworkGraph, records: RoundRecords, i: int) -> NeighborhoodShortfallSum:
    """Per-round separable losses for node i with everyone else's plays frozen."""
    members = list(graph.neighborhood(i).members)
    received = _received_matrix(graph, records)
    baselines = received[:, members] - records.allocations[i]
    demands = records.demand[:, members]
    return NeighborhoodShortfallSum(baselines, demands)


def build_dynamic_comparators(graph, records, x_max, tol: float = 1e-3, **kwargs) -> list[ComparatorSequence]:
    """Per-round minimizers of each node's loss (the time-varying reference)."""
    out = []
    for i in range(records.node_count):
        table = node_loss_table(graph, records, i)
        box = Box(dim=table.dim, x_max=float(np.asarray(x_max)[i]))
        points = np.zeros((records.horizon, table.dim))
        losses = np.zeros(records.horizon)
        for t in range(records.horizon):
            fn = NeighborhoodShortfall(table.baselines[t], table.demands[t])
            points[t] = minimize_on_box(fn, box, tol=tol, **kwargs)
            losses[t] = fn(points[t])
        out.append(ComparatorSequence(node=i, kind="dynamic", points=points, losses=losses))
    return out


def build_static_comparators(graph, records, x_max, tol: float = 1e-3, **kwargs) -> list[ComparatorSequence]:
    """Best fixed action in hindsight for each node, tiled across rounds."""
    out = []
    for i in range(records.node_count):
        table = node_loss_table(graph, records, i)
        box = Box(dim=table.dim, x_max=float(np.asarray(x_max)[i]))
        point = minimize_on_box(table, box, tol=tol, **kwargs)
        per_round = np.array(
            [NeighborhoodShortfall(table.baselines[t], table.demands[t])(point) for t in range(records.horizon)]
        )
        points = np.tile(point, (records.horizon, 1))
        out.append(ComparatorSequence(node=i, kind="static", points=points, losses=per_round))
    return out


def export_comparators_csv(comparators, path) -> None:
    """Audit export: rows `t,node,coord_index,value`."""
    lines = ["t,node,coord_index,value"]
    for comp in comparators:
        for t in range(comp.horizon):
            for k, v in enumerate(comp.points[t]):
                lines.append(f"{t + 1},{comp.node},{k},{v!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_outputs(result: RunResult, out_dir) -> dict:
    """Write records.csv and summary.json under out_dir; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records_path = out / "records.csv"
    summary_path = out / "summary.json"
    result.records.to_csv(records_path)
    summary_path.write_text(json.dumps(result.summary, indent=2) + "\n")
    paths = {"records": records_path, "summary": summary_path}
    for kind, comps in result.comparators.items():
        p = out / f"comparators_{kind}.csv"
        export_comparators_csv(comps, p)
        paths[f"comparators_{kind}"] = p
    return paths
