"""Ready-made desk-scale workloads used by the demos and the test suite.

The six-node network mixes surplus and deficit producers under a balanced
demand, so sharing has something to fix; the twenty-node variant is built from
facility positions with a distance threshold.
"""

from __future__ import annotations

import numpy as np

SIX_NODE_EDGES = [(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4), (3, 5), (4, 5)]

# heterogeneous capacities: nodes 0, 2, 4 run surpluses, 1, 3, 5 run deficits
SIX_NODE_MEANS = [8.0, 3.0, 6.0, 2.0, 9.0, 2.0]

# zero-sum drift applied with alternating sign, so totals (and balanced demand) hold still
SIX_NODE_SHIFT = [1.5, -1.0, 1.0, -1.0, 0.5, -1.0]


def six_node_stationary(algorithm: str = "drs", horizon: int = 10_000, seed: int = 1, noise: float = 1.0) -> dict:
    """Six nodes, fixed means with bounded iid noise, balanced demand."""
    means = list(SIX_NODE_MEANS)
    generation = (
        {"kind": "constant", "means": means}
        if noise == 0
        else {"kind": "iid-uniform", "means": means, "half_widths": [noise] * 6}
    )
    return {
        "graph": {"type": "edges", "n": 6, "edges": [list(e) for e in SIX_NODE_EDGES]},
        "generation": generation,
        "demand": {"kind": "balanced"},
        "algorithm": {"name": algorithm},
        "horizon": horizon,
        "seed": seed,
    }


def six_node_nonstationary(
    algorithm: str = "mansdrs",
    horizon: int = 20_000,
    seed: int = 1,
    segment_length: int = 1_000,
    noise: float = 1.0,
) -> dict:
    """Piecewise-stationary variant: the mean profile swings by a zero-sum
    shift whose sign flips every segment, so totals (and the balanced demand)
    stay fixed while every node's own supply level keeps moving."""
    base = np.array(SIX_NODE_MEANS)
    shift = np.array(SIX_NODE_SHIFT)
    segments = max(1, -(-horizon // segment_length))
    means = [(base + (-1.0) ** s * shift).tolist() for s in range(segments)]
    change_points = [1 + s * segment_length for s in range(1, segments)]
    generation = {"kind": "piecewise-stationary", "means": means, "change_points": change_points}
    if noise > 0:
        generation["half_widths"] = [noise] * 6
    return {
        "graph": {"type": "edges", "n": 6, "edges": [list(e) for e in SIX_NODE_EDGES]},
        "generation": generation,
        "demand": {"kind": "balanced"},
        "algorithm": {"name": algorithm},
        "horizon": horizon,
        "seed": seed,
    }


def twenty_node_positions(rng_seed: int = 7) -> list[list[float]]:
    """Twenty facility positions in a rough 10x10 district grid."""
    rng = np.random.default_rng(rng_seed)
    return (rng.uniform(0.0, 10.0, (20, 2)).round(3)).tolist()


def twenty_node_config(algorithm: str = "mansdrs", horizon: int = 20_000, seed: int = 1, threshold: float = 3.5) -> dict:
    """Twenty nodes from positions with a distance-threshold graph."""
    rng = np.random.default_rng(11)
    means = rng.uniform(2.0, 9.0, 20).round(2).tolist()
    return {
        "graph": {"type": "positions", "coords": twenty_node_positions(), "threshold": threshold},
        "generation": {"kind": "iid-uniform", "means": means, "half_widths": [1.0] * 20},
        "demand": {"kind": "balanced"},
        "algorithm": {"name": algorithm},
        "horizon": horizon,
        "seed": seed,
    }
