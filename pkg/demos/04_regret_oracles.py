"""Measure regret against full-information comparators.

The oracles replay the recorded rounds and locate per-round minimizers (the
dynamic reference) and the best fixed action in hindsight (the static one).
They are measurement instruments only; the learner never sees them.
"""

import numpy as np

from dershare import load_config, run
from dershare.presets import six_node_stationary

config = load_config(six_node_stationary("drs", horizon=400, seed=9), with_oracle=True)
result = run(config)
s = result.summary

print("per-node metrics after", s["horizon"], "rounds:")
print("  cumulative loss ", np.round(s["cumulative_loss"], 1))
print("  dynamic regret  ", np.round(s["dynamic_regret"], 1))
print("  static regret   ", np.round(s["static_regret"], 1))
print("  comparator path ", np.round(s["path_length"], 1))
print()
print("dynamic regret >= static regret (the moving comparator is stronger):",
      bool(np.all(np.array(s["dynamic_regret"]) >= np.array(s["static_regret"]) - 1e-9)))
