"""End-to-end file workflow: config JSON -> run -> records CSV -> report.

The same artifacts the CLI produces (`dershare run/validate/report`) feed the
plotting frontend; everything crosses tool boundaries as plain files.
"""

import json
import tempfile
from pathlib import Path

from dershare.cli import main
from dershare.presets import six_node_stationary

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    config_path = tmp / "config.json"
    config_path.write_text(json.dumps(six_node_stationary("mansdrs-adj", horizon=600, seed=4), indent=2))

    print("== validate ==")
    main(["validate", "--config", str(config_path)])

    print("\n== run ==")
    main(["run", "--config", str(config_path), "--out", str(tmp / "out")])

    print("\n== report ==")
    main(["report", "--records", str(tmp / "out" / "records.csv"), "--window", "100"])
