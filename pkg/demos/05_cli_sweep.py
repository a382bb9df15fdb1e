"""
Driving the command line from a script
======================================

The batch front-end reads a JSON configuration, fills in defaults and writes
CSV/JSON files plus a manifest.  Here a small mu x r2 sweep is run in a
temporary directory and the table printed.
"""

import json
import tempfile
from pathlib import Path

from mutualfront.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = {"time": {"T": 40.0}, "grid": {"dx": 0.05},
           "params": {"h0": 0.5},
           "sweep": {"axes": {"params.mu": [0.5, 4.0], "params.r2": [0.25, 1.0]}}}
    (tmp / "sweep.json").write_text(json.dumps(cfg))
    code = main(["sweep", "--config", str(tmp / "sweep.json"), "--out", str(tmp / "out")])
    print("exit code", code)
    print((tmp / "out" / "sweep.csv").read_text())
    manifest = json.loads((tmp / "out" / "manifest.json").read_text())
    print("outputs:", manifest["outputs"], " schema", manifest["schema_version"])
