"""
Using the command line
======================

Writes a small job file and runs ``extremal eval`` and ``extremal grid``
through the same entry point the console script uses.
"""

import json
import tempfile
from pathlib import Path

from extremal.cli import main

work = Path(tempfile.mkdtemp())
job = {
    "domain": {"shape": "ball", "dim": 1, "radius": 1.0},
    "weight": "0",
    "mode": "grid",
    "reference": "max(log(abs(z1)), 0)",
    "grid": {"axes": [{"coord": 1, "part": "re", "min": 0.0, "max": 3.0, "steps": 4}]},
}
cfg = work / "ball.json"
cfg.write_text(json.dumps(job))

print("$ extremal eval --config ball.json --z 2")
print("exit", main(["eval", "--config", str(cfg), "--z", "2"]))
print()
print("$ extremal grid --config ball.json")
print("exit", main(["grid", "--config", str(cfg)]))
print()
print("$ extremal selftest --scale 0.2")
print("exit", main(["selftest", "--scale", "0.2"]))
