"""
The full pipeline
=================

``run_pipeline`` (and the ``r2spill run`` command) writes every table,
matrix, network and chart with a metadata sidecar and a hashed manifest.
"""

import tempfile
from pathlib import Path

from r2spill import run_pipeline

out = Path(tempfile.mkdtemp()) / "bundle"
result = run_pipeline({"window": 150, "robustness": False, "strategies": ["MVP", "MCoP"]},
                      output_dir=out)

# %%
# Artifacts in the order they were written.
for path in result.artifacts:
    if not path.endswith(".meta.json"):
        print(path)

# %%
print((out / "table4_performance.csv").read_text())
