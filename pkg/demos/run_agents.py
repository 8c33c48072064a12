"""Run the bundled worlds end to end and show the logged traces."""

import json
import tempfile
from pathlib import Path

from efekit.agent import ExperimentConfig, fixture_path, run_experiment

out_root = Path(tempfile.mkdtemp(prefix="efekit-demo-"))
for name in ("switch_world_config.json", "line_world_config.json"):
    path = fixture_path(name)
    doc = json.loads(path.read_text())
    doc["output_dir"] = str(out_root / path.stem)
    cfg = ExperimentConfig.from_dict(doc, base_dir=path.parent)
    result = run_experiment(cfg)
    print(f"== {path.stem}: exit code {result.exit_code}")
    print("\n".join(result.csv_path.read_text().splitlines()[:6]))
    print("...")
    print(json.dumps(result.summary["checks"], indent=1)[:600])
    print()
print("outputs in", out_root)
