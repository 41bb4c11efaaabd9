"""
A small Monte Carlo experiment
==============================

Twenty random placements instead of four hundred. Results go to
``demo_experiment/`` next to this script (CSV, JSON and SVG charts).
"""

from pathlib import Path

import numpy as np

from patient_hetnet.harness import ExperimentConfig, run_experiment, summarize, write_outputs

cfg = ExperimentConfig(instances=20)
report = run_experiment(cfg, progress=lambda i, n: print(f"\rinstance {i}/{n}", end=""))
print()

out = Path(__file__).with_name("demo_experiment")
for path in write_outputs(report, out):
    print("wrote", path.relative_to(out.parent))

# population mean per cell family, pooled over the seven states
cells = summarize(report)["cells"]
for family in cfg.objectives:
    before = [c for c in cells if c["objective"] == family and c["phase"] == "before"][0]
    print(f"\n{family}: before {before['population_mean']:.1f} ({before['population_mean_db']:.1f} dB)")
    for alpha in cfg.alphas:
        after = [c for c in cells if c["objective"] == family and c["alpha"] == alpha]
        pop = np.mean([c["population_mean"] for c in after])
        op = np.mean([np.mean(c["user_mean"][7:]) for c in after])
        print(f"  alpha {alpha:6.0f}: population {pop:7.1f}, outpatient mean {op:7.1f}")
