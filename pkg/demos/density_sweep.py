"""
Error versus graph density
==========================

A small sweep over rho_n with the experiment harness. The same run is
available from the shell as

    coarsectrl sweep --set n=1000 --set m=60 --set sweep.variable=rho_n \
        --set "sweep.values=[0.05, 0.2, 0.4]" --set seeds.count=5
"""

import tempfile

from coarsectrl.experiment import load_config, run_sweep

cfg = load_config("defaults", {
    "n": 1000,
    "m": 60,
    "seeds": {"master": 0, "count": 5},
    "sweep": {"variable": "rho_n", "values": [0.05, 0.2, 0.4]},
})

out = tempfile.mkdtemp(prefix="coarsectrl-")
result = run_sweep(cfg, out_dir=out)

for row in result.aggregate:
    print(f"rho_n={row['sweep_value']:<5}"
          f" prom={row['delta_prom_mean']:.3f}+-{row['delta_prom_std']:.3f}"
          f" learned={row['delta_learned_mean']:.3f}+-{row['delta_learned_std']:.3f}"
          f" baseline={row['baseline_error_mean']:.3f}")
print("CSV and manifest written to", out)
