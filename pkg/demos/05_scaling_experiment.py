"""Monte Carlo scaling laws via the experiment harness.

Runs downsized versions of two sweeps and fits log-log slopes: the mean
matched distance grows linearly in the noise level (slope ~ +1) and
shrinks as the inverse square root of the snapshot count (slope ~ -0.5).
Results land in CSV files next to this script; identical seeds give
byte-identical CSVs regardless of the worker count.
"""

from dataclasses import replace
from pathlib import Path

from linespec import fit_loglog_slope, preset, run_experiment

here = Path(__file__).resolve().parent
trials = 100

noise_sweep = replace(preset("exp1", trials=trials), sweep_values=(0.1, 0.2, 0.5, 1.0))
res1 = run_experiment(noise_sweep, workers=2)
res1.write_csv(here / "scaling_vs_noise.csv")
fit1 = fit_loglog_slope([r.sweep_value for r in res1.rows],
                        [r.mean_md for r in res1.rows])
print(f"mean md vs noise level   : slope {fit1.slope:+.3f} (expect ~ +1)")

snapshot_sweep = replace(preset("exp2", trials=trials), sweep_values=(100, 1000, 10000))
res2 = run_experiment(snapshot_sweep, workers=2)
res2.write_csv(here / "scaling_vs_snapshots.csv")
fit2 = fit_loglog_slope([r.sweep_value for r in res2.rows],
                        [r.mean_md for r in res2.rows])
print(f"mean md vs snapshot count: slope {fit2.slope:+.3f} (expect ~ -0.5)")

print(f"\nwrote {here / 'scaling_vs_noise.csv'}")
print(f"wrote {here / 'scaling_vs_snapshots.csv'}")
print("rerun with any --workers equivalent: the CSV bytes do not change.")
