"""Generate synthetic array snapshots and recover the frequencies.

Walks the basic loop: describe a scenario (three unit-power sources on a
ten-sensor uniform linear array), draw noisy snapshots, and run both
subspace estimators. ESPRIT reads frequencies off the rotation between
shifted copies of the signal subspace; MUSIC scans the noise-subspace
correlation for its deepest minima.
"""

import numpy as np

from linespec import (
    CoherenceStructure,
    ScenarioConfig,
    estimate,
    generate_snapshots,
    matched_distance,
)

cfg = ScenarioConfig(
    freqs=(0.1, 0.5, 0.8),
    coherence=CoherenceStructure.diagonal([1.0, 1.0, 1.0]),
    n_sensors=10, subarray_m=10, smoothing_p=1,
    snapshots=1000, noise_sigma=0.1, seed=42,
)

snap = generate_snapshots(cfg)
print(f"scenario: K={cfg.n_sources} sources, N={cfg.n_sensors} sensors, "
      f"L={cfg.snapshots} snapshots, noise {cfg.noise_sigma}")
print(f"data block: {snap.y.shape[0]} x {snap.y.shape[1]} complex\n")

for method in ("esprit", "music"):
    res = estimate(snap, method, "none", k=cfg.n_sources)
    report = matched_distance(res.freqs, cfg.freqs)
    print(f"{method.upper():6s} frequencies: {np.round(res.freqs, 5)}")
    print(f"       directions:  {np.round(res.doas_deg, 2)} degrees")
    print(f"       matched distance vs truth: {report.md:.2e}\n")

print("truth:", cfg.freqs)
print("Both estimates sit within a small fraction of the grid spacing 1/N;")
print("rerunning with noise_sigma=0 drives the error to machine precision.")
