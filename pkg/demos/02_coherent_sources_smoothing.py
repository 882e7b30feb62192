"""Coherent sources break plain subspace estimation; smoothing repairs it.

Six unit-power sources arrive in three coherent groups (sizes 3, 2, 1),
so the source covariance has rank 3 < K = 6 and the plain signal subspace
is unrecoverable. Averaging over P overlapping subarrays multiplies the
covariance entrywise by a smoothing correlation matrix, which can restore
full rank once P reaches the largest group size; the forward-backward
variant needs even fewer subarrays.
"""

import numpy as np

from linespec import (
    CoherenceStructure,
    ScenarioConfig,
    build_source_covariance,
    estimate,
    generate_snapshots,
    matched_distance,
    smoothed_source_covariance,
)

GROUPS = (3, 2, 1)
FREQS = (0.1, 0.2, 0.5, 0.6, 0.7, 0.9)
M = 7  # subarray length, kept at K + 1

coherence = CoherenceStructure.unit_power_groups(GROUPS, seed=7)
cov = build_source_covariance(coherence)
print(f"source covariance rank: {cov.rank} of K={cov.sigma.shape[0]}")

print("\nsmallest eigenvalue of the smoothed source covariance:")
print(f"{'P':>3s} {'N':>3s} {'forward-only':>14s} {'forward-backward':>17s}")
for p in range(1, 6):
    foss = smoothed_source_covariance(cov, FREQS, p, "foss")
    fbss = smoothed_source_covariance(cov, FREQS, p, "fbss", m=M)
    lam_f = np.linalg.eigvalsh(foss).min()
    lam_b = np.linalg.eigvalsh(fbss).min()
    print(f"{p:3d} {M + p - 1:3d} {lam_f:14.6f} {lam_b:17.6f}")

print("\nforward-only smoothing turns positive at P = 3 (the largest group),")
print("forward-backward already at P = 2 -- one sensor fewer.\n")

print("median matched distance over 50 noisy trials (noise 0.1, L = 1000):")
print(f"{'P':>3s} {'N':>3s} {'foss-esprit':>13s} {'fbss-esprit':>13s}")
for p in (2, 3):
    meds = {}
    for mode in ("foss", "fbss"):
        mds = []
        for trial in range(50):
            cfg = ScenarioConfig(
                freqs=FREQS, coherence=coherence,
                n_sensors=M + p - 1, subarray_m=M, smoothing_p=p,
                snapshots=1000, noise_sigma=0.1, seed=1000 * p + trial,
            )
            res = estimate(generate_snapshots(cfg), "esprit", mode, m=M, k=6)
            mds.append(matched_distance(res.freqs, cfg.freqs).md)
        meds[mode] = np.median(mds)
    print(f"{p:3d} {M + p - 1:3d} {meds['foss']:13.5f} {meds['fbss']:13.5f}")

print("\nthe error collapses by orders of magnitude exactly where the")
print("smoothed covariance regains full rank.")
