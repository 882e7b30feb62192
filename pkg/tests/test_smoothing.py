import numpy as np
import pytest

from linespec.exceptions import SubarrayTooLargeError
from linespec.linalg import spectral_norm, vandermonde
from linespec.model import (
    CoherenceStructure,
    ScenarioConfig,
    SnapshotMatrix,
    build_source_covariance,
    generate_snapshots,
    smoothed_source_covariance,
)
from linespec.smoothing import fbss_stack, foss_stack, smoothed_sample_covariance


def random_snapshots(rng, n=6, l=12, sigma=0.2):
    cfg = ScenarioConfig(
        freqs=(0.11, 0.47, 0.83),
        coherence=CoherenceStructure.diagonal([1.0, 1.0, 1.0]),
        n_sensors=n, subarray_m=n, smoothing_p=1,
        snapshots=l, noise_sigma=sigma,
        seed=int(rng.integers(1 << 40)),
    )
    return cfg, generate_snapshots(cfg)


class TestFossStack:
    def test_full_subarray_is_identity(self):
        rng = np.random.default_rng(1)
        _, snap = random_snapshots(rng)
        st = foss_stack(snap, snap.n_sensors)
        assert st.p == 1
        assert np.array_equal(st.stack, snap.y)

    def test_single_snapshot_hankel(self):
        snap = SnapshotMatrix(y=np.array([[1.0], [2.0], [3.0]], dtype=complex))
        st = foss_stack(snap, 2)
        assert np.allclose(st.stack, [[1.0, 2.0], [2.0, 3.0]])

    def test_covariance_matches_per_subarray_average(self):
        # oracle: average of the per-subarray sample covariances
        rng = np.random.default_rng(2)
        _, snap = random_snapshots(rng, n=7, l=9)
        m = 4
        st = foss_stack(snap, m)
        r = smoothed_sample_covariance(st)
        p = snap.n_sensors - m + 1
        direct = np.zeros((m, m), dtype=complex)
        for q in range(p):
            block = snap.y[q : q + m, :]
            direct += block @ block.conj().T / snap.snapshots
        direct /= p
        assert np.abs(r - direct).max() <= 1e-10

    def test_subarray_too_large(self):
        rng = np.random.default_rng(3)
        _, snap = random_snapshots(rng)
        with pytest.raises(SubarrayTooLargeError):
            foss_stack(snap, snap.n_sensors + 1)

    def test_energy_preserved(self):
        rng = np.random.default_rng(4)
        _, snap = random_snapshots(rng, n=8, l=5)
        m = 5
        st = foss_stack(snap, m)
        per_block = sum(
            np.linalg.norm(snap.y[q : q + m, :]) ** 2 for q in range(snap.n_sensors - m + 1)
        )
        assert abs(np.linalg.norm(st.stack) ** 2 - per_block) <= 1e-9 * per_block


class TestFbssStack:
    def test_two_sensor_definition(self):
        a, b = 1.0 + 2.0j, -0.5 + 0.25j
        snap = SnapshotMatrix(y=np.array([[a], [b]]))
        st = fbss_stack(snap, 2)
        expected = np.array([[a, np.conj(b)], [b, np.conj(a)]]) / np.sqrt(2.0)
        assert np.abs(st.stack - expected).max() <= 1e-15

    def test_covariance_symmetrization_oracle(self):
        # oracle: half-sum of the forward covariance and its reversed conjugate
        rng = np.random.default_rng(5)
        _, snap = random_snapshots(rng, n=7, l=11)
        m = 4
        r_foss = smoothed_sample_covariance(foss_stack(snap, m))
        r_fbss = smoothed_sample_covariance(fbss_stack(snap, m))
        j = np.eye(m)[::-1]
        expected = 0.5 * (r_foss + j @ np.conj(r_foss) @ j)
        assert np.abs(r_fbss - expected).max() <= 1e-10

    def test_persymmetry(self):
        rng = np.random.default_rng(6)
        _, snap = random_snapshots(rng, n=6, l=8)
        r = smoothed_sample_covariance(fbss_stack(snap, 4))
        j = np.eye(4)[::-1]
        assert np.abs(j @ np.conj(r) @ j - r).max() <= 1e-10

    def test_energy_preserved(self):
        rng = np.random.default_rng(7)
        _, snap = random_snapshots(rng, n=8, l=5)
        m = 5
        st = fbss_stack(snap, m)
        per_block = sum(
            np.linalg.norm(snap.y[q : q + m, :]) ** 2 for q in range(snap.n_sensors - m + 1)
        )
        assert abs(np.linalg.norm(st.stack) ** 2 - per_block) <= 1e-9 * per_block


class TestSmoothedSampleCovariance:
    def test_reduces_to_plain_covariance(self):
        rng = np.random.default_rng(8)
        _, snap = random_snapshots(rng)
        r = smoothed_sample_covariance(foss_stack(snap, snap.n_sensors))
        direct = snap.y @ snap.y.conj().T / snap.snapshots
        assert np.abs(r - direct).max() <= 1e-12

    def test_noiseless_rank(self):
        rng = np.random.default_rng(9)
        cfg, snap = random_snapshots(rng, n=8, l=20, sigma=0.0)
        r = smoothed_sample_covariance(foss_stack(snap, 5))
        eigs = np.sort(np.linalg.eigvalsh(r))[::-1]
        assert eigs[3] / eigs[0] <= 1e-10  # rank K = 3

    def test_matches_population_limit(self):
        # oracle: population smoothed covariance A_M Sigma_SS A_M^H + sigma^2 I
        cfg = ScenarioConfig(
            freqs=(0.12, 0.55, 0.81),
            coherence=CoherenceStructure.diagonal([1.0, 2.0, 0.5]),
            n_sensors=8, subarray_m=5, smoothing_p=4,
            snapshots=100_000, noise_sigma=0.7, seed=21,
        )
        snap = generate_snapshots(cfg)
        r_hat = smoothed_sample_covariance(foss_stack(snap, cfg.subarray_m))
        cov = build_source_covariance(cfg.coherence)
        sigma_ss = smoothed_source_covariance(cov, cfg.freqs, cfg.smoothing_p, "foss")
        a_m = vandermonde(cfg.freqs, cfg.subarray_m)
        r_pop = a_m @ sigma_ss @ a_m.conj().T + cfg.noise_sigma**2 * np.eye(cfg.subarray_m)
        assert spectral_norm(r_hat - r_pop) <= 0.05 * spectral_norm(r_pop)
