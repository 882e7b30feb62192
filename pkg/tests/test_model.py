import json

import numpy as np
import pytest

from linespec.exceptions import (
    InvalidConfigError,
    InvalidGroupVectorError,
    NotPSDError,
    OutOfRangeError,
)
from linespec.linalg import spectral_norm, vandermonde
from linespec.model import (
    CoherenceStructure,
    ScenarioConfig,
    build_source_covariance,
    correlation_matrix_cp,
    doa_to_frequency,
    frequency_to_doa,
    generate_snapshots,
    scenario_from_json,
    scenario_to_json,
    smoothed_source_covariance,
)

from .helpers import random_psd


def plain_scenario(noise_sigma=0.0, snapshots=50, seed=7, powers=(1.0, 1.0, 1.0)):
    return ScenarioConfig(
        freqs=(0.1, 0.5, 0.8),
        coherence=CoherenceStructure.diagonal(powers),
        n_sensors=10, subarray_m=10, smoothing_p=1,
        snapshots=snapshots, noise_sigma=noise_sigma, seed=seed,
    )


def exp4_coherence(seed=11):
    return CoherenceStructure.unit_power_groups((3, 2, 1), seed=seed)


class TestBuildSourceCovariance:
    def test_noncoherent_identity(self):
        cov = build_source_covariance(CoherenceStructure.diagonal([1.0, 1.0, 1.0]))
        assert np.allclose(cov.sigma, np.eye(3))
        assert cov.rank == 3

    def test_grouped_structure_rank_and_trace(self):
        rng = np.random.default_rng(3)
        vecs = []
        for g in (3, 2, 1):
            v = np.exp(1j * rng.uniform(0, 2 * np.pi, g))
            vecs.append(v / np.linalg.norm(v))
        c = CoherenceStructure(groups=(3, 2, 1), group_vectors=tuple(vecs),
                               core_cov=np.eye(3, dtype=complex))
        cov = build_source_covariance(c)
        assert cov.rank == 3
        assert abs(np.trace(cov.sigma).real - 3.0) <= 1e-10
        eigs = np.linalg.eigvalsh(cov.sigma)
        assert np.sum(eigs > 1e-10) == 3

    def test_nonzero_eigenvalues_match_core(self):
        # oracle: eigenvalues of the covariance are the core eigenvalues padded with zeros
        rng = np.random.default_rng(4)
        for _ in range(20):
            groups = tuple(sorted(rng.integers(1, 4, size=rng.integers(1, 4)), reverse=True))
            coh = CoherenceStructure.unit_power_groups(groups, seed=int(rng.integers(1 << 30)))
            core = random_psd(rng, len(groups))
            coh = CoherenceStructure(groups=coh.groups, group_vectors=coh.group_vectors,
                                     core_cov=core)
            cov = build_source_covariance(coh)
            k = sum(groups)
            full = np.sort(np.linalg.eigvalsh(cov.sigma))[::-1]
            expected = np.zeros(k)
            core_eigs = np.sort(np.linalg.eigvalsh(core))[::-1]
            expected[: len(groups)] = core_eigs
            assert np.abs(full - expected).max() <= 1e-9 * (1.0 + expected.max())

    def test_rejects_zero_entry_vector(self):
        bad = CoherenceStructure(groups=(2,), group_vectors=(np.array([1.0, 0.0]),),
                                 core_cov=np.eye(1, dtype=complex))
        with pytest.raises(InvalidGroupVectorError):
            build_source_covariance(bad)

    def test_rejects_unnormalized_vector(self):
        bad = CoherenceStructure(groups=(2,), group_vectors=(np.array([1.0, 1.0]),),
                                 core_cov=np.eye(1, dtype=complex))
        with pytest.raises(InvalidGroupVectorError):
            build_source_covariance(bad)

    def test_rejects_indefinite_core(self):
        bad = CoherenceStructure(groups=(1, 1), group_vectors=(np.ones(1), np.ones(1)),
                                 core_cov=np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex))
        with pytest.raises(NotPSDError):
            build_source_covariance(bad)


class TestGenerateSnapshots:
    def test_zero_noise_exact_product(self):
        snap = generate_snapshots(plain_scenario(noise_sigma=0.0))
        assert np.array_equal(snap.y, snap.a @ snap.s + snap.e)
        assert np.abs(snap.e).max() == 0.0
        assert np.linalg.matrix_rank(snap.y) <= 3

    def test_determinism(self):
        a = generate_snapshots(plain_scenario(noise_sigma=0.3, seed=123))
        b = generate_snapshots(plain_scenario(noise_sigma=0.3, seed=123))
        assert np.array_equal(a.y, b.y)
        c = generate_snapshots(plain_scenario(noise_sigma=0.3, seed=124))
        assert not np.array_equal(a.y, c.y)

    def test_sample_covariance_concentration(self):
        # oracle: population covariance A Sigma A^H + sigma^2 I
        cfg = plain_scenario(noise_sigma=1.0, snapshots=100_000, seed=5)
        snap = generate_snapshots(cfg)
        r_hat = snap.y @ snap.y.conj().T / cfg.snapshots
        a = vandermonde(cfg.freqs, cfg.n_sensors)
        r = a @ a.conj().T + np.eye(cfg.n_sensors)
        assert spectral_norm(r_hat - r) <= 0.15 * cfg.n_sensors

    def test_source_sample_covariance_close_to_target(self):
        cfg = ScenarioConfig(
            freqs=(0.2, 0.6),
            coherence=CoherenceStructure.diagonal([1.0, 4.0]),
            n_sensors=6, subarray_m=6, smoothing_p=1,
            snapshots=100_000, noise_sigma=0.0, seed=9,
        )
        snap = generate_snapshots(cfg)
        sigma_hat = snap.s @ snap.s.conj().T / cfg.snapshots
        target = np.diag([1.0, 4.0])
        assert spectral_norm(sigma_hat - target) <= 0.05 * spectral_norm(target)

    def test_invalid_config(self):
        cfg = plain_scenario()
        with pytest.raises(InvalidConfigError):
            generate_snapshots(ScenarioConfig(
                freqs=cfg.freqs, coherence=cfg.coherence,
                n_sensors=10, subarray_m=9, smoothing_p=1,  # M + P != N + 1
                snapshots=10, noise_sigma=0.0, seed=1,
            ))
        with pytest.raises(InvalidConfigError):
            generate_snapshots(ScenarioConfig(
                freqs=cfg.freqs, coherence=cfg.coherence,
                n_sensors=3, subarray_m=3, smoothing_p=1,  # N < K + 1
                snapshots=10, noise_sigma=0.0, seed=1,
            ))


class TestCorrelationMatrix:
    def test_single_source(self):
        assert np.allclose(correlation_matrix_cp([0.3], 5), [[1.0]])

    def test_orthogonal_spacing(self):
        # frequencies spaced by 1/P give orthogonal smoothing columns
        c = correlation_matrix_cp([0.0, 0.25], 4)
        assert np.abs(c - np.eye(2)).max() <= 1e-12

    def test_direct_summation_oracle(self):
        freqs, p = [0.1, 0.5, 0.8], 5
        c = correlation_matrix_cp(freqs, p)
        k = len(freqs)
        explicit = np.zeros((k, k), dtype=complex)
        for j in range(k):
            for i in range(k):
                explicit[j, i] = np.mean([
                    np.exp(-2j * np.pi * q * (freqs[i] - freqs[j])) for q in range(p)
                ])
        assert np.abs(c - explicit).max() <= 1e-12

    def test_eigenvalues_and_trace(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            k = int(rng.integers(1, 6))
            freqs = np.sort(rng.choice(np.arange(0.0, 1.0, 0.017), size=k, replace=False))
            p = int(rng.integers(1, 8))
            c = correlation_matrix_cp(freqs, p)
            eigs = np.linalg.eigvalsh(c)
            assert eigs.min() >= -1e-10
            assert eigs.max() <= k + 1e-10
            assert abs(np.trace(c).real - k) <= 1e-12 * k


class TestSmoothedSourceCovariance:
    def test_p_equal_one_is_identity_map(self):
        rng = np.random.default_rng(10)
        sigma = random_psd(rng, 3)
        out = smoothed_source_covariance(sigma, [0.1, 0.4, 0.7], 1, "foss")
        assert np.abs(out - sigma).max() <= 1e-12

    def test_identity_covariance_fixed_point(self):
        out = smoothed_source_covariance(np.eye(3, dtype=complex), [0.1, 0.4, 0.7], 4, "foss")
        assert np.abs(out - np.eye(3)).max() <= 1e-12

    def test_hadamard_identity_oracle(self):
        # oracle: direct average of the phase-twisted covariances
        rng = np.random.default_rng(11)
        for _ in range(10):
            k = int(rng.integers(2, 5))
            freqs = np.sort(rng.uniform(0, 1, size=k))
            if np.unique(freqs).size != k:
                continue
            sigma = random_psd(rng, k)
            p = int(rng.integers(1, 6))
            z = np.exp(2j * np.pi * freqs)
            direct = np.zeros((k, k), dtype=complex)
            for q in range(p):
                zq = np.diag(z**q)
                direct += zq @ sigma @ np.conj(zq)
            direct /= p
            out = smoothed_source_covariance(sigma, freqs, p, "foss")
            assert np.abs(out - direct).max() <= 1e-10

    def test_rank_restoration_on_coherent_groups(self):
        coh = exp4_coherence()
        cov = build_source_covariance(coh)
        freqs = (0.1, 0.2, 0.5, 0.6, 0.7, 0.9)
        assert np.linalg.eigvalsh(cov.sigma).min() <= 1e-10  # singular before smoothing
        smoothed = smoothed_source_covariance(cov, freqs, 3, "foss")
        assert np.linalg.eigvalsh(smoothed).min() > 1e-8

    def test_fbss_at_least_foss(self):
        rng = np.random.default_rng(12)
        freqs = (0.05, 0.3, 0.62, 0.9)
        for _ in range(10):
            sigma = random_psd(rng, 4, rank=int(rng.integers(2, 5)))
            foss = smoothed_source_covariance(sigma, freqs, 3, "foss")
            fbss = smoothed_source_covariance(sigma, freqs, 3, "fbss", m=6)
            lam_foss = np.linalg.eigvalsh(foss).min()
            lam_fbss = np.linalg.eigvalsh(fbss).min()
            assert lam_fbss >= lam_foss - 1e-10

    def test_outputs_hermitian_psd(self):
        rng = np.random.default_rng(13)
        sigma = random_psd(rng, 3)
        for mode, m in (("foss", None), ("fbss", 5)):
            out = smoothed_source_covariance(sigma, [0.12, 0.45, 0.83], 3, mode, m=m)
            assert np.abs(out - out.conj().T).max() <= 1e-10
            assert np.linalg.eigvalsh(out).min() >= -1e-10


class TestDoaMap:
    def test_reference_points(self):
        assert abs(frequency_to_doa(0.1) - 11.54) <= 0.01
        assert abs(frequency_to_doa(0.5) - (-90.0)) <= 1e-12
        assert abs(frequency_to_doa(0.25) - 30.0) <= 1e-12

    def test_roundtrip(self):
        for f in np.arange(0.0, 1.0, 0.01):
            assert abs(doa_to_frequency(frequency_to_doa(f)) - f) <= 1e-12

    def test_out_of_range(self):
        with pytest.raises(OutOfRangeError):
            frequency_to_doa(1.0)
        with pytest.raises(OutOfRangeError):
            doa_to_frequency(90.0)


class TestScenarioJson:
    def test_roundtrip_and_field_names(self):
        cfg = ScenarioConfig(
            freqs=(0.1, 0.2, 0.5, 0.6, 0.7, 0.9),
            coherence=exp4_coherence(),
            n_sensors=9, subarray_m=7, smoothing_p=3,
            snapshots=1000, noise_sigma=0.1, seed=77,
        )
        doc = scenario_to_json(cfg)
        assert set(doc) == {
            "freqs", "groups", "group_vectors", "core_cov", "n_sensors",
            "subarray_m", "smoothing_p", "snapshots", "noise_sigma", "seed",
        }
        text = json.dumps(doc)
        back = scenario_from_json(json.loads(text))
        assert back.freqs == cfg.freqs
        assert back.n_sensors == cfg.n_sensors
        assert back.seed == cfg.seed
        assert back.coherence.groups == cfg.coherence.groups
        for v_a, v_b in zip(back.coherence.group_vectors, cfg.coherence.group_vectors):
            assert np.abs(v_a - v_b).max() <= 1e-15
        assert np.abs(back.coherence.core_cov - cfg.coherence.core_cov).max() <= 1e-15
        # identical data from the deserialized scenario
        assert np.array_equal(generate_snapshots(back).y, generate_snapshots(cfg).y)
