"""Shared random-scenario builders for the test suite."""

import numpy as np

from linespec.model import CoherenceStructure, ScenarioConfig


def draw_frequencies(rng, k, min_sep):
    """Draw k frequencies with wrap-around separation >= min_sep.

    Constructive: the k circular gaps are min_sep plus a random split of
    the remaining slack, rotated by a uniform offset. Requires
    k * min_sep < 1.
    """
    if k == 1:
        return rng.uniform(0.0, 1.0, size=1)
    slack = 1.0 - k * min_sep
    assert slack > 0, f"infeasible separation {min_sep} for {k} frequencies"
    w = rng.exponential(1.0, size=k)
    gaps = min_sep + slack * w / w.sum()
    f = (rng.uniform(0.0, 1.0) + np.cumsum(gaps)) % 1.0
    return np.sort(f)


def random_unitary(rng, n):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_psd(rng, n, rank=None):
    r = n if rank is None else rank
    g = rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))
    return g @ g.conj().T / r


def random_plain_scenario(rng, sigma=0.0):
    """Noncoherent scenario with full-rank empirical source covariance."""
    k = int(rng.integers(1, 5))
    n = k + 1 + int(rng.integers(0, 6))
    l = k + int(rng.integers(2, 30))
    freqs = draw_frequencies(rng, k, min_sep=1.0 / n)
    powers = rng.uniform(0.5, 2.0, size=k)
    return ScenarioConfig(
        freqs=tuple(freqs),
        coherence=CoherenceStructure.diagonal(powers),
        n_sensors=n, subarray_m=n, smoothing_p=1,
        snapshots=l, noise_sigma=sigma,
        seed=int(rng.integers(0, 2**63 - 1)),
    )


def random_coherent_scenario(rng, sigma=0.0):
    """Coherent groups with enough smoothing for the forward-only variant.

    The subarray count is at least the largest group size and the core
    covariance is positive definite, so the smoothed source covariance
    (and a fortiori its forward-backward refinement) has full rank.
    """
    g_count = int(rng.integers(1, 4))
    groups = tuple(sorted((int(rng.integers(1, 4)) for _ in range(g_count)), reverse=True))
    k = sum(groups)
    coh = CoherenceStructure.unit_power_groups(groups, seed=int(rng.integers(0, 2**31)))
    m = k + 1 + int(rng.integers(0, 3))
    p = groups[0] + int(rng.integers(0, 3))
    n = m + p - 1
    l = max(g_count + 2, int(rng.integers(8, 40)))
    freqs = draw_frequencies(rng, k, min_sep=1.0 / m)
    return ScenarioConfig(
        freqs=tuple(freqs),
        coherence=coh,
        n_sensors=n, subarray_m=m, smoothing_p=p,
        snapshots=l, noise_sigma=sigma,
        seed=int(rng.integers(0, 2**63 - 1)),
    )
