"""Scenario description and synthetic multi-snapshot data generation.

A scenario is a complete generative recipe: frequencies on the unit
interval, a source coherence structure, array geometry (``N`` sensors,
subarray length ``M`` with ``P = N - M + 1`` overlapping subarrays),
snapshot count ``L``, circular complex Gaussian noise level, and a seed.
Generation is deterministic given the seed; source and noise draws come
from independent counter-based streams so trials can run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import (
    InvalidConfigError,
    InvalidGroupVectorError,
    NotPSDError,
    OutOfRangeError,
)
from .linalg import vandermonde, validate_frequencies

PSD_TOL = 1e-10

# role codes keying the per-scenario random streams
_ROLE_SOURCE = 0
_ROLE_NOISE = 1


@dataclass(frozen=True)
class CoherenceStructure:
    """Grouped source-coherence description.

    ``groups`` holds the group sizes ``g_1 >= ... >= g_G >= 1`` summing to
    the number of sources K. Group ``j`` is a set of fully correlated
    sources whose cross-covariance block is ``core_cov[j, j] * v_j v_j^H``
    with ``v_j = group_vectors[j]`` a unit-norm vector with no zero entry.
    ``core_cov`` is the G x G Hermitian PSD covariance of the group
    amplitudes.
    """

    groups: tuple[int, ...]
    group_vectors: tuple[np.ndarray, ...]
    core_cov: np.ndarray

    @property
    def n_sources(self) -> int:
        return int(sum(self.groups))

    @staticmethod
    def diagonal(powers) -> "CoherenceStructure":
        """Noncoherent sources: one singleton group per source power."""
        p = np.atleast_1d(np.asarray(powers, dtype=np.float64))
        return CoherenceStructure(
            groups=(1,) * p.size,
            group_vectors=tuple(np.ones(1, dtype=np.complex128) for _ in range(p.size)),
            core_cov=np.diag(p).astype(np.complex128),
        )

    @staticmethod
    def unit_power_groups(groups, seed: int) -> "CoherenceStructure":
        """Coherent groups of unit-power sources, identical up to random phases.

        Entries of each group vector have modulus ``1/sqrt(g_j)`` with
        i.i.d. uniform phases drawn from ``seed``; the core covariance is
        ``diag(g_j)`` so every individual source keeps power one.
        """
        sizes = tuple(int(g) for g in groups)
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x7068]))
        vecs = []
        for g in sizes:
            phases = rng.uniform(0.0, 2.0 * np.pi, size=g)
            vecs.append(np.exp(1j * phases) / math.sqrt(g))
        core = np.diag(np.asarray(sizes, dtype=np.float64)).astype(np.complex128)
        return CoherenceStructure(groups=sizes, group_vectors=tuple(vecs), core_cov=core)


@dataclass(frozen=True)
class SourceCovariance:
    """K x K Hermitian PSD source covariance with its numerical rank."""

    sigma: np.ndarray
    rank: int


@dataclass(frozen=True)
class SnapshotMatrix:
    """N x L data block, optionally carrying its synthetic ground truth.

    When generated synthetically, ``y = a @ s + e`` holds exactly with
    ``a`` the N x K manifold, ``s`` the K x L source signals and ``e`` the
    noise block.
    """

    y: np.ndarray
    a: np.ndarray | None = None
    s: np.ndarray | None = None
    e: np.ndarray | None = None

    @property
    def n_sensors(self) -> int:
        return self.y.shape[0]

    @property
    def snapshots(self) -> int:
        return self.y.shape[1]


@dataclass(frozen=True)
class ScenarioConfig:
    """Full generative description of a simulation scenario."""

    freqs: tuple[float, ...]
    coherence: CoherenceStructure
    n_sensors: int
    subarray_m: int
    smoothing_p: int
    snapshots: int
    noise_sigma: float
    seed: int

    @property
    def n_sources(self) -> int:
        return len(self.freqs)

    def validate(self) -> None:
        k = self.n_sources
        validate_frequencies(self.freqs)
        if self.coherence.n_sources != k:
            raise InvalidConfigError(
                f"coherence structure covers {self.coherence.n_sources} sources, expected {k}"
            )
        if self.subarray_m + self.smoothing_p != self.n_sensors + 1:
            raise InvalidConfigError(
                f"need M + P = N + 1, got M={self.subarray_m}, "
                f"P={self.smoothing_p}, N={self.n_sensors}"
            )
        if self.smoothing_p < 1:
            raise InvalidConfigError(f"subarray count must be >= 1, got {self.smoothing_p}")
        if self.smoothing_p > 1 and self.subarray_m < k + 1:
            raise InvalidConfigError(
                f"smoothing requires M >= K+1, got M={self.subarray_m}, K={k}"
            )
        if self.smoothing_p == 1 and self.n_sensors < k + 1:
            raise InvalidConfigError(
                f"plain estimation requires N >= K+1, got N={self.n_sensors}, K={k}"
            )
        if self.snapshots < 1:
            raise InvalidConfigError(f"snapshot count must be >= 1, got {self.snapshots}")
        if not (self.noise_sigma >= 0.0 and math.isfinite(self.noise_sigma)):
            raise InvalidConfigError(f"noise level must be finite and >= 0, got {self.noise_sigma}")

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, seed=int(seed))


def _validate_coherence(c: CoherenceStructure) -> None:
    sizes = tuple(int(g) for g in c.groups)
    if len(sizes) < 1 or any(g < 1 for g in sizes):
        raise InvalidConfigError(f"group sizes must be positive, got {sizes}")
    if any(sizes[i] < sizes[i + 1] for i in range(len(sizes) - 1)):
        raise InvalidConfigError(f"group sizes must be sorted descending, got {sizes}")
    if len(c.group_vectors) != len(sizes):
        raise InvalidConfigError("one group vector required per group")
    for j, (g, v) in enumerate(zip(sizes, c.group_vectors)):
        vec = np.asarray(v, dtype=np.complex128)
        if vec.shape != (g,):
            raise InvalidGroupVectorError(f"group {j} vector has shape {vec.shape}, expected ({g},)")
        nrm = np.linalg.norm(vec)
        if abs(nrm - 1.0) > 1e-8:
            raise InvalidGroupVectorError(f"group {j} vector norm {nrm} is not 1")
        if np.abs(vec).min() <= 0.0:
            raise InvalidGroupVectorError(f"group {j} vector has a zero entry")
    core = np.asarray(c.core_cov, dtype=np.complex128)
    g_count = len(sizes)
    if core.shape != (g_count, g_count):
        raise InvalidConfigError(f"core covariance must be {g_count}x{g_count}, got {core.shape}")
    if np.abs(core - core.conj().T).max() > PSD_TOL * (1.0 + np.abs(core).max()):
        raise NotPSDError("core covariance is not Hermitian")
    eigvals = np.linalg.eigvalsh(core)
    if eigvals.min() < -PSD_TOL * max(eigvals.max(), 1.0):
        raise NotPSDError(f"core covariance has negative eigenvalue {eigvals.min():.3e}")


def build_source_covariance(c: CoherenceStructure) -> SourceCovariance:
    """Assemble the K x K source covariance from a coherence structure.

    The covariance factors as ``V core V^H`` where ``V`` is the K x G
    block-diagonal stack of the unit group vectors, so its nonzero
    eigenvalues coincide with those of the core covariance and its rank
    equals the core's rank.
    """
    _validate_coherence(c)
    sizes = tuple(int(g) for g in c.groups)
    k = sum(sizes)
    g_count = len(sizes)
    v = np.zeros((k, g_count), dtype=np.complex128)
    row = 0
    for j, g in enumerate(sizes):
        v[row : row + g, j] = np.asarray(c.group_vectors[j], dtype=np.complex128)
        row += g
    core = np.asarray(c.core_cov, dtype=np.complex128)
    sigma = v @ core @ v.conj().T
    sigma = 0.5 * (sigma + sigma.conj().T)
    core_eigs = np.linalg.eigvalsh(core)
    rank = int(np.count_nonzero(core_eigs > PSD_TOL * max(core_eigs.max(), 1.0)))
    return SourceCovariance(sigma=sigma, rank=rank)


def _psd_sqrt(sigma: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sigma)
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def _stream(seed: int, role: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), role])))


def _circular_gaussian(rng, shape) -> np.ndarray:
    # unit variance per complex entry, split evenly between re and im
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def generate_snapshots(cfg: ScenarioConfig) -> SnapshotMatrix:
    """Draw one synthetic snapshot block ``Y = A S + E`` from a scenario.

    Source columns are i.i.d. circular complex Gaussian with the
    scenario's source covariance; noise entries are i.i.d. circular
    complex Gaussian with per-entry variance ``noise_sigma**2``. The two
    draws come from independent streams keyed on ``(seed, role)``, so the
    output is bit-reproducible given the config.
    """
    cfg.validate()
    a = vandermonde(cfg.freqs, cfg.n_sensors)
    cov = build_source_covariance(cfg.coherence)
    root = _psd_sqrt(cov.sigma)
    k, n, l = cfg.n_sources, cfg.n_sensors, cfg.snapshots
    s = root @ _circular_gaussian(_stream(cfg.seed, _ROLE_SOURCE), (k, l))
    e = cfg.noise_sigma * _circular_gaussian(_stream(cfg.seed, _ROLE_NOISE), (n, l))
    return SnapshotMatrix(y=a @ s + e, a=a, s=s, e=e)


def correlation_matrix_cp(freqs, p: int) -> np.ndarray:
    """Unit-diagonal correlation matrix induced by smoothing over ``p`` shifts.

    Equals ``conj(A_p^H A_p) / p`` for the p x K manifold ``A_p``; entry
    ``(j, k)`` is the average of ``exp(-2i pi (q-1) (f_k - f_j))`` over
    ``q = 1..p``. Hermitian PSD with diagonal pinned to exactly one.
    """
    if p < 1:
        raise InvalidConfigError(f"smoothing count must be >= 1, got {p}")
    ap = vandermonde(freqs, p)
    c = np.conj(ap.conj().T @ ap) / p
    c = 0.5 * (c + c.conj().T)
    np.fill_diagonal(c, 1.0)
    return c


def smoothed_source_covariance(sigma, freqs, p: int, mode: str, m: int | None = None) -> np.ndarray:
    """Source covariance seen by a smoothed subarray pipeline.

    Forward-only smoothing turns the covariance into its Hadamard product
    with the smoothing correlation matrix. Forward-backward smoothing
    additionally averages with a conjugated copy twisted by the subarray
    phase ``Z^{1-M} conj(.) Z^{M-1}``, which requires the subarray length
    ``m``.

    Parameters
    ----------
    sigma : SourceCovariance or ndarray
        K x K Hermitian PSD covariance (population or empirical).
    freqs : array_like
        The K frequencies defining the phase diagonal.
    p : int
        Number of overlapping subarrays.
    mode : {"foss", "fbss"}
    m : int, optional
        Subarray length; required for ``"fbss"``.
    """
    mat = sigma.sigma if isinstance(sigma, SourceCovariance) else np.asarray(sigma, dtype=np.complex128)
    f = validate_frequencies(freqs)
    if mat.shape != (f.size, f.size):
        raise InvalidConfigError(f"covariance shape {mat.shape} does not match {f.size} frequencies")
    smoothed = mat * correlation_matrix_cp(f, p)
    kind = mode.lower()
    if kind == "foss":
        out = smoothed
    elif kind == "fbss":
        if m is None:
            raise InvalidConfigError("forward-backward smoothing requires the subarray length m")
        z = np.exp(2j * np.pi * f)
        twist = np.outer(z ** (1 - m), z ** (m - 1))
        out = 0.5 * (smoothed + twist * np.conj(smoothed))
    else:
        raise InvalidConfigError(f"unknown smoothing mode {mode!r}")
    return 0.5 * (out + out.conj().T)


def frequency_to_doa(f: float) -> float:
    """Map a frequency in [0, 1) to its direction of arrival in degrees.

    Uses the half-wavelength element spacing convention, giving
    ``arcsin(2f)`` on [0, 1/2) and ``arcsin(2f - 2)`` on [1/2, 1).
    """
    if not (0.0 <= f < 1.0):
        raise OutOfRangeError(f"frequency {f} outside [0, 1)")
    x = 2.0 * f if f < 0.5 else 2.0 * f - 2.0
    return math.degrees(math.asin(x))


def doa_to_frequency(theta_deg: float) -> float:
    """Inverse direction-of-arrival map, from degrees in [-90, 90) to [0, 1)."""
    if not (-90.0 <= theta_deg < 90.0):
        raise OutOfRangeError(f"direction {theta_deg} outside [-90, 90) degrees")
    return (math.sin(math.radians(theta_deg)) / 2.0) % 1.0


def scenario_to_json(cfg: ScenarioConfig) -> dict:
    """Serialize a scenario to a JSON-compatible dict with fixed field names."""
    c = cfg.coherence
    return {
        "freqs": [float(f) for f in cfg.freqs],
        "groups": [int(g) for g in c.groups],
        "group_vectors": [_complex_vector_to_json(v) for v in c.group_vectors],
        "core_cov": _complex_matrix_to_json(np.asarray(c.core_cov, dtype=np.complex128)),
        "n_sensors": int(cfg.n_sensors),
        "subarray_m": int(cfg.subarray_m),
        "smoothing_p": int(cfg.smoothing_p),
        "snapshots": int(cfg.snapshots),
        "noise_sigma": float(cfg.noise_sigma),
        "seed": int(cfg.seed),
    }


def scenario_from_json(doc: dict) -> ScenarioConfig:
    """Rebuild a scenario from its JSON document."""
    coherence = CoherenceStructure(
        groups=tuple(int(g) for g in doc["groups"]),
        group_vectors=tuple(_complex_vector_from_json(v) for v in doc["group_vectors"]),
        core_cov=_complex_matrix_from_json(doc["core_cov"]),
    )
    return ScenarioConfig(
        freqs=tuple(float(f) for f in doc["freqs"]),
        coherence=coherence,
        n_sensors=int(doc["n_sensors"]),
        subarray_m=int(doc["subarray_m"]),
        smoothing_p=int(doc["smoothing_p"]),
        snapshots=int(doc["snapshots"]),
        noise_sigma=float(doc["noise_sigma"]),
        seed=int(doc["seed"]),
    )


def _complex_vector_to_json(v) -> list:
    arr = np.asarray(v, dtype=np.complex128)
    return [[float(x.real), float(x.imag)] for x in arr]


def _complex_vector_from_json(items) -> np.ndarray:
    return np.array([complex(re, im) for re, im in items], dtype=np.complex128)


def _complex_matrix_to_json(m: np.ndarray) -> list:
    return [_complex_vector_to_json(row) for row in m]


def _complex_matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=np.complex128)
