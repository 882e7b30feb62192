"""Closed-form finite-sample guarantees evaluated as checkable numbers.

Every bound here is a deterministic function of a handful of scalar
ingredients (extreme singular values of the array manifold, extreme
eigenvalues of a source covariance, noise level, dimensions). Two routes
feed those ingredients:

* the *empirical* route uses the realized source sample covariance of one
  synthetic trial (available because the generator keeps ground truth);
* the *population* route uses the scenario's exact source covariance.

Each evaluator returns a :class:`BoundReport` carrying the bound value,
its validity flag, the explicit probability floor of the statement, and
all intermediate quantities, so reports can be logged or serialized
without recomputation.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .exceptions import (
    DegenerateGapError,
    DimensionTooSmallError,
    InvalidConfigError,
    NotPositiveDefiniteError,
    StructureMismatchError,
    TooFewSnapshotsError,
)
from .linalg import hermitian_eig, spectral_norm, subspace_distance, svd_top_subspace, vandermonde
from .model import (
    CoherenceStructure,
    ScenarioConfig,
    SnapshotMatrix,
    SourceCovariance,
    build_source_covariance,
    correlation_matrix_cp,
    smoothed_source_covariance,
)

PLAIN, FOSS, FBSS = "plain", "foss", "fbss"
_VARIANTS = (PLAIN, FOSS, FBSS)

APPLICABILITY_LIMIT = 0.586
GAP_FRACTION = 0.293
PD_RELATIVE_TOL = 1e-10


@dataclass(frozen=True)
class BoundReport:
    """One evaluated theoretical guarantee with its context.

    ``value`` is the bound itself, ``applicable`` records whether the
    statement's validity condition holds, and ``probability_floor`` is the
    explicit success probability (clamped to [0, 1]; the raw value sits in
    ``ingredients``).
    """

    kind: str
    variant: str
    route: str
    value: float
    applicable: bool
    probability_floor: float
    ingredients: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["ingredients"] = {k: float(v) for k, v in self.ingredients.items()}
        return doc


@dataclass(frozen=True)
class HadamardBoundReport:
    """Eigenvalue bounds for a Hadamard product of PSD factors.

    ``schur_lower <= exact_min_eig <= schur_upper`` always; the remaining
    lower bounds are populated only when their preconditions hold
    (``hplb2`` needs at least as many subarrays as sources, ``prop1``
    needs an explicit coherence structure).
    """

    schur_lower: float
    schur_upper: float
    hplb1: float
    hplb2: float | None
    prop1: float | None
    exact_min_eig: float


@dataclass(frozen=True)
class SinThetaCheck:
    """Observed subspace rotation against its classical perturbation bound."""

    applicable: bool
    bound: float
    observed: float


def _check_variant(variant: str) -> str:
    v = variant.lower()
    if v == "none":
        v = PLAIN
    if v not in _VARIANTS:
        raise InvalidConfigError(f"unknown variant {variant!r}; expected one of {_VARIANTS}")
    return v


def _clamp_probability(raw: float) -> float:
    return min(1.0, max(0.0, raw))


def gaussian_perturbation_bound(sigma: float, sigma1: float, sigma_r: float,
                                sigma_r1: float, p: int, n: int) -> BoundReport:
    """Left-singular-subspace perturbation under i.i.d. complex Gaussian noise.

    For a p x n matrix with top singular value ``sigma1`` and a gap between
    the r-th and (r+1)-th singular values, additive noise of entrywise
    standard deviation ``sigma`` rotates the top-r left singular subspace by
    at most::

        (12 sigma sigma1 sqrt(p) + 16 sigma^2 max(sqrt(p n), p))
        / (sigma_r^2 - sigma_{r+1}^2)

    with probability at least ``1 - 3 exp(-p/2)``, provided the value is
    below 0.586.
    """
    if not sigma_r > sigma_r1 >= 0.0:
        raise DegenerateGapError(f"need sigma_r > sigma_r1 >= 0, got {sigma_r}, {sigma_r1}")
    if p < 1 or n < 1:
        raise InvalidConfigError(f"dimensions must be positive, got p={p}, n={n}")
    numer = 12.0 * sigma * sigma1 * np.sqrt(p) + 16.0 * sigma**2 * max(np.sqrt(p * n), p)
    value = numer / (sigma_r**2 - sigma_r1**2)
    raw_floor = 1.0 - 3.0 * np.exp(-p / 2.0)
    return BoundReport(
        kind="perturbation",
        variant=PLAIN,
        route="direct",
        value=float(value),
        applicable=bool(value < APPLICABILITY_LIMIT),
        probability_floor=_clamp_probability(raw_floor),
        ingredients={
            "noise_sigma": float(sigma),
            "sigma_1": float(sigma1),
            "sigma_r": float(sigma_r),
            "sigma_r_plus_1": float(sigma_r1),
            "rows": float(p),
            "cols": float(n),
            "raw_probability_floor": float(raw_floor),
        },
    )


def _require_pd(lambda_k: float, scale: float, what: str) -> None:
    if lambda_k <= PD_RELATIVE_TOL * max(scale, 1e-300):
        raise NotPositiveDefiniteError(
            f"{what} is numerically singular: lambda_K = {lambda_k:.3e} at scale {scale:.3e}"
        )


def _noise_numerator(noise_sigma: float, a_norm: float, sigma_norm: float,
                     dim: int, snapshots: int) -> float:
    ratio = dim / snapshots
    return (12.0 * noise_sigma * a_norm * np.sqrt(sigma_norm) * np.sqrt(ratio)
            + 16.0 * noise_sigma**2 * max(np.sqrt(ratio), ratio))


def _floor_subspace(variant: str, dim: int, subarrays: int) -> float:
    if variant == PLAIN:
        return 1.0 - 3.0 * np.exp(-dim / 2.0)
    return 1.0 - 3.0 * subarrays * np.exp(-dim / 2.0)


def subspace_error_bound(variant: str, *, a_norm: float, a_sigma_k: float,
                         sigma_norm: float, lambda_k: float, noise_sigma: float,
                         dim: int, snapshots: int, subarrays: int = 1) -> BoundReport:
    """High-probability bound on the signal-subspace estimation error.

    Parameters
    ----------
    variant : {"plain", "foss", "fbss"}
    a_norm, a_sigma_k : float
        Largest and K-th singular value of the manifold (full array for
        plain, subarray manifold for the smoothed variants).
    sigma_norm : float
        Spectral norm of the empirical source covariance.
    lambda_k : float
        Smallest eigenvalue of the variant's (smoothed) empirical source
        covariance; must be positive.
    noise_sigma : float
    dim : int
        Rows of the data matrix the subspace came from (N or M).
    snapshots : int
    subarrays : int
        Number of overlapping subarrays P (1 for plain).
    """
    v = _check_variant(variant)
    _require_pd(lambda_k, sigma_norm, "smoothed source sample covariance" if v != PLAIN
                else "source sample covariance")
    numer = _noise_numerator(noise_sigma, a_norm, sigma_norm, dim, snapshots)
    value = numer / (a_sigma_k**2 * lambda_k)
    raw_floor = _floor_subspace(v, dim, subarrays)
    return BoundReport(
        kind="subspace",
        variant=v,
        route="empirical",
        value=float(value),
        applicable=bool(value < APPLICABILITY_LIMIT),
        probability_floor=_clamp_probability(raw_floor),
        ingredients={
            "a_norm": float(a_norm),
            "a_sigma_k": float(a_sigma_k),
            "sigma_hat_norm": float(sigma_norm),
            "lambda_k": float(lambda_k),
            "noise_sigma": float(noise_sigma),
            "dim": float(dim),
            "snapshots": float(snapshots),
            "subarrays": float(subarrays),
            "kappa_a": float(a_norm / a_sigma_k),
            "snr_proxy": float(a_sigma_k**2 * lambda_k / noise_sigma**2) if noise_sigma > 0 else np.inf,
            "raw_probability_floor": float(raw_floor),
        },
    )


def md_error_bound(variant: str, *, a_norm: float, a_sigma_k: float, sigma_norm: float,
                   lambda_k: float, noise_sigma: float, dim: int, snapshots: int,
                   k: int, subarrays: int = 1) -> BoundReport:
    """High-probability bound on the matched frequency-estimation distance.

    Scales the subspace error bound by ``2^{2K+4} K^{3/2} sqrt(dim) /
    sigma_K`` and caps at one (the metric never exceeds 1). The 0.586
    validity condition of the subspace bound is not required here -- the
    unit cap subsumes it -- but its status is recorded in the ingredients
    for diagnostics.
    """
    v = _check_variant(variant)
    if dim < k + 1:
        raise DimensionTooSmallError(f"need dim >= K+1, got dim={dim}, K={k}")
    _require_pd(lambda_k, sigma_norm, "source sample covariance (possibly smoothed)")
    numer = _noise_numerator(noise_sigma, a_norm, sigma_norm, dim, snapshots)
    prefactor = 2.0 ** (2 * k + 4) * k**1.5 * np.sqrt(dim)
    raw_value = prefactor * numer / (a_sigma_k**3 * lambda_k)
    subspace_value = numer / (a_sigma_k**2 * lambda_k)
    raw_floor = _floor_subspace(v, dim, subarrays)
    return BoundReport(
        kind="md",
        variant=v,
        route="empirical",
        value=float(min(1.0, raw_value)),
        applicable=True,
        probability_floor=_clamp_probability(raw_floor),
        ingredients={
            "a_norm": float(a_norm),
            "a_sigma_k": float(a_sigma_k),
            "sigma_hat_norm": float(sigma_norm),
            "lambda_k": float(lambda_k),
            "noise_sigma": float(noise_sigma),
            "dim": float(dim),
            "snapshots": float(snapshots),
            "k": float(k),
            "subarrays": float(subarrays),
            "uncapped_value": float(raw_value),
            "subspace_bound": float(subspace_value),
            "subspace_bound_applicable": float(subspace_value < APPLICABILITY_LIMIT),
            "raw_probability_floor": float(raw_floor),
        },
    )


def md_scaling_bound(variant: str, *, a_norm: float, a_sigma_k: float, sigma_norm: float,
                     lambda_k: float, rank_sigma: int, k: int, dim: int,
                     snapshots: int, noise_sigma: float, subarrays: int = 1) -> BoundReport:
    """Population-route matched-distance bound with explicit ``1/sqrt(L)`` decay.

    Requires ``L >= max(N, 16 K)`` for the plain variant and
    ``L >= max(M, 16 rank(Sigma))`` for the smoothed ones. ``sigma_norm``
    and ``lambda_k`` here are population quantities: the spectral norm of
    the exact source covariance and the smallest eigenvalue of the
    variant's (smoothed) source covariance.
    """
    v = _check_variant(variant)
    if dim < k + 1:
        raise DimensionTooSmallError(f"need dim >= K+1, got dim={dim}, K={k}")
    needed = max(dim, 16 * k) if v == PLAIN else max(dim, 16 * rank_sigma)
    if snapshots < needed:
        raise TooFewSnapshotsError(f"need L >= {needed}, got L={snapshots}")
    _require_pd(lambda_k, sigma_norm, "population source covariance (possibly smoothed)")
    noise_term = max(noise_sigma * a_norm * np.sqrt(sigma_norm), noise_sigma**2)
    raw_value = (72.0 * 2.0 ** (2 * k + 5) * k**1.5 * dim
                 / (a_sigma_k**3 * lambda_k) * noise_term / np.sqrt(snapshots))
    raw_floor = _floor_subspace(v, dim, subarrays) - 2.0 * np.exp(-snapshots / 32.0)
    return BoundReport(
        kind="md_scaling",
        variant=v,
        route="population",
        value=float(min(1.0, raw_value)),
        applicable=True,
        probability_floor=_clamp_probability(raw_floor),
        ingredients={
            "a_norm": float(a_norm),
            "a_sigma_k": float(a_sigma_k),
            "sigma_norm": float(sigma_norm),
            "lambda_k": float(lambda_k),
            "rank_sigma": float(rank_sigma),
            "k": float(k),
            "dim": float(dim),
            "snapshots": float(snapshots),
            "noise_sigma": float(noise_sigma),
            "subarrays": float(subarrays),
            "uncapped_value": float(raw_value),
            "raw_probability_floor": float(raw_floor),
        },
    )


def resolution_snapshot_threshold(variant: str, *, a_norm: float, a_sigma_k: float,
                                  sigma_norm: float, lambda_k: float, rank_sigma: int,
                                  k: int, dim: int, separation: float,
                                  noise_sigma: float) -> float:
    """Snapshot count beyond which the requested resolution is guaranteed.

    Returns the explicit threshold; with more snapshots than this, the
    matched distance falls below half the frequency separation with the
    same probability floor as the scaling bound.
    """
    v = _check_variant(variant)
    if separation <= 0.0:
        raise InvalidConfigError(f"separation must be positive, got {separation}")
    _require_pd(lambda_k, sigma_norm, "population source covariance (possibly smoothed)")
    noise_term = max(noise_sigma**2 * a_norm**2 * sigma_norm, noise_sigma**4)
    third = (72.0**2 * 2.0 ** (4 * k + 12) * k**3 * dim**2 * noise_term
             / (a_sigma_k**6 * lambda_k**2 * separation**2))
    floor_term = 16 * k if v == PLAIN else 16 * rank_sigma
    return float(max(dim, floor_term, third))


def hadamard_eig_bounds(sigma: SourceCovariance, coherence: CoherenceStructure | None,
                        freqs, p: int) -> HadamardBoundReport:
    """Lower/upper bounds on the smallest eigenvalue of a smoothed covariance.

    Evaluates the product-of-PSD-factors sandwich, the two simple lower
    bounds (smallest covariance eigenvalue; smallest correlation eigenvalue
    times smallest source power, valid once the subarray count reaches the
    source count), and the structured lower bound built from per-group
    manifold blocks when a coherence structure is supplied.
    """
    mat = sigma.sigma if isinstance(sigma, SourceCovariance) else np.asarray(sigma, dtype=np.complex128)
    c_p = correlation_matrix_cp(freqs, p)
    k = mat.shape[0]
    if c_p.shape != mat.shape:
        raise StructureMismatchError(
            f"covariance is {mat.shape} but {k} frequencies were supplied"
        )
    product = mat * c_p
    exact = float(np.linalg.eigvalsh(0.5 * (product + product.conj().T)).min())
    sig_eigs = np.linalg.eigvalsh(mat)
    diag_c = np.real(np.diag(c_p))
    schur_lower = float(sig_eigs.min() * diag_c.min())
    schur_upper = float(sig_eigs.max() * diag_c.max())
    hplb1 = float(sig_eigs.min())
    hplb2 = None
    if p >= k:
        a_p = vandermonde(freqs, p)
        s_k = np.linalg.svd(a_p, compute_uv=False)[k - 1]
        hplb2 = float(s_k**2 / p * np.real(np.diag(mat)).min())
    prop1 = None
    if coherence is not None:
        rebuilt = build_source_covariance(coherence)
        if rebuilt.sigma.shape != mat.shape or np.abs(rebuilt.sigma - mat).max() > 1e-8 * (1.0 + np.abs(mat).max()):
            raise StructureMismatchError("coherence structure does not reproduce the covariance")
        core_min = float(np.linalg.eigvalsh(np.asarray(coherence.core_cov, dtype=np.complex128)).min())
        a_p = vandermonde(freqs, p)
        factor = np.inf
        col = 0
        for g, vec in zip(coherence.groups, coherence.group_vectors):
            block = a_p[:, col : col + g]
            svals = np.linalg.svd(block, compute_uv=False)
            s_g = float(svals[g - 1]) if svals.size >= g else 0.0
            weight = float(np.abs(np.asarray(vec)).min() ** 2)
            factor = min(factor, s_g**2 * weight)
            col += g
        prop1 = float(core_min * factor / p)
    return HadamardBoundReport(
        schur_lower=schur_lower,
        schur_upper=schur_upper,
        hplb1=hplb1,
        hplb2=hplb2,
        prop1=prop1,
        exact_min_eig=exact,
    )


def classical_sin_theta_check(kind: str, m, e, r: int) -> SinThetaCheck:
    """Evaluate a classical sin-theta perturbation bound on a concrete pair.

    ``kind`` selects the Hermitian eigenvector statement
    (``"davis-kahan"``) or its singular-subspace extension (``"wedin"``).
    The check is *applicable* when the perturbation norm stays below 0.293
    times the relevant spectral gap, in which case the observed rotation of
    the top-``r`` subspace(s) must not exceed ``2 ||E|| / gap``.
    """
    name = kind.lower().replace("_", "-")
    a = np.asarray(m, dtype=np.complex128)
    pert = np.asarray(e, dtype=np.complex128)
    if a.shape != pert.shape:
        raise InvalidConfigError(f"matrix and perturbation shapes differ: {a.shape} vs {pert.shape}")
    e_norm = spectral_norm(pert)
    if name in ("davis-kahan", "daviskahan", "dk"):
        base = hermitian_eig(a)           # raises NotHermitianError if not Hermitian
        noisy = hermitian_eig(a + pert)
        if r >= a.shape[0]:
            raise DimensionTooSmallError(f"need r < p, got r={r}, p={a.shape[0]}")
        gap = float(base.values[r - 1] - base.values[r])
        observed = subspace_distance(noisy.vectors[:, :r], base.vectors[:, :r])
    elif name == "wedin":
        if r >= min(a.shape):
            raise DimensionTooSmallError(f"need r < min(p, n), got r={r}, shape={a.shape}")
        u0, s0 = svd_top_subspace(a, r)
        v0, _ = svd_top_subspace(a.conj().T, r)
        u1, _ = svd_top_subspace(a + pert, r)
        v1, _ = svd_top_subspace((a + pert).conj().T, r)
        gap = float(s0[r - 1] - s0[r])
        observed = max(subspace_distance(u1, u0), subspace_distance(v1, v0))
    else:
        raise InvalidConfigError(f"unknown kind {kind!r}; expected 'davis-kahan' or 'wedin'")
    if gap <= 0.0:
        raise DegenerateGapError(f"spectral gap at position {r} is not positive: {gap}")
    return SinThetaCheck(
        applicable=bool(e_norm <= GAP_FRACTION * gap),
        bound=float(2.0 * e_norm / gap),
        observed=float(observed),
    )


# ---------------------------------------------------------------------------
# ingredient extraction from scenarios
# ---------------------------------------------------------------------------

def _manifold_extremes(freqs, dim: int, k: int) -> tuple[float, float]:
    svals = np.linalg.svd(vandermonde(freqs, dim), compute_uv=False)
    return float(svals[0]), float(svals[k - 1])


def population_ingredients(cfg: ScenarioConfig, variant: str) -> dict:
    """Population-route ingredients of a scenario for one smoothing variant."""
    v = _check_variant(variant)
    k = cfg.n_sources
    dim = cfg.n_sensors if v == PLAIN else cfg.subarray_m
    a_norm, a_sigma_k = _manifold_extremes(cfg.freqs, dim, k)
    cov = build_source_covariance(cfg.coherence)
    if v == PLAIN:
        lam = float(np.linalg.eigvalsh(cov.sigma).min())
    else:
        smoothed = smoothed_source_covariance(cov, cfg.freqs, cfg.smoothing_p, v, m=cfg.subarray_m)
        lam = float(np.linalg.eigvalsh(smoothed).min())
    return {
        "a_norm": a_norm,
        "a_sigma_k": a_sigma_k,
        "sigma_norm": float(np.linalg.eigvalsh(cov.sigma).max()),
        "lambda_k": lam,
        "rank_sigma": cov.rank,
        "k": k,
        "dim": dim,
        "snapshots": cfg.snapshots,
        "noise_sigma": cfg.noise_sigma,
        "subarrays": cfg.smoothing_p if v != PLAIN else 1,
    }


def empirical_ingredients(cfg: ScenarioConfig, snap: SnapshotMatrix, variant: str) -> dict:
    """Empirical-route ingredients from one realized trial's source signals."""
    if snap.s is None:
        raise InvalidConfigError("empirical ingredients need the ground-truth source block")
    v = _check_variant(variant)
    k = cfg.n_sources
    dim = cfg.n_sensors if v == PLAIN else cfg.subarray_m
    a_norm, a_sigma_k = _manifold_extremes(cfg.freqs, dim, k)
    sigma_hat = snap.s @ snap.s.conj().T / snap.snapshots
    sigma_hat = 0.5 * (sigma_hat + sigma_hat.conj().T)
    if v == PLAIN:
        lam = float(np.linalg.eigvalsh(sigma_hat).min())
    else:
        smoothed = smoothed_source_covariance(sigma_hat, cfg.freqs, cfg.smoothing_p, v, m=cfg.subarray_m)
        lam = float(np.linalg.eigvalsh(smoothed).min())
    return {
        "a_norm": a_norm,
        "a_sigma_k": a_sigma_k,
        "sigma_norm": float(np.linalg.eigvalsh(sigma_hat).max()),
        "lambda_k": lam,
        "k": k,
        "dim": dim,
        "snapshots": snap.snapshots,
        "noise_sigma": cfg.noise_sigma,
        "subarrays": cfg.smoothing_p if v != PLAIN else 1,
    }


def scenario_subspace_bound(cfg: ScenarioConfig, snap: SnapshotMatrix, variant: str) -> BoundReport:
    """Empirical-route subspace error bound for one realized trial."""
    ing = empirical_ingredients(cfg, snap, variant)
    return subspace_error_bound(
        variant,
        a_norm=ing["a_norm"], a_sigma_k=ing["a_sigma_k"],
        sigma_norm=ing["sigma_norm"], lambda_k=ing["lambda_k"],
        noise_sigma=ing["noise_sigma"], dim=ing["dim"],
        snapshots=ing["snapshots"], subarrays=ing["subarrays"],
    )


def scenario_md_bound(cfg: ScenarioConfig, snap: SnapshotMatrix, variant: str) -> BoundReport:
    """Empirical-route matched-distance bound for one realized trial."""
    ing = empirical_ingredients(cfg, snap, variant)
    return md_error_bound(
        variant,
        a_norm=ing["a_norm"], a_sigma_k=ing["a_sigma_k"],
        sigma_norm=ing["sigma_norm"], lambda_k=ing["lambda_k"],
        noise_sigma=ing["noise_sigma"], dim=ing["dim"],
        snapshots=ing["snapshots"], k=ing["k"], subarrays=ing["subarrays"],
    )


def scenario_md_scaling_bound(cfg: ScenarioConfig, variant: str) -> BoundReport:
    """Population-route matched-distance scaling bound for a scenario."""
    ing = population_ingredients(cfg, variant)
    return md_scaling_bound(
        variant,
        a_norm=ing["a_norm"], a_sigma_k=ing["a_sigma_k"],
        sigma_norm=ing["sigma_norm"], lambda_k=ing["lambda_k"],
        rank_sigma=ing["rank_sigma"], k=ing["k"], dim=ing["dim"],
        snapshots=ing["snapshots"], noise_sigma=ing["noise_sigma"],
        subarrays=ing["subarrays"],
    )
