"""Line-spectral estimation with subspace methods and finite-sample bounds.

The package covers the full loop of a simulation study: scenario
description and synthetic data generation, plain and spatially smoothed
subspace estimation (ESPRIT and MUSIC), the matched wrap-around error
metric, closed-form finite-sample error bounds, and a reproducible Monte
Carlo experiment harness with CSV output.
"""

from .bounds import (
    BoundReport,
    HadamardBoundReport,
    SinThetaCheck,
    classical_sin_theta_check,
    empirical_ingredients,
    gaussian_perturbation_bound,
    hadamard_eig_bounds,
    md_error_bound,
    md_scaling_bound,
    population_ingredients,
    resolution_snapshot_threshold,
    scenario_md_bound,
    scenario_md_scaling_bound,
    scenario_subspace_bound,
    subspace_error_bound,
)
from .estimators import (
    EstimateResult,
    MusicSpectrum,
    SubspaceEstimate,
    esprit_frequencies,
    estimate,
    music_correlation,
    music_frequencies,
    music_spectrum,
    signal_subspace,
)
from .harness import (
    ExperimentResult,
    ExperimentRow,
    ExperimentSpec,
    MethodSpec,
    SlopeFit,
    TrialRecord,
    apply_sweep,
    fit_loglog_slope,
    preset,
    read_data_file,
    run_experiment,
    spec_from_json,
    spec_to_json,
    trial_seed,
    write_data_file,
)
from .linalg import (
    EigDecomposition,
    hermitian_eig,
    pseudo_inverse,
    spectral_norm,
    steering_vector,
    subspace_distance,
    svd_top_subspace,
    vandermonde,
)
from .metrics import (
    MatchReport,
    matched_distance,
    min_separation,
    resolution_achieved,
    wrap_distance,
)
from .model import (
    CoherenceStructure,
    ScenarioConfig,
    SnapshotMatrix,
    SourceCovariance,
    build_source_covariance,
    correlation_matrix_cp,
    doa_to_frequency,
    frequency_to_doa,
    generate_snapshots,
    scenario_from_json,
    scenario_to_json,
    smoothed_source_covariance,
)

__version__ = "0.1.0"
