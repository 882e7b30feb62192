import json
from dataclasses import replace

import numpy as np
import pytest

from linespec.exceptions import (
    InvalidConfigError,
    NonPositiveDataError,
    UnknownPresetError,
)
from linespec.harness import (
    CSV_HEADER,
    MD_SENTINEL,
    ExperimentSpec,
    MethodSpec,
    apply_sweep,
    fit_loglog_slope,
    preset,
    read_data_file,
    run_experiment,
    spec_from_json,
    spec_to_json,
    write_data_file,
)
from linespec.model import generate_snapshots


class TestFitLoglogSlope:
    def test_exact_square_law(self):
        x = np.array([1.0, 2.0, 5.0, 10.0])
        fit = fit_loglog_slope(x, 3.0 * x**2)
        assert abs(fit.slope - 2.0) <= 1e-12
        assert fit.r_squared >= 1.0 - 1e-12

    def test_inverse_square_root(self):
        x = np.array([10.0, 100.0, 1000.0])
        fit = fit_loglog_slope(x, 7.0 / np.sqrt(x))
        assert abs(fit.slope + 0.5) <= 1e-12

    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveDataError):
            fit_loglog_slope([1.0, 2.0, 3.0], [1.0, 0.0, 2.0])
        with pytest.raises(NonPositiveDataError):
            fit_loglog_slope([1.0, 2.0], [1.0, 2.0])


class TestPresets:
    def test_exp1_fields(self):
        spec = preset("exp1")
        assert spec.base.freqs == (0.1, 0.5, 0.8)
        assert spec.base.n_sensors == 10
        assert spec.sweep_name == "noise_sigma"
        assert spec.metadata["full_study_trials"] == 1000

    def test_exp3_sweep_values(self):
        spec = preset("exp3")
        assert spec.sweep_values == (0.01, 0.03, 0.1, 0.3)
        assert spec.sweep_name == "min_separation"

    def test_exp4_geometry(self):
        spec = preset("exp4")
        assert spec.base.subarray_m == 7
        assert spec.base.coherence.groups == (3, 2, 1)
        assert spec.sweep_values == tuple(range(1, 10))
        assert {m.smoothing for m in spec.methods} == {"foss", "fbss"}

    def test_unknown_preset(self):
        with pytest.raises(UnknownPresetError):
            preset("exp9")

    def test_spec_json_roundtrip(self):
        spec = preset("exp4", trials=17)
        back = spec_from_json(json.loads(json.dumps(spec_to_json(spec))))
        assert back.sweep_values == spec.sweep_values
        assert back.trials == 17
        assert back.methods == spec.methods
        assert back.base.freqs == spec.base.freqs


class TestApplySweep:
    def test_min_separation_moves_second_largest(self):
        spec = preset("exp3")
        cfg = apply_sweep(spec.base, "min_separation", 0.03)
        assert cfg.freqs == (0.1, 0.8 - 0.03, 0.8)

    def test_smoothing_p_rescales_sensors(self):
        spec = preset("exp4")
        cfg = apply_sweep(spec.base, "smoothing_p", 5)
        assert cfg.smoothing_p == 5
        assert cfg.n_sensors == 7 + 5 - 1

    def test_unknown_axis(self):
        spec = preset("exp1")
        with pytest.raises(InvalidConfigError):
            apply_sweep(spec.base, "powers", 1.0)


class TestRunExperiment:
    def test_noiseless_single_trial(self):
        spec = preset("exp1", trials=1)
        spec = replace(spec, sweep_values=(1e-12,))
        res = run_experiment(spec)
        assert res.rows[0].mean_md <= 1e-7
        assert res.rows[0].failures == 0

    def test_deterministic_across_worker_counts(self):
        spec = preset("exp1", trials=6)
        spec = replace(spec, sweep_values=(0.1, 1.0))
        a = run_experiment(spec, workers=1)
        b = run_experiment(spec, workers=3)
        assert a.csv_text() == b.csv_text()
        assert [t.md for t in a.trials] == [t.md for t in b.trials]

    def test_csv_schema(self, tmp_path):
        spec = preset("exp1", trials=2)
        spec = replace(spec, sweep_values=(0.1,))
        res = run_experiment(spec)
        out = tmp_path / "rows.csv"
        res.write_csv(out)
        text = out.read_text()
        assert text.splitlines()[0] == ",".join(CSV_HEADER)
        assert len(text.splitlines()) == 2

    def test_aggregation_matches_trial_records(self):
        spec = preset("exp1", trials=9)
        spec = replace(spec, sweep_values=(0.2, 0.7))
        res = run_experiment(spec)
        for row in res.rows:
            mds = [t.md for t in res.trials
                   if t.sweep_value == row.sweep_value and t.method == row.method
                   and t.smoothing == row.smoothing]
            assert len(mds) == row.trials
            assert row.mean_md == float(np.mean(mds))
            assert row.median_md == float(np.median(mds))

    def test_failure_accounting_below_source_count(self):
        # with fewer snapshots than sources the subspace request must fail
        # and be charged as the sentinel, never silently estimated
        spec = preset("exp2", trials=4)
        spec = replace(spec, sweep_values=(1, 2))
        res = run_experiment(spec)
        for row in res.rows:
            assert row.failures == 4
            assert row.mean_md == MD_SENTINEL
            assert np.isnan(row.mean_md_ok)

    def test_methods_share_trial_data(self):
        # both smoothing modes must see the same generated data per trial
        spec = preset("exp4", trials=3)
        spec = replace(spec, sweep_values=(4,))
        res = run_experiment(spec)
        seeds = {(t.trial_index, t.scenario_seed) for t in res.trials}
        assert len(seeds) == 3

    def test_bound_columns(self):
        spec = preset("exp1", trials=2)
        spec = replace(spec, sweep_values=(0.1,))
        row = run_experiment(spec).rows[0]
        assert row.bound_value >= 0.0
        assert isinstance(row.bound_applicable, bool)
        # exp2 at L=1 violates the bound's snapshot precondition
        spec2 = preset("exp2", trials=1)
        spec2 = replace(spec2, sweep_values=(1,))
        row2 = run_experiment(spec2).rows[0]
        assert np.isnan(row2.bound_value)
        assert not row2.bound_applicable

    def test_validation(self):
        spec = preset("exp1", trials=0)
        with pytest.raises(InvalidConfigError):
            run_experiment(spec)
        bad = replace(preset("exp1", trials=1), sweep_values=(0.5, 0.1))
        with pytest.raises(InvalidConfigError):
            run_experiment(bad)


class TestDataFile:
    def test_payload_roundtrip(self, tmp_path):
        spec = preset("exp1", trials=1)
        cfg = spec.base.with_seed(99)
        snap = generate_snapshots(cfg)
        path = tmp_path / "data.json"
        write_data_file(path, cfg, snap)
        cfg_back, snap_back = read_data_file(path)
        assert cfg_back.freqs == cfg.freqs
        assert (cfg_back.n_sensors, cfg_back.subarray_m, cfg_back.smoothing_p) == (10, 10, 1)
        assert cfg_back.seed == cfg.seed
        assert np.array_equal(snap_back.y, snap.y)

    def test_header_is_scenario_document(self, tmp_path):
        spec = preset("exp4", trials=1)
        snap = generate_snapshots(spec.base)
        path = tmp_path / "data.json"
        write_data_file(path, spec.base, snap)
        doc = json.loads(path.read_text())
        for key in ("freqs", "groups", "group_vectors", "core_cov", "n_sensors",
                    "subarray_m", "smoothing_p", "snapshots", "noise_sigma", "seed"):
            assert key in doc
        assert "payload" in doc
