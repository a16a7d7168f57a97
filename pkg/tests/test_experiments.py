"""Scenario runner: reproducibility, aggregation, presets, validation."""

import numpy as np
import pytest

from hybeam.channel import SparseChannelConfig, SystemDims, channel_spectrum
from hybeam.experiments import (
    PRESETS,
    ClosedFormCheck,
    Scenario,
    ValidationReport,
    draw_realization,
    realization_seed,
    resolve_workers,
    rms_study,
    run_scenario,
    validate_closed_forms,
)
from hybeam.metrics import LinkBudget, capacity

SMALL_DIMS = SystemDims(antennas=24, users=3, taps=4, subcarriers=32)


def small_scenario(**overrides):
    base = dict(
        name="small",
        dims=SMALL_DIMS,
        snr_db=(0.0, 10.0),
        realizations=6,
        schemes=("capacity", "rf_ltap", "rf_ltap+zf"),
        master_seed=99,
    )
    base.update(overrides)
    return Scenario(**base)


class TestScenarioValidation:
    def test_unknown_scheme(self):
        with pytest.raises(ValueError, match="unknown schemes"):
            small_scenario(schemes=("capacity", "mmse"))

    def test_empty_snr_grid(self):
        with pytest.raises(ValueError):
            small_scenario(snr_db=())

    def test_sparse_config_only_for_sparse_model(self):
        with pytest.raises(ValueError):
            small_scenario(sparse=SparseChannelConfig())

    def test_sparse_model_gets_default_config(self):
        s = small_scenario(channel_model="sparse")
        assert s.sparse == SparseChannelConfig()

    def test_unknown_model(self):
        with pytest.raises(ValueError):
            small_scenario(channel_model="rician")


class TestSeeds:
    def test_realization_seeds_distinct(self):
        s = small_scenario()
        seeds = {realization_seed(s, i) for i in range(50)}
        assert len(seeds) == 50

    def test_seed_depends_on_model_and_antennas(self):
        rich = small_scenario()
        sparse = small_scenario(channel_model="sparse")
        assert realization_seed(rich, 0) != realization_seed(sparse, 0)
        assert realization_seed(rich, 0) != realization_seed(rich, 0, antennas=48)

    def test_draws_reproducible(self):
        s = small_scenario()
        a = draw_realization(s, 3)
        b = draw_realization(s, 3)
        np.testing.assert_array_equal(a.taps.taps, b.taps.taps)

    def test_antenna_override_changes_shape(self):
        ch = draw_realization(small_scenario(), 0, antennas=48)
        assert ch.taps.taps.shape[1] == 48


class TestRunScenario:
    def test_single_realization_matches_direct_computation(self):
        s = small_scenario(realizations=1, schemes=("capacity",))
        result = run_scenario(s)
        ch = draw_realization(s, 0)
        grid = channel_spectrum(ch)
        for row in result.rows:
            direct = capacity(grid, LinkBudget.from_snr_db(row.snr_db))
            assert row.value == direct
            assert row.stderr == 0.0
            assert row.realizations == 1
            assert row.seed == 99

    def test_runs_reproducible(self):
        s = small_scenario()
        assert run_scenario(s) == run_scenario(s)

    def test_parallel_equals_serial(self):
        s = small_scenario()
        serial = run_scenario(s, workers=1)
        parallel = run_scenario(s, workers=2)
        assert serial == parallel

    def test_row_bookkeeping(self):
        s = small_scenario()
        result = run_scenario(s)
        assert result.failures == 0
        assert result.realizations == s.realizations
        schemes = {row.scheme for row in result.rows}
        assert schemes == {"capacity", "rf_ltap", "rf_ltap+zf"}
        # rf-only schemes report both their rate and their effective capacity
        metrics = {row.metric for row in result.rows if row.scheme == "rf_ltap"}
        assert metrics == {"rate", "capacity"}
        for row in result.rows:
            assert row.realizations == s.realizations
            assert row.stderr > 0.0

    def test_every_scheme_runs(self):
        from hybeam.experiments import SCHEMES

        s = small_scenario(realizations=2, schemes=SCHEMES)
        result = run_scenario(s)
        assert {row.scheme for row in result.rows} == set(SCHEMES)

    def test_matched_filter_saturates_while_zf_tracks_capacity(self):
        s = small_scenario(
            name="sat",
            dims=SystemDims(antennas=64, users=4, taps=4, subcarriers=64),
            snr_db=(10.0, 30.0),
            realizations=15,
            schemes=("capacity", "mf", "zf"),
        )
        values = {(r.scheme, r.metric, r.snr_db): r.value for r in run_scenario(s).rows}
        mf_gain = values[("mf", "rate", 30.0)] - values[("mf", "rate", 10.0)]
        zf_gain = values[("zf", "rate", 30.0)] - values[("zf", "rate", 10.0)]
        assert mf_gain < 2.0
        assert zf_gain > 15.0
        assert values[("zf", "rate", 30.0)] == pytest.approx(
            values[("capacity", "capacity", 30.0)], rel=0.05
        )

    def test_workers_env_cap(self, monkeypatch):
        monkeypatch.setenv("HYBEAM_THREADS", "1")
        assert resolve_workers(8) == 1
        assert resolve_workers(None) == 1
        monkeypatch.setenv("HYBEAM_THREADS", "3")
        assert resolve_workers(None) == 3
        assert resolve_workers(2) == 2
        monkeypatch.delenv("HYBEAM_THREADS")
        assert resolve_workers(None) == 1

    def test_workers_env_invalid(self, monkeypatch):
        monkeypatch.setenv("HYBEAM_THREADS", "lots")
        with pytest.raises(ValueError, match="HYBEAM_THREADS"):
            resolve_workers(None)
        monkeypatch.setenv("HYBEAM_THREADS", "0")
        with pytest.raises(ValueError):
            resolve_workers(None)


class TestRmsStudy:
    def test_schema_and_sweep_axis(self):
        s = small_scenario(schemes=(), realizations=4)
        rows = rms_study((16, 64), s)
        schemes = {row.scheme for row in rows}
        assert schemes == {"mf", "rf_1tap", "rf_ltap", "siso"}
        metrics = {row.metric for row in rows}
        assert "rms_mean" in metrics
        assert "rms_cdf_q50" in metrics
        # the antenna count rides in the snr_db column for sweep rows
        assert {row.snr_db for row in rows} == {16.0, 64.0}

    def test_combining_shrinks_with_antennas_but_siso_does_not(self):
        s = small_scenario(schemes=(), realizations=12)
        rows = rms_study((16, 256), s)
        means = {(r.scheme, r.snr_db): r.value for r in rows if r.metric == "rms_mean"}
        for scheme in ("mf", "rf_1tap", "rf_ltap"):
            assert means[(scheme, 256.0)] < 0.5 * means[(scheme, 16.0)]
        siso_change = abs(means[("siso", 256.0)] - means[("siso", 16.0)])
        assert siso_change < 0.1 * means[("siso", 16.0)]

    def test_quantiles_ordered_and_tightening(self):
        s = small_scenario(schemes=(), realizations=30)
        rows = rms_study((16, 256), s)
        by = {(r.scheme, r.snr_db, r.metric): r.value for r in rows}
        for scheme in ("mf", "rf_1tap", "rf_ltap", "siso"):
            for m in (16.0, 256.0):
                quantiles = [by[(scheme, m, f"rms_cdf_q{q:02d}")] for q in (5, 25, 50, 75, 95)]
                assert all(b >= a for a, b in zip(quantiles, quantiles[1:]))
        for scheme in ("mf", "rf_1tap", "rf_ltap"):
            iqr_small = by[(scheme, 16.0, "rms_cdf_q75")] - by[(scheme, 16.0, "rms_cdf_q25")]
            iqr_large = by[(scheme, 256.0, "rms_cdf_q75")] - by[(scheme, 256.0, "rms_cdf_q25")]
            assert iqr_large < iqr_small

    def test_deterministic(self):
        s = small_scenario(schemes=(), realizations=3)
        assert rms_study((16,), s) == rms_study((16,), s)
        assert rms_study((16, 64), s, workers=2) == rms_study((16, 64), s, workers=1)


class TestValidation:
    def test_report_structure(self):
        s = small_scenario(
            dims=SystemDims(antennas=64, users=3, taps=4, subcarriers=32),
            snr_db=(0.0,),
            realizations=4,
        )
        report = validate_closed_forms(s, rms_antenna_grid=(16,))
        assert isinstance(report, ValidationReport)
        names = [check.name for check in report.checks]
        assert "rf_ltap_rate@0dB" in names
        assert "rf_1tap_capacity@0dB" in names
        assert "rms_envelope_mf@M16" in names
        text = report.render()
        assert "checks passed" in text
        assert all(line.startswith(("PASS", "FAIL")) for line in text.splitlines())

    def test_check_bounds_logic(self):
        good = ClosedFormCheck(name="x", value=1.02, lower=0.95, upper=1.05, reference=1.0)
        assert good.passed
        assert good.rel_error == pytest.approx(0.02)
        bad = ClosedFormCheck(name="x", value=1.2, lower=0.95, upper=1.05)
        assert not bad.passed

    def test_passes_at_large_array(self):
        s = Scenario(
            name="val",
            dims=SystemDims(antennas=2500, users=4, taps=4, subcarriers=128),
            snr_db=(0.0,),
            realizations=30,
            schemes=(),
            master_seed=7,
        )
        report = validate_closed_forms(s, rms_antenna_grid=())
        assert report.passed, report.render()

    def test_ratio_checks_present_for_quadrupled_grid(self):
        s = small_scenario(snr_db=(0.0,), realizations=6)
        report = validate_closed_forms(s, rms_antenna_grid=(16, 64))
        names = [check.name for check in report.checks]
        assert "rms_ratio_mf@M64vsM16" in names

    def test_rejects_sparse_model(self):
        with pytest.raises(ValueError, match="rich"):
            validate_closed_forms(small_scenario(channel_model="sparse"))


class TestPresets:
    def test_catalog_complete(self):
        assert list(PRESETS) == ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"]
        for name, preset in PRESETS.items():
            assert preset.scenario.name == name
            assert preset.description

    def test_default_geometry(self):
        dims = PRESETS["fig2"].scenario.dims
        assert (dims.antennas, dims.users, dims.taps, dims.subcarriers) == (100, 4, 4, 128)

    def test_sweep_preset(self):
        preset = PRESETS["fig5"]
        assert preset.antenna_sweep == (20, 25, 100, 400, 500)
        assert preset.scenario.schemes == ()

    def test_flat_fading_preset(self):
        assert PRESETS["fig7"].scenario.dims.taps == 1

    def test_sparse_preset(self):
        s = PRESETS["fig8"].scenario
        assert s.channel_model == "sparse"
        assert s.sparse.paths_per_cluster == 5
