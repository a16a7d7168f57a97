"""End-to-end acceptance checks against closed-form oracles.

Every test registers a one-line "ACCEPTANCE n PASS/FAIL: ..." verdict that
the terminal summary echoes after the run (also printed live under ``-s``).
Tolerances are fixed; do not loosen them to make a failing check pass.
"""

import time

import numpy as np
import pytest

from hybeam import (
    LinkBudget,
    Scenario,
    SystemDims,
    achievable_rate_hybrid,
    capacity,
    capacity_limit,
    channel_spectrum,
    decompose_to_phase_banks,
    derive_seed,
    dft_of_taps,
    draw_rich,
    effective_channel,
    exponential_pdp,
    mf_combiner,
    rate_spectral,
    rms_study,
    run_scenario,
    sinr_ceiling_1tap,
    sinr_ceiling_ltap,
    sinr_limit_1tap,
    sinr_limit_ltap,
    zf_baseband,
    zf_spectrum,
)
from hybeam.channel import stream
from hybeam.closed_forms import MODEL_1TAP, MODEL_LTAP
from hybeam.cli import write_csv
from hybeam.numerics import TapSequence

DIMS = SystemDims(antennas=100, users=4, taps=4, subcarriers=128)
PDP = exponential_pdp(DIMS.taps, DIMS.users)
LOW_SNRS = (-10.0, -5.0, 0.0, 5.0)
CAP_SNRS = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


def _verdict(log, number, passed, detail):
    line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'}: {detail}"
    log.append(line)
    print(line)
    assert passed, line


def _closed_form_sum_rate(limit_fn, link, antennas=DIMS.antennas, users=DIMS.users, pdp=PDP):
    per_user = [limit_fn(link, antennas, users, pdp.column(u)) for u in range(users)]
    return float(sum(np.log2(1.0 + s) for s in per_user))


@pytest.fixture(scope="module")
def rich_run():
    """One 200-realization run shared by the rich-channel criteria."""
    scenario = Scenario(
        name="acceptance_rich",
        dims=DIMS,
        snr_db=CAP_SNRS + (30.0,),
        realizations=200,
        schemes=(
            "capacity",
            "rf_1tap",
            "rf_ltap",
            "rf_1tap+zf",
            "rf_ltap+zf",
            "heuristic_1tap+zf",
        ),
    )
    start = time.perf_counter()
    result = run_scenario(scenario)
    elapsed = time.perf_counter() - start
    by_key = {(r.scheme, r.metric, r.snr_db): r.value for r in result.rows}
    return by_key, elapsed


@pytest.fixture(scope="module")
def bank_zf_sweep():
    """Fifty seeds of phase-bank hybrid ZF next to fully-digital ZF."""
    dims = SystemDims(antennas=64, users=4, taps=4, subcarriers=128)
    pdp = exponential_pdp(dims.taps, dims.users)
    link = LinkBudget.from_snr_db(10.0)
    eye = np.eye(dims.users)
    rate_gaps = []
    identity_residuals = []
    for index in range(50):
        ch = draw_rich(dims, pdp, derive_seed(20240817, 5, index))
        spec = channel_spectrum(ch)
        digital = zf_spectrum(spec)
        rate_digital = rate_spectral(digital, spec, link)

        bank = decompose_to_phase_banks(mf_combiner(ch))
        eff = effective_channel(bank.combined(), ch)
        baseband = zf_baseband(eff)
        rate_bank = achievable_rate_hybrid(eff, baseband, link)
        rate_gaps.append(abs(rate_bank - rate_digital) / rate_digital)

        eff_spec = dft_of_taps(eff.taps, eff.num_subcarriers)
        for grid, target in ((digital, spec), (baseband, eff_spec)):
            residual = np.einsum("kur,krv->kuv", grid, target) - eye
            identity_residuals.append(
                float(np.linalg.norm(residual, axis=(1, 2)).max())
            )
    return np.array(rate_gaps), np.array(identity_residuals)


def test_acceptance_01_ltap_rate_matches_limit(rich_run, acceptance_log):
    by_key, elapsed = rich_run
    errors = {}
    for snr in LOW_SNRS:
        predicted = _closed_form_sum_rate(sinr_limit_ltap, LinkBudget.from_snr_db(snr))
        errors[snr] = abs(by_key[("rf_ltap", "rate", snr)] - predicted) / predicted
    worst = max(errors.values())
    ok = worst <= 0.05 and elapsed < 120.0
    _verdict(
        acceptance_log, 1, ok,
        f"L-tap sum rate vs closed form, max rel err {worst:.3%} (tol 5%) "
        f"over {len(LOW_SNRS)} SNRs, shared run {elapsed:.1f}s (< 120s)",
    )


def test_acceptance_02_1tap_rate_matches_limit(rich_run, acceptance_log):
    by_key, _ = rich_run
    errors = {}
    for snr in LOW_SNRS:
        predicted = _closed_form_sum_rate(sinr_limit_1tap, LinkBudget.from_snr_db(snr))
        errors[snr] = abs(by_key[("rf_1tap", "rate", snr)] - predicted) / predicted
    worst = max(errors.values())
    _verdict(
        acceptance_log, 2, worst <= 0.05,
        f"1-tap sum rate vs closed form, max rel err {worst:.3%} (tol 5%)",
    )


def test_acceptance_03_effective_capacity_matches_limit(rich_run, acceptance_log):
    by_key, _ = rich_run
    worst_small = 0.0
    for scheme, model in (("rf_ltap", MODEL_LTAP), ("rf_1tap", MODEL_1TAP)):
        for snr in CAP_SNRS:
            predicted = capacity_limit(
                LinkBudget.from_snr_db(snr), DIMS.antennas, PDP, model
            )
            err = abs(by_key[(scheme, "capacity", snr)] - predicted) / predicted
            worst_small = max(worst_small, err)

    huge_dims = SystemDims(antennas=10_000, users=4, taps=4, subcarriers=128)
    huge = run_scenario(
        Scenario(
            name="acceptance_huge",
            dims=huge_dims,
            snr_db=CAP_SNRS,
            realizations=20,
            schemes=("rf_1tap", "rf_ltap"),
        )
    )
    huge_key = {(r.scheme, r.metric, r.snr_db): r.value for r in huge.rows}
    worst_huge = 0.0
    for scheme, model in (("rf_ltap", MODEL_LTAP), ("rf_1tap", MODEL_1TAP)):
        for snr in CAP_SNRS:
            predicted = capacity_limit(
                LinkBudget.from_snr_db(snr), huge_dims.antennas, PDP, model
            )
            err = abs(huge_key[(scheme, "capacity", snr)] - predicted) / predicted
            worst_huge = max(worst_huge, err)

    ok = worst_small <= 0.05 and worst_huge <= 0.015
    _verdict(
        acceptance_log, 3, ok,
        f"effective-channel capacity vs limit, max rel err {worst_small:.3%} "
        f"at M=100 (tol 5%), {worst_huge:.3%} at M=10000 (tol 1.5%)",
    )


def test_acceptance_04_delay_spread_scaling(acceptance_log):
    grid = (25, 100, 400)
    scenario = Scenario(
        name="acceptance_rms", dims=DIMS, snr_db=(10.0,), realizations=200,
        schemes=("mf",),
    )
    rows = rms_study(grid, scenario)
    means = {
        (r.scheme, int(r.snr_db)): r.value for r in rows if r.metric == "rms_mean"
    }
    schemes = ("mf", "rf_1tap", "rf_ltap")
    envelope_ok = all(
        1.0 / np.sqrt(m) <= means[(s, m)] <= 3.0 / np.sqrt(m)
        for s in schemes
        for m in grid
    )
    ratios = [
        means[(s, 4 * m)] / means[(s, m)] for s in schemes for m in (25, 100)
    ]
    ratio_ok = all(0.40 <= r <= 0.62 for r in ratios)
    _verdict(
        acceptance_log, 4, envelope_ok and ratio_ok,
        f"rms delay spread inside [1/sqrt(M), 3/sqrt(M)] over M={grid}: "
        f"{envelope_ok}; 4x-antenna ratios {min(ratios):.3f}..{max(ratios):.3f} "
        f"in [0.40, 0.62]: {ratio_ok}",
    )


def test_acceptance_05_phase_bank_zf_matches_digital(bank_zf_sweep, acceptance_log):
    rate_gaps, _ = bank_zf_sweep
    worst = float(rate_gaps.max())
    _verdict(
        acceptance_log, 5, worst <= 1e-9,
        f"two-bank hybrid ZF rate vs fully-digital ZF, max rel gap "
        f"{worst:.2e} over 50 seeds (tol 1e-9)",
    )


def test_acceptance_06_zero_forcing_identity(bank_zf_sweep, acceptance_log):
    _, identity_residuals = bank_zf_sweep
    worst = float(identity_residuals.max())
    _verdict(
        acceptance_log, 6, worst < 1e-9,
        f"max Frobenius residual of ZF-times-channel minus identity "
        f"{worst:.2e} over all subcarriers and seeds (tol 1e-9)",
    )


def test_acceptance_07_time_frequency_consistency(acceptance_log):
    link = LinkBudget.from_snr_db(10.0)
    worst = 0.0
    for index in range(100):
        rng = stream(20240817, 7, index)
        m = int(rng.integers(1, 17))
        u = int(rng.integers(1, min(m, 4) + 1))
        taps = int(rng.integers(1, 5))
        k = int(rng.integers(max(2 * taps - 1, 2), 33))
        gains = (
            rng.standard_normal((taps, m, u)) + 1j * rng.standard_normal((taps, m, u))
        ) / np.sqrt(2.0)

        spectral = capacity(dft_of_taps(TapSequence(0, gains), k), link)

        block = np.zeros((k * m, k * u), dtype=complex)
        for row in range(k):
            for tap in range(taps):
                col = (row - tap) % k
                block[row * m:(row + 1) * m, col * u:(col + 1) * u] = gains[tap]
        gram = block.conj().T @ block
        _, logdet = np.linalg.slogdet(np.eye(k * u) + link.snr * gram)
        circulant = logdet / (k * np.log(2.0))

        worst = max(worst, abs(spectral - circulant) / max(circulant, 1.0))
    _verdict(
        acceptance_log, 7, worst <= 1e-10,
        f"subcarrier capacity vs block-circulant time-domain capacity, "
        f"max rel err {worst:.2e} over 100 random instances (tol 1e-10)",
    )


def test_acceptance_08_high_snr_saturation(rich_run, acceptance_log):
    by_key, _ = rich_run
    ceilings = {
        "rf_ltap": sum(
            np.log2(1.0 + sinr_ceiling_ltap(DIMS.antennas, DIMS.users, PDP.column(u)))
            for u in range(DIMS.users)
        ),
        "rf_1tap": sum(
            np.log2(1.0 + sinr_ceiling_1tap(DIMS.antennas, DIMS.users, PDP.column(u)))
            for u in range(DIMS.users)
        ),
    }
    errors = {
        scheme: abs(by_key[(scheme, "rate", 30.0)] - ceiling) / ceiling
        for scheme, ceiling in ceilings.items()
    }
    worst = max(errors.values())
    _verdict(
        acceptance_log, 8, worst <= 0.10,
        f"RF-only sum rate at 30 dB vs infinite-power ceiling, max rel err "
        f"{worst:.3%} (tol 10%)",
    )


def test_acceptance_09_scheme_ordering(rich_run, acceptance_log):
    by_key, _ = rich_run
    cap = by_key[("capacity", "capacity", 10.0)]
    ltap = by_key[("rf_ltap+zf", "rate", 10.0)]
    onetap = by_key[("rf_1tap+zf", "rate", 10.0)]
    heuristic = by_key[("heuristic_1tap+zf", "rate", 10.0)]
    ok = cap >= ltap >= onetap > heuristic
    _verdict(
        acceptance_log, 9, ok,
        f"mean rates at 10 dB ordered: capacity {cap:.2f} >= L-tap+ZF "
        f"{ltap:.2f} >= 1-tap+ZF {onetap:.2f} > heuristic+ZF {heuristic:.2f}",
    )


def test_acceptance_10_sparse_model_end_to_end(acceptance_log):
    scenario = Scenario(
        name="acceptance_sparse",
        dims=DIMS,
        snr_db=(10.0,),
        realizations=200,
        schemes=("rf_1tap+zf", "rf_ltap+zf"),
        channel_model="sparse",
    )
    result = run_scenario(scenario)
    by_key = {(r.scheme, r.metric, r.snr_db): r.value for r in result.rows}
    ltap = by_key[("rf_ltap+zf", "rate", 10.0)]
    onetap = by_key[("rf_1tap+zf", "rate", 10.0)]
    ok = result.failure_fraction <= 0.01 and ltap >= onetap
    _verdict(
        acceptance_log, 10, ok,
        f"sparse channel run: {result.failures}/{result.realizations} failed "
        f"realizations (budget 1%), L-tap+ZF {ltap:.2f} >= 1-tap+ZF {onetap:.2f}",
    )


def test_acceptance_11_determinism_and_parallel_equivalence(tmp_path, acceptance_log):
    scenario = Scenario(
        name="acceptance_repeat",
        dims=SystemDims(antennas=24, users=3, taps=3, subcarriers=16),
        snr_db=(0.0, 10.0),
        realizations=8,
        schemes=("capacity", "rf_ltap+zf"),
        master_seed=99,
    )
    paths = [tmp_path / name for name in ("a.csv", "b.csv", "c.csv")]
    write_csv(paths[0], run_scenario(scenario, workers=1).rows)
    write_csv(paths[1], run_scenario(scenario, workers=1).rows)
    write_csv(paths[2], run_scenario(scenario, workers=2).rows)
    repeat_ok = paths[0].read_bytes() == paths[1].read_bytes()
    parallel_ok = paths[0].read_bytes() == paths[2].read_bytes()
    _verdict(
        acceptance_log, 11, repeat_ok and parallel_ok,
        f"CSV bytes identical across repeated runs: {repeat_ok}; "
        f"1-worker vs 2-worker: {parallel_ok}",
    )
