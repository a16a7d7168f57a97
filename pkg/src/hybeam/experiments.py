"""Monte-Carlo scenario runner and the preset benchmark catalog.

A scenario fixes the geometry, SNR grid, channel model, and scheme list; the
runner draws independent realizations from per-realization derived seeds,
evaluates every scheme on the shared draw, and aggregates means and standard
errors.  Realizations are independent work units, so the runner can fan them
out across processes without changing a single output bit.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .beamforming import (
    CombinerIR,
    combiner_noise_power,
    decompose_to_phase_banks,
    effective_channel,
    mf_combiner,
    rf_1tap,
    rf_1tap_sum_heuristic,
    rf_ltap,
    zf_baseband,
    zf_spectrum,
)
from .channel import (
    ChannelRealization,
    SparseChannelConfig,
    SystemDims,
    _SEED_MASK,
    channel_spectrum,
    draw_rich,
    draw_sparse,
    dump_channel,
    exponential_pdp,
)
from .closed_forms import (
    MODEL_1TAP,
    MODEL_LTAP,
    capacity_limit,
    delay_spread_envelopes,
    sinr_limit_1tap,
    sinr_limit_ltap,
)
from .metrics import (
    LinkBudget,
    achievable_rate_hybrid,
    capacity,
    delay_spread_report,
    pdp_of_effective,
    rate_spectral,
    sinr_from_pdp,
    sum_rate_from_sinr,
)
from .numerics import SingularMatrixError, dft_of_taps

WORKER_ENV_VAR = "HYBEAM_THREADS"
DEFAULT_SEED = 12345

_COMBINER_BASES = ("mf", "rf_1tap", "rf_ltap", "heuristic_1tap", "bank_2L")
SCHEMES = (
    ("capacity", "zf")
    + _COMBINER_BASES
    + tuple(f"{base}+zf" for base in _COMBINER_BASES)
)

_MODEL_LABEL = {"rich": 1, "sparse": 2}


@dataclass(frozen=True)
class Scenario:
    """One reproducible experiment: geometry, SNR grid, schemes, seed."""

    name: str
    dims: SystemDims
    snr_db: tuple[float, ...]
    realizations: int = 200
    schemes: tuple[str, ...] = ()
    channel_model: str = "rich"
    sparse: SparseChannelConfig | None = None
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not self.name:
            raise ValueError("scenario needs a name")
        if self.realizations < 1:
            raise ValueError("need at least one realization")
        if not self.snr_db:
            raise ValueError("SNR grid is empty")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ValueError(f"unknown schemes {unknown}; valid: {', '.join(SCHEMES)}")
        if self.channel_model not in _MODEL_LABEL:
            raise ValueError(f"unknown channel model {self.channel_model!r}")
        if self.channel_model == "sparse":
            if self.sparse is None:
                object.__setattr__(self, "sparse", SparseChannelConfig())
        elif self.sparse is not None:
            raise ValueError("sparse config given for a non-sparse channel model")


@dataclass(frozen=True)
class ResultRow:
    """One aggregated number: a (scenario, scheme, SNR, metric) cell."""

    scenario: str
    scheme: str
    snr_db: float
    metric: str
    value: float
    stderr: float
    realizations: int
    seed: int


@dataclass(frozen=True)
class RunResult:
    """Aggregated rows plus the bookkeeping the exit-code contract needs."""

    rows: tuple[ResultRow, ...]
    realizations: int
    failures: int

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.realizations

    def __iter__(self):
        return iter(self.rows)


def derive_seed(master: int, *parts: int) -> int:
    """Stable child seed from a master seed and an integer path."""
    entropy = [int(master) & _SEED_MASK] + [int(p) & _SEED_MASK for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)[0])


def realization_seed(scenario: Scenario, index: int, antennas: int | None = None) -> int:
    """Seed for one realization; the array size is part of the derivation path."""
    m = scenario.dims.antennas if antennas is None else int(antennas)
    return derive_seed(
        scenario.master_seed, _MODEL_LABEL[scenario.channel_model], m, int(index)
    )


def draw_realization(
    scenario: Scenario, index: int, antennas: int | None = None
) -> ChannelRealization:
    """Draw the channel for one realization of a scenario."""
    dims = scenario.dims
    if antennas is not None:
        dims = replace(dims, antennas=int(antennas))
    pdp = exponential_pdp(dims.taps, dims.users)
    seed = realization_seed(scenario, index, antennas)
    if scenario.channel_model == "sparse":
        return draw_sparse(dims, pdp, scenario.sparse, seed)
    return draw_rich(dims, pdp, seed)


def _parse_scheme(name: str) -> tuple[str, bool]:
    if name.endswith("+zf"):
        return name[: -len("+zf")], True
    return name, False


def _build_combiner(base: str, channel: ChannelRealization) -> CombinerIR:
    if base == "mf":
        return mf_combiner(channel)
    if base == "rf_ltap":
        return rf_ltap(channel)
    if base == "rf_1tap":
        return rf_1tap(channel)
    if base == "heuristic_1tap":
        return rf_1tap_sum_heuristic(channel)
    if base == "bank_2L":
        return decompose_to_phase_banks(mf_combiner(channel)).combined()
    raise ValueError(f"unknown combiner base {base!r}")


def _evaluate_realization(scenario: Scenario, index: int) -> dict:
    """All (scheme, metric, snr) values for one shared channel draw."""
    channel = draw_realization(scenario, index)
    k = scenario.dims.subcarriers
    links = [LinkBudget.from_snr_db(s) for s in scenario.snr_db]
    raw_grid = None
    effs: dict[str, object] = {}
    values: dict[tuple[str, str, float], float] = {}

    def raw() -> np.ndarray:
        nonlocal raw_grid
        if raw_grid is None:
            raw_grid = channel_spectrum(channel, k)
        return raw_grid

    def eff(base: str):
        if base not in effs:
            effs[base] = effective_channel(_build_combiner(base, channel), channel, k)
        return effs[base]

    for scheme in scenario.schemes:
        if scheme == "capacity":
            for snr, link in zip(scenario.snr_db, links):
                values[(scheme, "capacity", snr)] = capacity(raw(), link)
            continue
        if scheme == "zf":
            inverse = zf_spectrum(raw())
            for snr, link in zip(scenario.snr_db, links):
                values[(scheme, "rate", snr)] = rate_spectral(inverse, raw(), link)
            continue
        base, with_zf = _parse_scheme(scheme)
        effective = eff(base)
        if with_zf:
            baseband = zf_baseband(effective)
            for snr, link in zip(scenario.snr_db, links):
                values[(scheme, "rate", snr)] = achievable_rate_hybrid(
                    effective, baseband, link
                )
        else:
            combiner = _build_combiner(base, channel)
            pdp = pdp_of_effective(effective)
            eff_grid = dft_of_taps(effective.taps, k)
            for snr, link in zip(scenario.snr_db, links):
                noise = combiner_noise_power(combiner, link.noise_variance)
                breakdown = sinr_from_pdp(pdp, noise, link)
                values[(scheme, "rate", snr)] = sum_rate_from_sinr(breakdown)
            for snr, link in zip(scenario.snr_db, links):
                values[(scheme, "capacity", snr)] = capacity(eff_grid, link)
    return values


def _scenario_block(args) -> list:
    """Worker entry: evaluate a block of realization indices."""
    scenario, indices, dump_dir = args
    out = []
    for index in indices:
        if dump_dir is not None:
            channel = draw_realization(scenario, index)
            path = os.path.join(dump_dir, f"{scenario.name}_r{index:04d}.txt")
            dump_channel(
                channel, path, realization_seed(scenario, index), scenario.channel_model
            )
        try:
            out.append((index, _evaluate_realization(scenario, index)))
        except SingularMatrixError:
            out.append((index, None))
    return out


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, capped by the HYBEAM_THREADS variable."""
    cap = None
    raw = os.environ.get(WORKER_ENV_VAR)
    if raw is not None:
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"{WORKER_ENV_VAR} must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ValueError(f"{WORKER_ENV_VAR} must be positive")
    if workers is None:
        resolved = cap if cap is not None else 1
    else:
        resolved = int(workers)
        if resolved < 1:
            raise ValueError("worker count must be positive")
        if cap is not None:
            resolved = min(resolved, cap)
    return resolved


def _run_blocks(task, payloads: list, workers: int) -> list:
    """Run work payloads serially or across processes; order-stable merge."""
    if workers <= 1 or len(payloads) <= 1:
        chunks = [task(p) for p in payloads]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(task, payloads))
    merged = [item for chunk in chunks for item in chunk]
    merged.sort(key=lambda item: item[0])
    return merged


def _split_indices(count: int, workers: int) -> list[list[int]]:
    blocks = np.array_split(np.arange(count), min(workers, count))
    return [list(map(int, block)) for block in blocks if block.size]


def run_scenario(
    scenario: Scenario,
    workers: int | None = None,
    dump_dir: str | None = None,
) -> RunResult:
    """Evaluate a scenario over all realizations and aggregate per metric.

    Realizations whose linear algebra degenerates are skipped and counted;
    the caller decides how many failures are tolerable.  Output is identical
    for any worker count.
    """
    workers = resolve_workers(workers)
    payloads = [
        (scenario, block, dump_dir)
        for block in _split_indices(scenario.realizations, workers)
    ]
    results = _run_blocks(_scenario_block, payloads, workers)
    per_key: dict[tuple[str, str, float], list[float]] = {}
    failures = 0
    for _, values in results:
        if values is None:
            failures += 1
            continue
        for key, value in values.items():
            per_key.setdefault(key, []).append(value)
    if failures == scenario.realizations and scenario.schemes:
        raise SingularMatrixError(
            f"all {scenario.realizations} realizations of {scenario.name} failed"
        )
    rows = []
    for (scheme, metric, snr), samples in per_key.items():
        data = np.asarray(samples)
        stderr = float(np.std(data, ddof=1) / np.sqrt(data.size)) if data.size > 1 else 0.0
        rows.append(
            ResultRow(
                scenario=scenario.name,
                scheme=scheme,
                snr_db=snr,
                metric=metric,
                value=float(data.mean()),
                stderr=stderr,
                realizations=data.size,
                seed=scenario.master_seed,
            )
        )
    return RunResult(rows=tuple(rows), realizations=scenario.realizations, failures=failures)


_RMS_SCHEMES = ("mf", "rf_1tap", "rf_ltap", "siso")
_RMS_QUANTILES = (5, 25, 50, 75, 95)


def _rms_block(args) -> list:
    scenario, antennas, indices = args
    out = []
    for index in indices:
        channel = draw_realization(scenario, index, antennas=antennas)
        samples: dict[str, np.ndarray] = {}
        for base in ("mf", "rf_1tap", "rf_ltap"):
            effective = effective_channel(
                _build_combiner(base, channel), channel, scenario.dims.subcarriers
            )
            samples[base] = delay_spread_report(pdp_of_effective(effective)).rms
        power = np.abs(channel.taps.taps) ** 2
        delays = np.arange(power.shape[0], dtype=float)
        total = power.sum(axis=0)
        mean = np.einsum("l,lmu->mu", delays, power) / total
        second = np.einsum("l,lmu->mu", delays**2, power) / total
        spread = np.sqrt(np.maximum(second - mean**2, 0.0))
        samples["siso"] = spread.ravel()
        out.append((index, samples))
    return out


def rms_study(
    antenna_grid, scenario: Scenario, workers: int | None = None
) -> list[ResultRow]:
    """Mean and distribution of the effective RMS delay spread versus array size.

    For each antenna count the per-user spread of every combiner is pooled
    over realizations; the per-antenna-element channels give the unprocessed
    baseline (scheme ``siso``).  The antenna count is reported in the
    ``snr_db`` column, which doubles as the sweep axis for these rows.
    """
    workers = resolve_workers(workers)
    rows: list[ResultRow] = []
    for antennas in antenna_grid:
        antennas = int(antennas)
        payloads = [
            (scenario, antennas, block)
            for block in _split_indices(scenario.realizations, workers)
        ]
        results = _run_blocks(_rms_block, payloads, workers)
        for scheme in _RMS_SCHEMES:
            pooled = np.concatenate([samples[scheme] for _, samples in results])
            means = np.array([samples[scheme].mean() for _, samples in results])
            stderr = (
                float(np.std(means, ddof=1) / np.sqrt(means.size)) if means.size > 1 else 0.0
            )
            rows.append(
                ResultRow(
                    scenario=scenario.name,
                    scheme=scheme,
                    snr_db=float(antennas),
                    metric="rms_mean",
                    value=float(means.mean()),
                    stderr=stderr,
                    realizations=scenario.realizations,
                    seed=scenario.master_seed,
                )
            )
            for quantile in _RMS_QUANTILES:
                rows.append(
                    ResultRow(
                        scenario=scenario.name,
                        scheme=scheme,
                        snr_db=float(antennas),
                        metric=f"rms_cdf_q{quantile:02d}",
                        value=float(np.percentile(pooled, quantile)),
                        stderr=0.0,
                        realizations=scenario.realizations,
                        seed=scenario.master_seed,
                    )
                )
    return rows


@dataclass(frozen=True)
class ClosedFormCheck:
    """One closed-form check: a simulated value against an allowed interval."""

    name: str
    value: float
    lower: float
    upper: float
    reference: float | None = None

    @property
    def passed(self) -> bool:
        return self.lower <= self.value <= self.upper

    @property
    def rel_error(self) -> float:
        if self.reference is None or self.reference == 0.0:
            return float("nan")
        return abs(self.value - self.reference) / abs(self.reference)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        detail = f"value={self.value:.6g} bounds=[{self.lower:.6g}, {self.upper:.6g}]"
        if self.reference is not None:
            detail += f" target={self.reference:.6g} rel_err={100.0 * self.rel_error:.2f}%"
        return f"{verdict} {self.name}: {detail}"


@dataclass(frozen=True)
class ValidationReport:
    """All closed-form checks for one scenario."""

    checks: tuple[ClosedFormCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def render(self) -> str:
        lines = [check.line() for check in self.checks]
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: {sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines)


def validate_closed_forms(
    scenario: Scenario,
    workers: int | None = None,
    rate_tol: float = 0.05,
    capacity_tol: float = 0.05,
    rms_antenna_grid=(25, 100, 400),
    envelope_low: float = 1.0,
    envelope_high: float = 3.0,
    ratio_bounds: tuple[float, float] = (0.40, 0.62),
) -> ValidationReport:
    """Check simulated rates and delay spreads against the large-array limits.

    Rates of both constant-modulus combiners and the capacities of their
    effective channels are compared per SNR point at a relative tolerance;
    mean delay spreads must fall inside the ``c/sqrt(M)`` envelopes and
    shrink by about half when the array grows fourfold.
    """
    if scenario.channel_model != "rich":
        raise ValueError("closed-form validation assumes the rich channel model")
    dims = scenario.dims
    pdp = exponential_pdp(dims.taps, dims.users)
    sub = replace(scenario, schemes=("rf_1tap", "rf_ltap"))
    run = run_scenario(sub, workers=workers)
    by_key = {(r.scheme, r.metric, r.snr_db): r.value for r in run.rows}
    checks: list[ClosedFormCheck] = []
    for snr in scenario.snr_db:
        link = LinkBudget.from_snr_db(snr)
        targets = {
            "rf_ltap": (
                sum(
                    np.log2(1.0 + sinr_limit_ltap(link, dims.antennas, dims.users, pdp.column(u)))
                    for u in range(dims.users)
                ),
                capacity_limit(link, dims.antennas, pdp, MODEL_LTAP),
            ),
            "rf_1tap": (
                sum(
                    np.log2(1.0 + sinr_limit_1tap(link, dims.antennas, dims.users, pdp.column(u)))
                    for u in range(dims.users)
                ),
                capacity_limit(link, dims.antennas, pdp, MODEL_1TAP),
            ),
        }
        for scheme, (rate_target, cap_target) in targets.items():
            rate_target = float(rate_target)
            checks.append(
                ClosedFormCheck(
                    name=f"{scheme}_rate@{snr:g}dB",
                    value=by_key[(scheme, "rate", snr)],
                    lower=rate_target * (1.0 - rate_tol),
                    upper=rate_target * (1.0 + rate_tol),
                    reference=rate_target,
                )
            )
            checks.append(
                ClosedFormCheck(
                    name=f"{scheme}_capacity@{snr:g}dB",
                    value=by_key[(scheme, "capacity", snr)],
                    lower=cap_target * (1.0 - capacity_tol),
                    upper=cap_target * (1.0 + capacity_tol),
                    reference=cap_target,
                )
            )
    if rms_antenna_grid:
        grid = tuple(int(m) for m in rms_antenna_grid)
        rms_rows = rms_study(grid, sub, workers=workers)
        lower_env, upper_env = delay_spread_envelopes(
            np.asarray(grid, dtype=float), envelope_low, envelope_high
        )
        means = {
            (r.scheme, int(r.snr_db)): r.value for r in rms_rows if r.metric == "rms_mean"
        }
        for scheme in ("mf", "rf_1tap", "rf_ltap"):
            for m, low, high in zip(grid, lower_env, upper_env):
                checks.append(
                    ClosedFormCheck(
                        name=f"rms_envelope_{scheme}@M{m}",
                        value=means[(scheme, m)],
                        lower=float(low),
                        upper=float(high),
                    )
                )
            for small in grid:
                if 4 * small in grid:
                    checks.append(
                        ClosedFormCheck(
                            name=f"rms_ratio_{scheme}@M{4 * small}vsM{small}",
                            value=means[(scheme, 4 * small)] / means[(scheme, small)],
                            lower=ratio_bounds[0],
                            upper=ratio_bounds[1],
                            reference=0.5,
                        )
                    )
    return ValidationReport(checks=tuple(checks))


@dataclass(frozen=True)
class Preset:
    """A named ready-to-run scenario, optionally with an antenna sweep."""

    scenario: Scenario
    antenna_sweep: tuple[int, ...] = ()
    description: str = ""


DEFAULT_DIMS = SystemDims(antennas=100, users=4, taps=4, subcarriers=128)
DEFAULT_SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)


def _preset_scenario(name: str, schemes: tuple[str, ...], **overrides) -> Scenario:
    base = dict(
        name=name,
        dims=DEFAULT_DIMS,
        snr_db=DEFAULT_SNR_GRID,
        realizations=200,
        schemes=schemes,
        master_seed=DEFAULT_SEED,
    )
    base.update(overrides)
    return Scenario(**base)


PRESETS: dict[str, Preset] = {
    "fig2": Preset(
        _preset_scenario("fig2", ("capacity", "mf", "zf")),
        description="fully digital baselines: capacity, matched filter, zero forcing",
    ),
    "fig3": Preset(
        _preset_scenario("fig3", ("mf", "rf_1tap", "rf_ltap")),
        description="constant-modulus RF sum rates against the matched filter",
    ),
    "fig4": Preset(
        _preset_scenario("fig4", ("capacity", "rf_1tap", "rf_ltap")),
        description="capacity of the effective channel under RF combining",
    ),
    "fig5": Preset(
        _preset_scenario("fig5", (), snr_db=(10.0,)),
        antenna_sweep=(20, 25, 100, 400, 500),
        description="RMS delay spread of the effective channel versus array size",
    ),
    "fig6": Preset(
        _preset_scenario(
            "fig6",
            ("capacity", "rf_1tap", "rf_1tap+zf", "heuristic_1tap", "heuristic_1tap+zf"),
        ),
        description="single-tap alignment against the tap-sum heuristic, with and without ZF",
    ),
    "fig7": Preset(
        _preset_scenario(
            "fig7",
            ("capacity", "rf_1tap", "rf_1tap+zf"),
            dims=SystemDims(antennas=100, users=4, taps=1, subcarriers=128),
        ),
        description="flat-fading sanity check with a single channel tap",
    ),
    "fig8": Preset(
        _preset_scenario(
            "fig8",
            ("capacity", "rf_1tap", "rf_ltap", "rf_1tap+zf", "rf_ltap+zf"),
            channel_model="sparse",
            sparse=SparseChannelConfig(),
        ),
        description="clustered sparse channel, five paths per delay cluster",
    ),
}
