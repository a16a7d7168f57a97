"""Rate and dispersion metrics for raw and effective channels.

Spectral rates average a per-subcarrier log-det over the grid.  Colored
effective noise is handled exactly: the noise covariance is whitened with a
Cholesky factor before the log-det, never approximated as white.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beamforming import EffectiveChannel
from .numerics import SingularMatrixError, TapSequence, dft_of_taps, logdet_psd_stack


@dataclass(frozen=True)
class LinkBudget:
    """Transmit power and noise variance; the SNR is their ratio."""

    transmit_power: float = 1.0
    noise_variance: float = 1.0

    def __post_init__(self):
        if not self.transmit_power > 0.0 or not self.noise_variance > 0.0:
            raise ValueError("transmit power and noise variance must be positive")

    @property
    def snr(self) -> float:
        return self.transmit_power / self.noise_variance

    @classmethod
    def from_snr_db(cls, snr_db: float, noise_variance: float = 1.0) -> "LinkBudget":
        return cls(10.0 ** (snr_db / 10.0) * noise_variance, noise_variance)


def capacity(spectrum: np.ndarray, link: LinkBudget) -> float:
    """Subcarrier-averaged log-det capacity of a channel spectrum in white noise.

    ``spectrum`` is ``(K, rows, users)``; the result is
    ``mean_k log2 det(I + snr * H(k)^H H(k))`` in bits per channel use.
    """
    grid = np.asarray(spectrum, dtype=complex)
    if grid.ndim != 3:
        raise ValueError("expected a (K, rows, users) spectrum grid")
    users = grid.shape[2]
    gram = np.einsum("kmu,kmv->kuv", np.conj(grid), grid)
    eye = np.eye(users)
    return float(np.mean(logdet_psd_stack(eye + link.snr * gram)))


def _whitened_rate(signal: np.ndarray, noise_cov: np.ndarray, link: LinkBudget) -> float:
    """Rate of per-subcarrier channels ``signal`` under noise covariance ``noise_cov``."""
    cov = 0.5 * (noise_cov + np.conj(np.swapaxes(noise_cov, -1, -2)))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("singular noise covariance") from None
    whitened = np.linalg.solve(chol, signal)
    gram = whitened @ np.conj(np.swapaxes(whitened, -1, -2))
    eye = np.eye(signal.shape[1])
    return float(np.mean(logdet_psd_stack(eye + link.snr * gram)))


def rate_spectral(combiner_spectrum: np.ndarray, channel_spectrum: np.ndarray, link: LinkBudget) -> float:
    """Achievable sum rate of an arbitrary linear combiner given per-subcarrier grids.

    ``combiner_spectrum`` is ``(K, U, M)`` and ``channel_spectrum`` is
    ``(K, M, U)``; the combined noise keeps its exact covariance
    ``W(k) W(k)^H``.
    """
    w = np.asarray(combiner_spectrum, dtype=complex)
    h = np.asarray(channel_spectrum, dtype=complex)
    if w.ndim != 3 or h.ndim != 3 or w.shape[0] != h.shape[0] or w.shape[2] != h.shape[1]:
        raise ValueError("combiner and channel grids do not align")
    signal = w @ h
    cov = np.einsum("kum,kvm->kuv", w, np.conj(w))
    return _whitened_rate(signal, cov, link)


def achievable_rate_hybrid(
    effective: EffectiveChannel,
    baseband: np.ndarray | None,
    link: LinkBudget,
) -> float:
    """Sum rate through an effective channel, optionally after a baseband stage.

    With ``baseband=None`` the RF combiner output is used directly; otherwise
    the per-subcarrier baseband matrices multiply both signal and noise, so
    an invertible baseband leaves the rate unchanged.
    """
    k = effective.num_subcarriers
    signal = dft_of_taps(effective.taps, k)
    cov = effective.noise_cov_spectrum
    if baseband is not None:
        bb = np.asarray(baseband, dtype=complex)
        if bb.shape[0] != k or bb.shape[2] != signal.shape[1]:
            raise ValueError("baseband grid does not align with the effective channel")
        signal = bb @ signal
        cov = bb @ cov @ np.conj(np.swapaxes(bb, -1, -2))
    return _whitened_rate(signal, cov, link)


@dataclass(frozen=True)
class EffectivePdp:
    """Power profile of an effective channel: ``power[u, v, i]`` is the power
    coupling user ``v`` into output ``u`` at delay ``offset + i``."""

    power: np.ndarray
    offset: int

    @property
    def num_users(self) -> int:
        return self.power.shape[0]

    @property
    def zero_index(self) -> int:
        return -self.offset

    def user_profile(self, user: int) -> np.ndarray:
        """Same-user power profile across delays."""
        return self.power[user, user]


def pdp_of_effective(effective: EffectiveChannel) -> EffectivePdp:
    """Entrywise power of the effective taps, arranged per user pair."""
    power = np.abs(effective.taps.taps) ** 2
    return EffectivePdp(np.transpose(power, (1, 2, 0)), effective.taps.offset)


@dataclass(frozen=True)
class SinrBreakdown:
    """Per-user signal, self-interference, cross-user, and noise powers."""

    signal: np.ndarray
    isi: np.ndarray
    mui: np.ndarray
    noise: np.ndarray
    sinr: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("signal", "isi", "mui", "noise"):
            value = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, value)
        if np.any(self.noise <= 0.0):
            raise ValueError("noise power must be positive")
        object.__setattr__(self, "sinr", self.signal / (self.isi + self.mui + self.noise))


def sinr_from_pdp(pdp: EffectivePdp, noise_power: np.ndarray, link: LinkBudget) -> SinrBreakdown:
    """Symbol-level SINR when detection reads the delay-0 composite tap.

    Signal is the same-user power at delay 0; every other same-user delay is
    self-interference and every cross-user term is multiuser interference,
    each weighted by the transmit power.  ``noise_power`` is the per-user
    combined noise power.
    """
    zero = pdp.zero_index
    if not 0 <= zero < pdp.power.shape[2]:
        raise ValueError("delay 0 is outside the stored profile")
    pt = link.transmit_power
    own = np.einsum("uun->un", pdp.power)
    signal = pt * own[:, zero]
    isi = pt * (own.sum(axis=1) - own[:, zero])
    totals = pdp.power.sum(axis=2)
    mui = pt * (totals.sum(axis=1) - np.einsum("uu->u", totals))
    return SinrBreakdown(signal=signal, isi=isi, mui=mui, noise=noise_power)


def sum_rate_from_sinr(breakdown: SinrBreakdown) -> float:
    """Sum over users of ``log2(1 + sinr)``."""
    return float(np.sum(np.log2(1.0 + breakdown.sinr)))


@dataclass(frozen=True)
class DelaySpread:
    """First and centered second moment of a power profile over delay."""

    mean_delay: float
    rms: float


def rms_delay_spread(profile: np.ndarray, first_delay: int = 0) -> DelaySpread:
    """Power-weighted mean delay and RMS spread of a nonnegative profile.

    The variance radicand is clamped at zero against roundoff; a profile
    without positive mass is an error.  The RMS value is invariant to delay
    shifts, so ``first_delay`` only moves the mean.
    """
    power = np.asarray(profile, dtype=float)
    if power.ndim != 1 or power.size < 1:
        raise ValueError("profile must be a nonempty 1-D array")
    if np.any(power < 0.0):
        raise ValueError("profile powers must be nonnegative")
    total = power.sum()
    if not total > 0.0:
        raise ValueError("profile has no positive mass")
    delays = np.arange(first_delay, first_delay + power.size, dtype=float)
    mean = float((power * delays).sum() / total)
    radicand = float((power * delays**2).sum() / total - mean**2)
    if radicand < -1e-12:
        raise ValueError("negative delay-spread radicand beyond roundoff")
    return DelaySpread(mean_delay=mean, rms=float(np.sqrt(max(radicand, 0.0))))


@dataclass(frozen=True)
class DelaySpreadReport:
    """Per-user delay statistics of an effective channel."""

    mean_delay: np.ndarray
    rms: np.ndarray


def delay_spread_report(pdp: EffectivePdp) -> DelaySpreadReport:
    """Per-user RMS delay spread of the same-user effective profiles."""
    means = np.empty(pdp.num_users)
    spreads = np.empty(pdp.num_users)
    for user in range(pdp.num_users):
        stats = rms_delay_spread(pdp.user_profile(user), pdp.offset)
        means[user] = stats.mean_delay
        spreads[user] = stats.rms
    return DelaySpreadReport(mean_delay=means, rms=spreads)
