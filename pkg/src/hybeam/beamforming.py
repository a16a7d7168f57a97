"""Combiner construction: matched filter, constant-modulus RF variants,
phase-only network banks, and the zero-forcing baseband stage.

Combiner impulse responses are anticausal tap sequences of ``(U x M)``
matrices: the tap at delay ``-l`` acts on the channel tap at delay ``l``, so
the composite response concentrates at delay 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .numerics import (
    SingularMatrixError,
    TapSequence,
    circular_convolve,
    dft_of_taps,
    pinv_tall,
)

_MODULUS_TOL = 1e-12


@dataclass
class CombinerIR:
    """Combiner impulse response with an optional constant-modulus contract.

    When ``constant_modulus`` is set, every entry of every tap must have
    magnitude ``modulus``; this is what a phase-shifter-only RF network can
    realize.
    """

    taps: TapSequence
    constant_modulus: bool = False
    modulus: float | None = None

    def __post_init__(self):
        if self.constant_modulus:
            if self.modulus is None or not self.modulus > 0.0:
                raise ValueError("constant-modulus combiner needs a positive modulus")
            mags = np.abs(self.taps.taps)
            if np.max(np.abs(mags - self.modulus)) > _MODULUS_TOL:
                raise ValueError("tap entries violate the constant-modulus contract")

    @property
    def num_users(self) -> int:
        return self.taps.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.taps.shape[1]


def mf_combiner(channel: ChannelRealization) -> CombinerIR:
    """Time-reversed conjugate-transpose combiner, scaled by ``1/sqrt(M)``.

    Tap ``-l`` is ``H_l^H / sqrt(M)``, so each user coherently sums its own
    delayed copies at composite delay 0.
    """
    h = channel.taps.taps
    scale = 1.0 / np.sqrt(channel.dims.antennas)
    taps = scale * np.conj(h[::-1].transpose(0, 2, 1))
    return CombinerIR(TapSequence(-(channel.dims.taps - 1), taps))


def rf_ltap(channel: ChannelRealization) -> CombinerIR:
    """Constant-modulus combiner with one RF tap per channel delay.

    Keeps the matched filter's phases and flattens every magnitude to
    ``1/sqrt(M)``: the closest phase-only network to the matched filter,
    equivalently per-entry equal-gain combining.
    """
    h = channel.taps.taps
    m = channel.dims.antennas
    phases = np.angle(h[::-1].transpose(0, 2, 1))
    taps = np.exp(-1j * phases) / np.sqrt(m)
    return CombinerIR(
        TapSequence(-(channel.dims.taps - 1), taps),
        constant_modulus=True,
        modulus=1.0 / np.sqrt(m),
    )


def rf_1tap(
    channel: ChannelRealization,
    tap_index: int = 0,
    strongest_per_user: bool = False,
) -> CombinerIR:
    """Single-tap constant-modulus combiner aligned to one channel delay.

    By default aligns every user to channel tap ``tap_index``.  With
    ``strongest_per_user`` each user instead aligns to its own
    largest-power tap (useful for profiles that do not lead with tap 0).
    """
    h = channel.taps.taps
    num_taps, _, users = h.shape
    if strongest_per_user:
        tap_power = np.sum(np.abs(h) ** 2, axis=1)
        picks = np.argmax(tap_power, axis=0)
        columns = h[picks, :, np.arange(users)]
    else:
        if not 0 <= tap_index < num_taps:
            raise ValueError(f"tap_index {tap_index} outside 0..{num_taps - 1}")
        columns = h[tap_index].T
    m = channel.dims.antennas
    taps = np.exp(-1j * np.angle(columns)) / np.sqrt(m)
    return CombinerIR(
        TapSequence(0, taps[None]),
        constant_modulus=True,
        modulus=1.0 / np.sqrt(m),
    )


def rf_1tap_sum_heuristic(channel: ChannelRealization) -> CombinerIR:
    """Single-tap combiner phased against the plain sum of all channel taps.

    A cheaper rule than per-tap alignment; the taps it mixes add with random
    relative phases, which costs array gain on frequency-selective channels.
    """
    m = channel.dims.antennas
    summed = channel.taps.taps.sum(axis=0).T
    taps = np.exp(-1j * np.angle(summed)) / np.sqrt(m)
    return CombinerIR(
        TapSequence(0, taps[None]),
        constant_modulus=True,
        modulus=1.0 / np.sqrt(m),
    )


@dataclass
class PhaseNetworkBank:
    """Two phase-only networks whose sum reproduces a target combiner.

    Each entry ``a`` of the normalized target splits into two unit-modulus
    terms with phases ``angle(a) +/- arccos(|a|)``; adding the banks and
    multiplying by ``scale`` recovers the target exactly, so phase shifters
    alone can realize any combiner at twice the network count.
    """

    plus: TapSequence
    minus: TapSequence
    gamma: float
    scale: float

    def combined(self) -> CombinerIR:
        """Sum of the two banks (no longer constant-modulus)."""
        return CombinerIR(TapSequence(self.plus.offset, self.plus.taps + self.minus.taps))


def decompose_to_phase_banks(combiner: CombinerIR) -> PhaseNetworkBank:
    """Split a combiner into two constant-modulus phase networks.

    The target is normalized by its largest entry magnitude ``gamma`` so
    every entry lands in the closed unit disk; the returned ``scale`` is
    ``2 / (gamma * sqrt(M))``, the factor that maps the summed banks back to
    the target.
    """
    a = combiner.taps.taps
    gamma = float(np.max(np.abs(a)))
    if not np.isfinite(gamma) or gamma == 0.0:
        raise ValueError("cannot decompose an all-zero combiner")
    m = a.shape[2]
    normalized = a / gamma
    theta = np.angle(normalized)
    alpha = np.arccos(np.clip(np.abs(normalized), 0.0, 1.0))
    root_m = np.sqrt(m)
    plus = np.exp(1j * (theta + alpha)) / root_m
    minus = np.exp(1j * (theta - alpha)) / root_m
    offset = combiner.taps.offset
    return PhaseNetworkBank(
        plus=TapSequence(offset, plus),
        minus=TapSequence(offset, minus),
        gamma=gamma,
        scale=2.0 / (gamma * root_m),
    )


@dataclass
class EffectiveChannel:
    """Combined combiner-plus-channel response seen by the baseband stage.

    ``taps`` holds the ``(U x U)`` composite impulse response;
    ``noise_cov_spectrum`` is the per-subcarrier covariance of the combined
    noise, ``W(k) W(k)^H`` for the combiner's frequency response ``W(k)``.
    """

    taps: TapSequence
    noise_cov_spectrum: np.ndarray

    @property
    def num_subcarriers(self) -> int:
        return self.noise_cov_spectrum.shape[0]


def effective_channel(
    combiner: CombinerIR,
    channel: ChannelRealization,
    num_subcarriers: int | None = None,
) -> EffectiveChannel:
    """Convolve a combiner with a channel and attach the noise covariance."""
    k = channel.dims.subcarriers if num_subcarriers is None else int(num_subcarriers)
    taps = circular_convolve(combiner.taps, channel.taps, k)
    spectrum = dft_of_taps(combiner.taps, k)
    cov = np.einsum("kum,kvm->kuv", spectrum, np.conj(spectrum))
    return EffectiveChannel(taps, cov)


def zf_spectrum(spectrum: np.ndarray) -> np.ndarray:
    """Per-subcarrier left pseudoinverse of a ``(K, rows, cols)`` grid."""
    grid = np.asarray(spectrum, dtype=complex)
    if grid.ndim != 3:
        raise ValueError("expected a (K, rows, cols) spectrum grid")
    out = np.empty((grid.shape[0], grid.shape[2], grid.shape[1]), dtype=complex)
    for k in range(grid.shape[0]):
        try:
            out[k] = pinv_tall(grid[k])
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"singular channel at subcarrier {k}", subcarrier=k
            ) from exc
    return out


def zf_baseband(effective: EffectiveChannel) -> np.ndarray:
    """Zero-forcing baseband stage for an effective channel.

    Returns the ``(K, U, U)`` per-subcarrier inverse of the effective
    spectrum, so baseband-times-effective is the identity on every
    subcarrier.
    """
    spectrum = dft_of_taps(effective.taps, effective.num_subcarriers)
    return zf_spectrum(spectrum)


def rf_orthogonality_defect(combiner: CombinerIR) -> float:
    """Worst-case deviation of RF tap cross-products from identity/zero.

    For large arrays the normalized tap rows become near-orthonormal; this
    returns ``max ||W_i W_j^H - delta_ij I||_F / sqrt(U)`` over tap pairs,
    which shrinks like ``1/sqrt(M)``.
    """
    if not combiner.constant_modulus:
        raise ValueError("orthogonality defect is defined for constant-modulus combiners")
    taps = combiner.taps.taps
    users = combiner.num_users
    eye = np.eye(users)
    worst = 0.0
    for i in range(taps.shape[0]):
        for j in range(taps.shape[0]):
            product = taps[i] @ taps[j].conj().T
            if i == j:
                product = product - eye
            worst = max(worst, float(np.linalg.norm(product)) / np.sqrt(users))
    return worst


def combiner_noise_power(combiner: CombinerIR, noise_variance: float) -> np.ndarray:
    """Per-user noise power after combining: ``sigma^2 * sum_l ||row_u(W_l)||^2``."""
    if not noise_variance > 0.0:
        raise ValueError("noise variance must be positive")
    return noise_variance * np.sum(np.abs(combiner.taps.taps) ** 2, axis=(0, 2))
