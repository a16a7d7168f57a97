"""Frequency-selective uplink channel models.

A realization is a tap sequence of ``L`` matrices ``(M x U)``: ``M`` receive
antennas, ``U`` single-antenna users, tap ``l`` carrying delay ``l``.  Per-user
tap powers follow a normalized power delay profile.  Two generators are
provided: an i.i.d. Rayleigh model and a clustered sparse model built from
uniform-linear-array steering vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import TapSequence, dft_of_taps

_SEED_MASK = (1 << 64) - 1


def stream(*key: int) -> np.random.Generator:
    """Counter-based random stream keyed by a tuple of integers.

    Streams with distinct keys are statistically independent, so fixtures can
    be regenerated from the key alone.
    """
    if not key:
        raise ValueError("stream needs at least one key integer")
    entropy = [int(k) & _SEED_MASK for k in key]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly symmetric unit-variance complex Gaussians.

    Drawn by inverse transform on the stream's uniforms (magnitude from one
    draw, phase from a second) so the mapping from key to sample is fixed.
    """
    u_mag = rng.random(shape)
    u_phase = rng.random(shape)
    radius = np.sqrt(-np.log1p(-u_mag))
    return radius * np.exp(2j * np.pi * u_phase)


def laplace(rng: np.random.Generator, scale: float, shape) -> np.ndarray:
    """Zero-mean Laplacian draws by inverse CDF on the stream's uniforms."""
    centered = rng.random(shape) - 0.5
    # Clamp keeps the inverse CDF finite at the (measure-zero) endpoint.
    tail = np.maximum(1.0 - 2.0 * np.abs(centered), np.finfo(float).tiny)
    return -float(scale) * np.sign(centered) * np.log(tail)


@dataclass(frozen=True)
class SystemDims:
    """Array, user, delay, and subcarrier counts for one link geometry."""

    antennas: int
    users: int
    taps: int
    subcarriers: int

    def __post_init__(self):
        if self.users < 1 or self.antennas < self.users:
            raise ValueError("need antennas >= users >= 1")
        if self.taps < 1:
            raise ValueError("need at least one delay tap")
        if self.subcarriers < 2 * self.taps - 1:
            raise ValueError("subcarrier grid shorter than the combined tap span")


@dataclass(frozen=True)
class PowerDelayProfile:
    """Per-user tap powers, one column per user, each column summing to 1."""

    gains: np.ndarray

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        if gains.ndim != 2:
            raise ValueError("gains must be (taps, users)")
        if np.any(gains < 0.0):
            raise ValueError("tap powers must be nonnegative")
        if np.any(np.abs(gains.sum(axis=0) - 1.0) > 1e-9):
            raise ValueError("each user's tap powers must sum to 1")
        object.__setattr__(self, "gains", gains)

    @property
    def num_taps(self) -> int:
        return self.gains.shape[0]

    @property
    def num_users(self) -> int:
        return self.gains.shape[1]

    def column(self, user: int) -> np.ndarray:
        return self.gains[:, user]


def exponential_pdp(num_taps: int, num_users: int) -> PowerDelayProfile:
    """Exponentially decaying profile with per-user decay rate ``u / 5``.

    User 0 sees a uniform profile; later users concentrate progressively more
    power in the leading tap.  Columns are normalized to unit total power.
    """
    if num_taps < 1 or num_users < 1:
        raise ValueError("need at least one tap and one user")
    decay = np.arange(num_users) / 5.0
    weights = np.exp(-np.outer(np.arange(num_taps), decay))
    return PowerDelayProfile(weights / weights.sum(axis=0))


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: causal taps ``(L, M, U)`` plus the profile behind it."""

    dims: SystemDims
    taps: TapSequence
    pdp: PowerDelayProfile

    def __post_init__(self):
        expected = (self.dims.taps, self.dims.antennas, self.dims.users)
        if self.taps.taps.shape != expected:
            raise ValueError(f"taps shape {self.taps.taps.shape} != {expected}")
        if self.taps.offset != 0:
            raise ValueError("channel taps must start at delay 0")


def draw_rich(dims: SystemDims, pdp: PowerDelayProfile, seed: int) -> ChannelRealization:
    """I.i.d. Rayleigh taps scaled by the square-root profile.

    Entry ``(l, m, u)`` is complex Gaussian with variance ``pdp.gains[l, u]``,
    independent across antennas, users, and delays.
    """
    if pdp.gains.shape != (dims.taps, dims.users):
        raise ValueError("profile shape does not match dims")
    rng = stream(seed)
    white = complex_normal(rng, (dims.taps, dims.antennas, dims.users))
    taps = white * np.sqrt(pdp.gains)[:, None, :]
    return ChannelRealization(dims, TapSequence(0, taps), pdp)


def steering_vector(num_antennas: int, angle: float, spacing_ratio: float = 0.5) -> np.ndarray:
    """Unit-norm uniform-linear-array response for one arrival angle.

    ``spacing_ratio`` is element spacing over wavelength; the phase ramp is
    ``2*pi*spacing_ratio*cos(angle)`` per element.
    """
    if num_antennas < 1:
        raise ValueError("need at least one antenna")
    ramp = 2j * np.pi * spacing_ratio * np.cos(angle) * np.arange(num_antennas)
    return np.exp(ramp) / np.sqrt(num_antennas)


@dataclass(frozen=True)
class SparseChannelConfig:
    """Clustered-arrival geometry: one cluster per delay tap.

    ``angular_spread_deg`` is the standard deviation of the Laplacian offsets
    of in-cluster paths around the cluster center.
    """

    paths_per_cluster: int = 5
    angular_spread_deg: float = 10.0
    spacing_ratio: float = 0.5

    def __post_init__(self):
        if self.paths_per_cluster < 1:
            raise ValueError("need at least one path per cluster")
        if not self.angular_spread_deg > 0.0:
            raise ValueError("angular spread must be positive")
        if not self.spacing_ratio > 0.0:
            raise ValueError("spacing ratio must be positive")


def draw_sparse(
    dims: SystemDims,
    pdp: PowerDelayProfile,
    config: SparseChannelConfig,
    seed: int,
) -> ChannelRealization:
    """Clustered sparse draw: each ``(l, u)`` column is a sum of steered paths.

    Path gains are complex Gaussian with variance ``pdp.gains[l, u]``; arrival
    angles are a uniform cluster center plus Laplacian offsets.  Columns are
    scaled so the expected power matches the rich model.
    """
    if pdp.gains.shape != (dims.taps, dims.users):
        raise ValueError("profile shape does not match dims")
    num_paths = config.paths_per_cluster
    shape = (dims.taps, num_paths, dims.users)
    rng = stream(seed)
    centers = 2.0 * np.pi * rng.random((dims.taps, dims.users))
    spread = np.deg2rad(config.angular_spread_deg)
    offsets = laplace(rng, spread / np.sqrt(2.0), shape)
    gains = complex_normal(rng, shape) * np.sqrt(pdp.gains)[:, None, :]
    angles = centers[:, None, :] + offsets
    ramp = 2j * np.pi * config.spacing_ratio * np.arange(dims.antennas)
    responses = np.exp(ramp[:, None, None, None] * np.cos(angles)[None]) / np.sqrt(dims.antennas)
    scale = np.sqrt(dims.antennas / (dims.taps * num_paths))
    taps = scale * np.einsum("lpu,mlpu->lmu", gains, responses)
    return ChannelRealization(dims, TapSequence(0, taps), pdp)


def channel_spectrum(channel: ChannelRealization, num_subcarriers: int | None = None) -> np.ndarray:
    """Per-subcarrier channel matrices ``(K, M, U)`` of a realization."""
    k = channel.dims.subcarriers if num_subcarriers is None else int(num_subcarriers)
    return dft_of_taps(channel.taps, k)


def dump_channel(channel: ChannelRealization, path, seed: int, model: str) -> None:
    """Write a realization as self-describing text: header plus one tap entry per line."""
    dims = channel.dims
    taps = channel.taps.taps
    with open(path, "w", encoding="ascii") as fh:
        fh.write("# hybeam channel dump\n")
        fh.write(
            f"# antennas={dims.antennas} users={dims.users} taps={dims.taps} "
            f"seed={int(seed)} model={model}\n"
        )
        fh.write("# columns: tap antenna user re im\n")
        for l in range(dims.taps):
            for m in range(dims.antennas):
                for u in range(dims.users):
                    value = taps[l, m, u]
                    fh.write(f"{l} {m} {u} {value.real:.17g} {value.imag:.17g}\n")


def load_channel_dump(path) -> tuple[dict, TapSequence]:
    """Read a dump back as (header fields, tap sequence)."""
    meta: dict = {}
    entries = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if "=" in token:
                        name, _, raw = token.partition("=")
                        meta[name] = raw if name == "model" else int(raw)
                continue
            fields = line.split()
            if len(fields) != 5:
                raise ValueError(f"malformed dump line: {line!r}")
            entries.append(
                (int(fields[0]), int(fields[1]), int(fields[2]),
                 float(fields[3]) + 1j * float(fields[4]))
            )
    for field in ("antennas", "users", "taps"):
        if field not in meta:
            raise ValueError(f"dump header is missing {field}")
    taps = np.zeros((meta["taps"], meta["antennas"], meta["users"]), dtype=complex)
    for l, m, u, value in entries:
        taps[l, m, u] = value
    return meta, TapSequence(0, taps)
