"""Matrix-valued tap sequences and the dense linear algebra they lean on.

A tap sequence is a finite matrix-valued impulse response: one matrix per
integer delay on a contiguous range.  Everything downstream (channels,
combiners, effective responses) is a tap sequence, so the transforms here
carry explicit delay offsets instead of assuming causal indexing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative thresholds shared by the rank and symmetry checks below.
SINGULARITY_RTOL = 1e-10
HERMITICITY_RTOL = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """A matrix required to be invertible is rank deficient within tolerance."""

    def __init__(self, message: str, subcarrier: int | None = None):
        super().__init__(message)
        self.subcarrier = subcarrier


@dataclass
class TapSequence:
    """Matrices on a contiguous delay range ``offset .. offset + span - 1``.

    ``taps[i]`` is the matrix at delay ``offset + i``; all taps share one
    shape.  The sequence is zero outside the stored range.
    """

    offset: int
    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ValueError("taps must be (n_taps, rows, cols) with n_taps >= 1")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps contain non-finite entries")
        self.taps = taps
        self.offset = int(self.offset)

    @property
    def span(self) -> int:
        return self.taps.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.taps.shape[1], self.taps.shape[2]

    @property
    def delays(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.span)

    def tap(self, delay: int) -> np.ndarray:
        """Matrix at a given delay, zero outside the stored range."""
        if self.offset <= delay < self.offset + self.span:
            return self.taps[delay - self.offset]
        return np.zeros(self.shape, dtype=complex)


def dft_of_taps(seq: TapSequence, num_subcarriers: int) -> np.ndarray:
    """Per-subcarrier frequency response of a tap sequence.

    Returns a ``(num_subcarriers, rows, cols)`` array whose slice ``k`` is
    ``sum_n taps(n) * exp(-2j*pi*n*k/K)``.  The grid must be long enough to
    hold the sequence without wrap-around.
    """
    k = int(num_subcarriers)
    if k < 1:
        raise ValueError("num_subcarriers must be positive")
    if k < seq.span:
        raise ValueError(
            f"spectral aliasing: {seq.span} taps do not fit on a {k}-point grid"
        )
    phases = np.exp(-2j * np.pi * np.outer(seq.delays, np.arange(k)) / k)
    return np.einsum("nk,nrc->krc", phases, seq.taps)


def circular_convolve(a: TapSequence, b: TapSequence, num_subcarriers: int) -> TapSequence:
    """Matrix convolution of two tap sequences.

    Tap ``n`` of the result is ``sum_m a(m) @ b(n - m)``; offsets add.  The
    grid length only validates that the combined span fits without aliasing,
    so the result's spectrum is the entrywise product of the operands'.
    """
    rows_a, cols_a = a.shape
    rows_b, cols_b = b.shape
    if cols_a != rows_b:
        raise ValueError(
            f"dimension mismatch: ({rows_a}x{cols_a}) taps cannot multiply ({rows_b}x{cols_b}) taps"
        )
    out_span = a.span + b.span - 1
    if int(num_subcarriers) < out_span:
        raise ValueError(
            f"spectral aliasing: convolution spans {out_span} taps on a {int(num_subcarriers)}-point grid"
        )
    out = np.zeros((out_span, rows_a, cols_b), dtype=complex)
    for i in range(a.span):
        for j in range(b.span):
            out[i + j] += a.taps[i] @ b.taps[j]
    return TapSequence(a.offset + b.offset, out)


def _hermitize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + np.conj(np.swapaxes(mat, -1, -2)))


def logdet_psd(mat: np.ndarray) -> float:
    """Base-2 log-determinant of a Hermitian positive semidefinite matrix.

    Asymmetry beyond ``HERMITICITY_RTOL`` (relative to the Frobenius norm) or
    a negative eigenvalue beyond the same tolerance is an error; smaller
    asymmetry is folded away before the Cholesky factorization.
    """
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("logdet_psd expects a square matrix")
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return -np.inf
    if np.linalg.norm(m - m.conj().T) > HERMITICITY_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    h = _hermitize(m)
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        eigvals = np.linalg.eigvalsh(h)
        if eigvals[0] < -HERMITICITY_RTOL * scale:
            raise ValueError("matrix is indefinite") from None
        positive = eigvals[eigvals > 0.0]
        if positive.size < eigvals.size:
            return -np.inf
        return float(np.sum(np.log2(positive)))
    return float(2.0 * np.sum(np.log2(np.diagonal(chol).real)))


def logdet_psd_stack(mats: np.ndarray) -> np.ndarray:
    """Base-2 log-determinants of a stack of Hermitian PSD matrices.

    Fast path for matrices that are positive definite by construction; any
    slice that defeats the batched Cholesky is retried through the scalar
    routine with its full checks.
    """
    h = _hermitize(np.asarray(mats, dtype=complex))
    try:
        chol = np.linalg.cholesky(h)
    except np.linalg.LinAlgError:
        return np.array([logdet_psd(m) for m in mats])
    diag = np.einsum("...ii->...i", chol).real
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def pinv_tall(mat: np.ndarray) -> np.ndarray:
    """Left pseudoinverse of a tall full-column-rank matrix.

    Solves the normal equations after an SVD-based rank check: the smallest
    singular value must exceed ``SINGULARITY_RTOL`` times the largest.
    """
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] < m.shape[1]:
        raise ValueError("pinv_tall expects a tall matrix (rows >= cols)")
    singvals = np.linalg.svd(m, compute_uv=False)
    if singvals[0] == 0.0 or singvals[-1] < SINGULARITY_RTOL * singvals[0]:
        raise SingularMatrixError("singular channel: matrix is rank deficient")
    gram = m.conj().T @ m
    return np.linalg.solve(gram, m.conj().T)
