"""Slepian (DPSS) data tapers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConvergenceFailure, InvalidParametersError

DEFAULT_NW = 2.5
DEFAULT_K = 4


@dataclass(frozen=True, eq=False)
class TaperSet:
    """K unit-norm data tapers of a common length.

    Attributes
    ----------
    tapers : ndarray, shape (K, L)
    eigenvalues : ndarray, shape (K,)
        Fraction of each taper's energy inside the band ``[-W, W]``.
    time_bandwidth : float
        NW; ``None`` for the rectangular taper.
    tridiagonal_eigenvalues : ndarray or None
        Eigenvalues of the commuting tridiagonal matrix the tapers were
        computed from.
    """

    tapers: np.ndarray
    eigenvalues: np.ndarray
    time_bandwidth: float | None
    tridiagonal_eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        for name in ("tapers", "eigenvalues", "tridiagonal_eigenvalues"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float)
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)

    @property
    def length(self) -> int:
        return self.tapers.shape[1]

    @property
    def count(self) -> int:
        return self.tapers.shape[0]

    def __len__(self):
        return self.count


def slepian_tridiagonal(length: int, time_bandwidth: float):
    """Diagonal and off-diagonal of the matrix commuting with the sinc kernel."""
    w = time_bandwidth / length
    n = np.arange(length, dtype=float)
    diag = ((length - 1 - 2 * n) / 2.0) ** 2 * np.cos(2 * np.pi * w)
    off = n[1:] * (length - n[1:]) / 2.0
    return diag, off


def concentration_ratios(tapers: np.ndarray, time_bandwidth: float) -> np.ndarray:
    """In-band energy fraction of each taper, ``t^T A t`` with the sinc Toeplitz A.

    Evaluated through the taper autocorrelation so it costs O(L log L).
    """
    k, length = tapers.shape
    w = time_bandwidth / length
    nfft = 1 << int(np.ceil(np.log2(2 * length)))
    spec = np.fft.rfft(tapers, nfft, axis=1)
    acf = np.fft.irfft(np.abs(spec) ** 2, nfft, axis=1)[:, :length]
    lags = np.arange(1, length, dtype=float)
    kernel = np.empty(length)
    kernel[0] = 2 * w
    kernel[1:] = np.sin(2 * np.pi * w * lags) / (np.pi * lags)
    ratios = acf[:, 0] * kernel[0] + 2 * acf[:, 1:] @ kernel[1:]
    return np.clip(ratios, np.finfo(float).tiny, 1.0)


def dpss(length: int, time_bandwidth: float = DEFAULT_NW, count: int = DEFAULT_K) -> TaperSet:
    """First `count` discrete prolate spheroidal sequences of `length` samples.

    Solved as the symmetric tridiagonal eigenproblem of the Slepian
    concentration problem (LAPACK bisection + inverse iteration).  Signs
    follow the usual convention: symmetric tapers have a positive sum,
    antisymmetric ones start positive.

    Examples
    --------
    >>> ts = dpss(64, 2.5, 4)
    >>> ts.tapers.shape
    (4, 64)
    """
    if int(length) != length or length < 2:
        raise InvalidParametersError(f"length must be an integer >= 2, got {length}")
    length = int(length)
    if not 0 < time_bandwidth < length / 2:
        raise InvalidParametersError(f"time_bandwidth must lie in (0, {length / 2}), got {time_bandwidth}")
    if int(count) != count or not 1 <= count <= int(np.floor(2 * time_bandwidth)):
        raise InvalidParametersError(
            f"count must lie in [1, floor(2*NW)] = [1, {int(np.floor(2 * time_bandwidth))}], got {count}")
    count = int(count)

    diag, off = slepian_tridiagonal(length, time_bandwidth)
    try:
        vals, vecs = linalg.eigh_tridiagonal(
            diag, off, select="i", select_range=(length - count, length - 1),
            lapack_driver="stebz")
    except (linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    if not np.all(np.isfinite(vecs)):
        raise ConvergenceFailure("tridiagonal eigensolver returned non-finite vectors")

    # largest eigenvalue first
    vals = vals[::-1].copy()
    tapers = vecs[:, ::-1].T.copy()
    tapers /= np.linalg.norm(tapers, axis=1, keepdims=True)
    for k in range(count):
        if k % 2 == 0:
            if tapers[k].sum() < 0:
                tapers[k] *= -1
        else:
            nz = np.flatnonzero(np.abs(tapers[k]) > np.finfo(float).tiny)
            if nz.size and tapers[k, nz[0]] < 0:
                tapers[k] *= -1

    ratios = concentration_ratios(tapers, time_bandwidth)
    return TaperSet(tapers, ratios, float(time_bandwidth), vals)


def rectangular_taper(length: int) -> TaperSet:
    """Single flat taper ``1/sqrt(L)``; turns the multitaper estimate into a periodogram."""
    if int(length) != length or length < 1:
        raise InvalidParametersError(f"length must be an integer >= 1, got {length}")
    taper = np.full((1, int(length)), 1.0 / np.sqrt(length))
    return TaperSet(taper, np.ones(1), None, None)
