"""Multitaper power spectrum, spectrogram and bispectrum."""
from __future__ import annotations

import csv
import functools
from dataclasses import dataclass

import numpy as np

from .errors import InvalidHopError, LengthMismatchError
from .tapers import TaperSet

DB_FLOOR = -300.0
DEFAULT_SG_WINDOW = 512
DEFAULT_SG_HOP = 128
DEFAULT_BISPECTRUM_FMAX = 60.0


def _readonly(arr):
    arr = np.asarray(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    powers: np.ndarray
    freq_resolution: float
    nyquist: float
    decibels: bool = False

    def __post_init__(self):
        object.__setattr__(self, "powers", _readonly(self.powers))

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.powers.size) * self.freq_resolution

    def __len__(self):
        return self.powers.size


@dataclass(frozen=True, eq=False)
class Spectrogram:
    frames: np.ndarray
    frame_times: np.ndarray
    freq_resolution: float
    window_length: int
    hop: int

    def __post_init__(self):
        object.__setattr__(self, "frames", _readonly(self.frames))
        object.__setattr__(self, "frame_times", _readonly(self.frame_times))

    @property
    def freqs(self) -> np.ndarray:
        return np.arange(self.frames.shape[1]) * self.freq_resolution


@dataclass(frozen=True, eq=False)
class Bispectrum:
    """Bispectrum magnitudes over the non-redundant triangle.

    ``k1[i], k2[i]`` index the bin pair of ``magnitudes[i]``.  Every pair
    satisfies ``0 <= k2 <= k1 <= k1_max`` and ``k1 + k2 < n_bins``.
    """

    k1: np.ndarray
    k2: np.ndarray
    magnitudes: np.ndarray
    freq_resolution: float
    n_bins: int
    k1_max: int

    def __post_init__(self):
        for name in ("k1", "k2"):
            arr = np.asarray(getattr(self, name), dtype=np.int64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "magnitudes", _readonly(self.magnitudes))

    def __len__(self):
        return self.magnitudes.size

    def as_dict(self) -> dict:
        return {(int(a), int(b)): float(v) for a, b, v in zip(self.k1, self.k2, self.magnitudes)}


def _samples_and_rate(segment):
    samples = np.asarray(getattr(segment, "samples", segment), dtype=float)
    rate = float(getattr(segment, "sampling_rate", 1.0))
    return samples, rate


def tapered_spectra(samples: np.ndarray, tapers: TaperSet) -> np.ndarray:
    """One-sided DFTs of the signal under every taper, shape (K, floor(n/2)+1)."""
    if tapers.length != samples.size:
        raise LengthMismatchError(f"taper length {tapers.length} != segment length {samples.size}")
    return np.fft.rfft(tapers.tapers * samples[None, :], axis=1)


def multitaper_ps(segment, tapers: TaperSet) -> PowerSpectrum:
    """Average of the K tapered periodograms, one-sided, linear power.

    `segment` may be a :class:`~epispec.ingest.TimeSeriesSegment` or a bare
    array (sampling rate 1).
    """
    samples, rate = _samples_and_rate(segment)
    spectra = tapered_spectra(samples, tapers)
    powers = np.mean(np.abs(spectra) ** 2, axis=0)
    return PowerSpectrum(powers, rate / samples.size, rate / 2.0)


def to_decibels(ps: PowerSpectrum, floor: float = DB_FLOOR) -> PowerSpectrum:
    """Map ``P`` to ``10 log10 P``; zero bins go to `floor`.  Display only."""
    p = np.asarray(ps.powers, dtype=float)
    out = np.full(p.shape, float(floor))
    pos = p > 0
    out[pos] = np.maximum(10.0 * np.log10(p[pos]), floor)
    return PowerSpectrum(out, ps.freq_resolution, ps.nyquist, decibels=True)


def multitaper_sg(segment, tapers: TaperSet, hop: int = DEFAULT_SG_HOP) -> Spectrogram:
    """Sliding-window multitaper spectrogram.

    Each frame is the taper-averaged power of the length-l slice starting at
    ``t = 0, hop, 2*hop, ...``; a trailing remainder shorter than l is
    dropped.  Frequencies are on the ``fs/l`` grid of the window.
    """
    samples, rate = _samples_and_rate(segment)
    win = tapers.length
    if win > samples.size:
        raise LengthMismatchError(f"window length {win} exceeds segment length {samples.size}")
    if int(hop) != hop or hop < 1:
        raise InvalidHopError(f"hop must be a positive integer, got {hop}")
    hop = int(hop)
    n_frames = (samples.size - win) // hop + 1
    starts = np.arange(n_frames) * hop
    slices = np.lib.stride_tricks.sliding_window_view(samples, win)[::hop][:n_frames]
    # (frames, tapers, window)
    spectra = np.fft.rfft(slices[:, None, :] * tapers.tapers[None, :, :], axis=2)
    frames = np.mean(np.abs(spectra) ** 2, axis=1)
    return Spectrogram(frames, starts / rate, rate / win, win, hop)


def bispectrum_region(n_bins: int, k1_max: int | None = None):
    """Index pairs of the non-redundant triangle, k1-major then k2 ascending.

    The returned arrays are shared between calls and read-only.
    """
    top = n_bins - 1 if k1_max is None else min(int(k1_max), n_bins - 1)
    return _region(int(n_bins), top)


@functools.lru_cache(maxsize=16)
def _region(n_bins, top):
    k1_parts, k2_parts = [], []
    for a in range(top + 1):
        # 0 <= k2 <= k1 and k1 + k2 < n_bins
        hi = min(a, n_bins - 1 - a)
        if hi < 0:
            continue
        k1_parts.append(np.full(hi + 1, a, dtype=np.int64))
        k2_parts.append(np.arange(hi + 1, dtype=np.int64))
    if not k1_parts:
        k1, k2 = np.empty(0, np.int64), np.empty(0, np.int64)
    else:
        k1, k2 = np.concatenate(k1_parts), np.concatenate(k2_parts)
    k1.setflags(write=False)
    k2.setflags(write=False)
    return k1, k2


def averaged_spectrum(segment, tapers: TaperSet) -> np.ndarray:
    """Complex taper-averaged one-sided spectrum used as the bispectrum input."""
    samples, _ = _samples_and_rate(segment)
    return tapered_spectra(samples, tapers).mean(axis=0)


def bispectrum(segment, tapers: TaperSet, fmax: float | None = DEFAULT_BISPECTRUM_FMAX) -> Bispectrum:
    """``|X(k1) X(k2) X*(k1+k2)|^2`` over the non-redundant region.

    X is the complex average of the K tapered transforms.  `fmax` caps k1
    (in Hz) to bound the region size; ``None`` keeps the full triangle.
    """
    samples, rate = _samples_and_rate(segment)
    x = averaged_spectrum(samples, tapers)
    n_bins = x.size
    df = rate / samples.size
    k1_max = n_bins - 1 if fmax is None else int(np.floor(fmax / df + 1e-9))
    k1, k2 = bispectrum_region(n_bins, k1_max)
    triple = x[k1] * x[k2] * np.conj(x[k1 + k2])
    mags = triple.real ** 2 + triple.imag ** 2
    return Bispectrum(k1, k2, mags, df, n_bins, min(k1_max, n_bins - 1))


def dump_csv(obj, path):
    """Write a transform for external plotting.

    Power spectra get ``bin,Hz,power``; spectrograms ``frame,time_s,bin,Hz,power``;
    bispectra ``k1,k2,f1_hz,f2_hz,value``.
    """
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(obj, PowerSpectrum):
            w.writerow(["bin", "Hz", "dB" if obj.decibels else "power"])
            for k, (f, p) in enumerate(zip(obj.freqs, obj.powers)):
                w.writerow([k, repr(float(f)), repr(float(p))])
        elif isinstance(obj, Spectrogram):
            w.writerow(["frame", "time_s", "bin", "Hz", "power"])
            freqs = obj.freqs
            for t, (t0, row) in enumerate(zip(obj.frame_times, obj.frames)):
                for k, p in enumerate(row):
                    w.writerow([t, repr(float(t0)), k, repr(float(freqs[k])), repr(float(p))])
        elif isinstance(obj, Bispectrum):
            w.writerow(["k1", "k2", "f1_hz", "f2_hz", "value"])
            df = obj.freq_resolution
            for a, b, v in zip(obj.k1, obj.k2, obj.magnitudes):
                w.writerow([int(a), int(b), repr(float(a * df)), repr(float(b * df)), repr(float(v))])
        else:
            raise TypeError(f"cannot dump {type(obj).__name__}")
