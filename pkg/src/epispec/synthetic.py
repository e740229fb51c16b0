"""Synthetic stand-ins for the four Bonn classes.

The real archive cannot be redistributed, so tests and demos use rough
caricatures instead: open-eye normal EEG (set A) with weak alpha and some
beta, closed-eye normal EEG (set B) with a dominant alpha rhythm, interictal EEG with
theta slowing and sporadic spikes, and ictal EEG with large rhythmic
spike-wave discharges.  These are not physiological models.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import BONN_SAMPLING_RATE, ClassLabel, write_segment

SEGMENT_LENGTH = 4097
_DIRS = {ClassLabel.NORMAL1: "A", ClassLabel.NORMAL2: "B",
         ClassLabel.INTERICTAL: "D", ClassLabel.ICTAL: "E"}


def _pink(n, rng):
    spec = rng.standard_normal(n // 2 + 1) + 1j * rng.standard_normal(n // 2 + 1)
    f = np.arange(n // 2 + 1, dtype=float)
    f[0] = 1.0
    x = np.fft.irfft(spec / np.sqrt(f), n)
    return x / x.std()


def synthetic_segment(label: ClassLabel, rng, n: int = SEGMENT_LENGTH,
                      fs: float = BONN_SAMPLING_RATE) -> np.ndarray:
    """One integer-valued segment of class `label` (microvolt-like scale)."""
    t = np.arange(n) / fs
    bg = _pink(n, rng)
    phase = rng.uniform(0, 2 * np.pi)
    if label is ClassLabel.NORMAL2:
        f0 = rng.uniform(8.5, 11.5)
        env = 1.0 + 0.3 * np.sin(2 * np.pi * rng.uniform(0.1, 0.3) * t)
        x = rng.uniform(35, 60) * bg + rng.uniform(20, 60) * env * np.sin(2 * np.pi * f0 * t + phase)
    elif label is ClassLabel.NORMAL1:
        f0 = rng.uniform(8.0, 12.0)
        x = rng.uniform(35, 60) * bg + rng.uniform(5, 35) * np.sin(2 * np.pi * f0 * t + phase) \
            + rng.uniform(5, 20) * np.sin(2 * np.pi * rng.uniform(15, 25) * t)
    elif label is ClassLabel.INTERICTAL:
        f0 = rng.uniform(4.5, 7.5)
        x = rng.uniform(40, 80) * bg + rng.uniform(15, 60) * np.sin(2 * np.pi * f0 * t + phase)
        for c in rng.uniform(0, t[-1], size=rng.integers(3, 9)):
            x += rng.uniform(50, 200) * np.exp(-0.5 * ((t - c) / 0.02) ** 2)
    elif label is ClassLabel.ICTAL:
        f0 = rng.uniform(2.5, 4.5)
        wave = np.sin(2 * np.pi * f0 * t + phase)
        spikes = np.maximum(0.0, np.sin(2 * np.pi * f0 * t + phase + 0.5)) ** 8
        x = rng.uniform(60, 120) * bg + rng.uniform(40, 300) * wave + rng.uniform(40, 400) * spikes
    else:
        raise ValueError(f"unknown label {label!r}")
    return np.round(x)


def write_bonn_like(root, per_class: int = 100, n: int = SEGMENT_LENGTH, seed: int = 0) -> Path:
    """Write a synthetic archive under `root` and return its manifest path.

    Layout mirrors the Bonn sets: ``A/``, ``B/``, ``D/``, ``E/`` holding
    ``<letter><index>.txt`` files, plus ``manifest.ini``.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    for label, letter in _DIRS.items():
        d = root / letter
        d.mkdir(parents=True, exist_ok=True)
        for i in range(per_class):
            write_segment(d / f"{letter}{i + 1:03d}.txt", synthetic_segment(label, rng, n))
    manifest = root / "manifest.ini"
    lines = ["[manifest]", f"sampling_rate = {BONN_SAMPLING_RATE}", f"expected_count = {per_class}"]
    lines += [f"{label.value} = {letter}/*.txt" for label, letter in _DIRS.items()]
    manifest.write_text("\n".join(lines) + "\n")
    return manifest
