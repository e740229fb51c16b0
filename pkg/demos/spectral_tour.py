"""
=================================
A tour of the three spectral maps
=================================

One synthetic segment of each class goes through the multitaper power
spectrum, the multitaper spectrogram and the bispectrum. For each class
we print where the energy sits, how the spectrogram peak moves over time,
and where the bispectrum peaks. Nothing here touches a classifier.

Run with ``python3 demos/spectral_tour.py``.
"""
import numpy as np

from epispec import spectral
from epispec.ingest import BONN_SAMPLING_RATE, ClassLabel, TimeSeriesSegment
from epispec.synthetic import synthetic_segment
from epispec.tapers import dpss

FS = BONN_SAMPLING_RATE
rng = np.random.default_rng(0)

###############################################################################
# Four tapers with NW = 2.5 for the whole segment, and a shorter set for the
# 512-sample spectrogram window. The concentration ratios show how little
# energy leaks outside the +/- W band.

full = dpss(4097, 2.5, 4)
window = dpss(512, 2.5, 4)
print("concentration ratios:", np.round(full.eigenvalues, 6))

###############################################################################
# Power spectrum: the peak frequency and the share of power below 4 Hz.

segments = {label: TimeSeriesSegment(synthetic_segment(label, rng), FS, label=label)
            for label in ClassLabel}
for label, seg in segments.items():
    ps = spectral.multitaper_ps(seg, full)
    keep = ps.freqs >= 1.0
    peak = ps.freqs[keep][np.argmax(ps.powers[keep])]
    low = ps.powers[(ps.freqs >= 1) & (ps.freqs < 4)].sum() / ps.powers[keep].sum()
    print(f"{label.value:>10}: PS peak {peak:5.2f} Hz, share below 4 Hz {low:.2f}")

###############################################################################
# Spectrogram: 29 frames of 2.95 s with 75% overlap. A steady rhythm such as
# the ictal spike-wave keeps the argmax track flat; broadband background
# lets it wander.

for label, seg in segments.items():
    sg = spectral.multitaper_sg(seg, window, hop=128)
    track = sg.freqs[np.argmax(sg.frames[:, 3:], axis=1) + 3]
    print(f"{label.value:>10}: {sg.frames.shape[0]} frames, argmax spread {track.std():5.2f} Hz")

###############################################################################
# Bispectrum over the non-redundant triangle up to 60 Hz. Near the f2 = 0
# edge every point picks up the DC leakage of the tapers, so we look for
# the peak away from it (f2 >= 1 Hz). Phase-coupled harmonics, as in the
# spike-wave discharges, show up as a peak near (f, f).

for label, seg in segments.items():
    bg = spectral.bispectrum(seg, full)
    off = bg.k2 * bg.freq_resolution >= 1.0
    i = int(np.flatnonzero(off)[np.argmax(bg.magnitudes[off])])
    f1, f2 = bg.k1[i] * bg.freq_resolution, bg.k2[i] * bg.freq_resolution
    print(f"{label.value:>10}: {len(bg)} region points, peak at ({f1:5.2f}, {f2:5.2f}) Hz")
