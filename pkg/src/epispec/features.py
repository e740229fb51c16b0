"""The 105 spectral measures: 15 per PS band, 5 per SG band, 5 from the bispectrum."""
from __future__ import annotations

import csv
import functools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import spectral
from .errors import EmptyBandError, FeatureError, InvalidParametersError
from .tapers import DEFAULT_K, DEFAULT_NW, dpss


@dataclass(frozen=True)
class Band:
    name: str
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise InvalidParametersError(f"band {self.name}: need 0 < lo < hi, got [{self.lo}, {self.hi})")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)


BANDS = (
    Band("delta", 1.0, 4.0),
    Band("theta", 4.0, 8.0),
    Band("alpha", 8.0, 12.0),
    Band("beta", 12.0, 30.0),
    Band("gamma", 30.0, 60.0),
)

PS_MEASURES = (
    "mean", "std", "peak_value", "peak_frequency", "power_ratio", "centroid",
    "kurtosis", "skewness", "moment1", "moment2", "shannon_entropy", "rms",
    "crest_factor", "flatness", "cv",
)
SG_MEASURES = ("shannon_entropy", "renyi_entropy", "centroid", "band_energy", "bandwidth")
BG_MEASURES = ("mean_magnitude", "normalized_entropy", "quadratic_entropy", "center_x", "center_y")


def feature_names(bands=BANDS) -> list[str]:
    names = [f"ps_{b.name}_{m}" for b in bands for m in PS_MEASURES]
    names += [f"sg_{b.name}_{m}" for b in bands for m in SG_MEASURES]
    names += [f"bg_{m}" for m in BG_MEASURES]
    return names


FEATURE_NAMES = tuple(feature_names())
assert len(FEATURE_NAMES) == 105


@dataclass(frozen=True)
class ExtractionConfig:
    time_bandwidth: float = DEFAULT_NW
    n_tapers: int = DEFAULT_K
    sg_window: int = spectral.DEFAULT_SG_WINDOW
    sg_hop: int = spectral.DEFAULT_SG_HOP
    renyi_order: float = 3.0
    bispectrum_fmax: float | None = spectral.DEFAULT_BISPECTRUM_FMAX
    bands: tuple = BANDS

    def to_dict(self) -> dict:
        d = asdict(self)
        d["bands"] = [[b.name, b.lo, b.hi] for b in self.bands]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractionConfig":
        d = dict(d)
        if "bands" in d:
            d["bands"] = tuple(Band(str(n), float(lo), float(hi)) for n, lo, hi in d["bands"])
        return cls(**d)


@functools.lru_cache(maxsize=32)
def _cached_dpss(length, nw, k):
    return dpss(length, nw, k)


# --------------------------------------------------------------------------
# helpers


def _entropy(q: np.ndarray) -> float:
    q = q[q > 0]
    return float(-np.sum(q * np.log(q)))


def band_mask(freqs: np.ndarray, band: Band) -> np.ndarray:
    return (freqs >= band.lo) & (freqs < band.hi)


def band_slice(ps: spectral.PowerSpectrum, band: Band):
    """Bins with ``lo <= f < hi``; raises EmptyBandError when none fall inside."""
    if band.lo > ps.nyquist:
        raise EmptyBandError(f"band {band.name} starts above Nyquist ({ps.nyquist} Hz)")
    freqs = ps.freqs
    mask = band_mask(freqs, band)
    if not mask.any():
        raise EmptyBandError(f"no frequency bin falls in band {band.name} [{band.lo}, {band.hi})")
    return freqs[mask], np.asarray(ps.powers)[mask]


# --------------------------------------------------------------------------
# measures


def ps_band_features(ps: spectral.PowerSpectrum, band: Band, bands=BANDS) -> dict:
    """The 15 power-spectrum measures of one band.

    The power ratio is taken against the total power of the union of
    `bands`.  A band with zero total power gets the conventional values
    listed in the README (everything 0, peak frequency at ``band.lo``,
    centroid at the band midpoint).
    """
    f, p = band_slice(ps, band)
    freqs = ps.freqs
    union = np.zeros(freqs.shape, dtype=bool)
    for b in bands:
        union |= band_mask(freqs, b)
    denom = float(np.sum(np.asarray(ps.powers)[union]))
    total = float(np.sum(p))
    m = p.size
    out = dict.fromkeys(PS_MEASURES, 0.0)
    if total <= 0:
        out["peak_frequency"] = band.lo
        out["centroid"] = band.midpoint
        return out

    mean = total / m
    dev = p - mean
    m2 = float(np.mean(dev ** 2))
    std = np.sqrt(m2)
    peak = int(np.argmax(p))
    rms = float(np.sqrt(np.mean(p ** 2)))
    out["mean"] = mean
    out["std"] = std
    out["peak_value"] = float(p[peak])
    out["peak_frequency"] = float(f[peak])
    out["power_ratio"] = total / denom if denom > 0 else 0.0
    out["centroid"] = float(np.sum(f * p) / total)
    # treat rounding-level spread of a flat band as no spread
    if std > 1e-12 * mean:
        out["kurtosis"] = float(np.mean(dev ** 4) / m2 ** 2)
        out["skewness"] = float(np.mean(dev ** 3) / m2 ** 1.5)
    out["moment1"] = float(np.sum(f * p))
    out["moment2"] = float(np.sum(f ** 2 * p))
    out["shannon_entropy"] = _entropy(p / total)
    out["rms"] = rms
    out["crest_factor"] = float(p[peak]) / rms
    if np.all(p > 0):
        out["flatness"] = float(np.exp(np.mean(np.log(p))) / mean)
    out["cv"] = std / mean if std > 1e-12 * mean else 0.0
    return out


def sg_band_features(sg: spectral.Spectrogram, band: Band, renyi_order: float = 3.0) -> dict:
    """Shannon and Renyi entropy, centroid, energy and bandwidth of the band's tiles."""
    freqs = sg.freqs
    mask = band_mask(freqs, band)
    if not mask.any():
        raise EmptyBandError(f"no spectrogram bin falls in band {band.name} [{band.lo}, {band.hi})")
    tiles = np.asarray(sg.frames)[:, mask]
    f = np.broadcast_to(freqs[mask], tiles.shape)
    energy = float(np.sum(tiles))
    out = dict.fromkeys(SG_MEASURES, 0.0)
    if energy <= 0:
        out["centroid"] = band.midpoint
        return out
    q = (tiles / energy).ravel()
    centroid = float(np.sum(f.ravel() * q))
    out["shannon_entropy"] = _entropy(q)
    if renyi_order == 1:
        out["renyi_entropy"] = out["shannon_entropy"]
    else:
        out["renyi_entropy"] = float(np.log(np.sum(q[q > 0] ** renyi_order)) / (1.0 - renyi_order))
    out["centroid"] = centroid
    out["band_energy"] = energy
    out["bandwidth"] = float(np.sqrt(np.sum((f.ravel() - centroid) ** 2 * q)))
    return out


def bg_features(bg: spectral.Bispectrum) -> dict:
    """Mean magnitude, normalized and quadratic entropies, weighted bin centers in Hz."""
    if len(bg) == 0:
        raise EmptyBandError("bispectrum region is empty")
    b = np.asarray(bg.magnitudes)
    df = bg.freq_resolution
    out = dict.fromkeys(BG_MEASURES, 0.0)
    total = float(np.sum(b))
    if total <= 0:
        out["center_x"] = float(np.mean(bg.k1)) * df
        out["center_y"] = float(np.mean(bg.k2)) * df
        return out
    q = b / total
    # normalize before squaring; B^2 of large-amplitude segments can overflow
    s = b / b.max()
    r = s ** 2 / np.sum(s ** 2)
    out["mean_magnitude"] = total / b.size
    out["normalized_entropy"] = _entropy(q)
    out["quadratic_entropy"] = _entropy(r)
    out["center_x"] = float(np.sum(bg.k1 * q)) * df
    out["center_y"] = float(np.sum(bg.k2 * q)) * df
    return out


# --------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: tuple = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def as_dict(self) -> dict:
        return dict(zip(self.names, self.values.tolist()))


def extract_all(segment, cfg: ExtractionConfig = ExtractionConfig()) -> FeatureVector:
    samples = np.asarray(getattr(segment, "samples", segment), dtype=float)
    n = samples.size
    if n < cfg.sg_window:
        raise InvalidParametersError(f"segment length {n} is shorter than the SG window {cfg.sg_window}")
    full = _cached_dpss(n, cfg.time_bandwidth, cfg.n_tapers)
    win = _cached_dpss(cfg.sg_window, cfg.time_bandwidth, cfg.n_tapers)

    ps = spectral.multitaper_ps(segment, full)
    sg = spectral.multitaper_sg(segment, win, cfg.sg_hop)
    bg = spectral.bispectrum(segment, full, cfg.bispectrum_fmax)

    values = []
    for band in cfg.bands:
        d = ps_band_features(ps, band, cfg.bands)
        values.extend(d[m] for m in PS_MEASURES)
    for band in cfg.bands:
        d = sg_band_features(sg, band, cfg.renyi_order)
        values.extend(d[m] for m in SG_MEASURES)
    d = bg_features(bg)
    values.extend(d[m] for m in BG_MEASURES)

    names = tuple(feature_names(cfg.bands))
    for name, v in zip(names, values):
        if not np.isfinite(v):
            raise FeatureError(name, v)
    return FeatureVector(np.array(values, dtype=float), names)


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    labels: tuple
    source_ids: tuple
    names: tuple = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1, len(self.names))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "source_ids", tuple(self.source_ids))
        object.__setattr__(self, "names", tuple(self.names))
        if not (len(self.labels) == len(self.source_ids) == v.shape[0]):
            raise ValueError("labels, source ids and rows must align")

    def __len__(self):
        return self.values.shape[0]

    @property
    def shape(self):
        return self.values.shape

    def binary_targets(self) -> np.ndarray:
        from .ingest import ClassLabel
        return np.array([ClassLabel.parse(l).binary.sign for l in self.labels], dtype=int)

    def multiclass_targets(self) -> np.ndarray:
        return np.array(self.labels, dtype=object)

    # ---- persistence
    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["source_id", "label", *self.names])
            for sid, lab, row in zip(self.source_ids, self.labels, self.values):
                w.writerow([sid, lab, *(repr(float(v)) for v in row)])

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:2] != ["source_id", "label"]:
            raise ValueError(f"{path}: not a feature matrix CSV")
        names = tuple(rows[0][2:])
        body = rows[1:]
        values = np.array([[float(v) for v in r[2:]] for r in body], dtype=float).reshape(-1, len(names))
        return cls(values, [r[1] for r in body], [r[0] for r in body], names)

    def to_json(self, path):
        doc = {
            "columns": ["source_id", "label", *self.names],
            "rows": [[sid, lab, *map(float, row)]
                     for sid, lab, row in zip(self.source_ids, self.labels, self.values)],
        }
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "FeatureMatrix":
        with open(path) as fh:
            doc = json.load(fh)
        names = tuple(doc["columns"][2:])
        rows = doc["rows"]
        values = np.array([r[2:] for r in rows], dtype=float).reshape(-1, len(names))
        return cls(values, [r[1] for r in rows], [r[0] for r in rows], names)


def _extract_row(args):
    segment, cfg = args
    return extract_all(segment, cfg).values


def build_matrix(ds, cfg: ExtractionConfig = ExtractionConfig(), jobs: int = 1) -> FeatureMatrix:
    """Feature matrix with one row per dataset segment, in dataset order."""
    segments = list(ds.segments)
    names = tuple(feature_names(cfg.bands))
    if jobs > 1 and len(segments) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_extract_row, [(s, cfg) for s in segments], chunksize=8))
    else:
        rows = [extract_all(s, cfg).values for s in segments]
    values = np.array(rows, dtype=float).reshape(len(segments), len(names))
    labels = [s.label.value if s.label is not None else "" for s in segments]
    return FeatureMatrix(values, labels, [s.source_id for s in segments], names)
