"""Loading of Bonn-format EEG segments and assembly of labeled datasets.

A Bonn segment file is plain ASCII holding one signed integer sample per
line.  Sets A, B, D and E of the archive map onto the four class labels
below; set C is never loaded.
"""
from __future__ import annotations

import configparser
import enum
import glob
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, EmptyFileError, MixedSamplingRateError, ParseError

BONN_SAMPLING_RATE = 173.61


class ClassLabel(enum.Enum):
    NORMAL1 = "Normal1"
    NORMAL2 = "Normal2"
    INTERICTAL = "Interictal"
    ICTAL = "Ictal"

    @property
    def binary(self) -> "BinaryLabel":
        if self in (ClassLabel.NORMAL1, ClassLabel.NORMAL2):
            return BinaryLabel.NORMAL
        return BinaryLabel.ABNORMAL

    @classmethod
    def parse(cls, name: str) -> "ClassLabel":
        key = name.strip().lower()
        for label in cls:
            if label.value.lower() == key:
                return label
        aliases = {"a": cls.NORMAL1, "b": cls.NORMAL2, "d": cls.INTERICTAL, "e": cls.ICTAL}
        if key in aliases:
            return aliases[key]
        raise ConfigError(f"unknown class label {name!r}")


class BinaryLabel(enum.Enum):
    NORMAL = "Normal"
    ABNORMAL = "Abnormal"

    @property
    def sign(self) -> int:
        """Normal is the negative class, abnormal the positive one."""
        return 1 if self is BinaryLabel.ABNORMAL else -1


CLASS_ORDER = (ClassLabel.NORMAL1, ClassLabel.NORMAL2, ClassLabel.INTERICTAL, ClassLabel.ICTAL)
MULTICLASS_NAMES = tuple(label.value for label in CLASS_ORDER)
# positive class first, matching the TP/FP layout of a binary confusion matrix
BINARY_NAMES = (BinaryLabel.ABNORMAL.value, BinaryLabel.NORMAL.value)


@dataclass(frozen=True, eq=False)
class TimeSeriesSegment:
    samples: np.ndarray
    sampling_rate: float
    source_id: str = ""
    label: ClassLabel | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("segment needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise ValueError(f"segment {self.source_id!r} has non-finite samples")
        if not self.sampling_rate > 0:
            raise ValueError("sampling_rate must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sampling_rate


@dataclass(frozen=True)
class ManifestEntry:
    label: ClassLabel
    paths: tuple[Path, ...]


_BONN_DIRS = {ClassLabel.NORMAL1: ("A", "Z"), ClassLabel.NORMAL2: ("B", "O"),
              ClassLabel.INTERICTAL: ("D", "F"), ClassLabel.ICTAL: ("E", "S")}


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    sampling_rate: float = BONN_SAMPLING_RATE
    expected_count: int | None = 100

    @classmethod
    def from_globs(cls, globs: dict, sampling_rate=BONN_SAMPLING_RATE, base_dir=None,
                   expected_count=100) -> "DatasetManifest":
        """Expand a ``{class name: glob}`` mapping; paths resolve against `base_dir`."""
        base = Path(base_dir) if base_dir is not None else Path.cwd()
        entries = []
        for name, pattern in globs.items():
            label = ClassLabel.parse(name)
            pattern = os.path.expanduser(str(pattern))
            if not os.path.isabs(pattern):
                pattern = str(base / pattern)
            matches = sorted(glob.glob(pattern))
            if not matches and not glob.has_magic(pattern):
                # a literal path that does not exist is kept so loading reports it
                matches = [pattern]
            entries.append(ManifestEntry(label, tuple(Path(m) for m in matches)))
        return cls(tuple(entries), float(sampling_rate), expected_count)

    @classmethod
    def bonn(cls, root, expected_count=100) -> "DatasetManifest":
        """Manifest for an unpacked Bonn archive under `root`.

        Sets are found by directory name, either the set letters (A, B, D,
        E) or the archive's folder names (Z, O, F, S), case-insensitively.
        Set C (N) is ignored.
        """
        root = Path(root)
        if not root.is_dir():
            raise FileNotFoundError(f"Bonn directory not found: {root}")
        subdirs = {p.name.upper(): p for p in root.iterdir() if p.is_dir()}
        entries = []
        for label, names in _BONN_DIRS.items():
            found = [subdirs[n] for n in names if n in subdirs]
            if not found:
                raise FileNotFoundError(f"{root}: no directory for set {names[0]} (looked for {'/'.join(names)})")
            files = sorted(p for p in found[0].iterdir() if p.is_file() and p.suffix.lower() == ".txt")
            entries.append(ManifestEntry(label, tuple(files)))
        return cls(tuple(entries), BONN_SAMPLING_RATE, expected_count)

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        """Parse an INI manifest.

        The ``[manifest]`` section holds ``sampling_rate``, an optional
        ``expected_count`` and one ``<class name> = <glob>`` line per class.
        Class names are the labels (``Normal1``...) or the Bonn set letters.
        """
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"manifest not found: {path}")
        parser = configparser.ConfigParser()
        parser.optionxform = str
        parser.read(path)
        if "manifest" not in parser:
            raise ConfigError(f"{path}: missing [manifest] section")
        section = dict(parser["manifest"])
        rate = float(section.pop("sampling_rate", BONN_SAMPLING_RATE))
        expected = section.pop("expected_count", "100")
        expected = int(expected) if expected.strip() else None
        return cls.from_globs(section, rate, base_dir=path.parent, expected_count=expected)

    def validate(self):
        for entry in self.entries:
            for p in entry.paths:
                if not p.is_file():
                    raise FileNotFoundError(f"segment file not found: {p}")


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    segments: tuple[TimeSeriesSegment, ...]
    class_count: int = 4

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        rates = {s.sampling_rate for s in self.segments}
        if len(rates) > 1:
            raise MixedSamplingRateError(f"segments use several sampling rates: {sorted(rates)}")

    def __len__(self):
        return len(self.segments)

    @property
    def sampling_rate(self) -> float | None:
        return self.segments[0].sampling_rate if self.segments else None

    @property
    def labels(self) -> list[ClassLabel]:
        return [s.label for s in self.segments]

    def class_counts(self) -> dict[str, int]:
        counts = {label.value: 0 for label in CLASS_ORDER}
        for s in self.segments:
            counts[s.label.value] += 1
        return counts

    def binary_labels(self) -> np.ndarray:
        """Labels as +1 (abnormal) / -1 (normal)."""
        return np.array([s.label.binary.sign for s in self.segments], dtype=int)

    def multiclass_labels(self) -> np.ndarray:
        return np.array([s.label.value for s in self.segments], dtype=object)


def _parse_lines(path: Path, text: str) -> np.ndarray:
    lines = text.splitlines()
    if not lines:
        raise EmptyFileError(f"{path}: file is empty")
    values = np.empty(len(lines), dtype=float)
    for i, line in enumerate(lines):
        token = line.strip()
        try:
            values[i] = int(token)
        except ValueError:
            raise ParseError(path, i + 1, line) from None
    return values


def load_segment(path, sampling_rate=BONN_SAMPLING_RATE, label=None) -> TimeSeriesSegment:
    """Read one Bonn ASCII file into a segment.

    Raises
    ------
    FileNotFoundError
        The path does not name a readable file.
    ParseError
        A line is empty or not an integer; carries the 1-based line number.
    EmptyFileError
        The file holds no lines at all.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"segment file not found: {path}")
    with open(path, "r", encoding="ascii", errors="replace", newline=None) as fh:
        text = fh.read()
    samples = _parse_lines(path, text)
    return TimeSeriesSegment(samples, float(sampling_rate), path.stem, label)


def load_dataset(manifest: DatasetManifest, jobs: int = 1) -> LabeledDataset:
    """Load every file listed in `manifest`.

    Order is fixed regardless of `jobs`: classes in A, B, D, E order, files
    sorted lexicographically within a class.
    """
    manifest.validate()
    rank = {label: i for i, label in enumerate(CLASS_ORDER)}
    tasks = []
    for entry in sorted(manifest.entries, key=lambda e: rank[e.label]):
        for p in sorted(entry.paths, key=lambda q: str(q)):
            tasks.append((p, entry.label))

    def _load(task):
        return load_segment(task[0], manifest.sampling_rate, task[1])

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            segments = list(pool.map(_load, tasks))
    else:
        segments = [_load(t) for t in tasks]
    return LabeledDataset(tuple(segments), class_count=4)


@dataclass
class ValidationReport:
    class_counts: dict
    length_min: int | None
    length_max: int | None
    findings: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def uniform_length(self) -> bool:
        return self.length_min is not None and self.length_min == self.length_max

    @property
    def ok(self) -> bool:
        return not self.findings

    def to_dict(self) -> dict:
        return {
            "class_counts": dict(self.class_counts),
            "length_min": self.length_min,
            "length_max": self.length_max,
            "uniform_length": self.uniform_length,
            "findings": list(self.findings),
            "warnings": list(self.warnings),
        }


def validate_dataset(ds: LabeledDataset, expected_count: int | None = None) -> ValidationReport:
    """Summarize counts, segment lengths and sample defects without raising."""
    counts = {label.value: 0 for label in CLASS_ORDER}
    findings, warnings = [], []
    lengths = []
    for s in ds.segments:
        if s.label is not None:
            counts[s.label.value] += 1
        lengths.append(len(s.samples))
        # TimeSeriesSegment rejects non-finite data at construction, but a
        # dataset may also be assembled from lightweight stand-ins
        bad = ~np.isfinite(np.asarray(s.samples, dtype=float))
        if bad.any():
            findings.append(f"{s.source_id}: {int(bad.sum())} non-finite sample(s)")
    if not ds.segments:
        warnings.append("dataset is empty")
    elif len(set(lengths)) > 1:
        warnings.append("segment lengths differ")
    if expected_count is not None:
        for name, n in counts.items():
            if 0 < n != expected_count:
                warnings.append(f"class {name} has {n} segments, expected {expected_count}")
    return ValidationReport(
        class_counts=counts,
        length_min=min(lengths) if lengths else None,
        length_max=max(lengths) if lengths else None,
        findings=findings,
        warnings=warnings,
    )


def write_segment(path, samples: Iterable[float]):
    """Write integer samples in Bonn format (used for synthetic fixtures)."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        for v in samples:
            fh.write(f"{int(round(v))}\n")
