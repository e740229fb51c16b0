"""Pipeline configuration: an INI file whose values command-line flags may override.

Example::

    [pipeline]
    manifest = manifest.ini
    output_dir = out
    tasks = binary, multiclass
    algorithms = lda, bp-mlp, qda, 1nn, rf, j48
    k = 10
    seed = 0
    jobs = 1
    masked_decoding = true

    [tapers]
    nw = 2.5
    tapers = 4

    [spectrogram]
    window = 512
    hop = 128

    [features]
    renyi_order = 3
    bispectrum_fmax = 60

    [bands]
    delta = 1, 4
    theta = 4, 8

    [learners]
    rf_trees = 100
    mlp_epochs = 500

Relative paths resolve against the directory of the config file.
"""
from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .features import BANDS, Band, ExtractionConfig
from .learners import DEFAULT_ALGORITHMS, LearnerConfig, algorithms
from .evaluation import TASKS


@dataclass(frozen=True)
class PipelineConfig:
    manifest: str | None = None
    output_dir: str = "out"
    tasks: tuple = TASKS
    algorithms: tuple = DEFAULT_ALGORITHMS
    k: int = 10
    seed: int = 0
    jobs: int = 1
    masked_decoding: bool = True
    extraction: ExtractionConfig = field(default_factory=ExtractionConfig)
    learner: LearnerConfig = field(default_factory=LearnerConfig)

    def __post_init__(self):
        for t in self.tasks:
            if t not in TASKS:
                raise ConfigError(f"unknown task {t!r}; choose from {TASKS}")
        known = set(algorithms())
        for a in self.algorithms:
            if a not in known:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {sorted(known)}")
        if self.learner.seed != self.seed:
            object.__setattr__(self, "learner", dataclasses.replace(self.learner, seed=self.seed))

    def to_dict(self) -> dict:
        return {
            "manifest": self.manifest,
            "output_dir": self.output_dir,
            "tasks": list(self.tasks),
            "algorithms": list(self.algorithms),
            "k": self.k,
            "seed": self.seed,
            "masked_decoding": self.masked_decoding,
            "extraction": self.extraction.to_dict(),
            "learner": self.learner.to_dict(),
        }


def _split_list(text):
    return tuple(s.strip() for s in text.replace(";", ",").split(",") if s.strip())


def _boolean(text):
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(value, like):
    if isinstance(like, bool):
        return _boolean(value)
    if isinstance(like, int):
        return int(value)
    if isinstance(like, float):
        return float(value)
    return value


def load_config(path=None, overrides: dict | None = None) -> PipelineConfig:
    """Read an INI pipeline config (optional) and apply flat `overrides`.

    Override keys: manifest, output_dir, tasks, algorithms, k, seed, jobs,
    nw, tapers, sg_window, sg_hop.  ``None`` values are ignored.
    """
    pipe: dict = {}
    ext: dict = {}
    lrn: dict = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"config file not found: {path}")
        base = path.parent
        cp = configparser.ConfigParser()
        cp.read(path)
        if "pipeline" in cp:
            s = cp["pipeline"]
            for key in ("manifest", "output_dir"):
                if key in s:
                    p = Path(s[key]).expanduser()
                    pipe[key] = str(p if p.is_absolute() else base / p)
            if "tasks" in s:
                pipe["tasks"] = _split_list(s["tasks"])
            if "algorithms" in s:
                pipe["algorithms"] = tuple(a.lower() for a in _split_list(s["algorithms"]))
            for key in ("k", "seed", "jobs"):
                if key in s:
                    pipe[key] = int(s[key])
            if "masked_decoding" in s:
                pipe["masked_decoding"] = _boolean(s["masked_decoding"])
        if "tapers" in cp:
            s = cp["tapers"]
            if "nw" in s:
                ext["time_bandwidth"] = float(s["nw"])
            if "tapers" in s:
                ext["n_tapers"] = int(s["tapers"])
        if "spectrogram" in cp:
            s = cp["spectrogram"]
            if "window" in s:
                ext["sg_window"] = int(s["window"])
            if "hop" in s:
                ext["sg_hop"] = int(s["hop"])
        if "features" in cp:
            s = cp["features"]
            if "renyi_order" in s:
                ext["renyi_order"] = float(s["renyi_order"])
            if "bispectrum_fmax" in s:
                v = s["bispectrum_fmax"].strip().lower()
                ext["bispectrum_fmax"] = None if v in ("", "none") else float(v)
        if "bands" in cp:
            bands = []
            for name, spec in cp["bands"].items():
                edges = _split_list(spec)
                if len(edges) != 2:
                    raise ConfigError(f"band {name}: expected 'lo, hi'")
                bands.append(Band(name, float(edges[0]), float(edges[1])))
            ext["bands"] = tuple(bands)
        if "learners" in cp:
            defaults = LearnerConfig()
            for key, value in cp["learners"].items():
                if not hasattr(defaults, key):
                    raise ConfigError(f"unknown learner setting {key!r}")
                like = getattr(defaults, key)
                lrn[key] = None if like is None and value.strip().lower() in ("", "none") else \
                    (int(value) if like is None else _coerce(value, like))

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key in ("nw",):
            ext["time_bandwidth"] = float(value)
        elif key == "tapers":
            ext["n_tapers"] = int(value)
        elif key == "sg_window":
            ext["sg_window"] = int(value)
        elif key == "sg_hop":
            ext["sg_hop"] = int(value)
        elif key in ("tasks", "algorithms"):
            vals = _split_list(value) if isinstance(value, str) else tuple(value)
            pipe[key] = tuple(v.lower() for v in vals) if key == "algorithms" else vals
        elif key in ("manifest", "output_dir"):
            pipe[key] = str(value)
        elif key in ("k", "seed", "jobs"):
            pipe[key] = int(value)
        else:
            raise ConfigError(f"unknown override {key!r}")

    try:
        extraction = ExtractionConfig(**ext)
        learner = LearnerConfig(**lrn)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return PipelineConfig(extraction=extraction, learner=learner, **pipe)


__all__ = ["PipelineConfig", "load_config", "BANDS"]
