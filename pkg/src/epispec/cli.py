"""Command-line pipeline: ``epispec extract | evaluate | stats | report``.

Every subcommand accepts ``--config FILE`` (see :mod:`epispec.config`) and
flags that override it.  Outputs are deterministic for a fixed config and
fixed data: no timestamps, sorted JSON keys, ``repr`` floats.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error
(including missing input paths).
"""
from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import sys
from collections import Counter
from pathlib import Path

from . import spectral
from .config import PipelineConfig, load_config
from .errors import ConfigError, EpispecError, InvalidKError, InvalidParametersError
from .evaluation import CvReport, cross_validate, read_fold_csv, write_fold_csv
from .features import ExtractionConfig, FeatureMatrix, _cached_dpss, build_matrix
from .ingest import (BINARY_NAMES, MULTICLASS_NAMES, DatasetManifest, load_dataset,
                     load_segment, validate_dataset)
from .learners import DISPLAY_NAMES
from .stats import run_battery

log = logging.getLogger("epispec")

FEATURES_CSV = "features.csv"
EXTRACTION_JSON = "extraction.json"


class UsageError(Exception):
    """Raised for problems the user fixes by changing arguments (exit 2)."""


def _write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _display(alg):
    return DISPLAY_NAMES.get(alg, alg)


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(cfg: PipelineConfig, json_copy: bool = False) -> int:
    if cfg.manifest is None:
        raise UsageError("no manifest given (use --manifest or [pipeline] manifest)")
    src = Path(cfg.manifest)
    # a directory is taken to be an unpacked Bonn archive
    manifest = DatasetManifest.bonn(src) if src.is_dir() else DatasetManifest.read(src)
    manifest.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ds = load_dataset(manifest, jobs=cfg.jobs)
    report = validate_dataset(ds, manifest.expected_count)
    for w in report.warnings:
        log.warning("%s", w)
    if len(ds) == 0:
        log.warning("manifest %s matched no segment files; writing a header-only CSV", cfg.manifest)
    fm = build_matrix(ds, cfg.extraction, jobs=cfg.jobs)
    fm.to_csv(out / FEATURES_CSV)
    if json_copy:
        fm.to_json(out / "features.json")
    _write_json(out / EXTRACTION_JSON, {
        "format": "epispec.extraction",
        "version": 1,
        "rows": len(fm),
        "features": len(fm.names),
        "sampling_rate": ds.sampling_rate,
        "validation": report.to_dict(),
        "config": cfg.to_dict(),
    })
    log.info("wrote %d x %d feature matrix to %s", *fm.shape, out / FEATURES_CSV)
    return 0


def _check_k(task, targets, k):
    counts = Counter(targets.tolist())
    smallest = min(counts.values())
    if k > smallest:
        cls = min(counts, key=counts.get)
        raise InvalidKError(f"{task}: k={k} exceeds the size of class {cls!r} ({smallest} examples)")


def cmd_evaluate(cfg: PipelineConfig, features_path=None) -> int:
    out = Path(cfg.output_dir)
    path = Path(features_path) if features_path else out / FEATURES_CSV
    if not path.is_file():
        raise FileNotFoundError(f"feature CSV not found: {path} (run `epispec extract` first)")
    fm = FeatureMatrix.from_csv(path)
    if len(fm) == 0:
        raise InvalidParametersError(f"{path} has no rows")
    echo = cfg.to_dict()
    prov = Path(path).parent / EXTRACTION_JSON
    if prov.is_file():
        echo["extraction"] = json.loads(prov.read_text())["config"]["extraction"]
    X = fm.values
    targets = {"binary": fm.binary_targets(), "multiclass": fm.multiclass_targets()}
    # fail before any training
    for task in cfg.tasks:
        _check_k(task, targets[task], cfg.k)
    out.mkdir(parents=True, exist_ok=True)
    for task in cfg.tasks:
        names = BINARY_NAMES if task == "binary" else \
            tuple(n for n in MULTICLASS_NAMES if n in set(fm.labels))
        reports = []
        for alg in cfg.algorithms:
            log.info("%s / %s", task, alg)
            rep = cross_validate(task, alg, X, targets[task], k=cfg.k, seed=cfg.seed, cfg=cfg.learner,
                                 class_names=names, masked=cfg.masked_decoding, config_echo=echo,
                                 jobs=cfg.jobs)
            (out / f"cv_{task}_{alg}.json").write_text(rep.to_json())
            reports.append(rep)
            log.info("  ME %.2f%%  SD %.2f%%", rep.me, rep.sd)
        write_fold_csv(reports, out / f"folds_{task}.csv")
    return 0


def cmd_stats(fold_csvs, out_path=None, alpha=0.05) -> int:
    if not fold_csvs:
        raise UsageError("no fold CSV given")
    if out_path is not None and len(fold_csvs) > 1:
        raise UsageError("--output needs exactly one fold CSV")
    for p in fold_csvs:
        p = Path(p)
        if not p.is_file():
            raise FileNotFoundError(f"fold CSV not found: {p}")
        names, block = read_fold_csv(p)
        if len(names) < 2:
            raise InvalidParametersError(f"{p}: need at least 2 algorithms, found {len(names)}")
        doc = run_battery(names, block, alpha)
        doc["source"] = p.name
        target = Path(out_path) if out_path else p.with_name(p.stem.replace("folds", "stats", 1) + ".json")
        if target == p:
            target = p.with_suffix(".stats.json")
        _write_json(target, doc)
        log.info("wrote %s", target)
    return 0


def _fmt(v):
    return "n/a" if v is None else f"{v:.2f}"


def _fmt_p(test):
    if test["p_value"] is None:
        return "undefined (all fold errors equal)"
    return f"{test['p_value']:.4f}"


def _md_table(header, rows):
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(str(c) for c in r) + " |" for r in rows]
    return "\n".join(lines)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def dump_segment(path, out: Path, extraction: ExtractionConfig, sampling_rate) -> list:
    """PS, SG and BG plot-data CSVs for one segment file; returns the paths written."""
    seg = load_segment(path, sampling_rate)
    tapers = _cached_dpss(len(seg), extraction.time_bandwidth, extraction.n_tapers)
    sg_tapers = _cached_dpss(extraction.sg_window, extraction.time_bandwidth, extraction.n_tapers)
    stem = Path(path).stem
    written = []
    for kind, obj in (("ps", spectral.multitaper_ps(seg, tapers)),
                      ("sg", spectral.multitaper_sg(seg, sg_tapers, extraction.sg_hop)),
                      ("bg", spectral.bispectrum(seg, tapers, extraction.bispectrum_fmax))):
        target = out / f"{kind}_{stem}.csv"
        spectral.dump_csv(obj, target)
        written.append(target)
    return written


def cmd_report(out_dir, segments=(), cfg: PipelineConfig | None = None) -> int:
    out = Path(out_dir)
    if not out.is_dir():
        raise FileNotFoundError(f"output directory not found: {out}")
    files = sorted(glob.glob(str(out / "cv_*.json")))
    if not files:
        raise FileNotFoundError(f"no cv_*.json reports in {out} (run `epispec evaluate` first)")
    reports = {}
    config = None
    for f in files:
        d = json.loads(Path(f).read_text())
        rep = CvReport.from_dict(d)
        reports[(rep.task, rep.algorithm)] = rep
        config = config or d.get("config")
    algs = []
    for _, a in reports:
        if a not in algs:
            algs.append(a)
    order = [a for a in (cfg.algorithms if cfg else ()) if a in algs] + \
        [a for a in algs if not cfg or a not in cfg.algorithms]

    md = ["# Epilepsy detection results", ""]

    # SCV table: ME and SD per task
    rows = []
    for a in order:
        row = [_display(a)]
        for task in ("binary", "multiclass"):
            r = reports.get((task, a))
            row += [_fmt(r.me), _fmt(r.sd)] if r else ["n/a", "n/a"]
        rows.append(row)
    header = ["Algorithm", "Binary ME (%)", "Binary SD (%)", "Multiclass ME (%)", "Multiclass SD (%)"]
    md += ["## Stratified cross-validation", "", _md_table(header, rows), ""]
    _write_csv(out / "table_scv.csv", header, rows)

    # binary CCR / PV
    bin_algs = [a for a in order if ("binary", a) in reports]
    if bin_algs:
        header = ["Algorithm", "CCR Normal (%)", "CCR Abnormal (%)", "PV Normal (%)", "PV Abnormal (%)"]
        rows = []
        for a in bin_algs:
            m = reports[("binary", a)].class_metrics()
            rows.append([_display(a), _fmt(m["Normal"]["ccr"]), _fmt(m["Abnormal"]["ccr"]),
                         _fmt(m["Normal"]["pv"]), _fmt(m["Abnormal"]["pv"])])
        md += ["## Binary CCR and PV", "", _md_table(header, rows), ""]
        _write_csv(out / "table_binary_cm.csv", header, rows)

    # multiclass CCR and PV, one table each
    mc_algs = [a for a in order if ("multiclass", a) in reports]
    if mc_algs:
        classes = list(reports[("multiclass", mc_algs[0])].confusion.class_names)
        for metric, title in (("ccr", "CCR"), ("pv", "PV")):
            header = ["Algorithm", *[f"{c} (%)" for c in classes]]
            rows = []
            for a in mc_algs:
                m = reports[("multiclass", a)].class_metrics()
                rows.append([_display(a), *[_fmt(m[c][metric]) for c in classes]])
            md += [f"## Multiclass {title}", "", _md_table(header, rows), ""]
            _write_csv(out / f"table_multiclass_{metric}.csv", header, rows)

    # statistics, when `epispec stats` has been run
    for task in ("binary", "multiclass"):
        sp = out / f"stats_{task}.json"
        if not sp.is_file():
            continue
        st = json.loads(sp.read_text())
        md += [f"## Hypothesis tests ({task})", ""]
        md += [_md_table(["Algorithm", "Shapiro-Wilk p"],
                         [[_display(r["algorithm"]), _fmt_p(r)] for r in st["shapiro_wilk"]]), ""]
        fr = st["friedman"]
        md += [f"Friedman chi-square = {fr['statistic']:.4f}, p = {fr['p_value']:.4f}", ""]
        sig = [p for p in st["nemenyi"]["pairs"] if p["reject_null"]]
        if sig:
            md += [_md_table(["Pair of classifiers", "p-value"],
                             [[f"{_display(p['a'])} vs. {_display(p['b'])}", f"{p['p_value']:.4f}"] for p in sig]), ""]
        else:
            md += ["No Nemenyi pair differs at the chosen level.", ""]

    if segments:
        ext = ExtractionConfig.from_dict(config["pipeline"]["extraction"]) if config and "pipeline" in config \
            else (cfg.extraction if cfg else ExtractionConfig())
        rate = None
        prov = out / EXTRACTION_JSON
        if prov.is_file():
            rate = json.loads(prov.read_text()).get("sampling_rate")
        rate = rate or 173.61
        md += ["## Segment dumps", ""]
        for s in segments:
            if not Path(s).is_file():
                raise FileNotFoundError(f"segment file not found: {s}")
            for p in dump_segment(s, out, ext, rate):
                md.append(f"- `{p.name}`")
        md.append("")

    if config:
        md += ["## Configuration", "", "```json", json.dumps(config, indent=2, sort_keys=True), "```", ""]
    (out / "report.md").write_text("\n".join(md))
    log.info("wrote %s", out / "report.md")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _common(p):
    p.add_argument("--config", help="INI pipeline config")
    p.add_argument("--out", dest="output_dir", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epispec", description="Multitaper EEG feature pipeline.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="segments -> feature CSV")
    _common(p)
    p.add_argument("--manifest", help="manifest INI, or a directory holding the Bonn sets")
    p.add_argument("--nw", type=float, help="taper time-bandwidth product")
    p.add_argument("--tapers", type=int, help="number of tapers K")
    p.add_argument("--sg-window", type=int)
    p.add_argument("--sg-hop", type=int)
    p.add_argument("--json", action="store_true", help="also write features.json")

    p = sub.add_parser("evaluate", help="feature CSV -> CV reports and per-fold CSV")
    _common(p)
    p.add_argument("--features", help="feature CSV (default: OUT/features.csv)")
    p.add_argument("--tasks", help="comma list: binary, multiclass")
    p.add_argument("--algorithms", help="comma list of learner tags")
    p.add_argument("--k", type=int, help="number of folds")

    p = sub.add_parser("stats", help="per-fold CSV -> hypothesis-test JSON")
    p.add_argument("fold_csv", nargs="+")
    p.add_argument("-o", "--output", help="output JSON (single input only)")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("-v", "--verbose", action="store_true")

    p = sub.add_parser("report", help="outputs -> markdown summary and table CSVs")
    _common(p)
    p.add_argument("out_dir", nargs="?", help="directory holding evaluate/stats outputs")
    p.add_argument("--segment", action="append", default=[], help="segment file to dump (repeatable)")
    return ap


def _overrides(args) -> dict:
    keys = ("manifest", "output_dir", "seed", "jobs", "nw", "tapers", "sg_window", "sg_hop",
            "tasks", "algorithms", "k")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="epispec: %(levelname)s: %(message)s", stream=sys.stderr)
    logging.captureWarnings(True)
    try:
        if args.command == "stats":
            return cmd_stats(args.fold_csv, args.output, args.alpha)
        cfg = load_config(args.config, _overrides(args))
        if args.command == "extract":
            return cmd_extract(cfg, args.json)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.features)
        return cmd_report(args.out_dir or cfg.output_dir, args.segment, cfg)
    except (UsageError, ConfigError, InvalidKError, FileNotFoundError) as exc:
        print(f"epispec: error: {exc}", file=sys.stderr)
        return 2
    except (EpispecError, ValueError, OSError) as exc:
        print(f"epispec: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
