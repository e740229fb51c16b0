"""
=====================================================
From raw segments to cross-validated error, in memory
=====================================================

The Bonn archive cannot be downloaded from here, so this walk-through uses
the synthetic stand-in from :mod:`epispec.synthetic`: four classes of
single-channel segments at 173.61 Hz, 4097 samples each, with physiology
loosely modeled on sets A, B, D and E.

The same steps run from the command line as ``epispec extract`` and
``epispec evaluate``. Here they are spelled out with the library API, on a
smaller archive so the script finishes in well under a minute.

Run with ``python3 demos/synthetic_pipeline.py [per_class]``.
"""
import sys
import tempfile
import time

from epispec import DatasetManifest, ExtractionConfig, build_matrix, load_dataset
from epispec.evaluation import ccr, cross_validate, pv
from epispec.learners import DISPLAY_NAMES, LearnerConfig
from epispec.synthetic import write_bonn_like

per_class = int(sys.argv[1]) if len(sys.argv) > 1 else 30

###############################################################################
# Write the archive to disk in the Bonn layout (one integer per line) and
# read it back through a manifest, exactly as real data would be.

root = tempfile.mkdtemp(prefix="epispec-demo-")
manifest = DatasetManifest.read(write_bonn_like(root, per_class=per_class, seed=1))
ds = load_dataset(manifest)
print(f"{len(ds)} segments:", ds.class_counts())

###############################################################################
# 105 features per segment: 15 power-spectrum measures in each of five
# bands, 5 spectrogram measures in each band, and 5 bispectrum measures.

t0 = time.perf_counter()
fm = build_matrix(ds, ExtractionConfig())
print(f"feature matrix {fm.values.shape} in {time.perf_counter() - t0:.1f} s")
print("first columns:", ", ".join(fm.names[:4]), "...")

###############################################################################
# Stratified 5-fold cross-validation for both tasks. The forest and the
# network are trimmed so the demo stays quick; the defaults are 100 trees
# and 500 epochs.

cfg = LearnerConfig(rf_trees=30, mlp_epochs=150)
tasks = {"binary": fm.binary_targets(), "multiclass": fm.multiclass_targets()}
for task, y in tasks.items():
    print(f"\n{task} task (ME and SD over folds, %)")
    for alg in ("lda", "qda", "1nn", "j48", "rf", "bp-mlp"):
        rep = cross_validate(task, alg, fm.values, y, k=5, seed=0, cfg=cfg)
        print(f"  {DISPLAY_NAMES[alg]:>7}: ME {rep.me:5.2f}  SD {rep.sd:5.2f}")

###############################################################################
# Per-class rates from the pooled confusion matrix. CCR divides by the true
# class total and PV by the predicted total, so in the binary task they are
# sensitivity/specificity and the predictive values.

rep = cross_validate("binary", "rf", fm.values, tasks["binary"], k=5, seed=0, cfg=cfg)
cm = rep.confusion
print("\nRF binary confusion matrix (rows = predicted, columns = true):")
print(f"  {'':>10}" + "".join(f"{c:>10}" for c in cm.class_names))
for name, row in zip(cm.class_names, cm.counts):
    print(f"  {name:>10}" + "".join(f"{v:>10}" for v in row))
for name in cm.class_names:
    print(f"  {name:>8}: CCR {ccr(cm, name):6.2f}%  PV {pv(cm, name):6.2f}%")
