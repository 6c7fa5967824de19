"""
Evil twins: rotations that undo each other
==========================================

Train on digits rotated by +45 degrees, then keep training on a second
rotation and measure how much accuracy on the first view is lost. The gap
between the two angles predicts both the forgetting and the fraction of
gradient coordinates whose signs disagree.

Uses a reduced pool so it finishes in well under a minute; pass the default
RunConfig for the full-size study.
"""

from augforget import RunConfig, run_evil_twin
from augforget.experiments import load_splits

# 47 steps per epoch here, so merge every 25 steps rather than the default 100
cfg = RunConfig(pool_size=3000, heldout_size=1000, test_size=500, epochs=3, epochs_second=2,
                merge_k=25)
splits = load_splits(cfg)
print(f"data: {splits.source}, pool={len(splits.pool)}")

reports = {m: run_evil_twin(cfg.replace(method=m), splits)
           for m in ("vanilla", "replay", "merge")}

print(f"{'angle':>6} {'SD':>7} " + " ".join(f"{m:>9}" for m in reports))
for i, row in enumerate(reports["vanilla"].rows):
    cells = " ".join(f"{reports[m].rows[i].forgetting:9.4f}" for m in reports)
    print(f"{row.angle:6.0f} {row.aggregated_sd:7.4f} {cells}")

print(f"Spearman rho(SD, forgetting), vanilla: {reports['vanilla'].spearman_rho:.3f}")
for m, r in reports.items():
    print(f"mean forgetting {m:<8} {r.mean_forgetting():.4f}")
