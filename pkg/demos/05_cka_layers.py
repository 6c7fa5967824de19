"""
Layer similarity after switching augmentations
==============================================

Train on one family of rotations, then continue on the mirrored family.
Linear CKA between the first model and its continuation shows how much each
layer's representation was rewritten. Continuing on the original views is
the control.
"""

from augforget import RunConfig
from augforget.experiments import load_splits, run_cka_compare

# 47 steps per epoch here, so merge every 25 steps rather than the default 100
cfg = RunConfig(pool_size=3000, heldout_size=600, test_size=200, epochs=3, epochs_second=2,
                probe_size=400, merge_k=25)
splits = load_splits(cfg)
print(f"data: {splits.source}; T1={cfg.cka_t1}  T2={cfg.cka_t2}")
for name, matrix in run_cka_compare(cfg, splits).items():
    diag = " ".join(f"{v:.3f}" for v in matrix.values.diagonal())
    print(f"{name:<8} per-layer CKA {diag}   mean {matrix.diagonal_mean():.3f}")
