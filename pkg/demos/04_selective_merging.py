"""
Selective weight merging
========================

Every k steps the weights that drifted most since the last snapshot are
pulled halfway back towards it. The rest keep their trained values bit for
bit. Averaging all of them (p = 100) is plain snapshot averaging.
"""

import numpy as np

from augforget import drift, selective_merge, top_p_mask
from augforget.mitigation import SnapshotStore, merge_step
from augforget.model import MLP
from augforget.numerics import make_rng

rng = make_rng(0)
snapshot = rng.standard_normal(10)
current = snapshot + rng.standard_normal(10) * np.linspace(0.1, 2.0, 10)

d = drift(current, snapshot)
for p in (20, 60, 80, 100):
    mask = top_p_mask(d, p)
    merged = selective_merge(current, snapshot, mask)
    moved = np.flatnonzero(merged != current)
    print(f"p={p:<3} merged {mask.count:2d}/10 coordinates: {moved.tolist()}")

# the same rule driving a model over a few steps
model = MLP.init((8, 6, 3), rng)
store = SnapshotStore()
x, y = rng.standard_normal((32, 8)), rng.integers(0, 3, 32)
for step in range(12):
    merged = merge_step(model, store, k=4, p=80, iteration=step)
    loss, grad = model.loss_and_grad(x, y)
    model.sgd_step(grad, 0.5)
    print(f"step {step:2d} loss {loss:.4f}" + ("  <- merged" if merged else ""))
