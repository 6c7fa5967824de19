"""
Gradient alignment decays with augmentation strength
====================================================

For the quadratic loss 0.5 ||A theta - x||^2 the gradient at a perturbed
input x + delta is exactly g_x - A^T delta. The expected cosine between the
two gradients starts at 1 and falls as the perturbation grows.
"""

import numpy as np

from augforget import RunConfig
from augforget.experiments import run_taylor_oracle

cfg = RunConfig(taylor_samples=50_000)
for scale in (0.5, 1.0, 2.0):
    points = run_taylor_oracle(cfg.replace(taylor_scale=scale))
    curve = "  ".join(f"{p.sigma:g}:{p.mean_cos:.3f}" for p in points)
    print(f"A = {scale} I   {curve}")

# an ill-conditioned A: directions with large singular values dominate
a = np.diag(np.geomspace(0.1, 10, cfg.taylor_dim))
points = run_taylor_oracle(cfg, a=a)
print("A = diag(0.1..10)  " + "  ".join(f"{p.sigma:g}:{p.mean_cos:.3f}" for p in points))
