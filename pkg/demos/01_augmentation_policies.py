"""
Random versus loss-targeted augmentation
========================================

A uniform policy over n transforms has entropy ln n. A targeted policy
weights each transform by exp(-beta * loss), favouring the views that best
serve the objective; it concentrates the mass and lowers the entropy, and
the larger beta, the sharper the policy.
"""

import math

import numpy as np

from augforget import default_transform_set, entropy, policy_targeted, policy_uniform
from augforget.augment import apply
from augforget.data import synthetic_digits
from augforget.numerics import make_rng

transforms = default_transform_set()
print("transforms:", ", ".join(t.label for t in transforms))
print(f"uniform entropy {entropy(policy_uniform(len(transforms))):.6f} "
      f"= ln {len(transforms)} = {math.log(len(transforms)):.6f}")

# made-up per-transform losses: identity is easiest, the 45 degree rotations hardest
losses = np.array([0.1, 0.9, 0.8, 2.1, 2.3, 0.6, 0.3, 0.2, 0.25])
for beta in (0.0, 0.5, 1.0, 2.0, 4.0):
    p = policy_targeted(losses, beta)
    top = transforms[int(np.argmax(p.probs))].label
    print(f"beta={beta:<4} entropy={entropy(p):.4f}  most likely: {top} "
          f"({p.probs.max():.2f})")

# every transform keeps pixels in [0, 1] and the image shape
digit = synthetic_digits(10).images[3]
rng = make_rng(0)
for t in transforms:
    out = apply(t, digit, rng)
    print(f"{t.label:<18} ink={out.sum():7.2f} range=[{out.min():.2f}, {out.max():.2f}]")
