"""Diagnose and mitigate augmentation-induced forgetting in small classifiers.

Random augmentation draws transforms uniformly; gradients from conflicting
views ("evil twins") disagree in sign on many parameters and overwrite what
earlier views taught the model. This package measures that interference
(sign discrepancy, cosine alignment, layer CKA) and counters it with replay
memory or drift-ranked selective weight merging.
"""

__version__ = "0.1.0"

from .augment import (Transform, default_transform_set, entropy, policy_targeted,
                      policy_uniform, rotate, sample_transform)
from .config import RunConfig
from .data import Dataset, load_digits, load_idx, synthetic_digits, take_prefix
from .diagnostics import (aggregated_sign_discrepancy, cka_matrix, cosine_alignment,
                          linear_cka, sign_discrepancy, spearman_rho)
from .experiments import (run_cka_compare, run_evil_twin, run_merge_ablation,
                          run_method_comparison, run_taylor_oracle)
from .mitigation import ReplayBuffer, drift, merge_step, selective_merge, top_p_mask
from .model import MLP, accuracy
from .numerics import make_rng
