"""Gradient-interference and representation-similarity measurements."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


def _values(g):
    return np.asarray(getattr(g, "values", g), dtype=np.float64)


def _pair(g1, g2):
    a, b = _values(g1), _values(g2)
    if a.shape != b.shape or a.ndim != 1:
        raise ShapeError(f"gradient shapes differ: {a.shape} vs {b.shape}")
    return a, b


class ZeroGradientError(ValueError):
    """Cosine alignment is undefined for a zero vector."""


def cosine_alignment(g1, g2):
    a, b = _pair(g1, g2)
    aa, bb = float(a @ a), float(b @ b)
    if aa == 0.0 or bb == 0.0:
        raise ZeroGradientError("cosine alignment undefined for a zero-norm gradient")
    # sqrt(aa * bb) rather than |a||b|: equals aa exactly when a == b
    return float(np.clip((a @ b) / np.sqrt(aa * bb), -1.0, 1.0))


def sign_discrepancy(g1, g2):
    """Fraction of coordinates whose signs (in {-1, 0, +1}) differ.

    Zero is its own sign, so 0 against a nonzero value counts as a discrepancy.
    """
    a, b = _pair(g1, g2)
    if len(a) == 0:
        raise ValueError("sign discrepancy of empty vectors")
    return float(np.count_nonzero(np.sign(a) != np.sign(b)) / len(a))


@dataclass
class SdReport:
    per_batch: np.ndarray
    aggregated: float

    @property
    def k(self):
        return len(self.per_batch)


def aggregated_sign_discrepancy(g1, grads):
    """Mean sign discrepancy of ``g1`` against each of ``k`` minibatch gradients."""
    grads = list(grads)
    if not grads:
        raise ValueError("need at least one minibatch gradient")
    per_batch = np.array([sign_discrepancy(g1, g) for g in grads])
    return SdReport(per_batch, float(per_batch.mean()))


def linear_cka(x, y):
    """Linear CKA between feature matrices with shared rows (samples).

    Columns are centred, then ||Yc^T Xc||_F^2 / (||Xc^T Xc||_F ||Yc^T Yc||_F).
    Returns 0 when either centred matrix is identically zero.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"CKA needs matching row counts, got {x.shape} and {y.shape}")
    if x.shape[0] < 2:
        raise ValueError("CKA needs at least two samples")
    xc = x - x.mean(axis=0)
    yc = y - y.mean(axis=0)
    xx = np.linalg.norm(xc.T @ xc)
    yy = np.linalg.norm(yc.T @ yc)
    if xx == 0.0 or yy == 0.0:
        return 0.0
    return float(np.linalg.norm(yc.T @ xc) ** 2 / (xx * yy))


@dataclass
class CkaMatrix:
    """values[i, j] = linear CKA of layer i of model A against layer j of model B."""

    values: np.ndarray
    labels_a: list
    labels_b: list

    def diagonal_mean(self):
        return float(np.mean(np.diag(self.values)))

    def rows(self):
        return [[la] + list(row) for la, row in zip(self.labels_a, self.values)]

    def header(self):
        return ["layer"] + list(self.labels_b)


def cka_matrix(model_a, model_b, probe):
    images = getattr(probe, "images", probe)
    if len(images) < 2:
        raise ValueError("probe needs at least two samples")
    if model_a.n_layers != model_b.n_layers:
        raise ShapeError(f"layer counts differ: {model_a.n_layers} vs {model_b.n_layers}")
    _, trace_a = model_a.forward(images)
    _, trace_b = model_b.forward(images)
    values = np.array([[linear_cka(a, b) for b in trace_b] for a in trace_a])
    labels = [f"layer{i}" for i in range(model_a.n_layers)]
    return CkaMatrix(values, labels, list(labels))


def taylor_gradient(g_x, m, delta):
    """First-order prediction of the gradient at a perturbed input: g_x + M delta."""
    g = _values(g_x)
    m = np.asarray(m, dtype=np.float64)
    delta = np.asarray(delta, dtype=np.float64)
    if m.ndim != 2 or m.shape != (len(g), len(delta)):
        raise ShapeError(f"M must be ({len(g)}, {len(delta)}), got {m.shape}")
    return g + m @ delta


def spearman_rho(a, b):
    """Spearman rank correlation (average ranks for ties); NaN if either side is constant."""
    ra = _average_ranks(np.asarray(a, dtype=np.float64))
    rb = _average_ranks(np.asarray(b, dtype=np.float64))
    if len(ra) != len(rb) or len(ra) < 2:
        raise ShapeError("spearman_rho needs two equal-length inputs of size >= 2")
    ra -= ra.mean()
    rb -= rb.mean()
    denom = np.sqrt((ra @ ra) * (rb @ rb))
    return float(ra @ rb / denom) if denom > 0 else float("nan")


def _average_ranks(v):
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    ranks[order] = np.arange(1, len(v) + 1)
    sorted_v = v[order]
    start = 0
    for end in range(1, len(v) + 1):
        if end == len(v) or sorted_v[end] != sorted_v[start]:
            ranks[order[start:end]] = (start + 1 + end) / 2
            start = end
    return ranks
