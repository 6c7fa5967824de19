"""Finite augmentation sets and the random vs. loss-targeted selection policies.

Images are float64 arrays of shape (H, W) or stacks (..., H, W) with values in
[0, 1]. Every transform works on stacks so a minibatch is augmented in one call.
"""

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("identity", "rotate", "hflip", "gauss_noise", "brightness")


@dataclass(frozen=True)
class Transform:
    kind: str
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "rotate" and not -180 <= self.param <= 180:
            raise ValueError(f"rotation angle {self.param} outside [-180, 180]")
        if self.kind == "gauss_noise" and self.param < 0:
            raise ValueError(f"noise std must be >= 0, got {self.param}")
        if self.kind == "brightness" and not -1 <= self.param <= 1:
            raise ValueError(f"brightness delta {self.param} outside [-1, 1]")

    @property
    def label(self):
        if self.kind in ("identity", "hflip"):
            return self.kind
        return f"{self.kind}:{self.param:g}"

    @classmethod
    def parse(cls, text):
        kind, _, arg = text.strip().partition(":")
        return cls(kind, float(arg) if arg else 0.0)


def default_transform_set():
    """Nine transforms: identity, rotations of +-15 and +-45 degrees, hflip,
    Gaussian noise (std 0.1) and brightness +-0.2."""
    return (
        Transform("identity"),
        Transform("rotate", 15.0),
        Transform("rotate", -15.0),
        Transform("rotate", 45.0),
        Transform("rotate", -45.0),
        Transform("hflip"),
        Transform("gauss_noise", 0.1),
        Transform("brightness", 0.2),
        Transform("brightness", -0.2),
    )


def parse_transform_set(text):
    """``"identity;rotate:15;hflip"`` -> tuple of Transforms (order kept)."""
    items = tuple(Transform.parse(t) for t in text.split(";") if t.strip())
    if not items:
        raise ValueError("transform set must contain at least one transform")
    return items


def format_transform_set(transforms):
    return ";".join(t.label for t in transforms)


def _cos_sin(angle_deg):
    # exact values on quarter turns so 90-degree rotations land on grid points
    quarter = angle_deg / 90.0
    if quarter == int(quarter):
        return [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][int(quarter) % 4]
    rad = math.radians(angle_deg)
    return math.cos(rad), math.sin(rad)


def rotate(img, angle_deg):
    """Rotate clockwise (as displayed, row 0 at the top) by ``angle_deg``.

    Inverse mapping about ((W-1)/2, (H-1)/2) with bilinear interpolation;
    neighbours outside the source grid read as 0.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape[-2:]
    c, s = _cos_sin(angle_deg)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    yy, xx = np.mgrid[0:h, 0:w]
    dy, dx = yy - cy, xx - cx
    src_x = cx + c * dx + s * dy
    src_y = cy - s * dx + c * dy

    x0 = np.floor(src_x)
    y0 = np.floor(src_y)
    fx, fy = src_x - x0, src_y - y0
    # pad one zero pixel on every side; clip far-away samples into the padding
    padded = np.zeros(img.shape[:-2] + (h + 2, w + 2))
    padded[..., 1:-1, 1:-1] = img
    xi0 = np.clip(x0, -1, w).astype(np.intp) + 1
    yi0 = np.clip(y0, -1, h).astype(np.intp) + 1
    xi1 = np.clip(x0 + 1, -1, w).astype(np.intp) + 1
    yi1 = np.clip(y0 + 1, -1, h).astype(np.intp) + 1
    return ((1 - fy) * (1 - fx) * padded[..., yi0, xi0]
            + (1 - fy) * fx * padded[..., yi0, xi1]
            + fy * (1 - fx) * padded[..., yi1, xi0]
            + fy * fx * padded[..., yi1, xi1])


def apply(t, img, rng=None):
    """Apply one transform. Noise and brightness results are clamped to [0, 1].

    ``rng`` is only consumed by ``gauss_noise`` with a positive std.
    """
    img = np.asarray(img, dtype=np.float64)
    if t.kind == "identity":
        return img
    if t.kind == "rotate":
        return rotate(img, t.param)
    if t.kind == "hflip":
        return img[..., ::-1].copy()
    if t.kind == "brightness":
        return np.clip(img + t.param, 0.0, 1.0)
    if t.param == 0:
        return img
    if rng is None:
        raise ValueError("gauss_noise needs a generator")
    return np.clip(img + t.param * rng.standard_normal(img.shape), 0.0, 1.0)


def apply_per_sample(transforms, index, images, rng=None):
    """Apply ``transforms[index[i]]`` to ``images[i]``, grouping by transform."""
    out = np.empty_like(images, dtype=np.float64)
    for i in np.unique(index):
        sel = index == i
        out[sel] = apply(transforms[i], images[sel], rng)
    return out


@dataclass(frozen=True)
class PolicyDistribution:
    probs: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 1 or len(probs) == 0:
            raise ValueError("policy needs at least one probability")
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must be non-negative and sum to 1")
        object.__setattr__(self, "probs", probs)

    def __len__(self):
        return len(self.probs)


def policy_uniform(n):
    if n < 1:
        raise ValueError("uniform policy needs n >= 1")
    return PolicyDistribution(np.full(n, 1.0 / n), 0.0)


def policy_targeted(losses, beta):
    """Softmax of -beta * loss over the transform set."""
    losses = np.asarray(losses, dtype=np.float64)
    if np.isnan(losses).any():
        raise ValueError("NaN loss")
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    z = -beta * losses
    z -= z.max()
    w = np.exp(z)
    probs = w / w.sum()
    # renormalising once more keeps the sum within 1e-12 for long vectors
    return PolicyDistribution(probs / probs.sum(), float(beta))


def entropy(p):
    """Shannon entropy in nats; zero-probability terms contribute nothing."""
    probs = p.probs if isinstance(p, PolicyDistribution) else np.asarray(p, dtype=np.float64)
    nz = probs[probs > 0]
    return float(-(nz * np.log(nz)).sum())


def _inverse_cdf(probs, u):
    idx = np.searchsorted(np.cumsum(probs), u, side="right")
    return np.minimum(idx, len(probs) - 1)


def sample_transform(rng, transforms, p):
    """One rng draw, inverse-CDF over ``p.probs``; returns (index, transform)."""
    if len(p.probs) != len(transforms):
        raise ValueError(f"{len(p.probs)} probabilities for {len(transforms)} transforms")
    i = int(_inverse_cdf(p.probs, rng.random()))
    return i, transforms[i]


def sample_indices(rng, p, size):
    """Vectorised ``sample_transform``: ``size`` independent transform indices."""
    return _inverse_cdf(p.probs, rng.random(size))
