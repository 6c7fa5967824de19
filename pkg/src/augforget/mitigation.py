"""Forgetting countermeasures: drift-ranked selective weight merging and replay memory."""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .numerics import argsort_desc


def _same_length(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"parameter vectors differ in shape: {a.shape} vs {b.shape}")
    return a, b


def drift(theta, theta_s):
    """Per-parameter absolute change since the snapshot."""
    a, b = _same_length(theta, theta_s)
    return np.abs(a - b)


def mask_count(n, p):
    """Number of selected parameters: round(p * n / 100), at least one.

    Python's round() is used, so exact halves go to the even neighbour.
    """
    return max(1, round(p * n / 100))


@dataclass
class MergeMask:
    bits: np.ndarray
    p: float

    @property
    def count(self):
        return int(np.count_nonzero(self.bits))


def top_p_mask(d, p):
    """Select the ``mask_count(N, p)`` largest drifts; ties favour lower indices."""
    d = np.asarray(d, dtype=np.float64)
    if not 0 < p <= 100:
        raise ValueError(f"p must be in (0, 100], got {p}")
    if d.ndim != 1 or len(d) == 0:
        raise ValueError("drift must be a non-empty vector")
    if not np.isfinite(d).all():
        raise ValueError("drift contains non-finite values")
    bits = np.zeros(len(d), dtype=bool)
    bits[argsort_desc(d)[:mask_count(len(d), p)]] = True
    return MergeMask(bits, p)


def selective_merge(theta, theta_s, mask):
    """Masked coordinates move to the midpoint with the snapshot; others are untouched."""
    a, b = _same_length(theta, theta_s)
    bits = np.asarray(getattr(mask, "bits", mask), dtype=bool)
    if bits.shape != a.shape:
        raise ShapeError(f"mask shape {bits.shape} does not match parameters {a.shape}")
    return np.where(bits, (a + b) / 2, a)


@dataclass
class Snapshot:
    params: np.ndarray
    iteration: int


class SnapshotStore:
    """Holds the single weight snapshot the merge schedule compares against."""

    def __init__(self):
        self.snapshot = None

    def capture(self, model, iteration):
        self.snapshot = Snapshot(model.flat_params(), iteration)


def merge_step(model, store, k, p, iteration):
    """One tick of the merge schedule, called after every optimisation step.

    Iteration 0 (or an empty store) only captures the snapshot. At positive
    multiples of ``k`` the top-p drifted parameters are averaged with the
    snapshot and the snapshot is replaced by the merged weights. Returns
    whether a merge happened.
    """
    if k < 1:
        raise ValueError(f"merge interval k must be >= 1, got {k}")
    if iteration == 0 or store.snapshot is None:
        store.capture(model, iteration)
        return False
    if iteration % k:
        return False
    theta = model.params
    theta_s = store.snapshot.params
    mask = top_p_mask(drift(theta, theta_s), p)
    model.set_flat_params(selective_merge(theta, theta_s, mask))
    store.capture(model, iteration)
    return True


def average_step(model, store, k, iteration):
    """Plain full weight averaging on the same schedule (no drift ranking)."""
    if iteration == 0 or store.snapshot is None:
        store.capture(model, iteration)
        return False
    if iteration % k:
        return False
    model.set_flat_params((model.params + store.snapshot.params) / 2)
    store.capture(model, iteration)
    return True


class ReplayBuffer:
    """Fixed-capacity exemplar memory filled by reservoir sampling.

    Records are (image, label, augmentation id). Once full, the n-th pushed
    record replaces a uniformly chosen slot with probability capacity / n, so
    the buffer is a uniform sample of the whole stream.
    """

    def __init__(self, capacity, image_shape):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.images = np.zeros((self.capacity,) + tuple(image_shape))
        self.labels = np.zeros(self.capacity, dtype=np.int64)
        self.aug_ids = np.zeros(self.capacity, dtype=np.int64)
        self.size = 0
        self.seen = 0

    def __len__(self):
        return self.size

    def push(self, record, rng):
        image, label, aug_id = record
        self.seen += 1
        if self.size < self.capacity:
            slot = self.size
            self.size += 1
        else:
            slot = int(rng.integers(0, self.seen))
            if slot >= self.capacity:
                return
        self.images[slot] = image
        self.labels[slot] = label
        self.aug_ids[slot] = aug_id

    def push_batch(self, images, labels, aug_ids, rng):
        for record in zip(images, labels, aug_ids):
            self.push(record, rng)

    def sample(self, rng, m):
        """``m`` distinct records, uniformly without replacement."""
        if self.size == 0:
            raise ValueError("cannot sample from an empty replay buffer")
        if m > self.size:
            raise ValueError(f"requested {m} records from a buffer of {self.size}")
        idx = rng.choice(self.size, size=m, replace=False)
        return self.images[idx], self.labels[idx], self.aug_ids[idx]
