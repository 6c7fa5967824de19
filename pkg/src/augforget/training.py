"""Minibatch SGD with pluggable augmentation and forgetting mitigation."""

from dataclasses import dataclass

import numpy as np

from . import augment as aug
from .mitigation import ReplayBuffer, SnapshotStore, average_step, merge_step

METHODS = ("vanilla", "replay", "merge", "average")


@dataclass(frozen=True)
class Method:
    """vanilla | replay | merge (selective, top-p) | average (full averaging)."""

    name: str = "vanilla"
    replay_fraction: float = 0.5
    replay_mix: float = 0.5
    merge_p: float = 80.0
    merge_k: int = 100

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown method {self.name!r}; expected one of {METHODS}")
        if not 0 < self.replay_fraction <= 1:
            raise ValueError("replay_fraction must be in (0, 1]")
        if not 0 <= self.replay_mix < 1:
            raise ValueError("replay_mix must be in [0, 1)")
        if not 0 < self.merge_p <= 100:
            raise ValueError("merge_p must be in (0, 100]")
        if self.merge_k < 1:
            raise ValueError("merge_k must be >= 1")

    def replay_count(self, fresh):
        """Replayed records per step so that replay makes up ``replay_mix`` of a batch."""
        return int(round(fresh * self.replay_mix / (1 - self.replay_mix)))


@dataclass
class PolicyAugmenter:
    """One transform per training step, drawn from a uniform or loss-targeted policy.

    The whole minibatch gets the drawn transform. For the targeted policy the
    loss of every transform is measured on the current minibatch and the
    policy is refreshed every ``refresh`` steps.
    """

    transforms: tuple
    policy: str = "uniform"
    beta: float = 1.0
    refresh: int = 1

    def __post_init__(self):
        if self.policy not in ("uniform", "targeted"):
            raise ValueError(f"unknown policy {self.policy!r}")
        self._dist = aug.policy_uniform(len(self.transforms))
        self._step = 0

    @property
    def distribution(self):
        return self._dist

    def __call__(self, model, images, labels, rng):
        if self.policy == "targeted" and self._step % self.refresh == 0:
            losses = [model.loss(aug.apply(t, images, rng), labels) for t in self.transforms]
            self._dist = aug.policy_targeted(losses, self.beta)
        self._step += 1
        i, t = aug.sample_transform(rng, self.transforms, self._dist)
        return aug.apply(t, images, rng), np.full(len(images), i)


@dataclass
class Streams:
    """Independent generators so data order and augmentation draws do not depend
    on the method (replay draws come from their own stream)."""

    order: np.random.Generator
    augment: np.random.Generator
    replay: np.random.Generator


def fit(model, images, labels, streams, *, epochs, lr=0.05, batch_size=64,
        augmenter=None, aug_id=0, method=Method(), buffer=None, on_step=None):
    """Train ``model`` in place. Returns the number of SGD steps taken.

    ``augmenter`` is None when ``images`` are already the augmented view (their
    augmentation id is ``aug_id``). If ``buffer`` is given every fresh
    augmented sample is pushed into it; replayed samples are mixed in only
    when ``method.name == "replay"``. The merge/average schedule starts a new
    snapshot at the first step of this call.
    """
    n = len(images)
    store = SnapshotStore()
    if method.name == "merge":
        merge_step(model, store, method.merge_k, method.merge_p, 0)
    elif method.name == "average":
        average_step(model, store, method.merge_k, 0)
    step = 0
    for _ in range(epochs):
        order = streams.order.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            x, y = images[idx], labels[idx]
            if augmenter is None:
                ids = np.full(len(idx), aug_id)
            else:
                x, ids = augmenter(model, x, y, streams.augment)
            bx, by = x, y
            if method.name == "replay" and buffer is not None and len(buffer):
                m = min(method.replay_count(len(idx)), len(buffer))
                if m:
                    rx, ry, _ = buffer.sample(streams.replay, m)
                    bx = np.concatenate([x, rx])
                    by = np.concatenate([y, ry])
            _, grad = model.loss_and_grad(bx, by)
            model.sgd_step(grad, lr)
            step += 1
            if buffer is not None:
                buffer.push_batch(x, y, ids, streams.replay)
            if method.name == "merge":
                merge_step(model, store, method.merge_k, method.merge_p, step)
            elif method.name == "average":
                average_step(model, store, method.merge_k, step)
            if on_step is not None:
                on_step(model, step)
    return step


def make_buffer(method, pool_size, image_shape):
    return ReplayBuffer(max(1, int(round(method.replay_fraction * pool_size))), image_shape)
