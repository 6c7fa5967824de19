"""Dense float64 helpers and the package-wide random generator.

Every stochastic routine takes an explicit ``numpy.random.Generator``. The
generator is always built on the Philox4x64 counter-based bit generator so a
seed produces the same stream on every platform and numpy release that ships
Philox.
"""

import numpy as np

from .errors import ShapeError


def make_rng(seed):
    """Return a Philox-backed generator for ``seed`` (int or SeedSequence)."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if int(seed) < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_rngs(seed, n):
    """``n`` independent generators derived from one seed."""
    return [make_rng(s) for s in np.random.SeedSequence(int(seed)).spawn(n)]


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def gauss(rng, rows, cols, mean=0.0, std=1.0):
    """i.i.d. N(mean, std^2) matrix. ``std == 0`` gives a constant matrix."""
    if std < 0:
        raise ValueError(f"std must be >= 0, got {std}")
    if std == 0:
        return np.full((rows, cols), float(mean))
    return mean + std * rng.standard_normal((rows, cols))


def argsort_desc(values):
    """Stable descending argsort: equal values keep ascending index order."""
    values = np.asarray(values, dtype=np.float64)
    if np.isnan(values).any():
        raise ValueError("argsort_desc: NaN in input")
    return np.argsort(-values, kind="stable")
