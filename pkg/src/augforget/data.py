"""Grayscale digit datasets: IDX/ubyte ingestion and a seeded synthetic fallback."""

import functools
import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IdxCountMismatchError, IdxMagicError, IdxTruncatedError
from .numerics import make_rng

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
DATA_ENV = "AUGFORGET_DATA"


@dataclass
class Dataset:
    """``images`` is (n, H, W) float64 in [0, 1]; ``labels`` is (n,) int64."""

    images: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 3:
            raise ValueError(f"images must be (n, H, W), got {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise ValueError("label outside [0, class_count)")

    def __len__(self):
        return len(self.labels)

    @property
    def shape(self):
        return self.images.shape[1:]

    def subset(self, index):
        return Dataset(self.images[index], self.labels[index], self.class_count)


def _read_bytes(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _header(raw, path, magic, n_dims):
    size = 4 * (1 + n_dims)
    if len(raw) < 4:
        raise IdxTruncatedError(path, size, len(raw))
    (found,) = struct.unpack(">I", raw[:4])
    if found != magic:
        raise IdxMagicError(path, magic, found)
    if len(raw) < size:
        raise IdxTruncatedError(path, size, len(raw))
    return struct.unpack(f">{n_dims}I", raw[4:size]), size


def load_idx(images_path, labels_path):
    """Read an IDX image/label file pair (optionally gzipped) into a Dataset.

    Pixels are scaled by 1/255. Record order follows the files.
    """
    raw = _read_bytes(images_path)
    (n, rows, cols), off = _header(raw, images_path, IMAGES_MAGIC, 3)
    need = off + n * rows * cols
    if len(raw) < need:
        raise IdxTruncatedError(images_path, need, len(raw))
    pixels = np.frombuffer(raw, dtype=np.uint8, count=n * rows * cols, offset=off)
    images = pixels.reshape(n, rows, cols) / 255.0

    raw = _read_bytes(labels_path)
    (n_labels,), off = _header(raw, labels_path, LABELS_MAGIC, 1)
    if len(raw) < off + n_labels:
        raise IdxTruncatedError(labels_path, off + n_labels, len(raw))
    labels = np.frombuffer(raw, dtype=np.uint8, count=n_labels, offset=off).astype(np.int64)
    if n_labels != n:
        raise IdxCountMismatchError(n, n_labels)
    class_count = max(10, int(labels.max()) + 1) if n else 10
    return Dataset(images, labels, class_count)


def write_idx(images_path, labels_path, images, labels):
    """Write uint8 images (n, H, W) and labels (n,) as an uncompressed IDX pair."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def take_prefix(ds, k):
    if k < 0 or k > len(ds):
        raise ValueError(f"cannot take {k} records from a dataset of {len(ds)}")
    return ds.subset(slice(0, k))


# Synthetic digits: handwriting-like polylines (arcs, diagonals, loops) drawn
# with per-sample control-point jitter, slant, rotation, scale, offset, stroke
# width and background noise. Glyph box: x in [-1, 1], y in [-2, 2], y down.
def _ellipse(cx, cy, rx, ry, start=0.0, stop=360.0, n=14):
    t = np.radians(np.linspace(start, stop, n))
    return [(cx + rx * np.cos(a), cy + ry * np.sin(a)) for a in t]


_STROKES = [
    [_ellipse(0.0, 0.0, 0.85, 1.9)],
    [[(0.3, -2.0), (-0.3, 2.0)], [(0.3, -2.0), (-0.4, -1.3)]],
    [[(-0.9, -1.3), (-0.5, -1.9), (0.2, -2.0), (0.8, -1.6), (0.8, -0.9), (0.2, -0.2),
      (-0.9, 1.9), (1.0, 1.9)]],
    [[(-0.9, -1.7), (0.0, -2.0), (0.8, -1.6), (0.7, -0.8), (-0.1, -0.2), (0.8, 0.3),
      (0.9, 1.2), (0.3, 1.9), (-0.9, 1.6)]],
    [[(0.4, -2.0), (-1.0, 0.8), (1.0, 0.8)], [(0.5, -0.6), (0.5, 2.0)]],
    [[(0.9, -2.0), (-0.6, -2.0), (-0.8, -0.4), (0.2, -0.5), (0.9, 0.2), (0.9, 1.2),
      (0.2, 1.9), (-0.9, 1.5)]],
    [[(0.6, -2.0), (-0.3, -1.2), (-0.9, 0.3), (-0.8, 1.4), (0.0, 2.0), (0.8, 1.4),
      (0.7, 0.4), (-0.1, 0.0), (-0.9, 0.6)]],
    [[(-0.9, -2.0), (1.0, -2.0), (0.1, 0.0), (-0.3, 2.0)]],
    [_ellipse(0.0, -1.05, 0.75, 0.9, n=12), _ellipse(0.0, 1.0, 0.95, 0.95, n=12)],
    [_ellipse(0.0, -1.0, 0.85, 0.9, n=12), [(0.85, -1.0), (0.6, 0.5), (0.0, 2.0)]],
]


def _glyph_segments(label):
    """(S, 2, 2) array of line segments for one class template."""
    segs = []
    for line in _STROKES[label]:
        pts = np.asarray(line, dtype=np.float64)
        segs.extend(np.stack([pts[:-1], pts[1:]], axis=1))
    return np.stack(segs)


def synthetic_digits(n, seed=0, size=28, class_count=10):
    """Procedurally drawn digit-like glyphs, deterministic under ``seed``."""
    images, labels = _render_glyphs(n, seed, size, class_count)
    return Dataset(images.copy(), labels.copy(), class_count)


@functools.lru_cache(maxsize=4)
def _render_glyphs(n, seed, size, class_count):
    if class_count > len(_STROKES):
        raise ValueError(f"at most {len(_STROKES)} synthetic classes")
    rng = make_rng(seed)
    labels = np.arange(n) % class_count
    rng.shuffle(labels)
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
    centre = (size - 1) / 2
    # per-sample style parameters, drawn in one block so order is fixed
    scale = size * rng.uniform(0.14, 0.17, n)
    aspect = rng.uniform(0.75, 1.15, n)
    slant = rng.normal(0.15, 0.15, n)
    tilt = np.radians(rng.normal(0.0, 6.0, n))
    offset = rng.normal(0.0, 1.0, (n, 2))
    width = rng.uniform(0.8, 1.6, n)
    ink = rng.uniform(0.8, 1.0, n)
    images = np.empty((n, size * size))
    for label in range(class_count):
        idx = np.flatnonzero(labels == label)
        segs = _glyph_segments(label)
        for chunk in np.array_split(idx, max(1, len(idx) // 256)):
            if not len(chunk):
                continue
            s = segs[None] + rng.normal(0.0, 0.1, (len(chunk),) + segs.shape)
            x = s[..., 0] * aspect[chunk, None, None] - slant[chunk, None, None] * s[..., 1]
            y = s[..., 1]
            c, si = np.cos(tilt)[chunk, None, None], np.sin(tilt)[chunk, None, None]
            xr, yr = c * x - si * y, si * x + c * y
            k = scale[chunk, None, None]
            p = np.stack([xr * k, yr * k], axis=-1) + centre + offset[chunk, None, None, :]
            dist = _segment_distance(pts, p[:, :, 0], p[:, :, 1]).min(axis=-1)
            img = np.clip(1.0 - (dist - width[chunk, None]), 0.0, 1.0) * ink[chunk, None]
            img += np.abs(rng.normal(0.0, 0.04, img.shape))
            images[chunk] = np.clip(img, 0.0, 1.0)
    return images.reshape(n, size, size), labels


def _segment_distance(pts, p0, p1):
    """Distances from pixel centres ``pts`` (P, 2) to segments p0 -> p1 (m, S, 2): (m, P, S)."""
    d = p1 - p0
    denom = np.maximum((d * d).sum(-1), 1e-12)
    rel = pts[None, :, None, :] - p0[:, None, :, :]
    t = np.clip((rel * d[:, None]).sum(-1) / denom[:, None], 0.0, 1.0)
    diff = rel - t[..., None] * d[:, None]
    return np.sqrt((diff * diff).sum(-1))


_MNIST_NAMES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}


def _find(data_dir, stem):
    for name in (stem, stem + ".gz", stem.replace("-idx", ".idx")):
        path = Path(data_dir) / name
        if path.exists():
            return path
    return None


def resolve_data_dir(data_dir=None):
    """Explicit directory first, then the AUGFORGET_DATA environment variable."""
    data_dir = data_dir or os.environ.get(DATA_ENV)
    if data_dir and _find(data_dir, _MNIST_NAMES["train"][0]):
        return Path(data_dir)
    return None


@dataclass
class DigitSplits:
    """Training pool, held-out split (never used for updates) and clean test split."""

    pool: Dataset
    heldout: Dataset
    test: Dataset
    source: str


def load_digits(data_dir=None, synthetic=None, pool_size=10_000, heldout_size=2_000,
                test_size=2_000, data_seed=0):
    """Training pool = first ``pool_size`` MNIST train records.

    Held-out and test splits come from the MNIST test file when present,
    otherwise from train records after the pool. ``synthetic=True`` forces the
    glyph generator, ``False`` requires MNIST, ``None`` falls back to glyphs
    when no MNIST directory can be found.
    """
    root = None if synthetic else resolve_data_dir(data_dir)
    if root is None:
        if synthetic is False:
            where = data_dir or f"${DATA_ENV}"
            raise FileNotFoundError(f"no MNIST IDX files found under {where}")
        full = synthetic_digits(pool_size + heldout_size + test_size, seed=data_seed)
        pool = take_prefix(full, pool_size)
        rest = full.subset(slice(pool_size, None))
        return DigitSplits(pool, rest.subset(slice(0, heldout_size)),
                           rest.subset(slice(heldout_size, heldout_size + test_size)), "synthetic")
    train = load_idx(_find(root, _MNIST_NAMES["train"][0]), _find(root, _MNIST_NAMES["train"][1]))
    pool = take_prefix(train, pool_size)
    t_img, t_lab = _find(root, _MNIST_NAMES["test"][0]), _find(root, _MNIST_NAMES["test"][1])
    if t_img is not None and t_lab is not None:
        rest = load_idx(t_img, t_lab)
    else:
        rest = train.subset(slice(pool_size, None))
    return DigitSplits(pool, rest.subset(slice(0, heldout_size)),
                       rest.subset(slice(heldout_size, heldout_size + test_size)), "mnist")
