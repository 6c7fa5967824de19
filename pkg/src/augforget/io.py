"""Checkpoint and CSV persistence.

Checkpoint layout (all little-endian)::

    b"AFCK" | u32 version (=1) | u32 layer count L | L x u32 layer sizes
    | N x f64 parameters in canonical flat order
"""

import csv
import math
import struct
from pathlib import Path

import numpy as np

from .errors import (CheckpointMagicError, CheckpointSizeError, CheckpointTruncatedError,
                     CheckpointVersionError)
from .model import MLP, param_count

MAGIC = b"AFCK"
VERSION = 1


def encode_checkpoint(layer_sizes, params):
    params = np.asarray(params, dtype="<f8")
    if len(params) != param_count(layer_sizes):
        raise CheckpointSizeError(
            f"{len(params)} parameters do not match layer sizes {tuple(layer_sizes)}")
    head = MAGIC + struct.pack(f"<II{len(layer_sizes)}I", VERSION, len(layer_sizes),
                               *layer_sizes)
    return head + params.tobytes()


def save_checkpoint(path, model):
    Path(path).write_bytes(encode_checkpoint(model.layer_sizes, model.params))


def save_snapshot(path, layer_sizes, params):
    """Persist a bare parameter vector (e.g. a merge snapshot) in checkpoint format."""
    Path(path).write_bytes(encode_checkpoint(layer_sizes, params))


def decode_checkpoint(raw, path="<bytes>"):
    """Return (layer_sizes, params). Raises before building any model state."""
    if len(raw) < 12:
        if raw[:4] != MAGIC[:len(raw[:4])]:
            raise CheckpointMagicError(f"{path}: not a checkpoint (bad magic)")
        raise CheckpointTruncatedError(path, 12, len(raw))
    if raw[:4] != MAGIC:
        raise CheckpointMagicError(f"{path}: bad magic {raw[:4]!r}, expected {MAGIC!r}")
    version, n_layers = struct.unpack("<II", raw[4:12])
    if version != VERSION:
        raise CheckpointVersionError(f"{path}: unsupported version {version}")
    if n_layers < 2:
        raise CheckpointSizeError(f"{path}: {n_layers} layer sizes, need at least 2")
    head = 12 + 4 * n_layers
    if len(raw) < head:
        raise CheckpointTruncatedError(path, head, len(raw))
    sizes = struct.unpack(f"<{n_layers}I", raw[12:head])
    if min(sizes) < 1:
        raise CheckpointSizeError(f"{path}: zero-width layer in {sizes}")
    expected = head + 8 * param_count(sizes)
    if len(raw) < expected:
        raise CheckpointTruncatedError(path, expected, len(raw))
    if len(raw) > expected:
        raise CheckpointSizeError(f"{path}: {len(raw) - expected} trailing bytes after payload")
    params = np.frombuffer(raw, dtype="<f8", offset=head).astype(np.float64)
    return sizes, params


def load_checkpoint(path):
    sizes, params = decode_checkpoint(Path(path).read_bytes(), path)
    return MLP(sizes, params)


def format_value(v):
    """Floats with 9 significant digits; everything else via str()."""
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".9g")
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    header = list(header)
    rows = [list(r) for r in rows]
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"row {i} has {len(row)} fields, header has {len(header)}")
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([format_value(v) for v in row] for row in rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
