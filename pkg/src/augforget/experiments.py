"""End-to-end drivers for the forgetting studies.

Every driver takes a :class:`RunConfig` and is bit-reproducible for a fixed
seed. Random streams are derived from ``cfg.seed`` with numpy's SeedSequence,
one child per purpose, so that methods compared within a driver share model
initialisation, data order and augmentation draws.
"""

import copy
from dataclasses import dataclass, field

import numpy as np

from . import augment as aug
from .data import Dataset, load_digits
from .diagnostics import aggregated_sign_discrepancy, cka_matrix, spearman_rho
from .model import MLP, accuracy
from .numerics import make_rng
from .training import PolicyAugmenter, Streams, fit, make_buffer

# SeedSequence children, by purpose
_INIT, _ORDER, _AUG, _REPLAY, _SD, _PHASE2 = range(6)


def _children(seed):
    return np.random.SeedSequence(int(seed)).spawn(8)


def _streams(children, offset=0):
    """Fresh order/augment/replay generators; equal offsets give equal streams."""
    if offset == 0:
        picks = (children[_ORDER], children[_AUG], children[_REPLAY])
    else:
        base = np.random.SeedSequence(children[_PHASE2].entropy,
                                      spawn_key=children[_PHASE2].spawn_key + (offset,))
        picks = base.spawn(3)
    return Streams(*(make_rng(s) for s in picks))


def load_splits(cfg):
    return load_digits(cfg.data_dir, cfg.synthetic, cfg.pool_size, cfg.heldout_size,
                       cfg.test_size, cfg.data_seed)


def _init_model(cfg, children, splits):
    sizes = tuple(cfg.layer_sizes)
    width = int(np.prod(splits.pool.shape))
    if sizes[0] != width or sizes[-1] < splits.pool.class_count:
        raise ValueError(f"layer_sizes {sizes} do not fit {splits.pool.shape} images "
                         f"with {splits.pool.class_count} classes")
    return MLP.init(sizes, make_rng(children[_INIT]))


def _view(t, ds, rng=None):
    return Dataset(aug.apply(t, ds.images, rng), ds.labels, ds.class_count)


# ---------------------------------------------------------------- evil twin

@dataclass
class EvilTwinRow:
    angle: float
    acc_before: float
    acc_after: float
    forgetting: float
    aggregated_sd: float
    sd_per_batch: np.ndarray = field(repr=False, default=None)


@dataclass
class EvilTwinReport:
    rows: list
    spearman_rho: float
    method: str
    source: str

    HEADER = ("angle", "acc_before", "acc_after", "forgetting", "aggregated_sd")

    def table(self):
        return [[r.angle, r.acc_before, r.acc_after, r.forgetting, r.aggregated_sd]
                for r in self.rows]

    def mean_forgetting(self):
        return float(np.mean([r.forgetting for r in self.rows]))


def run_evil_twin(cfg, splits=None):
    """Train on the ``base_angle`` rotation, then retrain on each second angle.

    Phase one runs ``cfg.epochs`` epochs on the rotated pool. Its accuracy on
    the rotated held-out split is ``acc_before``. The reference gradient g1 is
    taken on the first ``sd_reference_size`` pool records in the base view; the
    k second-view gradients use ``sd_batches`` minibatches (same records for
    every angle) at the phase-one weights. Phase two runs ``cfg.epochs_second``
    epochs on the second view with ``cfg.method``; ``acc_after`` is measured on
    the same held-out split.
    """
    splits = splits or load_splits(cfg)
    children = _children(cfg.seed)
    method = cfg.method_spec()
    pool, heldout = splits.pool, splits.heldout
    base = aug.Transform("rotate", cfg.base_angle)
    noise_rng = make_rng(children[_AUG])

    model = _init_model(cfg, children, splits)
    base_pool = aug.apply(base, pool.images, noise_rng)
    buffer = make_buffer(method, len(pool), pool.shape) if method.name == "replay" else None
    fit(model, base_pool, pool.labels, _streams(children), epochs=cfg.epochs, lr=cfg.lr,
        batch_size=cfg.batch_size, buffer=buffer)
    base_heldout = _view(base, heldout, noise_rng)
    acc_before = accuracy(model, base_heldout)

    ref = min(cfg.sd_reference_size, len(pool))
    _, g1 = model.loss_and_grad(base_pool[:ref], pool.labels[:ref])
    sd_rng = make_rng(children[_SD])
    need = cfg.sd_batches * cfg.batch_size
    sd_index = sd_rng.permutation(len(pool))[:need]
    sd_batches = np.array_split(sd_index, cfg.sd_batches)

    rows = []
    for angle in cfg.angles:
        second = aug.apply(aug.Transform("rotate", angle), pool.images)
        grads = [model.loss_and_grad(second[b], pool.labels[b])[1] for b in sd_batches]
        sd = aggregated_sign_discrepancy(g1, grads)
        retrained = model.copy()
        fit(retrained, second, pool.labels, _streams(children, 1), epochs=cfg.epochs_second,
            lr=cfg.lr, batch_size=cfg.batch_size, method=method,
            buffer=copy.deepcopy(buffer))
        acc_after = accuracy(retrained, base_heldout)
        rows.append(EvilTwinRow(float(angle), acc_before, acc_after,
                                acc_before - acc_after, sd.aggregated, sd.per_batch))
    rho = spearman_rho([r.aggregated_sd for r in rows], [r.forgetting for r in rows]) \
        if len(rows) >= 2 else float("nan")
    return EvilTwinReport(rows, rho, method.name, splits.source)


# ---------------------------------------------------------------- Taylor oracle

@dataclass
class TaylorPoint:
    sigma: float
    mean_cos: float
    stderr: float


def run_taylor_oracle(cfg, a=None):
    """Monte-Carlo E[cos(g_x, g_{x+delta})] for L(theta; x) = 0.5 ||A theta - x||^2.

    The gradient is A^T (A theta - x), so g_{x+delta} = g_x - A^T delta; the
    first-order form is exact here with M = -A^T. ``a`` defaults to
    ``cfg.taylor_scale`` times the identity.
    """
    if not cfg.sigmas:
        raise ValueError("empty sigma grid")
    rng = make_rng(_children(cfg.seed)[_SD])
    d = cfg.taylor_dim
    a = cfg.taylor_scale * np.eye(d) if a is None else np.asarray(a, dtype=np.float64)
    theta = rng.standard_normal(a.shape[1])
    x = rng.standard_normal(a.shape[0])
    g = a.T @ (a @ theta - x)
    m = -a.T
    gg = g @ g
    if gg == 0:
        raise ValueError("degenerate toy problem: zero gradient at x")
    points = []
    for sigma in cfg.sigmas:
        delta = sigma * rng.standard_normal((cfg.taylor_samples, a.shape[0]))
        g2 = g + delta @ m.T
        cos = np.clip((g2 @ g) / np.sqrt(gg * np.einsum("ij,ij->i", g2, g2)), -1.0, 1.0)
        stderr = cos.std(ddof=1) / np.sqrt(len(cos)) if len(cos) > 1 else 0.0
        points.append(TaylorPoint(float(sigma), float(cos.mean()), float(stderr)))
    return points


# ---------------------------------------------------------------- CKA compare

def _policy_fit(cfg, model, transforms, pool, streams, epochs, method, buffer=None):
    augmenter = PolicyAugmenter(tuple(transforms), cfg.policy, cfg.beta, cfg.policy_refresh)
    return fit(model, pool.images, pool.labels, streams, epochs=epochs, lr=cfg.lr,
               batch_size=cfg.batch_size, augmenter=augmenter, method=method, buffer=buffer)


def run_cka_compare(cfg, splits=None):
    """Train on T1, then continue a copy on T2 under each method (and on T1 as control).

    Returns {"control": CkaMatrix, method: CkaMatrix, ...}, each comparing the
    T1 model with the retrained copy on the first ``probe_size`` clean
    held-out images.
    """
    t1 = aug.parse_transform_set(cfg.cka_t1)
    t2 = aug.parse_transform_set(cfg.cka_t2)
    if set(t1) & set(t2):
        raise ValueError("T1 and T2 must not share transforms")
    splits = splits or load_splits(cfg)
    if min(cfg.probe_size, len(splits.heldout)) < 2:
        raise ValueError("probe needs at least two held-out images")
    children = _children(cfg.seed)
    pool = splits.pool
    probe = splits.heldout.images[:cfg.probe_size]

    first = _init_model(cfg, children, splits)
    buffer = make_buffer(cfg.method_spec("replay"), len(pool), pool.shape)
    _policy_fit(cfg, first, t1, pool, _streams(children), cfg.epochs, cfg.method_spec("vanilla"),
                buffer)
    out = {}
    for name, transforms, method in [("control", t1, cfg.method_spec("vanilla"))] + [
            (m, t2, cfg.method_spec(m)) for m in cfg.cka_methods]:
        second = first.copy()
        _policy_fit(cfg, second, transforms, pool, _streams(children, 1), cfg.epochs_second,
                    method, copy.deepcopy(buffer) if method.name == "replay" else None)
        out[name] = cka_matrix(first, second, probe)
    return out


# ---------------------------------------------------------------- method comparison

@dataclass
class MethodResult:
    method: str
    merge_p: float
    view_accuracy: dict
    clean_accuracy: float
    cka_diagonal_mean: float
    initial_params: np.ndarray = field(repr=False, default=None)
    final_params: np.ndarray = field(repr=False, default=None)

    @property
    def mean_view_accuracy(self):
        return float(np.mean(list(self.view_accuracy.values())))


@dataclass
class MethodComparison:
    results: list
    views: list
    source: str

    HEADER = ("method", "merge_p", "view", "accuracy")

    def table(self):
        rows = []
        for r in self.results:
            for view in self.views:
                rows.append([r.method, r.merge_p, view, r.view_accuracy[view]])
            rows.append([r.method, r.merge_p, "mean_views", r.mean_view_accuracy])
            rows.append([r.method, r.merge_p, "clean_test", r.clean_accuracy])
            rows.append([r.method, r.merge_p, "cka_diagonal_mean", r.cka_diagonal_mean])
        return rows

    def by_method(self, name):
        return next(r for r in self.results if r.method == name)


def _train_method(cfg, splits, children, transforms, method, views):
    model = _init_model(cfg, children, splits)
    initial = model.flat_params()
    pool = splits.pool
    buffer = make_buffer(method, len(pool), pool.shape) if method.name == "replay" else None
    steps_per_epoch = -(-len(pool) // cfg.batch_size)
    halfway = (cfg.epochs * steps_per_epoch) // 2
    mid = {}

    def keep_midpoint(m, step):
        if step == halfway:
            mid["model"] = m.copy()

    augmenter = PolicyAugmenter(tuple(transforms), cfg.policy, cfg.beta, cfg.policy_refresh)
    fit(model, pool.images, pool.labels, _streams(children), epochs=cfg.epochs, lr=cfg.lr,
        batch_size=cfg.batch_size, augmenter=augmenter, method=method, buffer=buffer,
        on_step=keep_midpoint)
    probe = splits.heldout.images[:cfg.probe_size]
    cka = cka_matrix(mid.get("model", MLP(model.layer_sizes, initial)), model, probe)
    view_acc = {label: accuracy(model, ds) for label, ds in views.items()}
    return MethodResult(method.name, method.merge_p if method.name == "merge" else float("nan"),
                        view_acc, accuracy(model, splits.test), cka.diagonal_mean(),
                        initial, model.flat_params())


def _heldout_views(splits, transforms, children):
    rng = make_rng(children[_SD])
    return {t.label: _view(t, splits.heldout, rng) for t in transforms}


def run_method_comparison(cfg, splits=None, methods=None):
    """Train every method with the random policy over ``cfg.transforms``.

    Accuracy is reported on each transformed held-out view and on the clean
    test split. ``cka_diagonal_mean`` compares the model halfway through
    training with the final model (how much the features moved in the
    second half).
    """
    splits = splits or load_splits(cfg)
    children = _children(cfg.seed)
    transforms = cfg.transform_set()
    views = _heldout_views(splits, transforms, children)
    specs = methods if methods is not None else [cfg.method_spec(m) for m in cfg.methods]
    results = [_train_method(cfg, splits, children, transforms, m, views) for m in specs]
    return MethodComparison(results, list(views), splits.source)


def run_merge_ablation(cfg, splits=None):
    """Selective merging at each ``cfg.merge_grid`` percentage; returns (p, mean accuracy) rows
    plus the underlying comparison."""
    splits = splits or load_splits(cfg)
    specs = [cfg.method_spec("merge", merge_p=float(p)) for p in cfg.merge_grid]
    comparison = run_method_comparison(cfg, splits, specs)
    table = [[r.merge_p, r.mean_view_accuracy] for r in comparison.results]
    return table, comparison
