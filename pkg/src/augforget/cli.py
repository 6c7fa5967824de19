"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig
from .data import resolve_data_dir
from .errors import AugForgetError, ConfigError
from .experiments import (EvilTwinReport, MethodComparison, load_splits, run_cka_compare,
                          run_evil_twin, run_merge_ablation, run_method_comparison,
                          run_taylor_oracle)
from .io import load_checkpoint, save_checkpoint, write_csv
from .model import MLP

CONFIG_ECHO = "config.txt"

# flag -> config key
_FLAGS = {
    "seed": int, "data_dir": str, "data_seed": int, "pool_size": int, "heldout_size": int,
    "test_size": int, "layer_sizes": str, "lr": float, "batch_size": int, "epochs": int,
    "epochs_second": int, "transforms": str, "policy": str, "beta": float,
    "policy_refresh": int, "method": str, "methods": str, "replay_fraction": float,
    "replay_mix": float, "merge_p": float, "merge_k": int, "base_angle": float,
    "angles": str, "sd_batches": int, "sd_reference_size": int, "sigmas": str,
    "taylor_samples": int, "taylor_dim": int, "taylor_scale": float, "cka_t1": str,
    "cka_t2": str, "cka_methods": str, "probe_size": int, "merge_grid": str,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="augforget", description="Augmentation forgetting studies; every "
                     "subcommand writes its outputs and a config echo under --out.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    helps = {
        "train": "train one model under a policy and method; writes model.afck, metrics.csv",
        "evil-twin": "rotation evil-twin forgetting study; writes evil_twin.csv",
        "taylor": "Monte-Carlo gradient-alignment decay; writes taylor.csv",
        "cka": "layer CKA after retraining on disjoint augmentations; writes cka_<method>.csv",
        "ablate": "selective-merge percentage grid; writes ablation.csv",
        "info": "show defaults, dataset resolution, and optionally a checkpoint summary",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        if name == "info":
            p.add_argument("--checkpoint", help="checkpoint file to summarise")
            p.add_argument("--data-dir", dest="data_dir")
            continue
        p.add_argument("--out", help="output directory (required)")
        p.add_argument("--config", help="key = value config file; flags override it")
        p.add_argument("--synthetic", action="store_const", const="true", default=None,
                       help="use the seeded synthetic digit set instead of MNIST")
        for key, typ in _FLAGS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=None)
    return parser


def _config(args, parser):
    overrides = {k: getattr(args, k) for k in list(_FLAGS) + ["synthetic", "out"]}
    text = Path(args.config).read_text() if args.config else ""
    cfg = RunConfig.from_text(text, **{k: (str(v) if not isinstance(v, str) else v)
                                       for k, v in overrides.items() if v is not None})
    if not cfg.out:
        parser.error(f"{args.command}: --out is required")
    return cfg


def _run(cfg, command):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / CONFIG_ECHO).write_text(cfg.to_text())
    if command == "train":
        result = run_method_comparison(cfg, methods=[cfg.method_spec()])
        comparison = MethodComparison(result.results, result.views, result.source)
        model = MLP(cfg.layer_sizes, result.results[0].final_params)
        save_checkpoint(out / "model.afck", model)
        write_csv(out / "metrics.csv", comparison.HEADER, comparison.table())
    elif command == "evil-twin":
        report = run_evil_twin(cfg)
        write_csv(out / "evil_twin.csv", EvilTwinReport.HEADER, report.table())
        print(f"spearman_rho={report.spearman_rho:.6f} mean_forgetting="
              f"{report.mean_forgetting():.6f} data={report.source}")
    elif command == "taylor":
        points = run_taylor_oracle(cfg)
        write_csv(out / "taylor.csv", ["sigma", "mean_cos", "stderr"],
                  [[p.sigma, p.mean_cos, p.stderr] for p in points])
    elif command == "cka":
        for name, matrix in run_cka_compare(cfg).items():
            write_csv(out / f"cka_{name}.csv", matrix.header(), matrix.rows())
    elif command == "ablate":
        table, _ = run_merge_ablation(cfg)
        write_csv(out / "ablation.csv", ["p", "accuracy"], table)


def _info(args):
    print(f"augforget {__version__}")
    root = resolve_data_dir(args.data_dir)
    print(f"dataset: {root if root else 'no MNIST directory found; synthetic fallback'}")
    if args.checkpoint:
        model = load_checkpoint(args.checkpoint)
        print(f"checkpoint: layers={list(model.layer_sizes)} params={model.n_params}")
    print("default config:")
    print(RunConfig().to_text(), end="")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "info":
            _info(args)
            return 0
        try:
            cfg = _config(args, parser)
        except ConfigError as exc:
            parser.print_usage(sys.stderr)
            print(f"augforget: error: {exc}", file=sys.stderr)
            return 2
        _run(cfg, args.command)
    except (AugForgetError, OSError, ValueError) as exc:
        print(f"augforget: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
