"""Command-line entry point: ``shardembed {train,eval-cls,eval-lp,split-lp,info}``."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading
import time
from pathlib import Path

import numpy as np

from .config import RunConfig, parse_text
from .evaluation import (EvaluationError, LinkPredSplit, format_report, link_prediction_auc,
                         load_labels, make_linkpred_split, node_classification, write_report_json)
from .graph import GraphFormatError, GraphValidationError, load_edge_list, write_label_map
from .partition import zigzag_partition
from .pipeline import run, stderr_progress
from .storage import EmbeddingFormatError, read_embeddings, write_embeddings

EXIT_USAGE = 2
EXIT_INTERRUPTED = 130

# flag -> RunConfig field; values left as None by argparse are not overrides
TRAIN_FLAGS = {
    "--input": ("input", str),
    "--output": ("output", str),
    "--dim": ("dim", int),
    "--epochs": ("epochs", int),
    "--walk-length": ("walk_length", int),
    "--aug-distance": ("aug_distance", int),
    "--negatives": ("negatives", int),
    "--neg-scale": ("neg_scale", float),
    "--lr": ("lr", float),
    "--episode-size": ("episode_size", int),
    "--pool-size": ("pool_size", int),
    "--partitions": ("partitions", int),
    "--workers": ("workers", int),
    "--samplers": ("samplers", int),
    "--seed": ("seed", int),
}


class CliError(Exception):
    def __init__(self, message, status=1):
        super().__init__(message)
        self.status = status


def _require_file(path, what="input"):
    if path is None:
        raise CliError(f"missing {what} path", EXIT_USAGE)
    if not Path(path).is_file():
        raise CliError(f"{what} file not found: {path}", EXIT_USAGE)
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shardembed", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="progress and info logging")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="train node embeddings from an edge list")
    train.add_argument("--config", help="flat 'key = value' config file")
    for flag, (dest, kind) in TRAIN_FLAGS.items():
        train.add_argument(flag, dest=dest, type=kind, default=None)
    train.add_argument("--weighted", action="store_true", default=None)
    train.add_argument("--pinned-context", dest="pinned_context", action="store_true", default=None)
    train.add_argument("--normalize-output", dest="normalize_output", action="store_true", default=None)
    train.add_argument("--which", choices=["vertex", "context", "both"], default=None)
    train.add_argument("--no-collaborate", dest="collaborate", action="store_false", default=None,
                       help="fill and train sequentially instead of overlapping them")
    train.add_argument("--save-config", help="write the effective config here")
    train.add_argument("--dump-pool", help="write the first sample pool as int32 pairs")
    train.set_defaults(func=cmd_train)

    cls = sub.add_parser("eval-cls", parents=[common], help="multi-label node classification")
    cls.add_argument("--embeddings", required=True)
    cls.add_argument("--labels", required=True)
    cls.add_argument("--train-fraction", type=float, default=0.1)
    cls.add_argument("--trials", type=int, default=10)
    cls.add_argument("--no-normalize", dest="normalize", action="store_false")
    cls.add_argument("--dim", type=int, help="expected embedding dimension")
    cls.add_argument("--seed", type=int, default=0)
    cls.add_argument("--report-json")
    cls.set_defaults(func=cmd_eval_cls)

    lp = sub.add_parser("eval-lp", parents=[common], help="link-prediction AUC on a held-out split")
    lp.add_argument("--embeddings", required=True)
    lp.add_argument("--split", required=True)
    lp.add_argument("--dim", type=int, help="expected embedding dimension")
    lp.add_argument("--report-json")
    lp.set_defaults(func=cmd_eval_lp)

    split = sub.add_parser("split-lp", parents=[common], help="hold out edges for link prediction")
    split.add_argument("--input", required=True)
    split.add_argument("--weighted", action="store_true")
    split.add_argument("--fraction", type=float, required=True)
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--output-graph", required=True)
    split.add_argument("--output-split", required=True)
    split.set_defaults(func=cmd_split_lp)

    info = sub.add_parser("info", parents=[common], help="print graph statistics")
    info.add_argument("--input", required=True)
    info.add_argument("--weighted", action="store_true")
    info.set_defaults(func=cmd_info)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = cfg.updated(parse_text(Path(_require_file(args.config, "config")).read_text()))
    overrides = {}
    for dest in [d for d, _ in TRAIN_FLAGS.values()] + [
            "weighted", "pinned_context", "normalize_output", "which", "collaborate"]:
        value = getattr(args, dest)
        if value is not None:
            overrides[dest] = value
    return cfg.updated(overrides)


def cmd_train(args) -> int:
    cfg = resolve_config(args)
    _require_file(cfg.input)
    if cfg.output is None:
        raise CliError("missing --output path", EXIT_USAGE)
    if args.save_config:
        Path(args.save_config).write_text(cfg.to_text())

    t0 = time.perf_counter()
    g = load_edge_list(cfg.input, weighted=cfg.weighted)
    g.walk_tables()
    parts = zigzag_partition(g.degree, cfg.partitions)
    preprocessing = time.perf_counter() - t0

    stop = threading.Event()
    previous = None
    if threading.current_thread() is threading.main_thread():
        previous = signal.signal(signal.SIGINT, lambda *_: stop.set())
    dumped = []

    def dump_first(pool):
        if args.dump_pool and not dumped:
            pool.dump(args.dump_pool)
            dumped.append(True)

    try:
        store, report = run(
            g, cfg.sampler_config(g.node_count), cfg.train_config(),
            cfg.partitions, cfg.workers,
            pinned_context=cfg.pinned_context, collaborate=cfg.collaborate,
            partitions=(parts, parts), stop_event=stop,
            progress=stderr_progress if args.verbose else None,
            on_pool=dump_first if args.dump_pool else None,
        )
    finally:
        if previous is not None:
            signal.signal(signal.SIGINT, previous)

    write_embeddings(store, g.labels, cfg.output, which=cfg.which, normalize=cfg.normalize_output)
    write_label_map(g, f"{cfg.output}.labels")
    print(format_report({
        "nodes": g.node_count,
        "edges": g.edge_count,
        "preprocessing_time": preprocessing,
        "training_time": report.wall_time,
        "samples_trained": report.samples_trained,
        "samples_per_sec": report.samples_per_sec,
        "episodes": report.episodes,
        "pools": report.pools,
        "trainer_idle_time": report.trainer_idle,
        "final_loss": report.loss_timeline[-1][1] if report.loss_timeline else float("nan"),
        "interrupted": report.interrupted,
    }))
    return EXIT_INTERRUPTED if report.interrupted else 0


def _load_embeddings(path, dim):
    labels, matrix = read_embeddings(_require_file(path, "embeddings"))
    if dim is not None and matrix.shape[1] != dim:
        raise CliError(f"dimension mismatch: {path} has d={matrix.shape[1]}, expected {dim}")
    return labels, matrix


def _emit(metrics, json_path):
    print(format_report(metrics))
    if json_path:
        write_report_json(metrics, json_path)


def cmd_eval_cls(args) -> int:
    labels, matrix = _load_embeddings(args.embeddings, args.dim)
    index = {label: i for i, label in enumerate(labels)}
    node_labels = load_labels(_require_file(args.labels, "labels"), index)
    micro, macro = node_classification(matrix, node_labels, args.train_fraction, args.trials,
                                       normalize=args.normalize, seed=args.seed)
    _emit({"micro_f1": micro, "macro_f1": macro}, args.report_json)
    return 0


def cmd_eval_lp(args) -> int:
    labels, matrix = _load_embeddings(args.embeddings, args.dim)
    index = {label: i for i, label in enumerate(labels)}
    split = LinkPredSplit.load(_require_file(args.split, "split"), index)
    _emit({"auc": link_prediction_auc(matrix, split)}, args.report_json)
    return 0


def cmd_split_lp(args) -> int:
    g = load_edge_list(_require_file(args.input), weighted=args.weighted)
    split, reduced = make_linkpred_split(g, args.fraction, args.seed)
    src, dst, w = reduced.edges()
    with open(args.output_graph, "w", encoding="utf-8") as fh:
        for u, v, x in zip(src, dst, w):
            fh.write(f"{g.labels[u]}\t{g.labels[v]}\t{x:g}\n")
    split.save(args.output_split, g.labels)
    print(format_report({"held_out": len(split.positives), "negatives": len(split.negatives),
                         "remaining_edges": reduced.edge_count}))
    return 0


def cmd_info(args) -> int:
    g = load_edge_list(_require_file(args.input), weighted=args.weighted)
    deg = g.degree
    print(format_report({
        "nodes": g.node_count,
        "edges": g.edge_count,
        "self_loops_dropped": g.self_loops_dropped,
        "isolated_nodes": int(np.sum(deg == 0)),
        "min_degree": float(deg.min()),
        "max_degree": float(deg.max()),
        "mean_degree": float(deg.mean()),
    }))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"shardembed: error: {exc}", file=sys.stderr)
        return exc.status
    except (GraphFormatError, GraphValidationError, EvaluationError,
            EmbeddingFormatError, ValueError, OSError) as exc:
        print(f"shardembed: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
