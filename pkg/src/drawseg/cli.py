"""Command-line entry point: synth | vectorize | train | predict | eval | render.

Exit codes: 0 ok, 1 usage, 2 I/O, 3 data or schema.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, PipelineConfig, describe_defaults, load_config
from .graphbuild import (SCHEMES, THREE_CLASS, GraphFormatError, LabelingError, get_scheme, load_graph,
                         save_graph)
from .raster import RasterError, load_color, load_gray

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3
TASKS = {"3class": THREE_CLASS.name, "text": "text-nontext", "contour": "contour-noncontour"}

log = logging.getLogger("drawseg")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_json(path, obj) -> None:
    _write_text(path, json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _config(args) -> PipelineConfig:
    overrides = {k: getattr(args, k, None) for k in PipelineConfig.__dataclass_fields__}
    return load_config(args.config, overrides)


def _graph_files(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(q for q in p.glob("*.json") if not q.name.endswith(".pred.json")
                              and q.name != "index.json"))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not out:
        raise DataError("no graph files found")
    return out


# ---------------------------------------------------------------- commands

def cmd_synth(args) -> int:
    from .synthgen import generate_corpus
    cfg = _config(args)
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    index = generate_corpus(args.count, cfg.seed, args.out, canvas=args.canvas)
    print(f"wrote {index['count']} drawings to {args.out}")
    return EXIT_OK


def _vectorize_one(drawing, gt, cfg, out, provenance) -> int:
    from .pipeline import vectorize
    img = load_gray(drawing)
    gt_img = load_color(gt) if gt else None
    v = vectorize(img, cfg, gt_img, provenance)
    if v.graph is None:
        raise DataError(f"{drawing}: no components found")
    save_graph(v.graph, out)
    return v.graph.num_nodes


def cmd_vectorize(args) -> int:
    cfg = _config(args)
    params = cfg.to_dict()
    if args.corpus:
        corpus = Path(args.corpus)
        index = _read_json(corpus / "index.json")
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        total = 0
        for row in index.get("rows", []):
            stem = Path(row["drawing"]).name.replace("_draw.png", "")
            prov = {"source": row["drawing"], "seed": row.get("seed"), "config": params}
            gt = None if args.no_labels else corpus / row["ground_truth"]
            total += _vectorize_one(corpus / row["drawing"], gt, cfg, out_dir / f"{stem}.json", prov)
        print(f"vectorized {len(index.get('rows', []))} drawings, {total} components")
        return EXIT_OK
    if not args.drawing:
        raise UsageError("give a drawing or --corpus")
    prov = {"source": Path(args.drawing).name, "config": params}
    n = _vectorize_one(args.drawing, args.gt, cfg, args.out, prov)
    print(f"{n} components -> {args.out}")
    return EXIT_OK


def _history_csv(h) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "train_loss", "val_accuracy"])
    for i, (loss, acc) in enumerate(zip(h.train_loss, h.val_accuracy), 1):
        w.writerow([i, repr(loss), repr(acc)])
    return buf.getvalue()


def cmd_train(args) -> int:
    from .nn import TrainConfig, preset, save_model, train
    cfg = _config(args)
    files = _graph_files(args.graphs)
    graphs = [load_graph(p) for p in files]
    scheme = get_scheme(cfg.scheme)
    for p, g in zip(files, graphs):
        if g.labels is None:
            raise DataError(f"{p}: graph has no labels")
        if g.n != cfg.n:
            raise DataError(f"{p}: graph has n={g.n}, config n={cfg.n}")
    if scheme.name != graphs[0].scheme:
        graphs = [g.with_scheme(scheme) for g in graphs]
    mc = preset(cfg.preset, graphs[0].features.shape[1], scheme.num_classes)
    tc = TrainConfig(cfg.learning_rate, cfg.weight_decay, cfg.max_epochs, cfg.batch_size, cfg.split, cfg.seed)
    res = train(graphs, mc, tc)
    h = res.history
    meta = {"preset": cfg.preset, "scheme": scheme.name, "train_files": [files[i].name for i in h.train_ids],
            "val_files": [files[i].name for i in h.val_ids]}
    save_model(args.out, res.model, res.optimizer, h, meta)
    stem = Path(args.out)
    _write_json(stem.with_suffix(".history.json"), h.to_dict())
    _write_text(stem.with_suffix(".history.csv"), _history_csv(h))
    if args.figures:
        from .plotting import plot_history
        plot_history(h, stem.with_suffix(".history.png"))
    print(f"best epoch {h.best_epoch}: validation accuracy {100 * h.best_val_accuracy:.2f}%")
    return EXIT_OK


def cmd_predict(args) -> int:
    from .nn import load_model, predict
    model, _, meta = load_model(args.model)
    files = _graph_files([args.graph])
    single = not Path(args.graph).is_dir()
    out = Path(args.out)
    if not single:
        out.mkdir(parents=True, exist_ok=True)
    for p in files:
        g = load_graph(p)
        scheme_name = meta.get("scheme", g.scheme)
        scheme = get_scheme(scheme_name)
        if model.config.num_classes != scheme.num_classes:
            raise DataError("class count mismatch")
        if g.features.shape[1] != model.config.in_dim:
            raise DataError(f"{p}: feature dimension {g.features.shape[1]} does not match model {model.config.in_dim}")
        labels = predict(g, model)
        dest = out if single else out / f"{p.stem}.pred.json"
        _write_json(dest, {"version": 1, "graph": p.name, "scheme": scheme.name,
                           "labels": [int(v) for v in labels]})
        if args.svg:
            from .svg import graph_to_svg
            svg_path = Path(args.svg) if single else out / f"{p.stem}.svg"
            _write_text(svg_path, graph_to_svg(g.with_scheme(scheme) if g.scheme != scheme.name else g, labels))
    print(f"predicted {len(files)} graph(s)")
    return EXIT_OK


def _confusion_from_args(args):
    """(confusion matrix, class names) from a fixture or prediction files."""
    from .nn import confusion
    if args.confusion:
        d = _read_json(args.confusion)
        m = np.asarray(d["confusion"] if isinstance(d, dict) else d, dtype=np.int64)
        classes = d.get("classes") if isinstance(d, dict) else None
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DataError("confusion fixture must be a square matrix")
        if args.task != "3class":
            if m.shape[0] != 3:
                raise DataError("task remaps need a 3-class confusion matrix")
            target = get_scheme(TASKS[args.task])
            mapping = _task_map(target)
            k = target.num_classes
            r = np.zeros((k, k), dtype=np.int64)
            for i in range(3):
                for j in range(3):
                    r[mapping[i], mapping[j]] += m[i, j]
            return r, list(target.classes)
        return m, classes or [f"class{i}" for i in range(len(m))]
    if not args.predictions:
        raise UsageError("give --confusion or --predictions")
    truth_all, pred_all = [], []
    scheme = None
    for p in _pred_files(args.predictions):
        d = _read_json(p)
        graph_path = Path(args.truth) / d["graph"] if args.truth else p.parent / d["graph"]
        g = load_graph(graph_path)
        if g.labels is None:
            raise DataError(f"{graph_path}: graph has no labels")
        pred_scheme = get_scheme(d["scheme"])
        truth = g.with_scheme(pred_scheme).labels if g.scheme != pred_scheme.name else g.labels
        pred = np.asarray(d["labels"], dtype=np.int64)
        if len(pred) != len(truth):
            raise DataError(f"{p}: {len(pred)} predictions for {len(truth)} nodes")
        if scheme is None:
            scheme = pred_scheme
        elif scheme.name != pred_scheme.name:
            raise DataError("predictions use different label schemes")
        truth_all.append(truth)
        pred_all.append(pred)
    truth, pred = np.concatenate(truth_all), np.concatenate(pred_all)
    if args.task != "3class" and scheme.name != TASKS[args.task]:
        if scheme.name != THREE_CLASS.name:
            raise DataError("task remaps need 3-class predictions")
        target = get_scheme(TASKS[args.task])
        mapping = _task_map(target)
        truth, pred, scheme = mapping[truth], mapping[pred], target
    return confusion(truth, pred, scheme.num_classes), list(scheme.classes)


def _task_map(target) -> np.ndarray:
    from .graphbuild import remap_labels
    return remap_labels(np.arange(3), THREE_CLASS, target)


def _pred_files(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            out.extend(sorted(p.glob("*.pred.json")))
        elif p.exists():
            out.append(p)
        else:
            raise FileNotFoundError(f"no such file or directory: {p}")
    if not out:
        raise DataError("no prediction files found")
    return out


def cmd_eval(args) -> int:
    from .nn import compute_metrics, format_table
    m, classes = _confusion_from_args(args)
    try:
        mt = compute_metrics(m)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    table = format_table(mt, classes)
    print(table)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "metrics.json", {"task": args.task, **mt.to_dict(classes)})
        _write_text(out / "confusion.txt", table + "\n")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ground_truth"] + classes + ["recall"])
        for i, c in enumerate(classes):
            rec = mt.recall[i]
            w.writerow([c] + [int(v) for v in m[i]] + ["" if rec is None else f"{rec:.4f}"])
        w.writerow(["precision"] + ["" if p is None else f"{p:.4f}" for p in mt.precision] + [f"{mt.accuracy:.4f}"])
        _write_text(out / "confusion.csv", buf.getvalue())
        if args.figures:
            from .plotting import plot_confusion
            plot_confusion(m, classes, out / "confusion.png", title=f"accuracy {mt.accuracy:.2f}%")
    return EXIT_OK


def cmd_render(args) -> int:
    from .svg import graph_to_svg
    g = load_graph(args.graph)
    labels = None
    if args.labels:
        d = _read_json(args.labels)
        labels = np.asarray(d["labels"], dtype=np.int64)
        if d.get("scheme") and d["scheme"] != g.scheme:
            if g.labels is None:
                g.scheme = d["scheme"]
            else:
                g = g.with_scheme(get_scheme(d["scheme"]))
    _write_text(args.out, graph_to_svg(g, labels))
    if args.png:
        from .plotting import plot_overlay
        plot_overlay(g, args.png, labels)
    print(f"rendered {g.num_nodes} components -> {args.out}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    grp = p.add_argument_group("config keys (flags override --config)")
    grp.add_argument("--config", metavar="FILE", help="key=value or JSON config file")
    d = PipelineConfig()
    for name, f in PipelineConfig.__dataclass_fields__.items():
        kind = {"int": int, "float": float}.get(f.type, str)
        extra = {}
        if name == "scheme":
            extra["choices"] = sorted(SCHEMES)
        grp.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None,
                         help=f"(default: {getattr(d, name)})", **extra)
    return p


def build_parser() -> argparse.ArgumentParser:
    cfg = _config_parent()
    p = _Parser(prog="drawseg", description="Vectorize engineering drawings and classify their components.",
                epilog="Config keys and defaults:\n" + describe_defaults(),
                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="generate a synthetic drawing corpus", parents=[cfg])
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--canvas", type=int, default=1024)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("vectorize", help="drawing -> component graph", parents=[cfg])
    s.add_argument("drawing", nargs="?")
    s.add_argument("--gt", help="ground-truth colour image for labels")
    s.add_argument("--corpus", help="synthetic corpus directory (uses its index.json)")
    s.add_argument("--no-labels", action="store_true", help="ignore corpus ground truth")
    s.add_argument("--out", required=True, help="graph file, or directory with --corpus")
    s.set_defaults(func=cmd_vectorize)

    s = sub.add_parser("train", help="train a node classifier on labelled graphs", parents=[cfg])
    s.add_argument("graphs", nargs="+", help="graph files or directories")
    s.add_argument("--out", required=True, help="model file (history files are written next to it)")
    s.add_argument("--figures", action="store_true", help="also render the training curves")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", help="label a graph with a trained model", parents=[cfg])
    s.add_argument("graph", help="graph file or directory")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True, help="labels file, or directory for a graph directory")
    s.add_argument("--svg", help="SVG overlay path (single graph)")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="metrics from predictions or a confusion fixture", parents=[cfg])
    s.add_argument("--predictions", nargs="+", help="prediction files or directories")
    s.add_argument("--truth", help="directory holding the ground-truth graphs")
    s.add_argument("--confusion", help="JSON confusion matrix (rows are ground truth)")
    s.add_argument("--task", choices=sorted(TASKS), default="3class")
    s.add_argument("--out", help="report directory (metrics.json, confusion.csv, confusion.txt)")
    s.add_argument("--figures", action="store_true", help="also render the confusion heatmap")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("render", help="graph -> SVG (and optional PNG overlay)", parents=[cfg])
    s.add_argument("graph")
    s.add_argument("--labels", help="prediction file to colour by")
    s.add_argument("--out", required=True)
    s.add_argument("--png")
    s.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"drawseg: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"drawseg: config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"drawseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except RasterError as exc:
        print(f"drawseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"drawseg: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DataError, GraphFormatError, LabelingError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"drawseg: {msg}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
