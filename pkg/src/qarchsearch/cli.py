"""Command-line driver: ``qarch {gen-graphs,search,evaluate,bench,rerun}``.

Randomness comes from ``--seed`` only:

* dataset graph ``i`` is generated with ``derive_seed(seed, i)``;
* search candidate ``j`` optimizes with ``derive_seed(seed, j)``;
* evaluation of graph ``i`` at depth ``p`` uses ``derive_seed(seed, i, p)``.

Every command writes a ``*.manifest.json`` next to its outputs. Running
``qarch rerun MANIFEST`` replays the command from that file.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
import warnings
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .circuits import BASELINE_MIXER, DEFAULT_ALPHABET, combination_names, parse_combination
from .evaluator import compare_mixers, evaluate_mixer
from .exceptions import InvalidArgument, QArchError
from .graphs import erdos_renyi, load_dataset, random_regular, save_dataset
from .optimizer import OptimizerConfig
from .search import CUMULATIVE, FIXED, SearchConfig, derive_seed, search_dataset, search_mixer, worker_pool

log = logging.getLogger("qarchsearch")

EXIT_CODES = {"invalid-argument": 2, "size-limit": 3, "candidate-failure": 4, "io": 5, "error": 1}
BENCH_FIELDS = ("mode", "workers", "p", "graph_id", "rep", "n_candidates", "wall_time_s")


def _int_list(text: str) -> list[int]:
    """``"1,2,3"``, ``"1..4"`` or ``"8..64:8"`` -> list of ints."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            out.extend(range(int(lo), int(hi) + 1, int(step or 1)))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _default_workers() -> int:
    return int(os.environ.get("QARCH_WORKERS", "1"))


def _check_workers(counts) -> None:
    cores = os.cpu_count() or 1
    for w in counts:
        if w < 1:
            raise InvalidArgument(f"worker count must be >= 1, got {w}")
        if w > cores:
            warnings.warn(f"{w} workers on {cores} cores: oversubscribed", stacklevel=2)


def _optimizer_cfg(args) -> OptimizerConfig:
    return OptimizerConfig(max_iters=args.max_iters, restarts=args.restarts)


def _search_cfg(args, workers: int | None = None, p_min: int = 1, p_max: int | None = None) -> SearchConfig:
    return SearchConfig(
        p_max=p_max or args.p_max,
        p_min=p_min,
        k_max=args.k_max,
        alphabet=parse_combination(args.alphabet),
        workers=workers or args.workers,
        optimizer=_optimizer_cfg(args),
        seed=args.seed,
        mode=FIXED if args.fixed_k else CUMULATIVE,
    )


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1) + "\n")


def _manifest_path(out: Path) -> Path:
    return out / "manifest.json" if out.suffix == "" else out.with_name(out.name + ".manifest.json")


def _write_manifest(args, outputs: list[Path], started: float) -> Path:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    doc = {
        "command": args.command,
        "config": config,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "timing": {
            "started": datetime.fromtimestamp(started, timezone.utc).isoformat(),
            "finished": datetime.now(timezone.utc).isoformat(),
        },
    }
    path = _manifest_path(Path(args.out))
    _write_json(path, doc)
    return path


def cmd_gen_graphs(args) -> list[Path]:
    graphs = []
    probs = args.edge_prob
    for i in range(args.n_graphs):
        s = derive_seed(args.seed, i)
        if args.kind == "er":
            graphs.append(erdos_renyi(args.n_nodes, probs[i % len(probs)], s))
        else:
            graphs.append(random_regular(args.n_nodes, args.degree, s))
    meta = {"kind": args.kind, "n_nodes": args.n_nodes}
    meta.update({"edge_prob": probs} if args.kind == "er" else {"degree": args.degree})
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_dataset(out, graphs, args.seed, **meta)
    return [out]


def cmd_search(args) -> list[Path]:
    graphs, _ = load_dataset(args.dataset)
    if args.graphs is not None:
        graphs = [graphs[i] for i in args.graphs]
    cfg = _search_cfg(args)
    _check_workers([cfg.workers])
    out = Path(args.out)
    if args.aggregate:
        result = search_dataset(graphs, cfg)
        path = out / "dataset_result.json"
        _write_json(path, result.to_dict())
        return [path]
    ids = args.graphs if args.graphs is not None else range(len(graphs))
    paths = []
    with worker_pool(cfg.workers) as pool:
        for gid, g in zip(ids, graphs):
            res = search_mixer(g, cfg, pool=pool)
            path = out / f"graph_{gid:03d}.json"
            doc = res.to_dict()
            doc["graph_id"] = gid
            _write_json(path, doc)
            paths.append(path)
            print(f"graph {gid}: best {','.join(combination_names(res.best_mixer))} p={res.best_depth} "
                  f"energy={res.best_energy:.6f} ({len(res.candidates)} candidates, {res.total_time:.2f}s)")
    return paths


def cmd_evaluate(args) -> list[Path]:
    graphs, _ = load_dataset(args.dataset)
    cfg = OptimizerConfig(max_iters=args.max_iters, restarts=args.restarts, rng_seed=args.seed)
    _check_workers([args.workers])
    out = Path(args.out)
    mixer = parse_combination(args.mixer)
    if args.baseline:
        report = compare_mixers(mixer, parse_combination(args.baseline), graphs, args.depths, cfg, args.workers)
        summary = {"searched": report.searched.mean_ratio["searched"], "baseline": report.baseline.mean_ratio["baseline"],
                   "mean_delta": report.mean_delta()}
    else:
        report = evaluate_mixer(mixer, graphs, args.depths, cfg, "searched", args.workers)
        summary = report.mean_ratio["searched"]
    _write_json(out / "report.json", report.to_dict())
    (out / "report.csv").write_text(report.to_csv())
    print(json.dumps(summary))
    return [out / "report.json", out / "report.csv"]


def cmd_bench(args) -> list[Path]:
    graphs, _ = load_dataset(args.dataset)
    ids = args.graphs if args.graphs is not None else list(range(min(len(graphs), args.n_graphs)))
    modes = [m.strip() for m in args.modes.split(",")]
    sweep = args.workers_sweep or [args.workers]
    _check_workers(sweep)
    unknown = set(modes) - {"serial", "parallel"}
    if unknown:
        raise InvalidArgument(f"unknown mode(s) {sorted(unknown)}")
    cells = [("serial", 1)] if "serial" in modes else []
    if "parallel" in modes:
        cells.extend(("parallel", w) for w in sweep if w > 1)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_FIELDS)
        for p in args.p_sweep:
            for mode, workers in cells:
                cfg = _search_cfg(args, workers=workers, p_min=p, p_max=p)
                for gid in ids:
                    for rep in range(args.reps):
                        t0 = time.perf_counter()
                        res = search_mixer(graphs[gid], cfg)
                        dt = time.perf_counter() - t0
                        w.writerow([mode, workers, p, gid, rep, len(res.candidates), f"{dt:.6f}"])
                        fh.flush()
                        print(f"{mode:8s} workers={workers:3d} p={p} graph={gid} rep={rep} {dt:.3f}s")
    return [out]


def cmd_rerun(args) -> list[Path]:
    doc = json.loads(Path(args.manifest).read_text())
    config = dict(doc["config"])
    if args.out:
        config["out"] = args.out
    replay = argparse.Namespace(**config)
    replay.func = COMMANDS[doc["command"]]
    return _execute(replay)


COMMANDS = {
    "gen-graphs": cmd_gen_graphs,
    "search": cmd_search,
    "evaluate": cmd_evaluate,
    "bench": cmd_bench,
}


def _add_search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--k-max", type=int, default=4)
    p.add_argument("--fixed-k", action="store_true", help="only length-k_max combinations per depth")
    p.add_argument("--alphabet", default=",".join(combination_names(DEFAULT_ALPHABET)))


def _add_common(p: argparse.ArgumentParser, workers: bool = True) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    if workers:
        p.add_argument("--workers", type=int, default=_default_workers())
        p.add_argument("--max-iters", type=int, default=200, help="objective evaluations per optimization")
        p.add_argument("--restarts", type=int, default=0, help="seeded random restarts sharing the budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qarch", description="QAOA mixer architecture search")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graphs", help="write a seeded graph dataset")
    _add_common(p, workers=False)
    p.add_argument("--n-graphs", type=int, default=20)
    p.add_argument("--n-nodes", type=int, default=10)
    p.add_argument("--kind", choices=("er", "regular"), default="er")
    p.add_argument("--edge-prob", type=_float_list, default=[0.3, 0.5, 0.7], help="used round-robin")
    p.add_argument("--degree", type=int, default=4)
    p.set_defaults(func=cmd_gen_graphs)

    p = sub.add_parser("search", help="search the best mixer per graph")
    _add_common(p)
    _add_search_flags(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--graphs", type=_int_list, default=None, help="subset of graph ids")
    p.add_argument("--aggregate", action="store_true", help="one mixer for the dataset by mean rank")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", help="approximation ratios for a mixer, optionally against a baseline")
    _add_common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--mixer", required=True)
    p.add_argument("--baseline", default=None, help=f"e.g. {','.join(combination_names(BASELINE_MIXER))}")
    p.add_argument("--depths", type=_int_list, default=[1, 2, 3])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="serial vs parallel search timings")
    _add_common(p)
    _add_search_flags(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--graphs", type=_int_list, default=None)
    p.add_argument("--n-graphs", type=int, default=1, help="first N graphs when --graphs is not given")
    p.add_argument("--p-sweep", "--p", type=_int_list, default=[1, 2, 3, 4])
    p.add_argument("--workers-sweep", type=_int_list, default=None)
    p.add_argument("--modes", default="serial,parallel")
    p.add_argument("--reps", type=int, default=5)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("rerun", help="replay a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write outputs here instead of the recorded location")
    p.set_defaults(func=cmd_rerun)
    return parser


def _execute(args) -> list[Path]:
    if args.command == "rerun":
        return args.func(args)
    started = time.time()
    outputs = args.func(args)
    _write_manifest(args, outputs, started)
    return outputs


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        _execute(args)
    except QArchError as exc:
        print(f"error: {exc.kind}: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.kind, 1)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_CODES["io"]
    return 0


if __name__ == "__main__":
    sys.exit(main())
