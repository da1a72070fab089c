"""Approximation ratios and baseline-vs-searched mixer comparisons."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Sequence

import numpy as np

from .circuits import GateCombination, build_mixer, build_qaoa, combination_names
from .exceptions import InvalidArgument
from .graphs import Graph, maxcut_bruteforce
from .optimizer import OptimizerConfig, optimize_ansatz
from .search import derive_seed, parallel_map_candidates

CSV_FIELDS = ("graph_id", "p", "mixer", "energy", "classical", "ratio")


def approximation_ratio(energy: float, classical: float) -> float:
    if not classical > 0:
        raise InvalidArgument(f"classical optimum must be positive, got {classical}")
    return energy / classical


@dataclass(frozen=True)
class EvalRecord:
    graph_id: int
    p: int
    mixer: str
    combination: GateCombination
    energy: float
    classical: float
    ratio: float
    best_params: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "graph_id": self.graph_id,
            "p": self.p,
            "mixer": self.mixer,
            "combination": combination_names(self.combination),
            "energy": self.energy,
            "classical": self.classical,
            "ratio": self.ratio,
            "best_params": list(self.best_params),
        }


@dataclass
class EvaluationReport:
    records: list[EvalRecord]
    mean_ratio_per_p: dict[tuple[str, int], float] = field(default_factory=dict)
    mean_ratio: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.mean_ratio_per_p:
            self._aggregate()

    def _aggregate(self):
        groups: dict[tuple[str, int], list[float]] = {}
        for r in self.records:
            groups.setdefault((r.mixer, r.p), []).append(r.ratio)
        self.mean_ratio_per_p = {k: float(np.mean(v)) for k, v in sorted(groups.items())}
        # mean over depths of the per-depth means
        per_mixer: dict[str, list[float]] = {}
        for (mixer, _), m in self.mean_ratio_per_p.items():
            per_mixer.setdefault(mixer, []).append(m)
        self.mean_ratio = {k: float(np.mean(v)) for k, v in per_mixer.items()}

    def ratios(self, mixer: str, p: int | None = None) -> list[float]:
        return [r.ratio for r in self.records if r.mixer == mixer and (p is None or r.p == p)]

    def to_dict(self) -> dict:
        return {
            "records": [r.to_dict() for r in self.records],
            "aggregates": {
                "mean_ratio_per_p": [
                    {"mixer": m, "p": p, "mean_ratio": v} for (m, p), v in self.mean_ratio_per_p.items()
                ],
                "mean_ratio": self.mean_ratio,
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.records:
            w.writerow([r.graph_id, r.p, r.mixer, repr(r.energy), repr(r.classical), repr(r.ratio)])
        return buf.getvalue()


def _evaluate_task(graphs, mixer, cfg, classical, task):
    _, (gi, p) = task
    g = graphs[gi]
    # seeded by (graph, depth) only, so two mixers see the same optimizer randomness
    run_cfg = replace(cfg, rng_seed=derive_seed(cfg.rng_seed, gi, p))
    rec = optimize_ansatz(build_qaoa(g, build_mixer(g, mixer), p), g, run_cfg)
    return rec.best_value, tuple(float(x) for x in rec.best_params)


def evaluate_mixer(
    mixer: GateCombination,
    dataset: Sequence[Graph],
    depths: Sequence[int],
    cfg: OptimizerConfig | None = None,
    tag: str = "searched",
    workers: int = 1,
    classical: Sequence[float] | None = None,
) -> EvaluationReport:
    cfg = cfg or OptimizerConfig()
    if not dataset:
        raise InvalidArgument("empty dataset")
    if not depths or min(depths) < 1:
        raise InvalidArgument("depths must be a non-empty list of positive integers")
    if classical is None:
        classical = [maxcut_bruteforce(g)[0] for g in dataset]
    tasks = [(gi * len(depths) + di, (gi, p)) for gi in range(len(dataset)) for di, p in enumerate(depths)]
    fn = partial(_evaluate_task, list(dataset), tuple(mixer), cfg, classical)
    out = parallel_map_candidates(tasks, fn, workers)
    records = []
    for (_, (gi, p)), (energy, params) in zip(tasks, out):
        records.append(
            EvalRecord(gi, p, tag, tuple(mixer), energy, classical[gi], approximation_ratio(energy, classical[gi]), params)
        )
    return EvaluationReport(records)


@dataclass
class Comparison:
    searched: EvaluationReport
    baseline: EvaluationReport

    @property
    def deltas(self) -> list[dict]:
        """Per (graph, depth) ratio difference, searched minus baseline."""
        base = {(r.graph_id, r.p): r for r in self.baseline.records}
        out = []
        for r in self.searched.records:
            b = base[(r.graph_id, r.p)]
            out.append({"graph_id": r.graph_id, "p": r.p, "searched": r.ratio, "baseline": b.ratio, "delta": r.ratio - b.ratio})
        return out

    def mean_delta_per_p(self) -> dict[int, float]:
        groups: dict[int, list[float]] = {}
        for d in self.deltas:
            groups.setdefault(d["p"], []).append(d["delta"])
        return {p: float(np.mean(v)) for p, v in sorted(groups.items())}

    def mean_delta(self) -> float:
        return float(np.mean(list(self.mean_delta_per_p().values())))

    def wins(self, p: int | None = None) -> tuple[int, int]:
        """(graphs where searched >= baseline, total) over the selected records."""
        sel = [d for d in self.deltas if p is None or d["p"] == p]
        return sum(d["delta"] >= 0 for d in sel), len(sel)

    @property
    def combined(self) -> EvaluationReport:
        return EvaluationReport(self.searched.records + self.baseline.records)

    def to_dict(self) -> dict:
        d = self.combined.to_dict()
        d["mixers"] = {
            "searched": combination_names(self.searched.records[0].combination),
            "baseline": combination_names(self.baseline.records[0].combination),
        }
        d["deltas"] = self.deltas
        d["mean_delta_per_p"] = [{"p": p, "mean_delta": v} for p, v in self.mean_delta_per_p().items()]
        d["mean_delta"] = self.mean_delta()
        return d

    def to_csv(self) -> str:
        return self.combined.to_csv()


def compare_mixers(
    a: GateCombination,
    b: GateCombination,
    dataset: Sequence[Graph],
    depths: Sequence[int],
    cfg: OptimizerConfig | None = None,
    workers: int = 1,
) -> Comparison:
    """Paired comparison of mixer ``a`` (searched) against ``b`` (baseline)."""
    classical = [maxcut_bruteforce(g)[0] for g in dataset]
    return Comparison(
        evaluate_mixer(a, dataset, depths, cfg, "searched", workers, classical),
        evaluate_mixer(b, dataset, depths, cfg, "baseline", workers, classical),
    )
