"""Mixer search: enumerate gate combinations per depth, optimize, keep the best.

Every candidate gets an optimizer seed derived from ``(base seed,
candidate index)``, and results are stored by index, so the outcome does
not depend on the number of workers or on completion order.
"""
from __future__ import annotations

import logging
import multiprocessing
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.stats import rankdata

from .circuits import (
    DEFAULT_ALPHABET,
    GateCombination,
    GateKind,
    build_mixer,
    build_qaoa,
    combination_names,
    gate_combinations,
)
from .exceptions import CandidateFailure, InvalidArgument
from .graphs import Graph
from .optimizer import OptimizationRecord, OptimizerConfig, optimize_ansatz

log = logging.getLogger(__name__)

CUMULATIVE = "cumulative-k"
FIXED = "fixed-k"


def derive_seed(*keys: int) -> int:
    """Stable 32-bit seed from a tuple of non-negative integers."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1)[0])


@dataclass(frozen=True)
class SearchConfig:
    p_max: int = 4
    k_max: int = 4
    alphabet: tuple[GateKind, ...] = DEFAULT_ALPHABET
    workers: int = 1
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    seed: int = 0
    mode: str = CUMULATIVE
    p_min: int = 1

    def __post_init__(self):
        if self.p_max < 1 or self.k_max < 1 or self.workers < 1:
            raise InvalidArgument("p_max, k_max and workers must all be >= 1")
        if not 1 <= self.p_min <= self.p_max:
            raise InvalidArgument(f"p_min must lie in 1..{self.p_max}")
        if self.mode not in (CUMULATIVE, FIXED):
            raise InvalidArgument(f"unknown enumeration mode {self.mode!r}")
        if not self.alphabet:
            raise InvalidArgument("alphabet is empty")

    @property
    def depths(self) -> range:
        return range(self.p_min, self.p_max + 1)

    def to_dict(self) -> dict:
        """Everything that influences results; ``workers`` is deliberately absent."""
        return {
            "p_min": self.p_min,
            "p_max": self.p_max,
            "k_max": self.k_max,
            "alphabet": combination_names(self.alphabet),
            "mode": self.mode,
            "seed": self.seed,
            "optimizer": self.optimizer.to_dict(),
        }


@dataclass(frozen=True)
class Candidate:
    index: int
    p: int
    combination: GateCombination


@dataclass
class CandidateResult:
    candidate_index: int
    p: int
    combination: GateCombination
    energy: float
    record: OptimizationRecord
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return {
            "index": self.candidate_index,
            "p": self.p,
            "combination": combination_names(self.combination),
            "energy": self.energy,
            "best_params": [float(x) for x in self.record.best_params],
            "evaluations": self.record.evaluations,
            "wall_time_s": self.wall_time,
        }


@dataclass
class SearchResult:
    best: CandidateResult
    candidates: list[CandidateResult]
    per_depth_time: list[float]
    total_time: float
    config: SearchConfig
    graph: Graph | None = None

    @property
    def best_mixer(self) -> GateCombination:
        return self.best.combination

    @property
    def best_energy(self) -> float:
        return self.best.energy

    @property
    def best_depth(self) -> int:
        return self.best.p

    def to_dict(self) -> dict:
        d = {
            "best": {
                "combination": combination_names(self.best.combination),
                "p": self.best.p,
                "energy": self.best.energy,
                "index": self.best.candidate_index,
                "mixer": build_mixer(self.graph, self.best.combination).to_dict() if self.graph else None,
            },
            "config": self.config.to_dict(),
        }
        if self.graph is not None:
            d["graph"] = self.graph.to_dict()
        d["candidates"] = [c.to_dict() for c in self.candidates]
        d["timing"] = {
            "total_s": self.total_time,
            "per_depth_s": self.per_depth_time,
            "workers": self.config.workers,
        }
        return d


TIMING_KEYS = ("timing", "wall_time_s")


def strip_timing(obj):
    """Copy of a result document with all timing fields removed."""
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def combinations_for_depth(cfg: SearchConfig) -> list[GateCombination]:
    if cfg.mode == FIXED:
        return gate_combinations(cfg.alphabet, cfg.k_max)
    out = []
    for k in range(1, cfg.k_max + 1):
        out.extend(gate_combinations(cfg.alphabet, k))
    return out


def candidate_count(cfg: SearchConfig) -> int:
    a = len(cfg.alphabet)
    per_depth = a**cfg.k_max if cfg.mode == FIXED else sum(a**k for k in range(1, cfg.k_max + 1))
    return per_depth * len(cfg.depths)


def enumerate_candidates(cfg: SearchConfig) -> list[Candidate]:
    combos = combinations_for_depth(cfg)
    out = []
    for p in cfg.depths:
        out.extend(Candidate(len(out), p, c) for c in combos)
    return out


def evaluate_candidate(g: Graph, opt_cfg: OptimizerConfig, base_seed: int, cand: Candidate) -> CandidateResult:
    start = time.perf_counter()
    cfg = replace(opt_cfg, rng_seed=derive_seed(base_seed, cand.index))
    ansatz = build_qaoa(g, build_mixer(g, cand.combination), cand.p)
    rec = optimize_ansatz(ansatz, g, cfg)
    rec.trace = []
    return CandidateResult(cand.index, cand.p, cand.combination, rec.best_value, rec, time.perf_counter() - start)


class _Guarded:
    """Turns a worker exception into a value so the parent can name the candidate."""

    def __init__(self, fn: Callable):
        self.fn = fn

    def __call__(self, cand):
        try:
            return cand, self.fn(cand), None
        except Exception as exc:  # noqa: BLE001 - re-raised by the coordinator
            return cand, None, repr(exc)


@contextmanager
def worker_pool(workers: int):
    """A process pool for ``workers > 1``; ``None`` means run in-process."""
    if workers <= 1:
        yield None
        return
    pool = multiprocessing.get_context("fork").Pool(workers)
    try:
        yield pool
    finally:
        pool.terminate()
        pool.join()


def _index(cand) -> int:
    # plain tasks are (index, payload) tuples
    return cand[0] if isinstance(cand, tuple) else cand.index


def parallel_map_candidates(candidates: Sequence, eval_fn: Callable, workers: int, pool=None) -> list:
    """Evaluate every candidate on at most ``workers`` processes.

    Results come back ordered by candidate index. Any failure aborts the
    whole map with :class:`CandidateFailure`.
    """
    if workers < 1:
        raise InvalidArgument("workers must be >= 1")
    guarded = _Guarded(eval_fn)
    if workers == 1 and pool is None:
        stream: Iterable = map(guarded, candidates)
        results = {}
        for cand, res, err in stream:
            if err is not None:
                raise CandidateFailure(_index(cand), err)
            results[_index(cand)] = res
    else:
        with (worker_pool(workers) if pool is None else _nullpool(pool)) as active:
            chunk = max(1, len(candidates) // (4 * workers))
            results = {}
            for cand, res, err in active.imap_unordered(guarded, candidates, chunksize=chunk):
                if err is not None:
                    raise CandidateFailure(_index(cand), err)
                results[_index(cand)] = res
    return [results[k] for k in sorted(results)]


@contextmanager
def _nullpool(pool):
    yield pool


def select_best(candidates: Sequence[CandidateResult], incumbent: CandidateResult | None = None) -> CandidateResult:
    """Highest energy wins; ties go to lower depth, then lower index.

    An incumbent is kept on an exact tie.
    """
    if not candidates and incumbent is None:
        raise InvalidArgument("nothing to select from")
    best = incumbent
    for c in sorted(candidates, key=lambda c: (c.p, c.candidate_index)):
        if best is None or c.energy > best.energy:
            best = c
    return best


def search_mixer(g: Graph, cfg: SearchConfig | None = None, pool=None) -> SearchResult:
    cfg = cfg or SearchConfig()
    candidates = enumerate_candidates(cfg)
    fn = partial(evaluate_candidate, g, cfg.optimizer, cfg.seed)
    best = None
    results: list[CandidateResult] = []
    per_depth = []
    start = time.perf_counter()
    with (worker_pool(cfg.workers) if pool is None else _nullpool(pool)) as active:
        for p in cfg.depths:
            t0 = time.perf_counter()
            batch = [c for c in candidates if c.p == p]
            energies = parallel_map_candidates(batch, fn, cfg.workers, pool=active)
            results.extend(energies)
            best = select_best(energies, best)
            per_depth.append(time.perf_counter() - t0)
            log.info("p=%d: %d candidates, best %s -> %.6f", p, len(batch), combination_names(best.combination), best.energy)
    return SearchResult(best, results, per_depth, time.perf_counter() - start, cfg, g)


@dataclass
class DatasetSearchResult:
    """One mixer chosen for a whole dataset by mean per-graph energy rank."""

    best_key: tuple[int, GateCombination]
    mean_rank: dict[tuple[int, GateCombination], float]
    mean_energy: dict[tuple[int, GateCombination], float]
    per_graph: list[SearchResult]
    total_time: float
    config: SearchConfig

    def to_dict(self) -> dict:
        keys = list(self.mean_rank)
        p, comb = self.best_key
        return {
            "best": {"combination": combination_names(comb), "p": p, "mean_rank": self.mean_rank[self.best_key],
                     "mean_energy": self.mean_energy[self.best_key]},
            "config": self.config.to_dict(),
            "ranking": [
                {"p": k[0], "combination": combination_names(k[1]), "mean_rank": self.mean_rank[k],
                 "mean_energy": self.mean_energy[k]}
                for k in keys
            ],
            "graphs": [r.to_dict() for r in self.per_graph],
            "timing": {"total_s": self.total_time, "workers": self.config.workers},
        }


def _evaluate_graph_candidate(graphs, opt_cfg, base_seed, task):
    gi, cand = task
    return evaluate_candidate(graphs[gi], opt_cfg, base_seed, cand)


def search_dataset(graphs: Sequence[Graph], cfg: SearchConfig | None = None) -> DatasetSearchResult:
    """Rank every candidate on every graph (rank 1 = highest energy) and pick
    the candidate with the lowest mean rank; ties go to lower depth, then
    lower index."""
    cfg = cfg or SearchConfig()
    if not graphs:
        raise InvalidArgument("empty dataset")
    candidates = enumerate_candidates(cfg)
    n = len(candidates)
    # tasks are indexed graph-major so each has a unique, order-free key
    tasks = [(gi * n + c.index, (gi, c)) for gi in range(len(graphs)) for c in candidates]
    fn = partial(_evaluate_graph_candidate, list(graphs), cfg.optimizer, cfg.seed)
    start = time.perf_counter()
    flat = parallel_map_candidates(tasks, _Unwrap(fn), cfg.workers)
    total = time.perf_counter() - start
    per_graph = []
    ranks = np.zeros((len(graphs), n))
    energies = np.zeros((len(graphs), n))
    for gi, g in enumerate(graphs):
        res = flat[gi * n : (gi + 1) * n]
        energies[gi] = [r.energy for r in res]
        ranks[gi] = rankdata(-energies[gi], method="average")
        per_graph.append(SearchResult(select_best(res), res, [], sum(r.wall_time for r in res), cfg, g))
    mean_rank = ranks.mean(axis=0)
    mean_energy = energies.mean(axis=0)
    order = sorted(range(n), key=lambda i: (mean_rank[i], candidates[i].p, i))
    keys = [(c.p, c.combination) for c in candidates]
    return DatasetSearchResult(
        keys[order[0]],
        {k: float(mean_rank[i]) for i, k in enumerate(keys)},
        {k: float(mean_energy[i]) for i, k in enumerate(keys)},
        per_graph,
        total,
        cfg,
    )


class _Unwrap:
    def __init__(self, fn):
        self.fn = fn

    def __call__(self, task):
        return self.fn(task[1])
