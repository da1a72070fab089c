"""Derivative-free variational optimization of QAOA parameters (COBYLA)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .circuits import QaoaAnsatz
from .exceptions import InvalidArgument
from .graphs import Graph
from .simulator import CompiledAnsatz


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 200
    initial_fill: float = 0.1
    initial_params: tuple[float, ...] | None = None
    restarts: int = 0
    rng_seed: int = 0
    rhobeg: float = 0.5
    rhoend: float = 1e-4

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidArgument(f"max_iters must be >= 1, got {self.max_iters}")
        if self.restarts < 0:
            raise InvalidArgument("restarts must be >= 0")

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if d["initial_params"] is not None:
            d["initial_params"] = list(d["initial_params"])
        return d


@dataclass
class OptimizationRecord:
    best_params: np.ndarray
    best_value: float
    evaluations: int
    # (evaluation number, running best value)
    trace: list[tuple[int, float]] = field(default_factory=list)

    def to_dict(self, with_trace: bool = False) -> dict:
        d = {
            "best_params": [float(x) for x in self.best_params],
            "best_value": self.best_value,
            "evaluations": self.evaluations,
        }
        if with_trace:
            d["trace"] = [[i, v] for i, v in self.trace]
        return d


def _cobyla(f: Callable, x0: np.ndarray, budget: int, cfg: OptimizerConfig, sign: float, record: OptimizationRecord):
    def wrapped(x):
        value = float(f(np.asarray(x, dtype=float)))
        record.evaluations += 1
        if sign * value > sign * record.best_value:
            record.best_value = value
            record.best_params = np.array(x, dtype=float)
        record.trace.append((record.evaluations, record.best_value))
        return -sign * value

    minimize(
        wrapped,
        x0,
        method="COBYLA",
        tol=cfg.rhoend,
        options={"maxiter": budget, "rhobeg": cfg.rhobeg},
    )


def _run(f: Callable, x0, cfg: OptimizerConfig, sign: float, starts: Sequence[np.ndarray] = ()) -> OptimizationRecord:
    x0 = np.asarray(x0, dtype=float)
    record = OptimizationRecord(x0.copy(), -sign * np.inf, 0)
    # the evaluation budget is shared across the initial run and all restarts
    runs = [x0, *starts]
    remaining = cfg.max_iters
    for i, start in enumerate(runs):
        budget = remaining // (len(runs) - i)
        if budget < 1:
            continue
        before = record.evaluations
        _cobyla(f, start, budget, cfg, sign, record)
        remaining -= record.evaluations - before
    return record


def minimize_scalar_test(f: Callable, theta0, cfg: OptimizerConfig | None = None) -> OptimizationRecord:
    """Minimize an arbitrary objective with the same COBYLA setup."""
    return _run(f, theta0, cfg or OptimizerConfig(), sign=-1.0)


def initial_point(p: int, cfg: OptimizerConfig) -> np.ndarray:
    if cfg.initial_params is not None:
        if len(cfg.initial_params) != 2 * p:
            raise InvalidArgument(f"initial_params must have {2 * p} entries")
        return np.array(cfg.initial_params, dtype=float)
    return np.full(2 * p, cfg.initial_fill)


def restart_points(p: int, cfg: OptimizerConfig) -> list[np.ndarray]:
    """Seeded uniform starts: gamma in [0, 2pi), beta in [0, pi)."""
    rng = np.random.default_rng(cfg.rng_seed)
    return [
        np.concatenate([rng.uniform(0, 2 * np.pi, p), rng.uniform(0, np.pi, p)])
        for _ in range(cfg.restarts)
    ]


def optimize_ansatz(a: QaoaAnsatz, g: Graph, cfg: OptimizerConfig | None = None) -> OptimizationRecord:
    """Maximize the expected cut of ``a`` on ``g``."""
    cfg = cfg or OptimizerConfig()
    if a.graph != g:
        raise InvalidArgument("ansatz was built for a different graph")
    compiled = CompiledAnsatz(a)
    return _run(compiled.expectation, initial_point(a.p, cfg), cfg, sign=1.0, starts=restart_points(a.p, cfg))
