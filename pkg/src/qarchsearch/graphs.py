"""Graphs, seeded random generators and exact maxcut.

Nodes are 0-based contiguous integers. A basis index ``b`` of an n-node
graph encodes node ``q`` as bit ``q`` of ``b``; bit 0 means spin +1 and
bit 1 means spin -1. The same convention is used by the simulator.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InvalidArgument, SizeLimitError

BRUTEFORCE_MAX_NODES = 24
REGULAR_MAX_ATTEMPTS = 1000


@dataclass(frozen=True)
class Graph:
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    weights: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n_nodes < 1:
            raise InvalidArgument(f"n_nodes must be positive, got {self.n_nodes}")
        edges = tuple((int(u), int(v)) for u, v in self.edges)
        seen = set()
        for u, v in edges:
            if u == v:
                raise InvalidArgument(f"self-loop on node {u}")
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise InvalidArgument(f"edge ({u}, {v}) out of range for {self.n_nodes} nodes")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidArgument(f"duplicate edge ({u}, {v})")
            seen.add(key)
        weights = tuple(float(w) for w in self.weights) if self.weights else (1.0,) * len(edges)
        if len(weights) != len(edges):
            raise InvalidArgument("weights and edges differ in length")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "weights", weights)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    @property
    def unit_weights(self) -> bool:
        return all(w == 1.0 for w in self.weights)

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def relabel(self, perm: Sequence[int]) -> "Graph":
        """Return the graph with node ``i`` renamed to ``perm[i]``."""
        if sorted(perm) != list(range(self.n_nodes)):
            raise InvalidArgument("perm is not a permutation of the nodes")
        edges = tuple((perm[u], perm[v]) for u, v in self.edges)
        return Graph(self.n_nodes, edges, self.weights)

    def to_dict(self) -> dict:
        d = {"n": self.n_nodes, "edges": [[u, v] for u, v in self.edges]}
        if not self.unit_weights:
            d["weights"] = list(self.weights)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Graph":
        try:
            return cls(int(d["n"]), tuple(tuple(e) for e in d["edges"]), tuple(d.get("weights") or ()))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InvalidArgument):
                raise
            raise InvalidArgument(f"malformed graph record: {exc}") from exc


def _as_spins(g: Graph, z) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1 or z.shape[0] != g.n_nodes:
        raise InvalidArgument(f"assignment length {z.shape} does not match {g.n_nodes} nodes")
    if not np.all(np.abs(z) == 1):
        raise InvalidArgument("spins must be +1 or -1")
    return z


def cut_value(g: Graph, z) -> float:
    """Weighted number of edges whose endpoints carry opposite spins."""
    z = _as_spins(g, z)
    total = 0.0
    for (u, v), w in zip(g.edges, g.weights):
        total += w * (1 - z[u] * z[v]) / 2
    return float(total)


def spins_from_index(b: int, n: int) -> np.ndarray:
    return np.array([1 - 2 * ((b >> q) & 1) for q in range(n)], dtype=int)


def cut_table(g: Graph, states: np.ndarray | None = None) -> np.ndarray:
    """Cut value of every basis index (or of the given indices)."""
    if states is None:
        states = np.arange(1 << g.n_nodes, dtype=np.int64)
    out = np.zeros(states.shape, dtype=float)
    for (u, v), w in zip(g.edges, g.weights):
        out += w * (((states >> u) ^ (states >> v)) & 1)
    return out


def maxcut_bruteforce(g: Graph, max_nodes: int = BRUTEFORCE_MAX_NODES) -> tuple[float, np.ndarray]:
    """Exact maxcut by enumeration with node 0 pinned to spin +1.

    Ties go to the lowest basis index.
    """
    if g.n_nodes > max_nodes:
        raise SizeLimitError(f"{g.n_nodes} nodes exceeds brute-force cap of {max_nodes}")
    states = np.arange(0, 1 << g.n_nodes, 2, dtype=np.int64)
    values = cut_table(g, states)
    i = int(np.argmax(values))
    return float(values[i]), spins_from_index(int(states[i]), g.n_nodes)


def erdos_renyi(n: int, edge_prob: float, seed: int) -> Graph:
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    if not 0.0 <= edge_prob <= 1.0:
        raise InvalidArgument(f"edge_prob must lie in [0, 1], got {edge_prob}")
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n), 2))
    draws = rng.random(len(pairs))
    return Graph(n, tuple(p for p, x in zip(pairs, draws) if x < edge_prob))


def random_regular(n: int, d: int, seed: int) -> Graph:
    """d-regular graph from the pairing model, restarting on any collision."""
    if n < 1 or d < 0 or d >= n or (n * d) % 2:
        raise InvalidArgument(f"no simple {d}-regular graph on {n} nodes")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(REGULAR_MAX_ATTEMPTS):
        paired = rng.permutation(stubs).reshape(-1, 2)
        edges = set()
        for u, v in paired:
            key = (int(min(u, v)), int(max(u, v)))
            if u == v or key in edges:
                break
            edges.add(key)
        else:
            return Graph(n, tuple(sorted(edges)))
    raise InvalidArgument(f"pairing model failed {REGULAR_MAX_ATTEMPTS} times for n={n}, d={d}")


def save_dataset(path, graphs: Iterable[Graph], seed: int, **meta) -> None:
    doc = {"seed": seed, **meta, "graphs": [g.to_dict() for g in graphs]}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_dataset(path) -> tuple[list[Graph], dict]:
    """Read a dataset file; a bare JSON array of graphs is also accepted."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidArgument(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(doc, list):
        doc = {"graphs": doc}
    if not isinstance(doc, dict) or "graphs" not in doc:
        raise InvalidArgument(f"{path}: missing 'graphs' array")
    meta = {k: v for k, v in doc.items() if k != "graphs"}
    return [Graph.from_dict(d) for d in doc["graphs"]], meta
