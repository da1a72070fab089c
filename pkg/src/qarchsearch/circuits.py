"""Gate alphabet, candidate enumeration and QAOA circuit assembly."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .exceptions import InvalidArgument
from .graphs import Graph


class GateKind(enum.Enum):
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    RXX = "RXX"
    RYY = "RYY"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.RXX, GateKind.RYY) else 1

    @property
    def pauli(self) -> str:
        return self.value[1]

    @classmethod
    def parse(cls, name: str) -> "GateKind":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise InvalidArgument(f"unknown gate {name!r}; choose from {[g.value for g in cls]}") from None


DEFAULT_ALPHABET: tuple[GateKind, ...] = tuple(GateKind)
BASELINE_MIXER: tuple[GateKind, ...] = (GateKind.RX,)

GateCombination = tuple[GateKind, ...]


def parse_combination(text: str | Sequence) -> GateCombination:
    """``"RX,RY"`` or ``["RX", "RY"]`` -> ``(GateKind.RX, GateKind.RY)``."""
    names = text.split(",") if isinstance(text, str) else list(text)
    comb = tuple(n if isinstance(n, GateKind) else GateKind.parse(n) for n in names if str(n).strip())
    if not comb:
        raise InvalidArgument("empty gate combination")
    return comb


def combination_names(comb: Iterable[GateKind]) -> list[str]:
    return [g.value for g in comb]


def gate_combinations(alphabet: Sequence[GateKind], k: int) -> list[GateCombination]:
    """Every ordered length-k sequence over ``alphabet`` (repetition allowed).

    Sequences come out in lexicographic order of alphabet position, so
    ``alphabet[0]`` repeated k times is always first.
    """
    if not alphabet:
        raise InvalidArgument("alphabet is empty")
    if len(set(alphabet)) != len(alphabet):
        raise InvalidArgument("alphabet contains duplicates")
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    return [tuple(c) for c in itertools.product(alphabet, repeat=k)]


@dataclass(frozen=True)
class MixerLayer:
    """One mixer layer; every expanded gate uses the angle 2*beta."""

    combination: GateCombination
    gates: tuple[tuple[GateKind, tuple[int, ...]], ...]
    shared_beta: bool = True

    def to_dict(self) -> dict:
        return {"combination": combination_names(self.combination), "shared_beta": self.shared_beta}


def build_mixer(g: Graph, comb: Sequence[GateKind]) -> MixerLayer:
    comb = tuple(comb)
    if not comb:
        raise InvalidArgument("empty gate combination")
    gates = []
    for kind in comb:
        if kind.arity == 1:
            gates.extend((kind, (q,)) for q in range(g.n_nodes))
        else:
            gates.extend((kind, (u, v)) for u, v in g.edges)
    return MixerLayer(comb, tuple(gates))


@dataclass(frozen=True)
class QaoaAnsatz:
    graph: Graph
    mixer: MixerLayer
    p: int

    @property
    def parameter_count(self) -> int:
        return 2 * self.p

    def split(self, params) -> tuple[Sequence[float], Sequence[float]]:
        """Parameter vector -> (gammas, betas)."""
        if len(params) != self.parameter_count:
            raise InvalidArgument(f"expected {self.parameter_count} parameters, got {len(params)}")
        return params[: self.p], params[self.p :]


def build_qaoa(g: Graph, mixer: MixerLayer, p: int) -> QaoaAnsatz:
    if p < 1:
        raise InvalidArgument(f"depth p must be >= 1, got {p}")
    return QaoaAnsatz(g, mixer, int(p))
