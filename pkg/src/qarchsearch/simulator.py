"""Dense statevector simulation of QAOA circuits.

Amplitude ``b`` stores basis state ``b``; qubit ``q`` is bit ``q`` of ``b``
(bit 0 -> spin +1, bit 1 -> spin -1), matching :mod:`qarchsearch.graphs`.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .circuits import GateKind, MixerLayer, QaoaAnsatz
from .exceptions import InvalidArgument, SizeLimitError
from .graphs import Graph, cut_table

MAX_QUBITS = 24
# qubits per Kronecker block when a gate is broadcast over every qubit
_BLOCK = 5

_I2 = np.eye(2, dtype=complex)
PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
# P = W Z W^dagger for the two-qubit mixer Paulis
_EIGENBASIS = {"X": _H, "Y": _S @ _H}
_ROT = {
    "X": lambda c, s: np.array([[c, -1j * s], [-1j * s, c]]),
    "Y": lambda c, s: np.array([[c, -s], [s, c]], dtype=complex),
    "Z": lambda c, s: np.array([[c - 1j * s, 0], [0, c + 1j * s]]),
}


@dataclass(frozen=True, eq=False)
class Statevector:
    amplitudes: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _check_qubits(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SizeLimitError(f"{n} qubits outside supported range 1..{MAX_QUBITS}")


def _check_dims(s: Statevector, g: Graph) -> None:
    if s.amplitudes.shape[0] != 1 << g.n_nodes:
        raise InvalidArgument(f"state has {s.n_qubits} qubits but graph has {g.n_nodes} nodes")


def rotation_matrix(gate: GateKind, angle: float) -> np.ndarray:
    """exp(-i angle/2 P) for P = X, Y, Z or P (x) P."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if gate.arity == 1:
        return _ROT[gate.pauli](c, s)
    p = np.kron(PAULI[gate.pauli], PAULI[gate.pauli])
    return c * np.eye(4) - 1j * s * p


def init_plus_state(n: int) -> Statevector:
    _check_qubits(n)
    return Statevector(np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def apply_cost_phase(s: Statevector, g: Graph, gamma: float) -> Statevector:
    _check_dims(s, g)
    return Statevector(s.amplitudes * np.exp(-1j * gamma * cut_table(g)))


def _apply_1q(psi: np.ndarray, u: np.ndarray, q: int) -> np.ndarray:
    n = psi.shape[0].bit_length() - 1
    view = psi.reshape(1 << (n - q - 1), 2, 1 << q)
    return np.matmul(u, view).reshape(-1)


def _apply_2q(psi: np.ndarray, u: np.ndarray, a: int, b: int) -> np.ndarray:
    # u acts on (a, b) with a as the more significant factor of the kron
    n = psi.shape[0].bit_length() - 1
    t = psi.reshape((2,) * n)
    axes = (n - 1 - a, n - 1 - b)
    t = np.tensordot(u.reshape(2, 2, 2, 2), t, axes=((2, 3), axes))
    return np.moveaxis(t, (0, 1), axes).reshape(-1)


def apply_rotation(s: Statevector, gate: GateKind, target, angle: float) -> Statevector:
    """Apply one rotation gate to a qubit index or to an edge ``(u, v)``."""
    n = s.n_qubits
    targets = (target,) if np.isscalar(target) else tuple(target)
    if len(targets) != gate.arity:
        raise InvalidArgument(f"{gate.value} needs {gate.arity} target(s), got {targets}")
    if any(not 0 <= int(t) < n for t in targets) or len(set(targets)) != len(targets):
        raise InvalidArgument(f"bad target {targets} for {n} qubits")
    u = rotation_matrix(gate, angle)
    if gate.arity == 1:
        return Statevector(_apply_1q(s.amplitudes, u, int(targets[0])))
    return Statevector(_apply_2q(s.amplitudes, u, int(targets[0]), int(targets[1])))


def expectation_cut(s: Statevector, g: Graph) -> float:
    _check_dims(s, g)
    return float(np.dot(s.probabilities(), cut_table(g)))


class _Broadcast:
    """Applies the same 2x2 unitary to every qubit, a block of qubits at a time."""

    def __init__(self, n: int):
        self.blocks = []
        lo = 0
        while lo < n:
            width = min(_BLOCK, n - lo)
            self.blocks.append((1 << (n - lo - width), 1 << width, 1 << lo))
            lo += width
        self.widths = sorted({size.bit_length() - 1 for _, size, _ in self.blocks})

    def powers(self, u: np.ndarray) -> dict[int, np.ndarray]:
        return {w: _kron_power(u, w) for w in self.widths}

    def __call__(self, psi: np.ndarray, u: np.ndarray, powers: dict | None = None) -> np.ndarray:
        powers = powers or self.powers(u)
        for left, size, right in self.blocks:
            m = powers[size.bit_length() - 1]
            if right == 1:
                psi = (psi.reshape(left, size) @ m.T).reshape(-1)
            else:
                psi = np.matmul(m, psi.reshape(left, size, right)).reshape(-1)
        return psi


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(a.shape[0] * b.shape[0], -1)


def _kron_power(u: np.ndarray, width: int) -> np.ndarray:
    out = None
    base = u
    while width:
        if width & 1:
            out = base if out is None else _kron(out, base)
        width >>= 1
        if width:
            base = _kron(base, base)
    return out


class _Phase:
    """exp(-i t * values) evaluated once per distinct value."""

    def __init__(self, values: np.ndarray):
        self.levels, self.index = np.unique(values, return_inverse=True)

    def __call__(self, t: float) -> np.ndarray:
        return np.exp(-1j * t * self.levels)[self.index]


class CompiledAnsatz:
    """Precomputed tables for evaluating one ansatz many times.

    Broadcast columns of a mixer layer are applied in one pass: identical
    single-qubit gates as Kronecker blocks, and a column of commuting RXX or
    RYY gates as a diagonal phase in the Pauli eigenbasis.
    """

    def __init__(self, ansatz: QaoaAnsatz):
        g = ansatz.graph
        _check_qubits(g.n_nodes)
        self.ansatz = ansatz
        self.n = g.n_nodes
        self.cuts = cut_table(g)
        unit = Graph(g.n_nodes, g.edges)
        # sum over edges of z_u z_v, unweighted: mixer gates ignore edge weights
        self.zz = g.n_edges - 2 * cut_table(unit)
        self._broadcast = _Broadcast(self.n)
        self._cost_phase = _Phase(self.cuts)
        self._zz_phase = _Phase(self.zz)

    def _mixer(self, psi: np.ndarray, beta: float) -> np.ndarray:
        # consecutive 2x2 factors are multiplied together so each stretch
        # between two-qubit columns costs a single broadcast
        angle = 2 * beta
        pending = _I2
        for kind in self.ansatz.mixer.combination:
            if kind.arity == 1:
                pending = rotation_matrix(kind, angle) @ pending
            else:
                w = _EIGENBASIS[kind.pauli]
                psi = self._broadcast(psi, w.conj().T @ pending)
                psi = psi * self._zz_phase(angle / 2)
                pending = w
        return self._broadcast(psi, pending)

    def amplitudes(self, params) -> np.ndarray:
        gammas, betas = self.ansatz.split(params)
        psi = np.full(1 << self.n, 2.0 ** (-self.n / 2), dtype=complex)
        for gamma, beta in zip(gammas, betas):
            psi = psi * self._cost_phase(gamma)
            psi = self._mixer(psi, beta)
        return psi

    def expectation(self, params) -> float:
        psi = self.amplitudes(params)
        return float(np.dot(psi.real**2 + psi.imag**2, self.cuts))


def apply_mixer_layer(s: Statevector, mixer: MixerLayer, beta: float) -> Statevector:
    """Apply every expanded gate of ``mixer`` in order with angle 2*beta."""
    for kind, targets in mixer.gates:
        s = apply_rotation(s, kind, targets if kind.arity == 2 else targets[0], 2 * beta)
    return s


def simulate_ansatz(a: QaoaAnsatz, params) -> Statevector:
    params = np.asarray(params, dtype=float)
    if params.ndim != 1:
        raise InvalidArgument("params must be a flat vector")
    return Statevector(CompiledAnsatz(a).amplitudes(params))


def simulate_ansatz_gatewise(a: QaoaAnsatz, params) -> Statevector:
    """Reference path: one gate at a time through the public operations."""
    gammas, betas = a.split(list(params))
    s = init_plus_state(a.graph.n_nodes)
    for gamma, beta in zip(gammas, betas):
        s = apply_cost_phase(s, a.graph, gamma)
        s = apply_mixer_layer(s, a.mixer, beta)
    return s
