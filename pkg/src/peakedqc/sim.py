"""Dense statevector simulation of small quantum circuits.

Conventions used throughout the package:

* Wire 0 is the most significant bit of an outcome string, so the basis
  state ``|b_0 b_1 ... b_{n-1}>`` sits at index ``int(b, 2)`` of the
  amplitude vector.
* Bit strings are plain Python strings of ``'0'``/``'1'`` characters.
* Gates carry explicit ``2^k x 2^k`` matrices for ``k`` wires.  Two-qubit
  gates may instead carry 15 real coefficients for the fixed Pauli-product
  generator basis (see :func:`su4_gate`); the matrix is materialized at
  construction time.

Gate application mutates the amplitude buffer in place through strided
views, so a circuit pass costs one ``2^k x 2^k`` mat-vec per gate over the
untouched axes.  Full-unitary materialization is capped at
``N_MAX_DENSE`` wires.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

N_MAX_DENSE = 12  # a 2^12 x 2^12 complex128 matrix is ~268 MB

UNITARITY_TOL = 1e-12


class StructureError(ValueError):
    """Wires, architectures or peak paths that do not line up."""


class DenseCapError(RuntimeError):
    """Dense materialization requested above the configured wire limit."""


# ---------------------------------------------------------------------------
# fixed matrices and the two-qubit generator basis

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_PAULIS = {"I": PAULI_I, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


def two_qubit_pauli_basis() -> np.ndarray:
    """The 15 traceless Hermitian generators ``sigma_a (x) sigma_b``.

    All pairs ``(a, b) != (I, I)`` in row-major order over the labels
    ``I, X, Y, Z``.  This fixed ordering is the contract for the 15-entry
    ``params`` vector of a parameterized two-qubit gate.
    """
    mats = []
    for a in "IXYZ":
        for b in "IXYZ":
            if a == "I" and b == "I":
                continue
            mats.append(np.kron(_PAULIS[a], _PAULIS[b]))
    return np.stack(mats)


SU4_BASIS = two_qubit_pauli_basis()


def su4_gate(params: Sequence[float]) -> np.ndarray:
    """``exp(-i sum_k params[k] P_k)`` over the fixed two-qubit Pauli basis."""
    params = np.asarray(params, dtype=float)
    if params.shape != (15,):
        raise StructureError(f"expected 15 generator coefficients, got shape {params.shape}")
    h = np.tensordot(params, SU4_BASIS, axes=1)
    w, q = np.linalg.eigh(h)
    return (q * np.exp(-1j * w)) @ q.conj().T


# ---------------------------------------------------------------------------
# domain types


@dataclass(eq=False)
class Gate:
    """A ``k``-wire gate with an explicit ``2^k x 2^k`` matrix.

    ``unitary=False`` skips the unitarity check; it is meant for the
    deliberately non-unitary gates of Taylor-truncated interpolation paths.
    """

    wires: tuple[int, ...]
    matrix: np.ndarray
    params: np.ndarray | None = None
    unitary: bool = True

    def __post_init__(self):
        self.wires = tuple(int(w) for w in self.wires)
        if len(self.wires) == 0:
            raise StructureError("gate needs at least one wire")
        if len(set(self.wires)) != len(self.wires):
            raise StructureError(f"gate wires must be distinct, got {self.wires}")
        if self.params is not None:
            self.params = np.asarray(self.params, dtype=float)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = 1 << len(self.wires)
        if self.matrix.shape != (dim, dim):
            raise StructureError(
                f"matrix shape {self.matrix.shape} does not match {len(self.wires)} wires"
            )
        if self.unitary:
            defect = np.abs(self.matrix.conj().T @ self.matrix - np.eye(dim)).max()
            if defect > UNITARITY_TOL:
                raise StructureError(f"gate matrix is not unitary (defect {defect:.3e})")

    @classmethod
    def from_params(cls, wires: Iterable[int], params: Sequence[float]) -> "Gate":
        params = np.asarray(params, dtype=float)
        return cls(tuple(wires), su4_gate(params), params=params)

    def dagger(self) -> "Gate":
        return Gate(self.wires, self.matrix.conj().T, unitary=self.unitary)


@dataclass(frozen=True)
class Brickwall:
    """Alternating even/odd nearest-neighbour two-qubit layer pattern."""

    depth: int


def brickwall_layers(n: int, depth: int) -> list[list[tuple[int, int]]]:
    """Wire pairs per layer: even layers start at wire 0, odd at wire 1."""
    if depth < 1:
        raise StructureError("brickwall depth must be >= 1")
    layers = []
    for layer in range(depth):
        start = layer % 2
        layers.append([(w, w + 1) for w in range(start, n - 1, 2)])
    return layers


@dataclass(eq=False)
class Circuit:
    """An ordered gate list over ``n`` wires, optionally brickwall-tagged."""

    n: int
    gates: list[Gate] = field(default_factory=list)
    architecture: Brickwall | None = None

    def __post_init__(self):
        for g in self.gates:
            if any(w < 0 or w >= self.n for w in g.wires):
                raise StructureError(f"gate wires {g.wires} invalid for n={self.n}")
        if self.architecture is not None:
            expected = [p for layer in brickwall_layers(self.n, self.architecture.depth)
                        for p in layer]
            actual = [g.wires for g in self.gates]
            if actual != expected:
                raise StructureError("gate order does not match the brickwall layer pattern")

    @property
    def gate_count(self) -> int:
        return len(self.gates)


@dataclass(eq=False)
class StateVector:
    """``2^n`` complex amplitudes; unit norm for unitary circuits."""

    n: int
    amps: np.ndarray

    @classmethod
    def basis(cls, n: int, bits: str | None = None) -> "StateVector":
        amps = np.zeros(1 << n, dtype=complex)
        amps[0 if bits is None else bit_index(bits, n)] = 1.0
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2


@dataclass(eq=False)
class SampleSet:
    """A multiset of n-bit outcome strings with provenance metadata."""

    n: int
    shots: list[str]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for s in self.shots:
            if len(s) != self.n or set(s) - {"0", "1"}:
                raise StructureError(f"shot {s!r} is not an {self.n}-bit string")


# ---------------------------------------------------------------------------
# bit string helpers


def bit_index(bits: str, n: int | None = None) -> int:
    if n is not None and len(bits) != n:
        raise StructureError(f"bit string {bits!r} does not have length {n}")
    if set(bits) - {"0", "1"}:
        raise StructureError(f"not a bit string: {bits!r}")
    return int(bits, 2)


def index_bits(index: int, n: int) -> str:
    return format(index, f"0{n}b")


def x_layer_gates(mask_bits: str) -> list[Gate]:
    """Single-qubit X gates on every wire where ``mask_bits`` has a 1.

    As a permutation the layer maps ``|x>`` to ``|x XOR mask>``.
    """
    return [Gate((w,), PAULI_X) for w, b in enumerate(mask_bits) if b == "1"]


# ---------------------------------------------------------------------------
# simulation kernels


def _apply_matrix(tensor: np.ndarray, wires: tuple[int, ...], matrix: np.ndarray) -> None:
    """Apply ``matrix`` to the given axes of ``tensor``, writing in place.

    ``tensor`` is the amplitude buffer viewed with one length-2 axis per
    wire (extra trailing axes, e.g. a column batch, ride along).
    """
    k = len(wires)
    moved = np.moveaxis(tensor, wires, range(k))
    flat = moved.reshape(1 << k, -1)
    moved[...] = (matrix @ flat).reshape(moved.shape)


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Product of the gate actions in order; returns a fresh state."""
    if state.n != circuit.n:
        raise StructureError(f"state on {state.n} wires, circuit on {circuit.n}")
    amps = np.array(state.amps, dtype=complex)
    tensor = amps.reshape((2,) * circuit.n)
    for g in circuit.gates:
        _apply_matrix(tensor, g.wires, g.matrix)
    return StateVector(circuit.n, amps)


def amplitude(circuit: Circuit, bits_in: str, bits_out: str) -> complex:
    """``<out|U|in>`` for the circuit unitary ``U``."""
    state = apply_circuit(StateVector.basis(circuit.n, bits_in), circuit)
    return complex(state.amps[bit_index(bits_out, circuit.n)])


def output_distribution(circuit: Circuit, bits_in: str | None = None) -> np.ndarray:
    state = apply_circuit(StateVector.basis(circuit.n, bits_in), circuit)
    return state.probabilities()


def peak_weight(circuit: Circuit, bits_in: str | None = None) -> tuple[float, str]:
    """Largest outcome probability and its bit string."""
    p = output_distribution(circuit, bits_in)
    idx = int(np.argmax(p))
    return float(p[idx]), index_bits(idx, circuit.n)


def sample(circuit: Circuit, bits_in: str, shots: int, seed=None, meta: dict | None = None) -> SampleSet:
    """I.i.d. outcome draws from ``|<x|U|in>|^2``; deterministic given seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = as_rng(seed)
    p = output_distribution(circuit, bits_in)
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    idx = rng.choice(p.size, size=shots, p=p)
    strings = [index_bits(int(i), circuit.n) for i in idx]
    info = {"instance_id": None, "noise": None, "seed": seed}
    if meta:
        info.update(meta)
    return SampleSet(circuit.n, strings, info)


def full_unitary(circuit: Circuit, n_max_dense: int = N_MAX_DENSE) -> np.ndarray:
    """Dense ``d x d`` matrix of the circuit; column ``x`` is ``U|x>``."""
    if circuit.n > n_max_dense:
        raise DenseCapError(
            f"dense unitary for n={circuit.n} exceeds the n_max_dense={n_max_dense} cap"
        )
    d = 1 << circuit.n
    u = np.eye(d, dtype=complex)
    tensor = u.reshape((2,) * circuit.n + (d,))
    for g in circuit.gates:
        _apply_matrix(tensor, g.wires, g.matrix)
    return u


def compose(*circuits: Circuit) -> Circuit:
    """Circuit for the unitary product ``compose(A, B) = A @ B`` (B acts first)."""
    if not circuits:
        raise StructureError("compose needs at least one circuit")
    n = circuits[0].n
    gates: list[Gate] = []
    for c in reversed(circuits):
        if c.n != n:
            raise StructureError("cannot compose circuits with different wire counts")
        gates.extend(c.gates)
    return Circuit(n, gates)


def adjoint(circuit: Circuit) -> Circuit:
    return Circuit(circuit.n, [g.dagger() for g in reversed(circuit.gates)])


def controlled_embedding(circuit: Circuit) -> Circuit:
    """Promote every gate to its controlled version on a fresh ancilla wire 0.

    The returned ``(n+1)``-wire circuit starts with H on the ancilla, so on
    ``|0>|0^n>`` it prepares ``(|0>|0^n> + |1>C|0^n>)/sqrt(2)``; outcome
    probabilities are ``Pr[0,0^n] = 1/2``, ``Pr[1,x] = p_x(C)/2`` and
    ``Pr[0,x != 0^n] = 0``.  Controlled gates are direct ``2^(k+1)`` block
    embeddings (identity block plus the original matrix).
    """
    gates = [Gate((0,), HADAMARD)]
    for g in circuit.gates:
        dim = 1 << len(g.wires)
        m = np.eye(2 * dim, dtype=complex)
        m[dim:, dim:] = g.matrix
        gates.append(Gate((0,) + tuple(w + 1 for w in g.wires), m))
    return Circuit(circuit.n + 1, gates)


# ---------------------------------------------------------------------------
# RNG and JSON plumbing


def as_rng(seed) -> np.random.Generator:
    """Pass generators through, spawn a fresh one from anything else."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_rngs(seed, count: int) -> list[np.random.Generator]:
    """Independent child generators, deterministic in (seed, count)."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seq.spawn(count)]


def _matrix_to_pairs(matrix: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in matrix.ravel()]


def _pairs_to_matrix(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs])
    dim = math.isqrt(flat.size)
    if dim * dim != flat.size:
        raise StructureError(f"matrix entry list of length {flat.size} is not square")
    return flat.reshape(dim, dim)


def gate_to_json(gate: Gate) -> dict:
    if gate.params is not None:
        return {"wires": list(gate.wires), "params": [float(p) for p in gate.params]}
    return {"wires": list(gate.wires), "matrix": _matrix_to_pairs(gate.matrix)}


def gate_from_json(obj: dict) -> Gate:
    wires = tuple(obj["wires"])
    if "params" in obj:
        return Gate.from_params(wires, obj["params"])
    return Gate(wires, _pairs_to_matrix(obj["matrix"]))


def circuit_to_json(circuit: Circuit) -> dict:
    arch = None
    if circuit.architecture is not None:
        arch = {"type": "brickwall", "depth": circuit.architecture.depth}
    return {
        "n": circuit.n,
        "gates": [gate_to_json(g) for g in circuit.gates],
        "architecture": arch,
    }


def circuit_from_json(obj: dict) -> Circuit:
    arch = obj.get("architecture")
    architecture = None
    if arch is not None:
        if arch.get("type") != "brickwall":
            raise StructureError(f"unknown architecture type {arch.get('type')!r}")
        architecture = Brickwall(int(arch["depth"]))
    return Circuit(int(obj["n"]), [gate_from_json(g) for g in obj["gates"]], architecture)
