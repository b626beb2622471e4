"""Random circuit ensembles, peaked-instance generators and overlap statistics.

Two generators produce the postselected peaked ensemble:

* :func:`postselect_generate` is the literal accept/reject loop (draw a
  fresh second circuit until the composition is peaked enough).  Its
  acceptance probability is ``(1-delta)^(d-1)`` for Haar factors, so it is
  only usable at tiny ``n`` or tiny ``delta``.
* :func:`conditioned_generate` samples the accepted distribution directly:
  conditioned on the overlap, the second factor splits into the aligned
  column and an independent Haar block on its complement, which can be
  drawn constructively.  This is what makes near-unit peakedness (where
  rejection would need ~``(1-delta)^(1-d)`` trials) reachable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sim import (
    N_MAX_DENSE,
    Brickwall,
    Circuit,
    Gate,
    StructureError,
    adjoint,
    amplitude,
    apply_circuit,
    as_rng,
    bit_index,
    brickwall_layers,
    circuit_from_json,
    circuit_to_json,
    compose,
    full_unitary,
    output_distribution,
    StateVector,
)


class PostselectExhausted(RuntimeError):
    """Rejection sampling ran out of trials.

    The acceptance probability decays like ``(1-delta)^(d-1)``; use the
    bounds module to size ``max_trials`` or switch to
    :func:`conditioned_generate`.
    """

    def __init__(self, trials: int, delta_target: float):
        super().__init__(
            f"no {delta_target}-peaked composition found in {trials} trials"
        )
        self.trials = trials


@dataclass(eq=False)
class PeakedInstance:
    """A circuit together with its peak witness and generation metadata."""

    circuit: Circuit
    peak_string: str
    peakedness: float
    method: str  # postselect | variational | stitched
    seed: object = None
    factors: tuple[Circuit, Circuit] | None = None
    peakedness_is_predicted: bool = False

    def verify(self) -> float:
        """Re-measure ``|<x*|P|0^n>|^2`` by simulation."""
        return abs(amplitude(self.circuit, "0" * self.circuit.n, self.peak_string)) ** 2


@dataclass
class OverlapStats:
    """Ensemble mean of ``|Tr(C^dag C')|^2`` and its normalized form."""

    n: int
    instance_count: int
    mean_trace_sq: float
    mean_hs_norm_sq: float
    std_err: float

    @classmethod
    def from_trace_sq(cls, n: int, values) -> "OverlapStats":
        values = np.asarray(values, dtype=float)
        d = 1 << n
        mean = float(values.mean())
        se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        return cls(n, values.size, mean, mean / d**2, se)


# ---------------------------------------------------------------------------
# Haar sampling


def haar_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-distributed ``dim x dim`` unitary.

    QR of a complex Ginibre matrix with the R-diagonal phases divided out,
    which makes the factorization unique and the Q factor Haar.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = as_rng(seed)
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def haar_state(dim: int, seed=None) -> np.ndarray:
    rng = as_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_brickwall(n: int, depth: int, seed=None) -> Circuit:
    """Brickwall circuit with an independent Haar two-qubit gate per slot."""
    rng = as_rng(seed)
    gates = [
        Gate(pair, haar_unitary(4, rng))
        for layer in brickwall_layers(n, depth)
        for pair in layer
    ]
    return Circuit(n, gates, architecture=Brickwall(depth))


# ---------------------------------------------------------------------------
# peaked-instance generators


def postselect_generate(
    n: int,
    delta_target: float,
    x_star: str | None = None,
    max_trials: int = 1000,
    seed=None,
    depth: int | None = None,
) -> tuple[PeakedInstance, int]:
    """Literal rejection sampler: keep redrawing C' until P = C'^dag C is peaked.

    Returns the instance and the number of trials used.  The scrambling
    factor C is drawn once, C' fresh per trial.  Default depth 4n keeps the
    factors effectively Haar at the small n where rejection is feasible.
    """
    if max_trials < 1:
        raise ValueError("max_trials must be >= 1")
    rng = as_rng(seed)
    x_star = "0" * n if x_star is None else x_star
    ix = bit_index(x_star, n)
    depth = 4 * n if depth is None else depth

    c = random_brickwall(n, depth, rng)
    target_col = apply_circuit(StateVector.basis(n), c).amps
    for trial in range(1, max_trials + 1):
        c_prime = random_brickwall(n, depth, rng)
        phi = apply_circuit(StateVector.basis(n, x_star), c_prime).amps
        peak = abs(np.vdot(phi, target_col)) ** 2
        if peak >= delta_target:
            composed = compose(adjoint(c_prime), c)
            inst = PeakedInstance(
                circuit=composed,
                peak_string=x_star,
                peakedness=float(peak),
                method="postselect",
                seed=seed,
                factors=(c, c_prime),
            )
            return inst, trial
    raise PostselectExhausted(max_trials, delta_target)


def _complete_unitary(column: np.ndarray) -> np.ndarray:
    """Some unitary whose first column equals ``column`` exactly."""
    d = column.shape[0]
    pivot = int(np.argmax(np.abs(column)))
    cols = np.zeros((d, d), dtype=complex)
    cols[:, 0] = column
    j = 1
    for i in range(d):
        if i != pivot:
            cols[i, j] = 1.0
            j += 1
    q, r = np.linalg.qr(cols)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def conditioned_generate(
    n: int,
    delta_target: float,
    x_star: str | None = None,
    seed=None,
    exact_delta: bool = False,
) -> PeakedInstance:
    """Draw from the postselected ensemble without rejection.

    The overlap is sampled from the Beta(1, d-1) law truncated to
    ``[delta_target, 1]`` (or pinned to ``delta_target`` when
    ``exact_delta``), the aligned column is placed explicitly, and the
    remaining action of C' is an independent Haar block on the complement.
    Factors come out as single dense n-wire gates.
    """
    if not 0.0 <= delta_target <= 1.0:
        raise ValueError("delta_target must lie in [0, 1]")
    rng = as_rng(seed)
    d = 1 << n
    x_star = "0" * n if x_star is None else x_star
    ix = bit_index(x_star, n)

    if exact_delta:
        delta = delta_target
    else:
        delta = 1.0 - (1.0 - delta_target) * rng.uniform() ** (1.0 / (d - 1))

    c_mat = haar_unitary(d, rng)
    c_col = c_mat[:, 0]

    w = haar_state(d, rng)
    w -= np.vdot(c_col, w) * c_col
    w /= np.linalg.norm(w)
    phase = np.exp(2j * np.pi * rng.uniform())
    aligned = math.sqrt(delta) * phase * c_col + math.sqrt(1.0 - delta) * w

    cp_mat = _complete_unitary(aligned)
    cp_mat[:, 1:] = cp_mat[:, 1:] @ haar_unitary(d - 1, rng)
    if ix != 0:
        cp_mat[:, [0, ix]] = cp_mat[:, [ix, 0]]

    wires = tuple(range(n))
    c = Circuit(n, [Gate(wires, c_mat)])
    c_prime = Circuit(n, [Gate(wires, cp_mat)])
    p_mat = cp_mat.conj().T @ c_mat
    peak = abs(p_mat[ix, 0]) ** 2
    return PeakedInstance(
        circuit=Circuit(n, [Gate(wires, p_mat)]),
        peak_string=x_star,
        peakedness=float(peak),
        method="postselect",
        seed=seed,
        factors=(c, c_prime),
    )


# ---------------------------------------------------------------------------
# overlap statistics and block decomposition


def hs_overlap(c: Circuit, c_prime: Circuit, n_max_dense: int = N_MAX_DENSE) -> tuple[float, float]:
    """``(|Tr(C^dag C')|^2, |Tr(C^dag C')/d|^2)`` for two same-size circuits."""
    if c.n != c_prime.n:
        raise StructureError("circuits act on different wire counts")
    u = full_unitary(c, n_max_dense)
    u_prime = full_unitary(c_prime, n_max_dense)
    tr = np.trace(u.conj().T @ u_prime)
    d = 1 << c.n
    trace_sq = float(abs(tr) ** 2)
    return trace_sq, trace_sq / d**2


class BlockDecomposition(NamedTuple):
    peak_amp: complex
    block: np.ndarray  # (d-1) x (d-1) restriction to the non-peak subspace
    unitarity_defect: float


def block_extract(circuit: Circuit, x_star: str, n_max_dense: int = N_MAX_DENSE) -> BlockDecomposition:
    """Split ``P`` into peak amplitude and the complement block.

    Rows are aligned by the X-layer permutation that sends ``x*`` to index
    0 (columns already have ``0^n`` at index 0), then the leading row and
    column are stripped.  For an exactly peaked unitary the remaining block
    is itself unitary; the defect ``max|V^dag V - I|`` measures leakage.
    """
    u = full_unitary(circuit, n_max_dense)
    ix = bit_index(x_star, circuit.n)
    perm = np.arange(u.shape[0]) ^ ix
    aligned = u[perm, :]
    peak_amp = complex(aligned[0, 0])
    v = aligned[1:, 1:]
    defect = float(np.abs(v.conj().T @ v - np.eye(v.shape[0])).max())
    return BlockDecomposition(peak_amp, v, defect)


class MomentEstimate(NamedTuple):
    estimate: float
    std_err: float
    exact: float


def exact_state_moment(dim: int, m: int) -> float:
    """``m! (d-1)! / (d+m-1)!``, the Haar value of ``E|<phi|psi>|^(2m)``."""
    val = math.factorial(m)
    for i in range(dim, dim + m):
        val /= i
    return val


def haar_state_moment(dim: int, m: int, trials: int, seed=None) -> MomentEstimate:
    """Monte-Carlo estimate of ``E|<phi|psi>|^(2m)`` over Haar states.

    By unitary invariance the reference state can be fixed to ``e_0``.
    """
    if m not in (1, 2, 3):
        raise ValueError("moment order m must be 1, 2 or 3")
    rng = as_rng(seed)
    z = rng.standard_normal((trials, dim)) + 1j * rng.standard_normal((trials, dim))
    overlap_sq = np.abs(z[:, 0]) ** 2 / np.sum(np.abs(z) ** 2, axis=1)
    vals = overlap_sq**m
    return MomentEstimate(
        float(vals.mean()),
        float(vals.std(ddof=1) / math.sqrt(trials)),
        exact_state_moment(dim, m),
    )


class GateCorrelation(NamedTuple):
    per_gate_overlaps: list[float]
    frobenius_dist: float
    bound: float
    holds: bool
    eps: float
    gate_count: int


def gate_correlation_check(
    c: Circuit, c_prime: Circuit, n_max_dense: int = N_MAX_DENSE
) -> GateCorrelation:
    """Telescoping bound ``|P - I|_F <= M sqrt(d * eps)`` from per-gate overlaps.

    ``rho_m = |Tr(C'_m^dag C_m)|^2 / D_m^2`` is the squared normalized
    overlap of gate pair m (``D_m`` the gate dimension), ``eps = 1 - min
    rho_m``.  Global phases are invisible to ``rho`` but not to ``P - I``,
    so each C' gate is rotated to make its pair trace real nonnegative
    before the product is compared to the identity.
    """
    if c.n != c_prime.n or len(c.gates) != len(c_prime.gates):
        raise StructureError("circuits must share wire count and gate count")
    overlaps = []
    total_phase = 1.0 + 0j
    for g, gp in zip(c.gates, c_prime.gates):
        if g.wires != gp.wires:
            raise StructureError(f"gate wires differ: {g.wires} vs {gp.wires}")
        dim = 1 << len(g.wires)
        tr = np.trace(gp.matrix.conj().T @ g.matrix)
        overlaps.append(float(abs(tr) ** 2 / dim**2))
        if abs(tr) > 0:
            total_phase *= tr / abs(tr)

    d = 1 << c.n
    eps = 1.0 - min(overlaps) if overlaps else 0.0
    m_count = len(c.gates)
    p = full_unitary(c_prime, n_max_dense).conj().T @ full_unitary(c, n_max_dense)
    # aligning each C' gate by its pair-trace phase rotates P by the product phase
    dist = float(np.linalg.norm(np.conj(total_phase) * p - np.eye(d)))
    bound = m_count * math.sqrt(d * eps)
    return GateCorrelation(overlaps, dist, bound, dist <= bound + 1e-9, eps, m_count)


def frobenius_sq_to_identity(p: np.ndarray, peak_phase: complex | None = None) -> float:
    """``|P - I|_F^2``, optionally after removing a known peak phase."""
    d = p.shape[0]
    if peak_phase is not None and abs(peak_phase) > 0:
        p = np.conj(peak_phase / abs(peak_phase)) * p
    return float(np.linalg.norm(p - np.eye(d)) ** 2)


# ---------------------------------------------------------------------------
# anti-concentration


def anticoncentration_check(
    n: int, depth: int, circuit_trials: int, seed=None, alpha: float = 1.0
) -> float:
    """Fraction of (circuit, outcome) pairs with ``p_x >= alpha/2^n``.

    The outcome average is taken exactly over all ``2^n`` strings per
    circuit (the uniform-x expectation), the circuit average empirically.
    """
    if n > 10:
        raise ValueError("anticoncentration check is capped at n <= 10")
    rng = as_rng(seed)
    d = 1 << n
    threshold = alpha / d
    fractions = []
    if depth == 0:
        # identity circuit: only the input string carries weight
        return 1.0 / d
    for _ in range(circuit_trials):
        circ = random_brickwall(n, depth, rng)
        p = output_distribution(circ)
        fractions.append(float(np.mean(p >= threshold)))
    return float(np.mean(fractions))


def haar_anticoncentration_fraction(d: int, alpha: float = 1.0) -> float:
    """Haar baseline ``Pr[p_x >= alpha/d] = (1 - alpha/d)^(d-1)``."""
    return (1.0 - alpha / d) ** (d - 1)


# ---------------------------------------------------------------------------
# JSON


def instance_to_json(inst: PeakedInstance, include_factors: bool = True) -> dict:
    obj = {
        "circuit": circuit_to_json(inst.circuit),
        "peak_string": inst.peak_string,
        "peakedness": inst.peakedness,
        "method": inst.method,
        "seed": inst.seed,
    }
    if inst.peakedness_is_predicted:
        obj["peakedness_is_predicted"] = True
    if include_factors and inst.factors is not None:
        obj["factors"] = {
            "c": circuit_to_json(inst.factors[0]),
            "c_prime": circuit_to_json(inst.factors[1]),
        }
    return obj


def instance_from_json(obj: dict) -> PeakedInstance:
    factors = None
    if obj.get("factors"):
        factors = (
            circuit_from_json(obj["factors"]["c"]),
            circuit_from_json(obj["factors"]["c_prime"]),
        )
    return PeakedInstance(
        circuit=circuit_from_json(obj["circuit"]),
        peak_string=obj["peak_string"],
        peakedness=float(obj["peakedness"]),
        method=obj["method"],
        seed=obj.get("seed"),
        factors=factors,
        peakedness_is_predicted=bool(obj.get("peakedness_is_predicted", False)),
    )
