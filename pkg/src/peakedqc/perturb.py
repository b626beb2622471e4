"""Gate-wise geodesic interpolation between two circuits and its polynomial
structure.

For same-architecture circuits with gates ``G_j`` (base) and ``G*_j``
(target), each gate moves along ``G_j(theta) = G_j exp(-i theta H_j)``
with the Hermitian generator ``H_j = i log(G_j^{-1} G*_j)`` (principal
branch), so the path is exactly the base at ``theta = 0`` and exactly the
target at ``theta_end = 1``.

Replacing each exponential by its degree-K Taylor polynomial makes every
output amplitude a polynomial of degree ``m*K`` in theta (so probabilities
have degree ``2mK``), which is what lets peak weights measured at small
theta be extrapolated to the far endpoint.  Truncated gates are not
unitary; they are tagged accordingly and simulated as plain matrices.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
import scipy.linalg

from .sim import (
    N_MAX_DENSE,
    Circuit,
    Gate,
    StructureError,
    amplitude,
    bit_index,
    output_distribution,
)

BRANCH_CUT_TOL = 1e-12
COND_LIMIT = 1e10


class IllConditionedNodes(ValueError):
    """Node set too ill-conditioned for a trustworthy fit.

    Use :func:`chebyshev_nodes` over the sampling window instead.
    """


def _unitary_log_generator(u: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigenphases and frame of a unitary: ``u = Z diag(exp(i phi)) Z^dag``.

    Schur on a normal matrix yields a unitary frame even with degenerate
    eigenvalues (plain eig does not).  Phases take the principal branch
    ``(-pi, pi]``; an eigenvalue within ``BRANCH_CUT_TOL`` of -1 sits on
    the cut, which is reported but resolved deterministically to ``+pi``.
    """
    t, z = scipy.linalg.schur(u, output="complex")
    phases = np.angle(np.diagonal(t))
    if np.any(np.pi - np.abs(phases) < BRANCH_CUT_TOL):
        warnings.warn(
            "matrix-log eigenvalue on the branch cut (at -1); using phase +pi",
            RuntimeWarning,
        )
    return phases, z, t


@dataclass(eq=False)
class PerturbationPath:
    """Per-gate geodesic from ``base`` to ``target`` (same architecture)."""

    base: Circuit
    target: Circuit
    generators: list[np.ndarray]  # Hermitian H_j
    theta_end: float
    op_norms: np.ndarray
    _frames: list[tuple[np.ndarray, np.ndarray]] = field(repr=False, default_factory=list)

    @property
    def gate_count(self) -> int:
        return len(self.generators)


def make_path(base: Circuit, target: Circuit) -> PerturbationPath:
    """Build the interpolation path; ``materialize(path, 1.0)`` hits the target."""
    if base.n != target.n or len(base.gates) != len(target.gates):
        raise StructureError("base and target must share wire count and gate count")
    generators = []
    frames = []
    norms = []
    for g, gs in zip(base.gates, target.gates):
        if g.wires != gs.wires:
            raise StructureError(f"gate wires differ along the path: {g.wires} vs {gs.wires}")
        u = g.matrix.conj().T @ gs.matrix  # G^{-1} G*
        phases, z, _ = _unitary_log_generator(u)
        h = (z * (-phases)) @ z.conj().T  # H = i log(U), Hermitian
        h = 0.5 * (h + h.conj().T)
        generators.append(h)
        frames.append((phases, z))
        norms.append(float(np.abs(phases).max()) if phases.size else 0.0)
    return PerturbationPath(base, target, generators, 1.0, np.array(norms), frames)


def materialize(path: PerturbationPath, theta: float) -> Circuit:
    """Circuit with gates ``G_j exp(-i theta H_j)``; exact unitaries."""
    if theta == 0.0:
        return Circuit(path.base.n, list(path.base.gates))
    gates = []
    for g, (phases, z) in zip(path.base.gates, path._frames):
        # exp(-i theta H) = Z diag(exp(i theta phi)) Z^dag
        step = (z * np.exp(1j * theta * phases)) @ z.conj().T
        gates.append(Gate(g.wires, g.matrix @ step))
    return Circuit(path.base.n, gates)


@dataclass(eq=False)
class TruncatedPath:
    """A path whose gate exponentials are truncated at Taylor order K."""

    path: PerturbationPath
    K: int

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("truncation order K must be >= 0")

    @property
    def gate_count(self) -> int:
        return self.path.gate_count

    @property
    def amp_degree(self) -> int:
        """Amplitudes are polynomials of this degree in theta."""
        return self.path.gate_count * self.K


class TruncatedMaterialization(NamedTuple):
    circuit: Circuit
    per_gate_error_bound: np.ndarray  # (theta |H_j|)^(K+1) / (K+1)!


def materialize_truncated(tpath: TruncatedPath, theta: float) -> TruncatedMaterialization:
    """Gates ``G_j sum_{i<=K} (-i theta H_j)^i / i!`` (generally non-unitary).

    At ``theta = 0`` this returns the base gates exactly.  The per-gate
    Taylor remainder scale is reported alongside.
    """
    path, K = tpath.path, tpath.K
    bounds = (theta * path.op_norms) ** (K + 1) / math.factorial(K + 1)
    if theta == 0.0:
        return TruncatedMaterialization(Circuit(path.base.n, list(path.base.gates)), bounds)
    gates = []
    for g, h in zip(path.base.gates, path.generators):
        dim = h.shape[0]
        acc = np.eye(dim, dtype=complex)
        term = np.eye(dim, dtype=complex)
        for i in range(1, K + 1):
            term = (term @ h) * (-1j * theta / i)
            acc = acc + term
        gates.append(Gate(g.wires, g.matrix @ acc, unitary=False))
    return TruncatedMaterialization(Circuit(path.base.n, gates), bounds)


class TVCheck(NamedTuple):
    tv_distance: float  # L1 distance between the two outcome distributions
    bound: float
    holds: bool
    peakedness_base: float
    peakedness_perturbed: float
    peak_drop: float


def tv_peakedness_check(
    path: PerturbationPath,
    theta: float,
    x_star: str,
    quad_const: float = 1.0,
    n_max_dense: int = N_MAX_DENSE,
) -> TVCheck:
    """Exact output-distribution distance against ``2 m theta max|H| + c m theta^2``.

    The linear term alone is already a valid bound (each perturbed gate
    moves the operator by at most ``theta |H_j|``); the quadratic term is
    reported slack, constant configurable.
    """
    if path.base.n > n_max_dense:
        raise StructureError(f"exact distributions need n <= {n_max_dense}")
    p = output_distribution(path.base)
    q = output_distribution(materialize(path, theta))
    tv = float(np.abs(p - q).sum())
    m = path.gate_count
    max_norm = float(path.op_norms.max()) if m else 0.0
    bound = 2.0 * m * abs(theta) * max_norm + quad_const * m * theta**2
    ix = bit_index(x_star, path.base.n)
    return TVCheck(
        tv_distance=tv,
        bound=bound,
        holds=tv <= bound + 1e-12,
        peakedness_base=float(p[ix]),
        peakedness_perturbed=float(q[ix]),
        peak_drop=float(p[ix] - q[ix]),
    )


# ---------------------------------------------------------------------------
# polynomial structure


def chebyshev_nodes(lo: float, hi: float, count: int) -> np.ndarray:
    """Chebyshev roots mapped to [lo, hi], ascending."""
    k = np.arange(count)
    base = np.cos((2 * k + 1) * np.pi / (2 * count))
    return np.sort(0.5 * (hi - lo) * base + 0.5 * (hi + lo))


@dataclass(eq=False)
class PolynomialFit:
    """Fitted amplitude polynomial and the derived peak-weight polynomial.

    The amplitude ``a(theta)`` has degree ``mK`` with complex coefficients;
    the peak weight is ``|a|^2``, the real polynomial of degree ``2mK``
    whose coefficients are reported.  Evaluation goes through the
    amplitude in the scaled variable, which is the numerically stable
    route, in particular for extrapolation far outside the node window.
    """

    amp_coeffs_scaled: np.ndarray  # ascending, in u = (theta - shift) / scale
    shift: float
    scale: float
    p0_coeffs: np.ndarray  # ascending, in plain theta
    condition: float
    degree: int  # of the peak-weight polynomial (2 m K)

    def amplitude_at(self, theta) -> np.ndarray:
        u = (np.asarray(theta, dtype=float) - self.shift) / self.scale
        return np.polynomial.polynomial.polyval(u, self.amp_coeffs_scaled)

    def p0_at(self, theta):
        val = np.abs(self.amplitude_at(theta)) ** 2
        return float(val) if np.ndim(theta) == 0 else val


def amplitude_polynomial(
    tpath: TruncatedPath, x_star: str, nodes: Sequence[float]
) -> PolynomialFit:
    """Fit the peak amplitude of the truncated path as a polynomial in theta.

    Needs at least ``2mK + 1`` distinct nodes.  The amplitude values are
    fitted by least squares in an affinely scaled variable; the
    peak-weight coefficients are the self-convolution of the amplitude
    coefficients.  Raises :class:`IllConditionedNodes` when the scaled
    Vandermonde is numerically rank-deficient.
    """
    nodes = np.asarray(nodes, dtype=float)
    deg_amp = tpath.amp_degree
    deg_p0 = 2 * deg_amp
    if nodes.size < deg_p0 + 1:
        raise ValueError(f"need at least {deg_p0 + 1} nodes, got {nodes.size}")
    if np.unique(nodes).size != nodes.size:
        raise ValueError("interpolation nodes must be distinct")

    n_bits = "0" * tpath.path.base.n
    values = np.array(
        [amplitude(materialize_truncated(tpath, t).circuit, n_bits, x_star) for t in nodes]
    )

    shift = 0.5 * (nodes.max() + nodes.min())
    scale = 0.5 * (nodes.max() - nodes.min())
    if scale == 0.0:
        raise ValueError("nodes span an empty interval")
    u = (nodes - shift) / scale
    vand = np.polynomial.polynomial.polyvander(u, deg_amp)
    condition = float(np.linalg.cond(vand))
    if condition > COND_LIMIT:
        raise IllConditionedNodes(
            f"Vandermonde condition {condition:.2e} exceeds {COND_LIMIT:.0e}; "
            "use chebyshev_nodes over the sampling window"
        )
    coeffs, *_ = np.linalg.lstsq(vand, values, rcond=None)

    # |a(theta)|^2 in the plain theta basis: rescale, then self-convolve
    amp_theta = _rescale_poly(coeffs, shift, scale)
    p0_coeffs = np.convolve(amp_theta, amp_theta.conj()).real
    return PolynomialFit(coeffs, shift, scale, p0_coeffs, condition, deg_p0)


def _rescale_poly(coeffs_u: np.ndarray, shift: float, scale: float) -> np.ndarray:
    """Coefficients in theta for a polynomial given in u = (theta-shift)/scale."""
    poly = np.polynomial.polynomial.Polynomial([0.0])
    base = np.polynomial.polynomial.Polynomial([-shift / scale, 1.0 / scale])
    for c in reversed(coeffs_u):
        poly = poly * base + c
    return poly.coef


# ---------------------------------------------------------------------------
# JSON


def path_to_json(path: PerturbationPath) -> dict:
    from .sim import _matrix_to_pairs, circuit_to_json

    return {
        "base": circuit_to_json(path.base),
        "target": circuit_to_json(path.target),
        "theta_end": path.theta_end,
        "generators": [_matrix_to_pairs(h) for h in path.generators],
        "op_norms": [float(x) for x in path.op_norms],
    }


def path_from_json(obj: dict) -> PerturbationPath:
    """Rebuild a path; generators are recomputed from the circuits so the
    cached eigenframes (needed by materialize) stay consistent, then checked
    against the stored matrices."""
    from .sim import _pairs_to_matrix, circuit_from_json

    path = make_path(circuit_from_json(obj["base"]), circuit_from_json(obj["target"]))
    for h, stored in zip(path.generators, obj["generators"]):
        if np.abs(h - _pairs_to_matrix(stored)).max() > 1e-8:
            raise StructureError("stored generators do not match the circuit pair")
    return path
