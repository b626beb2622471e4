"""Closed-form calculators for the analytic bounds of the toolkit.

Counts like ``C(d+k-2, k)`` with ``d = 2^n`` overflow floats almost
immediately, so every quantity is carried as a :class:`LogNumber` (natural
log of a nonnegative magnitude).  All unnamed universal constants default
to 1 and are echoed in every report; each report also labels whether the
value is exact, an upper bound or a lower bound, so a Markov bound cannot
be mistaken for a probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import NamedTuple


@dataclass(frozen=True)
class LogNumber:
    """A nonnegative count or probability stored as its natural log."""

    log: float

    @classmethod
    def from_value(cls, value: float) -> "LogNumber":
        if value < 0:
            raise ValueError("LogNumber encodes nonnegative magnitudes")
        return cls(-math.inf if value == 0 else math.log(value))

    def value(self) -> float:
        """May overflow to inf; the log form is the reliable one."""
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def log10(self) -> float:
        return self.log / math.log(10)

    def __mul__(self, other: "LogNumber") -> "LogNumber":
        return LogNumber(self.log + other.log)

    def __truediv__(self, other: "LogNumber") -> "LogNumber":
        return LogNumber(self.log - other.log)

    def __add__(self, other: "LogNumber") -> "LogNumber":
        if self.log == -math.inf:
            return other
        if other.log == -math.inf:
            return self
        hi, lo = max(self.log, other.log), min(self.log, other.log)
        return LogNumber(hi + math.log1p(math.exp(lo - hi)))

    def __lt__(self, other: "LogNumber") -> bool:
        return self.log < other.log

    def __le__(self, other: "LogNumber") -> bool:
        return self.log <= other.log


@dataclass(frozen=True)
class BoundConstants:
    """Universal constants left symbolic in the source bounds; all default 1."""

    C_cover: float = 1.0
    kappa: float = 1.0
    c_delta: float = 1.0
    alpha_lb: float = 1.0
    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    c4: float = 1.0
    c_tail: float = 1.0

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class BoundReport:
    """A computed bound with enough context to re-derive it by hand."""

    value: LogNumber
    formula: str
    semantics: str  # exact | upper | lower
    inputs: dict
    constants: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "log_value": self.value.log,
            "log10_value": self.value.log10(),
            "formula": self.formula,
            "semantics": self.semantics,
            "inputs": self.inputs,
            "constants": self.constants,
            **({"extra": self.extra} if self.extra else {}),
        }


def log_binomial(n: float, k: float) -> float:
    """``ln C(n, k)`` via log-gamma; exact enough for any desk-scale check."""
    if k < 0 or k > n:
        raise ValueError(f"binomial C({n}, {k}) out of domain")
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


# ---------------------------------------------------------------------------
# acceptance probabilities


def acceptance_haar(d: int, delta: float) -> BoundReport:
    """Probability that a Haar state has overlap >= delta with a fixed state.

    Exactly ``(1-delta)^(d-1)``: the squared overlap is Beta(1, d-1).
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    log = -math.inf if delta == 1.0 else (d - 1) * math.log1p(-delta)
    return BoundReport(
        value=LogNumber(log),
        formula="(1 - delta)^(d - 1)",
        semantics="exact",
        inputs={"d": d, "delta": delta},
    )


def acceptance_kdesign_bound(d: int, delta: float, k: int) -> BoundReport:
    """Markov tail ``k! / (delta d)^k`` for a k-design column.

    An upper bound on the acceptance probability, not the probability
    itself; it can exceed 1 for weak parameters.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    log = math.lgamma(k + 1) - k * (math.log(delta) + math.log(d))
    return BoundReport(
        value=LogNumber(log),
        formula="k! / (delta * d)^k",
        semantics="upper",
        inputs={"d": d, "delta": delta, "k": k},
    )


# ---------------------------------------------------------------------------
# covering / packing / gate-count bounds


def covering_log(n: int, s: int, eps: float, consts: BoundConstants | None = None) -> BoundReport:
    """Covering number of circuits with at most s two-qubit gates.

    ``N(eps) <= (C n^2 s / eps)^(kappa s)``; ``s = 0`` covers the single
    identity point.
    """
    consts = consts or BoundConstants()
    if not 0.0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 1/2]")
    if s < 0:
        raise ValueError("s must be >= 0")
    log = 0.0 if s == 0 else consts.kappa * s * math.log(consts.C_cover * n**2 * s / eps)
    return BoundReport(
        value=LogNumber(log),
        formula="(C n^2 s / eps)^(kappa s)",
        semantics="upper",
        inputs={"n": n, "s": s, "eps": eps},
        constants={"C_cover": consts.C_cover, "kappa": consts.kappa},
    )


def packing_log(d: int, k: int, delta: float, consts: BoundConstants | None = None) -> BoundReport:
    """Packing count ``c_delta * C(d+k-2, k)`` of separated peaked unitaries."""
    consts = consts or BoundConstants()
    if k > d - 1:
        raise ValueError(f"packing bound needs k <= d-1, got k={k}, d={d}")
    if k < 1:
        raise ValueError("k must be >= 1")
    log = math.log(consts.c_delta) + log_binomial(d + k - 2, k)
    return BoundReport(
        value=LogNumber(log),
        formula="c_delta * C(d + k - 2, k)",
        semantics="lower",
        inputs={"d": d, "k": k, "delta": delta},
        constants={"c_delta": consts.c_delta},
    )


def compression_probability_bound(
    n: int, k: int, s: int, eps: float, delta: float, consts: BoundConstants | None = None
) -> BoundReport:
    """Chance a peaked-ensemble draw sits within eps of an s-gate circuit.

    Covering over packing, i.e. ``(C n^2 s/eps)^(kappa s) / (c_delta
    C(d+k-2, k))``; the additive ``O(eps)`` term is reported separately
    rather than folded in.
    """
    consts = consts or BoundConstants()
    cover = covering_log(n, s, eps, consts)
    pack = packing_log(1 << n, k, delta, consts)
    ratio = cover.value / pack.value
    return BoundReport(
        value=ratio,
        formula="(C n^2 s/eps)^(kappa s) / (c_delta C(d+k-2, k))  [+ O(eps) additive]",
        semantics="upper",
        inputs={"n": n, "k": k, "s": s, "eps": eps, "delta": delta},
        constants={"C_cover": consts.C_cover, "kappa": consts.kappa, "c_delta": consts.c_delta},
        extra={"additive_eps_term": eps, "covering_log": cover.value.log, "packing_log": pack.value.log},
    )


class GateCountBound(NamedTuple):
    s_star: int | None  # None when only the log form is representable
    s_star_log: LogNumber
    regime: str  # design | haar
    report: BoundReport


def gate_count_lower_bound(n: int, k: int | None, consts: BoundConstants | None = None) -> GateCountBound:
    """Minimum two-qubit gates to approximate a typical peaked draw.

    ``k`` given: design regime, ``floor(alpha_lb * k n / ln(k n))``.
    ``k=None``: Haar regime, ``floor(c4 * 4^n)`` (log form for large n).
    """
    consts = consts or BoundConstants()
    if k is None:
        regime = "haar"
        log = math.log(consts.c4) + n * math.log(4)
        formula = "c4 * 4^n"
        inputs: dict = {"n": n}
        constants = {"c4": consts.c4}
    else:
        if k * n < 3:
            raise ValueError("need k*n >= 3 so that ln(k n) > 0")
        regime = "design"
        val = consts.alpha_lb * k * n / math.log(k * n)
        log = math.log(val)
        formula = "alpha_lb * k n / ln(k n)"
        inputs = {"n": n, "k": k, "k_is_log2_n": k == round(math.log2(n)) if n > 1 else False}
        constants = {"alpha_lb": consts.alpha_lb}
    s_log = LogNumber(log)
    s_int = None
    if log < 60 * math.log(2):
        s_int = int(math.floor(s_log.value()))
    report = BoundReport(
        value=s_log, formula=formula, semantics="lower", inputs=inputs, constants=constants
    )
    return GateCountBound(s_int, s_log, regime, report)


# ---------------------------------------------------------------------------
# peak-to-fidelity


class FidelityBound(NamedTuple):
    f_min: float
    relaxation: float  # upper bound on 1 - f_min: 4(1-delta) + 2 eps_add
    report: BoundReport


def peak_to_fidelity(delta: float, eps_add: float) -> FidelityBound:
    """Worst-case fidelity given a peak estimate within ``eps_add`` of delta.

    ``F_min = (sqrt(delta (delta - eps_add)) - sqrt((1-delta)(1-delta+eps_add)))^2``
    with the relaxation ``1 - F_min <= 4(1-delta) + 2 eps_add``.
    """
    if not 0.0 <= eps_add <= delta <= 1.0:
        raise ValueError("need 0 <= eps_add <= delta <= 1")
    a = math.sqrt(delta * (delta - eps_add))
    b = math.sqrt((1.0 - delta) * (1.0 - delta + eps_add))
    f_min = (a - b) ** 2
    relax = 4.0 * (1.0 - delta) + 2.0 * eps_add
    report = BoundReport(
        value=LogNumber.from_value(f_min),
        formula="(sqrt(delta(delta-eps)) - sqrt((1-delta)(1-delta+eps)))^2",
        semantics="lower",
        inputs={"delta": delta, "eps_add": eps_add},
        extra={"one_minus_f_relaxation": relax},
    )
    return FidelityBound(f_min, relax, report)
