"""Closed-form probability/threshold expressions used by the campaign runner.

Every expression with fully specified numeric constants is evaluated; bounds
that contain an unspecified universal constant are returned with a
not-computable value and only their structural exponent reported. A raw
probability expression >= 1, or a gap lower bound <= 0, marks the report
vacuous: such bounds are never used for pass/fail, only recorded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError

__all__ = ["BoundReport", "paper_bounds", "BOUND_KINDS"]


@dataclass(frozen=True)
class BoundReport:
    bound_name: str
    value: float | None  # None = not computable (unknown universal constant)
    probability_bound: float | None  # failure probability, clamped to [0,1]
    vacuous: bool
    computable: bool
    formula_inputs: dict = field(default_factory=dict)


def _report(name, value, raw_prob, inputs, lower_bound_value=False):
    vacuous = False
    prob = None
    if raw_prob is not None:
        vacuous = vacuous or raw_prob >= 1.0
        prob = min(max(float(raw_prob), 0.0), 1.0)
    if value is not None and lower_bound_value and value <= 0.0:
        vacuous = True
    return BoundReport(
        bound_name=name,
        value=None if value is None else float(value),
        probability_bound=prob,
        vacuous=vacuous,
        computable=value is not None,
        formula_inputs=dict(inputs),
    )


def _tau(d: int, D: int) -> float:
    """Exponent tau with d = D^{2 tau} (log ratio form)."""
    if D <= 1:
        return math.inf
    return math.log(d) / (2.0 * math.log(D))


def paper_bounds(kind: str, **params) -> BoundReport:
    """Evaluate the named closed-form bound at the given parameters."""
    p = params
    if kind == "wishart":
        n, s = p["n"], p["s"]
        return _report(kind, 6.0 * math.sqrt(n / s), 2.0 * math.exp(-n / 4.0), p)
    if kind == "mps_gap":
        d, D = p["d"], p["D"]
        return _report(
            kind, 1.0 - 95.0 / math.sqrt(d), 10.0 * math.exp(-D / 72.0), p, lower_bound_value=True
        )
    if kind == "mps_cp":
        d, D = p["d"], p["D"]
        return _report(kind, 6.0 / math.sqrt(d), 2.0 * math.exp(-D / 4.0), p)
    if kind == "mps_deflated":
        # bound on the expectation, no probability statement
        return _report(kind, 40.0 / math.sqrt(p["d"]), None, p)
    if kind == "trace_t":
        d, eps = p["d"], p["eps"]
        return _report(kind, (1.0 + eps) ** 2, math.exp(-d * eps * eps), p)
    if kind == "trace_t_n":
        d, D, N, eps = p["d"], p["D"], p["N"], p["eps"]
        return _report(
            kind,
            (1.0 + 4.0 * D * eps) ** (2 * N),
            2.0 * N * (D + 1) ** N * math.exp(-d * eps * eps),
            p,
        )
    if kind == "peps_overlap":
        d, D, N = p["d"], p["D"], p["N"]
        value = 42.0 * N / math.sqrt(d) + D * D * (84.0 / math.sqrt(d)) ** N
        return _report(kind, value, 6.0 * math.exp(-(D**3) / 72.0), p)
    if kind == "peps_cp":
        d, D, N = p["d"], p["D"], p["N"]
        rd = math.sqrt(d)
        value = (1.0 + 6.0 / rd) ** N * 6.0 / rd + (1.0 + 28.0 * D / rd) ** N * 22.0 / rd
        # failure probability involves an unspecified constant in the exponent
        return _report(kind, value, None, p)
    if kind == "peps_cp_lower":
        d, D, N = p["d"], p["D"], p["N"]
        value = 1.0 - (1.0 + 28.0 * D / math.sqrt(d)) ** N * 28.0 / math.sqrt(d)
        return _report(kind, value, None, p, lower_bound_value=True)
    if kind in ("gap_h", "p_pi", "pi_commute"):
        # C / D^{tau - 5} with unknown C: structural exponent only
        d, D = p["d"], p["D"]
        inputs = dict(p)
        inputs["exponent"] = _tau(d, D) - 5.0
        return _report(kind, None, None, inputs)
    if kind in ("peps_gap", "gap_h_peps"):
        # unknown universal constants c, C in eta(N, d, D)
        return _report(kind, None, None, p)
    raise InvalidParameterError(f"unknown bound kind {kind!r}")


BOUND_KINDS = (
    "wishart",
    "mps_gap",
    "mps_cp",
    "mps_deflated",
    "trace_t",
    "trace_t_n",
    "peps_overlap",
    "peps_cp",
    "peps_cp_lower",
    "gap_h",
    "p_pi",
    "pi_commute",
    "peps_gap",
    "gap_h_peps",
)
