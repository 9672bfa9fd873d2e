"""Inequality reports, the verdict rule and stable serialization."""

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .integrate import IntegralEstimate

__all__ = ["InequalityReport", "decide", "make_report", "fmt_float", "HOLDS", "VIOLATED",
           "INCONCLUSIVE", "QUAD_TOL", "to_json"]

HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"
QUAD_TOL = 1e-6
SIGMAS = 3.0


def decide(lhs, rhs, tol):
    """Verdict for ``lhs <= rhs``.

    Holds iff ``lhs <= rhs (1 + tol) + 3 (err_l + err_r)``.  An infinite right
    side makes the inequality vacuous (holds); NaN on either side is
    inconclusive.  Returns ``(verdict, note)``.
    """
    lv, rv = lhs.value, rhs.value
    if math.isnan(lv) or math.isnan(rv):
        return INCONCLUSIVE, "nan"
    if rv == math.inf:
        return HOLDS, "vacuous: right side is infinite"
    if lv == math.inf:
        return VIOLATED, "left side is infinite"
    slack = SIGMAS * (lhs.abs_error + rhs.abs_error)
    bound = rv * (1.0 + tol) if rv >= 0 else rv * (1.0 - tol)
    return (HOLDS if lv <= bound + slack else VIOLATED), None


def default_tol(*estimates):
    return 0.0 if any(e.method in ("monte_carlo", "mixed") for e in estimates) else QUAD_TOL


def _method(lhs, rhs):
    methods = {lhs.method, rhs.method} - {"exact"}
    if not methods:
        return "exact"
    if len(methods) == 1:
        return methods.pop()
    return "mixed"


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one check of ``lhs <= rhs``."""

    inequality_id: str
    params: dict
    g_name: str
    lhs: IntegralEstimate
    rhs: IntegralEstimate
    constant_used: float
    tolerance: float
    verdict: str
    diagnostics: dict = field(default_factory=dict)
    runtime_ms: Optional[float] = None

    @property
    def ratio(self):
        lv, rv = self.lhs.value, self.rhs.value
        if rv == 0:
            return 0.0 if lv == 0 else math.copysign(math.inf, lv)
        if math.isinf(rv):
            return 0.0 if math.isfinite(lv) else math.nan
        return lv / rv

    @property
    def method(self):
        return _method(self.lhs, self.rhs)

    @property
    def seed(self):
        for e in (self.lhs, self.rhs):
            if e.seed is not None:
                return e.seed
        return None

    @property
    def samples(self):
        return max(self.lhs.samples, self.rhs.samples)

    def with_runtime(self, ms):
        return replace(self, runtime_ms=ms)

    def with_tolerance(self, tol):
        """The same report judged with another relative tolerance."""
        verdict, _ = decide(self.lhs, self.rhs, float(tol))
        return replace(self, tolerance=float(tol), verdict=verdict)

    def to_dict(self):
        """The fixed JSON schema."""
        return {
            "id": self.inequality_id,
            "params": dict(self.params),
            "g": self.g_name,
            "method": self.method,
            "lhs": {"value": self.lhs.value, "err": self.lhs.abs_error},
            "rhs": {"value": self.rhs.value, "err": self.rhs.abs_error},
            "constant": self.constant_used,
            "ratio": self.ratio,
            "tol": self.tolerance,
            "seed": self.seed,
            "samples": self.samples,
            "verdict": self.verdict,
            "runtime_ms": self.runtime_ms,
        }


def make_report(inequality_id, params, g_name, lhs, rhs, constant, tol=None, verdict=None, **diag):
    """Assemble a report, applying the verdict rule unless ``verdict`` is forced."""
    tol = default_tol(lhs, rhs) if tol is None else float(tol)
    note = None
    if verdict is None:
        verdict, note = decide(lhs, rhs, tol)
    if note:
        diag.setdefault("note", note)
    for side, est in (("lhs", lhs), ("rhs", rhs)):
        for k, v in est.diagnostics.items():
            diag.setdefault(f"{side}.{k}", v)
    return InequalityReport(inequality_id, dict(params), g_name, lhs, rhs, float(constant),
                            tol, verdict, diag)


def fmt_float(x):
    """17 significant digits (round-trip exact); non-finite values as strings."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _json_token(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        tok = fmt_float(obj)
        if not math.isfinite(float(obj)):
            return json.dumps(tok)
        return tok if any(c in tok for c in ".en") else tok + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json_token(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + _json_token(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(obj, indent=2):
    """JSON text with every float written to 17 significant digits.

    Key order is preserved, so equal inputs give byte-identical output.
    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    return _json_token(obj, indent, 0) + "\n"
