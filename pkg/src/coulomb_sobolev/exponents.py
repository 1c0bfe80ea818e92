"""Exponent algebra and validity regimes for the Coulomb-Sobolev inequalities.

Everything here is closed-form arithmetic on the parameters (d, s, alpha, q, p).
When every input is an ``int`` or ``Fraction`` the results are exact rationals,
otherwise they are floats and comparisons use an absolute-relative tolerance of
``TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from fractions import Fraction
from numbers import Real
from typing import Optional

TOL = 1e-12


class ParameterError(ValueError):
    """Raised when parameters violate the hypotheses of an operation."""


def _is_exact(*xs) -> bool:
    return all(isinstance(x, (int, Fraction)) and not isinstance(x, bool) for x in xs)


def _cmp(a, b) -> int:
    """Sign of a - b, exact for rationals, tolerant for floats."""
    if _is_exact(a, b):
        return (a > b) - (a < b)
    a, b = float(a), float(b)
    if math.isinf(a) or math.isinf(b):
        return (a > b) - (a < b)
    if abs(a - b) <= TOL * max(1.0, abs(a), abs(b)):
        return 0
    return 1 if a > b else -1


def as_number(x):
    """Coerce user input to int, Fraction or float.

    Strings are parsed as exact rationals ("0.25", "18/7"), which lets decimal
    command-line input hit the exact CriticalQ line.
    """
    if isinstance(x, bool):
        raise ParameterError("boolean is not a number")
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, str):
        try:
            v = Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            try:
                return float(x)
            except ValueError as e:
                raise ParameterError(f"not a number: {x!r}") from e
        return v.numerator if v.denominator == 1 else v
    if isinstance(x, Real):
        return float(x)
    raise ParameterError(f"not a number: {x!r}")


def to_float(x) -> float:
    return float(x) if x is not None else math.nan


def _pos(x):
    return x if _cmp(x, 0) > 0 else 0


@dataclass(frozen=True)
class ParamSet:
    d: int
    s: Real
    alpha: Real
    q: Real
    p: Optional[Real] = None

    def __post_init__(self):
        for name in ("s", "alpha", "q", "p"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, as_number(v))
        d = self.d
        if isinstance(d, float) and d.is_integer():
            d = int(d)
            object.__setattr__(self, "d", d)
        if not isinstance(d, int) or isinstance(d, bool) or d < 1:
            raise ParameterError("dimension d must be an integer >= 1")
        if _cmp(self.s, 0) <= 0:
            raise ParameterError("order s must be > 0")
        if _cmp(self.alpha, 0) <= 0 or _cmp(self.alpha, d) >= 0:
            raise ParameterError("alpha must satisfy 0 < alpha < d")
        if _cmp(self.q, 1) < 0:
            raise ParameterError("q must be >= 1")
        if self.p is not None and _cmp(self.p, 1) < 0:
            raise ParameterError("p must be >= 1")

    @property
    def is_critical_q(self) -> bool:
        return _cmp(self.q * (self.d - 2 * self.s), self.d + self.alpha) == 0

    @property
    def exact(self) -> bool:
        vals = [self.s, self.alpha, self.q] + ([self.p] if self.p is not None else [])
        return _is_exact(*vals)

    def with_p(self, p) -> "ParamSet":
        return ParamSet(self.d, self.s, self.alpha, self.q, p)

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items()}


def _jsonable(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def exact_str(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


class Regime(str, Enum):
    SUPERCRITICAL_S = "SupercriticalS"
    BELOW_CRIT_Q = "BelowCritQ"
    ABOVE_CRIT_Q = "AboveCritQ"
    CRITICAL_Q = "CriticalQ"


@dataclass(frozen=True)
class Interval:
    """Interval of admissible p with explicit endpoint openness."""
    lo: Real
    hi: Real
    lo_closed: bool
    hi_closed: bool

    def contains(self, p) -> bool:
        c_lo = _cmp(p, self.lo)
        c_hi = _cmp(p, self.hi) if not _is_inf(self.hi) else -1
        ok_lo = c_lo > 0 or (c_lo == 0 and self.lo_closed)
        ok_hi = c_hi < 0 or (c_hi == 0 and self.hi_closed)
        return ok_lo and ok_hi

    def interior(self, p) -> bool:
        c_hi = _cmp(p, self.hi) if not _is_inf(self.hi) else -1
        return _cmp(p, self.lo) > 0 and c_hi < 0

    def is_endpoint(self, p) -> bool:
        return _cmp(p, self.lo) == 0 or (not _is_inf(self.hi) and _cmp(p, self.hi) == 0)

    def __str__(self):
        hi = "inf" if _is_inf(self.hi) else exact_str(self.hi)
        return ("[" if self.lo_closed else "(") + exact_str(self.lo) + ", " + hi + \
            ("]" if self.hi_closed else ")")

    def to_dict(self) -> dict:
        return {
            "lo": _jsonable(self.lo),
            "hi": _jsonable(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
            "text": str(self),
        }


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


# ---------------------------------------------------------------- exponents

def endpoint_exponent(params: ParamSet):
    """The interpolation endpoint 2(2qs+alpha)/(2s+alpha)."""
    s, a, q = params.s, params.alpha, params.q
    return _norm(2 * (2 * q * s + a) / _den(2 * s + a))


def _den(x):
    # keep rationals rational; promote ints so that 6/2 stays exact
    return Fraction(x) if isinstance(x, int) else x


def sobolev_exponent(params: ParamSet):
    d, s = params.d, params.s
    if _cmp(2 * s, d) >= 0:
        return math.inf
    return _norm(2 * d / _den(d - 2 * s))


def gn_exponents(params: ParamSet):
    """Exponents (seminorm, Coulomb) of the scaling invariant inequality at p."""
    if params.p is None:
        raise ParameterError("gn_exponents needs p")
    if params.is_critical_q:
        raise ParameterError(
            "endpoint case q(d-2s)=d+alpha; use refined_sobolev_exponents")
    d, s, a, q, p = params.d, params.s, params.alpha, params.q, params.p
    den = _den(p * (d + a - q * (d - 2 * s)))
    beta = (p * (d + a) - 2 * d * q) / den
    gamma = (2 * d - p * (d - 2 * s)) / (2 * den)
    return _norm(beta), _norm(gamma)


def _norm(x):
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def refined_sobolev_exponents(params: ParamSet, epsilon=0):
    """Exponents of the refined Sobolev inequality and its epsilon family."""
    d, s, a = params.d, params.s, params.alpha
    epsilon = as_number(epsilon)
    if _cmp(2 * s, d) >= 0:
        raise ParameterError("refined Sobolev requires 0 < s < d/2")
    eps_max = s * (d - 2 * s) / _den(d * (2 * s + a))
    if _cmp(epsilon, 0) < 0 or _cmp(epsilon, eps_max) > 0:
        raise ParameterError(
            f"epsilon must satisfy 0 <= epsilon <= s(d-2s)/(d(2s+alpha)) = {float(eps_max):.6g}")
    beta = a * (d - 2 * s) / _den(d * (2 * s + a)) + epsilon * 2 * (a + d) / _den(d - 2 * s)
    gamma = eps_max - epsilon
    return _norm(beta), _norm(gamma)


def refined_sobolev_q(d, s, alpha):
    return (d + as_number(alpha)) / _den(d - 2 * as_number(s))


def refined_epsilon_max(params: ParamSet):
    d, s, a = params.d, params.s, params.alpha
    return s * (d - 2 * s) / _den(d * (2 * s + a))


def p_rad(params: ParamSet):
    """Radial threshold exponent (needs d >= 2)."""
    d, s, a, q = params.d, params.s, params.alpha, params.q
    if d < 2:
        raise ParameterError("radial theory requires d >= 2")
    val = q + ((2 * s - 1) * q + 2) * (d - a) / _den(2 * s * (d + a - 2) + d - a)
    return _norm(val)


def classify(params: ParamSet) -> Regime:
    d, s, a, q = params.d, params.s, params.alpha, params.q
    if _cmp(2 * s, d) >= 0:
        return Regime.SUPERCRITICAL_S
    c = _cmp(q * (d - 2 * s), d + a)
    if c == 0:
        return Regime.CRITICAL_Q
    return Regime.BELOW_CRIT_Q if c < 0 else Regime.ABOVE_CRIT_Q


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    p_interval: Interval
    p_interval_radial: Optional[Interval]
    radial_improves: bool
    note: str

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "p_interval": self.p_interval.to_dict(),
            "p_interval_radial": None if self.p_interval_radial is None
            else self.p_interval_radial.to_dict(),
            "radial_improves": self.radial_improves,
            "note": self.note,
        }


def classify_regime(params: ParamSet) -> RegimeReport:
    d, s, a, q = params.d, params.s, params.alpha, params.q
    regime = classify(params)
    p_end = endpoint_exponent(params)
    p_sob = sobolev_exponent(params)
    if regime is Regime.SUPERCRITICAL_S:
        nonrad = Interval(p_end, math.inf, True, False)
    elif regime is Regime.BELOW_CRIT_Q:
        nonrad = Interval(p_end, p_sob, True, True)
    elif regime is Regime.ABOVE_CRIT_Q:
        nonrad = Interval(p_sob, p_end, True, True)
    else:
        # exponents degenerate; only the refined Sobolev inequality at p_sob survives
        nonrad = Interval(p_sob, p_sob, True, True)

    improves = d >= 2 and _cmp(a, 1) > 0
    if not improves or regime is Regime.CRITICAL_Q:
        note = ("alpha <= 1: radial interval equals the nonradial one"
                if regime is not Regime.CRITICAL_Q
                else "CriticalQ: q(d-2s)=d+alpha, refined Sobolev endpoint only")
        return RegimeReport(regime, nonrad, nonrad, False, note)

    pr = p_rad(params)
    if regime is Regime.SUPERCRITICAL_S:
        rad = Interval(pr, math.inf, False, False)
        note = "radial: p > p_rad"
    elif regime is Regime.BELOW_CRIT_Q:
        rad = Interval(pr, p_sob, False, True)
        note = "radial: p in (p_rad, p_sob]"
    elif _cmp(s, Fraction(1, 2)) < 0 and _cmp(1 / _den(q), (1 - 2 * s) / 2) == 0:
        rad = Interval(p_sob, q, True, True)
        note = "radial: 1/q = (1-2s)/2, closed at p_rad = q"
    else:
        rad = Interval(p_sob, pr, True, False)
        note = "radial: p in [p_sob, p_rad)"
    return RegimeReport(regime, nonrad, rad, True, note)


@dataclass(frozen=True)
class ExponentBundle:
    params: ParamSet
    p_endpoint: Real
    p_sobolev: Real
    p_rad: Optional[Real]
    beta_gn: Optional[Real]
    gamma_gn: Optional[Real]
    regime: Regime
    p_interval: Interval
    p_interval_radial: Optional[Interval]
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out = {
            "params": self.params.to_dict(),
            "regime": self.regime.value,
            "p_endpoint": _jsonable(self.p_endpoint),
            "p_endpoint_exact": exact_str(self.p_endpoint) if self.params.exact else None,
            "p_sobolev": _jsonable(self.p_sobolev),
            "p_sobolev_exact": (exact_str(self.p_sobolev)
                                if self.params.exact and not _is_inf(self.p_sobolev) else None),
            "p_rad": None if self.p_rad is None else _jsonable(self.p_rad),
            "p_rad_exact": (exact_str(self.p_rad)
                            if self.p_rad is not None and self.params.exact else None),
            "beta_gn": None if self.beta_gn is None else _jsonable(self.beta_gn),
            "gamma_gn": None if self.gamma_gn is None else _jsonable(self.gamma_gn),
            "p_interval": self.p_interval.to_dict(),
            "p_interval_radial": None if self.p_interval_radial is None
            else self.p_interval_radial.to_dict(),
            "warnings": list(self.warnings),
        }
        return out


def exponent_bundle(params: ParamSet) -> ExponentBundle:
    rep = classify_regime(params)
    warnings = []
    if rep.regime is Regime.CRITICAL_Q:
        warnings.append("CriticalQ: q(d-2s)=d+alpha; Gagliardo-Nirenberg exponents "
                        "undefined, refined Sobolev exponents apply")
    pr = p_rad(params) if params.d >= 2 else None
    beta = gamma = None
    if params.p is not None and rep.regime is not Regime.CRITICAL_Q:
        beta, gamma = gn_exponents(params)
    elif params.p is not None:
        beta, gamma = refined_sobolev_exponents(params, 0)
    return ExponentBundle(params, endpoint_exponent(params), sobolev_exponent(params), pr,
                          beta, gamma, rep.regime, rep.p_interval, rep.p_interval_radial,
                          tuple(warnings))


def quotient_exponents(params: ParamSet):
    """(beta, gamma) used by the quotient: GN off the critical line, refined Sobolev on it."""
    if params.is_critical_q:
        return refined_sobolev_exponents(params, 0)
    return gn_exponents(params)


# ---------------------------------------------------------- weighted families

@dataclass(frozen=True)
class WeightedExponents:
    denapoli_sigma: Optional[Real] = None
    denapoli_theta: Optional[Real] = None
    rubin_r: Optional[Real] = None
    rubin_beta: Optional[Real] = None
    weakni_beta: Optional[Real] = None
    ruiz_epsilon: Real = 0.1


def denapoli_exponents(d, s, r, a):
    """(sigma, theta) of the weighted pointwise bound for radial H^s functions."""
    s, r, a = as_number(s), as_number(r), as_number(a)
    if d < 2:
        raise ParameterError("requires d >= 2")
    if _cmp(s, Fraction(1, 2)) <= 0:
        raise ParameterError("requires s > 1/2")
    if _cmp(r, 1) <= 0:
        raise ParameterError("requires r > 1")
    if _cmp(a, -(d - 1)) < 0:
        raise ParameterError("weight exponent a below -(d-1)")
    if _cmp(a, d * (r - 1)) >= 0:
        raise ParameterError("weight exponent a must be < d(r-1)")
    den = _den((2 * s - 1) * r + 2)
    sigma = (2 * s * (d - 1) + (2 * s - 1) * a) / den
    theta = 2 / den
    return _norm(sigma), _norm(theta)


def _rubin_check(d, s, r, beta):
    if d < 2:
        raise ParameterError("requires d >= 2")
    if _cmp(s, 0) <= 0 or _cmp(2 * s, d) >= 0:
        raise ParameterError("requires 0 < s < d/2")
    if _cmp(r, 2) < 0:
        raise ParameterError("requires r >= 2")
    lower = -(d - 1) * (Fraction(1, 2) - 1 / _den(r)) if _is_exact(r) else \
        -(d - 1) * (0.5 - 1 / r)
    if _cmp(beta, lower) < 0:
        raise ParameterError("lower bound beta >= -(d-1)(1/2-1/r) violated")
    if _cmp(beta, d / _den(r)) >= 0:
        raise ParameterError("upper bound beta < d/r violated")


def rubin_exponents(d, s, r):
    """Weight exponent beta paired with r: 1/r = 1/2 + (beta-s)/d."""
    s, r = as_number(s), as_number(r)
    half = Fraction(1, 2) if _is_exact(s, r) else 0.5
    beta = _norm(s + d * (1 / _den(r) - half))
    _rubin_check(d, s, r, beta)
    return beta


def rubin_r_from_beta(d, s, beta):
    s, beta = as_number(s), as_number(beta)
    half = Fraction(1, 2) if _is_exact(s, beta) else 0.5
    inv_r = half + (beta - s) / _den(d)
    if _cmp(inv_r, 0) <= 0:
        raise ParameterError("1/r must be positive")
    r = _norm(1 / _den(inv_r) if _is_exact(inv_r) else 1 / inv_r)
    _rubin_check(d, s, r, beta)
    return r


def weakni_exponents(d, s, p):
    """Returns (r, beta, exterior_exponent) for the exterior-ball L^p estimate."""
    s, p = as_number(s), as_number(p)
    if d < 2:
        raise ParameterError("requires d >= 2")
    if _cmp(s, 0) <= 0 or _cmp(s, Fraction(1, 2)) > 0:
        raise ParameterError("requires 0 < s <= 1/2")
    inv_p = 1 / _den(p)
    half = Fraction(1, 2) if _is_exact(s, p) else 0.5
    if _cmp(inv_p, half - s) < 0 or _cmp(inv_p, half - s / _den(d)) > 0:
        raise ParameterError("p outside 1/2 - s <= 1/p <= 1/2 - s/d")
    beta = (2 * d - p * (d - 2 * s)) / _den(2 * p)
    ext = d - p * (d * half - s)
    return p, _norm(beta), _norm(ext)


# ---------------------------------------------------------------- schedules

class ScheduleKind(str, Enum):
    TABLE2_ROW1 = "Table2Row1"
    TABLE2_ROW2 = "Table2Row2"
    TABLE2_ROW3 = "Table2Row3"
    TABLE3_ROW1 = "Table3Row1"
    TABLE3_ROW2 = "Table3Row2"
    TABLE3_ROW3 = "Table3Row3"
    FIXED_R = "FixedR_Svaries"
    CUSTOM = "Custom"

    @classmethod
    def parse(cls, text) -> "ScheduleKind":
        if isinstance(text, cls):
            return text
        key = str(text).replace("-", "").replace("_", "").lower()
        for k in cls:
            if k.value.replace("_", "").lower() == key or k.name.replace("_", "").lower() == key:
                return k
        aliases = {"fixedr": cls.FIXED_R, "fixedrsvaries": cls.FIXED_R}
        if key in aliases:
            return aliases[key]
        raise ParameterError(f"unknown schedule kind {text!r}")


class Direction(str, Enum):
    R_TO_INFINITY = "R_to_infinity"
    R_TO_ZERO = "R_to_zero"
    S_TO_ZERO = "S_to_zero"


@dataclass(frozen=True)
class ScheduleParams:
    """lambda = t^beta_sched and S = t^gamma_sched along the axis t.

    For the R-schedules t = R; for FixedR_Svaries the axis is S itself, so
    gamma_sched = 1 and lambda = S^beta_sched at the fixed radius.
    """
    kind: ScheduleKind
    beta_sched: Real
    gamma_sched: Real
    direction: Direction
    reference_p: Optional[Real] = None
    fixed_R: Optional[float] = None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "beta_sched": _jsonable(self.beta_sched),
                "gamma_sched": _jsonable(self.gamma_sched),
                "direction": self.direction.value,
                "reference_p": None if self.reference_p is None else _jsonable(self.reference_p),
                "fixed_R": self.fixed_R}


def table2_exponents(params: ParamSet):
    d, s, a, q = params.d, params.s, params.alpha, params.q
    beta = -(2 * (d - 1) + (d + a - 2) * (2 * s - 1)) / _den(2 * q * (2 * s - 1) + 4)
    gamma = (q * (d - 1) - (d + a - 2)) / _den(q * (2 * s - 1) + 2)
    return _norm(beta), _norm(gamma)


def table3_exponents(params: ParamSet):
    d, s, a, q = params.d, params.s, params.alpha, params.q
    den = _den(q * (2 * s - 1) + 1 + a)
    beta = -(d - 1) * (2 * s + a) / (2 * den)
    gamma = (d - 1) * (q - 1) / den
    return _norm(beta), _norm(gamma)


def schedule_params(params: ParamSet, kind, beta=None, gamma=None, direction=None,
                    fixed_R: float = 1.0) -> ScheduleParams:
    kind = ScheduleKind.parse(kind)
    d, s, a, q = params.d, params.s, params.alpha, params.q
    if kind is ScheduleKind.CUSTOM:
        if beta is None or gamma is None or direction is None:
            raise ParameterError("Custom schedule needs beta, gamma and direction")
        return ScheduleParams(kind, as_number(beta), as_number(gamma), Direction(direction))
    if d < 2:
        raise ParameterError("radial schedules require d >= 2")
    if params.is_critical_q:
        raise ParameterError("schedules are undefined on the CriticalQ line")
    half = Fraction(1, 2)
    inv_q = 1 / _den(q)
    crit = (d - 2 * s) / _den(d + a)

    if kind is ScheduleKind.FIXED_R:
        if _cmp(s, half) >= 0:
            raise ParameterError("FixedR_Svaries requires s < 1/2")
        if _cmp(a, 1) > 0:
            if _cmp(inv_q, (1 - 2 * s) / 2) != 0:
                raise ParameterError("FixedR_Svaries with alpha > 1 requires q = 2/(1-2s)")
            lam = _norm(-1 / _den(q))
            ref = q
        elif _cmp(a, 1) < 0:
            if _cmp(inv_q, (1 - 2 * s) / _den(1 + a)) != 0:
                raise ParameterError("FixedR_Svaries with alpha < 1 requires q = (1+alpha)/(1-2s)")
            lam = _norm((2 * s - 1) / 2)
            ref = _norm(2 / _den(1 - 2 * s))
        else:
            raise ParameterError("FixedR_Svaries is not implemented at alpha = 1")
        return ScheduleParams(kind, lam, 1, Direction.S_TO_ZERO, ref, float(fixed_R))

    table2 = kind.value.startswith("Table2")
    if table2:
        if _cmp(a, 1) <= 0:
            raise ParameterError("Table 2 schedules require alpha > 1")
        boundary = (1 - 2 * s) / 2
    else:
        if _cmp(a, 1) > 0:
            raise ParameterError("Table 3 schedules require alpha <= 1")
        boundary = (1 - 2 * s) / _den(1 + a)
    if _cmp(inv_q, boundary) == 0:
        raise ParameterError("1/q lies on the row boundary where the table exponents "
                             "degenerate; use FixedR_Svaries")
    if table2:
        b, g = table2_exponents(params)
        ref = p_rad(params)
    else:
        b, g = table3_exponents(params)
        ref = endpoint_exponent(params)
    row = int(kind.value[-1])
    if row == 1:
        if not _cmp(inv_q, crit) > 0:
            raise ParameterError("row 1 requires 1/q > (d-2s)/(alpha+d)")
        if not (_cmp(b, 0) < 0 and _cmp(g, 0) > 0 and _cmp(g, 1) < 0):
            raise ParameterError("row 1 sign pattern beta<0, 0<gamma<1 violated")
        direction = Direction.R_TO_INFINITY
    elif row == 2:
        if not (_cmp(inv_q, _pos(boundary)) > 0 and _cmp(inv_q, crit) < 0):
            raise ParameterError("row 2 requires ((1-2s)/2)_+ < 1/q < (d-2s)/(alpha+d)"
                                 if table2 else
                                 "row 2 requires ((1-2s)/(1+alpha))_+ < 1/q < (d-2s)/(alpha+d)")
        if not (_cmp(b, 0) < 0 and _cmp(g, 1) > 0):
            raise ParameterError("row 2 sign pattern beta<0, gamma>1 violated")
        direction = Direction.R_TO_ZERO
    else:
        if not (_cmp(s, half) < 0 and _cmp(inv_q, boundary) < 0):
            raise ParameterError("row 3 requires s < 1/2 and 1/q below the row boundary")
        if not (_cmp(b, 0) > 0 and _cmp(g, 0) < 0):
            raise ParameterError("row 3 sign pattern beta>0, gamma<0 violated")
        direction = Direction.R_TO_INFINITY
    return ScheduleParams(kind, b, g, direction, ref)


def multibump_rescale_exponents(params: ParamSet):
    """(sigma, theta) of w(x) = m^theta v(x / m^sigma)."""
    d, s, a, q = params.d, params.s, params.alpha, params.q
    den = _den(d + a - q * (d - 2 * s))
    if _cmp(den, 0) == 0:
        raise ParameterError("rescaling undefined on the CriticalQ line")
    return _norm((q - 1) / den), _norm(-(2 * s + a) / (2 * den))


def multibump_mass_exponent(params: ParamSet):
    """Growth exponent in m of the rescaled multibump L^p mass at p = p_rad."""
    d, s, a = params.d, params.s, params.alpha
    return _norm(2 * s * (a - 1) / _den(2 * s * (d + a - 2) + d - a))
