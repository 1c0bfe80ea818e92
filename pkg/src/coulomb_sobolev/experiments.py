"""Rate sweeps, corpus boundedness runs and weighted-inequality sweeps."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats

from .exponents import (ParamSet, ParameterError, ScheduleKind, ScheduleParams,
                        classify_regime, multibump_rescale_exponents,
                        quotient_exponents, refined_sobolev_exponents, rubin_exponents,
                        schedule_params, sobolev_exponent, to_float, weakni_exponents)
from .functionals import (coulomb_energy, lp_power, quotient_from_energies, ruiz_exterior,
                          ruiz_interior, rubin_ratio, seminorm_sq, weak_ni_ratio)
from .radial import BumpParams, MultibumpParams, RadialGridFunction, check_disjoint, superposition

SCHEMA = 1


class Verdict(str, Enum):
    MATCH = "Match"
    MISMATCH = "Mismatch"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SweepConfig:
    tol: float = 0.1
    abs_tol: float = 0.02
    fit_fraction: float = 0.5
    min_fit: int = 4
    nodes_across: int = 64
    outer: float = 1e3
    growth: float = 1.12
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


def fit_slope(x: Sequence[float], y: Sequence[float], fraction: float = 0.5,
              min_points: int = 4):
    """Least squares slope of log y against log x over the last ``fraction`` of samples."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if len(x) < min_points:
        raise ParameterError(f"need at least {min_points} samples, got {len(x)}")
    k = max(min_points, int(math.ceil(fraction * len(x))))
    xs, ys = np.abs(x[-k:]), y[-k:]
    if not (np.all(ys > 0) and np.all(xs > 0) and np.all(np.isfinite(ys))):
        raise ParameterError("nonpositive values in slope fit")
    lx, ly = np.log(xs), np.log(ys)
    res = stats.linregress(lx, ly)
    return float(res.slope), float(res.stderr)


def verdict(fitted: float, expected: Optional[float], tol: float = 0.1,
            abs_tol: float = 0.02) -> Verdict:
    if expected is None or not math.isfinite(fitted):
        return Verdict.INCONCLUSIVE
    if expected == 0:
        return Verdict.MATCH if abs(fitted) <= abs_tol else Verdict.MISMATCH
    if abs(expected) < abs_tol:
        # expected rate below the resolution of the absolute band
        return Verdict.INCONCLUSIVE
    return Verdict.MATCH if abs(fitted - expected) <= tol * abs(expected) else Verdict.MISMATCH


@dataclass
class QuantityFit:
    fitted: float
    stderr: float
    expected: Optional[float]
    verdict: Verdict

    def to_dict(self) -> dict:
        return {"fitted": self.fitted, "stderr": self.stderr, "expected": self.expected,
                "verdict": self.verdict.value}


QUANTITIES = ("lp_p", "seminorm_sq", "coulomb", "quotient", "quotient_p")


@dataclass
class SweepResult:
    axis: str
    samples: list
    fits: dict
    primary: str
    label: str = ""
    config: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def fitted_slope(self) -> float:
        return self.fits[self.primary].fitted

    @property
    def slope_stderr(self) -> float:
        return self.fits[self.primary].stderr

    @property
    def expected_slope(self) -> Optional[float]:
        return self.fits[self.primary].expected

    @property
    def verdict(self) -> Verdict:
        return self.fits[self.primary].verdict

    @property
    def all_verdicts(self) -> dict:
        return {k: v.verdict for k, v in self.fits.items() if v.expected is not None}

    def slope(self, name: str) -> float:
        return self.fits[name].fitted

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "kind": "sweep", "label": self.label, "axis": self.axis,
                "primary": self.primary, "fitted_slope": self.fitted_slope,
                "slope_stderr": self.slope_stderr, "expected_slope": self.expected_slope,
                "verdict": self.verdict.value,
                "fits": {k: v.to_dict() for k, v in self.fits.items()},
                "samples": self.samples, "warnings": self.warnings, "config": self.config}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    def to_csv(self) -> str:
        cols = ["axis_value"] + [q for q in QUANTITIES]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(cols)
        for smp in self.samples:
            w.writerow([repr(float(smp[c])) for c in cols])
        return buf.getvalue()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_default, allow_nan=True)


def _default(o):
    if isinstance(o, Enum):
        return o.value
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    if hasattr(o, "numerator"):
        return float(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


# ------------------------------------------------------------ sampling

def _energies(f: RadialGridFunction, params: ParamSet, log_factor: float = 1.0):
    p, s = to_float(params.p), to_float(params.s)
    q, a = to_float(params.q), to_float(params.alpha)
    return (lp_power(f, p), seminorm_sq(f, s), coulomb_energy(f, q, a) / log_factor)


def _sample_map(fn: Callable, values: Sequence, threads: int):
    """Ordered map; failures become None with the message recorded."""
    def safe(v):
        try:
            return fn(v), None
        except (ParameterError, ArithmeticError) as exc:
            return None, f"axis value {v!r} skipped: {exc}"
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(safe, values))
    return [safe(v) for v in values]


def _build(axis: str, values, rows, expected: dict, primary: str, params: ParamSet,
           cfg: SweepConfig, label: str, extra_warnings=(), exponents=None) -> SweepResult:
    beta, gamma = exponents if exponents is not None else quotient_exponents(params)
    p = to_float(params.p)
    samples, warns = [], list(extra_warnings)
    for v, (res, err) in zip(values, rows):
        if res is None:
            warns.append(err)
            continue
        lp, sem, coul = res
        Q = float(quotient_from_energies(lp ** (1 / p), sem, coul, beta, gamma))
        samples.append({"axis_value": float(v), "lp_p": lp, "seminorm_sq": sem,
                        "coulomb": coul, "quotient": Q, "quotient_p": Q ** p})
    if len(samples) < cfg.min_fit:
        raise ParameterError(f"only {len(samples)} usable samples: " + "; ".join(warns))
    x = [smp["axis_value"] for smp in samples]
    fits = {}
    for name in QUANTITIES:
        y = [smp[name] for smp in samples]
        slope, err = fit_slope(x, y, cfg.fit_fraction, cfg.min_fit)
        exp = expected.get(name)
        fits[name] = QuantityFit(slope, err, exp, verdict(slope, exp, cfg.tol, cfg.abs_tol))
    conf = {"params": params.to_dict(), "sweep": cfg.to_dict(), "exponents":
            {"beta": to_float(beta), "gamma": to_float(gamma)}}
    return SweepResult(axis, samples, fits, primary, label, conf, warns)


# ------------------------------------------------------------ bump laws

def bump_law_exponents(params: ParamSet, axis: str) -> dict:
    """Exponents of lp^p, seminorm^2 and D for u = lam eta((r - R)/S)."""
    d, s, a, q, p = (to_float(params.d), to_float(params.s), to_float(params.alpha),
                     to_float(params.q), to_float(params.p))
    if axis == "lambda":
        return {"lp_p": p, "seminorm_sq": 2.0, "coulomb": 2 * q}
    if axis == "R":
        return {"lp_p": d - 1, "seminorm_sq": d - 1,
                "coulomb": d + a - 2 if a > 1 else d - 1}
    if axis == "S":
        return {"lp_p": 1.0, "seminorm_sq": 1 - 2 * s,
                "coulomb": 2.0 if a >= 1 else 1 + a}
    raise ParameterError(f"unknown bump axis {axis!r}")


def run_bump_law(params: ParamSet, axis: str, values: Sequence[float],
                 base: BumpParams = BumpParams(1.0, 10.0, 1.0),
                 config: SweepConfig = SweepConfig()) -> SweepResult:
    """Sweep one bump parameter; at alpha = 1 the Coulomb energy is divided by log(R/S)."""
    log_case = to_float(params.alpha) == 1.0

    def sample(v):
        kw = {"lambda": "lam", "R": "R", "S": "S"}[axis]
        bp = BumpParams(**{**base.__dict__, kw: v})
        f = superposition([bp], params.d, config.nodes_across, config.outer, config.growth)
        return _energies(f, params, math.log(bp.R / bp.S) if log_case else 1.0)

    rows = _sample_map(sample, values, config.threads)
    exp = bump_law_exponents(params, axis)
    label = f"bump law along {axis}" + (" (log corrected D)" if log_case else "")
    exps = (0.0, 0.0) if params.is_critical_q else None
    return _build(axis, values, rows, exp, "coulomb", params, config, label, exponents=exps)


# ------------------------------------------------------------ schedules

DEFAULT_R_AXIS = [4.0 * 2 ** k for k in range(11)]
DEFAULT_S_AXIS = [2.0 ** -k for k in range(2, 12)]


def schedule_expected_lp(params: ParamSet, sched: ScheduleParams) -> float:
    p = to_float(params.p)
    b = to_float(sched.beta_sched)
    if sched.kind is ScheduleKind.FIXED_R:
        return 1 + p * b
    return b * (p - to_float(sched.reference_p))


def run_schedule(params: ParamSet, schedule: ScheduleParams, p=None,
                 axis_values: Optional[Sequence[float]] = None,
                 config: SweepConfig = SweepConfig()) -> SweepResult:
    """Bump family along a schedule: lambda = t^beta, S = t^gamma at radius t (or S = t)."""
    if p is not None:
        params = params.with_p(p)
    if params.p is None:
        raise ParameterError("run_schedule needs p")
    fixed = schedule.kind is ScheduleKind.FIXED_R
    if axis_values is None:
        axis_values = DEFAULT_S_AXIS if fixed else (
            [1 / v for v in DEFAULT_R_AXIS] if schedule.direction.value == "R_to_zero"
            else DEFAULT_R_AXIS)
    axis_values = list(axis_values)
    span = max(axis_values) / min(axis_values)
    if span < 100:
        raise ParameterError("axis values must span at least two decades")
    b, g = to_float(schedule.beta_sched), to_float(schedule.gamma_sched)

    def sample(t):
        if fixed:
            bp = BumpParams(t ** b, schedule.fixed_R, t)
        else:
            bp = BumpParams(t ** b, t, t ** g)
        f = superposition([bp], params.d, config.nodes_across, config.outer, config.growth)
        return _energies(f, params)

    rows = _sample_map(sample, axis_values, config.threads)
    lp_exp = schedule_expected_lp(params, schedule)
    p_f = to_float(params.p)
    expected = {"lp_p": lp_exp, "seminorm_sq": 0.0, "coulomb": 0.0,
                "quotient": lp_exp / p_f, "quotient_p": lp_exp}
    axis = "S" if fixed else "R"
    label = f"{schedule.kind.value} at p={p_f:g}"
    return _build(axis, axis_values, rows, expected, "lp_p", params, config, label)


# ------------------------------------------------------------ multibump

def run_multibump(params: ParamSet, R: float = 64.0, m_values: Sequence[int] = range(1, 9),
                  p=None, rescaled: bool = False, kind: str = "Table2Row1",
                  config: SweepConfig = SweepConfig()) -> SweepResult:
    """Sum of m scheduled bumps at radii R^k; optionally rescaled so that both energies stay fixed."""
    sched = schedule_params(params, kind)
    if p is None:
        p = sched.reference_p
    params = params.with_p(p)
    sigma, theta = (to_float(x) for x in multibump_rescale_exponents(params))
    warns = []
    if to_float(p) != to_float(sched.reference_p):
        warns.append("p differs from the schedule reference exponent; lp_p is not a power law in m")

    def sample(m):
        mp = MultibumpParams(R, int(m), sched, sigma if rescaled else 0.0,
                             theta if rescaled else 0.0)
        bumps = mp.bumps()
        check_disjoint(bumps)
        v = superposition(bumps, params.d, config.nodes_across, config.outer, config.growth)
        f = v.dilated(m ** mp.rescale_sigma).scaled(m ** mp.rescale_theta) if rescaled else v
        return _energies(f, params)

    m_values = list(m_values)
    rows = _sample_map(sample, m_values, config.threads)
    d, s, a = to_float(params.d), to_float(params.s), to_float(params.alpha)
    pf = to_float(params.p)
    if rescaled:
        lp = pf * theta + sigma * d + 1
        expected = {"lp_p": lp, "seminorm_sq": 0.0, "coulomb": 0.0,
                    "quotient_p": 2 * s * (a - 1) / (2 * s * (d + a - 2) + d - a)}
    else:
        expected = {"lp_p": 1.0, "seminorm_sq": 1.0, "coulomb": 1.0}
    label = f"multibump {'rescaled' if rescaled else 'plain'} R={R:g}"
    return _build("m", m_values, rows, expected, "quotient_p" if rescaled else "lp_p",
                  params, config, label, warns)


# --------------------------------------------------------------- corpus

@dataclass(frozen=True)
class CorpusSpec:
    size: int = 200
    seed: int = 20240917
    R_range: tuple = (0.5, 50.0)
    shape_range: tuple = (0.02, 0.9)  # S / R
    lam_range: tuple = (0.1, 10.0)
    max_bumps: int = 3
    nodes_across: int = 64
    outer: float = 1e3

    def to_dict(self) -> dict:
        return asdict(self)


def _loguniform(rng, lo, hi):
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def corpus_member(spec: CorpusSpec, index: int) -> list:
    """Bumps of member ``index``; a counter-based stream keyed by (seed, index)."""
    rng = np.random.Generator(np.random.Philox(key=[spec.seed % 2 ** 64, index]))
    k = int(rng.integers(1, spec.max_bumps + 1))
    out = []
    for _ in range(k):
        R = _loguniform(rng, *spec.R_range)
        S = R * _loguniform(rng, *spec.shape_range)
        lam = _loguniform(rng, *spec.lam_range)
        out.append(BumpParams(lam, R, S))
    return out


def corpus_function(spec: CorpusSpec, index: int, d: int) -> RadialGridFunction:
    return superposition(corpus_member(spec, index), d, spec.nodes_across, spec.outer)


@dataclass
class CorpusReport:
    label: str
    values: list
    max_value: float
    median: float
    spread: float
    argmax: int
    argmax_bumps: list
    bounded: bool
    threshold: float
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "kind": "corpus", "label": self.label,
                "max": self.max_value, "median": self.median, "spread": self.spread,
                "argmax": self.argmax, "argmax_bumps": self.argmax_bumps,
                "bounded": self.bounded, "threshold": self.threshold,
                "values": self.values, "config": self.config}

    def to_json(self) -> str:
        return dumps(self.to_dict())


def _corpus_report(label, values, spec: CorpusSpec, threshold, config) -> CorpusReport:
    arr = np.asarray(values, float)
    med = float(np.median(arr))
    k = int(np.argmax(arr))
    mx = float(arr[k])
    spread = mx / med if med > 0 else math.inf
    bumps = [b.to_dict() for b in corpus_member(spec, k)]
    return CorpusReport(label, [float(v) for v in arr], mx, med, spread, k, bumps,
                        bool(spread < threshold), threshold, config)


def _corpus_map(fn, spec: CorpusSpec, threads: int):
    idx = range(spec.size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, idx))
    return [fn(i) for i in idx]


def _check_radial_p(params: ParamSet):
    rep = classify_regime(params)
    interval = rep.p_interval_radial or rep.p_interval
    if not interval.contains(params.p):
        raise ParameterError(
            f"p={to_float(params.p):g} outside the valid radial interval {interval} "
            f"(regime {rep.regime.value})")
    return interval


def run_boundedness(params: ParamSet, p=None, corpus: CorpusSpec = CorpusSpec(),
                    threshold: float = 10.0, exponents=None, threads: int = 1,
                    label: Optional[str] = None) -> CorpusReport:
    """Quotient over a seeded corpus of bump superpositions; bounded iff max/median < threshold."""
    if p is not None:
        params = params.with_p(p)
    if exponents is None:
        _check_radial_p(params)
        exponents = quotient_exponents(params)
    beta, gamma = exponents
    pf = to_float(params.p)

    def one(i):
        f = corpus_function(corpus, i, params.d)
        lp, sem, coul = _energies(f, params)
        return float(quotient_from_energies(lp ** (1 / pf), sem, coul, beta, gamma))

    vals = _corpus_map(one, corpus, threads)
    conf = {"params": params.to_dict(), "corpus": corpus.to_dict(),
            "exponents": {"beta": to_float(beta), "gamma": to_float(gamma)}}
    return _corpus_report(label or f"quotient p={pf:g}", vals, corpus, threshold, conf)


def run_refined_sobolev(params: ParamSet, epsilon=0, corpus: CorpusSpec = CorpusSpec(),
                        threshold: float = 10.0, threads: int = 1) -> CorpusReport:
    """Refined Sobolev quotient at q = (d+alpha)/(d-2s), p = 2d/(d-2s)."""
    if not params.is_critical_q:
        raise ParameterError("refined Sobolev quotient needs q(d-2s) = d+alpha")
    params = params.with_p(sobolev_exponent(params))
    ex = refined_sobolev_exponents(params, epsilon)
    return run_boundedness(params, corpus=corpus, threshold=threshold, exponents=ex,
                           threads=threads, label=f"refined Sobolev eps={to_float(epsilon):g}")


DEFAULT_WEIGHT_RADII = tuple(float(x) for x in np.geomspace(0.05, 500.0, 25))


def run_weighted_checks(params: ParamSet, corpus: CorpusSpec = CorpusSpec(),
                        radii: Sequence[float] = DEFAULT_WEIGHT_RADII,
                        eps_values: Sequence[float] = (0.1, 0.5),
                        weakni_p: Optional[Sequence[float]] = None,
                        threshold: float = 10.0, threads: int = 1) -> dict:
    """Per function sup over the radius sweep of each inequality ratio, then corpus spread."""
    d, s, a, q = params.d, to_float(params.s), to_float(params.alpha), to_float(params.q)
    if not 0 < a < d:
        raise ParameterError("Ruiz inequality needs 0 < alpha < d")
    if q < 1:
        raise ParameterError("Ruiz inequality needs q >= 1")
    if not 0 < s < d / 2 or d < 2:
        raise ParameterError("Rubin inequality needs d >= 2 and 0 < s < d/2")
    rubin_points = {"hardy": (2.0, s), "sobolev": (2 * d / (d - 2 * s), 0.0)}
    if s < 0.5:
        rubin_points["limiting"] = (2 / (1 - 2 * s), -(d - 1) * s)
    for name, (r, beta) in rubin_points.items():
        rubin_exponents(d, s, r)  # validates the admissible range
    if weakni_p is None and s <= 0.5:
        lo, hi = 2 * d / (d - 2 * s), (2 / (1 - 2 * s) if s < 0.5 else math.inf)
        weakni_p = (lo, 0.5 * (lo + hi), hi) if math.isfinite(hi) else (lo,)
    for pp in weakni_p or ():
        weakni_exponents(d, s, pp)

    def one(i):
        f = corpus_function(corpus, i, d)
        D = coulomb_energy(f, q, a)
        sem = seminorm_sq(f, s)
        row = {}
        for eps in eps_values:
            row[f"ruiz_exterior_eps{eps:g}"] = max(ruiz_exterior(f, q, a, eps, R, D) for R in radii)
            row[f"ruiz_interior_eps{eps:g}"] = max(ruiz_interior(f, q, a, eps, R, D) for R in radii)
        for name, (r, beta) in rubin_points.items():
            row[f"rubin_{name}"] = float(rubin_ratio(f, s, r, beta, sem))
        for pp in weakni_p or ():
            row[f"weak_ni_p{pp:g}"] = max(weak_ni_ratio(f, s, pp, R, sem) for R in radii)
        return row

    rows = _corpus_map(one, corpus, threads)
    conf = {"params": params.to_dict(), "corpus": corpus.to_dict(), "radii": list(radii),
            "eps": list(eps_values)}
    return {k: _corpus_report(k, [float(r[k]) for r in rows], corpus, threshold, conf)
            for k in rows[0]}
