"""Constrained ascent for maximizers of the non-endpoint quotients on a radial grid."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exponents import (ParamSet, ParameterError, classify_regime, quotient_exponents,
                        refined_epsilon_max, refined_sobolev_exponents,
                        sobolev_exponent, to_float, _cmp)
from .functionals import GridEnergies
from .radial import BumpParams, Grid, RadialGridFunction, bump, eta, make_grid

ENDPOINT_REFUSAL = ("existence of optimizers for the endpoint inequality remains open; "
                    "optimizer search is only defined for non-endpoint p")
INTERVAL_REFUSAL = "optimizer search covers interior p only"


class Status(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    STALLED = "Stalled"


@dataclass
class AscentConfig:
    tol: float = 1e-6
    max_iter: int = 5000
    armijo: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    growth: float = 2.0
    epsilon: Optional[float] = None  # refined Sobolev family at CriticalQ
    threads: int = 1
    trace_path: Optional[str] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class OptimizerState:
    f: RadialGridFunction
    params: ParamSet
    exponents: tuple
    step: float
    history: list = field(default_factory=list)
    normalization: dict = field(default_factory=dict)
    status: Status = Status.MAX_ITERATIONS
    profile: Optional[RadialGridFunction] = None
    warnings: list = field(default_factory=list)

    @property
    def Q(self) -> float:
        return self.history[-1]["Q"] if self.history else float("nan")

    @property
    def residual(self) -> float:
        return self.history[-1]["gradient_norm"] if self.history else float("nan")

    def trace_lines(self) -> str:
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.history)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "exponents": [to_float(self.exponents[0]), to_float(self.exponents[1])],
            "status": self.status.value,
            "Q": self.Q,
            "iterations": len(self.history) - 1,
            "gradient_norm": self.residual,
            "step": self.step,
            "normalization": self.normalization,
            "grid": self.f.grid.meta,
            "warnings": list(self.warnings),
        }


def optimizer_exponents(params: ParamSet, epsilon=None):
    """Exponents for the ascent, refusing endpoint or invalid p."""
    if params.is_critical_q:
        if epsilon is None or _cmp(epsilon, 0) <= 0:
            raise ParameterError("CriticalQ: " + ENDPOINT_REFUSAL + " (pass epsilon > 0)")
        eps_max = refined_epsilon_max(params)
        if _cmp(epsilon, eps_max) >= 0:
            raise ParameterError("epsilon at or beyond the classical Sobolev end; "
                                 f"need epsilon < {to_float(eps_max):.6g}")
        p_sob = sobolev_exponent(params)
        if params.p is not None and _cmp(params.p, p_sob) != 0:
            raise ParameterError("refined Sobolev family requires p = 2d/(d-2s)")
        return params.with_p(p_sob), refined_sobolev_exponents(params, epsilon)
    if params.p is None:
        raise ParameterError("optimizer needs p")
    rep = classify_regime(params)
    interval = rep.p_interval_radial or rep.p_interval
    if interval.is_endpoint(params.p):
        raise ParameterError(f"p at an endpoint of {interval}: " + INTERVAL_REFUSAL)
    if not interval.interior(params.p):
        raise ParameterError(f"p outside the admissible interval {interval}; "
                             "the quotient is unbounded there")
    return params, quotient_exponents(params)


def normalizing_scale(sem_sq: float, coul: float, params: ParamSet):
    """(c, t) with f = c u(r/t) having seminorm^2 = 1 and D = 1.

    On the CriticalQ line both energies scale alike, so only seminorm^2 = 1 is
    imposed (by amplitude, t = 1).
    """
    if params.is_critical_q:
        return 1.0 / math.sqrt(sem_sq), 1.0
    d, s = params.d, to_float(params.s)
    q, a = to_float(params.q), to_float(params.alpha)
    M = np.array([[2.0, d - 2.0 * s], [2.0 * q, d + a]])
    det = np.linalg.det(M)
    if abs(det) < 1e-12:
        raise ParameterError("amplitude and dilation cannot fix both energies (CriticalQ)")
    log_c, log_t = np.linalg.solve(M, [-math.log(sem_sq), -math.log(coul)])
    return math.exp(log_c), math.exp(log_t)


def default_grid(d: int, n: int = 401, r_min: float = 1e-3, r_max: float = 40.0) -> Grid:
    return make_grid(r_max, n, "geometric", r_min=r_min, d=d)


def default_initial(grid: Grid) -> RadialGridFunction:
    """Single bump centred at 1 with half-width 1/2 (a heuristic start)."""
    return bump(BumpParams(1.0, 1.0, 0.5), grid)


def random_initial(grid: Grid, rng: np.random.Generator, max_bumps: int = 3) -> RadialGridFunction:
    vals = np.zeros(grid.n)
    for _ in range(int(rng.integers(1, max_bumps + 1))):
        R = float(rng.uniform(0.5, 2.0))
        S = R * float(rng.uniform(0.3, 0.9))
        lam = float(rng.uniform(0.2, 2.0))
        vals += lam * eta((grid.nodes - R) / S)
    return RadialGridFunction(grid, vals)


class _Problem:
    """Energies, gradients and the preconditioner on the free nodes."""

    def __init__(self, grid: Grid, params: ParamSet, exponents, threads: int):
        self.E = GridEnergies(grid, params, threads=threads)
        self.params = params
        self.p = self.E.p
        self.beta, self.gamma = to_float(exponents[0]), to_float(exponents[1])
        n = grid.n
        self.free = np.arange(n - 1)  # outer node pinned to zero
        self.mass = self.E.omega * grid.weights

    def set_metric(self, u):
        A = self.E.form[np.ix_(self.free, self.free)]
        m = self.mass[self.free]
        uf = u[self.free]
        mu = float(uf @ A @ uf) / float(m @ (uf * uf))
        self.chol = cho_factor(A + np.diag(mu * m))

    def energies(self, u):
        return self.E.lp_power(u), self.E.seminorm_sq(u), self.E.coulomb(u)

    def log_q(self, en):
        lp, sem, coul = en
        return math.log(lp) / self.p - 0.5 * self.beta * math.log(sem) - self.gamma * math.log(coul)

    def direction(self, u):
        """Projected preconditioned ascent direction and its squared metric norm."""
        g_lp, g_sem, g_d = (g[self.free] for g in self.E.gradients(u))
        P = lambda g: cho_solve(self.chol, g)
        z_lp, z_sem, z_d = P(g_lp), P(g_sem), P(g_d)
        G = np.array([[g_sem @ z_sem, g_sem @ z_d], [g_d @ z_sem, g_d @ z_d]])
        rhs = np.array([g_sem @ z_lp, g_d @ z_lp])
        lam = np.linalg.lstsq(G, rhs, rcond=None)[0]
        v = z_lp - lam[0] * z_sem - lam[1] * z_d
        g_t = g_lp - lam[0] * g_sem - lam[1] * g_d
        sq = max(float(g_t @ v), 0.0)
        full = np.zeros_like(u)
        full[self.free] = v
        return full, sq, float(g_lp @ z_lp)


def ascend(initial: RadialGridFunction, params: ParamSet,
           config: Optional[AscentConfig] = None) -> OptimizerState:
    config = config or AscentConfig()
    params, exps = optimizer_exponents(params, config.epsilon)
    if initial.is_zero:
        raise ParameterError("initial function is zero")
    grid = initial.grid
    prob = _Problem(grid, params, exps, config.threads)
    u = np.array(initial.values, dtype=float)
    u[-1] = 0.0
    en = prob.energies(u)
    if not (en[1] > 0 and en[2] > 0):
        raise ParameterError("initial function needs positive energies")
    u /= math.sqrt(en[1])
    en = prob.energies(u)
    prob.set_metric(u)
    logq = prob.log_q(en)
    step = 1.0
    history = []
    status = Status.MAX_ITERATIONS
    trace = open(config.trace_path, "w") if config.trace_path else None

    def record(it, en, res, step):
        c, t = normalizing_scale(en[1], en[2], params)
        rec = {"iteration": it, "Q": math.exp(logq), "step": step, "gradient_norm": res,
               "lp_p": en[0], "seminorm_sq": en[1], "coulomb": en[2],
               "amplitude": c, "dilation": t}
        history.append(rec)
        if trace:
            trace.write(json.dumps(rec, sort_keys=True) + "\n")

    try:
        for it in range(config.max_iter + 1):
            v, sq, ref = prob.direction(u)
            res = math.sqrt(sq / ref) if ref > 0 else 0.0
            record(it, en, res, step)
            if res < config.tol:
                status = Status.CONVERGED
                break
            if it == config.max_iter:
                break
            slope = sq / (prob.p * en[0])  # d/dtau log Q along v
            tau = step * config.growth
            for _ in range(config.max_backtracks):
                trial = u + tau * v
                en_t = prob.energies(trial)
                if en_t[1] > 0 and en_t[2] > 0 and en_t[0] > 0:
                    lq = prob.log_q(en_t)
                    if lq >= logq + config.armijo * tau * slope:
                        break
                tau *= config.shrink
            else:
                status = Status.STALLED
                break
            scale = 1.0 / math.sqrt(en_t[1])
            u = trial * scale
            en = (en_t[0] * scale ** prob.p, 1.0, en_t[2] * scale ** (2 * prob.E.q))
            logq = max(lq, logq)
            step = tau
    finally:
        if trace:
            trace.close()

    profile = RadialGridFunction(grid, u)
    c, t = normalizing_scale(en[1], en[2], params)
    f = profile.dilated(t).scaled(c)
    norm = {"seminorm_sq": 1.0, "coulomb": en[2] * c ** (2 * prob.E.q) if params.is_critical_q
            else 1.0, "amplitude": c, "dilation": t}
    return OptimizerState(f, params, exps, step, history, norm, status, profile,
                          edge_warnings(profile, prob.p))


EDGE_FRACTION = 1e-3


def edge_warnings(profile: RadialGridFunction, p: float) -> list:
    """Flags L^p mass in the outer decade of the grid or within the first three cells."""
    nodes = profile.nodes
    dens = profile.weights * np.abs(profile.values) ** p
    total = float(dens.sum())
    out = []
    if total <= 0:
        return out
    outer = float(dens[nodes > nodes[-1] / 10].sum()) / total
    if outer > EDGE_FRACTION:
        out.append(f"{outer:.2%} of the L^p mass lies in the outer decade of the grid; "
                   "the optimizer may be truncated (increase r_max)")
    pos = nodes[nodes > 0]
    if len(pos):
        inner = float(dens[nodes <= 3 * pos[0]].sum()) / total
        if inner > EDGE_FRACTION:
            out.append(f"{inner:.2%} of the L^p mass lies within three cells of the origin; "
                       "the profile is under-resolved (decrease r_min)")
    return out


def multi_start(params: ParamSet, grid: Optional[Grid] = None, starts: int = 5, seed: int = 0,
                config: Optional[AscentConfig] = None, include_default: bool = False):
    """Ascents from seeded random bump superpositions; returns the list of states."""
    grid = grid or default_grid(params.d)
    rng = np.random.default_rng(seed)
    inits = [default_initial(grid)] if include_default else []
    while len(inits) < starts:
        inits.append(random_initial(grid, rng))
    return [ascend(f0, params, config) for f0 in inits]


@dataclass
class Gradients:
    lp_p: np.ndarray
    seminorm_sq: np.ndarray
    coulomb: np.ndarray
    degenerate: bool = False


def gradients(f: RadialGridFunction, params: ParamSet, threads: int = 1) -> Gradients:
    """First variations of lp^p, seminorm^2 and D per node (0 at exact zeros)."""
    if f.is_zero:
        z = np.zeros(f.grid.n)
        return Gradients(z, z.copy(), z.copy(), degenerate=True)
    E = GridEnergies(f.grid, params, threads=threads)
    return Gradients(*E.gradients(np.asarray(f.values, dtype=float)))


def gradient_check(params: ParamSet, f: RadialGridFunction, directions: int = 20,
                   h: float = 1e-6, seed: int = 0, threads: int = 1) -> dict:
    """Max relative error of analytic gradients against Richardson central differences."""
    E = GridEnergies(f.grid, params, threads=threads)
    u = np.array(f.values, dtype=float)
    grads = E.gradients(u)
    funcs = (E.lp_power, E.seminorm_sq, E.coulomb)
    rng = np.random.default_rng(seed)
    worst = {"lp_p": 0.0, "seminorm_sq": 0.0, "coulomb": 0.0}
    scale = float(np.max(np.abs(u))) or 1.0
    for _ in range(directions):
        v = rng.standard_normal(u.shape) * scale
        v[-1] = 0.0
        for name, F, g in zip(worst, funcs, grads):
            def cd(eps):
                return (F(u + eps * v) - F(u - eps * v)) / (2 * eps)
            fd = (4 * cd(h / 2) - cd(h)) / 3
            an = float(g @ v)
            err = abs(fd - an) / max(abs(an), 1e-300)
            worst[name] = max(worst[name], err)
    return worst
