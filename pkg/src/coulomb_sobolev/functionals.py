"""Energies of radial grid functions and the weighted integrals built on them.

Conventions: ``lp_norm`` and the s = 1 seminorm carry the sphere area
omega_{d-1}; the Gagliardo seminorm and the Coulomb energy use the radial
kernels of ``kernels`` with normalisation 1. All checks are constant free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exponents import ParamSet, ParameterError, quotient_exponents, to_float
from .kernels import (NEAR_BAND, KernelMatrix, KernelSpec, assemble, cell_pair_integrals, nodal_correction,
                      exterior_integrals)
from .radial import Grid, RadialGridFunction, sphere_area


class Ratio(float):
    """Float carrying a ``degenerate`` flag for the 0/0 convention."""

    def __new__(cls, value, degenerate: bool = False):
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj


def _ratio(num: float, den: float, what: str) -> Ratio:
    if num == 0:
        return Ratio(0.0, degenerate=(den == 0))
    if den <= 0:
        raise ParameterError(f"{what}: zero denominator with nonzero numerator")
    return Ratio(num / den)


# ------------------------------------------------------------- L^p

def lp_power(f: RadialGridFunction, p: float) -> float:
    """int |u|^p dx, including omega_{d-1}."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    return sphere_area(f.d) * float(np.dot(f.weights, np.abs(f.values) ** p))


def lp_norm(f: RadialGridFunction, p: float) -> float:
    return lp_power(f, p) ** (1.0 / p)


def _radial_weights(f: RadialGridFunction, power: float) -> np.ndarray:
    """Node weights for the measure r^(d-1+power) dr (node 0 integrated exactly)."""
    nodes, w = f.nodes, f.weights
    out = np.empty_like(w)
    pos = nodes > 0
    with np.errstate(divide="ignore"):
        out[pos] = w[pos] * nodes[pos] ** power
    if not pos[0]:
        k = f.d + power
        if k <= 0:
            raise ParameterError("weight not integrable at the origin")
        h = nodes[1]
        out[0] = h ** k * (1 / k - 1 / (k + 1))
    return out


def _partial(f: RadialGridFunction, dens: np.ndarray, R: float, inside: bool) -> float:
    """int over r < R (or r > R) of the nodal density, split linearly inside a cell."""
    nodes = f.nodes
    cum = np.concatenate([[0.0], np.cumsum(dens)])
    # cumulative mass up to node i: half of node i's share
    at_node = cum[:-1] + 0.5 * dens
    if R <= nodes[0]:
        below = 0.0
    elif R >= nodes[-1]:
        below = cum[-1]
    else:
        below = float(np.interp(R, nodes, at_node))
    total = cum[-1]
    return below if inside else total - below


def weighted_moment(f: RadialGridFunction, q: float, power: float,
                    R: Optional[float] = None, region: str = "all") -> float:
    """int |u|^q |x|^power dx over the whole space, r < R or r > R (omega included)."""
    dens = _radial_weights(f, power) * np.abs(f.values) ** q
    if region == "all":
        return sphere_area(f.d) * float(dens.sum())
    return sphere_area(f.d) * _partial(f, dens, R, region == "inside")


# ------------------------------------------------------------ seminorm

def _check_s(s):
    s = float(s)
    if not 0 < s <= 1:
        raise ParameterError("numeric seminorm supports s ∈ (0,1]; use exponents-only mode")
    return s


def _check_compact(f: RadialGridFunction):
    if not f.is_zero and f.support[1] == f.grid.n - 1:
        raise ParameterError("not compactly supported within grid")


def _cell_measure(nodes: np.ndarray, d: int) -> np.ndarray:
    return (nodes[1:] ** d - nodes[:-1] ** d) / d


def derivative_matrix(nodes: np.ndarray) -> np.ndarray:
    """Dense operator of numpy.gradient: second order, one-sided at the ends."""
    return np.gradient(np.eye(len(nodes)), nodes, axis=0)


def seminorm_sq(f: RadialGridFunction, s: float, matrix: Optional[KernelMatrix] = None,
                threads: int = 1) -> float:
    """Squared fractional seminorm: Gagliardo form for s < 1, Dirichlet energy for s = 1."""
    s = _check_s(s)
    _check_compact(f)
    if f.is_zero:
        return 0.0
    if s == 1.0:
        sl = f.support_slice(pad=1)
        x, u = f.nodes[sl], f.values[sl]
        slope = np.diff(u) / np.diff(x)
        return sphere_area(f.d) * float(np.dot(slope ** 2, _cell_measure(x, f.d)))
    sl = f.support_slice()
    spec = KernelSpec.gagliardo(f.d, s)
    if matrix is None:
        matrix = assemble(spec, f.grid, rows=sl, cols=sl, threads=threads)
    return _gagliardo_window(f, matrix)


def pair_weights(matrix: KernelMatrix, weights: np.ndarray) -> np.ndarray:
    """Off-diagonal pair weights M_ij with sum (u_i - u_j)^2 M_ij the off-diagonal energy.

    Far pairs use K_ij w_i w_j. Pairs within NEAR_BAND of the diagonal use the
    cell-pair integral of (r - rho)^2 K divided by (r_i - r_j)^2, which is exact
    for locally linear u.
    """
    nodes = matrix.nodes
    ri = np.arange(len(nodes))[matrix.rows]
    ci = np.arange(len(nodes))[matrix.cols]
    M = matrix.entries * weights[ri][:, None] * weights[ci][None, :]
    off = ri[:, None] - ci[None, :]
    M[off == 0] = 0.0
    near = (np.abs(off) >= 1) & (np.abs(off) <= NEAR_BAND)
    a, b = np.nonzero(near)
    if len(a):
        i, j = ri[a], ci[b]
        J = cell_pair_integrals(matrix.spec, nodes, i, j)
        M[a, b] = J / (nodes[i] - nodes[j]) ** 2
    return M


def _gagliardo_window(f: RadialGridFunction, matrix: KernelMatrix) -> float:
    sl = f.support_slice()
    if matrix.rows != sl or matrix.cols != sl:
        raise ParameterError("Gagliardo matrix must be the support block")
    u, w, nodes = f.values, f.weights, f.nodes
    us, ws = u[sl], w[sl]
    ri = np.arange(sl.start, sl.stop)
    M = pair_weights(matrix, w)
    du = us[:, None] - us[None, :]
    t_in = float(np.sum(du * du * M))
    # one point outside the support cells, where u = 0: both orders
    c0 = 0.5 * (nodes[sl.start] + nodes[sl.start - 1]) if sl.start > 0 else 0.0
    c1 = 0.5 * (nodes[sl.stop - 1] + nodes[sl.stop])
    ext = exterior_integrals(matrix.spec, nodes[sl], c0, c1)
    t_out = 2.0 * float(np.sum(us * us * ws * ext))
    up = np.gradient(u, nodes)[sl]
    diag = matrix.entries[np.arange(len(ri)), np.arange(len(ri))]
    corr = nodal_correction(matrix.spec, nodes)[sl]
    t_diag = float(np.sum(up * up * (ws * ws * diag - corr)))
    return t_in + t_out + t_diag


# ------------------------------------------------------------- Coulomb

def coulomb_energy(f: RadialGridFunction, q: float, alpha: float,
                   matrix: Optional[KernelMatrix] = None, threads: int = 1) -> float:
    """D(u) = int int |u|^q(x) |u|^q(y) |x-y|^(alpha-d) as a quadratic form in |u|^q."""
    if f.is_zero:
        return 0.0
    sl = f.support_slice()
    spec = KernelSpec.riesz(f.d, alpha) if matrix is None else matrix.spec
    dens = np.abs(f.values) ** q
    # nodal rule defect next to the diagonal, see kernels.nodal_correction
    corr = float(np.sum((nodal_correction(spec, f.nodes) * dens * dens)[sl]))
    if matrix is None:
        matrix = assemble(spec, f.grid, rows=sl, cols=sl, threads=threads)
        vec = (dens * f.weights)[sl]
        return float(vec @ matrix.entries @ vec) - corr
    vec = dens * f.weights
    r, c = matrix.rows, matrix.cols
    if r.start > sl.start or r.stop < sl.stop or c.start > sl.start or c.stop < sl.stop:
        raise ParameterError("Riesz matrix does not cover the support")
    if matrix.diagonal_policy != "cell_averaged":
        corr = 0.0
    return float(vec[r] @ matrix.entries @ vec[c]) - corr


# ------------------------------------------------------------ reports

@dataclass
class EnergyReport:
    lp_norm: float
    seminorm_sq: float
    coulomb: float
    quotient: float
    params: ParamSet
    grid_meta: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def lp_power(self) -> float:
        return self.lp_norm ** to_float(self.params.p)

    def to_dict(self) -> dict:
        return {"lp_norm": self.lp_norm, "seminorm_sq": self.seminorm_sq,
                "coulomb": self.coulomb, "quotient": self.quotient,
                "params": self.params.to_dict(), "grid": self.grid_meta,
                "degenerate": self.degenerate}


def quotient_from_energies(lp: float, sem_sq: float, coul: float, beta, gamma) -> Ratio:
    beta, gamma = to_float(beta), to_float(gamma)
    if lp == 0:
        return Ratio(0.0, degenerate=True)
    if (beta != 0 and sem_sq <= 0) or (gamma != 0 and coul <= 0):
        raise ParameterError("degenerate quotient: zero energy with nonzero L^p norm")
    den = (sem_sq ** (beta / 2) if beta else 1.0) * (coul ** gamma if gamma else 1.0)
    return Ratio(lp / den)


def quotient(f: RadialGridFunction, params: ParamSet, exponents=None, threads: int = 1) -> Ratio:
    """||u||_p / (seminorm^beta D^gamma); exponents default to the GN pair."""
    if params.p is None:
        raise ParameterError("quotient needs p")
    if exponents is None:
        if params.is_critical_q:
            raise ParameterError("CriticalQ: pass refined Sobolev exponents explicitly")
        exponents = quotient_exponents(params)
    beta, gamma = exponents[0], exponents[1]
    p = to_float(params.p)
    lp = lp_norm(f, p)
    sem = seminorm_sq(f, to_float(params.s), threads=threads) if to_float(beta) else 0.0
    coul = (coulomb_energy(f, to_float(params.q), to_float(params.alpha), threads=threads)
            if to_float(gamma) else 0.0)
    return quotient_from_energies(lp, sem, coul, beta, gamma)


def evaluate(f: RadialGridFunction, params: ParamSet, exponents=None,
             threads: int = 1) -> EnergyReport:
    if params.p is None:
        raise ParameterError("energy evaluation needs p")
    p, s = to_float(params.p), to_float(params.s)
    q, a = to_float(params.q), to_float(params.alpha)
    lp = lp_norm(f, p)
    sem = seminorm_sq(f, s, threads=threads)
    coul = coulomb_energy(f, q, a, threads=threads)
    if exponents is None:
        exponents = quotient_exponents(params)
    Q = quotient_from_energies(lp, sem, coul, *exponents)
    return EnergyReport(lp, sem, coul, float(Q), params, f.grid.meta, Q.degenerate)


# ---------------------------------------------------- auxiliary ratios

def ball_bound_ratio(f: RadialGridFunction, q: float, alpha: float, R_ball: float,
                     coulomb: Optional[float] = None) -> Ratio:
    """(int_{B_R} |u|^q)^2 / (R^(d-alpha) D(u))."""
    if R_ball > f.grid.r_max:
        raise ParameterError("ball radius exceeds the grid")
    num = weighted_moment(f, q, 0.0, R_ball, "inside") ** 2
    D = coulomb_energy(f, q, alpha) if coulomb is None else coulomb
    return _ratio(num, R_ball ** (f.d - alpha) * D, "ball bound")


def ruiz_exterior(f: RadialGridFunction, q: float, alpha: float, eps: float, R: float,
                  coulomb: Optional[float] = None) -> Ratio:
    _check_ruiz(eps, R)
    m = weighted_moment(f, q, -(f.d - alpha) / 2 - eps, R, "outside")
    D = coulomb_energy(f, q, alpha) if coulomb is None else coulomb
    return _ratio(m * R ** eps, math.sqrt(D), "Ruiz exterior")


def ruiz_interior(f: RadialGridFunction, q: float, alpha: float, eps: float, R: float,
                  coulomb: Optional[float] = None) -> Ratio:
    _check_ruiz(eps, R)
    m = weighted_moment(f, q, -(f.d - alpha) / 2 + eps, R, "inside")
    D = coulomb_energy(f, q, alpha) if coulomb is None else coulomb
    return _ratio(m / R ** eps, math.sqrt(D), "Ruiz interior")


def _check_ruiz(eps, R):
    if not eps > 0:
        raise ParameterError("Ruiz inequality needs eps > 0")
    if not R > 0:
        raise ParameterError("Ruiz inequality needs R > 0")


def rubin_ratio(f: RadialGridFunction, s: float, r: float, beta: float,
                sem_sq: Optional[float] = None) -> Ratio:
    """(int |u|^r |x|^(-beta r))^(1/r) / seminorm."""
    lhs = weighted_moment(f, r, -beta * r) ** (1 / r)
    sem = seminorm_sq(f, s) if sem_sq is None else sem_sq
    return _ratio(lhs, math.sqrt(sem), "Rubin")


def weak_ni_ratio(f: RadialGridFunction, s: float, p: float, R: float,
                  sem_sq: Optional[float] = None) -> Ratio:
    """int_{r>R} |u|^p / (R^(d - p(d/2 - s)) seminorm^p)."""
    d = f.d
    ext = weighted_moment(f, p, 0.0, R, "outside")
    sem = seminorm_sq(f, s) if sem_sq is None else sem_sq
    return _ratio(ext, R ** (d - p * (d / 2 - s)) * sem ** (p / 2), "weak Ni")


def morrey_norm(f: RadialGridFunction, r_exponent: float = 1.0,
                gamma_exponent: Optional[float] = None, s: Optional[float] = None) -> float:
    """sup over grid radii R of R^gamma (average of |u|^r over B_R(0))^(1/r)."""
    d = f.d
    if gamma_exponent is None:
        if s is None:
            raise ParameterError("morrey_norm needs gamma_exponent or s")
        if not 0 < s < d / 2:
            raise ParameterError("Morrey norm needs 0 < s < d/2")
        gamma_exponent = (d - 2 * s) / 2
    dens = f.weights * np.abs(f.values) ** r_exponent
    R = f.nodes[1:]
    mass = np.array([_partial(f, dens, x, True) for x in R]) * sphere_area(d)
    vol = sphere_area(d) * R ** d / d
    vals = R ** gamma_exponent * (mass / vol) ** (1 / r_exponent)
    return float(vals.max()) if len(vals) else 0.0


# ------------------------------------------------------ optimal scale

@dataclass(frozen=True)
class ScaleResult:
    lambda_star: Optional[float]
    value: float
    a: float
    b: float
    diagnosis: str

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def scale_exponents(params: ParamSet):
    d, s, al = to_float(params.d), to_float(params.s), to_float(params.alpha)
    q, p = to_float(params.q), to_float(params.p)
    return 2 * d / p - d + 2 * s, 2 * d / p - (d + al) / q


def optimal_scale(A_grad: float, B_coul: float, params: ParamSet,
                  a: Optional[float] = None, b: Optional[float] = None) -> ScaleResult:
    """Minimise F(lam) = lam^a A + lam^b B over lam > 0."""
    if not (A_grad > 0 and B_coul > 0):
        raise ParameterError("optimal_scale needs positive A and B")
    if a is None or b is None:
        a, b = scale_exponents(params)
    tiny = 1e-12
    if abs(a) < tiny and abs(b) < tiny:
        return ScaleResult(None, A_grad + B_coul, 0.0, 0.0, "scale-free endpoint")
    if a * b < 0:
        lam = (-b * B_coul / (a * A_grad)) ** (1 / (a - b))
        return ScaleResult(lam, lam ** a * A_grad + lam ** b * B_coul, a, b, "minimizer")
    # same sign (or one vanishing): F is monotone, report the limit
    if a >= 0 and b >= 0:
        val = (A_grad if abs(a) < tiny else 0.0) + (B_coul if abs(b) < tiny else 0.0)
        return ScaleResult(0.0, val, a, b, "monotone: infimum as lambda -> 0")
    val = (A_grad if abs(a) < tiny else 0.0) + (B_coul if abs(b) < tiny else 0.0)
    return ScaleResult(math.inf, val, a, b, "monotone: infimum as lambda -> infinity")


# ------------------------------------------- fixed-grid energy engine

class GridEnergies:
    """Energies and first variations on one fixed grid (matrices assembled once)."""

    def __init__(self, grid: Grid, params: ParamSet, threads: int = 1, floor: float = 1e-14):
        self.grid = grid
        self.params = params
        self.d = grid.d
        self.p = to_float(params.p)
        self.s = _check_s(to_float(params.s))
        self.q = to_float(params.q)
        self.alpha = to_float(params.alpha)
        self.floor = floor
        self.omega = sphere_area(grid.d)
        w = grid.weights
        self.w = w
        self.riesz = assemble(KernelSpec.riesz(grid.d, self.alpha), grid, threads=threads)
        kr = self.riesz.entries.copy()
        kr[np.diag_indices_from(kr)] -= nodal_correction(self.riesz.spec, grid.nodes) / (w * w)
        self.riesz_form = kr
        self.form = seminorm_form(grid, self.s, threads=threads)

    def lp_power(self, u):
        return self.omega * float(np.dot(self.w, np.abs(u) ** self.p))

    def seminorm_sq(self, u):
        return float(u @ self.form @ u)

    def coulomb(self, u):
        v = np.abs(u) ** self.q * self.w
        return float(v @ self.riesz_form @ v)

    def _pow_sign(self, u, e):
        # sub-gradient 0 at exact zeros; floor keeps |u|^e finite for e < 0
        au = np.abs(u)
        out = np.where(au > 0, np.sign(u) * np.maximum(au, self.floor) ** e, 0.0)
        return out

    def gradients(self, u):
        """(grad lp^p, grad seminorm^2, grad D) per node."""
        g_lp = self.p * self._pow_sign(u, self.p - 1) * self.omega * self.w
        g_sem = 2.0 * (self.form @ u)
        v = np.abs(u) ** self.q * self.w
        g_d = 2.0 * self.q * self._pow_sign(u, self.q - 1) * self.w * (self.riesz_form @ v)
        return g_lp, g_sem, g_d


def seminorm_form(grid: Grid, s: float, threads: int = 1) -> np.ndarray:
    """Symmetric matrix A with u^T A u the squared seminorm on the whole grid.

    Identical to ``seminorm_sq`` for s = 1. For s < 1 every pair is sampled on
    the grid, whereas ``seminorm_sq`` integrates the region outside the support
    with Gauss panels; the two agree to second order in the local spacing.
    """
    nodes, w, d = grid.nodes, grid.weights, grid.d
    n = len(nodes)
    if s == 1.0:
        h = np.diff(nodes)
        c = sphere_area(d) * _cell_measure(nodes, d) / h ** 2
        A = np.zeros((n, n))
        idx = np.arange(n - 1)
        A[idx, idx] += c
        A[idx + 1, idx + 1] += c
        A[idx, idx + 1] -= c
        A[idx + 1, idx] -= c
        return A
    M = assemble(KernelSpec.gagliardo(d, s), grid, threads=threads)
    G = np.diag(M.entries).copy()
    W = pair_weights(M, w)
    # sum_{i != j} (u_i - u_j)^2 W_ij = 2 u^T (diag(W 1) - W) u
    A = 2.0 * (np.diag(W.sum(axis=1)) - W)
    Dm = derivative_matrix(nodes)
    A += Dm.T @ ((G * w * w - nodal_correction(M.spec, nodes))[:, None] * Dm)
    A += np.diag(2.0 * w * M.tail)
    return 0.5 * (A + A.T)
