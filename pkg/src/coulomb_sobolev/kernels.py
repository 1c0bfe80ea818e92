"""Radial interaction kernels and dense kernel matrices.

Both kernels are the angular average of |x - y|^(-2e) over two spheres,

    K(r, rho) = int_0^1 z^(a-1) (1-z)^(a-1) / ((r+rho)^2 - 4 r rho z)^e dz,
    a = (d-1)/2,

with e = (d-alpha)/2 for the Riesz kernel and e = (d+2s)/2 for the Gagliardo
kernel. The normalisation constant is fixed to 1.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_fn, binom, digamma, expit, gammaln, hyp2f1, rgamma, gamma as gamma_fn
from scipy.special import zeta

from .exponents import ParameterError
from .radial import Grid

N_CAP = 4096
QUAD_RTOL = 1e-10

_GL_X = np.polynomial.legendre.leggauss(8)
_GL_Y = np.polynomial.legendre.leggauss(9)
_GL_TAIL = np.polynomial.legendre.leggauss(48)


@dataclass(frozen=True)
class KernelSpec:
    d: int
    kind: str  # "riesz" or "gagliardo"
    alpha: Optional[float] = None
    s: Optional[float] = None
    normalization: float = 1.0

    def __post_init__(self):
        if self.d < 2:
            raise ParameterError("radial kernels need d >= 2")
        if self.kind == "riesz":
            if self.alpha is None or not (0 < self.alpha < self.d):
                raise ParameterError("Riesz kernel needs 0 < alpha < d")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.kind == "gagliardo":
            if self.s is None or not (0 < self.s < 1):
                raise ParameterError("fractional kernel only for 0<s<1")
            object.__setattr__(self, "s", float(self.s))
        else:
            raise ParameterError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def riesz(cls, d, alpha):
        return cls(int(d), "riesz", alpha=float(alpha))

    @classmethod
    def gagliardo(cls, d, s):
        return cls(int(d), "gagliardo", s=float(s))

    @property
    def a(self) -> float:
        return (self.d - 1) / 2.0

    @property
    def e(self) -> float:
        if self.kind == "riesz":
            return (self.d - self.alpha) / 2.0
        return (self.d + 2 * self.s) / 2.0

    @property
    def diag_power(self) -> float:
        """Exponent of |r - rho| in the leading diagonal behaviour (0 means log)."""
        return 2 * (self.a - self.e)

    @property
    def homogeneity(self) -> float:
        return -2 * self.e

    @property
    def param(self) -> float:
        return self.alpha if self.kind == "riesz" else self.s

    def singular_diagonal(self) -> bool:
        return self.diag_power <= 0

    def to_dict(self) -> dict:
        return {"d": self.d, "kind": self.kind,
                ("alpha" if self.kind == "riesz" else "s"): self.param}


# ----------------------------------------------------------- kernel values

def _log_series_riesz(a, A, w):
    # alpha = 1: c - a - b = 0, logarithmic connection formula in w = 1 - z
    total = np.zeros_like(w)
    lw = np.log(w)
    coef = np.ones_like(w)
    wn = np.ones_like(w)
    for n in range(60):
        if n:
            coef = coef * ((a + n - 1) / n) ** 2
            wn = wn * w
        total += coef * wn * (2 * digamma(n + 1) - 2 * digamma(a + n) - lw)
    return A ** (-a) * total


def _log_series_gagliardo_half(a, A, w):
    # s = 1/2: F(a+1, a; 2a; z) has c - a - b = -1
    lw = np.log(w)
    lead = math.exp(gammaln(2 * a) - gammaln(a + 1) - gammaln(a)) / w
    pref = gamma_fn(2 * a) * rgamma(a) * rgamma(a - 1)
    total = np.zeros_like(w)
    coef = 1.0
    wn = np.ones_like(w)
    for n in range(60):
        if n:
            coef = coef * (a + n) * (a + n - 1) / (n * (n + 1))
            wn = wn * w
        total += coef * wn * (lw - digamma(n + 1) - digamma(n + 2)
                              + digamma(a + 1 + n) + digamma(a + n))
    F = lead + pref * total
    return A ** (-(a + 1)) * beta_fn(a, a) * F


def kernel_values(spec: KernelSpec, r, rho) -> np.ndarray:
    """Vectorised kernel for r != rho (off-diagonal entries)."""
    r = np.asarray(r, dtype=float)
    rho = np.asarray(rho, dtype=float)
    r, rho = np.broadcast_arrays(r, rho)
    lo = np.minimum(r, rho)
    hi = np.maximum(r, rho)
    v = lo + hi
    out = np.empty(r.shape)
    zero = lo == 0
    if np.any(zero):
        out[zero] = hi[zero] ** (-2 * spec.e) * beta_fn(spec.a, spec.a)
    nz = ~zero
    if not np.any(nz):
        return out
    lo_, hi_, v_ = lo[nz], hi[nz], v[nz]
    if spec.d == 3:
        x = 2 * lo_ / v_
        with np.errstate(divide="ignore"):
            L = np.where(x < 0.5, np.log1p(-x), np.log((hi_ - lo_) / v_))
        b = spec.diag_power
        prod = 2 * lo_ * hi_
        if b == 0:
            out[nz] = -L / prod
        else:
            out[nz] = v_ ** b * np.expm1(b * L) / (-prod * b)
        return out
    a, e = spec.a, spec.e
    diff = hi_ - lo_
    with np.errstate(over="ignore"):
        val = diff ** (-2 * e) * beta_fn(a, a) * hyp2f1(e, a, 2 * a, -4 * lo_ * hi_ / diff ** 2)
    near = (diff / v_) ** 2 < 0.3
    degenerate = None
    if spec.kind == "riesz" and abs(spec.alpha - 1.0) < 1e-15:
        degenerate = _log_series_riesz
    elif spec.kind == "gagliardo" and abs(spec.s - 0.5) < 1e-15:
        degenerate = _log_series_gagliardo_half
    if degenerate is not None and np.any(near):
        w = (diff[near] / v_[near]) ** 2
        val[near] = degenerate(a, v_[near] ** 2, w)
    out[nz] = val
    return out


def kernel_quad(spec: KernelSpec, r: float, rho: float) -> float:
    """Adaptive quadrature of the angular integral (substitution z = cos^2)."""
    r, rho = float(r), float(rho)
    if r == rho and spec.singular_diagonal():
        raise ParameterError("on-diagonal; use cell-averaged assembly")
    a, e = spec.a, spec.e
    diff2 = (r - rho) ** 2
    B = 4 * r * rho
    p = 2 * a - 1

    # z = 1 - sin^2(t): peak of the integrand sits at t = 0
    def f(t):
        st, ct = math.sin(t), math.cos(t)
        return 2 * (st * ct) ** p / (diff2 + B * st * st) ** e

    width = math.sqrt(diff2 / B) if B > 0 else 1.0
    pts = [x for x in (width, 10 * width, 100 * width) if 0 < x < math.pi / 2]
    val, err = integrate.quad(f, 0.0, math.pi / 2, epsabs=0.0, epsrel=QUAD_RTOL,
                              limit=400, points=pts or None)
    if not math.isfinite(val) or err > 10 * QUAD_RTOL * abs(val) + 1e-300:
        raise ArithmeticError("kernel quadrature did not converge")
    return val


def riesz_kernel(spec: KernelSpec, r, rho) -> float:
    if spec.kind != "riesz":
        raise ParameterError("riesz_kernel needs a Riesz spec")
    return _scalar_kernel(spec, r, rho)


def gagliardo_kernel(spec: KernelSpec, r, rho) -> float:
    if spec.kind != "gagliardo":
        raise ParameterError("gagliardo_kernel needs a Gagliardo spec")
    return _scalar_kernel(spec, r, rho)


def _scalar_kernel(spec, r, rho):
    if r <= 0 and rho <= 0:
        raise ParameterError("kernel undefined at r = rho = 0")
    if r == rho:
        if spec.singular_diagonal():
            raise ParameterError("on-diagonal; use cell-averaged assembly")
        # finite diagonal value for alpha > 1
        return (2 * r) ** (-2 * spec.e) * beta_fn(spec.a, spec.a - spec.e)
    if spec.d == 3:
        return float(kernel_values(spec, r, rho))
    return kernel_quad(spec, r, rho)


# ------------------------------------------------------ diagonal treatment

def _cells(nodes: np.ndarray):
    mid = 0.5 * (nodes[1:] + nodes[:-1])
    c0 = np.concatenate([[nodes[0]], mid])
    c1 = np.concatenate([mid, [nodes[-1]]])
    return c0, c1


def _lead(spec: KernelSpec):
    """Diagonal singularity c * m^(1-d) * g(r - rho), m the midpoint.

    Returns (c, b, log): g = |u|^b, or g = -2 log|u| when ``log``. For the
    Gagliardo kernel the pair describes (r - rho)^2 K, whose exponent is 1 - 2s.
    """
    a, e = spec.a, spec.e
    c = 2.0 ** (-(spec.d - 1))
    if spec.kind == "gagliardo":
        return c * beta_fn(a, e - a), spec.diag_power + 2, False
    if spec.diag_power == 0:
        return c, 0.0, True
    # Gamma(e - a) < 0 for 1 < alpha < 3; the constant continues analytically
    return c * math.gamma(a) * math.gamma(e - a) / math.gamma(e), spec.diag_power, False


def _lead_eval(b, log, u):
    return -2 * np.log(u) if log else u ** b


def _lead_strip(b, log, ell):
    """int_{-ell}^{ell} g(u) du."""
    if log:
        return -4 * ell * (np.log(ell) - 1)
    return 2 * ell ** (b + 1) / (b + 1)


def _tanh_sinh(h=0.05, tmax=3.2):
    t = np.arange(-tmax, tmax + h / 2, h)
    z = np.pi * np.sinh(t)
    y = expit(z)
    w = h * np.pi * np.cosh(t) * y * expit(-z)
    return y, w


_TS_Y, _TS_W = _tanh_sinh()


def diagonal_averages(spec: KernelSpec, nodes: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Cell averages on the diagonal.

    Riesz: average of K over C_i x C_i. Gagliardo: average of (r-rho)^2 K, the
    coefficient of u'(r_i)^2 in the diagonal cell. C_i is the dual cell around
    node i. The leading singularity is integrated along the diagonal with a
    tanh-sinh rule, the bounded remainder with staggered 8 x 9 Gauss points.
    Node 0 uses an r^(d-1) weighted average, finite for every alpha.
    """
    c0, c1 = _cells(nodes)
    c0, c1 = c0[idx], c1[idx]
    r0 = nodes[idx]
    L = c1 - c0
    gx, wx = _GL_X
    gy, wy = _GL_Y
    X = c0[:, None, None] + 0.5 * L[:, None, None] * (gx[None, :, None] + 1)
    Y = c0[:, None, None] + 0.5 * L[:, None, None] * (gy[None, None, :] + 1)
    W = 0.25 * wx[None, :, None] * wy[None, None, :]
    K = kernel_values(spec, X, Y)
    if spec.kind == "gagliardo":
        K = K * (X - Y) ** 2
    out = np.empty(len(idx))
    use_lead = (r0 > 0) & (spec.diag_power < 2)
    if np.any(use_lead):
        c, b, log = _lead(spec)
        p = 1 - spec.d
        Xl, Yl, Ll = X[use_lead], Y[use_lead], L[use_lead]
        rem = K[use_lead] - c * (0.5 * (Xl + Yl)) ** p * _lead_eval(b, log, np.abs(Xl - Yl))
        H = 0.5 * Ll[:, None]
        dist = H * _TS_Y[None, :]
        lo, hi = c0[use_lead][:, None], c1[use_lead][:, None]
        mass = ((lo + dist) ** p + (hi - dist) ** p) * _lead_strip(b, log, 2 * dist)
        lead = c * H[:, 0] * (mass * _TS_W[None, :]).sum(axis=1)
        out[use_lead] = lead / Ll ** 2 + (rem * W).sum(axis=(1, 2))
    plain = ~use_lead
    if np.any(plain):
        wt = np.where(r0[plain, None, None] > 0, 1.0, (X[plain] * Y[plain]) ** (spec.d - 1))
        out[plain] = (K[plain] * wt * W).sum(axis=(1, 2)) / (wt * W).sum(axis=(1, 2))
    return out


def gagliardo_tail(spec: KernelSpec, nodes: np.ndarray, r_max: float) -> np.ndarray:
    """int_{r_max}^inf K(r_i, rho) rho^(d-1) d rho for every node."""
    s, d = spec.s, spec.d
    out = np.zeros(len(nodes))
    # rho = r_max / t, t = tau^(1/(2s)) removes the t^(2s-1) endpoint behaviour
    g, w = _GL_TAIL
    tau = 0.5 * (g + 1)
    wt = 0.5 * w
    t = tau ** (1 / (2 * s))
    rho = r_max / t
    jac = r_max ** (-2 * s) / (2 * s)
    far = nodes <= 0.5 * r_max
    if np.any(far):
        K = kernel_values(spec, nodes[far][:, None], rho[None, :])
        # rho^(d-1) d rho = r_max^d t^(-d-2s) d tau / (2s)
        f = K * (r_max / t) ** (d + 2 * s) * jac
        out[far] = (f * wt).sum(axis=1)
    for i in np.flatnonzero(~far):
        r = float(nodes[i])
        if r >= r_max:
            out[i] = 0.0  # profiles vanish at the outer node
            continue
        val, _ = integrate.quad(
            lambda x: float(kernel_values(spec, r, x)) * x ** (d - 1),
            r_max, np.inf, epsrel=1e-10, limit=200)
        out[i] = val
    return out


_GL_PAIR = np.polynomial.legendre.leggauss(16)
_GL_PANEL = np.polynomial.legendre.leggauss(10)
NEAR_BAND = 3


def cell_pair_integrals(spec: KernelSpec, nodes: np.ndarray, i: np.ndarray,
                        j: np.ndarray) -> np.ndarray:
    """int_{C_i} int_{C_j} (r-rho)^2 K(r, rho) (r rho)^(d-1) for pairs with i != j."""
    c0, c1 = _cells(nodes)
    g, w = _GL_PAIR
    x = 0.5 * (g + 1)
    ai, li = c0[i][:, None, None], (c1 - c0)[i][:, None, None]
    aj, lj = c0[j][:, None, None], (c1 - c0)[j][:, None, None]
    X = ai + li * x[None, :, None]
    Y = aj + lj * x[None, None, :]
    W = 0.25 * w[None, :, None] * w[None, None, :]
    K = kernel_values(spec, X, Y) * (X - Y) ** 2 * (X * Y) ** (spec.d - 1)
    return (K * W).sum(axis=(1, 2)) * li[:, 0, 0] * lj[:, 0, 0]


_DEFECT_DIRECT = 24
_DEFECT_TERMS = 12


def midpoint_defect_sum(power: float, start: int, log: bool = False) -> float:
    """sum_{k >= start} [g(k) - int_{-1}^{1} (1 - |t|) g(k + t) dt].

    g(x) = x^power, or -2 log x when ``log``. The bracket is the error of the
    one-point rule on a pair of unit cells at distance k. Terms below
    _DEFECT_DIRECT are summed directly; the tail uses the Taylor expansion of
    the second difference and Hurwitz zeta sums.
    """
    k = np.arange(start, _DEFECT_DIRECT, dtype=float)
    n = np.arange(4, 4 + 2 * _DEFECT_TERMS, 2, dtype=float)
    K0 = float(max(start, _DEFECT_DIRECT))
    if log:
        def G2(x):
            with np.errstate(divide="ignore", invalid="ignore"):
                return np.where(x > 0, 0.5 * x * x * np.log(x) - 0.75 * x * x, 0.0)
        tri = G2(k + 1) - 2 * G2(k) + G2(k - 1)
        head = float(np.sum(-2 * np.log(k) + 2 * tri))
        coef = np.exp(gammaln(n - 2) - gammaln(n + 1))
        tail = -4 * float(np.sum(coef * zeta(n - 2, K0)))
        return head + tail
    q = power + 2
    tri = ((k + 1) ** q - 2 * k ** q + np.abs(k - 1) ** q) / (q * (q - 1))
    head = float(np.sum(k ** power - tri))
    tail = -2 / (q * (q - 1)) * float(np.sum(binom(q, n) * zeta(n - q, K0)))
    return head + tail


def nodal_correction(spec: KernelSpec, nodes: np.ndarray) -> np.ndarray:
    """Leading defect of the one-point pair rule next to the diagonal, per node.

    Near the diagonal the pair integrand is c r^(d-1) u'^2 |r - rho|^b
    (Gagliardo, pairs beyond NEAR_BAND) or c r^(d-1) v^2 |r - rho|^b (Riesz,
    every off-diagonal pair). Summing the one-point errors over a locally
    uniform row gives 2 c r_i^(d-1) h_i^(2+b) times ``midpoint_defect_sum``;
    subtracting it makes both energies second order. Riesz kernels with
    alpha >= 2 have a kink of order >= 1 and need no correction.
    """
    c, b, log = _lead(spec)
    if spec.kind == "riesz" and not log and b >= 1:
        return np.zeros(len(nodes))
    start = NEAR_BAND + 1 if spec.kind == "gagliardo" else 1
    S = midpoint_defect_sum(b, start, log)
    c0, c1 = _cells(nodes)
    h = c1 - c0
    return 2 * c * S * nodes ** (spec.d - 1) * h ** (2 + (0.0 if log else b))


def exterior_integrals(spec: KernelSpec, r: np.ndarray, a: float, b: float,
                       far: float = 1e4) -> np.ndarray:
    """int over rho outside [a, b] of K(r_i, rho) rho^(d-1), for a <= r_i <= b.

    Geometric Gauss panels grade towards the window edges; beyond far * b the
    tail uses the substitution of ``gagliardo_tail``.
    """
    r = np.asarray(r, dtype=float)
    d = spec.d
    g, w = _GL_PANEL
    x = 0.5 * (g + 1)
    gap = max(float(np.min(b - r)), 1e-300)
    out = np.zeros(len(r))

    def panels(edges):
        lo, hi = edges[:-1], edges[1:]
        pts = lo[:, None] + (hi - lo)[:, None] * x[None, :]
        wts = (hi - lo)[:, None] * 0.5 * w[None, :]
        return pts.ravel(), wts.ravel()

    top = far * b
    k = np.arange(0, int(math.ceil(math.log2((top - b) / gap))) + 2)
    edges = np.unique(np.minimum(b + gap * (2.0 ** k - 1), top))
    pts, wts = panels(edges)
    K = kernel_values(spec, r[:, None], pts[None, :])
    out += (K * pts ** (d - 1) * wts).sum(axis=1)
    out += gagliardo_tail(spec, r, top)
    if a > 0:
        gap_in = max(float(np.min(r - a)), 1e-300)
        k = np.arange(0, int(math.ceil(math.log2(a / gap_in))) + 2)
        edges = np.unique(np.maximum(a - gap_in * (2.0 ** k - 1), 0.0))
        pts, wts = panels(edges)
        K = kernel_values(spec, r[:, None], pts[None, :])
        out += (K * pts ** (d - 1) * wts).sum(axis=1)
    return out


# --------------------------------------------------------------- assembly

@dataclass
class KernelMatrix:
    """Kernel sampled on grid nodes.

    ``entries[i, j]`` holds K(r_rows[i], r_cols[j]); entries where the row and
    column node coincide hold the cell averaged diagonal value (or 0 for the
    ``excluded`` policy). Gagliardo matrices also carry ``tail``, the kernel
    mass beyond the last node.
    """
    spec: KernelSpec
    nodes: np.ndarray
    rows: slice
    cols: slice
    entries: np.ndarray
    diagonal_policy: str = "cell_averaged"
    tail: Optional[np.ndarray] = None
    info: dict = field(default_factory=dict)

    @property
    def is_square_full(self) -> bool:
        n = len(self.nodes)
        return self.rows == slice(0, n) and self.cols == slice(0, n)

    def diag_mask(self) -> np.ndarray:
        ri = np.arange(len(self.nodes))[self.rows]
        ci = np.arange(len(self.nodes))[self.cols]
        return ri[:, None] == ci[None, :]

    def to_bytes(self) -> bytes:
        if not self.is_square_full:
            raise ParameterError("only full square matrices can be dumped")
        n = len(self.nodes)
        tag = 0 if self.spec.kind == "riesz" else 1
        iu = np.triu_indices(n)
        head = b"CSLK1" + struct.pack("<iBdq", self.spec.d, tag, self.spec.param, n)
        return head + self.nodes.astype("<f8").tobytes() + self.entries[iu].astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "KernelMatrix":
        if blob[:5] != b"CSLK1":
            raise ParameterError("bad magic")
        d, tag, par, n = struct.unpack_from("<iBdq", blob, 5)
        off = 5 + struct.calcsize("<iBdq")
        nodes = np.frombuffer(blob, "<f8", n, off).astype(float)
        off += 8 * n
        packed = np.frombuffer(blob, "<f8", n * (n + 1) // 2, off).astype(float)
        ent = np.zeros((n, n))
        iu = np.triu_indices(n)
        ent[iu] = packed
        ent.T[iu] = packed
        spec = KernelSpec(d, "riesz", alpha=par) if tag == 0 else KernelSpec(d, "gagliardo", s=par)
        return cls(spec, nodes, slice(0, n), slice(0, n), ent)


def _as_slice(sl, n):
    if sl is None:
        return slice(0, n)
    start, stop, _ = sl.indices(n)
    return slice(start, stop)


def assemble(spec: KernelSpec, grid: Grid, diagonal_policy: str = "cell_averaged",
             rows: Optional[slice] = None, cols: Optional[slice] = None,
             threads: int = 1, n_cap: int = N_CAP) -> KernelMatrix:
    if diagonal_policy not in ("cell_averaged", "excluded"):
        raise ParameterError(f"unknown diagonal policy {diagonal_policy!r}")
    if spec.kind == "gagliardo" and diagonal_policy != "cell_averaged":
        raise ParameterError("Gagliardo matrices require the cell_averaged policy")
    nodes = np.asarray(grid.nodes, dtype=float)
    n = len(nodes)
    rows, cols = _as_slice(rows, n), _as_slice(cols, n)
    nr, nc = rows.stop - rows.start, cols.stop - cols.start
    if max(nr, nc) > n_cap:
        raise ParameterError(
            f"kernel matrix {nr}x{nc} exceeds the cap n={n_cap}; "
            f"reduce the grid by {max(nr, nc) - n_cap} nodes")
    ri = np.arange(rows.start, rows.stop)
    ci = np.arange(cols.start, cols.stop)
    ent = np.empty((nr, nc))

    def block(lo, hi):
        r = nodes[ri[lo:hi]][:, None]
        c = nodes[ci][None, :]
        same = ri[lo:hi][:, None] == ci[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            k = kernel_values(spec, r, np.where(same, r + 1.0, c))
        k[same] = 0.0
        ent[lo:hi] = k

    step = max(1, int(math.ceil(nr / max(1, threads * 4))))
    bounds = [(i, min(i + step, nr)) for i in range(0, nr, step)]
    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(lambda b: block(*b), bounds))
    else:
        for lo, hi in bounds:
            block(lo, hi)

    both = np.intersect1d(ri, ci)
    if diagonal_policy == "cell_averaged" and len(both):
        davg = diagonal_averages(spec, nodes, both)
        ent[both - rows.start, both - cols.start] = davg
    tail = None
    if spec.kind == "gagliardo" and cols.stop == n:
        tail = gagliardo_tail(spec, nodes[ri], float(nodes[-1]))
    return KernelMatrix(spec, nodes, rows, cols, ent, diagonal_policy, tail,
                        {"n": n, "threads": threads})


# ---------------------------------------------------------- (AS) bound

def as_bound(spec: KernelSpec, r, rho) -> np.ndarray:
    a = spec.alpha
    d = spec.d
    r, rho = np.asarray(r, float), np.asarray(rho, float)
    if a < 1:
        return (r * rho) ** (-(d - 1) / 2) * np.abs(r - rho) ** (a - 1)
    if a == 1:
        return (r * rho) ** (-(d - 1) / 2) * np.log(2 * (r + rho) / np.abs(r - rho))
    return (r * rho) ** (-(d - a) / 2)


@dataclass(frozen=True)
class BoundReport:
    M_star: float
    M_star_refined: Optional[float]
    relative_shift: Optional[float]
    bound_case: str
    finite: bool
    stable: Optional[bool]
    argmax: tuple

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ratio_max(spec, nodes):
    pos = nodes[nodes > 0]
    i, j = np.triu_indices(len(pos), 1)
    r, rho = pos[i], pos[j]
    ratio = kernel_values(spec, r, rho) / as_bound(spec, r, rho)
    k = int(np.argmax(ratio))
    return float(ratio[k]), (float(r[k]), float(rho[k]))


def kernel_bound_check(matrix: KernelMatrix, refine: bool = True,
                       stability_tol: float = 0.05) -> BoundReport:
    spec = matrix.spec
    if spec.kind != "riesz":
        raise ParameterError("kernel_bound_check needs a Riesz kernel")
    ri = np.arange(len(matrix.nodes))[matrix.rows]
    ci = np.arange(len(matrix.nodes))[matrix.cols]
    R = matrix.nodes[ri][:, None] * np.ones((1, len(ci)))
    C = matrix.nodes[ci][None, :] * np.ones((len(ri), 1))
    mask = (R > 0) & (C > 0) & (ri[:, None] != ci[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = as_bound(spec, np.where(mask, R, 1.0), np.where(mask, C, 2.0))
    ratio = np.where(mask, matrix.entries / bound, -np.inf)
    k = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    m_star = float(ratio[k])
    case = "alpha<1" if spec.alpha < 1 else ("alpha=1" if spec.alpha == 1 else "alpha>1")
    m_ref = shift = stable = None
    if refine:
        nodes = matrix.nodes
        fine = np.sort(np.concatenate([nodes, 0.5 * (nodes[1:] + nodes[:-1])]))
        m_ref, _ = _ratio_max(spec, fine)
        shift = abs(m_ref - m_star) / m_star
        stable = shift < stability_tol
    return BoundReport(m_star, m_ref, shift, case, math.isfinite(m_star), stable,
                       (float(R[k]), float(C[k])))
