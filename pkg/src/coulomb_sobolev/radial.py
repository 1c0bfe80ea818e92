"""Radial grid functions, quadrature weights and the annular bump families."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np
from scipy.special import gamma as _gamma_fn

from .exponents import ParameterError, ScheduleParams, to_float

MIN_NODES = 16
MIN_BUMP_NODES = 32
RESOLUTION = 1e-13  # smallest relative node spacing accepted


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2.0) / float(_gamma_fn(d / 2.0))


def cell_weights(nodes: np.ndarray, d: int):
    """Exact integrals of the two hat halves on every cell against r^(d-1).

    Returns (left, right): left[k] = int_cell (b-r)/h r^(d-1) dr and
    right[k] = int_cell (r-a)/h r^(d-1) dr for the cell [a, b] = nodes[k:k+2].
    The binomial expansion in h keeps narrow cells at large radius accurate.
    """
    a = nodes[:-1]
    h = np.diff(nodes)
    left = np.zeros_like(a)
    right = np.zeros_like(a)
    m = d - 1
    for j in range(m + 1):
        term = comb(m, j) * a ** (m - j) * h ** j
        left += term / ((j + 1) * (j + 2))
        right += term / (j + 2)
    return left * h, right * h


def node_weights(nodes: np.ndarray, d: int) -> np.ndarray:
    left, right = cell_weights(nodes, d)
    w = np.zeros_like(nodes)
    w[:-1] += left
    w[1:] += right
    return w


@dataclass(frozen=True)
class Grid:
    nodes: np.ndarray
    weights: np.ndarray
    d: int
    spacing: str = "custom"

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def meta(self) -> dict:
        return {"d": self.d, "n": self.n, "r_max": self.r_max, "spacing": self.spacing}


def grid_from_nodes(nodes, d: int, spacing: str = "custom") -> Grid:
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 1 or len(nodes) < 2:
        raise ParameterError("grid needs at least two nodes")
    if not np.all(np.diff(nodes) > 0):
        raise ParameterError("grid nodes must be strictly increasing")
    if nodes[0] < 0:
        raise ParameterError("radii must be nonnegative")
    w = node_weights(nodes, d)
    nodes.setflags(write=False)
    w.setflags(write=False)
    return Grid(nodes, w, d, spacing)


def make_grid(r_max: float, n: int, spacing: str = "uniform", r_min: Optional[float] = None,
              d: int = 3) -> Grid:
    """Uniform grid on [0, r_max], or 0 followed by n-1 geometric nodes in [r_min, r_max]."""
    if not r_max > 0:
        raise ParameterError("r_max must be positive")
    if n < MIN_NODES:
        raise ParameterError(f"need n >= {MIN_NODES} nodes")
    if spacing == "uniform":
        nodes = np.linspace(0.0, r_max, n)
    elif spacing == "geometric":
        if r_min is None or not (0 < r_min < r_max):
            raise ParameterError("geometric spacing requires 0 < r_min < r_max")
        nodes = np.concatenate([[0.0], np.geomspace(r_min, r_max, n - 1)])
    else:
        raise ParameterError(f"unknown spacing {spacing!r}")
    return grid_from_nodes(nodes, d, spacing)


def adapted_grid(windows, d: int, r_max: float, growth: float = 1.12,
                 max_rel: float = 0.25, spacing_label: str = "adapted",
                 origin_fraction: float = 1e-3) -> Grid:
    """Grid with spacing h_w on each (a, b, h_w) window, graded elsewhere.

    The local spacing is min over windows of h_w + (growth - 1) * dist(r, window),
    capped by max(max_rel * r, h_min) where h_min = origin_fraction * (first window
    start). Node 0 is always included; the grid ends exactly at r_max.
    """
    ws = np.array(sorted((float(a), float(b), float(h)) for a, b, h in windows))
    if ws[0, 0] < 0 or ws[:, 1].max() > r_max:
        raise ParameterError("window extends outside [0, r_max]")
    for a, b, h in ws:
        if h <= 0:
            raise ParameterError("window spacing must be positive")
        if h < RESOLUTION * b:
            raise ParameterError(f"window spacing {h:.3g} at r={b:.3g} is below double "
                                 "precision resolution")
    lo, hi, hw = ws[:, 0], ws[:, 1], ws[:, 2]
    h_min = min(hw.min(), origin_fraction * lo.min()) if lo.min() > 0 else hw.min()
    g = growth - 1.0

    def spacing(r):
        dist = np.maximum(np.maximum(lo - r, r - hi), 0.0)
        h = float(np.min(hw + g * dist))
        return min(h, max(max_rel * r, h_min))

    pts = [0.0]
    r = 0.0
    while True:
        nxt = r + spacing(r)
        if nxt >= r_max - 0.5 * spacing(min(nxt, r_max)):
            break
        pts.append(nxt)
        r = nxt
    pts.append(float(r_max))
    return grid_from_nodes(np.asarray(pts), d, spacing_label)


@dataclass(frozen=True)
class RadialGridFunction:
    """Radial profile u(r_i) on a grid; represents phi(|x|) on R^d."""
    grid: Grid
    values: np.ndarray
    support: tuple = (0, -1)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.nodes.shape:
            raise ParameterError("values must match the grid")
        if not np.all(np.isfinite(v)):
            raise ParameterError("values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        nz = np.flatnonzero(v)
        sup = (int(nz[0]), int(nz[-1])) if len(nz) else (0, -1)
        object.__setattr__(self, "support", sup)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def is_zero(self) -> bool:
        return self.support[1] < self.support[0]

    def support_slice(self, pad: int = 0) -> slice:
        lo, hi = self.support
        if hi < lo:
            return slice(0, 0)
        return slice(max(lo - pad, 0), min(hi + pad + 1, self.grid.n))

    def scaled(self, c: float) -> "RadialGridFunction":
        return RadialGridFunction(self.grid, c * self.values, meta=dict(self.meta))

    def dilated(self, t: float) -> "RadialGridFunction":
        """u(r / t) realised exactly by moving the nodes to t r_i."""
        g = self.grid
        nodes = g.nodes * t
        w = g.weights * t ** g.d
        nodes.setflags(write=False)
        w.setflags(write=False)
        grid = Grid(nodes, w, g.d, g.spacing)
        return RadialGridFunction(grid, self.values, meta=dict(self.meta))

    def with_values(self, values) -> "RadialGridFunction":
        return RadialGridFunction(self.grid, values, meta=dict(self.meta))

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"# d={self.d} n={self.grid.n}\n")
        for r, v, w in zip(self.nodes, self.values, self.weights):
            buf.write(f"{r:.17g} {v:.17g} {w:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "RadialGridFunction":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = lines[0].lstrip("#").split()
        kv = dict(tok.split("=") for tok in head)
        d, n = int(kv["d"]), int(kv["n"])
        data = np.array([[float(x) for x in ln.split()] for ln in lines[1:]])
        if data.shape != (n, 3):
            raise ParameterError("row count does not match header")
        nodes, vals, w = data[:, 0], data[:, 1], data[:, 2]
        nodes.setflags(write=False)
        w.setflags(write=False)
        return cls(Grid(nodes, w, d, "loaded"), vals)


# ------------------------------------------------------------------ bumps

def eta(t, k: int = 4):
    """Compactly supported profile (1 - t^2)^k on [-1, 1]."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1.0, (1.0 - t * t) ** k, 0.0)


@dataclass(frozen=True)
class BumpParams:
    lam: float
    R: float
    S: float
    k: int = 4

    def __post_init__(self):
        if not self.R > 0 or not self.S > 0:
            raise ParameterError("bump needs R > 0 and S > 0")
        if not self.S < self.R:
            raise ParameterError("bump needs S < R")
        if self.lam < 0:
            raise ParameterError("amplitude must be nonnegative")
        if self.k < 4:
            raise ParameterError("profile exponent k must be >= 4")

    def window(self, nodes_across: int = 64):
        return (self.R - self.S, self.R + self.S, 2 * self.S / nodes_across)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "R": self.R, "S": self.S, "k": self.k}


def bump(params: BumpParams, grid: Grid) -> RadialGridFunction:
    lo, hi = params.R - params.S, params.R + params.S
    if hi > grid.r_max * (1 + 1e-14):
        raise ParameterError("bump support exceeds the grid")
    inside = np.count_nonzero((grid.nodes >= lo) & (grid.nodes <= hi))
    if inside < MIN_BUMP_NODES:
        raise ParameterError(f"refine grid: only {inside} nodes across the bump support")
    vals = params.lam * eta((grid.nodes - params.R) / params.S, params.k)
    return RadialGridFunction(grid, vals, meta={"bumps": [params.to_dict()]})


def superposition(bumps: Sequence[BumpParams], d: int, nodes_across: int = 64,
                  outer: float = 1e3, growth: float = 1.12, grid: Optional[Grid] = None
                  ) -> RadialGridFunction:
    """Sum of bumps on an adapted grid (built unless one is supplied)."""
    if grid is None:
        top = max(b.R + b.S for b in bumps)
        grid = adapted_grid([b.window(nodes_across) for b in bumps], d, outer * top, growth)
    vals = np.zeros(grid.n)
    for b in bumps:
        lo, hi = b.R - b.S, b.R + b.S
        inside = np.count_nonzero((grid.nodes >= lo) & (grid.nodes <= hi))
        if inside < MIN_BUMP_NODES:
            raise ParameterError(f"refine grid: only {inside} nodes across a bump support")
        vals += b.lam * eta((grid.nodes - b.R) / b.S, b.k)
    return RadialGridFunction(grid, vals, meta={"bumps": [b.to_dict() for b in bumps]})


def bump_on_adapted_grid(params: BumpParams, d: int, nodes_across: int = 64,
                         outer: float = 1e3, growth: float = 1.12) -> RadialGridFunction:
    return superposition([params], d, nodes_across, outer, growth)


@dataclass(frozen=True)
class MultibumpParams:
    R: float
    m: int
    schedule: ScheduleParams
    rescale_sigma: float = 0.0
    rescale_theta: float = 0.0
    k: int = 4

    def bumps(self):
        b, g = to_float(self.schedule.beta_sched), to_float(self.schedule.gamma_sched)
        out = []
        for j in range(1, self.m + 1):
            c = self.R ** j
            out.append(BumpParams(c ** b, c, c ** g, self.k))
        return out


def check_disjoint(bumps: Sequence[BumpParams]):
    order = sorted(range(len(bumps)), key=lambda i: bumps[i].R)
    for i, j in zip(order, order[1:]):
        if bumps[i].R + bumps[i].S >= bumps[j].R - bumps[j].S:
            raise ParameterError(f"bumps {i + 1} and {j + 1} overlap")


def multibump(params: MultibumpParams, grid: Optional[Grid] = None, d: int = 3,
              nodes_across: int = 64, outer: float = 1e3):
    """Returns (v, w): the sum of scheduled bumps and its m-rescaled version."""
    if params.R == 1 or params.R <= 0:
        raise ParameterError("multibump base ratio must be positive and != 1")
    if params.m < 1:
        raise ParameterError("multibump needs m >= 1")
    bumps = params.bumps()
    check_disjoint(bumps)
    d = grid.d if grid is not None else d
    v = superposition(bumps, d, nodes_across, outer, grid=grid)
    m = params.m
    w = v.dilated(m ** params.rescale_sigma).scaled(m ** params.rescale_theta)
    return v, w


def annulus_lattice_surrogate(base: BumpParams, m: int, separation: float, d: int,
                              p: float = 2.0, nodes_across: int = 64):
    """Radial stand-in for a lattice of translated bumps.

    Places m copies of the profile on annuli at radii R * separation^k. The
    amplitude of copy k is rescaled by (R / R_k)^((d-1)/p) so every annulus
    carries the same L^p mass, which removes the r^(d-1) volume growth.
    Returns the superposition and the list of single annulus functions.
    """
    if not separation > 1:
        raise ParameterError("separation factor must exceed 1")
    parts = []
    for j in range(m):
        Rk = base.R * separation ** j
        lam = base.lam * (base.R / Rk) ** ((d - 1) / p)
        parts.append(BumpParams(lam, Rk, base.S, base.k))
    check_disjoint(parts)
    total = superposition(parts, d, nodes_across)
    singles = [superposition([b], d, nodes_across, grid=total.grid) for b in parts]
    return total, singles
