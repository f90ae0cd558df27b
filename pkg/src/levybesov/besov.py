"""Weighted Besov sequence norms, Sobolev norms, weight sums, embeddings.

The sequence (quasi-)norm evaluated here is

    ( sum_j 2^(j (tau - d/p + d/2) q) S_j )^(1/q),
    S_j = sum_G ( sum_m <x_m>^(mu p) |c_(j,G,m)|^p )^(q/p),

with sup modifications when p and/or q is infinite.  ``c`` are the raw
pyramid coefficients and ``x_m`` the coefficient's physical anchor position
mapped to the torus representative in [-L, L)^d; all scale prefactors live
here, not in the transform.  With tau = -t, mu = -u (t, u > 0) this is the
membership functional for a noise realization in the weighted space of
smoothness -t and weight -u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .sampler import GridField
from .wavelet import CoeffPyramid


class DivergenceError(ValueError):
    """A lattice weight sum with mu*p <= d has no finite value."""


class ExponentRangeError(ValueError):
    """Holder-step exponents violate their preconditions."""


def _is_inf(x) -> bool:
    return x == math.inf


@dataclass(frozen=True)
class BesovParams:
    """(p, q, tau, mu) of a weighted Besov space; p, q in (0, inf]."""

    p: float
    q: float
    tau: float
    mu: float

    def __post_init__(self):
        for name, v in (("p", self.p), ("q", self.q)):
            if not (v > 0):
                raise ValueError(f"{name} must be positive or inf")


@dataclass
class NormReport:
    """Norm value with its per-level decomposition.

    ``per_level[j]`` is the inner double sum S_j (no scale prefactor), so
    total^q == sum_j 2^(j (tau - d/p + d/2) q) * per_level[j] for finite q.
    ``growth_slope`` is the least-squares slope of log2 S_j over the detail
    levels (the coarsest level mixes in the approximation band and is left
    out of the fit).
    """

    params: BesovParams
    per_level: dict = field(default_factory=dict)
    total: float = 0.0
    growth_slope: float = math.nan

    def level_terms(self, d: int) -> dict:
        """j -> full contribution 2^(j theta q) S_j (finite q)."""
        th = _level_exponent(self.params, d)
        q = self.params.q
        if _is_inf(q):
            return {j: 2.0 ** (j * th) * s for j, s in self.per_level.items()}
        return {j: 2.0 ** (j * th * q) * s for j, s in self.per_level.items()}


def _level_exponent(params: BesovParams, d: int) -> float:
    dp = 0.0 if _is_inf(params.p) else d / params.p
    return params.tau - dp + d / 2.0


def _bracket(x):
    """<x> = sqrt(1 + |x|^2) for an array of positions."""
    return np.sqrt(1.0 + x**2)


def _band_inner(arr, weights, p):
    """sum_m w^(mu p) |c|^p, or its sup modification for p = inf."""
    if _is_inf(p):
        return float(np.max(weights * np.abs(arr))) if arr.size else 0.0
    return float(np.sum(weights * np.abs(arr) ** p))


def _band_weights(pyramid: CoeffPyramid, j: int, mu: float, p: float):
    axes = pyramid.axis_positions(j)
    grids = np.meshgrid(*([axes] * pyramid.spec.d), indexing="ij")
    r2 = sum(g**2 for g in grids)
    bracket = np.sqrt(1.0 + r2)
    if _is_inf(p):
        return bracket**mu
    return bracket ** (mu * p)


def besov_norm(pyramid: CoeffPyramid, params: BesovParams) -> NormReport:
    """Evaluate the truncated sequence norm over the pyramid's levels."""
    d = pyramid.spec.d
    p, q = params.p, params.q
    per_level = {}
    level_values = {}
    for j in pyramid.levels():
        w = _band_weights(pyramid, j, params.mu, p)
        inners = [_band_inner(arr, w, p)
                  for mask, arr in sorted(pyramid.bands_at(j).items())]
        if _is_inf(q):
            if _is_inf(p):
                s = max(inners) if inners else 0.0
            else:
                s = max(x ** (1.0 / p) for x in inners) if inners else 0.0
            per_level[j] = s
            level_values[j] = 2.0 ** (j * _level_exponent(params, d)) * s
        else:
            if _is_inf(p):
                s = float(sum(x**q for x in inners))
            else:
                s = float(sum(x ** (q / p) for x in inners))
            per_level[j] = s
            level_values[j] = 2.0 ** (j * _level_exponent(params, d) * q) * s

    if _is_inf(q):
        total = max(level_values.values()) if level_values else 0.0
    else:
        total = sum(level_values.values()) ** (1.0 / q)

    detail_js = [j for j in sorted(per_level) if j > pyramid.j_coarse
                 and per_level[j] > 0]
    slope = math.nan
    if len(detail_js) >= 2:
        ys = np.log2([per_level[j] for j in detail_js])
        slope = float(np.polyfit(np.asarray(detail_js, float), ys, 1)[0])
    return NormReport(params=params, per_level=per_level, total=float(total),
                      growth_slope=slope)


# --------------------------------------------------------------------------
# lattice weight sums


@dataclass(frozen=True)
class WeightSum:
    value: float
    tail_bound: float


_AXIS_CAP = {1: 4_000_000, 2: 6_000, 3: 300}


def weight_sum(j: int, mu: float, p: float, d: int,
               rel_tail: float = 1e-6) -> WeightSum:
    """sum over m in Z^d of <2^-j m>^(-mu p), truncated with a tail bound.

    Requires mu * p > d; the sum diverges otherwise (raises
    DivergenceError).  The tail beyond the truncation box is bounded by the
    radial integral comparison and returned alongside the value.
    """
    s = mu * p
    if s <= d:
        raise DivergenceError(f"weight sum diverges: mu*p = {s:g} <= d = {d}")
    scale = 2.0 ** (-j)
    m_cap = _AXIS_CAP[d]

    def tail_bound_for(m_axis):
        r = (m_axis - 1) * scale
        if r <= 0:
            return math.inf
        surf = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}[d]
        val, _ = quad(lambda t: t ** (d - 1) * (1.0 + t * t) ** (-s / 2.0),
                      r, np.inf, limit=100)
        return surf * val / scale**d

    m_axis = max(16, int(2.0**j * 4))
    while True:
        if d == 1:
            m = np.arange(-m_axis, m_axis + 1)
            part = float(np.sum((1.0 + (scale * m) ** 2) ** (-s / 2.0)))
        elif d == 2:
            m1 = np.arange(-m_axis, m_axis + 1)
            part = 0.0
            row = (scale * m1) ** 2
            for v1 in row:
                part += float(np.sum((1.0 + v1 + row) ** (-s / 2.0)))
        else:
            m1 = np.arange(-m_axis, m_axis + 1)
            row = (scale * m1) ** 2
            part = 0.0
            for v1 in row:
                for v2 in row:
                    part += float(np.sum((1.0 + v1 + v2 + row) ** (-s / 2.0)))
        tb = tail_bound_for(m_axis)
        if tb <= rel_tail * part or m_axis >= m_cap:
            return WeightSum(value=part, tail_bound=float(tb))
        m_axis = min(m_cap, m_axis * 4)


# --------------------------------------------------------------------------
# Sobolev norm via the Bessel multiplier


def sobolev_norm(field: GridField, tau: float, mu: float) -> float:
    """|| <w>^tau FFT( <x>^mu f ) ||_2 on the torus dual lattice.

    The field values are treated as samples of a function; with tau = mu = 0
    this is the plain L2 norm sqrt(sum |f_i|^2 * cell_volume).
    """
    spec = field.spec
    grids = spec.meshgrid()
    r2 = sum(g**2 for g in grids)
    g = (1.0 + r2) ** (mu / 2.0) * field.values
    ghat = np.fft.fftn(g)
    freqs = [2.0 * math.pi * np.fft.fftfreq(n, d=spec.cell_side)
             for n in spec.shape]
    wgrids = np.meshgrid(*freqs, indexing="ij")
    w2 = sum(w**2 for w in wgrids)
    mult = (1.0 + w2) ** (tau / 2.0)
    total = np.sum(np.abs(mult * ghat) ** 2)
    return float(np.sqrt(total * spec.cell_volume / spec.n_cells))


# --------------------------------------------------------------------------
# embeddings


def _inv(p: float) -> float:
    return 0.0 if _is_inf(p) else 1.0 / p


def embedding_admissible(src: BesovParams, dst: BesovParams, d: int) -> bool:
    """Sufficient embedding test between weighted Besov spaces.

    True iff tau_src > tau_dst, mu_src >= mu_dst, and either the smoothness
    route (p_src <= p_dst with tau gap >= d (1/p_src - 1/p_dst)) or the
    weight route (p_dst <= p_src with mu gap > d (1/p_dst - 1/p_src))
    applies; the q parameters are absorbed by the strict tau gap.
    """
    if not (src.tau > dst.tau and src.mu >= dst.mu):
        return False
    cond_tau = (src.p <= dst.p
                and src.tau - dst.tau >= d * (_inv(src.p) - _inv(dst.p)))
    cond_mu = (dst.p <= src.p
               and src.mu - dst.mu > d * (_inv(dst.p) - _inv(src.p)))
    return bool(cond_tau or cond_mu)


def holder_step_check(values, m_indices, j: int, mu0: float, mu1: float,
                      p0: float, p1: float, d: int):
    """Both sides of the Holder split of a weighted coefficient sum.

    Returns (lhs, rhs) with
      lhs = sum_m <2^-j m>^(mu1 p1) |c_m|^p1
      rhs = ( sum_m <2^-j m>^((mu1-mu0) p1 b) )^(1/b)
            * ( sum_m <2^-j m>^(mu0 p1 a) |c_m|^(p1 a) )^(1/a)
    for a = p0/p1 and 1/a + 1/b = 1; requires p1 <= p0 and
    mu0 - mu1 > d (1/p1 - 1/p0).
    """
    if not p1 <= p0:
        raise ExponentRangeError("requires p1 <= p0")
    if not (mu0 - mu1 > d * (_inv(p1) - _inv(p0))):
        raise ExponentRangeError("requires mu0 - mu1 > d (1/p1 - 1/p0)")
    c = np.abs(np.asarray(values, dtype=float)).ravel()
    m = np.asarray(m_indices, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[0] != c.size or m.shape[1] != d:
        raise ValueError("m_indices must be (n, d) matching values")
    br = np.sqrt(1.0 + np.sum((2.0 ** (-j) * m) ** 2, axis=1))

    lhs = float(np.sum(br ** (mu1 * p1) * c**p1))
    a = p0 / p1
    if a == 1.0:
        # b = inf: the first factor degenerates to sup <.>^((mu1-mu0) p1)
        f1 = float(np.max(br ** ((mu1 - mu0) * p1))) if c.size else 0.0
        f2 = float(np.sum(br ** (mu0 * p1) * c**p1))
        return lhs, f1 * f2
    b = a / (a - 1.0)
    f1 = float(np.sum(br ** ((mu1 - mu0) * p1 * b))) ** (1.0 / b)
    f2 = float(np.sum(br ** (mu0 * p1 * a) * c ** (p1 * a))) ** (1.0 / a)
    return lhs, f1 * f2
