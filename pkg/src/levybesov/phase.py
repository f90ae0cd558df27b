"""Predicted regularity regions and multi-resolution scaling experiments.

Sign convention: thresholds are reported as positive numbers (tau_threshold,
mu_threshold) such that the noise belongs to the weighted space of
smoothness -tau and weight -mu whenever tau > tau_threshold and
mu > mu_threshold.  ``empirical_scaling`` takes the same positive
convention and internally evaluates the sequence norm with the negated
parameters.  Plot data negates tau so boundaries appear in the usual
(1/p, smoothness) half-plane.

The empirical verdict comes from the growth of the per-level norm
contributions T_j across dyadic scales: the truncated norm converges as the
resolution grows iff log2 T_j decays, so the sign of the fitted slope
separates membership from divergence, with a margin band reported as
``marginal``.  For p at or above the index at infinity the level sums are
extreme-value dominated and have no mean; slopes are therefore fitted per
realization and the ensemble median is classified.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .besov import BesovParams, besov_norm
from .idlaw import IndexPair, LevyModel, estimate_indices
from .sampler import GridSpec, sample_field
from .wavelet import WaveletBasis, analyze, build_basis, dirac_pyramid, max_levels


class NotTemperedError(ValueError):
    """Weighted-space prediction requested for a noise with beta0 = 0."""


_KINDS = ("weighted", "local", "sobolev", "holder")


@dataclass(frozen=True)
class RegionSpec:
    d: int
    p: float
    kind: str
    tau_threshold: float
    mu_threshold: Optional[float]


def predicted_region(indices: IndexPair, d: int, p: float, kind: str) -> RegionSpec:
    """Admissible (tau, mu) half-plane predicted from the indices.

    weighted: tau > d (1 - 1/max(p, beta_inf)), mu > d / min(p, beta0)
    sobolev:  the weighted thresholds at p = 2 (tau > d/2, mu > d/beta0)
    holder:   the weighted thresholds at p = inf (tau > d, mu > d/beta0)
    local:    tau threshold only; beta0 = 0 is allowed
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown region kind {kind!r}")
    if kind == "sobolev":
        p = 2.0
    elif kind == "holder":
        p = math.inf
    if not p > 0:
        raise ValueError("p must be positive")

    b0, bi = indices.beta0, indices.beta_inf
    max_p_bi = max(p, bi)
    tau_thr = d * (1.0 - (0.0 if math.isinf(max_p_bi) else 1.0 / max_p_bi))
    if kind == "local":
        return RegionSpec(d=d, p=p, kind=kind, tau_threshold=tau_thr,
                          mu_threshold=None)
    if b0 <= 0.0:
        raise NotTemperedError(
            "a noise with index 0 at the origin is not tempered; weighted "
            "thresholds do not apply (use kind='local')")
    mu_thr = d / min(p, b0)
    return RegionSpec(d=d, p=p, kind=kind, tau_threshold=tau_thr,
                      mu_threshold=mu_thr)


# --------------------------------------------------------------------------
# empirical scaling


@dataclass
class ScalingVerdict:
    params: BesovParams          # positive (tau, mu) noise convention
    fitted_slope: float
    classification: str          # convergent | divergent | marginal
    ensemble_size: int
    j_levels: tuple
    slope_margin: float
    heavy_tail: bool = False
    slope_spread: float = 0.0    # IQR of the per-realization slopes

    def to_dict(self) -> dict:
        return {
            "p": self.params.p, "q": self.params.q, "tau": self.params.tau,
            "mu": self.params.mu, "fitted_slope": self.fitted_slope,
            "classification": self.classification,
            "ensemble_size": self.ensemble_size,
            "j_levels": list(self.j_levels), "slope_margin": self.slope_margin,
            "heavy_tail": self.heavy_tail, "slope_spread": self.slope_spread,
        }


def _child_seed(seed: int, i: int) -> int:
    digest = hashlib.blake2b(f"{seed}:member:{i}".encode(), digest_size=8)
    return int.from_bytes(digest.digest(), "little")


def empirical_scaling(model: LevyModel, params: BesovParams, j_range,
                      ensemble: int, seed: int, d: int = 1, L: float = 0.5,
                      basis: WaveletBasis | None = None,
                      slope_margin: float | None = None,
                      workers: int | None = None) -> ScalingVerdict:
    """Classify membership of the noise in the space B^(-tau)_(p,q)(-mu).

    ``params`` carries the positive thresholds under test; ``j_range`` the
    physical scales fitted (at least 4).  Per realization the slope of
    log2 T_j is fitted by least squares over j_range and the ensemble
    median is compared against the margin band.
    """
    js = sorted(set(int(j) for j in j_range))
    if len(js) < 4:
        raise ValueError("j_range must contain at least 4 levels")
    if math.isinf(params.q):
        raise ValueError("scaling experiments need a finite q")
    basis = basis or build_basis(1)
    j_lo, j_hi = js[0], js[-1]
    spec = GridSpec(d=d, J=j_hi + 1, L=L)
    levels = min(spec.J - j_lo + 1, max_levels(spec))
    space = BesovParams(p=params.p, q=params.q, tau=-params.tau, mu=-params.mu)
    margin = slope_margin if slope_margin is not None else 0.05 * params.q

    slopes = np.empty(ensemble)
    jarr = np.asarray(js, dtype=float)
    for i in range(ensemble):
        fld = sample_field(model, spec, _child_seed(seed, i), workers=workers)
        pyr = analyze(fld, basis, levels=levels)
        report = besov_norm(pyr, space)
        terms = report.level_terms(d)
        ys = np.array([terms.get(j, 0.0) for j in js])
        ok = ys > 0
        if ok.sum() < 2:
            slopes[i] = -math.inf
            continue
        slopes[i] = np.polyfit(jarr[ok], np.log2(ys[ok]), 1)[0]

    med = float(np.median(slopes))
    finite = slopes[np.isfinite(slopes)]
    spread = float(np.subtract(*np.percentile(finite, [75, 25]))) if finite.size else 0.0
    if med < -margin:
        cls = "convergent"
    elif med > margin:
        cls = "divergent"
    else:
        cls = "marginal"

    known = model.known_indices
    heavy = bool(known is not None and known.beta_inf < 2.0
                 and params.p >= known.beta_inf)
    return ScalingVerdict(params=params, fitted_slope=med, classification=cls,
                          ensemble_size=ensemble, j_levels=tuple(js),
                          slope_margin=margin, heavy_tail=heavy,
                          slope_spread=spread)


# --------------------------------------------------------------------------
# Dirac scaling


def dirac_scaling(p: float, d: int, basis: WaveletBasis | None = None,
                  J: int | None = None, position=None):
    """Threshold tau where the Dirac's per-level contributions change sign.

    Evaluates y_j = log2 of the tau-free per-level norm value; the full
    contribution at smoothness -tau has log-slope (slope of y_j) - tau, so
    the fitted slope of y_j estimates the membership threshold
    d (1 - 1/p).  Exact for the Haar basis (the default); higher-order
    cascades add a small wobble.

    Returns (threshold_estimate, per_level) with per_level a list of
    (j, y_j).
    """
    if not (p > 0):
        raise ValueError("p must be positive")
    basis = basis or build_basis(1)
    if J is None:
        J = 12 if d == 1 else (8 if d == 2 else 6)
    spec = GridSpec(d=d, J=J, L=0.5)
    if position is None:
        position = (spec.cells_per_axis // 2,) * d
    pyr = dirac_pyramid(spec, basis, position)

    per_level = []
    for j in pyr.levels():
        if j == pyr.j_coarse:
            continue  # mixes the approximation band
        bands = pyr.bands_at(j)
        if math.isinf(p):
            inner = max(float(np.max(np.abs(a))) for a in bands.values())
            y = math.log2(inner) + j * (d / 2.0)
        else:
            s = sum(float(np.sum(np.abs(a) ** p)) for a in bands.values())
            y = math.log2(s ** (1.0 / p)) + j * (d / 2.0 - d / p)
        per_level.append((j, y))

    js = np.array([j for j, _ in per_level], dtype=float)
    ys = np.array([y for _, y in per_level])
    threshold = float(np.polyfit(js, ys, 1)[0])
    return threshold, per_level


# --------------------------------------------------------------------------
# phase diagrams


@dataclass
class PhaseSettings:
    ensemble: int = 100
    j_range: tuple = (4, 11)
    seed: int = 0
    L: float = 0.5
    basis_moments: int = 1
    slope_margin: Optional[float] = None
    tau_offsets: tuple = (-0.15, 0.15)
    indices: Optional[IndexPair] = None

    def js(self):
        lo, hi = self.j_range
        return range(lo, hi + 1)


@dataclass
class PhaseRow:
    inv_p: float
    tau: float
    predicted_member: bool
    slope: float
    verdict: str

    def as_csv(self):
        return (f"{self.inv_p:.6g},{self.tau:.6g},"
                f"{int(self.predicted_member)},{self.slope:.6g},{self.verdict}")


def boundary_polyline(indices: IndexPair, d: int, inv_p_grid) -> list:
    """(1/p, -tau*) pairs of the predicted membership boundary."""
    out = []
    for ip in inv_p_grid:
        p = math.inf if ip == 0 else 1.0 / ip
        thr = predicted_region(indices, d, p, "local").tau_threshold
        out.append((float(ip), -thr))
    return out


def phase_diagram(model: LevyModel, d: int, p_grid, tau_grid=None,
                  kind: str = "weighted",
                  settings: PhaseSettings | None = None):
    """Predicted vs empirical membership over a (p, tau) grid.

    When ``tau_grid`` is None each p gets the nodes tau* + offsets from the
    settings.  Returns (rows, boundary) where rows are PhaseRow records and
    boundary is the predicted polyline in figure coordinates.
    """
    settings = settings or PhaseSettings()
    indices = settings.indices or model.known_indices
    if indices is None:
        indices = estimate_indices(model).value
    basis = build_basis(settings.basis_moments)

    rows = []
    for p in p_grid:
        region = predicted_region(indices, d, p, kind)
        if kind == "local":
            mu = d / min(p, max(indices.beta0, 0.25)) + 1.0
        else:
            mu = region.mu_threshold + 1.0
        taus = (tau_grid if tau_grid is not None
                else [region.tau_threshold + off for off in settings.tau_offsets])
        for tau in taus:
            params = BesovParams(p=p, q=p, tau=float(tau), mu=mu)
            verdict = empirical_scaling(
                model, params, settings.js(), settings.ensemble, settings.seed,
                d=d, L=settings.L, basis=basis,
                slope_margin=settings.slope_margin)
            rows.append(PhaseRow(
                inv_p=1.0 / p if not math.isinf(p) else 0.0, tau=float(tau),
                predicted_member=bool(tau > region.tau_threshold),
                slope=verdict.fitted_slope, verdict=verdict.classification))

    ip_grid = np.linspace(0.0, 2.0, 81)
    boundary = boundary_polyline(indices, d, ip_grid)
    return rows, boundary
