"""Harnack quantities, the large-N second-fundamental-form limit, and
weighted scalar/mean-curvature boundary functionals.

Three strands meet here:

* the flow Harnack quadratic Z(X, X) = Ric(X, X) + <X, grad R> +
  (dR/dt + R/t)/2, which is the large-N Ricci limit of the canonical
  expander;
* the hypersurface Harnack quadratic Z~(V, V) = dH/dt + h(V, V) +
  2 <V, grad H> + H/(2t) and its curved-background completion
  ``limit_second_ff``, the large-N limit of the track's second
  fundamental form;
* the weighted functionals I_infty = int R^inf e^-f dV + 2 int H^inf e^-f dA
  (R^inf = R + 2 Lap f - |grad f|^2, H^inf = H - nu f) and the boundary
  integrand of their evolution, which ``limit_second_ff(-grad f)``
  reproduces up to the H/(2t) term.

Quadrature is product trapezoid on explicit chart grids with sqrt(det g)
densities baked into the weights; summation order is the fixed grid
traversal, so results are bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .backgrounds import (
    HypersurfacePointData,
    MCFSolution,
    RicciFlowBackground,
    hypersurface_point_data,
)
from .geometry import (
    ChartDomainError,
    MetricField,
    ScalarField,
    inverse_metric,
    metric_d1,
    scalar_curvature,
    scalar_d1,
    scalar_d2,
)
from .track import SpaceTimeTrack, track_point_data

__all__ = [
    "rf_harnack_Z",
    "mcf_harnack_Ztilde",
    "limit_second_ff",
    "stripped_track_quadratic",
    "tangential_gradient",
    "lott_boundary_integrand",
    "lott_match_defect",
    "WeightedManifoldData",
    "QuadratureError",
    "weighted_scalar_curvature",
    "weighted_mean_curvature",
    "I_infty",
    "I_GHY",
    "flat_ball_domain",
    "random_polynomial_field",
]


class QuadratureError(ValueError):
    """Empty or inconsistent quadrature data."""


# ---------------------------------------------------------------------------
# Harnack quadratics
# ---------------------------------------------------------------------------


def rf_harnack_Z(bg: RicciFlowBackground, X: np.ndarray, p: np.ndarray, t: float) -> float:
    """Flow Harnack quadratic Z(X, X) on a forward background at t > 0."""
    if bg.direction != "forward":
        raise ChartDomainError("the Harnack quadratic is defined along the forward flow")
    t = bg.check_time(t)
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    ric = bg.ricci_at(p, t)
    return (
        float(X @ ric @ X)
        + float(X @ bg.dy_scalar_at(p, t))
        + 0.5 * (bg.dt_scalar_at(p, t) + bg.scalar_at(p, t) / t)
    )


def mcf_harnack_Ztilde(mcf: MCFSolution, V: np.ndarray, x: np.ndarray, t: float) -> float:
    """Hypersurface Harnack quadratic Z~(V, V) for a flow in flat space.

    V is a tangent vector in hypersurface chart components.
    """
    if mcf.ambient.conformal.sigma_scalar != 0.0 or mcf.ambient.name != "euclidean_static":
        raise ChartDomainError("Z~ is defined for flows in a flat background")
    t = mcf.check_time(t)
    hyp = hypersurface_point_data(mcf, x, t)
    V = np.asarray(V, dtype=float)
    return (
        hyp.dt_mean_curvature
        + float(V @ hyp.second_ff @ V)
        + 2.0 * float(V @ hyp.dx_mean_curvature)
        + hyp.mean_curvature / (2.0 * t)
    )


def limit_second_ff(
    bg: RicciFlowBackground,
    mcf: MCFSolution,
    V: np.ndarray,
    x: np.ndarray,
    t: float,
) -> float:
    """Large-N limit of the track's second fundamental form on V + d/dt.

    dH/dt + h(V, V) + H/(2t) + 2 <V, grad H> + 2 Ric(V, nu)
    - H Ric(nu, nu) + nu(R)/2, assembled from background and slice data
    only (no N enters).  Reduces to Z~(V, V) when the background is flat.
    """
    if bg.direction != "forward":
        raise ChartDomainError("the limit form is defined along the forward flow")
    t = mcf.check_time(t)
    hyp = hypersurface_point_data(mcf, x, t)
    V = np.asarray(V, dtype=float)
    ric = bg.ricci_at(hyp.position, t)
    V_amb = V @ hyp.tangents
    dRdy = bg.dy_scalar_at(hyp.position, t)
    return (
        hyp.dt_mean_curvature
        + float(V @ hyp.second_ff @ V)
        + hyp.mean_curvature / (2.0 * t)
        + 2.0 * float(V @ hyp.dx_mean_curvature)
        + 2.0 * float(V_amb @ ric @ hyp.normal)
        - hyp.mean_curvature * float(hyp.normal @ ric @ hyp.normal)
        + 0.5 * float(hyp.normal @ dRdy)
    )


def stripped_track_quadratic(track: SpaceTimeTrack, V: np.ndarray, x: np.ndarray, t: float) -> float:
    """Finite-N track form on the lifted vector, normalization removed.

    Evaluates h^S(V + d/dt, V + d/dt) and multiplies by t sigma_N, the
    explicit prefactor of the closed forms; without the stripping the
    sigma_N -> 1/sqrt(t) limit would rescale the comparison against
    ``limit_second_ff``.  This normalization choice is recorded in run
    provenance blocks.
    """
    d = track_point_data(track, x, t)
    W = np.concatenate(([1.0], np.asarray(V, dtype=float)))
    return float(W @ d.second_ff @ W) * t * d.sigma_N


# ---------------------------------------------------------------------------
# boundary integrand and the matching identity
# ---------------------------------------------------------------------------


def tangential_gradient(
    bg: RicciFlowBackground,
    hyp: HypersurfacePointData,
    f: ScalarField,
    t: float,
):
    """Boundary gradient of f at a slice point.

    Returns (chart components w.r.t. the slice tangents, ambient vector).
    """
    snap = bg.metric_at(t)
    g = snap.at(hyp.position)
    grad_amb = inverse_metric(snap, hyp.position) @ scalar_d1(f, hyp.position)
    normal_part = float(grad_amb @ g @ hyp.normal)
    tang = grad_amb - normal_part * hyp.normal
    comps = hyp.induced_inv @ (hyp.tangents @ g @ tang)
    return comps, tang


def lott_boundary_integrand(
    bg: RicciFlowBackground,
    hyp: HypersurfacePointData,
    f: ScalarField,
    t: float,
) -> float:
    """Boundary integrand of the weighted functional's evolution.

    dH/dt - 2 <grad f, grad H> + h(grad f, grad f) - 2 Ric(nu, grad f)
    + nu(R)/2 - H Ric(nu, nu), with grad f the boundary-tangential
    gradient.  dH/dt must come with the hypersurface data; there is no
    hidden time differencing across unrelated snapshots.
    """
    if hyp.dt_mean_curvature is None or not np.isfinite(hyp.dt_mean_curvature):
        raise ChartDomainError("boundary integrand needs dH/dt supplied with the slice data")
    comps, tang = tangential_gradient(bg, hyp, f, t)
    ric = bg.ricci_at(hyp.position, t)
    dRdy = bg.dy_scalar_at(hyp.position, t)
    return (
        hyp.dt_mean_curvature
        - 2.0 * float(comps @ hyp.dx_mean_curvature)
        + float(comps @ hyp.second_ff @ comps)
        - 2.0 * float(hyp.normal @ ric @ tang)
        + 0.5 * float(hyp.normal @ dRdy)
        - hyp.mean_curvature * float(hyp.normal @ ric @ hyp.normal)
    )


def lott_match_defect(
    bg: RicciFlowBackground,
    mcf: MCFSolution,
    f: ScalarField,
    x: np.ndarray,
    t: float,
) -> float:
    """limit_second_ff(-grad f) - boundary integrand - H/(2t).

    Identically zero: the limit form evaluated on the negative boundary
    gradient reproduces the evolution integrand up to the H/(2t) term.
    """
    hyp = hypersurface_point_data(mcf, x, t)
    comps, _ = tangential_gradient(bg, hyp, f, t)
    lhs = limit_second_ff(bg, mcf, -comps, x, t)
    rhs = lott_boundary_integrand(bg, hyp, f, t)
    return lhs - rhs - hyp.mean_curvature / (2.0 * t)


# ---------------------------------------------------------------------------
# weighted functionals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightedManifoldData:
    """A compact weighted domain with boundary, discretized for quadrature.

    Weights carry the volume/area densities sqrt(det g); normals are
    outward unit vectors at the boundary samples.  ``scalar_curvature_at``
    optionally short-circuits the engine curvature (used by closed-form
    catalogs); the engine remains the fallback.
    """

    metric: MetricField
    potential: ScalarField
    interior_points: np.ndarray
    interior_weights: np.ndarray
    boundary_points: np.ndarray
    boundary_weights: np.ndarray
    boundary_normals: np.ndarray
    boundary_mean_curvatures: np.ndarray
    scalar_curvature_at: Callable[[np.ndarray], float] | None = None

    def __post_init__(self):
        if len(self.interior_points) == 0 or len(self.boundary_points) == 0:
            raise QuadratureError("quadrature grid is empty")
        if np.any(self.interior_weights <= 0) or np.any(self.boundary_weights <= 0):
            raise QuadratureError("quadrature weights must be positive")
        for q, nu in zip(self.boundary_points[:5], self.boundary_normals[:5]):
            g = self.metric.at(q)
            if abs(float(nu @ g @ nu) - 1.0) > 1e-8:
                raise QuadratureError("boundary normals must be unit vectors")

    def curvature(self, p: np.ndarray) -> float:
        if self.scalar_curvature_at is not None:
            return float(self.scalar_curvature_at(p))
        return scalar_curvature(self.metric, p)


def weighted_scalar_curvature(wm: WeightedManifoldData, p: np.ndarray) -> float:
    """R^inf = R + 2 Lap f - |grad f|^2 at an interior point.

    The Laplacian is the metric trace of the covariant Hessian; one
    inverse-metric factorization is shared across all terms (quadrature
    loops hit this per grid point).
    """
    p = wm.metric.check_point(p)
    ginv = inverse_metric(wm.metric, p)
    dg = metric_d1(wm.metric, p)
    bracket = np.einsum("bdc->dbc", dg) + np.einsum("cbd->dbc", dg) - dg
    gamma = 0.5 * np.einsum("ad,dbc->abc", ginv, bracket)
    df = scalar_d1(wm.potential, p)
    hess = scalar_d2(wm.potential, p) - np.einsum("cab,c->ab", gamma, df)
    lap = float(np.einsum("ab,ab->", ginv, hess))
    grad_sq = float(df @ ginv @ df)
    return wm.curvature(p) + 2.0 * lap - grad_sq


def weighted_mean_curvature(wm: WeightedManifoldData, idx: int) -> float:
    """H^inf = H - nu f at boundary sample ``idx``."""
    if not (0 <= idx < len(wm.boundary_points)):
        raise QuadratureError(
            f"boundary index {idx} out of range ({len(wm.boundary_points)} samples); "
            "interior points have no weighted mean curvature"
        )
    q = wm.boundary_points[idx]
    nu_f = float(wm.boundary_normals[idx] @ scalar_d1(wm.potential, q))
    return float(wm.boundary_mean_curvatures[idx]) - nu_f


def I_infty(wm: WeightedManifoldData) -> float:
    """int R^inf e^-f dV + 2 int H^inf e^-f dA over the supplied grids."""
    total = 0.0
    for p, w in zip(wm.interior_points, wm.interior_weights):
        total += w * weighted_scalar_curvature(wm, p) * math.exp(-wm.potential.value(p))
    for i, (q, w) in enumerate(zip(wm.boundary_points, wm.boundary_weights)):
        total += 2.0 * w * weighted_mean_curvature(wm, i) * math.exp(-wm.potential.value(q))
    return total


def I_GHY(wm: WeightedManifoldData) -> float:
    """int R e^-f dV + 2 int H dA (boundary term unweighted)."""
    total = 0.0
    for p, w in zip(wm.interior_points, wm.interior_weights):
        total += w * wm.curvature(p) * math.exp(-wm.potential.value(p))
    for q, w, H in zip(wm.boundary_points, wm.boundary_weights, wm.boundary_mean_curvatures):
        total += 2.0 * w * float(H)
    return total


# ---------------------------------------------------------------------------
# catalog domain: flat ball in spherical coordinates
# ---------------------------------------------------------------------------


def _trapezoid_nodes(a: float, b: float, k: int):
    xs = np.linspace(a, b, k)
    w = np.full(k, (b - a) / (k - 1))
    w[0] *= 0.5
    w[-1] *= 0.5
    return xs, w


def _periodic_nodes(k: int):
    xs = np.arange(k) * (2.0 * math.pi / k)
    return xs, np.full(k, 2.0 * math.pi / k)


def flat_ball_domain(
    radius: float = 1.0,
    potential: ScalarField | None = None,
    grid: tuple[int, int, int] = (32, 48, 16),
    pole_band: float = 1e-2,
) -> WeightedManifoldData:
    """Euclidean 3-ball in Cartesian coordinates, quadrature in sphericals.

    ``grid`` = (radial, polar, azimuthal) node counts; polar nodes stay a
    band away from the axes, azimuth is periodic.  Boundary samples carry
    the outward radial normal and H = 2/radius.
    """
    nr, nth, nph = grid
    if min(nr, nth, nph) < 2:
        raise QuadratureError(f"grid {grid} too coarse")
    if potential is None:
        potential = ScalarField.constant(0.0)

    rs, wr = _trapezoid_nodes(0.0, radius, nr)
    ths, wth = _trapezoid_nodes(pole_band, math.pi - pole_band, nth)
    phs, wph = _periodic_nodes(nph)

    pts, wts = [], []
    for r, a in zip(rs, wr):
        if r == 0.0:
            continue  # zero density at the origin
        for th, b in zip(ths, wth):
            s, c = math.sin(th), math.cos(th)
            for ph, cw in zip(phs, wph):
                pts.append([r * s * math.cos(ph), r * s * math.sin(ph), r * c])
                wts.append(a * b * cw * r**2 * s)

    bpts, bwts, bnus = [], [], []
    for th, b in zip(ths, wth):
        s, c = math.sin(th), math.cos(th)
        for ph, cw in zip(phs, wph):
            nu = np.array([s * math.cos(ph), s * math.sin(ph), c])
            bpts.append(radius * nu)
            bwts.append(b * cw * radius**2 * s)
            bnus.append(nu)

    eye = np.eye(3)
    metric = MetricField(
        dim=3,
        components=lambda p: eye.copy(),
        d1=lambda p: np.zeros((3, 3, 3)),
        d2=lambda p: np.zeros((3, 3, 3, 3)),
    )
    m = len(bpts)
    return WeightedManifoldData(
        metric=metric,
        potential=potential,
        interior_points=np.asarray(pts),
        interior_weights=np.asarray(wts),
        boundary_points=np.asarray(bpts),
        boundary_weights=np.asarray(bwts),
        boundary_normals=np.asarray(bnus),
        boundary_mean_curvatures=np.full(m, 2.0 / radius),
        scalar_curvature_at=lambda p: 0.0,
    )


# ---------------------------------------------------------------------------
# seeded polynomial potentials
# ---------------------------------------------------------------------------


def random_polynomial_field(dim: int, rng: np.random.Generator, degree: int = 3) -> ScalarField:
    """Random polynomial with coefficients in [-1, 1], analytic gradient.

    Used by the matching suite; the caller records the generator seed so
    reported defects are reproducible.
    """
    from itertools import combinations_with_replacement

    terms = [((), float(rng.uniform(-1, 1)))]
    for deg in range(1, degree + 1):
        for combo in combinations_with_replacement(range(dim), deg):
            terms.append((combo, float(rng.uniform(-1, 1))))

    def value(p):
        total = 0.0
        for combo, c in terms:
            prod = c
            for i in combo:
                prod *= p[i]
            total += prod
        return total

    def d1(p):
        out = np.zeros(dim)
        for combo, c in terms:
            for k in range(len(combo)):
                prod = c
                for j, i in enumerate(combo):
                    if j != k:
                        prod *= p[i]
                out[combo[k]] += prod
        return out

    def d2(p):
        out = np.zeros((dim, dim))
        for combo, c in terms:
            for k in range(len(combo)):
                for l in range(len(combo)):
                    if l == k:
                        continue
                    prod = c
                    for j, i in enumerate(combo):
                        if j != k and j != l:
                            prod *= p[i]
                    out[combo[k], combo[l]] += prod
        return out

    return ScalarField(value=value, d1=d1, d2=d2)
