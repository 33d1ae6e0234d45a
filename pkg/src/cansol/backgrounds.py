"""Closed-form geometric-flow backgrounds and hypersurface flows.

The catalog holds metric families g(t) solving the forward flow
dg/dt = -2 Ric or the backward flow dg/dtau = +2 Ric, together with
hypersurface families F_t moving by dF/dt = -H nu inside them.  All
catalog entries are exact solutions given in closed form, with analytic
derivative callbacks, so they serve as fixtures whose residuals under the
defining equations must vanish to machine precision.

Orientation convention: the unit normal nu is chosen so that a round
sphere in flat space has positive mean curvature with the outward normal
(H = n/r, second fundamental form h = g/r).  Concretely
h_ij = <d_i nu, d_j F> = -<D_{T_i} T_j, nu>, and the shrinking sphere
moves inward under -H nu.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import (
    ChartDomainError,
    FDConfig,
    MetricField,
    ScalarField,
    SymTensor2,
    chart_point,
    christoffel,
    hessian,
    ricci,
    scalar_d1,
    _central_d1,
)

__all__ = [
    "POLE_BAND",
    "ConformalFamily",
    "RicciFlowBackground",
    "GradientSolitonData",
    "TimeScalarField",
    "MCFSolution",
    "HypersurfacePointData",
    "BackgroundError",
    "model_background",
    "model_mcf",
    "catalog_background_names",
    "catalog_mcf_names",
    "ricci_flow_residual",
    "gradient_soliton_residual",
    "mcf_soliton_residual",
    "hypersurface_point_data",
    "unit_sphere_metric",
    "sphere_embedding_maps",
]

# Polar charts exclude a band of this width around coordinate singularities.
POLE_BAND = 1e-2


class BackgroundError(ValueError):
    """Unknown model name or invalid model parameters."""


# ---------------------------------------------------------------------------
# round-sphere chart: metric and embedding with analytic derivatives
# ---------------------------------------------------------------------------


def unit_sphere_metric(d: int) -> MetricField:
    """Round unit d-sphere in polar angles (theta_1 .. theta_d).

    g_ii = prod_{k<i} sin^2(theta_k), diagonal; the chart excludes a band
    of width POLE_BAND around theta_k in {0, pi} for k < d.  First and
    second partials are supplied analytically.
    """
    if d < 1:
        raise BackgroundError(f"sphere dimension must be >= 1, got {d}")

    def comps(p):
        g = np.zeros((d, d))
        s2 = np.sin(p[: d - 1]) ** 2
        for i in range(d):
            g[i, i] = float(np.prod(s2[:i]))
        return g

    def d1(p):
        g = comps(p)
        out = np.zeros((d, d, d))
        cot = np.zeros(d)
        cot[: d - 1] = 1.0 / np.tan(p[: d - 1])
        for i in range(d):
            for a in range(i):
                out[a, i, i] = 2.0 * cot[a] * g[i, i]
        return out

    def d2(p):
        g = comps(p)
        out = np.zeros((d, d, d, d))
        cot = np.zeros(d)
        csc2 = np.zeros(d)
        cot[: d - 1] = 1.0 / np.tan(p[: d - 1])
        csc2[: d - 1] = 1.0 / np.sin(p[: d - 1]) ** 2
        for i in range(d):
            for a in range(i):
                out[a, a, i, i] = (4.0 * cot[a] ** 2 - 2.0 * csc2[a]) * g[i, i]
                for b in range(i):
                    if b != a:
                        out[a, b, i, i] = 4.0 * cot[a] * cot[b] * g[i, i]
        return out

    def in_domain(p):
        return bool(np.all(p[: d - 1] > POLE_BAND) and np.all(p[: d - 1] < math.pi - POLE_BAND))

    return MetricField(dim=d, components=comps, d1=d1, d2=d2, in_domain=in_domain)


def _euclidean_metric(d: int) -> MetricField:
    eye = np.eye(d)
    return MetricField(
        dim=d,
        components=lambda p: eye.copy(),
        d1=lambda p: np.zeros((d, d, d)),
        d2=lambda p: np.zeros((d, d, d, d)),
    )


def sphere_embedding_maps(n: int):
    """Embedding of the unit n-sphere into R^{n+1} and its partials.

    Returns (omega, d_omega, dd_omega) with omega(x) the position on the
    unit sphere for polar angles x, d_omega(x)[i] = d omega / d x^i and
    dd_omega(x)[i, j] the second partials.
    """
    # factor table: component m is a product of sin/cos factors over angles
    factors = []
    for m in range(n):
        factors.append([(k, "s") for k in range(m)] + [(m, "c")])
    factors.append([(k, "s") for k in range(n)])

    def _eval(x, orders):
        # orders: dict angle index -> derivative order (1 or 2)
        y = np.zeros(n + 1)
        for m, facs in enumerate(factors):
            angles = {k for k, _ in facs}
            if any(k not in angles for k in orders):
                continue
            prod = 1.0
            for k, kind in facs:
                o = orders.get(k, 0)
                th = x[k]
                if kind == "s":
                    prod *= (math.sin(th), math.cos(th), -math.sin(th))[o]
                else:
                    prod *= (math.cos(th), -math.sin(th), -math.cos(th))[o]
            y[m] = prod
        return y

    def omega(x):
        return _eval(x, {})

    def d_omega(x):
        return np.stack([_eval(x, {i: 1}) for i in range(n)], axis=0)

    def dd_omega(x):
        out = np.zeros((n, n, n + 1))
        for i in range(n):
            out[i, i] = _eval(x, {i: 2})
            for j in range(i + 1, n):
                v = _eval(x, {i: 1, j: 1})
                out[i, j] = v
                out[j, i] = v
        return out

    return omega, d_omega, dd_omega


# ---------------------------------------------------------------------------
# backgrounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConformalFamily:
    """Time family g(t) = phi(t) * sigma(y) with sigma static.

    sigma_scalar is the (spatially constant) scalar curvature of sigma and
    ric_sigma its Ricci tensor; both are scale-invariant, which is what
    makes the curvature of the whole family closed-form.
    """

    sigma: MetricField
    phi: Callable[[float], float]
    dphi: Callable[[float], float]
    d2phi: Callable[[float], float]
    sigma_scalar: float
    ric_sigma: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RicciFlowBackground:
    """A closed-form solution of the (possibly backward) metric flow.

    ``direction`` selects the flow sign: "forward" means dg/dt = -2 Ric,
    "backward" means dg/dtau = +2 Ric with tau stored directly as the time
    variable.  Curvature evaluators are closed-form and are cross-checked
    against the numeric kernel in the test suite.
    """

    name: str
    dim: int
    direction: str                       # "forward" | "backward"
    time_domain: tuple[float, float]     # (0, T], endpoint inclusive
    conformal: ConformalFamily
    soliton: "GradientSolitonData | None" = None

    def __post_init__(self):
        if self.direction not in ("forward", "backward"):
            raise BackgroundError(f"unknown flow direction {self.direction!r}")

    def check_time(self, t: float) -> float:
        lo, hi = self.time_domain
        if not (lo < t <= hi):
            raise ChartDomainError(f"time {t} outside domain ({lo}, {hi}]")
        return float(t)

    def metric_at(self, t: float) -> MetricField:
        """Spatial metric snapshot at time t, with analytic derivatives."""
        t = self.check_time(t)
        c = self.conformal
        phi = c.phi(t)
        return MetricField(
            dim=self.dim,
            components=lambda p, _f=phi: _f * c.sigma.components(p),
            d1=lambda p, _f=phi: _f * np.asarray(c.sigma.d1(p)),
            d2=lambda p, _f=phi: _f * np.asarray(c.sigma.d2(p)),
            in_domain=c.sigma.in_domain,
            fd=c.sigma.fd,
        )

    def dt_metric_at(self, p: np.ndarray, t: float) -> np.ndarray:
        t = self.check_time(t)
        return self.conformal.dphi(t) * np.asarray(self.conformal.sigma.components(p))

    def ricci_at(self, p: np.ndarray, t: float) -> np.ndarray:
        self.check_time(t)
        return np.asarray(self.conformal.ric_sigma(p))

    def scalar_at(self, p: np.ndarray, t: float) -> float:
        t = self.check_time(t)
        return self.conformal.sigma_scalar / self.conformal.phi(t)

    def dt_scalar_at(self, p: np.ndarray, t: float) -> float:
        t = self.check_time(t)
        c = self.conformal
        return -c.sigma_scalar * c.dphi(t) / c.phi(t) ** 2

    def d2t_scalar_at(self, p: np.ndarray, t: float) -> float:
        t = self.check_time(t)
        c = self.conformal
        phi, dphi, d2phi = c.phi(t), c.dphi(t), c.d2phi(t)
        return c.sigma_scalar * (2.0 * dphi**2 / phi**3 - d2phi / phi**2)

    def dy_scalar_at(self, p: np.ndarray, t: float) -> np.ndarray:
        self.check_time(t)
        return np.zeros(self.dim)

    def grad_scalar_at(self, p: np.ndarray, t: float) -> np.ndarray:
        """Contravariant spatial gradient of the scalar curvature."""
        self.check_time(t)
        return np.zeros(self.dim)

    def sample_points(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        """Random chart points away from coordinate singularities."""
        pts = []
        for _ in range(count):
            if self.name == "round_sphere":
                p = np.empty(self.dim)
                p[: self.dim - 1] = rng.uniform(POLE_BAND + 0.1, math.pi - POLE_BAND - 0.1, self.dim - 1)
                p[self.dim - 1] = rng.uniform(0.0, 2.0 * math.pi)
            else:
                p = rng.uniform(-1.5, 1.5, self.dim)
            pts.append(p)
        return pts


@dataclass(frozen=True)
class TimeScalarField:
    """Scalar function of (point, time) with analytic partials."""

    value: Callable[[np.ndarray, float], float]
    dy: Callable[[np.ndarray, float], np.ndarray] | None = None
    dyy: Callable[[np.ndarray, float], np.ndarray] | None = None
    dt: Callable[[np.ndarray, float], float] | None = None
    fd: FDConfig = field(default_factory=FDConfig)

    def at_time(self, t: float) -> ScalarField:
        return ScalarField(
            value=lambda p: self.value(p, t),
            d1=None if self.dy is None else (lambda p: np.asarray(self.dy(p, t))),
            d2=None if self.dyy is None else (lambda p: np.asarray(self.dyy(p, t))),
            fd=self.fd,
        )

    def dt_at(self, p: np.ndarray, t: float) -> float:
        if self.dt is not None:
            return float(self.dt(p, t))
        h = self.fd.h1 * max(1.0, abs(t))
        return float(self.value(p, t + h) - self.value(p, t - h)) / (2.0 * h)


@dataclass(frozen=True)
class GradientSolitonData:
    """Potential and class of a gradient soliton structure on a background."""

    potential: TimeScalarField
    soliton_class: str   # "steady" | "expanding" | "shrinking"

    SOLITON_CONSTANTS = {"steady": 0.0, "expanding": 1.0, "shrinking": -1.0}

    def __post_init__(self):
        if self.soliton_class not in self.SOLITON_CONSTANTS:
            raise BackgroundError(f"unknown soliton class {self.soliton_class!r}")

    @property
    def c(self) -> float:
        return self.SOLITON_CONSTANTS[self.soliton_class]


def catalog_background_names() -> list[str]:
    return ["euclidean_static", "round_sphere", "gaussian_shrinker_flat"]


def model_background(name: str, **params) -> RicciFlowBackground:
    """Build a catalog background.

    euclidean_static(dim, direction="forward", T=1.0): flat static metric.
    round_sphere(dim, r0, direction, T=None): g(t) = (r0^2 -+ 2(d-1)t) * round
        unit metric; forward direction shrinks toward the singular time
        r0^2 / (2(d-1)), backward grows without bound.
    gaussian_shrinker_flat(dim, T=1.0): flat backward background carrying
        the potential f = |y|^2 / (4 tau), shrinking class.
    """
    if name == "euclidean_static":
        dim = int(params.pop("dim", 3))
        direction = params.pop("direction", "forward")
        T = float(params.pop("T", 1.0))
        _reject_extras(name, params)
        conf = ConformalFamily(
            sigma=_euclidean_metric(dim),
            phi=lambda t: 1.0,
            dphi=lambda t: 0.0,
            d2phi=lambda t: 0.0,
            sigma_scalar=0.0,
            ric_sigma=lambda p: np.zeros((dim, dim)),
        )
        return RicciFlowBackground(name, dim, direction, (0.0, T), conf)

    if name == "round_sphere":
        dim = int(params.pop("dim", 3))
        r0 = float(params.pop("r0", 1.0))
        direction = params.pop("direction", "forward")
        T = params.pop("T", None)
        _reject_extras(name, params)
        if r0 <= 0:
            raise BackgroundError(f"round_sphere needs r0 > 0, got {r0}")
        if dim < 2:
            raise BackgroundError("round_sphere needs dim >= 2")
        rate = 2.0 * (dim - 1)
        if direction == "forward":
            t_sing = r0**2 / rate
            T = 0.8 * t_sing if T is None else float(T)
            if not (0.0 < T < t_sing):
                raise BackgroundError(
                    f"round_sphere forward needs 0 < T < {t_sing}, got T={T}"
                )
            phi = lambda t: r0**2 - rate * t
            dphi = lambda t: -rate
        else:
            T = 1.0 if T is None else float(T)
            phi = lambda t: r0**2 + rate * t
            dphi = lambda t: rate
        sigma = unit_sphere_metric(dim)
        conf = ConformalFamily(
            sigma=sigma,
            phi=phi,
            dphi=dphi,
            d2phi=lambda t: 0.0,
            sigma_scalar=float(dim * (dim - 1)),
            ric_sigma=lambda p: (dim - 1) * np.asarray(sigma.components(p)),
        )
        return RicciFlowBackground(name, dim, direction, (0.0, T), conf)

    if name == "gaussian_shrinker_flat":
        dim = int(params.pop("dim", 3))
        T = float(params.pop("T", 1.0))
        _reject_extras(name, params)
        flat = model_background("euclidean_static", dim=dim, direction="backward", T=T)
        potential = TimeScalarField(
            value=lambda y, t: float(y @ y) / (4.0 * t),
            dy=lambda y, t: y / (2.0 * t),
            dyy=lambda y, t: np.eye(dim) / (2.0 * t),
            dt=lambda y, t: -float(y @ y) / (4.0 * t**2),
        )
        soliton = GradientSolitonData(potential, "shrinking")
        return RicciFlowBackground(flat.name, dim, "backward", (0.0, T), flat.conformal, soliton)

    raise BackgroundError(f"unknown background {name!r}; known: {catalog_background_names()}")


def _reject_extras(name, params):
    if params:
        raise BackgroundError(f"unknown parameters for {name}: {sorted(params)}")


# ---------------------------------------------------------------------------
# hypersurface flows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MCFSolution:
    """Closed-form family of immersions F_t : M^n -> O^{n+1}.

    Second space/time derivatives of the immersion are analytic, as are
    the mean-curvature callbacks when set; everything else (induced
    metric, normal, second fundamental form) is computed by the kernel.
    """

    name: str
    hypersurface_dim: int
    ambient: RicciFlowBackground
    immersion_at: Callable[[np.ndarray, float], np.ndarray]
    velocity_at: Callable[[np.ndarray, float], np.ndarray]
    dx: Callable[[np.ndarray, float], np.ndarray]        # (n, n+1)
    dxdx: Callable[[np.ndarray, float], np.ndarray]      # (n, n, n+1)
    dxdt: Callable[[np.ndarray, float], np.ndarray]      # (n, n+1)
    dtdt: Callable[[np.ndarray, float], np.ndarray]      # (n+1,)
    orientation_hint: Callable[[np.ndarray, float], np.ndarray]
    mean_curvature: Callable[[np.ndarray, float], float] | None = None
    dx_mean_curvature: Callable[[np.ndarray, float], np.ndarray] | None = None
    dt_mean_curvature: Callable[[np.ndarray, float], float] | None = None
    time_domain: tuple[float, float] | None = None

    def check_time(self, t: float) -> float:
        lo, hi = self.time_domain if self.time_domain is not None else self.ambient.time_domain
        if not (lo < t <= hi):
            raise ChartDomainError(f"time {t} outside domain ({lo}, {hi}]")
        return float(t)

    def sample_xs(self, count: int, rng: np.random.Generator) -> list[np.ndarray]:
        n = self.hypersurface_dim
        pts = []
        for _ in range(count):
            if self.name in ("shrinking_sphere_flat", "equator_in_sphere"):
                x = np.empty(n)
                x[: n - 1] = rng.uniform(POLE_BAND + 0.1, math.pi - POLE_BAND - 0.1, max(n - 1, 0))
                x[n - 1] = rng.uniform(0.0, 2.0 * math.pi)
            else:
                x = rng.uniform(-1.5, 1.5, n)
            pts.append(x)
        return pts


def catalog_mcf_names() -> list[str]:
    return ["shrinking_sphere_flat", "equator_in_sphere", "static_plane_flat"]


def model_mcf(name: str, bg: RicciFlowBackground, **params) -> MCFSolution:
    """Build a catalog hypersurface flow inside a given background.

    shrinking_sphere_flat(r0): round sphere of radius r(t) = sqrt(r0^2 - 2nt)
        in a flat background (n = bg.dim - 1).
    equator_in_sphere(): totally geodesic equator of a round-sphere
        background, static in sphere coordinates.
    static_plane_flat(height=0.0): fixed coordinate hyperplane in a flat
        background.
    """
    n = bg.dim - 1
    if n < 1:
        raise BackgroundError("background dimension too small for hypersurfaces")

    if name == "shrinking_sphere_flat":
        if bg.name != "euclidean_static":
            raise BackgroundError("shrinking_sphere_flat needs a flat background")
        r0 = float(params.pop("r0", 1.0))
        _reject_extras(name, params)
        if r0 <= 0:
            raise BackgroundError(f"needs r0 > 0, got {r0}")
        omega, d_omega, dd_omega = sphere_embedding_maps(n)
        t_sing = r0**2 / (2.0 * n)
        T = min(bg.time_domain[1], 0.8 * t_sing)

        def r(t):
            return math.sqrt(r0**2 - 2.0 * n * t)

        def dr(t):
            return -n / r(t)

        def d2r(t):
            return -(n**2) / r(t) ** 3

        return MCFSolution(
            name=name,
            hypersurface_dim=n,
            ambient=bg,
            immersion_at=lambda x, t: r(t) * omega(x),
            velocity_at=lambda x, t: dr(t) * omega(x),
            dx=lambda x, t: r(t) * d_omega(x),
            dxdx=lambda x, t: r(t) * dd_omega(x),
            dxdt=lambda x, t: dr(t) * d_omega(x),
            dtdt=lambda x, t: d2r(t) * omega(x),
            orientation_hint=lambda x, t: omega(x),
            mean_curvature=lambda x, t: n / r(t),
            dx_mean_curvature=lambda x, t: np.zeros(n),
            dt_mean_curvature=lambda x, t: n**2 / r(t) ** 3,
            time_domain=(0.0, T),
        )

    if name == "equator_in_sphere":
        if bg.name != "round_sphere":
            raise BackgroundError("equator_in_sphere needs a round_sphere background")
        _reject_extras(name, params)
        zeros_n = np.zeros(n)
        zeros_amb = np.zeros(n + 1)

        def immerse(x, t):
            return np.concatenate(([math.pi / 2.0], x))

        hint = np.zeros(n + 1)
        hint[0] = 1.0
        return MCFSolution(
            name=name,
            hypersurface_dim=n,
            ambient=bg,
            immersion_at=immerse,
            velocity_at=lambda x, t: zeros_amb.copy(),
            dx=lambda x, t: np.eye(n, n + 1, k=1),
            dxdx=lambda x, t: np.zeros((n, n, n + 1)),
            dxdt=lambda x, t: np.zeros((n, n + 1)),
            dtdt=lambda x, t: zeros_amb.copy(),
            orientation_hint=lambda x, t: hint.copy(),
            mean_curvature=lambda x, t: 0.0,
            dx_mean_curvature=lambda x, t: zeros_n.copy(),
            dt_mean_curvature=lambda x, t: 0.0,
        )

    if name == "static_plane_flat":
        if bg.name != "euclidean_static":
            raise BackgroundError("static_plane_flat needs a flat background")
        height = float(params.pop("height", 0.0))
        _reject_extras(name, params)
        zeros_n = np.zeros(n)
        zeros_amb = np.zeros(n + 1)
        hint = np.zeros(n + 1)
        hint[n] = 1.0
        return MCFSolution(
            name=name,
            hypersurface_dim=n,
            ambient=bg,
            immersion_at=lambda x, t: np.concatenate((x, [height])),
            velocity_at=lambda x, t: zeros_amb.copy(),
            dx=lambda x, t: np.eye(n, n + 1),
            dxdx=lambda x, t: np.zeros((n, n, n + 1)),
            dxdt=lambda x, t: np.zeros((n, n + 1)),
            dtdt=lambda x, t: zeros_amb.copy(),
            orientation_hint=lambda x, t: hint.copy(),
            mean_curvature=lambda x, t: 0.0,
            dx_mean_curvature=lambda x, t: zeros_n.copy(),
            dt_mean_curvature=lambda x, t: 0.0,
        )

    raise BackgroundError(f"unknown hypersurface flow {name!r}; known: {catalog_mcf_names()}")


# ---------------------------------------------------------------------------
# residual operations
# ---------------------------------------------------------------------------


def ricci_flow_residual(bg: RicciFlowBackground, p: np.ndarray, t: float) -> SymTensor2:
    """dg/dt - S with S = -2 Ric (forward) or +2 Ric (backward).

    Vanishes identically on exact solutions; the Ricci tensor comes from
    the numeric kernel, not from the background's closed forms.
    """
    t = bg.check_time(t)
    snap = bg.metric_at(t)
    p = snap.check_point(p)
    ric = ricci(snap, p).entries
    sign = -2.0 if bg.direction == "forward" else 2.0
    return SymTensor2.symmetrized(bg.dt_metric_at(p, t) - sign * ric)


def gradient_soliton_residual(
    bg: RicciFlowBackground,
    sol: GradientSolitonData,
    p: np.ndarray,
    t: float,
) -> SymTensor2:
    """Gradient-soliton defect Ric + Hess(f) + (c / 2t) g at (p, t)."""
    t = bg.check_time(t)
    if t == 0.0:
        raise ChartDomainError("gradient soliton residual undefined at t = 0")
    snap = bg.metric_at(t)
    p = snap.check_point(p)
    ric = ricci(snap, p).entries
    hess = hessian(snap, sol.potential.at_time(t), p).entries
    g = snap.at(p)
    return SymTensor2.symmetrized(ric + hess + (sol.c / (2.0 * t)) * g)


def mcf_soliton_residual(
    mcf: MCFSolution,
    potential: TimeScalarField,
    sign: float,
    x: np.ndarray,
    t: float,
) -> float:
    """Pointwise soliton defect H + sign * (nu f) of a hypersurface.

    ``sign`` is +1 or -1; the normal is the catalog orientation (outward
    for spheres).  The defect vanishes on exact hypersurface solitons.
    """
    if sign not in (+1.0, -1.0, 1, -1):
        raise BackgroundError(f"sign must be +1 or -1, got {sign}")
    data = hypersurface_point_data(mcf, x, t)
    nu_f = float(data.normal @ scalar_d1(potential.at_time(t), data.position))
    return data.mean_curvature + float(sign) * nu_f


# ---------------------------------------------------------------------------
# hypersurface pointwise geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypersurfacePointData:
    """Extrinsic geometry of M_t at one point of the hypersurface chart."""

    x: np.ndarray
    t: float
    position: np.ndarray          # F_t(x) in the ambient chart
    tangents: np.ndarray          # (n, n+1) rows d_i F
    induced: np.ndarray           # g_ij
    induced_inv: np.ndarray
    normal: np.ndarray            # unit, catalog orientation
    second_ff: np.ndarray         # h_ij = -<D_{T_i} T_j, nu>
    mean_curvature: float
    dx_mean_curvature: np.ndarray # coordinate partials d_i H
    dt_mean_curvature: float
    velocity: np.ndarray


def _normal_vector(g: np.ndarray, tangents: np.ndarray, hint: np.ndarray) -> np.ndarray:
    # null space of the n x (n+1) matrix T g, then g-normalized and oriented
    _, _, vh = np.linalg.svd(tangents @ g)
    nu = vh[-1]
    norm = math.sqrt(float(nu @ g @ nu))
    if norm == 0.0:
        raise BackgroundError("degenerate induced metric: no unit normal")
    nu = nu / norm
    if float(nu @ g @ hint) < 0.0:
        nu = -nu
    return nu


def hypersurface_point_data(mcf: MCFSolution, x: np.ndarray, t: float) -> HypersurfacePointData:
    """Compute induced metric, normal, h, H and H-derivatives at (x, t)."""
    t = mcf.check_time(t)
    x = chart_point(x)
    bg = mcf.ambient
    snap = bg.metric_at(t)

    pos = np.asarray(mcf.immersion_at(x, t), dtype=float)
    snap.check_point(pos)
    T = np.asarray(mcf.dx(x, t), dtype=float)
    g_amb = snap.at(pos)
    induced = T @ g_amb @ T.T
    induced = 0.5 * (induced + induced.T)
    cond = np.linalg.cond(induced)
    if not np.isfinite(cond) or cond > 1e12:
        raise BackgroundError(f"degenerate induced metric at x={x}, t={t}")
    induced_inv = np.linalg.inv(induced)

    nu = _normal_vector(g_amb, T, np.asarray(mcf.orientation_hint(x, t), dtype=float))

    gamma = christoffel(snap, pos).gamma
    ddF = np.asarray(mcf.dxdx(x, t), dtype=float)
    # (D_{T_i} T_j)^c = dd_ij F^c + Gamma^c_ab T_i^a T_j^b
    cov = ddF + np.einsum("cab,ia,jb->ijc", gamma, T, T)
    h = -np.einsum("ijc,cd,d->ij", cov, g_amb, nu)
    h = 0.5 * (h + h.T)
    H = float(np.einsum("ij,ij->", induced_inv, h))

    if mcf.dx_mean_curvature is not None:
        dxH = np.asarray(mcf.dx_mean_curvature(x, t), dtype=float)
    else:
        dxH = _central_d1(lambda xx: _mean_curvature_only(mcf, xx, t), x, FDConfig().h1)
    if mcf.dt_mean_curvature is not None:
        dtH = float(mcf.dt_mean_curvature(x, t))
    else:
        h_t = FDConfig().h1 * max(1.0, abs(t))
        dtH = (_mean_curvature_only(mcf, x, t + h_t) - _mean_curvature_only(mcf, x, t - h_t)) / (2.0 * h_t)

    return HypersurfacePointData(
        x=x,
        t=t,
        position=pos,
        tangents=T,
        induced=induced,
        induced_inv=induced_inv,
        normal=nu,
        second_ff=h,
        mean_curvature=H,
        dx_mean_curvature=dxH,
        dt_mean_curvature=dtH,
        velocity=np.asarray(mcf.velocity_at(x, t), dtype=float),
    )


def _mean_curvature_only(mcf: MCFSolution, x: np.ndarray, t: float) -> float:
    snap = mcf.ambient.metric_at(t)
    pos = np.asarray(mcf.immersion_at(x, t), dtype=float)
    T = np.asarray(mcf.dx(x, t), dtype=float)
    g_amb = snap.at(pos)
    induced = T @ g_amb @ T.T
    induced_inv = np.linalg.inv(0.5 * (induced + induced.T))
    nu = _normal_vector(g_amb, T, np.asarray(mcf.orientation_hint(x, t), dtype=float))
    gamma = christoffel(snap, pos).gamma
    cov = np.asarray(mcf.dxdx(x, t), dtype=float) + np.einsum("cab,ia,jb->ijc", gamma, T, T)
    h = -np.einsum("ijc,cd,d->ij", cov, g_amb, nu)
    return float(np.einsum("ij,ij->", induced_inv, 0.5 * (h + h.T)))
