"""Canonical expanding / shrinking / steady space-time metrics.

Given a flow background g(t) on O of dimension m = n + 1, a large
parameter N produces a metric on the space-time O x (0, T] (chart index 0
is time) that is an approximate gradient soliton:

    expanding (forward flow):  time-time N/(2t^3) + R/t + m/(2t^2),
                               spatial block g/t, potential -N/(2t)
    shrinking (backward flow): time-time N/(2tau^3) + R/tau - m/(2tau^2),
                               spatial block g/tau, potential N/(2tau)
    steady (backward flow):    time-time N + R, spatial block g,
                               potential -N tau

The soliton defect E_N = Ric + Hess(f) + c_var * metric (c_var = +1/2,
-1/2, 0) then satisfies: N |E_N| stays bounded as N grows.

The numeric kernel is the ground truth for every verified statement.
Reference closed-form Christoffel tables for these metrics circulate with
a few typographical slips; ``canonical_christoffel_closed_form`` therefore
evaluates either the literal printed table (``as_printed=True``) or the
rederived one, and ``CHRISTOFFEL_CORRECTIONS`` records every place the two
differ so that cross-check reports can show, rather than hide, the slips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backgrounds import RicciFlowBackground
from .geometry import (
    ChartDomainError,
    MetricField,
    ScalarField,
    SymTensor2,
    christoffel,
    hessian,
    ricci,
    tensor_norm,
)

__all__ = [
    "VARIANTS",
    "CanonicalConfigError",
    "CanonicalMetric",
    "ResidualSample",
    "FormCorrection",
    "CHRISTOFFEL_CORRECTIONS",
    "build_canonical_metric",
    "minimal_admissible_N",
    "canonical_christoffel_closed_form",
    "christoffel_crosscheck",
    "ricci_soliton_residual",
    "canonical_ricci_quadratic",
    "limit_ricci",
]

VARIANTS = ("expanding", "shrinking", "steady")

_SOLITON_CONSTANT = {"expanding": 0.5, "shrinking": -0.5, "steady": 0.0}
_REQUIRED_DIRECTION = {"expanding": "forward", "shrinking": "backward", "steady": "backward"}


class CanonicalConfigError(ValueError):
    """Variant/direction mismatch or inadmissible parameter N."""


@dataclass(frozen=True)
class CanonicalMetric:
    """Space-time metric of one canonical variant, ready for the kernel.

    ``field`` is an (m + 1)-dimensional MetricField on z = (t, y) with
    analytic first and second partials; ``potential`` is the matching
    soliton potential as a scalar field on the same chart.
    """

    variant: str
    N: float
    base: RicciFlowBackground
    field: MetricField
    potential: ScalarField
    soliton_constant: float

    @property
    def spacetime_dim(self) -> int:
        return self.base.dim + 1

    @property
    def t_min(self) -> float:
        """Default sampling floor, 5% of the time horizon."""
        return 0.05 * self.base.time_domain[1]

    def spacetime_point(self, p: np.ndarray, t: float) -> np.ndarray:
        return np.concatenate(([float(t)], np.asarray(p, dtype=float)))

    def time_time(self, p: np.ndarray, t: float) -> float:
        return float(self.field.components(self.spacetime_point(p, t))[0, 0])


@dataclass(frozen=True)
class ResidualSample:
    """One point of a residual sweep: the tensor, its norm, and N * norm."""

    point: np.ndarray
    t: float
    N: float
    residual: SymTensor2
    norm: float
    scaled_norm: float


def _time_time_scalars(bg: RicciFlowBackground, variant: str, N: float):
    """Closed-form w(t), w'(t), w''(t) for the time-time component."""
    m = bg.dim
    conf = bg.conformal
    Rs = conf.sigma_scalar

    def R(t):
        return Rs / conf.phi(t)

    def dR(t):
        return -Rs * conf.dphi(t) / conf.phi(t) ** 2

    def d2R(t):
        return Rs * (2.0 * conf.dphi(t) ** 2 / conf.phi(t) ** 3 - conf.d2phi(t) / conf.phi(t) ** 2)

    if variant == "expanding":
        w = lambda t: N / (2 * t**3) + R(t) / t + m / (2 * t**2)
        dw = lambda t: -3 * N / (2 * t**4) + dR(t) / t - R(t) / t**2 - m / t**3
        d2w = lambda t: 6 * N / t**5 + d2R(t) / t - 2 * dR(t) / t**2 + 2 * R(t) / t**3 + 3 * m / t**4
    elif variant == "shrinking":
        w = lambda t: N / (2 * t**3) + R(t) / t - m / (2 * t**2)
        dw = lambda t: -3 * N / (2 * t**4) + dR(t) / t - R(t) / t**2 + m / t**3
        d2w = lambda t: 6 * N / t**5 + d2R(t) / t - 2 * dR(t) / t**2 + 2 * R(t) / t**3 - 3 * m / t**4
    else:
        w, dw, d2w = (lambda t: N + R(t)), dR, d2R
    return w, dw, d2w


def _spatial_scale(bg: RicciFlowBackground, variant: str):
    """psi(t) with spatial block psi(t) * sigma(y), plus psi', psi''."""
    conf = bg.conformal
    if variant == "steady":
        return conf.phi, conf.dphi, conf.d2phi
    psi = lambda t: conf.phi(t) / t
    dpsi = lambda t: conf.dphi(t) / t - conf.phi(t) / t**2
    d2psi = lambda t: conf.d2phi(t) / t - 2 * conf.dphi(t) / t**2 + 2 * conf.phi(t) / t**3
    return psi, dpsi, d2psi


def minimal_admissible_N(bg: RicciFlowBackground, variant: str, samples) -> float:
    """Smallest N making the time-time component >= 1 over the samples.

    ``samples`` is an iterable of (p, t) pairs.  The positivity threshold
    is not fixed by the construction itself, so it is computed per run and
    reported.
    """
    if variant not in VARIANTS:
        raise CanonicalConfigError(f"unknown variant {variant!r}; known: {VARIANTS}")
    m = bg.dim
    need = 0.0
    for p, t in samples:
        R = bg.scalar_at(np.asarray(p, dtype=float), t)
        if variant == "expanding":
            need = max(need, 2 * t**3 * (1.0 - R / t - m / (2 * t**2)))
        elif variant == "shrinking":
            need = max(need, 2 * t**3 * (1.0 - R / t + m / (2 * t**2)))
        else:
            need = max(need, 1.0 - R)
    return need


def build_canonical_metric(
    bg: RicciFlowBackground,
    variant: str,
    N: float,
    samples=None,
) -> CanonicalMetric:
    """Assemble the canonical space-time metric for one variant.

    The expanding variant requires a forward background, shrinking and
    steady a backward one.  When ``samples`` (pairs (p, t)) are given, N
    is validated against the positivity threshold on that sampling set and
    a ``CanonicalConfigError`` reports the minimal admissible value.
    """
    if variant not in VARIANTS:
        raise CanonicalConfigError(f"unknown variant {variant!r}; known: {VARIANTS}")
    if bg.direction != _REQUIRED_DIRECTION[variant]:
        raise CanonicalConfigError(
            f"{variant} variant needs a {_REQUIRED_DIRECTION[variant]} background, "
            f"got {bg.direction} ({bg.name})"
        )
    if not (N > 0):
        raise CanonicalConfigError(f"N must be positive, got {N}")
    if samples is not None:
        n_min = minimal_admissible_N(bg, variant, samples)
        if N < n_min:
            raise CanonicalConfigError(
                f"N={N} below the positivity threshold on the sampling domain; "
                f"minimal admissible N is {n_min:.6g}"
            )

    m = bg.dim
    dim = m + 1
    sigma = bg.conformal.sigma
    w, dw, d2w = _time_time_scalars(bg, variant, N)
    psi, dpsi, d2psi = _spatial_scale(bg, variant)
    lo, hi = bg.time_domain
    # small overhang so FD stencils near the endpoint stay evaluable
    t_max = hi * (1.0 + 1e-3)

    def comps(z):
        t = z[0]
        g = np.zeros((dim, dim))
        g[0, 0] = w(t)
        g[1:, 1:] = psi(t) * np.asarray(sigma.components(z[1:]))
        return g

    def d1(z):
        t, y = z[0], z[1:]
        out = np.zeros((dim, dim, dim))
        out[0, 0, 0] = dw(t)
        out[0, 1:, 1:] = dpsi(t) * np.asarray(sigma.components(y))
        out[1:, 1:, 1:] = psi(t) * np.asarray(sigma.d1(y))
        return out

    def d2(z):
        t, y = z[0], z[1:]
        out = np.zeros((dim, dim, dim, dim))
        out[0, 0, 0, 0] = d2w(t)
        out[0, 0, 1:, 1:] = d2psi(t) * np.asarray(sigma.components(y))
        dsig = dpsi(t) * np.asarray(sigma.d1(y))
        out[0, 1:, 1:, 1:] = dsig
        out[1:, 0, 1:, 1:] = dsig
        out[1:, 1:, 1:, 1:] = psi(t) * np.asarray(sigma.d2(y))
        return out

    def in_domain(z):
        if not (0.0 < z[0] <= t_max):
            return False
        return sigma.in_domain is None or sigma.in_domain(z[1:])

    field = MetricField(dim=dim, components=comps, d1=d1, d2=d2, in_domain=in_domain)

    if variant == "expanding":
        potential = ScalarField(
            value=lambda z: -N / (2.0 * z[0]),
            d1=lambda z: _time_covector(dim, N / (2.0 * z[0] ** 2)),
            d2=lambda z: _time_matrix(dim, -N / z[0] ** 3),
        )
    elif variant == "shrinking":
        potential = ScalarField(
            value=lambda z: N / (2.0 * z[0]),
            d1=lambda z: _time_covector(dim, -N / (2.0 * z[0] ** 2)),
            d2=lambda z: _time_matrix(dim, N / z[0] ** 3),
        )
    else:
        potential = ScalarField(
            value=lambda z: -N * z[0],
            d1=lambda z: _time_covector(dim, -N),
            d2=lambda z: np.zeros((dim, dim)),
        )

    return CanonicalMetric(
        variant=variant,
        N=float(N),
        base=bg,
        field=field,
        potential=potential,
        soliton_constant=_SOLITON_CONSTANT[variant],
    )


def _time_covector(dim, value):
    v = np.zeros(dim)
    v[0] = value
    return v


def _time_matrix(dim, value):
    a = np.zeros((dim, dim))
    a[0, 0] = value
    return a


# ---------------------------------------------------------------------------
# soliton residual (engine path)
# ---------------------------------------------------------------------------


def ricci_soliton_residual(cm: CanonicalMetric, p: np.ndarray, t: float) -> ResidualSample:
    """Engine evaluation of E_N = Ric + Hess(f) + c_var * metric at (p, t).

    Everything is computed by the numeric kernel on the space-time metric;
    the closed-form tables play no role here.  The returned sample carries
    |E_N| in the metric's own norm and the scaled value N |E_N|.
    """
    t = float(t)
    if t < cm.t_min:
        raise ChartDomainError(f"t={t} below sampling floor t_min={cm.t_min}")
    z = cm.spacetime_point(p, t)
    z = cm.field.check_point(z)
    ric = ricci(cm.field, z).entries
    hess = hessian(cm.field, cm.potential, z).entries
    g = cm.field.at(z)
    E = SymTensor2.symmetrized(ric + hess + cm.soliton_constant * g)
    norm = tensor_norm(cm.field, E, z)
    return ResidualSample(
        point=np.asarray(p, dtype=float),
        t=t,
        N=cm.N,
        residual=E,
        norm=norm,
        scaled_norm=cm.N * norm,
    )


def canonical_ricci_quadratic(cm: CanonicalMetric, X: np.ndarray, p: np.ndarray, t: float) -> float:
    """Ric of the canonical metric on the lifted vector X + d/dt.

    X is a spatial (contravariant) vector on the background; the lift
    prepends a unit time component.
    """
    z = cm.field.check_point(cm.spacetime_point(p, t))
    Xbar = np.concatenate(([1.0], np.asarray(X, dtype=float)))
    ric = ricci(cm.field, z).entries
    return float(Xbar @ ric @ Xbar)


def limit_ricci(bg: RicciFlowBackground, X: np.ndarray, p: np.ndarray, t: float) -> float:
    """Large-N limit of the canonical expander's Ricci on X + d/dt.

    Ric(X, X) + g(X, grad R) + (dR/dt + R/t) / 2, assembled from background
    data only.  Requires a forward background and t > 0.
    """
    if bg.direction != "forward":
        raise CanonicalConfigError("limit_ricci needs a forward background")
    t = bg.check_time(t)
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    ric = bg.ricci_at(p, t)
    quad = float(X @ ric @ X)
    transport = float(X @ bg.dy_scalar_at(p, t))
    return quad + transport + 0.5 * (bg.dt_scalar_at(p, t) + bg.scalar_at(p, t) / t)


# ---------------------------------------------------------------------------
# closed-form Christoffel tables and their corrections
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FormCorrection:
    """A place where the printed reference table and the derivation differ."""

    variant: str
    symbol: str
    printed: str
    derived: str
    visible_on_catalog: bool


CHRISTOFFEL_CORRECTIONS = (
    FormCorrection(
        "expanding", "G^0_00",
        "-3/(2t) + (1/(2tw)) (R/t + dR/dt + m/(2t^2))",
        "-3/(2t) + (1/(2tw)) (2R/t + dR/dt + m/(2t^2))",
        visible_on_catalog=True,       # sphere background has R != 0
    ),
    FormCorrection(
        "shrinking", "G^0_bc",
        "(1/w) ( -(g_bc/(2 tau^2) - Ric_bc) / tau )",
        "(1/w) (g_bc/(2 tau^2) - Ric_bc / tau)",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "shrinking", "G^0_00",
        "-3/(2 tau) + (1/(2 tau w)) (R/tau + dR/dtau + m/(2 tau^2))",
        "-3/(2 tau) + (1/(2 tau w)) (2R/tau + dR/dtau - m/(2 tau^2))",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "steady", "G^0_b0",
        "(1/2) d_b R",
        "(1/2) d_b R / (N + R)",
        visible_on_catalog=False,      # catalog scalar curvature is spatially constant
    ),
    FormCorrection(
        "steady", "G^0_00",
        "(1/2) dR/dtau",
        "(1/2) (dR/dtau) / (N + R)",
        visible_on_catalog=True,
    ),
)

# The printed G^a_00 entry pairs the inverse metric's role with lowered
# indices; only the inverse-metric reading typechecks, so both evaluation
# modes use -1/2 g^{ab} d_b R and the slip is notational, not numeric.
NOTATION_NOTES = (
    "G^a_00 is printed with lowered metric indices; evaluated as -1/2 g^{ab} d_b R.",
)


def canonical_christoffel_closed_form(
    cm: CanonicalMetric,
    p: np.ndarray,
    t: float,
    as_printed: bool = False,
) -> "ConnectionCoeffs":
    """Closed-form connection coefficients of the canonical metric.

    ``as_printed=False`` evaluates the rederived table (what the
    Levi-Civita formula actually yields); ``as_printed=True`` evaluates
    the reference table literally, typographical slips included, so the
    cross-check suite can measure them.  Index 0 is time.
    """
    from .geometry import ConnectionCoeffs

    bg = cm.base
    t = float(t)
    z = cm.field.check_point(cm.spacetime_point(p, t))
    p = z[1:]
    m = bg.dim
    dim = m + 1
    N = cm.N

    snap = bg.metric_at(t)
    g = snap.at(p)
    ginv = np.linalg.inv(g)
    ric = bg.ricci_at(p, t)
    ric_up = ginv @ ric                       # Ric^a_b
    R = bg.scalar_at(p, t)
    dRdt = bg.dt_scalar_at(p, t)
    dRdy = bg.dy_scalar_at(p, t)
    w = cm.time_time(p, t)

    gamma = np.zeros((dim, dim, dim))
    gamma_bg = christoffel(snap, p).gamma
    gamma[1:, 1:, 1:] = gamma_bg

    if cm.variant == "expanding":
        mixed_up = -(ric_up + np.eye(m) / (2 * t))
        gamma[1:, 1:, 0] = mixed_up
        gamma[1:, 0, 1:] = mixed_up
        gamma[1:, 0, 0] = -0.5 * ginv @ dRdy
        gamma[0, 1:, 1:] = (ric / t + g / (2 * t**2)) / w
        time_mixed = dRdy / (2 * t * w)
        gamma[0, 1:, 0] = time_mixed
        gamma[0, 0, 1:] = time_mixed
        r_coeff = 1.0 if as_printed else 2.0
        gamma[0, 0, 0] = -3 / (2 * t) + (r_coeff * R / t + dRdt + m / (2 * t**2)) / (2 * t * w)

    elif cm.variant == "shrinking":
        mixed_up = ric_up - np.eye(m) / (2 * t)
        gamma[1:, 1:, 0] = mixed_up
        gamma[1:, 0, 1:] = mixed_up
        gamma[1:, 0, 0] = -0.5 * ginv @ dRdy
        if as_printed:
            gamma[0, 1:, 1:] = -(g / (2 * t**2) - ric) / (t * w)
        else:
            gamma[0, 1:, 1:] = (g / (2 * t**2) - ric / t) / w
        time_mixed = dRdy / (2 * t * w)
        gamma[0, 1:, 0] = time_mixed
        gamma[0, 0, 1:] = time_mixed
        if as_printed:
            gamma[0, 0, 0] = -3 / (2 * t) + (R / t + dRdt + m / (2 * t**2)) / (2 * t * w)
        else:
            gamma[0, 0, 0] = -3 / (2 * t) + (2 * R / t + dRdt - m / (2 * t**2)) / (2 * t * w)

    else:  # steady
        gamma[1:, 1:, 0] = ric_up
        gamma[1:, 0, 1:] = ric_up
        gamma[1:, 0, 0] = -0.5 * ginv @ dRdy
        gamma[0, 1:, 1:] = -ric / (N + R)
        time_mixed = 0.5 * dRdy if as_printed else 0.5 * dRdy / (N + R)
        gamma[0, 1:, 0] = time_mixed
        gamma[0, 0, 1:] = time_mixed
        gamma[0, 0, 0] = 0.5 * dRdt if as_printed else 0.5 * dRdt / (N + R)

    return ConnectionCoeffs(gamma)


_SYMBOL_CLASSES = {
    "G^a_bc": (slice(1, None), slice(1, None), slice(1, None)),
    "G^a_b0": (slice(1, None), slice(1, None), 0),
    "G^a_00": (slice(1, None), 0, 0),
    "G^0_bc": (0, slice(1, None), slice(1, None)),
    "G^0_b0": (0, slice(1, None), 0),
    "G^0_00": (0, 0, 0),
}


def christoffel_crosscheck(cm: CanonicalMetric, samples, as_printed: bool = False) -> dict:
    """Engine-vs-closed-form comparison over (p, t) samples.

    Returns a per-symbol-class table of relative errors, each class scaled
    by the largest engine entry it contains; classes that vanish in both
    evaluations report their absolute mismatch.
    """
    diff = {k: 0.0 for k in _SYMBOL_CLASSES}
    scale = {k: 0.0 for k in _SYMBOL_CLASSES}
    for p, t in samples:
        z = cm.spacetime_point(p, t)
        engine = christoffel(cm.field, z).gamma
        closed = canonical_christoffel_closed_form(cm, p, t, as_printed=as_printed).gamma
        for name, idx in _SYMBOL_CLASSES.items():
            e = np.atleast_1d(engine[idx])
            c = np.atleast_1d(closed[idx])
            diff[name] = max(diff[name], float(np.max(np.abs(e - c))))
            scale[name] = max(scale[name], float(np.max(np.abs(e))))
    return {
        name: (diff[name] / scale[name] if scale[name] > 1e-14 else diff[name])
        for name in _SYMBOL_CLASSES
    }
