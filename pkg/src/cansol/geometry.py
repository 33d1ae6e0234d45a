"""Chart-based numerical Riemannian geometry.

Everything here operates pointwise on a coordinate chart: a metric is a
callable producing the component matrix g_ij at a point, optionally
accompanied by analytic first/second partial derivatives.  When the
analytic callbacks are absent, central finite differences (with optional
one-level Richardson extrapolation) stand in, so the same curvature code
doubles as an independent check of any closed-form input.

Conventions
-----------
* Points are 1-d float arrays of chart coordinates.  On space-time charts
  index 0 is always the time coordinate.
* ``christoffel`` returns Gamma[a, b, c] = Gamma^a_{bc}.
* ``riemann`` returns R[a, b, c, d] = R^a_{bcd} with
  R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
             + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
  and ``ricci`` is the trace Ric_bd = R^a_{bad}.  The overall sign is
  fixed so that the round sphere has positive Ricci curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

__all__ = [
    "GeometryError",
    "DegenerateMetricError",
    "ChartDomainError",
    "FDConfig",
    "MetricField",
    "ScalarField",
    "SymTensor2",
    "ConnectionCoeffs",
    "chart_point",
    "metric_d1",
    "metric_d2",
    "scalar_d1",
    "scalar_d2",
    "inverse_metric",
    "christoffel",
    "christoffel_d1",
    "riemann",
    "ricci",
    "scalar_curvature",
    "hessian",
    "laplacian",
    "tensor_norm",
    "gradient",
    "directional_derivative",
    "check_metric_derivatives",
]

# Matrix inversion is refused above this condition number; beyond it the
# curvature output would be numerical noise.
COND_LIMIT = 1e12


class GeometryError(Exception):
    """Base class for errors raised by the geometry kernel."""


class DegenerateMetricError(GeometryError):
    """Metric is singular (condition number above COND_LIMIT) at a point."""


class ChartDomainError(GeometryError, ValueError):
    """Point lies outside the declared chart domain."""


def chart_point(coords) -> np.ndarray:
    """Validate chart coordinates and return them as a float array.

    Raises ``ChartDomainError`` if any entry is non-finite.
    """
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1:
        raise ChartDomainError(f"chart point must be a 1-d coordinate array, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ChartDomainError(f"chart point has non-finite entries: {p}")
    return p


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference step policy.

    Steps scale with the coordinate magnitude: the step along coordinate a
    is ``h * max(1, |p_a|)``.  ``richardson`` enables one level of
    Richardson extrapolation (h and h/2 stencils combined).
    """

    h1: float = 1e-5        # first derivatives
    h2: float = 1e-4        # second derivatives
    richardson: bool = False


@dataclass(frozen=True)
class MetricField:
    """A smooth symmetric positive-definite metric on a coordinate chart.

    Parameters
    ----------
    dim : chart dimension d.
    components : point -> (d, d) symmetric matrix g_ij.
    d1 : optional, point -> (d, d, d) array with [a, b, c] = d_a g_bc.
    d2 : optional, point -> (d, d, d, d) array with [a, b, c, d] = d_a d_b g_cd.
    fd : step policy for the finite-difference fallback.
    in_domain : optional chart-domain predicate; violations raise
        ``ChartDomainError`` from every kernel operation.
    """

    dim: int
    components: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray] | None = None
    d2: Callable[[np.ndarray], np.ndarray] | None = None
    fd: FDConfig = field(default_factory=FDConfig)
    in_domain: Callable[[np.ndarray], bool] | None = None

    def at(self, p: np.ndarray) -> np.ndarray:
        p = self.check_point(p)
        return np.asarray(self.components(p), dtype=float)

    def check_point(self, p) -> np.ndarray:
        p = chart_point(p)
        if p.shape[0] != self.dim:
            raise ChartDomainError(f"point has dimension {p.shape[0]}, chart has {self.dim}")
        if self.in_domain is not None and not self.in_domain(p):
            raise ChartDomainError(f"point {p} outside chart domain")
        return p

    def without_analytic_derivatives(self) -> "MetricField":
        """Copy of this field using only finite differences (FD backend)."""
        return replace(self, d1=None, d2=None)


@dataclass(frozen=True)
class ScalarField:
    """A scalar function on a chart with optional analytic partials."""

    value: Callable[[np.ndarray], float]
    d1: Callable[[np.ndarray], np.ndarray] | None = None   # -> (d,)
    d2: Callable[[np.ndarray], np.ndarray] | None = None   # -> (d, d)
    fd: FDConfig = field(default_factory=FDConfig)

    @staticmethod
    def constant(c: float) -> "ScalarField":
        return ScalarField(
            value=lambda p: c,
            d1=lambda p: np.zeros(p.shape[0]),
            d2=lambda p: np.zeros((p.shape[0], p.shape[0])),
        )


@dataclass(frozen=True)
class SymTensor2:
    """A symmetric 2-tensor at a point, covariant or contravariant."""

    entries: np.ndarray
    variance: str = "covariant"

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        object.__setattr__(self, "entries", e)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"SymTensor2 entries must be square, got shape {e.shape}")
        scale = max(1.0, float(np.max(np.abs(e))))
        if np.max(np.abs(e - e.T)) > 1e-12 * scale:
            raise ValueError("SymTensor2 entries are not symmetric")
        if self.variance not in ("covariant", "contravariant"):
            raise ValueError(f"unknown variance {self.variance!r}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def symmetrized(entries, variance: str = "covariant") -> "SymTensor2":
        e = np.asarray(entries, dtype=float)
        return SymTensor2(0.5 * (e + e.T), variance)


@dataclass(frozen=True)
class ConnectionCoeffs:
    """Levi-Civita connection coefficients Gamma^a_{bc} at a point."""

    gamma: np.ndarray   # (d, d, d), [a, b, c] = Gamma^a_{bc}

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]


# ---------------------------------------------------------------------------
# finite differences
# ---------------------------------------------------------------------------


def _steps(p: np.ndarray, h: float) -> np.ndarray:
    return h * np.maximum(1.0, np.abs(p))


def _central_d1(f, p: np.ndarray, h: float):
    """Central first differences of an array-valued function, one slot per coordinate."""
    out = []
    hs = _steps(p, h)
    for a in range(p.shape[0]):
        e = np.zeros_like(p)
        e[a] = hs[a]
        out.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2.0 * hs[a]))
    return np.stack(out, axis=0)


def _central_d2(f, p: np.ndarray, h: float):
    """Central second differences: [a, b] slots of d_a d_b f."""
    d = p.shape[0]
    hs = _steps(p, h)
    f0 = np.asarray(f(p), dtype=float)
    out = np.zeros((d, d) + f0.shape)
    for a in range(d):
        ea = np.zeros_like(p)
        ea[a] = hs[a]
        out[a, a] = (np.asarray(f(p + ea)) - 2.0 * f0 + np.asarray(f(p - ea))) / hs[a] ** 2
        for b in range(a + 1, d):
            eb = np.zeros_like(p)
            eb[b] = hs[b]
            cross = (
                np.asarray(f(p + ea + eb))
                - np.asarray(f(p + ea - eb))
                - np.asarray(f(p - ea + eb))
                + np.asarray(f(p - ea - eb))
            ) / (4.0 * hs[a] * hs[b])
            out[a, b] = cross
            out[b, a] = cross
    return out


def _richardson(stencil, f, p, h):
    coarse = stencil(f, p, h)
    fine = stencil(f, p, 0.5 * h)
    return (4.0 * fine - coarse) / 3.0


def metric_d1(metric: MetricField, p: np.ndarray) -> np.ndarray:
    """First partials d_a g_bc, analytic when available, else central FD."""
    p = metric.check_point(p)
    if metric.d1 is not None:
        return np.asarray(metric.d1(p), dtype=float)
    if metric.fd.richardson:
        return _richardson(_central_d1, metric.components, p, metric.fd.h1)
    return _central_d1(metric.components, p, metric.fd.h1)


def metric_d2(metric: MetricField, p: np.ndarray) -> np.ndarray:
    """Second partials d_a d_b g_cd, analytic when available, else central FD."""
    p = metric.check_point(p)
    if metric.d2 is not None:
        return np.asarray(metric.d2(p), dtype=float)
    if metric.fd.richardson:
        return _richardson(_central_d2, metric.components, p, metric.fd.h2)
    return _central_d2(metric.components, p, metric.fd.h2)


def scalar_d1(f: ScalarField, p: np.ndarray) -> np.ndarray:
    p = chart_point(p)
    if f.d1 is not None:
        return np.asarray(f.d1(p), dtype=float)
    if f.fd.richardson:
        return _richardson(_central_d1, f.value, p, f.fd.h1)
    return _central_d1(f.value, p, f.fd.h1)


def scalar_d2(f: ScalarField, p: np.ndarray) -> np.ndarray:
    p = chart_point(p)
    if f.d2 is not None:
        return np.asarray(f.d2(p), dtype=float)
    if f.fd.richardson:
        return _richardson(_central_d2, f.value, p, f.fd.h2)
    return _central_d2(f.value, p, f.fd.h2)


# ---------------------------------------------------------------------------
# pointwise tensor operations
# ---------------------------------------------------------------------------


def inverse_metric(metric: MetricField, p: np.ndarray) -> np.ndarray:
    """Inverse component matrix g^ab, refusing ill-conditioned input.

    Conditioning is estimated with the 1-norm (within a factor of dim of
    the spectral condition number, and much cheaper than an SVD).
    """
    g = metric.at(p)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError(f"metric at {np.asarray(p)} is singular") from exc
    cond = float(np.linalg.norm(g, 1) * np.linalg.norm(ginv, 1))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateMetricError(
            f"metric at {np.asarray(p)} has condition number {cond:.3e} (limit {COND_LIMIT:.0e})"
        )
    return ginv


def christoffel(metric: MetricField, p: np.ndarray) -> ConnectionCoeffs:
    """Levi-Civita Christoffel symbols at a point.

    Gamma^a_{bc} = 1/2 g^{ad} (d_b g_dc + d_c g_bd - d_d g_bc); the result
    is symmetric in (b, c) exactly, given symmetric input components.
    """
    ginv = inverse_metric(metric, p)
    dg = metric_d1(metric, p)
    # bracket[d, b, c] = d_b g_dc + d_c g_bd - d_d g_bc
    bracket = np.einsum("bdc->dbc", dg) + np.einsum("cbd->dbc", dg) - dg
    gamma = 0.5 * np.einsum("ad,dbc->abc", ginv, bracket)
    gamma = 0.5 * (gamma + np.swapaxes(gamma, 1, 2))
    return ConnectionCoeffs(gamma)


def christoffel_d1(metric: MetricField, p: np.ndarray) -> np.ndarray:
    """Partial derivatives d_e Gamma^a_{bc}, index order [e, a, b, c].

    Assembled from metric first and second partials, so the accuracy is
    that of the underlying derivative backend (no nested differencing).
    """
    p = metric.check_point(p)
    ginv = inverse_metric(metric, p)
    dg = metric_d1(metric, p)
    ddg = metric_d2(metric, p)

    bracket = np.einsum("bdc->dbc", dg) + np.einsum("cbd->dbc", dg) - dg
    # d_e bracket[d, b, c] from second partials of g
    dbracket = (
        np.einsum("ebdc->edbc", ddg) + np.einsum("ecbd->edbc", ddg) - np.einsum("edbc->edbc", ddg)
    )
    # d_e g^{ad} = -g^{am} (d_e g_mn) g^{nd}
    dginv = -np.einsum("am,emn,nd->ead", ginv, dg, ginv)
    dgamma = 0.5 * np.einsum("ead,dbc->eabc", dginv, bracket)
    dgamma += 0.5 * np.einsum("ad,edbc->eabc", ginv, dbracket)
    return 0.5 * (dgamma + np.swapaxes(dgamma, 2, 3))


def riemann(metric: MetricField, p: np.ndarray) -> np.ndarray:
    """Riemann tensor R^a_{bcd} (sign convention as in the module docstring)."""
    gamma = christoffel(metric, p).gamma
    dgamma = christoffel_d1(metric, p)
    R = (
        np.einsum("cadb->abcd", dgamma)
        - np.einsum("dacb->abcd", dgamma)
        + np.einsum("ace,edb->abcd", gamma, gamma)
        - np.einsum("ade,ecb->abcd", gamma, gamma)
    )
    return R


def ricci(metric: MetricField, p: np.ndarray) -> SymTensor2:
    """Ricci tensor Ric_bd = R^a_{bad}; positive on round spheres."""
    R = riemann(metric, p)
    return SymTensor2.symmetrized(np.einsum("abad->bd", R), "covariant")


def scalar_curvature(metric: MetricField, p: np.ndarray) -> float:
    """Scalar curvature R = g^{bd} Ric_bd."""
    ginv = inverse_metric(metric, p)
    ric = ricci(metric, p).entries
    return float(np.einsum("bd,bd->", ginv, ric))


def hessian(metric: MetricField, f: ScalarField, p: np.ndarray) -> SymTensor2:
    """Covariant Hessian Hess(f)_ab = d_a d_b f - Gamma^c_{ab} d_c f."""
    gamma = christoffel(metric, p).gamma
    df = scalar_d1(f, p)
    ddf = scalar_d2(f, p)
    hess = ddf - np.einsum("cab,c->ab", gamma, df)
    return SymTensor2.symmetrized(hess, "covariant")


def laplacian(metric: MetricField, f: ScalarField, p: np.ndarray) -> float:
    """Metric Laplacian: trace of the Hessian against g^{ab}."""
    ginv = inverse_metric(metric, p)
    return float(np.einsum("ab,ab->", ginv, hessian(metric, f, p).entries))


def tensor_norm(metric: MetricField, T: SymTensor2, p: np.ndarray) -> float:
    """Pointwise metric norm |T| of a symmetric 2-tensor.

    Covariant: |T|^2 = g^{ac} g^{bd} T_ab T_cd; contravariant indices are
    contracted with g instead.  Returns the nonnegative square root.
    """
    if T.variance == "covariant":
        m = inverse_metric(metric, p)
    else:
        m = metric.at(p)
    sq = float(np.einsum("ac,bd,ab,cd->", m, m, T.entries, T.entries))
    return float(np.sqrt(max(sq, 0.0)))


def gradient(metric: MetricField, f: ScalarField, p: np.ndarray) -> np.ndarray:
    """Contravariant gradient (grad f)^a = g^{ab} d_b f."""
    return inverse_metric(metric, p) @ scalar_d1(f, p)


def directional_derivative(metric: MetricField, f: ScalarField, v: np.ndarray, p: np.ndarray) -> float:
    """Derivative of f along the (contravariant) vector v: v^a d_a f."""
    metric.check_point(p)
    v = np.asarray(v, dtype=float)
    return float(v @ scalar_d1(f, p))


def check_metric_derivatives(metric: MetricField, points, rtol: float = 1e-6) -> float:
    """Cross-check supplied d1/d2 callbacks against central differences.

    Returns the worst relative deviation over the given points; raises
    ``GeometryError`` if it exceeds ``rtol``.  Fields without analytic
    callbacks pass trivially.  The comparison stencil always uses
    Richardson extrapolation so that steep closed forms are checked at
    the oracle's best accuracy.
    """
    worst = 0.0
    fd_field = replace(
        metric, d1=None, d2=None, fd=replace(metric.fd, richardson=True)
    )
    for p in points:
        p = metric.check_point(p)
        if metric.d1 is not None:
            ana, num = metric_d1(metric, p), metric_d1(fd_field, p)
            scale = max(1.0, float(np.max(np.abs(ana))))
            worst = max(worst, float(np.max(np.abs(ana - num))) / scale)
        if metric.d2 is not None:
            ana, num = metric_d2(metric, p), metric_d2(fd_field, p)
            scale = max(1.0, float(np.max(np.abs(ana))))
            worst = max(worst, float(np.max(np.abs(ana - num))) / scale)
    if worst > rtol:
        raise GeometryError(
            f"analytic metric derivatives deviate from finite differences by {worst:.3e} (tol {rtol:.1e})"
        )
    return worst
