"""Space-time track of a hypersurface flow inside a canonical metric.

The track of F_t is the hypersurface Sigma = {(t, F_t(x))} of the
space-time O x (0, T], parametrized by u = (t, x) with index 0 = time.
Its tangent basis is {d/dt + dF/dt, d_1 F, ..., d_n F}; for an exact flow
dF/dt = -H nu, so the time leg is the familiar -H nu + d/dt.

The extrinsic geometry of Sigma (normal, induced metric, second
fundamental form h^S, mean curvature H^S) is computed by the numeric
kernel from the canonical metric's connection.  The sign convention
matches the hypersurface one: h^S(U, V) = <D_U nu^S, V>, which makes the
leading block of h^S equal h_ij / (t sigma_N) with the positive-sphere h.

The theorems under test say Sigma is an approximate soliton: the defect

    expanding:  E~_N = H^S - nu^S f        (f = -N/(2t))
    shrinking:  E~_N = H^S + nu^S f        (f = +N/(2 tau))
    steady:     E~_N = H^S + nu^S f        (f = -N tau)

stays O(1/N), i.e. N |E~_N| is bounded.  As with the Christoffel tables,
the reference closed forms for h^S circulate with slips in their O(1/N)
correction terms; ``closed_form_second_ff`` evaluates either the literal
or the rederived version and ``SECOND_FF_CORRECTIONS`` records the
differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backgrounds import HypersurfacePointData, MCFSolution, hypersurface_point_data
from .canonical import CanonicalConfigError, CanonicalMetric, FormCorrection
from .geometry import (
    SymTensor2,
    christoffel,
    scalar_d1,
)

__all__ = [
    "SpaceTimeTrack",
    "TrackPointData",
    "TrackResidualSample",
    "SECOND_FF_CORRECTIONS",
    "TRACK_FORM_NOTES",
    "build_track",
    "track_point_data",
    "closed_form_second_ff",
    "closed_form_normal_potential",
    "mcf_canonical_residual",
    "limit_inverse_metric",
]


@dataclass(frozen=True)
class SpaceTimeTrack:
    """A hypersurface flow paired with the canonical metric it lives in."""

    mcf: MCFSolution
    cm: CanonicalMetric

    @property
    def n(self) -> int:
        return self.mcf.hypersurface_dim

    def check_time(self, t: float) -> float:
        t = self.mcf.check_time(t)
        if t < self.cm.t_min:
            raise CanonicalConfigError(
                f"t={t} below the sampling floor t_min={self.cm.t_min}"
            )
        return t


def build_track(mcf: MCFSolution, cm: CanonicalMetric) -> SpaceTimeTrack:
    """Pair a flow with a canonical metric, validating compatibility."""
    a, b = mcf.ambient, cm.base
    if (a.name, a.dim, a.direction) != (b.name, b.dim, b.direction):
        raise CanonicalConfigError(
            f"flow ambient ({a.name}, dim {a.dim}, {a.direction}) does not match "
            f"canonical base ({b.name}, dim {b.dim}, {b.direction})"
        )
    return SpaceTimeTrack(mcf, cm)


@dataclass(frozen=True)
class TrackPointData:
    """Pointwise extrinsic geometry of the track, plus the slice data."""

    x: np.ndarray
    t: float
    z: np.ndarray                # ambient space-time point (t, F_t(x))
    basis: np.ndarray            # (n+1, n+2) tangent vectors, row 0 = time leg
    induced: np.ndarray          # (n+1, n+1)
    induced_inv: np.ndarray
    normal: np.ndarray           # (n+2,) unit space-time normal nu^S
    sigma_N: float
    second_ff: np.ndarray        # (n+1, n+1), chart index 0 = time
    mean_curvature: float        # H^S
    hyp: HypersurfacePointData   # geometry of the slice M_t


@dataclass(frozen=True)
class TrackResidualSample:
    """One point of a soliton-defect sweep on the track."""

    x: np.ndarray
    t: float
    N: float
    value: float                 # H^S -+ nu^S f, sign per variant
    norm: float
    scaled_norm: float


def _sigma_N(variant: str, t: float, H: float, w: float) -> float:
    if variant == "steady":
        return math.sqrt(1.0 + H**2 / w)
    return math.sqrt(1.0 / t + H**2 / (t**2 * w))


def track_point_data(track: SpaceTimeTrack, x: np.ndarray, t: float) -> TrackPointData:
    """Engine evaluation of the track geometry at chart point (x, t)."""
    t = track.check_time(t)
    cm, mcf = track.cm, track.mcf
    n = track.n
    dim = cm.spacetime_dim

    hyp = hypersurface_point_data(mcf, x, t)
    z = cm.field.check_point(cm.spacetime_point(hyp.position, t))
    g_st = cm.field.at(z)

    # tangent basis: row 0 is d/dt + dF/dt, rows 1..n are (0, d_i F)
    basis = np.zeros((n + 1, dim))
    basis[0, 0] = 1.0
    basis[0, 1:] = hyp.velocity
    basis[1:, 1:] = hyp.tangents

    induced = basis @ g_st @ basis.T
    induced = 0.5 * (induced + induced.T)
    cond = np.linalg.cond(induced)
    if not np.isfinite(cond) or cond > 1e12:
        raise CanonicalConfigError(f"degenerate induced track metric at x={x}, t={t}")
    induced_inv = np.linalg.inv(induced)

    # normal: g-orthogonal complement of the basis, oriented toward the
    # lifted slice normal (positive inner product against (0, nu))
    _, _, vh = np.linalg.svd(basis @ g_st)
    nu = vh[-1]
    nu = nu / math.sqrt(float(nu @ g_st @ nu))
    lifted = np.concatenate(([0.0], hyp.normal))
    if float(nu @ g_st @ lifted) < 0.0:
        nu = -nu

    # second derivatives of the parametrization Phi(u) = (u0, F(x, u0))
    ddPhi = np.zeros((n + 1, n + 1, dim))
    ddPhi[0, 0, 1:] = np.asarray(mcf.dtdt(x, t), dtype=float)
    dxdt = np.asarray(mcf.dxdt(x, t), dtype=float)
    ddPhi[0, 1:, 1:] = dxdt
    ddPhi[1:, 0, 1:] = dxdt
    ddPhi[1:, 1:, 1:] = np.asarray(mcf.dxdx(x, t), dtype=float)

    gamma = christoffel(cm.field, z).gamma
    cov = ddPhi + np.einsum("cab,ia,jb->ijc", gamma, basis, basis)
    h = -np.einsum("ijc,cd,d->ij", cov, g_st, nu)
    h = 0.5 * (h + h.T)
    H_track = float(np.einsum("ij,ij->", induced_inv, h))

    return TrackPointData(
        x=np.asarray(x, dtype=float),
        t=t,
        z=z,
        basis=basis,
        induced=induced,
        induced_inv=induced_inv,
        normal=nu,
        sigma_N=_sigma_N(cm.variant, t, hyp.mean_curvature, float(g_st[0, 0])),
        second_ff=h,
        mean_curvature=H_track,
        hyp=hyp,
    )


def mcf_canonical_residual(track: SpaceTimeTrack, x: np.ndarray, t: float) -> TrackResidualSample:
    """Soliton defect of the track: H^S minus/plus the normal potential derivative.

    Entirely engine-evaluated: H^S from the kernel second fundamental
    form, nu^S f as the directional derivative of the canonical potential
    along the kernel normal.
    """
    cm = track.cm
    data = track_point_data(track, x, t)
    nu_f = float(data.normal @ scalar_d1(cm.potential, data.z))
    if cm.variant == "expanding":
        value = data.mean_curvature - nu_f
    else:
        value = data.mean_curvature + nu_f
    return TrackResidualSample(
        x=np.asarray(x, dtype=float),
        t=float(t),
        N=cm.N,
        value=value,
        norm=abs(value),
        scaled_norm=cm.N * abs(value),
    )


def closed_form_normal_potential(track: SpaceTimeTrack, x: np.ndarray, t: float) -> float:
    """Reference closed form of nu^S f (per variant), for cross-checking."""
    cm = track.cm
    data = track_point_data(track, x, t)
    H = data.hyp.mean_curvature
    w = float(cm.field.at(data.z)[0, 0])
    s = data.sigma_N
    if cm.variant == "expanding":
        return cm.N * H / (2.0 * t**3 * w * s)
    if cm.variant == "shrinking":
        return -cm.N * H / (2.0 * t**3 * w * s)
    return -cm.N * H / (w * s)


def limit_inverse_metric(track: SpaceTimeTrack, x: np.ndarray, t: float) -> SymTensor2:
    """Degenerate large-N limit of the inverse induced metric.

    Spatial block t g^{ij} (expanding), tau g^{ij} (shrinking) or g^{ij}
    (steady); the time row and column vanish in the limit, the finite-N
    time-time entry being t / (H^2 + t w) and its analogues.
    """
    t = track.check_time(t)
    hyp = hypersurface_point_data(track.mcf, x, t)
    n = track.n
    out = np.zeros((n + 1, n + 1))
    scale = 1.0 if track.cm.variant == "steady" else t
    out[1:, 1:] = scale * hyp.induced_inv
    return SymTensor2(out, "contravariant")


# ---------------------------------------------------------------------------
# closed-form second fundamental form
# ---------------------------------------------------------------------------

SECOND_FF_CORRECTIONS = (
    FormCorrection(
        "expanding", "h^S_ij",
        "h_ij + (H/(t w)) (Ric(T_i, T_j) + g_ij/(2t))",
        "h_ij - (H/(t w)) (Ric(T_i, T_j) + g_ij/(2t))",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "expanding", "h^S_i0",
        "d_i H + Ric(T_i, nu) - (H/(2 t w)) T_i(R)",
        "d_i H + Ric(T_i, nu) - (H/(t w)) (T_i(R)/2 - H Ric(T_i, nu))",
        visible_on_catalog=False,
    ),
    FormCorrection(
        "expanding", "h^S_00",
        "... + (H/(t w)) (H^2/(2t) + H^2 Ric(nu,nu) - H^2 nu(R) - R/t - R'/2 + n/(4t^2))",
        "... - (H/(t w)) (H^2/(2t) + H^2 Ric(nu,nu) - nu(R) + R/t + R'/2 + (n+1)/(4t^2))",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "shrinking", "h^S_ij",
        "h_ij + (H/(tau w)) (-Ric(T_i, T_j) + g_ij/(2 tau))",
        "h_ij + (H/(tau w)) (Ric(T_i, T_j) - g_ij/(2 tau))",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "shrinking", "h^S_i0",
        "d_i H - Ric(T_i, nu) - (H/(2 tau w)) T_i(R)",
        "d_i H - Ric(T_i, nu) - (H/(tau w)) (T_i(R)/2 + H Ric(T_i, nu))",
        visible_on_catalog=False,
    ),
    FormCorrection(
        "shrinking", "h^S_00",
        "... + (H/(tau w)) (-H^2/(2 tau) + H^2 Ric(nu,nu) - H^2 nu(R) - R/tau - R'/2 + n/(4 tau^2))",
        "... - (H/(tau w)) (H^2/(2 tau) - H^2 Ric(nu,nu) - nu(R) + R/tau + R'/2 - (n+1)/(4 tau^2))",
        visible_on_catalog=True,
    ),
    FormCorrection(
        "steady", "h^S_i0",
        "d_i H - Ric(T_i, nu) + (H/2) d_i R/(N+R) + (H^2/(N+R)) Ric(T_i, nu)",
        "d_i H - Ric(T_i, nu) - (H/(N+R)) (T_i(R)/2 + H Ric(T_i, nu))",
        visible_on_catalog=False,
    ),
    FormCorrection(
        "steady", "h^S_00",
        "... + (H^2/2) nu(R)/(N+R) - H^3 Ric(nu,nu)/(N+R)",
        "... + (H^2/(N+R)) nu(R) + H^3 Ric(nu,nu)/(N+R)",
        visible_on_catalog=False,
    ),
    FormCorrection(
        "steady", "leading prefactor",
        "1/(tau sigma_N)",
        "1/sigma_N",
        visible_on_catalog=True,
    ),
)

TRACK_FORM_NOTES = (
    "The reference defining formula for h^S omits the ambient covariant "
    "derivative of the tangent basis; the engine uses "
    "h^S(U, V) = g(D_U nu^S, V).",
    "The steady induced metric's time-time entry is garbled in the "
    "reference (H^2 + w intended) and its inverse carries a stray tau; "
    "the engine values are used.",
    "The reference intermediate H^S ~ (t/sigma_N) H should read "
    "H/sigma_N; both limit to sqrt(t) H.",
)


def closed_form_second_ff(
    track: SpaceTimeTrack,
    x: np.ndarray,
    t: float,
    form: str = "full",
    as_printed: bool = False,
) -> SymTensor2:
    """Closed-form second fundamental form of the track at (x, t).

    ``form="full"`` evaluates the complete reference expression (finite-N
    corrections included), ``form="leading"`` the up-to-O(1/N) version.
    ``as_printed`` selects the literal reference text instead of the
    rederived one; the differences live in ``SECOND_FF_CORRECTIONS``.
    Chart index 0 is time, matching ``track_point_data``.
    """
    if form not in ("full", "leading"):
        raise ValueError(f"form must be 'full' or 'leading', got {form!r}")
    t = track.check_time(t)
    cm = track.cm
    bg = cm.base
    n = track.n

    hyp = hypersurface_point_data(track.mcf, x, t)
    pos = hyp.position
    T = hyp.tangents
    nu = hyp.normal
    H = hyp.mean_curvature
    h = hyp.second_ff
    g = hyp.induced
    dH = hyp.dx_mean_curvature
    dHdt = hyp.dt_mean_curvature

    ric = bg.ricci_at(pos, t)
    ric_TT = T @ ric @ T.T
    ric_Tnu = T @ ric @ nu
    ric_nunu = float(nu @ ric @ nu)
    R = bg.scalar_at(pos, t)
    dRdt = bg.dt_scalar_at(pos, t)
    dRdy = bg.dy_scalar_at(pos, t)
    T_R = T @ dRdy
    nu_R = float(nu @ dRdy)

    w = cm.time_time(pos, t)
    s = _sigma_N(cm.variant, t, H, w)
    m = bg.dim   # = n + 1

    out = np.zeros((n + 1, n + 1))

    if cm.variant == "expanding":
        pref = 1.0 / (t * s)
        spatial = h.copy()
        mixed = dH + ric_Tnu
        tt = dHdt + H / (2 * t) - H * ric_nunu + 0.5 * nu_R
        if form == "full":
            if as_printed:
                spatial = spatial + (H / (t * w)) * (ric_TT + g / (2 * t))
                mixed = mixed - (H / (2 * t * w)) * T_R
                tt = tt + (H / (t * w)) * (
                    H**2 / (2 * t) + H**2 * ric_nunu - H**2 * nu_R
                    - R / t - 0.5 * dRdt + n / (4 * t**2)
                )
            else:
                spatial = spatial - (H / (t * w)) * (ric_TT + g / (2 * t))
                mixed = mixed - (H / (t * w)) * (0.5 * T_R - H * ric_Tnu)
                tt = tt - (H / (t * w)) * (
                    R / t + 0.5 * dRdt + m / (4 * t**2) - nu_R
                    + H**2 * ric_nunu + H**2 / (2 * t)
                )
    elif cm.variant == "shrinking":
        pref = 1.0 / (t * s)
        spatial = h.copy()
        mixed = dH - ric_Tnu
        tt = dHdt + H / (2 * t) + H * ric_nunu + 0.5 * nu_R
        if form == "full":
            if as_printed:
                spatial = spatial + (H / (t * w)) * (-ric_TT + g / (2 * t))
                mixed = mixed - (H / (2 * t * w)) * T_R
                tt = tt + (H / (t * w)) * (
                    -H**2 / (2 * t) + H**2 * ric_nunu - H**2 * nu_R
                    - R / t - 0.5 * dRdt + n / (4 * t**2)
                )
            else:
                spatial = spatial + (H / (t * w)) * (ric_TT - g / (2 * t))
                mixed = mixed - (H / (t * w)) * (0.5 * T_R + H * ric_Tnu)
                tt = tt - (H / (t * w)) * (
                    R / t + 0.5 * dRdt - m / (4 * t**2) - nu_R
                    + H**2 / (2 * t) - H**2 * ric_nunu
                )
    else:  # steady
        pref = 1.0 / (t * s) if (form == "leading" and as_printed) else 1.0 / s
        NR = cm.N + R
        spatial = h.copy()
        mixed = dH - ric_Tnu
        tt = dHdt + H * ric_nunu + 0.5 * nu_R
        if form == "full":
            spatial = spatial + (H / NR) * ric_TT
            if as_printed:
                mixed = mixed + (0.5 * H / NR) * T_R + (H**2 / NR) * ric_Tnu
                tt = tt + (0.5 * H**2 / NR) * nu_R - 0.5 * H / NR * dRdt - H**3 / NR * ric_nunu
            else:
                mixed = mixed - (H / NR) * (0.5 * T_R + H * ric_Tnu)
                tt = tt - (H / NR) * (0.5 * dRdt - H * nu_R - H**2 * ric_nunu)

    out[1:, 1:] = spatial
    out[1:, 0] = mixed
    out[0, 1:] = mixed
    out[0, 0] = tt
    return SymTensor2.symmetrized(pref * out)
