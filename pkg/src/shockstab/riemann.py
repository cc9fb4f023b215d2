"""Interface flux functions: Roe (with eigenvalue smoothing), HLL, HLLC,
van Leer flux-vector splitting, and the direction-hybrid selector.

All solvers take primitive left/right states of shape (..., 4), broadcast
over leading axes, and return the numerical flux normal to the face.
"""

from dataclasses import dataclass

import numpy as np

from . import euler
from .errors import DegenerateFanError, InvalidStateError
from .euler import FaceFrame, GasModel

SOLVER_KINDS = ("roe", "hll", "hllc", "van_leer", "hybrid-1", "hybrid-2")

# direction-hybrid schemes: (solver, order) per face family, where "normal"
# faces have their normal along the shock normal (x) and "transverse" faces
# along y
HYBRID_PARTS = {
    "hybrid-1": {"transverse": ("roe", 5), "normal": ("van_leer", 1)},
    "hybrid-2": {"transverse": ("van_leer", 1), "normal": ("roe", 5)},
}


@dataclass(frozen=True)
class SmoothingConfig:
    """Quadratic floor applied to |eigenvalue| inside the Roe dissipation."""

    delta0: float = 1e-4

    def __post_init__(self):
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")


def smooth_abs(lam, delta0: float) -> np.ndarray:
    """|lam| with the C1 floor (lam^2 + delta0^2) / (2 delta0) below delta0."""
    a = np.abs(lam)
    return np.where(a >= delta0, a, (lam * lam + delta0 * delta0) / (2.0 * delta0))


def _normal_velocity(W, frame):
    return W[..., 1] * frame.nx + W[..., 2] * frame.ny


def roe_flux(WL, WR, frame: FaceFrame, gas: GasModel,
             sm: SmoothingConfig = SmoothingConfig()) -> np.ndarray:
    """Roe flux with the wave-strength dissipation form; |eigenvalues| pass
    through the quadratic smoothing floor."""
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    FL = euler.exact_flux_w(WL, frame, gas)
    FR = euler.exact_flux_w(WR, frame, gas)

    sl = np.sqrt(WL[..., 0])
    sr = np.sqrt(WR[..., 0])
    wgt = sl / (sl + sr)
    u = wgt * WL[..., 1] + (1 - wgt) * WR[..., 1]
    v = wgt * WL[..., 2] + (1 - wgt) * WR[..., 2]
    g1 = gas.gamma - 1.0
    hL = gas.gamma * WL[..., 3] / (g1 * WL[..., 0]) + 0.5 * (WL[..., 1] ** 2 + WL[..., 2] ** 2)
    hR = gas.gamma * WR[..., 3] / (g1 * WR[..., 0]) + 0.5 * (WR[..., 1] ** 2 + WR[..., 2] ** 2)
    h = wgt * hL + (1 - wgt) * hR
    c2 = g1 * (h - 0.5 * (u * u + v * v))
    if np.any(~(c2 > 0.0)):
        raise InvalidStateError("Roe average breakdown: non-positive c^2")
    c = np.sqrt(c2)
    rho = sl * sr
    nx, ny, lx, ly = frame.nx, frame.ny, frame.lx, frame.ly
    q = u * nx + v * ny
    ql = u * lx + v * ly

    # primitive-difference wave strengths are exact for the Roe average
    d_rho = WR[..., 0] - WL[..., 0]
    d_u = WR[..., 1] - WL[..., 1]
    d_v = WR[..., 2] - WL[..., 2]
    d_p = WR[..., 3] - WL[..., 3]
    d_q = d_u * nx + d_v * ny
    d_ql = d_u * lx + d_v * ly
    a1 = (d_p - rho * c * d_q) / (2.0 * c2)
    a2 = d_rho - d_p / c2
    a3 = (d_p + rho * c * d_q) / (2.0 * c2)
    a4 = rho * d_ql

    l1 = smooth_abs(q - c, sm.delta0) * a1
    l2 = smooth_abs(q, sm.delta0) * a2
    l3 = smooth_abs(q + c, sm.delta0) * a3
    l4 = smooth_abs(q, sm.delta0) * a4

    diss = np.empty_like(FL)
    diss[..., 0] = l1 + l2 + l3
    diss[..., 1] = l1 * (u - c * nx) + l2 * u + l3 * (u + c * nx) + l4 * lx
    diss[..., 2] = l1 * (v - c * ny) + l2 * v + l3 * (v + c * ny) + l4 * ly
    diss[..., 3] = (
        l1 * (h - c * q) + l2 * 0.5 * (u * u + v * v) + l3 * (h + c * q) + l4 * ql
    )
    return 0.5 * (FL + FR) - 0.5 * diss


def davis_speeds(WL, WR, frame: FaceFrame, gas: GasModel):
    qL = _normal_velocity(WL, frame)
    qR = _normal_velocity(WR, frame)
    cL = euler.sound_speed(WL, gas)
    cR = euler.sound_speed(WR, gas)
    s_l = np.minimum(qL - cL, qR - cR)
    s_r = np.maximum(qL + cL, qR + cR)
    if np.any(s_r - s_l < 1e-12):
        raise DegenerateFanError("wave fan collapsed: S_R - S_L below 1e-12")
    return s_l, s_r


def hll_flux(WL, WR, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    s_l, s_r = davis_speeds(WL, WR, frame, gas)
    FL = euler.exact_flux_w(WL, frame, gas)
    FR = euler.exact_flux_w(WR, frame, gas)
    UL = euler.prim_to_cons(WL, gas)
    UR = euler.prim_to_cons(WR, gas)
    sl = s_l[..., None]
    sr = s_r[..., None]
    mid = (sr * FL - sl * FR + sl * sr * (UR - UL)) / (sr - sl)
    return np.where(sl >= 0.0, FL, np.where(sr <= 0.0, FR, mid))


def hllc_flux(WL, WR, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    s_l, s_r = davis_speeds(WL, WR, frame, gas)
    qL = _normal_velocity(WL, frame)
    qR = _normal_velocity(WR, frame)
    rhoL, pL = WL[..., 0], WL[..., 3]
    rhoR, pR = WR[..., 0], WR[..., 3]
    mL = rhoL * (s_l - qL)
    mR = rhoR * (s_r - qR)
    s_star = (pR - pL + qL * mL - qR * mR) / (mL - mR)

    FL = euler.exact_flux_w(WL, frame, gas)
    FR = euler.exact_flux_w(WR, frame, gas)
    UL = euler.prim_to_cons(WL, gas)
    UR = euler.prim_to_cons(WR, gas)

    def star_flux(W, U, F, s_k, q_k, m_k):
        rho, p = W[..., 0], W[..., 3]
        factor = m_k / (s_k - s_star)
        e = U[..., 3] / rho
        u_star = np.stack(
            [
                np.ones_like(rho),
                W[..., 1] + (s_star - q_k) * frame.nx,
                W[..., 2] + (s_star - q_k) * frame.ny,
                e + (s_star - q_k) * (s_star + p / m_k),
            ],
            axis=-1,
        )
        return F + s_k[..., None] * (factor[..., None] * u_star - U)

    FsL = star_flux(WL, UL, FL, s_l, qL, mL)
    FsR = star_flux(WR, UR, FR, s_r, qR, mR)
    sl = s_l[..., None]
    sr = s_r[..., None]
    ss = s_star[..., None]
    return np.where(
        sl >= 0.0, FL, np.where(sr <= 0.0, FR, np.where(ss >= 0.0, FsL, FsR))
    )


def van_leer_flux(WL, WR, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Flux-vector splitting with the standard Mach polynomials; the split
    is fully one-sided for |M| >= 1."""
    WL = np.asarray(WL, dtype=float)
    WR = np.asarray(WR, dtype=float)
    g = gas.gamma

    def split(W, sign):
        rho, u, v, p = W[..., 0], W[..., 1], W[..., 2], W[..., 3]
        c = euler.sound_speed(W, gas)
        q = u * frame.nx + v * frame.ny
        m = q / c
        fm = sign * 0.25 * rho * c * (m + sign) ** 2
        vel = (-q + sign * 2.0 * c) / g
        fu = fm * (u + frame.nx * vel)
        fv = fm * (v + frame.ny * vel)
        fe = fm * (
            ((g - 1.0) * q + sign * 2.0 * c) ** 2 / (2.0 * (g * g - 1.0))
            + 0.5 * (u * u + v * v - q * q)
        )
        sub = np.stack([fm, fu, fv, fe], axis=-1)
        full = euler.exact_flux_w(W, frame, gas)
        zero = np.zeros_like(sub)
        m_ = m[..., None]
        if sign > 0:
            return np.where(m_ >= 1.0, full, np.where(m_ <= -1.0, zero, sub))
        return np.where(m_ <= -1.0, full, np.where(m_ >= 1.0, zero, sub))

    return split(WL, +1.0) + split(WR, -1.0)


def solver_function(kind: str):
    try:
        return {
            "roe": roe_flux,
            "hll": hll_flux,
            "hllc": hllc_flux,
            "van_leer": van_leer_flux,
        }[kind]
    except KeyError:
        raise ValueError(f"unknown solver kind {kind!r}") from None


def compute_flux(kind: str, WL, WR, frame: FaceFrame, gas: GasModel,
                 sm: SmoothingConfig | None = None) -> np.ndarray:
    if kind == "roe":
        return roe_flux(WL, WR, frame, gas, sm or SmoothingConfig())
    return solver_function(kind)(WL, WR, frame, gas)


def hybrid_flux(kind: str, orientation: str, pairs_by_order, frame: FaceFrame,
                gas: GasModel, sm: SmoothingConfig | None = None) -> np.ndarray:
    """Dispatch a hybrid scheme on one face.

    ``orientation`` is 'normal' (face normal along the shock normal, i.e. an
    i+1/2 face) or 'transverse' (a j+1/2 face).  ``pairs_by_order`` maps the
    reconstruction order to its (WL, WR) pair at this face.
    """
    solver, order = HYBRID_PARTS[kind][orientation]
    WL, WR = pairs_by_order[order]
    return compute_flux(solver, WL, WR, frame, gas, sm)
