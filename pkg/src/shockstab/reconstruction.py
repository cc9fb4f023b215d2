"""Face-state reconstruction: first order, MUSCL/van Albada, WENO5 (JS/Z), ENO3.

A face between cells i and i+1 owns two reconstructed states.  The left state
uses the window (i-2 .. i+2), the right state the window (i-1 .. i+3); the
right state is the mirror image of the left one.  Windows are always passed
as five consecutive cell states of shape (..., 5, 4) even for the compact
schemes, which only read the middle slots.

Besides face values, every reconstruction exposes the coefficients of its
linearization with frozen nonlinear weights: the left state contributes
``lin_L[..., m, :]`` on the cell at offset m-2 from the face's left cell, the
right state ``lin_R[..., m, :]`` on the cell at offset m-1.  The stability
matrix is assembled from exactly these coefficients.
"""

from dataclasses import dataclass

import numpy as np

from . import euler
from .euler import FaceFrame, GasModel

LINEAR_WEIGHTS = np.array([0.1, 0.6, 0.3])
L_OFFSETS = (-2, -1, 0, 1, 2)  # lin_L slot -> cell offset from the face's left cell
R_OFFSETS = (-1, 0, 1, 2, 3)

VALID_KINDS = ("first", "muscl", "weno5", "eno3")
VALID_SPACES = ("conservative", "primitive", "characteristic")

_ORDER_TO_KIND = {1: "first", 2: "muscl", 5: "weno5"}
_CAP_TO_KIND = {"first": "first", "second": "muscl", "smoothest-third": "eno3"}


@dataclass(frozen=True)
class ReconConfig:
    kind: str = "weno5"
    weno_variant: str = "z"  # js | z
    space: str = "primitive"
    eps: float = 1e-15
    char_average: str = "arithmetic"  # arithmetic | roe
    force_linear_weights: bool = False

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown reconstruction kind {self.kind!r}")
        if self.space not in VALID_SPACES:
            raise ValueError(f"unknown variable space {self.space!r}")
        if self.weno_variant not in ("js", "z"):
            raise ValueError(f"unknown weno variant {self.weno_variant!r}")
        if not self.eps > 0:
            raise ValueError("weno epsilon must be positive")

    @property
    def order(self) -> int:
        return {"first": 1, "muscl": 2, "weno5": 5, "eno3": 3}[self.kind]


def config_for_order(order: int, **kw) -> ReconConfig:
    return ReconConfig(kind=_ORDER_TO_KIND[order], **kw)


def config_for_cap(cap: str, base: ReconConfig) -> ReconConfig:
    return ReconConfig(
        kind=_CAP_TO_KIND[cap],
        weno_variant=base.weno_variant,
        space=base.space,
        eps=base.eps,
        char_average=base.char_average,
        force_linear_weights=base.force_linear_weights,
    )


def _with_comp_axis(w):
    """Scalar windows (shape (..., 5)) get a trailing singleton component axis."""
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        return w[:, None], True
    return w, False


def smoothness_indicators(w) -> np.ndarray:
    """The three quadratic smoothness measures of a 5-point window.

    ``w`` has the window on axis -2 (or is a plain 5-vector); returns betas
    stacked on the corresponding axis, shape (..., 3, comps) or (3,).
    """
    w, scalar = _with_comp_axis(w)
    w0, w1, w2, w3, w4 = (w[..., m, :] for m in range(5))
    beta = np.empty(w.shape[:-2] + (3,) + w.shape[-1:])
    beta[..., 0, :] = 13.0 / 12.0 * (w0 - 2 * w1 + w2) ** 2 + 0.25 * (w0 - 4 * w1 + 3 * w2) ** 2
    beta[..., 1, :] = 13.0 / 12.0 * (w1 - 2 * w2 + w3) ** 2 + 0.25 * (w1 - w3) ** 2
    beta[..., 2, :] = 13.0 / 12.0 * (w2 - 2 * w3 + w4) ** 2 + 0.25 * (3 * w2 - 4 * w3 + w4) ** 2
    return beta[:, 0] if scalar else beta


def weights_js(beta, eps: float = 1e-15) -> np.ndarray:
    """Classic nonlinear weights alpha_m = d_m / (beta_m + eps)^2, normalized.

    The substencil index sits on axis -2 for batched input, axis 0 for a
    plain 3-vector.
    """
    beta = np.asarray(beta, dtype=float)
    batched = beta.ndim >= 2
    d = LINEAR_WEIGHTS[:, None] if batched else LINEAR_WEIGHTS
    alpha = d / (beta + eps) ** 2
    return alpha / alpha.sum(axis=-2 if batched else 0, keepdims=True)


def weights_z(beta, eps: float = 1e-15) -> np.ndarray:
    """WENO-Z weights alpha_m = d_m (1 + tau5/(beta_m + eps)), tau5 = |b0 - b2|."""
    beta = np.asarray(beta, dtype=float)
    batched = beta.ndim >= 2
    if batched:
        tau5 = np.abs(beta[..., 0, :] - beta[..., 2, :])[..., None, :]
        d = LINEAR_WEIGHTS[:, None]
    else:
        tau5 = np.abs(beta[0] - beta[2])
        d = LINEAR_WEIGHTS
    alpha = d * (1.0 + tau5 / (beta + eps))
    return alpha / alpha.sum(axis=-2 if batched else 0, keepdims=True)


def weno5_candidates(w) -> np.ndarray:
    """Left-state values of the three substencil polynomials, axis -2."""
    w, scalar = _with_comp_axis(w)
    w0, w1, w2, w3, w4 = (w[..., m, :] for m in range(5))
    cand = np.empty(w.shape[:-2] + (3,) + w.shape[-1:])
    cand[..., 0, :] = (2 * w0 - 7 * w1 + 11 * w2) / 6.0
    cand[..., 1, :] = (-w1 + 5 * w2 + 2 * w3) / 6.0
    cand[..., 2, :] = (2 * w2 + 5 * w3 - w4) / 6.0
    return cand[:, 0] if scalar else cand


def _weno_lin_coeffs(om) -> np.ndarray:
    """Window coefficients of the frozen-weight left state, shape (..., 5, c)."""
    om0, om1, om2 = om[..., 0, :], om[..., 1, :], om[..., 2, :]
    lin = np.empty(om.shape[:-2] + (5,) + om.shape[-1:])
    lin[..., 0, :] = om0 / 3.0
    lin[..., 1, :] = -(7.0 * om0 + om1) / 6.0
    lin[..., 2, :] = (11.0 * om0 + 5.0 * om1 + 2.0 * om2) / 6.0
    lin[..., 3, :] = (2.0 * om1 + 5.0 * om2) / 6.0
    lin[..., 4, :] = -om2 / 6.0
    return lin


def van_albada(r) -> np.ndarray:
    return (r * r + r) / (r * r + 1.0)


def _muscl_left(win):
    """MUSCL/van Albada left state on the middle three window slots.

    The limited slope phi(r)*dm with r = dp/dm is evaluated in the symmetric
    form c*(dp + dm), c = dp*dm/(dp^2 + dm^2); the guard makes c approach
    the smooth-data value 1/2 on uniform windows, which is also the frozen
    coefficient the stability linearization uses.
    """
    dm = win[..., 2, :] - win[..., 1, :]
    dp = win[..., 3, :] - win[..., 2, :]
    eta = (1e-12 * (1.0 + np.abs(win[..., 2, :]))) ** 2
    c = (dp * dm + eta) / (dp * dp + dm * dm + 2.0 * eta)
    value = win[..., 2, :] + 0.5 * c * (dp + dm)
    lin = np.zeros(win.shape)
    lin[..., 1, :] = -0.5 * c
    lin[..., 2, :] = 1.0
    lin[..., 3, :] = 0.5 * c
    return value, lin


def _left_state(win, cfg: ReconConfig):
    """Reconstructed left state, linearization coefficients, weights (or None)."""
    win = np.asarray(win, dtype=float)
    if cfg.kind == "first":
        lin = np.zeros(win.shape)
        lin[..., 2, :] = 1.0
        return win[..., 2, :].copy(), lin, None
    if cfg.kind == "muscl":
        value, lin = _muscl_left(win)
        return value, lin, None
    beta = smoothness_indicators(win)
    if cfg.force_linear_weights:
        om = np.broadcast_to(LINEAR_WEIGHTS[:, None], beta.shape).copy()
    elif cfg.kind == "eno3":
        # single smoothest substencil per component
        om = np.zeros_like(beta)
        pick = np.argmin(beta, axis=-2)
        np.put_along_axis(om, pick[..., None, :], 1.0, axis=-2)
    elif cfg.weno_variant == "js":
        om = weights_js(beta, cfg.eps)
    else:
        om = weights_z(beta, cfg.eps)
    value = (om * weno5_candidates(win)).sum(axis=-2)
    return value, _weno_lin_coeffs(om), om


def first_order_left_state(win) -> np.ndarray:
    win, scalar = _with_comp_axis(win)
    value = win[..., 2, :].copy()
    return value[0] if scalar else value


def muscl_left_state(win3) -> np.ndarray:
    """Left state from a plain 3-window (cells i-1, i, i+1)."""
    win3 = np.asarray(win3, dtype=float)
    scalar = win3.ndim == 1
    if scalar:
        win3 = win3[:, None]
    pad = np.zeros(win3.shape[:-2] + (5,) + win3.shape[-1:])
    pad[..., 1:4, :] = win3
    value = _muscl_left(pad)[0]
    return value[0] if scalar else value


def weno5_left_state(win, cfg: ReconConfig | None = None):
    """Left state of a 5-window plus the nonlinear weights used."""
    cfg = cfg or ReconConfig()
    win, scalar = _with_comp_axis(win)
    value, _, om = _left_state(win, cfg)
    if scalar:
        return value[0], om[:, 0]
    return value, om


def weno5_right_state(win, cfg: ReconConfig | None = None):
    """Right state at the face left of the window's center cell (mirror)."""
    cfg = cfg or ReconConfig()
    win, scalar = _with_comp_axis(win)
    value, _, om = _left_state(win[..., ::-1, :], cfg)
    if scalar:
        return value[0], om[:, 0]
    return value, om


def _roe_average_primitive(WL, WR, gas: GasModel):
    sl = np.sqrt(WL[..., 0])
    sr = np.sqrt(WR[..., 0])
    w = sl / (sl + sr)
    u = w * WL[..., 1] + (1 - w) * WR[..., 1]
    v = w * WL[..., 2] + (1 - w) * WR[..., 2]
    g1 = gas.gamma - 1.0
    cl2 = gas.gamma * WL[..., 3] / WL[..., 0]
    cr2 = gas.gamma * WR[..., 3] / WR[..., 0]
    hl = cl2 / g1 + 0.5 * (WL[..., 1] ** 2 + WL[..., 2] ** 2)
    hr = cr2 / g1 + 0.5 * (WR[..., 1] ** 2 + WR[..., 2] ** 2)
    h = w * hl + (1 - w) * hr
    c2 = g1 * (h - 0.5 * (u * u + v * v))
    rho = sl * sr
    return np.stack([rho, u, v, rho * c2 / gas.gamma], axis=-1)


def _prim_soft(U, gas: GasModel):
    """Primitive conversion without raising; returns (W, valid mask)."""
    rho = U[..., 0]
    safe = np.where(rho > 0.0, rho, 1.0)
    u = U[..., 1] / safe
    v = U[..., 2] / safe
    p = (gas.gamma - 1.0) * (U[..., 3] - 0.5 * safe * (u * u + v * v))
    W = np.stack([rho, u, v, p], axis=-1)
    valid = (rho > 0.0) & (p > 0.0) & np.all(np.isfinite(W), axis=-1)
    return W, valid


@dataclass
class FaceRecon:
    """Reconstructed pair at a batch of faces plus the frozen linearization.

    WL/WR are always primitive (ready for flux evaluation); XL/XR live in the
    configured reconstruction space and are the states the flux is
    differentiated against when assembling the stability matrix.
    """

    WL: np.ndarray
    WR: np.ndarray
    XL: np.ndarray
    XR: np.ndarray
    lin_L: np.ndarray
    lin_R: np.ndarray
    weights_L: np.ndarray | None
    weights_R: np.ndarray | None
    Lmat: np.ndarray | None
    Rmat: np.ndarray | None
    space: str
    fallback: np.ndarray


def reconstruct_pair(
    winL_U,
    winR_U,
    cfg: ReconConfig,
    gas: GasModel,
    frame: FaceFrame,
    cap_cfg: ReconConfig | None = None,
    cap_mask=None,
    XwinL=None,
    XwinR=None,
) -> FaceRecon:
    """Reconstruct both face states from conservative 5-windows.

    ``cap_mask`` selects faces whose order is capped (near-shock treatment);
    those faces are re-reconstructed with ``cap_cfg`` and spliced in.
    ``XwinL``/``XwinR`` optionally carry the same windows already converted
    to the reconstruction space (an optimization for whole-field sweeps).
    """
    winL_U = np.asarray(winL_U, dtype=float)
    winR_U = np.asarray(winR_U, dtype=float)
    recon = _reconstruct_pair_one(winL_U, winR_U, cfg, gas, frame, XwinL, XwinR)
    if cap_mask is not None and np.any(cap_mask):
        sub = _reconstruct_pair_one(
            winL_U[cap_mask], winR_U[cap_mask], cap_cfg, gas, frame,
            None if XwinL is None or cap_cfg.space != cfg.space else XwinL[cap_mask],
            None if XwinR is None or cap_cfg.space != cfg.space else XwinR[cap_mask],
        )
        for name in ("WL", "WR", "XL", "XR", "lin_L", "lin_R"):
            getattr(recon, name)[cap_mask] = getattr(sub, name)
        if recon.weights_L is not None:
            blank = np.full((3, winL_U.shape[-1]), np.nan)
            recon.weights_L[cap_mask] = sub.weights_L if sub.weights_L is not None else blank
            recon.weights_R[cap_mask] = sub.weights_R if sub.weights_R is not None else blank
        recon.fallback[cap_mask] = sub.fallback
    return recon


def _reconstruct_pair_one(winL_U, winR_U, cfg, gas, frame, XwinL=None, XwinR=None):
    Lmat = Rmat = None
    if XwinL is not None and cfg.space != "characteristic":
        pass
    elif cfg.space == "conservative":
        XwinL, XwinR = winL_U, winR_U
    elif cfg.space == "primitive":
        XwinL = euler.cons_to_prim(winL_U, gas, "reconstruction window")
        XwinR = euler.cons_to_prim(winR_U, gas, "reconstruction window")
    else:
        W_l = euler.cons_to_prim(winL_U[..., 2, :], gas, "face-left cell")
        W_r = euler.cons_to_prim(winR_U[..., 2, :], gas, "face-right cell")
        if cfg.char_average == "roe":
            W_eval = _roe_average_primitive(W_l, W_r, gas)
        else:
            W_eval = 0.5 * (W_l + W_r)
        Lmat = euler.left_eigen_matrix(W_eval, frame, gas)
        Rmat = euler.right_eigen_matrix(W_eval, frame, gas)
        XwinL = np.einsum("...ab,...wb->...wa", Lmat, winL_U)
        XwinR = np.einsum("...ab,...wb->...wa", Lmat, winR_U)

    XL, lin_L, om_L = _left_state(XwinL, cfg)
    XR, lin_Rm, om_R = _left_state(XwinR[..., ::-1, :], cfg)
    lin_R = lin_Rm[..., ::-1, :].copy()

    if cfg.space == "conservative":
        WL, okL = _prim_soft(XL, gas)
        WR, okR = _prim_soft(XR, gas)
    elif cfg.space == "primitive":
        WL, WR = XL, XR
        okL = (WL[..., 0] > 0) & (WL[..., 3] > 0) & np.all(np.isfinite(WL), axis=-1)
        okR = (WR[..., 0] > 0) & (WR[..., 3] > 0) & np.all(np.isfinite(WR), axis=-1)
    else:
        WL, okL = _prim_soft(np.einsum("...ab,...b->...a", Rmat, XL), gas)
        WR, okR = _prim_soft(np.einsum("...ab,...b->...a", Rmat, XR), gas)

    fallback = ~(okL & okR)
    if np.any(fallback):
        # drop to first order at the offending faces, in the same space
        sub = ReconConfig(kind="first", space=cfg.space, weno_variant=cfg.weno_variant,
                          eps=cfg.eps, char_average=cfg.char_average)
        XLf, linLf, _ = _left_state(XwinL[fallback], sub)
        XRm, linRm, _ = _left_state(XwinR[fallback][..., ::-1, :], sub)
        XL[fallback], lin_L[fallback] = XLf, linLf
        XR[fallback], lin_R[fallback] = XRm, linRm[..., ::-1, :]
        WL[fallback] = euler.cons_to_prim(winL_U[fallback][..., 2, :], gas, "fallback")
        WR[fallback] = euler.cons_to_prim(winR_U[fallback][..., 2, :], gas, "fallback")

    return FaceRecon(
        WL=WL, WR=WR, XL=XL, XR=XR,
        lin_L=lin_L, lin_R=lin_R,
        weights_L=om_L, weights_R=om_R,
        Lmat=Lmat, Rmat=Rmat,
        space=cfg.space, fallback=fallback,
    )


def x_face_windows(Upad: np.ndarray, nx: int, ny: int):
    """Windows for the nx+1 x-oriented face columns, shapes (nx+1, ny, 5, 4)."""
    sw = np.lib.stride_tricks.sliding_window_view(Upad, 5, axis=0)
    # sw[k] holds padded columns k..k+4; face k's left cell is padded column k+2
    winL = np.moveaxis(sw[: nx + 1, 3 : 3 + ny], -1, -2)
    winR = np.moveaxis(sw[1 : nx + 2, 3 : 3 + ny], -1, -2)
    return winL, winR


def y_face_windows(Upad: np.ndarray, nx: int, ny: int):
    """Windows for the ny+1 y-oriented face rows, shapes (nx, ny+1, 5, 4)."""
    sw = np.lib.stride_tricks.sliding_window_view(Upad, 5, axis=1)
    winL = np.moveaxis(sw[3 : 3 + nx, : ny + 1], -1, -2)
    winR = np.moveaxis(sw[3 : 3 + nx, 1 : ny + 2], -1, -2)
    return winL, winR


def reconstruct_face(field, face, cfg: ReconConfig, gas: GasModel) -> FaceRecon:
    """Reconstruct a single face; ``face`` is ('x'|'y', k, j) with 0-based
    face index k along the direction and row/column index j across it."""
    axis, k, j = face
    if axis == "x":
        winL, winR = x_face_windows(field.U, field.nx, field.ny)
        frame = euler.X_FACE
    else:
        winL, winR = y_face_windows(field.U, field.nx, field.ny)
        frame = euler.Y_FACE
    return reconstruct_pair(winL[k, j], winR[k, j], cfg, gas, frame)
