"""Gas model, variable transforms, fluxes and eigen-matrices for the 2D Euler equations.

Array conventions used throughout the package:

* conservative state ``U``  : (..., 4) array ``[rho, rho*u, rho*v, rho*e]``
* primitive state    ``W``  : (..., 4) array ``[rho, u, v, p]``
* characteristic state ``V``: (..., 4) array, ``V = L @ U`` for a face-frozen ``L``

All functions broadcast over leading axes, so a single state is a plain
shape-(4,) array.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateShockError, InvalidStateError

RHO, MX, MY, EN = 0, 1, 2, 3  # conservative component indices
U_, V_, P_ = 1, 2, 3  # primitive component indices (rho shares index 0)


@dataclass(frozen=True)
class GasModel:
    """Calorically perfect gas, closed by p = (gamma-1) rho [e - (u^2+v^2)/2]."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise InvalidStateError(f"gamma must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class FaceFrame:
    """Unit face normal plus the derived tangent (-ny, nx) and face length."""

    nx: float
    ny: float
    length: float = 1.0

    def __post_init__(self):
        if abs(self.nx**2 + self.ny**2 - 1.0) > 1e-12:
            raise ValueError("face normal must be a unit vector")

    @property
    def lx(self) -> float:
        return -self.ny

    @property
    def ly(self) -> float:
        return self.nx


X_FACE = FaceFrame(1.0, 0.0)
Y_FACE = FaceFrame(0.0, 1.0)


def _describe_bad(mask, where):
    idx = np.argwhere(mask)
    head = ", ".join(str(tuple(i)) for i in idx[:4])
    more = "" if len(idx) <= 4 else f" (+{len(idx) - 4} more)"
    return f"{where} at cell(s) {head}{more}" if idx.size else where


def cons_to_prim(U, gas: GasModel, where: str = "state") -> np.ndarray:
    """Convert conservative to primitive variables, validating positivity."""
    U = np.asarray(U, dtype=float)
    rho = U[..., RHO]
    bad = ~(rho > 0.0)
    if np.any(bad):
        raise InvalidStateError(_describe_bad(bad, f"non-positive density in {where}"))
    W = np.empty_like(U)
    u = U[..., MX] / rho
    v = U[..., MY] / rho
    p = (gas.gamma - 1.0) * (U[..., EN] - 0.5 * rho * (u * u + v * v))
    bad = ~(p > 0.0)
    if np.any(bad):
        raise InvalidStateError(_describe_bad(bad, f"non-positive pressure in {where}"))
    W[..., RHO] = rho
    W[..., U_] = u
    W[..., V_] = v
    W[..., P_] = p
    return W


def prim_to_cons(W, gas: GasModel) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    rho, u, v, p = W[..., RHO], W[..., U_], W[..., V_], W[..., P_]
    U = np.empty_like(W)
    U[..., RHO] = rho
    U[..., MX] = rho * u
    U[..., MY] = rho * v
    U[..., EN] = p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return U


def sound_speed(W, gas: GasModel) -> np.ndarray:
    W = np.asarray(W, dtype=float)
    c2 = gas.gamma * W[..., P_] / W[..., RHO]
    if np.any(~(c2 > 0.0)):
        raise InvalidStateError("non-positive sound speed")
    return np.sqrt(c2)


def exact_flux_w(W, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Physical flux normal to the face, from a primitive state."""
    W = np.asarray(W, dtype=float)
    rho, u, v, p = W[..., RHO], W[..., U_], W[..., V_], W[..., P_]
    q = u * frame.nx + v * frame.ny
    en = p / (gas.gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    F = np.empty_like(W)
    F[..., 0] = rho * q
    F[..., 1] = rho * q * u + p * frame.nx
    F[..., 2] = rho * q * v + p * frame.ny
    F[..., 3] = (en + p) * q
    return F


def exact_flux(U, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    return exact_flux_w(cons_to_prim(U, gas), frame, gas)


def du_dw(W, gas: GasModel) -> np.ndarray:
    """Jacobian dU/dW of the conservative-from-primitive map, shape (..., 4, 4)."""
    W = np.asarray(W, dtype=float)
    rho, u, v = W[..., RHO], W[..., U_], W[..., V_]
    z = np.zeros_like(rho)
    one = np.ones_like(rho)
    rows = [
        [one, z, z, z],
        [u, rho, z, z],
        [v, z, rho, z],
        [0.5 * (u * u + v * v), rho * u, rho * v, one / (gas.gamma - 1.0)],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def dw_du(W, gas: GasModel) -> np.ndarray:
    """Closed-form inverse of :func:`du_dw`."""
    W = np.asarray(W, dtype=float)
    rho, u, v = W[..., RHO], W[..., U_], W[..., V_]
    g1 = gas.gamma - 1.0
    z = np.zeros_like(rho)
    one = np.ones_like(rho)
    rows = [
        [one, z, z, z],
        [-u / rho, one / rho, z, z],
        [-v / rho, z, one / rho, z],
        [0.5 * g1 * (u * u + v * v), -g1 * u, -g1 * v, g1 * one],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def left_eigen_matrix(W, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Left eigenvector matrix of the normal flux Jacobian, rows ordered
    (q-c, q, q+c, shear).  Acts on conservative perturbations: dV = L dU."""
    W = np.asarray(W, dtype=float)
    rho, u, v = W[..., RHO], W[..., U_], W[..., V_]
    c = sound_speed(W, gas)
    g1 = gas.gamma - 1.0
    nx, ny, lx, ly = frame.nx, frame.ny, frame.lx, frame.ly
    q = u * nx + v * ny
    ql = u * lx + v * ly
    v2 = u * u + v * v
    k = g1 / (c * c)
    rows = [
        [
            0.5 * (0.5 * k * v2 + q / c),
            -0.5 * (k * u + nx / c),
            -0.5 * (k * v + ny / c),
            0.5 * k * np.ones_like(rho),
        ],
        [1.0 - 0.5 * k * v2, k * u, k * v, -k * np.ones_like(rho)],
        [
            0.5 * (0.5 * k * v2 - q / c),
            -0.5 * (k * u - nx / c),
            -0.5 * (k * v - ny / c),
            0.5 * k * np.ones_like(rho),
        ],
        [-ql, lx * np.ones_like(rho), ly * np.ones_like(rho), np.zeros_like(rho)],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def right_eigen_matrix(W, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Exact inverse of :func:`left_eigen_matrix`; columns are the right
    eigenvectors in the same (q-c, q, q+c, shear) order."""
    W = np.asarray(W, dtype=float)
    rho, u, v = W[..., RHO], W[..., U_], W[..., V_]
    c = sound_speed(W, gas)
    nx, ny, lx, ly = frame.nx, frame.ny, frame.lx, frame.ly
    q = u * nx + v * ny
    ql = u * lx + v * ly
    v2 = u * u + v * v
    h = c * c / (gas.gamma - 1.0) + 0.5 * v2  # total specific enthalpy
    one = np.ones_like(rho)
    z = np.zeros_like(rho)
    cols = [
        [one, u - c * nx, v - c * ny, h - c * q],
        [one, u, v, 0.5 * v2],
        [one, u + c * nx, v + c * ny, h + c * q],
        [z, lx * one, ly * one, ql],
    ]
    R = np.stack([np.stack(col, axis=-1) for col in cols], axis=-1)
    if not np.all(np.isfinite(R)):
        raise InvalidStateError("degenerate eigen-matrix")
    return R


def characteristic_eigenvalues(W, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Eigenvalues (q-c, q, q+c, q) matching the row order of the eigen-matrices."""
    W = np.asarray(W, dtype=float)
    c = sound_speed(W, gas)
    q = W[..., U_] * frame.nx + W[..., V_] * frame.ny
    return np.stack([q - c, q, q + c, q], axis=-1)


def analytic_flux_jacobian(U, frame: FaceFrame, gas: GasModel) -> np.ndarray:
    """Closed-form dF/dU of the exact normal flux, shape (..., 4, 4)."""
    W = cons_to_prim(U, gas)
    rho, u, v, p = W[..., RHO], W[..., U_], W[..., V_], W[..., P_]
    nx, ny = frame.nx, frame.ny
    g1 = gas.gamma - 1.0
    q = u * nx + v * ny
    v2 = u * u + v * v
    phi = 0.5 * g1 * v2
    en = p / g1 + 0.5 * rho * v2
    h = (en + p) / rho
    z = np.zeros_like(rho)
    one = np.ones_like(rho)
    rows = [
        [z, nx * one, ny * one, z],
        [
            phi * nx - u * q,
            q + u * nx - g1 * u * nx,
            u * ny - g1 * v * nx,
            g1 * nx * one,
        ],
        [
            phi * ny - v * q,
            v * nx - g1 * u * ny,
            q + v * ny - g1 * v * ny,
            g1 * ny * one,
        ],
        [(phi - h) * q, h * nx - g1 * u * q, h * ny - g1 * v * q, gas.gamma * q],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def entropy(W, gas: GasModel) -> np.ndarray:
    """Specific entropy surrogate s = ln(p / rho^gamma)."""
    W = np.asarray(W, dtype=float)
    return np.log(W[..., P_]) - gas.gamma * np.log(W[..., RHO])


def entropy_increase(field, shock_column: int | None = None) -> float:
    """Relative entropy rise of the shock column, (s_M - s_L) / (s_R - s_L).

    ``field`` must carry the analytic upstream/downstream primitive states
    (as built by the shock-problem setup); the column state is the row
    average of the conservative states in the shock column.
    """
    col = field.shock_column if shock_column is None else shock_column
    if col is None:
        raise ValueError("field carries no shock column")
    gas = field.gas
    s_l = float(entropy(field.upstream, gas))
    s_r = float(entropy(field.downstream, gas))
    if abs(s_r - s_l) < 1e-14:
        raise DegenerateShockError("upstream and downstream entropies coincide")
    col_mean = field.interior()[col - 1].mean(axis=0)  # col is 1-based
    s_m = float(entropy(cons_to_prim(col_mean, gas), gas))
    return (s_m - s_l) / (s_r - s_l)
