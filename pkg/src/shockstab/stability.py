"""Assembly and spectral analysis of the linearized perturbation-evolution
matrix of the semi-discrete scheme around a steady base flow.

Each face contributes six 4x4 blocks: the flux Jacobians with respect to
the two reconstructed face states, combined with the frozen-weight
linearization coefficients of the reconstruction.  Blocks sit at offsets
-2..+3 (along the face normal) from the face's left cell; scattering them
into the two adjacent cell rows with the face-length/volume factor yields
rows with up to 13 blocks at fifth order and 5 at first order.

Variable spaces:

* conservative   - perturbation vector is dU, blocks used as is
* primitive      - perturbation vector is dW; Jacobians are chained with
                   dU/dW at the face states and every row is premultiplied
                   by (dU/dW)^-1 at the cell mean
* characteristic - perturbation vector is dU; reconstruction runs on the
                   face-projected characteristic variables, so Jacobians are
                   chained with the right eigen-matrix and every block is
                   post-multiplied by the face's left eigen-matrix
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import euler, marching, reconstruction, riemann
from .errors import DifferentiationError, UnsteadyFieldError
from .euler import GasModel, X_FACE, Y_FACE
from .fields import MeanField, NG, apply_boundaries, shock_face_masks
from .reconstruction import FaceRecon
from .riemann import SmoothingConfig
from .scheme import Scheme


@dataclass
class StabilityMatrix:
    data: np.ndarray  # dense (4N, 4N)
    blocks: dict  # (row_cell, col_cell) -> 4x4 block, exact zeros pruned
    nx: int
    ny: int
    space: str
    h: float
    W_mean: np.ndarray  # interior primitive states (nx, ny, 4)
    gas: GasModel

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    def cell_index(self, i: int, j: int) -> int:
        return i * self.ny + j

    def block_count(self, i: int, j: int) -> int:
        row = self.cell_index(i, j)
        return sum(1 for (r, _) in self.blocks if r == row)

    def coordinate_text(self) -> str:
        """Nonzero entries as 'row col value' triplets (0-based)."""
        lines = []
        for (r, c), blk in sorted(self.blocks.items()):
            for a in range(4):
                for b in range(4):
                    if blk[a, b] != 0.0:
                        lines.append(f"{4 * r + a} {4 * c + b} {blk[a, b]:.17g}")
        return "\n".join(lines) + "\n"


@dataclass
class Spectrum:
    eigenvalues: np.ndarray  # complex (4N,)
    max_real: float
    dominant: complex
    eigvec_grid: np.ndarray  # complex (nx, ny, 4), native perturbation space
    eigvec_primitive: np.ndarray  # complex (nx, ny, 4)
    space: str


def _fd_jacobians_U(solver, UL, UR, frame, gas, sm, step=1e-7, label="face"):
    """Central-difference d(flux)/dU^L and d(flux)/dU^R at the face states.

    Probes act on the conservative components; derivatives against other
    variable spaces are obtained by chaining with the analytic transforms.
    """

    def flux_of(ULp, URp):
        WLp = euler.cons_to_prim(ULp, gas, f"{label} probe L")
        WRp = euler.cons_to_prim(URp, gas, f"{label} probe R")
        return riemann.compute_flux(solver, WLp, WRp, frame, gas, sm)

    AL = np.empty(UL.shape + (4,))
    AR = np.empty(UR.shape + (4,))
    for k in range(4):
        for side, U_probe, out in (("L", UL, AL), ("R", UR, AR)):
            hk = np.maximum(step, step * np.abs(U_probe[..., k]))
            e = np.zeros_like(U_probe)
            e[..., k] = hk
            if side == "L":
                fp = flux_of(U_probe + e, UR)
                fm = flux_of(U_probe - e, UR)
            else:
                fp = flux_of(UL, U_probe + e)
                fm = flux_of(UL, U_probe - e)
            out[..., :, k] = (fp - fm) / (2.0 * hk[..., None])
    if not (np.all(np.isfinite(AL)) and np.all(np.isfinite(AR))):
        bad = np.argwhere(
            ~np.all(np.isfinite(AL), axis=(-2, -1)) | ~np.all(np.isfinite(AR), axis=(-2, -1))
        )
        raise DifferentiationError(f"non-finite flux Jacobian at {label} {bad[:4].tolist()}")
    return AL, AR


def flux_jacobians(solver, WL, WR, frame, gas, sm: SmoothingConfig | None = None,
                   step: float = 1e-7):
    """dF/dU^L and dF/dU^R of a numerical flux at the given primitive pair."""
    UL = euler.prim_to_cons(np.asarray(WL, dtype=float), gas)
    UR = euler.prim_to_cons(np.asarray(WR, dtype=float), gas)
    return _fd_jacobians_U(solver, UL, UR, frame, gas, sm, step=step)


def face_blocks(recon: FaceRecon, AL_U, AR_U, gas: GasModel) -> np.ndarray:
    """Six coefficient blocks per face at offsets -2..+3 from the left cell.

    The -2 and +3 entries are the alpha pair, -1/+2 the beta pair and the
    0/+1 entries the chi pair of the frozen-weight flux linearization.
    """
    if recon.space == "conservative":
        AL, AR = AL_U, AR_U
    elif recon.space == "primitive":
        AL = AL_U @ euler.du_dw(recon.WL, gas)
        AR = AR_U @ euler.du_dw(recon.WR, gas)
    else:
        AL = AL_U @ recon.Rmat
        AR = AR_U @ recon.Rmat

    shp = recon.lin_L.shape[:-2]
    cl6 = np.zeros(shp + (6, 4))
    cr6 = np.zeros(shp + (6, 4))
    cl6[..., :5, :] = recon.lin_L  # offsets -2..2
    cr6[..., 1:, :] = recon.lin_R  # offsets -1..3
    blocks = (
        AL[..., None, :, :] * cl6[..., :, None, :]
        + AR[..., None, :, :] * cr6[..., :, None, :]
    )
    if recon.space == "characteristic":
        blocks = np.einsum("...oab,...bc->...oac", blocks, recon.Lmat)
    return blocks


def _direction_face_blocks(field: MeanField, axis: str, scheme: Scheme, cap_masks):
    solver, _ = scheme.per_direction(axis)
    cfg = scheme.recon_config(axis)
    cap_cfg = scheme.cap_config(axis)
    if axis == "x":
        winL, winR = reconstruction.x_face_windows(field.U, field.nx, field.ny)
        frame = X_FACE
    else:
        winL, winR = reconstruction.y_face_windows(field.U, field.nx, field.ny)
        frame = Y_FACE
    cap_mask = cap_masks.get(axis) if cap_cfg is not None else None
    recon = reconstruction.reconstruct_pair(
        winL, winR, cfg, field.gas, frame, cap_cfg=cap_cfg, cap_mask=cap_mask
    )
    UL = euler.prim_to_cons(recon.WL, field.gas)
    UR = euler.prim_to_cons(recon.WR, field.gas)
    AL_U, AR_U = _fd_jacobians_U(
        solver, UL, UR, frame, field.gas, scheme.smoothing(), label=f"{axis}-face"
    )
    return face_blocks(recon, AL_U, AR_U, field.gas), recon


def assemble(field: MeanField, scheme: Scheme, check_steady: bool = True,
             steady_tol: float = 1e-8) -> StabilityMatrix:
    """Build the stability matrix of the scheme around a steady mean field."""
    apply_boundaries(field)
    if check_steady:
        res = float(np.abs(marching.rhs(field, scheme)[..., 0]).max())
        if res > steady_tol:
            raise UnsteadyFieldError(
                f"mean field density residual {res:.3e} exceeds {steady_tol:.1e}; "
                "converge the base flow first"
            )
    nx, ny = field.nx, field.ny
    gas = field.gas
    sigma = 1.0 / field.h
    space = scheme.space

    Wint = field.interior_primitive()
    M_row = euler.dw_du(Wint, gas) if space == "primitive" else None

    T_out = None
    if not field.bc.periodic_x:
        if space == "primitive":
            T_out = np.zeros((ny, 4, 4))
            T_out[:, 0, 0] = T_out[:, 1, 1] = T_out[:, 2, 2] = 1.0
        else:
            W_last = Wint[nx - 1]
            T_out = np.zeros((ny, 4, 4))
            T_out[:, 0, 0] = T_out[:, 1, 1] = T_out[:, 2, 2] = 1.0
            T_out[:, 3, 0] = -0.5 * (W_last[:, 1] ** 2 + W_last[:, 2] ** 2)
            T_out[:, 3, 1] = W_last[:, 1]
            T_out[:, 3, 2] = W_last[:, 2]

    cap_masks = {}
    if scheme.cap != "none":
        mx, my = shock_face_masks(field)
        cap_masks = {"x": mx, "y": my}

    acc: dict[tuple[int, int], np.ndarray] = {}

    def add(row_cell, col_cell, mat):
        if (row_cell, col_cell) in acc:
            acc[row_cell, col_cell] += mat
        else:
            acc[row_cell, col_cell] = mat.copy()

    def cell(i, j):
        return i * ny + j

    def resolve_x(xp, j):
        """Padded x-index -> (interior column, ghost sensitivity) or None."""
        if NG <= xp < NG + nx:
            return xp - NG, None
        if field.bc.periodic_x:
            return (xp - NG) % nx, None
        if xp < NG:
            return None  # inflow ghosts carry no perturbation
        return nx - 1, T_out[j]

    # x-oriented faces
    blocks_x, _ = _direction_face_blocks(field, "x", scheme, cap_masks)
    k_faces = range(nx) if field.bc.periodic_x else range(nx + 1)
    for k in k_faces:
        for j in range(ny):
            rows = []
            if field.bc.periodic_x:
                rows = [(cell((k - 1) % nx, j), (k - 1) % nx, -sigma),
                        (cell(k % nx, j), k % nx, +sigma)]
            else:
                if k >= 1:
                    rows.append((cell(k - 1, j), k - 1, -sigma))
                if k <= nx - 1:
                    rows.append((cell(k, j), k, +sigma))
            for o in range(6):
                B = blocks_x[k, j, o]
                if not B.any():
                    continue
                col = resolve_x(k + o, j)
                if col is None:
                    continue
                icol, T = col
                mat = B if T is None else B @ T
                for row_cell, irow, sgn in rows:
                    m = mat if M_row is None else M_row[irow, j] @ mat
                    add(row_cell, cell(icol, j), sgn * m)

    # y-oriented faces (always periodic); a single-row field cancels exactly
    if ny > 1:
        blocks_y, _ = _direction_face_blocks(field, "y", scheme, cap_masks)
        for i in range(nx):
            for l in range(ny):
                rows = [(cell(i, (l - 1) % ny), (l - 1) % ny, -sigma),
                        (cell(i, l % ny), l % ny, +sigma)]
                for o in range(6):
                    B = blocks_y[i, l, o]
                    if not B.any():
                        continue
                    # padded y-index l+o maps to interior row (l+o-NG) mod ny
                    jcol = (l + o - NG) % ny
                    mat = B
                    for row_cell, jrow, sgn in rows:
                        m = mat if M_row is None else M_row[i, jrow] @ mat
                        add(row_cell, cell(i, jcol), sgn * m)

    blocks = {k: v for k, v in acc.items() if v.any()}
    n = 4 * nx * ny
    data = np.zeros((n, n))
    for (r, c), blk in blocks.items():
        data[4 * r : 4 * r + 4, 4 * c : 4 * c + 4] += blk
    return StabilityMatrix(
        data=data, blocks=blocks, nx=nx, ny=ny, space=space, h=field.h,
        W_mean=Wint, gas=gas,
    )


def eigensolve(S: StabilityMatrix) -> Spectrum:
    """Full dense spectrum plus the grid-mapped most-unstable eigenvector."""
    vals, vecs = scipy.linalg.eig(S.data)
    k = int(np.argmax(vals.real))
    vec = vecs[:, k]
    pivot = int(np.argmax(np.abs(vec)))
    vec = vec / vec[pivot]  # deterministic phase and scale
    grid = vec.reshape(S.nx, S.ny, 4)
    if S.space == "primitive":
        prim = grid.copy()
    else:
        M = euler.dw_du(S.W_mean, S.gas)
        prim = np.einsum("ijab,ijb->ija", M, grid)
    return Spectrum(
        eigenvalues=vals,
        max_real=float(vals.real.max()),
        dominant=complex(vals[k]),
        eigvec_grid=grid,
        eigvec_primitive=prim,
        space=S.space,
    )


def localize(spectrum: Spectrum):
    """Per-column peak amplitude of the unstable mode (primitive variables).

    Returns (profile of length nx, 1-based argmax column).
    """
    amp = np.abs(spectrum.eigvec_primitive)
    profile = amp.max(axis=(1, 2))
    return profile, int(np.argmax(profile)) + 1


def spectrum_table(spectrum: Spectrum) -> str:
    """CSV text of the eigenvalues, sorted by descending real part."""
    order = np.lexsort((-spectrum.eigenvalues.imag, -spectrum.eigenvalues.real))
    lines = ["re,im"]
    for lam in spectrum.eigenvalues[order]:
        lines.append(f"{lam.real:.17g},{lam.imag:.17g}")
    return "\n".join(lines) + "\n"


def eigenvector_table(spectrum: Spectrum) -> str:
    """Columnar eigenvector field: i j rho u v p (real part, phase-fixed)."""
    lines = ["i j rho u v p"]
    nx, ny = spectrum.eigvec_primitive.shape[:2]
    for i in range(nx):
        for j in range(ny):
            vals = " ".join(f"{x.real:.17g}" for x in spectrum.eigvec_primitive[i, j])
            lines.append(f"{i + 1} {j + 1} {vals}")
    return "\n".join(lines) + "\n"
