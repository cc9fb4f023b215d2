import numpy as np
import pytest

from shockstab import euler, fields, reconstruction as rc, riemann, shock_problem as sp, stability
from shockstab.errors import UnsteadyFieldError
from shockstab.euler import GasModel, X_FACE
from shockstab.fields import BoundarySpec, make_field
from shockstab.scheme import Scheme
from shockstab.stability import Spectrum, assemble, eigensolve, flux_jacobians, localize

from test_euler import random_states

GAS = GasModel(1.4)


def uniform_periodic_field(W, nx=6, ny=5, h=1.0):
    U = euler.prim_to_cons(np.asarray(W, dtype=float), GAS)
    interior = np.broadcast_to(U, (nx, ny, 4)).copy()
    return make_field(interior, h=h, gas=GAS, bc=BoundarySpec(periodic_x=True))


def initial_shock_field(**kw):
    cfg = sp.ShockProblemConfig(**kw)
    return sp.build_initial_field(cfg), cfg


# ---------------------------------------------------------------- jacobians


def test_flux_jacobians_van_leer_supersonic():
    WL = np.array([1.0, 3.0, 0.2, 1.0])
    WR = np.array([0.9, 3.4, -0.1, 1.1])
    AL, AR = flux_jacobians("van_leer", WL, WR, X_FACE, GAS)
    A_exact = euler.analytic_flux_jacobian(euler.prim_to_cons(WL, GAS), X_FACE, GAS)
    assert np.max(np.abs(AL - A_exact)) < 1e-5
    assert np.max(np.abs(AR)) < 1e-10


@pytest.mark.parametrize("solver", ["roe", "hll", "hllc", "van_leer"])
def test_flux_jacobians_consistency_identity(solver):
    rng = np.random.default_rng(40)
    for W in random_states(rng, 3, (0.0, 1.8)):
        AL, AR = flux_jacobians(solver, W, W, X_FACE, GAS)
        A_exact = euler.analytic_flux_jacobian(euler.prim_to_cons(W, GAS), X_FACE, GAS)
        scale = max(1.0, np.abs(A_exact).max())
        assert np.max(np.abs(AL + AR - A_exact)) < 1e-5 * scale, solver


def test_flux_jacobians_step_robustness():
    # away from the smoothing kink the central difference is second order,
    # so halving the step barely moves the entries
    WL = np.array([1.0, 0.6, 0.2, 1.0])
    WR = np.array([1.3, 0.4, -0.1, 1.5])
    A1 = flux_jacobians("roe", WL, WR, X_FACE, GAS, step=1e-7)
    A2 = flux_jacobians("roe", WL, WR, X_FACE, GAS, step=5e-8)
    for A, B in zip(A1, A2):
        scale = max(1.0, np.abs(A).max())
        assert np.max(np.abs(A - B)) < 1e-6 * scale


# ------------------------------------------------------------- face blocks


def _recon_for(win, kind, space="conservative"):
    cfg = rc.ReconConfig(kind=kind, space=space, weno_variant="z")
    return rc.reconstruct_pair(win, win, cfg, GAS, X_FACE)


def test_first_order_blocks_degenerate_to_jacobians():
    rng = np.random.default_rng(41)
    W = random_states(rng, 2, (0.0, 1.5))
    win = np.repeat(euler.prim_to_cons(W, GAS)[:, None, :], 5, axis=1)
    recon = _recon_for(win, "first")
    AL, AR = stability._fd_jacobians_U(
        "hll", euler.prim_to_cons(recon.WL, GAS), euler.prim_to_cons(recon.WR, GAS),
        X_FACE, GAS, None,
    )
    blocks = stability.face_blocks(recon, AL, AR, GAS)
    assert np.allclose(blocks[:, 0], 0.0) and np.allclose(blocks[:, 1], 0.0)
    assert np.allclose(blocks[:, 4], 0.0) and np.allclose(blocks[:, 5], 0.0)
    assert np.allclose(blocks[:, 2], AL) and np.allclose(blocks[:, 3], AR)


def test_uniform_blocks_sum_to_analytic_jacobian():
    W = np.array([1.0, 0.4, 0.2, 1.0])
    win = np.broadcast_to(euler.prim_to_cons(W, GAS), (1, 5, 4)).copy()
    recon = _recon_for(win, "weno5")
    AL, AR = stability._fd_jacobians_U(
        "roe", euler.prim_to_cons(recon.WL, GAS), euler.prim_to_cons(recon.WR, GAS),
        X_FACE, GAS, riemann.SmoothingConfig(),
    )
    blocks = stability.face_blocks(recon, AL, AR, GAS)
    total = blocks.sum(axis=1)[0]
    A_exact = euler.analytic_flux_jacobian(euler.prim_to_cons(W, GAS), X_FACE, GAS)
    assert np.max(np.abs(total - A_exact)) < 1e-5 * max(1.0, np.abs(A_exact).max())


def test_linear_weights_blocks_match_upstream_coefficients():
    # forcing the linear weights makes the six blocks the linear 5th-order
    # upstream combination of the two Jacobians
    rng = np.random.default_rng(42)
    base = np.array([1.0, 0.6, 0.1, 1.2])
    win = np.empty((1, 5, 4))
    for m in range(5):
        win[0, m] = euler.prim_to_cons(base * (1.0 + 0.02 * m), GAS)
    cfg = rc.ReconConfig(space="conservative", force_linear_weights=True)
    recon = rc.reconstruct_pair(win, win, cfg, GAS, X_FACE)
    AL, AR = stability._fd_jacobians_U(
        "hll", euler.prim_to_cons(recon.WL, GAS), euler.prim_to_cons(recon.WR, GAS),
        X_FACE, GAS, None,
    )
    blocks = stability.face_blocks(recon, AL, AR, GAS)
    cl = np.array([2.0, -13.0, 47.0, 27.0, -3.0]) / 60.0  # offsets -2..2
    cr = cl[::-1]  # offsets -1..3
    expect = np.zeros_like(blocks)
    for o in range(5):
        expect[:, o] += AL * cl[o]
        expect[:, o + 1] += AR * cr[o]
    assert np.allclose(blocks, expect, atol=1e-12)


# ----------------------------------------------------------------- assembly


def test_assemble_refuses_unsteady_field():
    field, _ = initial_shock_field()
    with pytest.raises(UnsteadyFieldError):
        assemble(field, Scheme(solver="hll", order=1))


def test_circulant_spectrum_first_order_upwind():
    # supersonic 1xN periodic strip: S is the classic circulant upwind
    # difference; eigenvalues lie on circles -s*lam*(1 - exp(-i theta))
    N = 16
    W = np.array([1.4, 20.0, 0.0, 1.0])
    field = uniform_periodic_field(W, nx=N, ny=1, h=0.5)
    S = assemble(field, Scheme(solver="roe", order=1), check_steady=True)
    spec = eigensolve(S)
    sigma = 1.0 / field.h
    lam_a = euler.characteristic_eigenvalues(W, X_FACE, GAS)
    thetas = 2.0 * np.pi * np.arange(N) / N
    expected = np.concatenate(
        [-sigma * la * (1.0 - np.exp(-1j * thetas)) for la in lam_a]
    )
    # every computed eigenvalue matches one expected value
    d = np.abs(spec.eigenvalues[:, None] - expected[None, :]).min(axis=1)
    assert d.max() < 1e-5 * sigma * np.abs(lam_a).max()
    assert spec.max_real < 1e-8


@pytest.mark.parametrize("order", [1, 2, 5])
@pytest.mark.parametrize("space", ["conservative", "primitive", "characteristic"])
def test_uniform_field_kernel(order, space):
    # constant perturbations are invisible to consistent flux differences
    field = uniform_periodic_field([1.4, 0.7, 0.4, 1.0])
    S = assemble(field, Scheme(solver="hllc", order=order, space=space))
    rng = np.random.default_rng(43)
    c = rng.standard_normal(4)
    vec = np.tile(c, S.n_cells)
    out = S.data @ vec
    assert np.abs(out).max() < 1e-7 * max(1.0, np.abs(S.data).max())


def test_first_order_space_equivalence():
    # the three assemblies are similar matrices, so their spectra coincide.
    # The upstream convection chain makes most eigenvalues badly defective
    # (pointwise comparison is ill-posed in floating point), so the
    # equivalence is asserted at the matrix level, which implies it, plus on
    # the well-conditioned dominant eigenvalue.
    field, cfg = initial_shock_field()
    mats = {}
    doms = {}
    for space in ("conservative", "primitive", "characteristic"):
        S = assemble(field, Scheme(solver="roe", order=1, space=space),
                     check_steady=False)
        mats[space] = S
        doms[space] = eigensolve(S).max_real
    scale = np.abs(mats["conservative"].data).max()
    # primitive: similarity by block-diag(dU/dW) at the cell means
    W = field.interior_primitive()
    n = mats["conservative"].data.shape[0]
    D = np.zeros((n, n))
    for i in range(cfg.nx):
        for j in range(cfg.ny):
            c = 4 * (i * cfg.ny + j)
            D[c : c + 4, c : c + 4] = euler.du_dw(W[i, j], GAS)
    sim = np.linalg.solve(D, mats["conservative"].data @ D)
    assert np.abs(sim - mats["primitive"].data).max() < 1e-10 * scale
    # characteristic: R L = I makes the first-order matrix identical
    assert np.abs(mats["characteristic"].data - mats["conservative"].data).max() < 1e-8 * scale
    for space in ("primitive", "characteristic"):
        assert abs(doms[space] - doms["conservative"]) < 1e-6 * max(1.0, abs(doms["conservative"]))


def test_block_counts_by_order():
    field, cfg = initial_shock_field()
    # downstream interior cell: all couplings alive for Roe and HLL
    i, j = 7, 5
    for solver in ("roe", "hll"):
        for order, expect in ((1, 5), (2, 9), (5, 13)):
            S = assemble(field, Scheme(solver=solver, order=order), check_steady=False)
            assert S.block_count(i, j) == expect, (solver, order)
            # structure bound everywhere
            counts = [S.block_count(a, b) for a in range(cfg.nx) for b in range(cfg.ny)]
            assert max(counts) <= expect


def test_inflow_rows_reference_no_ghosts():
    field, cfg = initial_shock_field()
    S = assemble(field, Scheme(solver="roe", order=5), check_steady=False)
    n = cfg.nx * cfg.ny
    for r, c in S.blocks:
        assert 0 <= r < n and 0 <= c < n
    # the first column couples to fewer upstream neighbors than an interior row
    assert S.block_count(0, 5) < S.block_count(7, 5)
    cols = sorted(c // cfg.ny for (r, c) in S.blocks if r == S.cell_index(0, 5))
    assert min(cols) == 0  # nothing left of the boundary


def test_outflow_ghost_chain_rule():
    # the last column's rightward couplings fold onto itself through the
    # pressure-pinned copy; with the pin, a pressure perturbation of the
    # last cell must not propagate through the ghost energy entry
    field, cfg = initial_shock_field()
    S = assemble(field, Scheme(solver="roe", order=5), check_steady=False)
    last = cfg.nx - 1
    row = S.cell_index(last, 5)
    cols = sorted(c // cfg.ny for (r, c) in S.blocks if r == row)
    assert max(cols) == last  # ghost blocks were folded, not dropped


def test_assemble_matches_rhs_directional_derivative():
    # S is the (frozen-weight) linearization of the nonlinear residual: for
    # first order (no weights at all) a directional derivative of rhs must
    # match S @ v
    from shockstab import marching

    field = uniform_periodic_field([1.4, 0.9, 0.3, 1.1], nx=6, ny=6)
    # make it non-uniform but still steady-ish: linear p gradient is not
    # steady, so skip the steadiness check and compare derivatives only
    rng = np.random.default_rng(44)
    field.interior()[...] *= 1.0 + 0.01 * rng.standard_normal(field.interior().shape)
    fields.apply_boundaries(field)
    scheme = Scheme(solver="hll", order=1, space="conservative")
    S = assemble(field, scheme, check_steady=False)
    v = rng.standard_normal(S.data.shape[0])
    eps = 1e-7
    fp = field.copy()
    fp.interior()[...] += eps * v.reshape(field.nx, field.ny, 4)
    fm = field.copy()
    fm.interior()[...] -= eps * v.reshape(field.nx, field.ny, 4)
    dr = (marching.rhs(fp, scheme) - marching.rhs(fm, scheme)) / (2 * eps)
    Sv = (S.data @ v).reshape(field.nx, field.ny, 4)
    assert np.max(np.abs(dr - Sv)) < 1e-5 * max(1.0, np.abs(dr).max())


# ---------------------------------------------------------------- eigensolve


def _spectrum_of_matrix(M):
    S = stability.StabilityMatrix(
        data=M, blocks={}, nx=1, ny=M.shape[0] // 4, space="conservative", h=1.0,
        W_mean=np.tile([1.0, 0.0, 0.0, 1.0], (1, M.shape[0] // 4, 1)), gas=GAS,
    )
    return eigensolve(S)


def test_eigensolve_diagonal():
    spec = _spectrum_of_matrix(np.diag([-1.0, -2.0, -3.0, -4.0]))
    assert abs(spec.max_real + 1.0) < 1e-14


def test_eigensolve_rotation_block():
    M = np.zeros((4, 4))
    M[0, 1], M[1, 0] = 1.0, -1.0
    spec = _spectrum_of_matrix(M)
    assert abs(spec.max_real) < 1e-12
    assert np.any(np.abs(spec.eigenvalues - 1j) < 1e-12)


def test_eigensolve_characteristic_polynomial_oracle():
    # coefficients via Faddeev-LeVerrier (trace recursion), roots via the
    # companion matrix: an independent route to the same spectrum
    rng = np.random.default_rng(45)
    M = rng.standard_normal((8, 8))
    n = M.shape[0]
    coeffs = [1.0]
    Mk = np.eye(n)
    for k in range(1, n + 1):
        Mk = M @ Mk
        ck = -np.trace(Mk) / k
        Mk += ck * np.eye(n)
        coeffs.append(ck)
    roots = np.roots(coeffs)
    vals = np.linalg.eigvals(M)
    d = np.abs(np.sort_complex(roots) - np.sort_complex(vals)).max()
    assert d < 1e-8


def test_localize_synthetic():
    vec = np.zeros((11, 11, 4), dtype=complex)
    vec[5, 3, 2] = 1.0  # cell (6, 4) in 1-based labels
    spec = Spectrum(
        eigenvalues=np.zeros(4), max_real=0.0, dominant=0j,
        eigvec_grid=vec, eigvec_primitive=vec, space="primitive",
    )
    profile, col = localize(spec)
    assert col == 6
    assert profile[5] == 1.0
    flat = Spectrum(
        eigenvalues=np.zeros(4), max_real=0.0, dominant=0j,
        eigvec_grid=np.ones((7, 7, 4), dtype=complex),
        eigvec_primitive=np.ones((7, 7, 4), dtype=complex), space="primitive",
    )
    prof, _ = localize(flat)
    assert np.allclose(prof, 1.0)


def test_tables_format():
    M = np.diag([-1.0, -2.0, -3.0, -4.0])
    spec = _spectrum_of_matrix(M)
    text = stability.spectrum_table(spec)
    assert text.splitlines()[0] == "re,im"
    assert len(text.splitlines()) == 5
    ev = stability.eigenvector_table(spec)
    assert ev.splitlines()[0] == "i j rho u v p"
