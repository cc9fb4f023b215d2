"""The 2D steady normal-shock test problem.

Normalization: upstream density 1.4 and pressure 1.0, so the upstream sound
speed is 1 and the inflow velocity equals the Mach number.  The grid is
square with cell size ``h`` (default 1); eigenvalues and growth rates scale
as 1/h.
"""

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import euler, marching
from .errors import ConvergenceError
from .euler import GasModel
from .fields import BoundarySpec, MeanField, NG, make_field
from .scheme import Scheme


@dataclass(frozen=True)
class ShockProblemConfig:
    mach: float = 20.0
    epsilon: float = 0.1
    nx: int = 11
    ny: int = 11
    h: float = 1.0
    cfl: float = 0.1
    gas: GasModel = GasModel(1.4)
    shock_column: int = 6  # 1-based
    rho_left: float = 1.4
    p_left: float = 1.0
    converge_tol: float = 1e-12
    converge_max_steps: int = 200_000
    converge_cfl: float = 0.4  # pseudo-time step for the steady solve only

    def __post_init__(self):
        if not self.mach > 1.0:
            raise ValueError("upstream Mach number must exceed 1")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("shock position must lie in [0, 1]")
        if not 1 <= self.shock_column <= self.nx:
            raise ValueError("shock column must be interior")


def jump_ratios(mach: float, gas: GasModel):
    """Density ratio f and pressure ratio g across the steady normal shock."""
    if mach < 1.0:
        raise ValueError("jump ratios need M0 >= 1")
    g1, gp = gas.gamma - 1.0, gas.gamma + 1.0
    f = 1.0 / (2.0 / (gp * mach * mach) + g1 / gp)
    g = 2.0 * gas.gamma * mach * mach / gp - g1 / gp
    return f, g


def upstream_state(cfg: ShockProblemConfig) -> np.ndarray:
    c = np.sqrt(cfg.gas.gamma * cfg.p_left / cfg.rho_left)
    return np.array([cfg.rho_left, cfg.mach * c, 0.0, cfg.p_left])


def downstream_state(cfg: ShockProblemConfig) -> np.ndarray:
    f, g = jump_ratios(cfg.mach, cfg.gas)
    w_l = upstream_state(cfg)
    return np.array([w_l[0] * f, w_l[1] / f, 0.0, w_l[3] * g])


def hugoniot_weights(mach: float, eps: float, gas: GasModel):
    """Convex weights (a_rho, a_u, a_p) placing the shock cell on the
    Hugoniot curve between the upstream and downstream states."""
    m2 = mach * mach
    g = gas.gamma
    a_rho = eps
    a_u = 1.0 - (1.0 - eps) * (
        1.0 + eps * (m2 - 1.0) / (1.0 + 0.5 * (g - 1.0) * m2)
    ) ** -0.5 * (1.0 + eps * (m2 - 1.0) / (1.0 - 2.0 * g * m2 / (g - 1.0))) ** -0.5
    a_p = eps * (1.0 + (1.0 - eps) * (g + 1.0) / (g - 1.0) * (m2 - 1.0) / m2) ** -0.5
    return a_rho, a_u, a_p


def intermediate_state(cfg: ShockProblemConfig) -> np.ndarray:
    """Primitive state of the internal shock cell for the configured epsilon."""
    a_rho, a_u, a_p = hugoniot_weights(cfg.mach, cfg.epsilon, cfg.gas)
    w_l = upstream_state(cfg)
    w_r = downstream_state(cfg)
    return np.array(
        [
            (1.0 - a_rho) * w_l[0] + a_rho * w_r[0],
            (1.0 - a_u) * w_l[1] + a_u * w_r[1],
            0.0,
            (1.0 - a_p) * w_l[3] + a_p * w_r[3],
        ]
    )


def boundary_spec(cfg: ShockProblemConfig) -> BoundarySpec:
    return BoundarySpec(
        inflow_W=upstream_state(cfg), outflow_pressure=float(downstream_state(cfg)[3])
    )


def initial_profile(cfg: ShockProblemConfig) -> np.ndarray:
    """Column states of the initial 1D profile, shape (nx, 4) conservative."""
    w_l = upstream_state(cfg)
    w_r = downstream_state(cfg)
    w_m = intermediate_state(cfg)
    col = cfg.shock_column - 1
    W = np.empty((cfg.nx, 4))
    W[:col] = w_l
    W[col] = w_m
    W[col + 1 :] = w_r
    return euler.prim_to_cons(W, cfg.gas)


def build_initial_field(cfg: ShockProblemConfig, ny: int | None = None) -> MeanField:
    """Column-uniform 2D field: upstream | Hugoniot cell | downstream."""
    profile = initial_profile(cfg)
    ny = cfg.ny if ny is None else ny
    interior = np.repeat(profile[:, None, :], ny, axis=1)
    return make_field(
        interior,
        h=cfg.h,
        gas=cfg.gas,
        bc=boundary_spec(cfg),
        shock_column=cfg.shock_column,
        upstream=upstream_state(cfg),
        downstream=downstream_state(cfg),
    )


def _residual_1d(field, scheme) -> np.ndarray:
    return marching.rhs(field, scheme).reshape(-1)


def _fd_jacobian_1d(field, scheme, r0=None, cols=None) -> np.ndarray:
    """True Jacobian of the 1D residual (differentiates through the weights).

    Falls back to a one-sided difference when a probe invalidates the state.
    """
    nx = field.nx
    n = 4 * nx
    cols = range(n) if cols is None else cols
    J = np.zeros((n, n))
    for col in cols:
        i, c = divmod(col, 4)
        h = 1e-7 * max(1.0, abs(field.interior()[i, 0, c]))
        fp = field.copy()
        fp.interior()[i, 0, c] += h
        fm = field.copy()
        fm.interior()[i, 0, c] -= h
        try:
            J[:, col] = (_residual_1d(fp, scheme) - _residual_1d(fm, scheme)) / (2 * h)
        except Exception:
            if r0 is None:
                r0 = _residual_1d(field, scheme)
            try:
                J[:, col] = (_residual_1d(fp, scheme) - r0) / h
            except Exception:
                J[:, col] = (r0 - _residual_1d(fm, scheme)) / h
    return J


def _lm_refine_1d(field, scheme, tol, max_iter=80, clamp_cells=(), pin_dofs=()):
    """Levenberg-Marquardt steady solve; the marching limit cycles of the
    high-order schemes orbit an unstable fixed point this locates exactly.

    ``clamp_cells`` lists interior columns held fixed (the supersonic
    upstream cells, which the exact steady state keeps uniform; freezing
    them keeps the solver away from the non-smooth uniform-window regime).
    ``pin_dofs`` lists flat (cell*4 + component) coordinates held at their
    entry values: the discrete steady shocks form a one-parameter family of
    sub-cell positions, and pinning the shock-cell density to the
    shock-position prescription selects the labeled member.
    """
    from .fields import apply_boundaries

    nx = field.nx
    # per-component residual scales (flux magnitude over the cell size)
    W = field.interior_primitive()
    c = euler.sound_speed(W, field.gas)
    speed = float((np.abs(W[..., 1]) + c).max())
    scale = np.maximum(1.0, np.abs(field.interior()).max(axis=(0, 1))) * speed / field.h
    s = np.tile(scale, nx)
    rho_floor = 1e-3 * float(W[..., 0].min())
    p_floor = 1e-3 * float(W[..., 3].min())

    def admissible(f):
        Wt = euler.cons_to_prim(f.interior(), f.gas)
        return bool((Wt[..., 0].min() > rho_floor) and (Wt[..., 3].min() > p_floor))

    free = np.ones(4 * nx, dtype=bool)
    for cell in clamp_cells:
        free[4 * cell : 4 * cell + 4] = False
    for dof in pin_dofs:
        free[dof] = False

    r = _residual_1d(field, scheme)
    cost = float(np.linalg.norm(r / s))
    lam = 1e-3
    it = 0
    while it < max_iter:
        it += 1
        if np.abs(r.reshape(nx, 4)[:, 0]).max() < tol:
            break
        J = (_fd_jacobian_1d(field, scheme, r0=r, cols=np.flatnonzero(free)) / s[:, None])[:, free]
        g = J.T @ (r / s)
        H = J.T @ J
        dH = np.diag(H).copy()
        dH[dH <= 0] = 1.0
        accepted = False
        for _ in range(25):
            try:
                step_free = np.linalg.solve(H + lam * np.diag(dH), -g)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            step = np.zeros(4 * nx)
            step[free] = step_free
            trial = field.copy()
            trial.interior()[...] += step.reshape(nx, 1, 4)
            try:
                apply_boundaries(trial)
                if not admissible(trial):
                    lam *= 4.0
                    continue
                r2 = _residual_1d(trial, scheme)
            except Exception:
                lam *= 4.0
                continue
            cost2 = float(np.linalg.norm(r2 / s))
            if np.isfinite(cost2) and cost2 < cost:
                field, r, cost = trial, r2, cost2
                lam = max(lam / 3.0, 1e-14)
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            break
    return field, float(np.abs(r.reshape(nx, 4)[:, 0]).max()), it


def converge_1d(cfg: ShockProblemConfig, scheme: Scheme):
    """Drive the 1D restriction of the problem to its steady state.

    A short pseudo-time march releases the transient of the raw jump data,
    then a damped Newton (Levenberg-Marquardt) solve of rhs = 0 with the
    exact finite-difference Jacobian finishes the job.  The implicit solve
    matters twice over: the fifth-order schemes only orbit their steady
    state in a weight-chatter limit cycle under pure marching, and the
    low-dissipation solvers slowly drift the captured shock off its initial
    sub-cell position, losing the family member the shock-position parameter
    selects.  The supersonic upstream columns (exactly uniform in the steady
    state) stay clamped during the solve.

    If the direct solve stalls, a longer march with cycle detection followed
    by time-averaging reseeds it.  Success is max|d rho/dt| < converge_tol;
    a result that only reaches 1e-8 is accepted with a warning, anything
    worse raises ConvergenceError.
    """
    field = build_initial_field(cfg, ny=1)
    info = {"warnings": []}
    clamp = tuple(range(max(cfg.shock_column - 2, 0)))
    # the steady captured shocks form a family of sub-cell positions; the
    # shock-cell density is held at the shock-position prescription so every
    # epsilon label selects its own member deterministically
    rho_m = float(intermediate_state(cfg)[0])
    pin = (4 * (cfg.shock_column - 1),)

    # gentle smoothing only: the low-dissipation solvers slide the captured
    # shock off its sub-cell position within a handful of coarse steps, which
    # would silently swap the family member under analysis
    n_smooth = 10
    for _ in range(n_smooth):
        dt = marching.cfl_dt(field, 0.05)
        field = marching.step_ssprk3(field, dt, scheme)
    if not np.all(np.isfinite(field.interior())):
        raise ConvergenceError(f"1D smoothing march diverged for {scheme.label()}")

    from .fields import apply_boundaries

    field.interior()[cfg.shock_column - 1, 0, 0] = rho_m
    apply_boundaries(field)
    field, res, lm_iters = _lm_refine_1d(
        field, scheme, cfg.converge_tol, max_iter=150, clamp_cells=clamp,
        pin_dofs=pin,
    )
    info["steps"] = n_smooth
    info["lm_iterations"] = lm_iters

    # the WENO weight kinks occasionally trap the solve in a shallow local
    # minimum; a seeded jitter restart dislodges it
    rng = np.random.default_rng(2024)
    for _ in range(2):
        if res < cfg.converge_tol:
            break
        trial = field.copy()
        noise = 1e-6 * rng.standard_normal(trial.interior().shape)
        trial.interior()[...] *= 1.0 + noise
        trial.interior()[: len(clamp)] = field.interior()[: len(clamp)]
        trial.interior()[cfg.shock_column - 1, 0, 0] = rho_m
        apply_boundaries(trial)
        trial, tres, tit = _lm_refine_1d(
            trial, scheme, cfg.converge_tol, max_iter=150, clamp_cells=clamp,
            pin_dofs=pin,
        )
        info["lm_iterations"] += tit
        if tres < res:
            field, res = trial, tres

    if res >= cfg.converge_tol:
        # fallback: march out the transient until the residual stalls, then
        # average the orbit and refine again
        check_every = 10
        res0 = None
        best = np.inf
        stalled_checks = 0
        step = 0
        max_march = min(cfg.converge_max_steps, 20_000)
        while step < max_march:
            if step % check_every == 0:
                r = marching.rhs(field, scheme)
                mres = float(np.abs(r[..., 0]).max())
                if res0 is None:
                    res0 = max(mres, 1e-30)
                if mres < cfg.converge_tol:
                    res = mres
                    break
                if not np.isfinite(mres) or mres > 1e3 * res0 + 1e3:
                    raise ConvergenceError(
                        f"1D convergence diverged for {scheme.label()} at step {step}"
                    )
                if mres < best * 0.999:
                    best = mres
                    stalled_checks = 0
                else:
                    stalled_checks += 1
                    if stalled_checks > 40:
                        break
            dt = marching.cfl_dt(field, cfg.converge_cfl)
            field = marching.step_ssprk3(field, dt, scheme)
            step += 1
        info["steps"] += step
        if res >= cfg.converge_tol:
            navg = 400
            acc = np.zeros_like(field.interior())
            for _ in range(navg):
                dt = marching.cfl_dt(field, cfg.converge_cfl)
                field = marching.step_ssprk3(field, dt, scheme)
                acc += field.interior()
            field.interior()[...] = acc / navg
            field.interior()[cfg.shock_column - 1, 0, 0] = rho_m
            apply_boundaries(field)
            field, res, lm2 = _lm_refine_1d(
                field, scheme, cfg.converge_tol, max_iter=150, clamp_cells=clamp,
                pin_dofs=pin,
            )
            info["lm_iterations"] += lm2
            info["steps"] += navg

    if res >= cfg.converge_tol:
        if res < 1e-8:
            info["warnings"].append(
                f"1D residual stalled at {res:.3e}; accepted below 1e-8"
            )
        else:
            raise ConvergenceError(
                f"1D residual {res:.3e} after marching and implicit refinement "
                f"for {scheme.label()}"
            )
    info["residual"] = res
    for w in info["warnings"]:
        warnings.warn(w)
    return field.interior()[:, 0].copy(), info


def project_to_2d(profile: np.ndarray, cfg: ShockProblemConfig) -> MeanField:
    """Replicate a steady 1D profile across all rows of the 2D domain."""
    interior = np.repeat(profile[:, None, :], cfg.ny, axis=1)
    return make_field(
        interior,
        h=cfg.h,
        gas=cfg.gas,
        bc=boundary_spec(cfg),
        shock_column=cfg.shock_column,
        upstream=upstream_state(cfg),
        downstream=downstream_state(cfg),
    )


def converged_field(cfg: ShockProblemConfig, scheme: Scheme):
    """converge_1d + project_to_2d in one call; returns (field, info)."""
    profile, info = converge_1d(cfg, scheme)
    return project_to_2d(profile, cfg), info
