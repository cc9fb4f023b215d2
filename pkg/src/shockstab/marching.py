"""Semi-discrete residual, SSP-RK3 stepping, perturbation experiments and
exponential growth-rate fitting."""

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import euler, fields, reconstruction, riemann
from .errors import InvalidStateError, NoExponentialStageError
from .euler import GasModel, X_FACE, Y_FACE
from .fields import MeanField, NG, apply_boundaries, shock_face_masks
from .scheme import Scheme


@dataclass(frozen=True)
class RunConfig:
    scheme: Scheme
    cfl: float = 0.1
    end_time: float = 60.0
    amplitude: float = 1e-7
    seed: int = 1234
    stop_level: float = 1e-3  # early stop once the monitor exceeds this

    def __post_init__(self):
        if not self.cfl > 0:
            raise ValueError("CFL must be positive")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")


@dataclass
class MonitorSeries:
    t: np.ndarray
    vmax: np.ndarray
    collapsed: bool = False
    collapse_time: float | None = None


@dataclass
class GrowthFit:
    v0: float
    t0: float
    lam: float
    window: tuple[float, float]
    r2: float


def _direction_flux(field: MeanField, axis: str, scheme: Scheme, cap_masks,
                    Xpad=None):
    """Numerical fluxes on all faces of one orientation, plus fallback count."""
    solver, _ = scheme.per_direction(axis)
    cfg = scheme.recon_config(axis)
    cap_cfg = scheme.cap_config(axis)
    windows = (
        reconstruction.x_face_windows if axis == "x" else reconstruction.y_face_windows
    )
    frame = X_FACE if axis == "x" else Y_FACE
    winL, winR = windows(field.U, field.nx, field.ny)
    XwinL = XwinR = None
    if Xpad is not None:
        XwinL, XwinR = windows(Xpad, field.nx, field.ny)
    cap_mask = cap_masks["x" if axis == "x" else "y"] if cap_cfg is not None else None
    recon = reconstruction.reconstruct_pair(
        winL, winR, cfg, field.gas, frame, cap_cfg=cap_cfg, cap_mask=cap_mask,
        XwinL=XwinL, XwinR=XwinR,
    )
    flux = riemann.compute_flux(
        solver, recon.WL, recon.WR, frame, field.gas, scheme.smoothing()
    )
    return flux, int(recon.fallback.sum())


def rhs(field: MeanField, scheme: Scheme, info: dict | None = None) -> np.ndarray:
    """Semi-discrete residual dU/dt on the interior cells, ghosts refilled."""
    apply_boundaries(field)
    cap_masks = {}
    if scheme.cap != "none":
        mx, my = shock_face_masks(field)
        cap_masks = {"x": mx, "y": my}
    # the padded field is converted to the reconstruction space once and
    # windowed per direction (characteristic projections stay face-local)
    Xpad = None
    if scheme.space == "primitive":
        Xpad = euler.cons_to_prim(field.U, field.gas, "padded field")
    fx, nfb_x = _direction_flux(field, "x", scheme, cap_masks, Xpad)
    res = -(fx[1:] - fx[:-1]) / field.h
    # a single-row periodic field has identical j+1/2 and j-1/2 fluxes
    nfb_y = 0
    if field.ny > 1:
        fy, nfb_y = _direction_flux(field, "y", scheme, cap_masks, Xpad)
        res -= (fy[:, 1:] - fy[:, :-1]) / field.h
    if info is not None:
        info["fallback_faces"] = info.get("fallback_faces", 0) + nfb_x + nfb_y
    return res


def cfl_dt(field: MeanField, cfl: float) -> float:
    W = field.interior_primitive()
    c = euler.sound_speed(W, field.gas)
    speed = np.maximum(np.abs(W[..., 1]) + c, np.abs(W[..., 2]) + c)
    return cfl * field.h / float(speed.max())


def step_ssprk3(field: MeanField, dt: float, scheme: Scheme,
                info: dict | None = None) -> MeanField:
    """Three-stage SSP Runge-Kutta update; returns a new field."""
    u0 = field.interior().copy()
    work = field.copy()

    def stage(prev_interior):
        work.interior()[...] = prev_interior
        return prev_interior + dt * rhs(work, scheme, info)

    u1 = stage(u0)
    u2 = 0.75 * u0 + 0.25 * stage(u1)
    u3 = u0 / 3.0 + 2.0 / 3.0 * stage(u2)
    work.interior()[...] = u3
    return work  # ghosts are refilled lazily by the next rhs call


def inject_perturbation(field: MeanField, amplitude: float, seed: int) -> MeanField:
    """Uniform random perturbation on every conservative component of every
    interior cell; deterministic for a given seed."""
    out = field.copy()
    if amplitude > 0:
        rng = np.random.default_rng(seed)
        noise = rng.uniform(-amplitude, amplitude, out.interior().shape)
        out.interior()[...] += noise
        apply_boundaries(out)
    return out


def transverse_velocity_norm(field: MeanField) -> float:
    interior = field.interior()
    v = interior[..., 2] / interior[..., 0]
    return float(np.abs(v).max())


def march(field: MeanField, run: RunConfig, info: dict | None = None):
    """Advance a perturbed field to the end time, sampling ||v||_inf each step.

    Returns (MonitorSeries, final field).  A NaN or invalid state flags a
    collapse (with its time) instead of raising.
    """
    info = info if info is not None else {}
    state = inject_perturbation(field, run.amplitude, run.seed)
    t = 0.0
    times = [t]
    vmax = [transverse_velocity_norm(state)]
    collapsed = False
    collapse_time = None
    while t < run.end_time:
        dt = min(cfl_dt(state, run.cfl), run.end_time - t)
        try:
            state = step_ssprk3(state, dt, run.scheme, info)
        except InvalidStateError:
            collapsed = True
            collapse_time = t + dt
            break
        if not np.all(np.isfinite(state.interior())):
            collapsed = True
            collapse_time = t + dt
            break
        t += dt
        times.append(t)
        vmax.append(transverse_velocity_norm(state))
        if run.amplitude > 0 and vmax[-1] > run.stop_level:
            break
    info["steps"] = len(times) - 1
    series = MonitorSeries(
        t=np.array(times), vmax=np.array(vmax), collapsed=collapsed,
        collapse_time=collapse_time,
    )
    return series, state


def _window_r2_scan(t, y, min_len):
    """Select the fit window inside the exponential stage.

    The growth of the dominant mode only emerges once the subdominant modes
    have decayed relative to it, so the window is anchored at the end of the
    stage and grown backwards while the log-linear fit stays at R^2 >= 0.99.
    If no end-anchored window qualifies, the longest qualifying window
    anywhere is used.  Returns (a, b) slice bounds or None.
    """
    n = len(t)
    if n < min_len:
        return None
    ones = np.ones_like(t)
    pref = {}
    for name, arr in [("n", ones), ("t", t), ("y", y), ("tt", t * t),
                      ("ty", t * y), ("yy", y * y)]:
        pref[name] = np.concatenate([[0.0], np.cumsum(arr)])

    def window_r2(a, b):  # slice [a, b)
        s = {k: pref[k][b] - pref[k][a] for k in pref}
        num = s["n"] * s["ty"] - s["t"] * s["y"]
        den_t = s["n"] * s["tt"] - s["t"] ** 2
        den_y = s["n"] * s["yy"] - s["y"] ** 2
        if den_t <= 0:
            return 0.0
        if den_y <= 0:
            return 1.0  # constant data: a flat line fits exactly
        return min(1.0, num * num / (den_t * den_y))

    # grow a window backwards from the end of the stage
    best_end = None
    length = min_len
    while length <= n:
        if window_r2(n - length, n) >= 0.99:
            best_end = (n - length, n)
            length = int(length * 1.25) + 1
        else:
            break
    if best_end is not None:
        return best_end

    length = n
    while length >= min_len:
        starts = range(0, n - length + 1, max(1, length // 8))
        best = None
        for a in starts:
            r2 = window_r2(a, a + length)
            if r2 >= 0.99 and (best is None or r2 > best[2]):
                best = (a, a + length, r2)
        if best is not None:
            return best[0], best[1]
        length = int(length * 0.9) if length > min_len else length - 1
    return None


def fit_growth_rate(series: MonitorSeries, amplitude: float | None = None) -> GrowthFit:
    """Least-squares slope of ln||v|| over an automatically selected window.

    The window is the longest stretch with log-linear R^2 >= 0.99, restricted
    to the exponential band (above 10x the injection level, below 1% of the
    saturation level) when the series grows overall.
    """
    good = np.isfinite(series.vmax) & (series.vmax > 0)
    t = series.t[good]
    v = series.vmax[good]
    if len(t) < 10:
        raise NoExponentialStageError("fewer than 10 positive samples")
    y = np.log(v)
    ref = amplitude if amplitude is not None else v[0]
    growing = np.median(y[-max(3, len(y) // 4):]) > np.median(y[: max(3, len(y) // 4)])

    sel = np.ones(len(t), dtype=bool)
    if growing:
        vmax = v.max()
        for lo, hi in [(10.0 * ref, 0.01 * vmax), (3.0 * ref, 0.1 * vmax)]:
            band = (v >= lo) & (v <= hi)
            if band.sum() >= 20:
                sel = band
                break
    else:
        sel = t >= t[0] + 0.05 * (t[-1] - t[0])
        if sel.sum() < 10:
            sel = np.ones(len(t), dtype=bool)

    # longest contiguous selected run
    idx = np.flatnonzero(sel)
    splits = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
    run_idx = max(splits, key=len)
    tt, yy = t[run_idx], y[run_idx]

    if len(tt) > 4000:  # decimate: the fit only needs the shape
        stride = len(tt) // 4000 + 1
        tt, yy = tt[::stride], yy[::stride]

    min_len = max(10, len(tt) // 20)
    span = _window_r2_scan(tt, yy, min_len)
    if span is None:
        raise NoExponentialStageError("no window reaches R^2 >= 0.99")
    a, b = span
    coef = np.polyfit(tt[a:b], yy[a:b], 1)
    resid = yy[a:b] - np.polyval(coef, tt[a:b])
    var = np.var(yy[a:b])
    r2 = 1.0 if var == 0 else max(0.0, min(1.0, 1.0 - np.var(resid) / var))
    return GrowthFit(
        v0=float(np.exp(np.polyval(coef, tt[a]))),
        t0=float(tt[a]),
        lam=float(coef[0]),
        window=(float(tt[a]), float(tt[b - 1])),
        r2=float(r2),
    )


def monitor_table(series: MonitorSeries) -> str:
    lines = ["t vmax"]
    for ti, vi in zip(series.t, series.vmax):
        lines.append(f"{ti:.17g} {vi:.17g}")
    return "\n".join(lines) + "\n"
