"""Shared fixtures: converged base flows are expensive, so they are computed
once per session and cached by (solver, order, space, cap, mach, epsilon)."""

import numpy as np
import pytest

from shockstab.scheme import Scheme
from shockstab.shock_problem import ShockProblemConfig, converged_field


@pytest.fixture(scope="session")
def base_flow_cache():
    cache = {}

    def get(scheme: Scheme, cfg: ShockProblemConfig | None = None, **cfg_kw):
        cfg = cfg or ShockProblemConfig(**cfg_kw)
        key = (
            scheme.solver, scheme.order, scheme.space, scheme.cap,
            scheme.weno_variant, cfg.mach, cfg.epsilon, cfg.nx, cfg.ny, cfg.h,
        )
        if key not in cache:
            field, info = converged_field(cfg, scheme)
            cache[key] = (field, info)
        field, info = cache[key]
        return field.copy(), info

    return get
