"""Single-step time integrators.

``limex_step`` applies a LIMEX-RK pair to the partitioned system where every
stage rate ``N(Y*_j, Y_j)`` is formed once and reused for the starred stages
(explicit tableau), the implicit stages (DIRK tableau) and the final update.
``alimex_first_order_step`` is the first-order three-way additive variant
and ``lie_trotter_step`` the classical hydro/radiation operator split.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import DomainError, NonConvergenceError, UnknownSchemeError
from ..physics import EosIdealGas, sound_speed
from ..spatial import primitive_rows
from ..state import ERAD, ETOT, MOM, RHO, TEMP, CellState, Grid1D, internal_energy
from .models import RadHydroModel
from .tableaux import ButcherTableau, ImexPair, available, registry


@dataclass
class StepStats:
    explicit_evals: int = 0
    implicit_solves: int = 0
    nonlinear_iterations: int = 0
    boundary_energy_inflow: float = 0.0  # time-integrated over the step, erg/cm^2


@dataclass(frozen=True)
class StepController:
    cfl: float | None = 0.5
    dt_fixed: float | None = None

    def __post_init__(self):
        if self.dt_fixed is None and self.cfl is None:
            raise ValueError("need cfl or dt_fixed")
        if self.dt_fixed is None and not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.dt_fixed is not None and not self.dt_fixed > 0:
            raise ValueError("dt_fixed must be positive")


def _calls(model):
    c = model.calls
    return c.explicit, c.implicit, c.iterations


def _stats_since(model, before, inflow) -> StepStats:
    e, i, it = _calls(model)
    return StepStats(e - before[0], i - before[1], it - before[2], inflow)


def limex_step(state, dt: float, pair: ImexPair, model):
    """Advance one step with a LIMEX-RK pair. Returns ``(new_state, stats)``."""
    y0 = model.pack(state)
    At, A, b = pair.explicit.A, pair.implicit.A, pair.implicit.b
    before = _calls(model)
    K = []
    inflow = []
    for i in range(pair.stages):
        y_star = y0.copy()
        base = y0.copy()
        for j in range(i):
            if At[i, j]:
                y_star = y_star + dt * At[i, j] * K[j]
            if A[i, j]:
                base = base + dt * A[i, j] * K[j]
        stage = model.stage(y_star)
        w = dt * A[i, i]
        if w:
            base = base + w * stage.NE
        try:
            Y = model.solve(stage, base, w)
        except NonConvergenceError as exc:
            raise exc.with_stage(i) from exc
        K.append(model.rate(stage, Y))
        inflow.append(model.boundary_inflow(stage, Y))
    y1 = y0.copy()
    for j in range(pair.stages):
        if b[j]:
            y1 = y1 + dt * b[j] * K[j]
    stats = _stats_since(model, before, dt * float(np.dot(b, inflow)))
    return model.unpack(y1), stats


def alimex_first_order_step(state, dt: float, model):
    """First-order additive LIMEX step.

    Explicit step ``Y*2 = y_n + dt N_E(y_n)``, coefficients frozen at ``Y*2``,
    then ``y_{n+1} = y_n + dt N_E(y_n) + dt N_I(Y*2, y_{n+1})``.
    """
    y0 = model.pack(state)
    before = _calls(model)
    rates0 = model.explicit(y0)
    y_star = y0 + dt * rates0.values
    stage = model.stage(y_star)
    try:
        Y = model.solve(stage, y_star, dt)
    except NonConvergenceError as exc:
        raise exc.with_stage(1) from exc
    inflow = dt * (rates0.boundary_energy_inflow() + model.diffusive_inflow(stage.ctx, Y[ERAD]))
    return model.unpack(Y), _stats_since(model, before, inflow)


# Inner explicit schemes for the operator split
HYDRO_SCHEMES = {
    "FE": ButcherTableau([[0.0]], [1.0]),
    # Kutta's third-order method
    "RK3": ButcherTableau([[0, 0, 0], [0.5, 0, 0], [-1, 2, 0]], [1 / 6, 2 / 3, 1 / 6]),
    # Shu-Osher SSP-RK3 in Butcher form
    "TVD3": ButcherTableau([[0, 0, 0], [1, 0, 0], [0.25, 0.25, 0]], [1 / 6, 1 / 6, 2 / 3]),
}


def explicit_hydro_advance(y0: np.ndarray, dt: float, tableau: ButcherTableau, model: RadHydroModel):
    """Explicit RK on the hydro + material-motion operator. Returns ``(y, inflow)``."""
    K, q = [], []
    for i in range(tableau.stages):
        y = y0.copy()
        for j in range(i):
            if tableau.A[i, j]:
                y = y + dt * tableau.A[i, j] * K[j]
        rates = model.explicit(y)
        K.append(rates.values)
        q.append(rates.boundary_energy_inflow())
    y1 = y0.copy()
    for j in range(tableau.stages):
        y1 = y1 + dt * tableau.b[j] * K[j]
    return y1, dt * float(np.dot(tableau.b, q))


def lie_trotter_step(state, dt: float, model: RadHydroModel, hydro_scheme: str = "FE", temperature_predictor: str = "eos"):
    """Operator split: explicit hydro, EOS temperature, implicit radiation.

    ``temperature_predictor="linearized"`` replaces the EOS evaluation of the
    intermediate temperature by ``T_n + dt L_T(y*) / (rho* c_v)``.
    """
    try:
        tableau = HYDRO_SCHEMES[hydro_scheme]
    except KeyError:
        raise UnknownSchemeError(f"unknown hydro scheme {hydro_scheme!r}; choose from {sorted(HYDRO_SCHEMES)}") from None
    y0 = model.pack(state)
    before = _calls(model)
    y_h, inflow = explicit_hydro_advance(y0, dt, tableau, model)

    eos = model.eos
    if temperature_predictor == "eos":
        e_i = internal_energy(y_h[RHO], y_h[MOM], y_h[ETOT])
        T_star = e_i / eos.c_v
    elif temperature_predictor == "linearized":
        ctx_lt = model.freeze_at(y_h, model.explicit(y_h))
        T_star = y0[TEMP] + dt * ctx_lt.L_T / (ctx_lt.rho * ctx_lt.c_v)
    else:
        raise ValueError(f"unknown temperature predictor {temperature_predictor!r}")
    y_h[TEMP] = T_star

    ctx = model.freeze_at(y_h, with_LT=False)
    try:
        Y = model.solve(ctx, y_h, dt)
    except NonConvergenceError as exc:
        raise exc.with_stage(0) from exc
    inflow += dt * model.diffusive_inflow(ctx, Y[ERAD])
    return model.unpack(Y), _stats_since(model, before, inflow)


def compute_dt(state: CellState, grid: Grid1D, controller: StepController, eos: EosIdealGas) -> float:
    """Hydrodynamic CFL step ``cfl h / max(|u| + c_s)`` unless a fixed step is set."""
    if controller.dt_fixed is not None:
        return controller.dt_fixed
    rho, u, p, _ = primitive_rows(state.q[:, grid.interior], eos)
    smax = float(np.max(np.abs(u) + sound_speed(eos, rho, p)))
    if not smax > 0:
        raise DomainError("zero maximum signal speed; set dt_fixed")
    return controller.cfl * grid.h / smax


SPLIT_SCHEMES = {"Op-Split": "FE", "Op-Split-RK3": "RK3", "Op-Split-TVD3": "TVD3"}
OTHER_SCHEMES = ("ALIMEX-Euler",)


def scheme_names() -> list[str]:
    return sorted(SPLIT_SCHEMES) + list(OTHER_SCHEMES) + available()


def make_stepper(name: str) -> Callable:
    """Return ``step(state, dt, model) -> (state, stats)`` for a scheme name."""
    if name in SPLIT_SCHEMES:
        hydro = SPLIT_SCHEMES[name]
        return lambda state, dt, model: lie_trotter_step(state, dt, model, hydro)
    if name == "ALIMEX-Euler":
        return alimex_first_order_step
    try:
        pair = registry(name)
    except UnknownSchemeError:
        raise UnknownSchemeError(f"unknown scheme {name!r}; available: {', '.join(scheme_names())}") from None
    return lambda state, dt, model: limex_step(state, dt, pair, model)
