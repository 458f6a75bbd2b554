"""Right-hand-side models driven by the steppers.

A model works on flat stage vectors and exposes four operations:

* ``stage(y_star)`` evaluates the explicit operator at ``y_star`` and freezes
  the linearly implicit coefficients there;
* ``solve(stage, base, w)`` solves ``Y = base + w N_I(y_star, Y)``;
* ``rate(stage, Y)`` returns the full stage rate ``N(y_star, Y)``;
* ``boundary_inflow(stage, Y)`` returns the net energy flux into the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..implicit import SolverSettings, StageContext, StageRhs, freeze, solve_stage
from ..physics import Constants, EosIdealGas, OpacityModel
from ..spatial import BoundaryCondition, ExplicitRates, explicit_operator, fill_ghosts
from ..state import ERAD, ETOT, TEMP, CellState, Grid1D


@dataclass
class CallCounter:
    explicit: int = 0
    implicit: int = 0
    iterations: int = 0


@dataclass
class RadStage:
    NE: np.ndarray
    rates: ExplicitRates
    ctx: StageContext


class RadHydroModel:
    """Gray-diffusion radiation hydrodynamics on a fixed grid.

    Stage vectors are the interior block ``(5, n_cells)`` of ``CellState.q``.
    """

    def __init__(
        self,
        grid: Grid1D,
        eos: EosIdealGas,
        opacity: OpacityModel,
        bc: BoundaryCondition,
        constants: Constants = Constants(),
        settings: SolverSettings = SolverSettings(),
    ):
        self.grid = grid
        self.eos = eos
        self.opacity = opacity
        self.bc = bc
        self.constants = constants
        self.settings = settings
        self.calls = CallCounter()

    def pack(self, state: CellState) -> np.ndarray:
        return state.q[:, self.grid.interior].copy()

    def unpack(self, y: np.ndarray) -> CellState:
        q = np.zeros((5, self.grid.n_total))
        q[:, self.grid.interior] = y
        return fill_ghosts(self.grid, CellState(q), self.bc, self.eos)

    def explicit(self, y: np.ndarray) -> ExplicitRates:
        self.calls.explicit += 1
        return explicit_operator(self.grid, self.unpack(y), self.bc, self.eos)

    def freeze_at(self, y_star: np.ndarray, rates: ExplicitRates | None = None, with_LT: bool = True) -> StageContext:
        return freeze(
            self.grid, self.unpack(y_star), self.bc, self.eos, self.opacity, self.constants, rates=rates, with_LT=with_LT
        )

    def stage(self, y_star: np.ndarray) -> RadStage:
        rates = self.explicit(y_star)
        ctx = self.freeze_at(y_star, rates)
        return RadStage(NE=rates.values, rates=rates, ctx=ctx)

    def solve(self, stage, base: np.ndarray, w: float) -> np.ndarray:
        ctx = stage.ctx if isinstance(stage, RadStage) else stage
        Y = base.copy()
        if w == 0.0:
            return Y
        self.calls.implicit += 1
        sol = solve_stage(ctx, StageRhs(base[ETOT], base[ERAD], base[TEMP], w), self.settings)
        self.calls.iterations += sol.iterations
        Y[ETOT] = sol.rho_et
        Y[ERAD] = sol.Er
        Y[TEMP] = sol.T
        return Y

    def implicit_rate(self, ctx: StageContext, Y: np.ndarray) -> np.ndarray:
        ex = ctx.exchange(Y[ERAD], Y[TEMP])
        NI = np.zeros_like(Y)
        NI[ETOT] = ex
        NI[ERAD] = ctx.diffusion(Y[ERAD]) - ex
        NI[TEMP] = (ex + ctx.L_T) / (ctx.rho * ctx.c_v)
        return NI

    def rate(self, stage: RadStage, Y: np.ndarray) -> np.ndarray:
        return stage.NE + self.implicit_rate(stage.ctx, Y)

    def diffusive_inflow(self, ctx: StageContext, Er: np.ndarray) -> float:
        G = ctx.face_flux(Er)
        return float(G[-1] - G[0])

    def boundary_inflow(self, stage: RadStage, Y: np.ndarray) -> float:
        return stage.rates.boundary_energy_inflow() + self.diffusive_inflow(stage.ctx, Y[ERAD])


@dataclass
class ScalarStage:
    y_star: np.ndarray
    NE: np.ndarray


@dataclass
class ScalarPartitionedModel:
    """Linear test problem ``y' = lam_explicit y* + lam_implicit y``.

    The exact solution of the unpartitioned problem is
    ``y0 exp((lam_explicit + lam_implicit) t)``.
    """

    lam_explicit: complex | float
    lam_implicit: complex | float
    calls: CallCounter = field(default_factory=CallCounter)

    def pack(self, y):
        return np.atleast_1d(np.asarray(y, dtype=np.result_type(y, self.lam_explicit, self.lam_implicit))).copy()

    def unpack(self, y):
        return y

    def stage(self, y_star):
        self.calls.explicit += 1
        return ScalarStage(y_star=y_star, NE=self.lam_explicit * y_star)

    def solve(self, stage, base, w):
        if w == 0.0:
            return base.copy()
        self.calls.implicit += 1
        return base / (1.0 - w * self.lam_implicit)

    def rate(self, stage, Y):
        return stage.NE + self.lam_implicit * Y

    def boundary_inflow(self, stage, Y):
        return 0.0

    def exact(self, y0, t):
        return np.asarray(y0) * np.exp((self.lam_explicit + self.lam_implicit) * t)
