"""Linearly implicit radiation/temperature stage solve.

With coefficients frozen at a starred state, each stage solves

    E_r = b_E + w (div(D* grad E_r) - sE c E_r + sP a c T^4)
    T   = b_T + w / (rho* c_v*) (sE c E_r - sP a c T^4 + L_T*)

and then sets ``rho e_t = b_e + w (sE c E_r - sP a c T^4)``.  The only
nonlinearity is the emission ``T^4``; each outer iteration linearizes it
about the current temperature, eliminates ``T`` cell by cell and solves one
tridiagonal system for ``E_r``.  That makes the outer loop a Newton
iteration on the coupled system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NegativeStateError, NonConvergenceError, SingularSystemError
from .physics import OPACITY_FLOOR, Constants, EosIdealGas, OpacityModel, diffusion_coefficient, opacities
from .spatial import (
    BoundaryCondition,
    ExplicitRates,
    FixedState,
    NoFlux,
    diffusion_face_flux,
    face_diffusivity,
    temperature_source_LT,
)
from .state import CellState, Grid1D


@dataclass(frozen=True)
class SolverSettings:
    rel_tol: float = 1e-10
    abs_tol_T: float = 1e-8
    max_outer_iters: int = 100
    temperature_floor: float = 1e-6
    Er_floor: float = 0.0
    max_floor_hits: int = 10

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")


@dataclass(frozen=True)
class StageContext:
    """Coefficients frozen at one starred state (interior cells)."""

    grid: Grid1D
    bc: BoundaryCondition
    constants: Constants
    sigma_E: np.ndarray
    sigma_p: np.ndarray
    D: np.ndarray
    D_face: np.ndarray  # n + 1 faces, zero on NoFlux walls
    Er_left: float  # Dirichlet ghost values (FixedState only)
    Er_right: float
    rho: np.ndarray
    c_v: np.ndarray
    L_T: np.ndarray

    def exchange(self, Er, T):
        """Net absorption minus emission ``sE c E_r - sP a c T^4``."""
        c, a = self.constants.c, self.constants.a
        return self.sigma_E * c * Er - self.sigma_p * a * c * T**4

    def diffusion(self, Er):
        return np.diff(self.face_flux(Er)) / self.grid.h

    def face_flux(self, Er):
        g = self.grid.n_ghost
        full = np.empty(Er.size + 2 * g)
        full[:g] = self.Er_left
        full[g:-g] = Er
        full[-g:] = self.Er_right
        return diffusion_face_flux(self.grid, full, self.D_face)


@dataclass(frozen=True)
class StageRhs:
    b_rho_et: np.ndarray
    b_Er: np.ndarray
    b_T: np.ndarray
    w: float

    def __post_init__(self):
        if self.w < 0:
            raise ValueError("implicit weight must be non-negative")


@dataclass
class StageSolution:
    Er: np.ndarray
    T: np.ndarray
    rho_et: np.ndarray
    iterations: int
    residual: float


def freeze(
    grid: Grid1D,
    starred: CellState,
    bc: BoundaryCondition,
    eos: EosIdealGas,
    opacity: OpacityModel,
    constants: Constants,
    rates: ExplicitRates | None = None,
    with_LT: bool = True,
) -> StageContext:
    """Evaluate opacities, ``D`` and ``L_T`` at a starred state.

    ``rates`` may carry an already computed explicit operator of ``starred``
    so it is not evaluated twice. ``with_LT=False`` gives the operator-split
    temperature equation, which has no hydrodynamic source.
    """
    sl = grid.interior
    rho = starred.rho[sl].copy()
    T = starred.T[sl]
    sa, ss, sE, sP = opacities(opacity, rho, T)
    D = diffusion_coefficient(constants, np.maximum(sa + ss, OPACITY_FLOOR), 0.0)

    g = grid.n_ghost
    D_full = np.empty(grid.n_total)
    D_full[sl] = D
    Er_left = Er_right = 0.0
    if isinstance(bc, FixedState):
        for side, prim, idx in (("left", bc.left, slice(0, g)), ("right", bc.right, slice(g + grid.n_cells, None))):
            ga, gs, _, _ = opacities(opacity, prim.rho, prim.T)
            D_full[idx] = diffusion_coefficient(constants, max(ga + gs, OPACITY_FLOOR), 0.0)
        Er_left, Er_right = float(bc.left.Er), float(bc.right.Er)
    elif isinstance(bc, NoFlux):
        D_full[:g] = D[0]
        D_full[g + grid.n_cells :] = D[-1]
    if with_LT:
        L_T = temperature_source_LT(grid, starred, bc, eos, rates)
    else:
        L_T = np.zeros(grid.n_cells)
    return StageContext(
        grid=grid,
        bc=bc,
        constants=constants,
        sigma_E=np.broadcast_to(sE, rho.shape).copy(),
        sigma_p=np.broadcast_to(sP, rho.shape).copy(),
        D=np.broadcast_to(D, rho.shape).copy(),
        D_face=face_diffusivity(grid, D_full, bc),
        Er_left=Er_left,
        Er_right=Er_right,
        rho=rho,
        c_v=np.full(rho.shape, eos.c_v),
        L_T=L_T,
    )


def tridiagonal_solve(lower, diag, upper, rhs):
    """Solve ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]``.

    ``lower[0]`` and ``upper[-1]`` are ignored.
    """
    diag = np.asarray(diag, dtype=float)
    n = diag.size
    if n == 1:
        if diag[0] == 0 or not np.isfinite(diag[0]):
            raise SingularSystemError("zero pivot")
        return np.asarray(rhs, dtype=float) / diag
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("non-finite solution; pivot underflow")
    return x


def stage_residuals(ctx: StageContext, rhs: StageRhs, Er, T):
    """Scaled residuals of the E_r and T equations (per cell)."""
    c, a = ctx.constants.c, ctx.constants.a
    w = rhs.w
    kappa = w / (ctx.rho * ctx.c_v)
    absorb = ctx.sigma_E * c * Er
    emit = ctx.sigma_p * a * c * T**4
    diff = ctx.diffusion(Er)
    rE = Er - rhs.b_Er - w * (diff - absorb + emit)
    rT = T - rhs.b_T - kappa * (absorb - emit + ctx.L_T)
    sE = np.abs(Er) + np.abs(rhs.b_Er) + w * (np.abs(diff) + np.abs(absorb) + emit) + 1e-300
    sT = np.abs(T) + np.abs(rhs.b_T) + kappa * (np.abs(absorb) + emit + np.abs(ctx.L_T))
    return rE / sE, rT / sT, rT


def solve_stage(ctx: StageContext, rhs: StageRhs, settings: SolverSettings = SolverSettings()) -> StageSolution:
    if rhs.w == 0.0:
        return StageSolution(
            Er=np.array(rhs.b_Er, dtype=float),
            T=np.array(rhs.b_T, dtype=float),
            rho_et=np.array(rhs.b_rho_et, dtype=float),
            iterations=0,
            residual=0.0,
        )
    c, a = ctx.constants.c, ctx.constants.a
    h2 = ctx.grid.h ** 2
    w = rhs.w
    kappa = w / (ctx.rho * ctx.c_v)
    sEc = ctx.sigma_E * c
    cf = w * ctx.D_face / h2
    lower = -cf[:-1]
    upper = -cf[1:]
    diag_base = 1.0 + cf[:-1] + cf[1:] + w * sEc
    bnd = np.zeros_like(diag_base)
    bnd[0] += cf[0] * ctx.Er_left
    bnd[-1] += cf[-1] * ctx.Er_right

    T = np.maximum(np.asarray(rhs.b_T, dtype=float), settings.temperature_floor)
    floor_hits = 0
    resid = np.inf
    for it in range(1, settings.max_outer_iters + 1):
        # emission ~ P T - Q, linearized about the current T
        P = 4.0 * ctx.sigma_p * a * c * T**3
        Q = 3.0 * ctx.sigma_p * a * c * T**4
        denom = 1.0 + kappa * P
        alpha0 = (rhs.b_T + kappa * (ctx.L_T + Q)) / denom
        alpha1 = kappa * sEc / denom
        diag = diag_base - w * P * alpha1
        Er = tridiagonal_solve(lower, diag, upper, rhs.b_Er + w * (P * alpha0 - Q) + bnd)
        if np.any(Er < settings.Er_floor):
            floor_hits += int(np.count_nonzero(Er < settings.Er_floor))
            Er = np.maximum(Er, settings.Er_floor)
        T = alpha0 + alpha1 * Er
        if np.any(T < settings.temperature_floor):
            floor_hits += int(np.count_nonzero(T < settings.temperature_floor))
            T = np.maximum(T, settings.temperature_floor)
        if floor_hits > settings.max_floor_hits:
            raise NegativeStateError(f"stage solve hit state floors {floor_hits} times; reduce dt")

        sE, sT, rT = stage_residuals(ctx, rhs, Er, T)
        resid = max(np.max(np.abs(sE)), np.max(np.abs(sT)))
        t_ok = np.all((np.abs(sT) <= settings.rel_tol) | (np.abs(rT) <= settings.abs_tol_T))
        if np.max(np.abs(sE)) <= settings.rel_tol and t_ok:
            rho_et = rhs.b_rho_et + w * ctx.exchange(Er, T)
            return StageSolution(Er=Er, T=T, rho_et=rho_et, iterations=it, residual=float(resid))
    raise NonConvergenceError(
        f"stage solve did not converge in {settings.max_outer_iters} iterations (residual {resid:.3e})",
        residual=float(resid),
        iterations=settings.max_outer_iters,
    )
