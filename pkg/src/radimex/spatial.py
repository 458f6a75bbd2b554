"""Second-order finite-volume operators on the uniform grid.

Advective fluxes use the local Lax-Friedrichs (Rusanov) flux on limited
linear reconstructions of the primitive variables ``(rho, u, p, E_r)``;
diffusive fluxes use central differences with harmonic-mean face
coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .physics import EosIdealGas
from .state import ERAD, ETOT, MOM, RHO, TEMP, CellState, Grid1D, PrimitiveCell, primitive_to_conserved

# Row indices of reconstructed primitive arrays
W_RHO, W_U, W_P, W_ER = range(4)


@dataclass(frozen=True)
class FixedState:
    """Ghost cells hold constant left/right primitive states."""

    left: PrimitiveCell
    right: PrimitiveCell

    def ghost_column(self, side: str, eos: EosIdealGas) -> np.ndarray:
        prim = self.left if side == "left" else self.right
        return primitive_to_conserved(prim, eos).q.reshape(5)


@dataclass(frozen=True)
class NoFlux:
    """All boundary face fluxes, advective and diffusive, are zero."""


BoundaryCondition = FixedState | NoFlux


@dataclass
class Reconstruction:
    WL: np.ndarray  # (4, n_faces) state on the left of each face
    WR: np.ndarray  # (4, n_faces) state on the right of each face
    phi: np.ndarray  # (4, n_cells) limiter coefficients of interior cells


@dataclass
class FaceFluxes:
    F: np.ndarray  # (4, n_faces): rho, rho*u, rho*e_t, E_r
    alpha: np.ndarray  # (n_faces,) shared dissipation speed

    @property
    def F_energy(self) -> np.ndarray:
        return self.F[2] + self.F[3]


@dataclass
class ExplicitRates:
    values: np.ndarray  # (5, n_cells), T row identically zero
    fluxes: FaceFluxes
    u_face: np.ndarray

    @property
    def d_rho(self):
        return self.values[RHO]

    @property
    def d_mom(self):
        return self.values[MOM]

    @property
    def d_rho_et(self):
        return self.values[ETOT]

    @property
    def d_Er(self):
        return self.values[ERAD]

    @property
    def d_T(self):
        return self.values[TEMP]

    def boundary_energy_inflow(self) -> float:
        """Net advective energy flux into the domain per unit area and time."""
        FE = self.fluxes.F_energy
        return float(FE[0] - FE[-1])


def fill_ghosts(grid: Grid1D, state: CellState, bc: BoundaryCondition, eos: EosIdealGas) -> CellState:
    out = state.copy()
    g, n = grid.n_ghost, grid.n_cells
    if isinstance(bc, FixedState):
        out.q[:, :g] = bc.ghost_column("left", eos)[:, None]
        out.q[:, g + n :] = bc.ghost_column("right", eos)[:, None]
    elif isinstance(bc, NoFlux):
        out.q[:, :g] = out.q[:, g : g + 1]
        out.q[:, g + n :] = out.q[:, g + n - 1 : g + n]
    else:
        raise TypeError(f"unsupported boundary condition {bc!r}")
    return out


def primitive_rows(q: np.ndarray, eos: EosIdealGas) -> np.ndarray:
    """Stack ``(rho, u, p, E_r)`` from conserved rows."""
    rho = q[RHO]
    u = q[MOM] / rho
    p = (eos.gamma - 1.0) * (q[ETOT] - 0.5 * rho * u * u)
    return np.array([rho, u, p, q[ERAD]])


def barth_jespersen(W: np.ndarray):
    """Limited half-cell increments for every cell with two neighbours.

    Returns ``(delta, phi)`` for cells ``1 .. N-2`` where ``delta`` is the
    limited change from cell mean to right face (the left face gets ``-delta``).
    """
    wm, w0, wp = W[:, :-2], W[:, 1:-1], W[:, 2:]
    # 1D least squares with symmetric neighbours is the central difference
    delta = 0.25 * (wp - wm)
    dmax = np.maximum(np.maximum(wm, wp), w0) - w0
    dmin = np.minimum(np.minimum(wm, wp), w0) - w0
    mag = np.abs(delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = np.minimum(1.0, np.minimum(dmax, -dmin) / mag)
    # zero central slope: flat data keeps phi = 1, a local extremum gets 0
    phi = np.where(mag > 0, phi, np.where(dmax == dmin, 1.0, 0.0))
    return phi * delta, phi


def _reconstruct_filled(grid: Grid1D, W: np.ndarray) -> Reconstruction:
    g, n = grid.n_ghost, grid.n_cells
    dlim, phi = barth_jespersen(W)
    # dlim column j belongs to cell j + 1
    lo, hi = g - 1, g + n  # cells adjacent to the n + 1 faces
    WL = W[:, lo:hi] + dlim[:, lo - 1 : hi - 1]
    WR = W[:, lo + 1 : hi + 1] - dlim[:, lo : hi]
    return Reconstruction(WL=WL, WR=WR, phi=phi[:, g - 1 : g - 1 + n])


def reconstruct(grid: Grid1D, state: CellState, bc: BoundaryCondition, eos: EosIdealGas) -> Reconstruction:
    filled = fill_ghosts(grid, state, bc, eos)
    return _reconstruct_filled(grid, primitive_rows(filled.q, eos))


def physical_state(W: np.ndarray, eos: EosIdealGas):
    """Conserved vector ``U`` and physical flux ``F`` for primitive rows ``W``."""
    rho, u, p, Er = W
    p_r = Er / 3.0
    rho_et = p / (eos.gamma - 1.0) + 0.5 * rho * u * u
    U = np.array([rho, rho * u, rho_et, Er])
    F = np.array([rho * u, rho * u * u + p + p_r, (rho_et + p + p_r) * u, Er * u])
    return U, F


def signal_speed(W: np.ndarray, eos: EosIdealGas) -> np.ndarray:
    rho, u, p, _ = W
    return np.abs(u) + np.sqrt(eos.gamma * np.maximum(p, 0.0) / rho)


def rusanov_flux(WL: np.ndarray, WR: np.ndarray, eos: EosIdealGas) -> FaceFluxes:
    if np.any(WL[W_RHO] <= 0) or np.any(WR[W_RHO] <= 0) or np.any(WL[W_P] < 0) or np.any(WR[W_P] < 0):
        raise DomainError("face state with non-positive density or negative pressure")
    UL, FL = physical_state(WL, eos)
    UR, FR = physical_state(WR, eos)
    alpha = np.maximum(signal_speed(WL, eos), signal_speed(WR, eos))
    F = 0.5 * (FL + FR) - 0.5 * alpha * (UR - UL)
    return FaceFluxes(F=F, alpha=alpha)


def total_energy_rusanov_flux(WL: np.ndarray, WR: np.ndarray, eos: EosIdealGas, alpha: np.ndarray) -> np.ndarray:
    """Rusanov flux of ``F_E = (rho e_t + p + p_r + E_r) u`` with a given ``alpha``."""
    UL, FL = physical_state(WL, eos)
    UR, FR = physical_state(WR, eos)
    EL, ER = UL[2] + UL[3], UR[2] + UR[3]
    FEL, FER = FL[2] + FL[3], FR[2] + FR[3]
    return 0.5 * (FEL + FER) - 0.5 * alpha * (ER - EL)


def explicit_operator(grid: Grid1D, state: CellState, bc: BoundaryCondition, eos: EosIdealGas) -> ExplicitRates:
    """Hydrodynamics plus radiation material-motion rates (T row zero).

    The ``p_r div(u)`` source is added to ``rho e_t`` and subtracted from
    ``E_r`` with one shared discretization so it cancels in the total energy.
    """
    filled = fill_ghosts(grid, state, bc, eos)
    rec = _reconstruct_filled(grid, primitive_rows(filled.q, eos))
    fluxes = rusanov_flux(rec.WL, rec.WR, eos)
    u_face = 0.5 * (rec.WL[W_U] + rec.WR[W_U])
    if isinstance(bc, NoFlux):
        fluxes.F[:, 0] = 0.0
        fluxes.F[:, -1] = 0.0
        u_face[0] = 0.0
        u_face[-1] = 0.0
    h = grid.h
    F = fluxes.F
    div_F = (F[:, 1:] - F[:, :-1]) / h
    div_u = (u_face[1:] - u_face[:-1]) / h
    p_r_cell = filled.Er[grid.interior] / 3.0
    work = p_r_cell * div_u

    rates = np.zeros((5, grid.n_cells))
    rates[RHO] = -div_F[0]
    rates[MOM] = -div_F[1]
    rates[ETOT] = -div_F[2] + work
    rates[ERAD] = -div_F[3] - work
    return ExplicitRates(values=rates, fluxes=fluxes, u_face=u_face)


def face_diffusivity(grid: Grid1D, D_full: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Harmonic-mean ``D`` on the ``n + 1`` faces; zero on NoFlux boundaries."""
    g, n = grid.n_ghost, grid.n_cells
    Dl, Dr = D_full[g - 1 : g + n], D_full[g : g + n + 1]
    s = Dl + Dr
    with np.errstate(divide="ignore", invalid="ignore"):
        Df = np.where(s > 0, 2.0 * Dl * Dr / s, 0.0)
    if isinstance(bc, NoFlux):
        Df[0] = 0.0
        Df[-1] = 0.0
    return Df


def diffusion_face_flux(grid: Grid1D, Er_full: np.ndarray, D_face: np.ndarray) -> np.ndarray:
    """``G = D_face (E_{k+1} - E_k) / h`` on each face."""
    g, n = grid.n_ghost, grid.n_cells
    return D_face * (Er_full[g : g + n + 1] - Er_full[g - 1 : g + n]) / grid.h


def diffusion_operator(grid: Grid1D, Er_full: np.ndarray, D_full: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    """Per-cell ``div(D grad E_r)`` in conservative form.

    ``Er_full`` and ``D_full`` include ghost cells; ghost values are only read
    on FixedState boundaries.
    """
    G = diffusion_face_flux(grid, Er_full, face_diffusivity(grid, D_full, bc))
    return (G[1:] - G[:-1]) / grid.h


def temperature_source_LT(
    grid: Grid1D,
    state: CellState,
    bc: BoundaryCondition,
    eos: EosIdealGas,
    rates: ExplicitRates | None = None,
) -> np.ndarray:
    """``N_E^{rho e_t} - u N_E^{rho u} + (u^2 - e_t) N_E^rho`` per interior cell."""
    if rates is None:
        rates = explicit_operator(grid, state, bc, eos)
    sl = grid.interior
    rho = state.rho[sl]
    u = state.mom[sl] / rho
    e_t = state.rho_et[sl] / rho
    return rates.d_rho_et - u * rates.d_mom + (u * u - e_t) * rates.d_rho
