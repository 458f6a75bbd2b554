"""Uniform 1D grid, cell-averaged state and variable conversions."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PositivityError
from .physics import EosIdealGas, pressure, radiation_pressure, temperature_from_eos

# Row indices into CellState.q
RHO, MOM, ETOT, ERAD, TEMP = range(5)
FIELD_NAMES = ("rho", "mom", "rho_et", "Er", "T")


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int
    n_ghost: int = 2

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("need at least one cell")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_ghost < 2:
            raise ValueError("second-order reconstruction needs n_ghost >= 2")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def n_total(self) -> int:
        return self.n_cells + 2 * self.n_ghost

    @property
    def interior(self) -> slice:
        return slice(self.n_ghost, self.n_ghost + self.n_cells)

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.h


@dataclass
class CellState:
    """Conserved variables plus the auxiliary temperature, ghosts included.

    ``q`` has shape ``(5, n_cells + 2 n_ghost)`` with rows
    ``rho, rho*u, rho*e_t, E_r, T``.
    """

    q: np.ndarray

    @classmethod
    def from_arrays(cls, rho, mom, rho_et, Er, T):
        return cls(np.array([rho, mom, rho_et, Er, T], dtype=float))

    @property
    def rho(self):
        return self.q[RHO]

    @property
    def mom(self):
        return self.q[MOM]

    @property
    def rho_et(self):
        return self.q[ETOT]

    @property
    def Er(self):
        return self.q[ERAD]

    @property
    def T(self):
        return self.q[TEMP]

    def copy(self) -> CellState:
        return CellState(self.q.copy())


@dataclass
class PrimitiveCell:
    rho: np.ndarray | float
    u: np.ndarray | float
    p: np.ndarray | float
    T: np.ndarray | float
    Er: np.ndarray | float

    @property
    def p_r(self):
        return radiation_pressure(self.Er)


def internal_energy(rho, mom, rho_et):
    """Specific internal energy ``e_t - u^2/2``; raises on non-positive values."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise PositivityError("density must be positive")
    u = mom / rho
    e_i = rho_et / rho - 0.5 * u * u
    if np.any(e_i <= 0):
        raise PositivityError("non-positive specific internal energy")
    return float(e_i) if np.ndim(e_i) == 0 else e_i


def sync_temperature(state: CellState, eos: EosIdealGas) -> CellState:
    """Reset T from the EOS evaluated at the hydrodynamic variables."""
    out = state.copy()
    e_i = internal_energy(state.rho, state.mom, state.rho_et)
    out.q[TEMP] = temperature_from_eos(eos, state.rho, e_i)
    return out


def conserved_to_primitive(state: CellState, eos: EosIdealGas) -> PrimitiveCell:
    e_i = internal_energy(state.rho, state.mom, state.rho_et)
    return PrimitiveCell(
        rho=state.rho.copy(),
        u=state.mom / state.rho,
        p=pressure(eos, state.rho, e_i),
        T=state.T.copy(),
        Er=state.Er.copy(),
    )


def primitive_to_conserved(prim: PrimitiveCell, eos: EosIdealGas) -> CellState:
    rho = np.asarray(prim.rho, dtype=float)
    if np.any(rho <= 0):
        raise PositivityError("density must be positive")
    if np.any(np.asarray(prim.p) <= 0):
        raise PositivityError("pressure must be positive")
    mom = rho * prim.u
    rho_et = prim.p / (eos.gamma - 1.0) + 0.5 * rho * prim.u * prim.u
    shape = np.broadcast(rho, prim.u, prim.p, prim.T, prim.Er).shape
    return CellState(
        np.array([np.broadcast_to(v, shape) for v in (rho, mom, rho_et, prim.Er, prim.T)], dtype=float)
    )


def total_energy(grid: Grid1D, state: CellState) -> float:
    """Sum of ``h (rho e_t + E_r)`` over interior cells (erg/cm^2)."""
    sl = grid.interior
    return grid.h * math.fsum(np.concatenate([state.rho_et[sl], state.Er[sl]]))


SNAPSHOT_HEADER = ("x", "rho", "u", "p", "T", "Er")


def write_snapshot(path, grid: Grid1D, state: CellState, eos: EosIdealGas) -> Path:
    """Write interior cells as CSV ``x,rho,u,p,T,Er`` at 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sl = grid.interior
    rho = state.rho[sl]
    u = state.mom[sl] / rho
    p = pressure(eos, rho, state.rho_et[sl] / rho - 0.5 * u * u)
    cols = (grid.centers, rho, u, p, state.T[sl], state.Er[sl])
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SNAPSHOT_HEADER)
        for row in zip(*cols):
            w.writerow([f"{v:.17g}" for v in row])
    return path


def read_snapshot(path) -> dict[str, np.ndarray]:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return {name: np.atleast_1d(data[name]) for name in SNAPSHOT_HEADER}
