"""Radiative shock problems: jump conditions, presets and initial states."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import pi, sqrt

import numpy as np

from .errors import NonConvergenceError, PreconditionError
from .physics import ConstantOpacity, Constants, EosIdealGas, OpacityModel, PowerLawOpacity, sound_speed
from .spatial import BoundaryCondition, FixedState, NoFlux, fill_ghosts
from .state import CellState, Grid1D, PrimitiveCell, primitive_to_conserved, sync_temperature

NS = 1e-9


@dataclass(frozen=True)
class ShockProblemSpec:
    name: str
    mach: float
    eos: EosIdealGas
    opacity: OpacityModel
    rho_u: float
    T_mu: float
    T_ru: float
    shock_speed: float
    x_min: float
    x_max: float
    n_cells: int
    shock_position: float
    t_final: float
    output_times: tuple[float, ...]

    def __post_init__(self):
        if not self.mach > 0:
            raise ValueError("Mach number must be positive")
        if any(t < 0 or t > self.t_final * (1 + 1e-12) for t in self.output_times):
            raise ValueError("output times must lie in [0, t_final]")


@dataclass(frozen=True)
class PerturbedBoxSpec:
    """Closed box (NoFlux walls) holding a perturbed equilibrium state."""

    name: str = "perturbed"
    eos: EosIdealGas = EosIdealGas(5.0 / 3.0, 1.447e12)
    opacity: OpacityModel = ConstantOpacity(577.35, 0.0)
    rho0: float = 1.0
    T0: float = 100.0
    amplitude: float = 0.1
    velocity_amplitude: float = 1e6
    x_min: float = 0.0
    x_max: float = 0.06
    n_cells: int = 128
    t_final: float = 2.0 * NS
    output_times: tuple[float, ...] = (0.0, 1.0 * NS, 2.0 * NS)


@dataclass
class JumpStates:
    """Upstream/downstream primitive states in the shock frame."""

    upstream: PrimitiveCell
    downstream: PrimitiveCell


@dataclass
class ProblemSetup:
    name: str
    grid: Grid1D
    state: CellState
    bc: BoundaryCondition
    eos: EosIdealGas
    opacity: OpacityModel
    t_final: float
    output_times: tuple[float, ...]
    jump: JumpStates | None = field(default=None, repr=False)


_TABLE_EOS = EosIdealGas(5.0 / 3.0, 1.447e12)
_MATERIAL_SMALL_M = ConstantOpacity(577.35, 0.0)
# Kramers-type absorption; scattering proportional to density
_MATERIAL_M45 = PowerLawOpacity(coeff_a=4.494e8, rho_exp_a=2.0, T_exp_a=-3.5, coeff_s=0.4006, rho_exp_s=1.0)
_NS_TIMES = (0.0, 0.25 * NS, 0.5 * NS, 0.75 * NS)

PRESETS: dict[str, ShockProblemSpec | PerturbedBoxSpec] = {
    "mach1.2": ShockProblemSpec(
        "mach1.2", 1.2, _TABLE_EOS, _MATERIAL_SMALL_M, 1.0, 100.0, 100.0, 0.0,
        0.0, 0.06, 240, 0.03, 0.75 * NS, _NS_TIMES,
    ),
    "mach3": ShockProblemSpec(
        "mach3", 3.0, _TABLE_EOS, _MATERIAL_SMALL_M, 1.0, 100.0, 100.0, 0.0,
        0.0, 0.06, 240, 0.03, 0.75 * NS, _NS_TIMES,
    ),
    # The shock moves left at ~5.7e8 cm/s, i.e. ~86 cm over 150 ns, so the
    # domain must be wide enough to keep it inside.
    "mach45": ShockProblemSpec(
        "mach45", 45.0, _TABLE_EOS, _MATERIAL_M45, 1.0, 100.0, 100.0, -5.7054e8,
        0.0, 100.0, 240, 95.0, 150.0 * NS, (0.0, 50.0 * NS, 100.0 * NS, 150.0 * NS),
    ),
    "perturbed": PerturbedBoxSpec(),
}


def preset(name: str):
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown problem preset {name!r}; available: {sorted(PRESETS)}") from None


def _upstream(spec: ShockProblemSpec, constants: Constants) -> PrimitiveCell:
    eos = spec.eos
    p_u = (eos.gamma - 1.0) * spec.rho_u * eos.c_v * spec.T_mu
    u_u = spec.mach * sound_speed(eos, spec.rho_u, p_u)
    return PrimitiveCell(rho=spec.rho_u, u=u_u, p=p_u, T=spec.T_mu, Er=constants.a * spec.T_ru**4)


def jump_hydro(spec: ShockProblemSpec, constants: Constants = Constants()) -> JumpStates:
    """Closed-form jump neglecting radiation pressure and energy."""
    if spec.mach < 1:
        raise PreconditionError("jump conditions need M >= 1")
    g, M2 = spec.eos.gamma, spec.mach**2
    up = _upstream(spec, constants)
    rho_d = up.rho * (g + 1.0) * M2 / (2.0 + (g - 1.0) * M2)
    u_d = up.u * up.rho / rho_d
    p_d = up.p * (1.0 + 2.0 * g * (M2 - 1.0) / (g + 1.0))
    T_d = p_d / ((g - 1.0) * rho_d * spec.eos.c_v)
    down = PrimitiveCell(rho=rho_d, u=u_d, p=p_d, T=T_d, Er=constants.a * T_d**4)
    return JumpStates(up, down)


def _fluxes(prim: PrimitiveCell, eos: EosIdealGas, shock_speed: float = 0.0):
    u = prim.u - shock_speed
    p_r = prim.Er / 3.0
    E = prim.p / (eos.gamma - 1.0) + 0.5 * prim.rho * u * u + prim.Er
    return np.array([prim.rho * u, prim.rho * u * u + prim.p + p_r, (E + prim.p + p_r) * u])


def jump_residuals(jump: JumpStates, eos: EosIdealGas, shock_speed: float = 0.0) -> np.ndarray:
    """Mass, momentum and total-energy flux mismatch scaled by upstream fluxes.

    Velocities are taken relative to ``shock_speed`` so lab-frame states can
    be checked directly.
    """
    fu = _fluxes(jump.upstream, eos, shock_speed)
    fd = _fluxes(jump.downstream, eos, shock_speed)
    return (fd - fu) / np.abs(fu)


def _newton_jump(up: PrimitiveCell, eos: EosIdealGas, a: float, x0: np.ndarray, tol: float, max_iter: int):
    g, cv = eos.gamma, eos.c_v
    target = _fluxes(up, eos)
    scale = np.abs(target)

    def residual(x):
        rho, u, T = x
        return np.array(
            [
                rho * u,
                rho * u * u + (g - 1.0) * rho * cv * T + a * T**4 / 3.0,
                (g * rho * cv * T + 0.5 * rho * u * u + 4.0 / 3.0 * a * T**4) * u,
            ]
        ) - target

    x = x0.astype(float).copy()
    r = residual(x) / scale
    for it in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            return x, r
        rho, u, T = x
        J = np.array(
            [
                [u, rho, 0.0],
                [u * u + (g - 1.0) * cv * T, 2.0 * rho * u, (g - 1.0) * rho * cv + 4.0 / 3.0 * a * T**3],
                [
                    (g * cv * T + 0.5 * u * u) * u,
                    g * rho * cv * T + 1.5 * rho * u * u + 4.0 / 3.0 * a * T**4,
                    (g * rho * cv + 16.0 / 3.0 * a * T**3) * u,
                ],
            ]
        ) / scale[:, None]
        dx = np.linalg.solve(J, -r)
        # damp to keep rho, u, T positive and the residual decreasing
        lam = 1.0
        while lam > 1e-8:
            xn = x + lam * dx
            if np.all(xn > 0):
                rn = residual(xn) / scale
                if np.max(np.abs(rn)) < np.max(np.abs(r)) or lam < 1e-3:
                    break
            lam *= 0.5
        x, r = xn, rn
    if np.max(np.abs(r)) <= tol:
        return x, r
    raise NonConvergenceError(
        f"jump solve did not converge (residual {np.max(np.abs(r)):.3e})",
        residual=float(np.max(np.abs(r))),
        iterations=max_iter,
    )


def jump_full(
    spec: ShockProblemSpec,
    initial_guess: JumpStates | None = None,
    constants: Constants = Constants(),
    tol: float = 1e-12,
    max_iter: int = 50,
) -> JumpStates:
    """Jump conditions including radiation pressure and energy.

    Both sides are in radiative equilibrium (``E_r = a T^4``). Newton's
    method starts from ``initial_guess`` (default: the hydrodynamic jump);
    if it fails, the radiation constant is ramped up from a tiny value and
    each solve starts from the previous one.
    """
    if initial_guess is None:
        initial_guess = jump_hydro(spec, constants)
    eos = spec.eos
    d = initial_guess.downstream
    x0 = np.array([d.rho, d.u, d.T], dtype=float)

    def solve_for(a, x_start):
        up = _upstream(spec, Constants(constants.c, a))
        x, _ = _newton_jump(up, eos, a, x_start, tol, max_iter)
        return up, x

    try:
        up, x = solve_for(constants.a, x0)
    except NonConvergenceError:
        x = x0
        for frac in np.logspace(-8, 0, 33):
            up, x = solve_for(constants.a * frac, x)
    rho, u, T = x
    down = PrimitiveCell(rho=rho, u=u, p=(eos.gamma - 1.0) * rho * eos.c_v * T, T=T, Er=constants.a * T**4)
    return JumpStates(up, down)


def _shifted(prim: PrimitiveCell, du: float) -> PrimitiveCell:
    return replace(prim, u=prim.u + du)


def build_initial_state(spec: ShockProblemSpec, jump: JumpStates, constants: Constants = Constants()):
    """Step profile with upstream left of ``shock_position``, in the lab frame.

    Returns ``(grid, state, bc)``.
    """
    grid = Grid1D(spec.x_min, spec.x_max, spec.n_cells)
    left = _shifted(jump.upstream, spec.shock_speed)
    right = _shifted(jump.downstream, spec.shock_speed)
    x = grid.centers
    up_mask = x < spec.shock_position
    prim = PrimitiveCell(
        rho=np.where(up_mask, left.rho, right.rho),
        u=np.where(up_mask, left.u, right.u),
        p=np.where(up_mask, left.p, right.p),
        T=np.where(up_mask, left.T, right.T),
        Er=np.where(up_mask, left.Er, right.Er),
    )
    interior = primitive_to_conserved(prim, spec.eos)
    q = np.zeros((5, grid.n_total))
    q[:, grid.interior] = interior.q
    bc = FixedState(left, right)
    state = fill_ghosts(grid, CellState(q), bc, spec.eos)
    state = sync_temperature_interior(grid, state, spec.eos)
    return grid, state, bc


def sync_temperature_interior(grid: Grid1D, state: CellState, eos: EosIdealGas) -> CellState:
    """EOS temperature sync applied to interior cells only."""
    out = state.copy()
    sl = grid.interior
    sub = sync_temperature(CellState(state.q[:, sl]), eos)
    out.q[:, sl] = sub.q
    return out


def build_perturbed_box(spec: PerturbedBoxSpec, constants: Constants = Constants()):
    grid = Grid1D(spec.x_min, spec.x_max, spec.n_cells)
    xi = (grid.centers - spec.x_min) / (spec.x_max - spec.x_min)
    rho = spec.rho0 * (1.0 + spec.amplitude * np.sin(2.0 * pi * xi))
    u = spec.velocity_amplitude * np.sin(pi * xi) ** 2
    T = spec.T0 * (1.0 + 0.5 * spec.amplitude * np.cos(2.0 * pi * xi))
    p = (spec.eos.gamma - 1.0) * rho * spec.eos.c_v * T
    Er = constants.a * spec.T0**4 * (1.0 + spec.amplitude * np.cos(4.0 * pi * xi))
    interior = primitive_to_conserved(PrimitiveCell(rho=rho, u=u, p=p, T=T, Er=Er), spec.eos)
    q = np.zeros((5, grid.n_total))
    q[:, grid.interior] = interior.q
    bc = NoFlux()
    state = fill_ghosts(grid, CellState(q), bc, spec.eos)
    return grid, sync_temperature_interior(grid, state, spec.eos), bc


def setup_problem(spec, constants: Constants = Constants()) -> ProblemSetup:
    if isinstance(spec, PerturbedBoxSpec):
        grid, state, bc = build_perturbed_box(spec, constants)
        return ProblemSetup(spec.name, grid, state, bc, spec.eos, spec.opacity, spec.t_final, tuple(spec.output_times))
    if spec.mach == 1.0:
        jump = jump_hydro(spec, constants)
    else:
        jump = jump_full(spec, jump_hydro(spec, constants), constants)
    grid, state, bc = build_initial_state(spec, jump, constants)
    return ProblemSetup(
        spec.name, grid, state, bc, spec.eos, spec.opacity, spec.t_final, tuple(spec.output_times), jump
    )
