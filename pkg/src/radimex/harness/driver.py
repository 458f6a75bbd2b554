"""Simulation driver: time loop, snapshots, energy bookkeeping."""

from __future__ import annotations

import json
import math
import time as _time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import PreconditionError, RadimexError, SimulationError
from ..integrators import RadHydroModel, StepController, compute_dt, make_stepper
from ..physics import Constants, EosIdealGas
from ..problems import ProblemSetup, setup_problem, sync_temperature_interior
from ..spatial import NoFlux
from ..state import CellState, Grid1D, PrimitiveCell, primitive_to_conserved, read_snapshot, total_energy, write_snapshot
from .config import RunConfig

# Relative slack for deciding that a step lands on an output time
_LAND_TOL = 1e-10


@dataclass
class RunReport:
    problem: str
    scheme: str
    grid: Grid1D
    eos: EosIdealGas
    bc_kind: str
    snapshots: dict[float, CellState] = field(default_factory=dict)
    dts: list[float] = field(default_factory=list)
    drift: list[float] = field(default_factory=list)  # per step, relative to initial energy
    inflow: list[float] = field(default_factory=list)  # per step boundary energy inflow
    initial_energy: float = 0.0
    final_energy: float = 0.0
    nonlinear_iterations: int = 0
    explicit_evals: int = 0
    implicit_solves: int = 0
    wallclock: float = 0.0
    errors: dict | None = None
    out_dir: Path | None = None

    @property
    def steps(self) -> int:
        return len(self.dts)

    @property
    def times(self) -> list[float]:
        return sorted(self.snapshots)

    @property
    def final_state(self) -> CellState:
        return self.snapshots[max(self.snapshots)]

    @property
    def cumulative_drift(self) -> float:
        """``(E_final - E_0 - total inflow) / E_0``."""
        if self.initial_energy == 0.0:
            return 0.0
        return (self.final_energy - self.initial_energy - math.fsum(self.inflow)) / self.initial_energy

    def summary(self) -> dict:
        return {
            "problem": self.problem,
            "scheme": self.scheme,
            "bc": self.bc_kind,
            "n_cells": self.grid.n_cells,
            "x_min": self.grid.x_min,
            "x_max": self.grid.x_max,
            "gamma": self.eos.gamma,
            "c_v": self.eos.c_v,
            "steps": self.steps,
            "output_times": self.times,
            "initial_energy": self.initial_energy,
            "final_energy": self.final_energy,
            "cumulative_drift": self.cumulative_drift,
            "max_step_drift": max((abs(d) for d in self.drift), default=0.0),
            "nonlinear_iterations": self.nonlinear_iterations,
            "explicit_evals": self.explicit_evals,
            "implicit_solves": self.implicit_solves,
            "wallclock_s": self.wallclock,
            "dts": self.dts,
            "drift": self.drift,
            "inflow": self.inflow,
            "errors": self.errors,
        }

    def save(self, out_dir: str | Path, snapshots: bool = True) -> Path:
        """Write ``report.json`` and one CSV snapshot per output time."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        meta = self.summary()
        if snapshots:
            files = {}
            for t, st in sorted(self.snapshots.items()):
                name = snapshot_name(t)
                write_snapshot(out_dir / "snapshots" / name, self.grid, st, self.eos)
                files[repr(t)] = name
            meta["snapshots"] = files
        path = out_dir / "report.json"
        path.write_text(json.dumps(meta, indent=1))
        self.out_dir = out_dir
        return path


def snapshot_name(t: float) -> str:
    return f"t_{t:.6e}.csv"


def load_report(out_dir: str | Path) -> RunReport:
    """Rebuild a report (including snapshots) from a directory written by ``save``."""
    out_dir = Path(out_dir)
    meta = json.loads((out_dir / "report.json").read_text())
    grid = Grid1D(meta["x_min"], meta["x_max"], meta["n_cells"])
    eos = EosIdealGas(meta["gamma"], meta["c_v"])
    rep = RunReport(meta["problem"], meta["scheme"], grid, eos, meta["bc"])
    for key, name in meta.get("snapshots", {}).items():
        cols = read_snapshot(out_dir / "snapshots" / name)
        prim = PrimitiveCell(rho=cols["rho"], u=cols["u"], p=cols["p"], T=cols["T"], Er=cols["Er"])
        q = np.zeros((5, grid.n_total))
        q[:, grid.interior] = primitive_to_conserved(prim, eos).q
        rep.snapshots[float(key)] = CellState(q)
    rep.dts = list(meta["dts"])
    rep.drift = list(meta["drift"])
    rep.inflow = list(meta["inflow"])
    rep.initial_energy = meta["initial_energy"]
    rep.final_energy = meta["final_energy"]
    rep.nonlinear_iterations = meta["nonlinear_iterations"]
    rep.wallclock = meta["wallclock_s"]
    rep.errors = meta.get("errors")
    rep.out_dir = out_dir
    return rep


def _next_output(times, t):
    for tout in times:
        if tout > t * (1 + _LAND_TOL) + 1e-300:
            return tout
    return None


def run(
    config: RunConfig,
    constants: Constants = Constants(),
    setup: ProblemSetup | None = None,
    max_steps: int | None = None,
    save: bool | None = None,
) -> RunReport:
    """Integrate from t = 0 to the problem's t_final.

    The step size is shrunk (never enlarged) to land exactly on each output
    time. ``max_steps`` stops early after that many steps; the state reached
    is then stored as the final snapshot. Errors raised inside a step are
    re-raised as SimulationError carrying the step index and time.
    """
    if setup is None:
        setup = setup_problem(config.problem, constants)
    grid, eos = setup.grid, setup.eos
    model = RadHydroModel(grid, eos, setup.opacity, setup.bc, constants, config.solver)
    step = make_stepper(config.scheme)
    t_end = config.problem.t_final
    times = sorted(set(config.output_times) | {0.0, t_end})

    report = RunReport(setup.name, config.scheme, grid, eos, "NoFlux" if isinstance(setup.bc, NoFlux) else "FixedState")
    state = setup.state.copy()
    report.initial_energy = total_energy(grid, state)
    if 0.0 in config.output_times or t_end == 0.0:
        report.snapshots[0.0] = state.copy()

    t, k = 0.0, 0
    energy = report.initial_energy
    start = _time.perf_counter()
    while t < t_end and (max_steps is None or k < max_steps):
        state = sync_temperature_interior(grid, state, eos)
        try:
            dt = compute_dt(state, grid, config.controller, eos)
        except RadimexError as exc:
            raise SimulationError(f"step {k}, t={t:.6e}: {exc}", k, t, exc) from exc
        tout = _next_output(times, t)
        landed = t + dt >= tout * (1 - _LAND_TOL)
        if landed:
            dt = tout - t
        try:
            new_state, stats = step(state, dt, model)
        except (RadimexError, ArithmeticError, ValueError) as exc:
            raise SimulationError(f"step {k}, t={t:.6e}: {type(exc).__name__}: {exc}", k, t, exc) from exc
        if not np.all(np.isfinite(new_state.q)):
            raise SimulationError(f"step {k}, t={t:.6e}: non-finite state", k, t)
        state = new_state
        t = tout if landed else t + dt
        k += 1
        new_energy = total_energy(grid, state)
        report.dts.append(dt)
        report.inflow.append(stats.boundary_energy_inflow)
        report.drift.append((new_energy - energy - stats.boundary_energy_inflow) / report.initial_energy)
        energy = new_energy
        report.nonlinear_iterations += stats.nonlinear_iterations
        report.explicit_evals += stats.explicit_evals
        report.implicit_solves += stats.implicit_solves
        if landed and (tout in config.output_times or tout == t_end):
            report.snapshots[tout] = state.copy()
    report.wallclock = _time.perf_counter() - start
    report.final_energy = energy
    if t not in report.snapshots:
        report.snapshots[t] = state.copy()
    if save is None:
        save = config.out_dir is not None
    if save:
        if config.out_dir is None:
            raise PreconditionError("save requested but no output directory configured")
        report.save(config.out_dir, snapshots=config.write_snapshots)
    return report


def fixed_dt_config(config: RunConfig, dt: float, scheme: str | None = None) -> RunConfig:
    """Copy of ``config`` with a fixed step, no file output and only the final time."""
    problem = replace(config.problem, output_times=(config.problem.t_final,))
    return config.with_(
        problem=problem,
        scheme=scheme or config.scheme,
        controller=StepController(cfl=None, dt_fixed=dt),
        out_dir=None,
    )
