"""Reference solutions and temporal convergence studies."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import PreconditionError, RadimexError
from ..integrators import ScalarPartitionedModel, StepController, compute_dt, limex_step, registry
from ..physics import Constants
from ..problems import setup_problem
from ..state import FIELD_NAMES, CellState, Grid1D
from .config import RunConfig
from .driver import RunReport, fixed_dt_config, run

NORMS = ("L1", "L2", "Linf")
VARIABLES = ("rho", "mom", "rho_et", "Er", "T")
REFERENCE_FACTOR = 32
# Errors below this (relative) are treated as roundoff when forming orders
ROUNDOFF = 1e-13


def relative_norms(diff: np.ndarray, ref: np.ndarray) -> dict[str, float]:
    """Discrete L1/L2/Linf of ``diff`` divided by the same norm of ``ref``.

    The cell width cancels on a uniform grid. Falls back to the absolute
    norm when the reference norm vanishes.
    """
    d, r = np.abs(diff), np.abs(ref)
    pairs = {
        "L1": (d.sum(), r.sum()),
        "L2": (math.sqrt(float(np.dot(d, d))), math.sqrt(float(np.dot(r, r)))),
        "Linf": (d.max(initial=0.0), r.max(initial=0.0)),
    }
    return {k: float(num / den) if den > 0 else float(num) for k, (num, den) in pairs.items()}


def error_norms(grid: Grid1D, state: CellState, reference: CellState, variables=VARIABLES) -> dict:
    """Per-variable relative norms of ``state - reference`` over interior cells."""
    sl = grid.interior
    out = {}
    for var in variables:
        row = FIELD_NAMES.index(var)
        out[var] = relative_norms(state.q[row, sl] - reference.q[row, sl], reference.q[row, sl])
    return out


@dataclass
class ConvergenceRow:
    dt: float
    errors: dict | None  # var -> norm -> value; None when unstable
    status: str = "OK"
    message: str = ""

    @property
    def stable(self) -> bool:
        return self.status == "OK"


@dataclass
class ConvergenceTable:
    scheme: str
    problem: str
    rows: list[ConvergenceRow] = field(default_factory=list)
    variables: tuple[str, ...] = VARIABLES

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: -r.dt)
        dts = [r.dt for r in self.rows]
        if len(set(dts)) != len(dts):
            raise PreconditionError("dt ladder entries must be distinct")

    @property
    def dts(self) -> list[float]:
        return [r.dt for r in self.rows]

    def errors(self, var: str, norm: str = "L2") -> list[float]:
        return [r.errors[var][norm] if r.stable else math.nan for r in self.rows]

    def orders(self, var: str, norm: str = "L2") -> list[float]:
        """log2-type ratio between consecutive rows; nan when undefined.

        Undefined means either row is unstable or both errors are at roundoff.
        """
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            if not (a.stable and b.stable):
                out.append(math.nan)
                continue
            ea, eb = a.errors[var][norm], b.errors[var][norm]
            if ea <= ROUNDOFF or eb <= ROUNDOFF:
                out.append(math.nan)
            else:
                out.append(math.log(ea / eb) / math.log(a.dt / b.dt))
        return out

    def fitted_order(self, var: str, norm: str = "L2") -> float:
        """Least-squares slope of log(error) against log(dt) over stable rows."""
        pts = [(r.dt, r.errors[var][norm]) for r in self.rows if r.stable and r.errors[var][norm] > ROUNDOFF]
        if len(pts) < 2:
            return math.nan
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        return float(np.polyfit(x, y, 1)[0])

    def to_csv(self, path: str | Path) -> Path:
        """One row per dt: status, then error and order per (variable, norm)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        header = ["dt", "status"]
        for var in self.variables:
            for norm in NORMS:
                header += [f"{var}_{norm}", f"{var}_{norm}_order"]
        orders = {(v, n): [math.nan] + self.orders(v, n) for v in self.variables for n in NORMS}
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["# scheme", self.scheme, "problem", self.problem])
            w.writerow(header)
            for i, r in enumerate(self.rows):
                line = [f"{r.dt:.17g}", r.status]
                for var in self.variables:
                    for norm in NORMS:
                        e = r.errors[var][norm] if r.stable else math.nan
                        line += [f"{e:.17g}", f"{orders[(var, norm)][i]:.6g}"]
                w.writerow(line)
        return path

    @classmethod
    def from_csv(cls, path: str | Path) -> "ConvergenceTable":
        with Path(path).open() as fh:
            rd = csv.reader(fh)
            meta = next(rd)
            header = next(rd)
            body = list(rd)
        variables = tuple(dict.fromkeys(h.rsplit("_", 1)[0] for h in header[2::2]))
        rows = []
        for line in body:
            rec = dict(zip(header, line))
            if rec["status"] == "OK":
                errs = {v: {n: float(rec[f"{v}_{n}"]) for n in NORMS} for v in variables}
            else:
                errs = None
            rows.append(ConvergenceRow(float(rec["dt"]), errs, rec["status"]))
        return cls(meta[1], meta[3], rows, variables)


def cfl_ladder(config: RunConfig, halvings: int = 4, constants: Constants = Constants()) -> list[float]:
    """Fixed-step ladder starting near the hydrodynamic CFL step.

    ``dt0 = t_final / ceil(t_final / dt_cfl)`` so every run ends exactly on
    ``t_final``; each further entry halves the step.
    """
    setup = setup_problem(config.problem, constants)
    cfl = config.controller.cfl if config.controller.cfl is not None else 0.5
    dt_cfl = compute_dt(setup.state, setup.grid, StepController(cfl=cfl), setup.eos)
    t_final = config.problem.t_final
    dt0 = t_final / math.ceil(t_final / dt_cfl)
    return [dt0 / 2**k for k in range(halvings + 1)]


def reference(
    config: RunConfig,
    dt_ref: float,
    study_dt_min: float | None = None,
    scheme: str = "H-LDIRK2(2,2,2)",
    out_dir: str | Path | None = None,
    constants: Constants = Constants(),
) -> RunReport:
    """Fine-step solution with a second-order scheme, used as the error baseline."""
    if not dt_ref > 0:
        raise PreconditionError("dt_ref must be positive")
    if study_dt_min is not None and dt_ref * REFERENCE_FACTOR > study_dt_min * (1 + 1e-12):
        raise PreconditionError(
            f"dt_ref={dt_ref:.3e} must be at least {REFERENCE_FACTOR}x smaller than the smallest study step {study_dt_min:.3e}"
        )
    if registry(scheme).order < 2:
        raise PreconditionError(f"reference scheme {scheme!r} is not second order")
    rep = run(fixed_dt_config(config, dt_ref, scheme), constants)
    rep.errors = {"reference_scheme": scheme, "dt_ref": dt_ref}
    if out_dir is not None:
        save_reference(rep, out_dir)
    return rep


def save_reference(rep: RunReport, out_dir: str | Path) -> Path:
    """Store the final reference state at full precision plus metadata."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "reference.npz"
    g = rep.grid
    np.savez(
        path,
        q=rep.final_state.q,
        time=max(rep.snapshots),
        scheme=rep.scheme,
        dt_ref=rep.dts[0] if rep.dts else 0.0,
        problem=rep.problem,
        grid=np.array([g.x_min, g.x_max, g.n_cells, g.n_ghost], dtype=float),
    )
    rep.save(out_dir, snapshots=True)
    return path


@dataclass
class StoredReference:
    state: CellState
    time: float
    scheme: str
    dt_ref: float
    problem: str
    grid: Grid1D


def load_reference(path: str | Path) -> StoredReference:
    path = Path(path)
    if path.is_dir():
        path = path / "reference.npz"
    with np.load(path) as data:
        gx = data["grid"]
        return StoredReference(
            CellState(data["q"].copy()),
            float(data["time"]),
            str(data["scheme"]),
            float(data["dt_ref"]),
            str(data["problem"]),
            Grid1D(float(gx[0]), float(gx[1]), int(gx[2]), int(gx[3])),
        )


def _ladder_entry(config: RunConfig, dt: float, scheme: str, constants: Constants):
    try:
        rep = run(fixed_dt_config(config, dt, scheme), constants)
    except (RadimexError, ArithmeticError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"
    return rep.final_state, ""


def converge(
    config: RunConfig,
    dt_ladder,
    ref: RunReport | StoredReference | CellState,
    scheme: str | None = None,
    workers: int = 1,
    constants: Constants = Constants(),
) -> ConvergenceTable:
    """Run ``scheme`` at each step of the ladder and compare at t_final.

    Failed runs become UNSTABLE rows; the remaining entries still run.
    """
    scheme = scheme or config.scheme
    ref_state = ref.final_state if isinstance(ref, RunReport) else getattr(ref, "state", ref)
    grid = setup_problem(config.problem, constants).grid
    if ref_state.q.shape != (5, grid.n_total):
        raise PreconditionError("reference grid does not match the study grid")
    ladder = sorted({float(dt) for dt in dt_ladder}, reverse=True)
    if workers > 1 and len(ladder) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_ladder_entry, config, dt, scheme, constants) for dt in ladder]
            results = [f.result() for f in futures]
    else:
        results = [_ladder_entry(config, dt, scheme, constants) for dt in ladder]
    rows = []
    for dt, (state, msg) in zip(ladder, results):
        if state is None:
            rows.append(ConvergenceRow(dt, None, "UNSTABLE", msg))
        else:
            rows.append(ConvergenceRow(dt, error_norms(grid, state, ref_state)))
    return ConvergenceTable(scheme, config.problem.name, rows)


def scalar_convergence(
    scheme: str,
    dt_ladder,
    lam_explicit: complex | float = -1.0,
    lam_implicit: complex | float = -4.0,
    t_final: float = 1.0,
    y0: float = 1.0,
) -> ConvergenceTable:
    """Convergence of a LIMEX pair on ``y' = lam_E y* + lam_I y`` against the exact exponential."""
    pair = registry(scheme)
    rows = []
    for dt in sorted({float(d) for d in dt_ladder}, reverse=True):
        n = round(t_final / dt)
        if not math.isclose(n * dt, t_final, rel_tol=1e-12):
            raise PreconditionError(f"dt={dt} does not divide t_final={t_final}")
        model = ScalarPartitionedModel(lam_explicit, lam_implicit)
        y = model.pack(y0)
        for _ in range(n):
            y, _ = limex_step(y, dt, pair, model)
        exact = model.exact(model.pack(y0), t_final)
        rows.append(ConvergenceRow(dt, {"y": relative_norms(y - exact, exact)}))
    return ConvergenceTable(pair.name, "scalar", rows, ("y",))
