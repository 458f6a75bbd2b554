"""Discrete total-energy conservation audit."""

from __future__ import annotations

from dataclasses import dataclass

from .driver import RunReport

NOFLUX_TOL = 1e-11
FIXED_STATE_TOL = 1e-10


@dataclass
class AuditVerdict:
    passed: bool
    tolerance: float
    bc_kind: str
    steps: int
    worst_step: int | None
    worst_drift: float
    cumulative_drift: float

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        where = f"worst step {self.worst_step}" if self.worst_step is not None else "no steps"
        return (
            f"{status}: {self.bc_kind}, {self.steps} steps, {where} drift {self.worst_drift:.3e}, "
            f"cumulative {self.cumulative_drift:.3e} (tol {self.tolerance:.0e})"
        )


def audit(report: RunReport, tol: float | None = None) -> AuditVerdict:
    """Check ``E_{n+1} - E_n = boundary inflow`` step by step and overall.

    Drifts are relative to the initial total energy. The default tolerance
    is 1e-11 for closed (NoFlux) domains and 1e-10 when boundary fluxes
    contribute.
    """
    if tol is None:
        tol = NOFLUX_TOL if report.bc_kind == "NoFlux" else FIXED_STATE_TOL
    worst_step, worst = None, 0.0
    for k, d in enumerate(report.drift):
        if worst_step is None or abs(d) > abs(worst):
            worst_step, worst = k, d
    cumulative = report.cumulative_drift
    passed = abs(worst) <= tol and abs(cumulative) <= tol
    return AuditVerdict(passed, tol, report.bc_kind, report.steps, worst_step, worst, cumulative)
