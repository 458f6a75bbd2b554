"""Experiment harness: configuration, driver, convergence studies, audits, figures."""

from .audit import AuditVerdict, audit
from .config import RunConfig, config_from_mapping, load_config
from .convergence import (
    ConvergenceRow,
    ConvergenceTable,
    cfl_ladder,
    converge,
    error_norms,
    load_reference,
    reference,
    scalar_convergence,
)
from .driver import RunReport, fixed_dt_config, load_report, run
from .plots import emit_plots

__all__ = [
    "AuditVerdict",
    "ConvergenceRow",
    "ConvergenceTable",
    "RunConfig",
    "RunReport",
    "audit",
    "cfl_ladder",
    "config_from_mapping",
    "converge",
    "emit_plots",
    "error_norms",
    "fixed_dt_config",
    "load_config",
    "load_reference",
    "load_report",
    "reference",
    "run",
    "scalar_convergence",
]
