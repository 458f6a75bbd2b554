from .models import RadHydroModel, ScalarPartitionedModel
from .steppers import (
    HYDRO_SCHEMES,
    StepController,
    StepStats,
    alimex_first_order_step,
    compute_dt,
    lie_trotter_step,
    limex_step,
    make_stepper,
    scheme_names,
)
from .tableaux import ALIMEX_FIRST_ORDER, ButcherTableau, ImexPair, ThreeWayTableaux, available, registry, validate

__all__ = [
    "ALIMEX_FIRST_ORDER",
    "ButcherTableau",
    "HYDRO_SCHEMES",
    "ImexPair",
    "RadHydroModel",
    "ScalarPartitionedModel",
    "StepController",
    "StepStats",
    "ThreeWayTableaux",
    "alimex_first_order_step",
    "available",
    "compute_dt",
    "lie_trotter_step",
    "limex_step",
    "make_stepper",
    "registry",
    "scheme_names",
    "validate",
]
