"""Butcher tableaux and the registry of IMEX pairs used by the LIMEX stepper.

Each pair records the reference it was transcribed from in ``provenance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from ..errors import TableauValidationError, UnknownSchemeError


@dataclass(frozen=True)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.c is None:
            object.__setattr__(self, "c", A.sum(axis=1))
        else:
            object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if A.shape != (b.size, b.size):
            raise TableauValidationError(f"A has shape {A.shape}, expected {(b.size, b.size)}")

    @property
    def stages(self) -> int:
        return self.b.size

    @property
    def is_explicit(self) -> bool:
        return bool(np.all(np.triu(self.A) == 0))

    @property
    def is_dirk(self) -> bool:
        return bool(np.all(np.triu(self.A, 1) == 0))


@dataclass(frozen=True)
class ImexPair:
    name: str
    explicit: ButcherTableau
    implicit: ButcherTableau
    order: int
    provenance: str = ""

    @property
    def stages(self) -> int:
        return self.implicit.stages


@dataclass(frozen=True)
class ThreeWayTableaux:
    hat: ButcherTableau
    tilde: ButcherTableau
    implicit: ButcherTableau


@dataclass
class ValidationReport:
    name: str
    checks: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def validate(pair: ImexPair, tol: float = 1e-14) -> ValidationReport:
    """Check structure and order conditions up to order two.

    Raises TableauValidationError naming the first violated condition.
    """
    ex, im = pair.explicit, pair.implicit
    rep = ValidationReport(pair.name)
    rep.checks["equal stage count"] = ex.stages == im.stages
    if rep.checks["equal stage count"]:
        rep.checks["shared weights b = b~"] = bool(np.array_equal(ex.b, im.b))
        rep.checks["explicit tableau strictly lower triangular"] = ex.is_explicit
        rep.checks["implicit tableau lower triangular"] = im.is_dirk
        for label, tab in (("explicit", ex), ("implicit", im)):
            rep.checks[f"{label} row-sum c = A 1"] = bool(np.allclose(tab.c, tab.A.sum(axis=1), atol=tol, rtol=0))
            rep.checks[f"{label} sum(b) = 1"] = abs(tab.b.sum() - 1.0) <= tol
        if pair.order >= 2:
            rep.checks["implicit b.c = 1/2"] = abs(im.b @ im.c - 0.5) <= tol
            rep.checks["explicit b~.c~ = 1/2"] = abs(ex.b @ ex.c - 0.5) <= tol
            rep.checks["coupling b.c~ = 1/2"] = abs(im.b @ ex.c - 0.5) <= tol
            rep.checks["coupling b~.c = 1/2"] = abs(ex.b @ im.c - 0.5) <= tol
    for name, ok in rep.checks.items():
        if not ok:
            raise TableauValidationError(f"{pair.name}: violated condition '{name}'")
    return rep


_GAMMA = 1.0 - 1.0 / sqrt(2.0)


def _imex_euler():
    return ImexPair(
        "IMEX-Euler",
        ButcherTableau([[0.0]], [1.0]),
        ButcherTableau([[1.0]], [1.0]),
        order=1,
        provenance="forward/backward Euler",
    )


def _h_ldirk2():
    g = _GAMMA
    return ImexPair(
        "H-LDIRK2(2,2,2)",
        ButcherTableau([[0, 0], [1, 0]], [0.5, 0.5]),
        ButcherTableau([[g, 0], [1 - 2 * g, g]], [0.5, 0.5]),
        order=2,
        provenance="Pareschi & Russo 2005, Table II",
    )


def _ssp_ldirk3():
    g = _GAMMA
    b = [1 / 6, 1 / 6, 2 / 3]
    return ImexPair(
        "SSP-LDIRK3(3,3,2)",
        ButcherTableau([[0, 0, 0], [1, 0, 0], [0.25, 0.25, 0]], b),
        ButcherTableau([[g, 0, 0], [1 - 2 * g, g, 0], [0.5 - g, 0, g]], b),
        order=2,
        provenance="Pareschi & Russo 2005, Table V",
    )


def _h_cn():
    return ImexPair(
        "H-CN(2,2,2)",
        ButcherTableau([[0, 0], [1, 0]], [0.5, 0.5]),
        ButcherTableau([[0, 0], [0.5, 0.5]], [0.5, 0.5]),
        order=2,
        provenance="Boscarino, Pareschi & Russo 2016, Sec. 3.3.4 (Heun + Crank-Nicolson)",
    )


def _h_dirk2():
    return ImexPair(
        "H-DIRK2(2,2,2)",
        ButcherTableau([[0, 0], [1, 0]], [0.5, 0.5]),
        ButcherTableau([[0.5, 0], [0, 0.5]], [0.5, 0.5]),
        order=2,
        provenance="Boscarino, Pareschi & Russo 2016, Sec. 3.3.1 (Heun + two-stage A-stable SDIRK)",
    )


def _ssp_ldirk2():
    b = [1 / 3, 1 / 3, 1 / 3]
    return ImexPair(
        "SSP-LDIRK2(3,3,2)",
        ButcherTableau([[0, 0, 0], [0.5, 0, 0], [0.5, 0.5, 0]], b),
        ButcherTableau([[0.25, 0, 0], [0, 0.25, 0], [1 / 3, 1 / 3, 1 / 3]], b),
        order=2,
        provenance="Pareschi & Russo 2005, Table IV",
    )


def _tr_bdf2():
    g = 1.0 - 1.0 / sqrt(2.0)
    d = 1.0 / (2.0 * sqrt(2.0))
    a32 = 2.0 / 3.0
    b = [d, d, g]
    return ImexPair(
        "TR-BDF2",
        ButcherTableau([[0, 0, 0], [2 * g, 0, 0], [1 - a32, a32, 0]], b),
        ButcherTableau([[0, 0, 0], [g, g, 0], [d, d, g]], b),
        order=2,
        provenance="Giraldo, Kelly & Constantinescu 2013, Eq. 3.10 (ARK2) with a32 = 2/3",
    )


# First-order three-way ARK that recasts the Lie-Trotter split.
ALIMEX_FIRST_ORDER = ThreeWayTableaux(
    hat=ButcherTableau([[0, 0], [0, 0]], [1, 0], c=[0, 1]),
    tilde=ButcherTableau([[0, 0], [1, 0]], [1, 0]),
    implicit=ButcherTableau([[0, 0], [0, 1]], [0, 1]),
)

_BUILDERS = {
    "IMEX-Euler": _imex_euler,
    "H-CN(2,2,2)": _h_cn,
    "H-DIRK2(2,2,2)": _h_dirk2,
    "H-LDIRK2(2,2,2)": _h_ldirk2,
    "TR-BDF2": _tr_bdf2,
    "SSP-LDIRK2(3,3,2)": _ssp_ldirk2,
    "SSP-LDIRK3(3,3,2)": _ssp_ldirk3,
}
_ALIASES = {"LIMEX-Euler": "IMEX-Euler"}


def available() -> list[str]:
    return sorted(_BUILDERS) + sorted(_ALIASES)


def registry(name: str) -> ImexPair:
    """Return the validated IMEX pair registered under ``name``."""
    key = _ALIASES.get(name, name)
    try:
        builder = _BUILDERS[key]
    except KeyError:
        raise UnknownSchemeError(f"unknown IMEX pair {name!r}; available: {', '.join(available())}") from None
    pair = builder()
    validate(pair)
    return pair
