"""Run configuration read from INI files.

Schema (every key optional unless noted)::

    [problem]
    preset = mach3              ; required: mach1.2, mach3, mach45, perturbed
    n_cells = 240               ; any numeric field of the preset may be overridden
    t_final = 7.5e-10
    output_times = 0, 2.5e-10   ; comma separated, seconds
    gamma = 1.6667              ; EOS overrides
    c_v = 1.447e12
    sigma_a = 577.35            ; replaces the opacity by a constant one
    sigma_s = 0

    [scheme]
    name = H-LDIRK2(2,2,2)
    cfl = 0.5                   ; exactly one of cfl / dt
    dt = 1e-12

    [solver]
    rel_tol = 1e-10
    abs_tol_T = 1e-8
    max_outer_iters = 100
    temperature_floor = 1e-6
    Er_floor = 0
    max_floor_hits = 10

    [output]
    directory = out
    snapshots = yes

Unknown sections or keys raise ConfigError.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..errors import ConfigError, UnknownSchemeError
from ..implicit import SolverSettings
from ..integrators import StepController, make_stepper
from ..physics import ConstantOpacity, EosIdealGas
from ..problems import PerturbedBoxSpec, ShockProblemSpec, preset

_SECTIONS = {"problem", "scheme", "solver", "output"}
_SOLVER_TYPES = {f.name: f.type for f in fields(SolverSettings)}


@dataclass
class RunConfig:
    problem: ShockProblemSpec | PerturbedBoxSpec
    scheme: str = "H-LDIRK2(2,2,2)"
    controller: StepController = field(default_factory=StepController)
    solver: SolverSettings = field(default_factory=SolverSettings)
    out_dir: Path | None = None
    write_snapshots: bool = True

    def __post_init__(self):
        try:
            make_stepper(self.scheme)
        except UnknownSchemeError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def output_times(self) -> tuple[float, ...]:
        return tuple(self.problem.output_times)

    def with_(self, **changes) -> "RunConfig":
        return replace(self, **changes)


def _numeric_fields(spec) -> dict[str, type]:
    out = {}
    for f in fields(spec):
        value = getattr(spec, f.name)
        if isinstance(value, bool):
            continue
        if isinstance(value, int):
            out[f.name] = int
        elif isinstance(value, float):
            out[f.name] = float
    return out


def _float(section, key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {text!r}") from None


def problem_from_section(items: dict[str, str]):
    items = dict(items)
    if "preset" not in items:
        raise ConfigError("[problem] preset is required")
    try:
        spec = preset(items.pop("preset"))
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    numeric = _numeric_fields(spec)
    changes = {}
    eos_changes = {}
    opacity = {}
    for key, text in items.items():
        if key in numeric:
            value = _float("problem", key, text)
            if numeric[key] is int:
                if value != int(value):
                    raise ConfigError(f"[problem] {key}: expected an integer")
                value = int(value)
            changes[key] = value
        elif key == "output_times":
            changes[key] = tuple(_float("problem", key, t) for t in text.split(",") if t.strip())
        elif key in ("gamma", "c_v"):
            eos_changes[key] = _float("problem", key, text)
        elif key in ("sigma_a", "sigma_s"):
            opacity[key] = _float("problem", key, text)
        else:
            raise ConfigError(f"[problem] unknown key {key!r}")
    if eos_changes:
        changes["eos"] = replace(spec.eos, **eos_changes)
    if opacity:
        changes["opacity"] = ConstantOpacity(opacity.get("sigma_a", 0.0), opacity.get("sigma_s", 0.0))
    if "t_final" in changes and "output_times" not in changes:
        changes["output_times"] = (0.0, changes["t_final"])
    try:
        return replace(spec, **changes)
    except ValueError as exc:
        raise ConfigError(f"[problem] {exc}") from None


def load_config(path: str | Path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keys are case sensitive (Er_floor, abs_tol_T)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    unknown = set(parser.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown sections: {sorted(unknown)}")
    return config_from_mapping({s: dict(parser.items(s)) for s in parser.sections()})


def config_from_mapping(data: dict[str, dict[str, str]]) -> RunConfig:
    if "problem" not in data:
        raise ConfigError("missing [problem] section")
    problem = problem_from_section(data["problem"])

    scheme = dict(data.get("scheme", {}))
    name = scheme.pop("name", "H-LDIRK2(2,2,2)")
    cfl = scheme.pop("cfl", None)
    dt = scheme.pop("dt", None)
    if scheme:
        raise ConfigError(f"[scheme] unknown keys {sorted(scheme)}")
    if cfl is not None and dt is not None:
        raise ConfigError("[scheme] set exactly one of cfl and dt")
    try:
        if dt is not None:
            controller = StepController(cfl=None, dt_fixed=_float("scheme", "dt", dt))
        else:
            controller = StepController(cfl=_float("scheme", "cfl", cfl) if cfl is not None else 0.5)
    except ValueError as exc:
        raise ConfigError(f"[scheme] {exc}") from None

    solver_kw = {}
    for key, text in data.get("solver", {}).items():
        if key not in _SOLVER_TYPES:
            raise ConfigError(f"[solver] unknown key {key!r}")
        value = _float("solver", key, text)
        solver_kw[key] = int(value) if key in ("max_outer_iters", "max_floor_hits") else value
    try:
        solver = SolverSettings(**solver_kw)
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from None

    output = dict(data.get("output", {}))
    directory = output.pop("directory", None)
    snapshots = output.pop("snapshots", "yes").strip().lower()
    if output:
        raise ConfigError(f"[output] unknown keys {sorted(output)}")
    if snapshots not in ("yes", "no", "true", "false", "1", "0"):
        raise ConfigError(f"[output] snapshots: expected yes/no, got {snapshots!r}")
    return RunConfig(
        problem=problem,
        scheme=name,
        controller=controller,
        solver=solver,
        out_dir=Path(directory) if directory else None,
        write_snapshots=snapshots in ("yes", "true", "1"),
    )
