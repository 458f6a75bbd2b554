"""Command line interface.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure,
3 audit failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from ..errors import ConfigError, PreconditionError, RadimexError, SimulationError, UnknownSchemeError
from ..integrators import StepController, available, registry, validate
from ..integrators.steppers import scheme_names
from ..problems import preset
from .audit import audit
from .config import RunConfig, config_from_mapping, load_config
from .convergence import REFERENCE_FACTOR, ConvergenceTable, cfl_ladder, converge, load_reference, reference
from .driver import load_report, run
from .plots import emit_plots

log = logging.getLogger("radimex")

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_AUDIT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="INI run configuration")
    src.add_argument("--preset", help="problem preset (instead of --config)")
    p.add_argument("--scheme", help="time integration scheme")
    step = p.add_mutually_exclusive_group()
    step.add_argument("--cfl", type=float, help="hydrodynamic CFL number")
    step.add_argument("--dt", type=float, help="fixed time step [s]")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="radimex", description="1D gray-diffusion radiation hydrodynamics with LIMEX time stepping")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one simulation, write snapshots, report and figures")
    _common(p)
    p.add_argument("--no-plots", action="store_true", help="skip figure output")

    p = sub.add_parser("reference", help="compute a fine-step reference solution")
    _common(p)
    p.add_argument("--dt-ref", type=float, help="reference step (default: smallest ladder step / 32)")
    p.add_argument("--halvings", type=int, default=4, help="ladder halvings used to pick the default dt-ref")

    p = sub.add_parser("converge", help="temporal convergence study against a reference")
    _common(p)
    p.add_argument("--schemes", help="comma separated schemes (default: --scheme or config scheme)")
    p.add_argument("--halvings", type=int, default=4)
    p.add_argument("--reference", type=Path, help="directory or .npz written by 'reference'")
    p.add_argument("--reference-scheme", default="H-LDIRK2(2,2,2)")

    p = sub.add_parser("audit", help="run and check discrete total-energy conservation")
    _common(p)
    p.add_argument("--steps", type=int, help="stop after this many steps")
    p.add_argument("--tol", type=float, help="override the audit tolerance")

    p = sub.add_parser("tableaux", help="list and validate the registered IMEX pairs")
    p.add_argument("--name", help="show a single pair")

    p = sub.add_parser("emit-plots", help="figure CSVs and PNGs from saved runs and tables")
    p.add_argument("--runs", type=Path, nargs="*", default=[], help="run directories (containing report.json)")
    p.add_argument("--tables", type=Path, nargs="*", default=[], help="convergence table CSVs")
    p.add_argument("--out", type=Path, default=Path("figures"))
    return ap


def resolve_config(args) -> RunConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    elif args.preset is not None:
        cfg = config_from_mapping({"problem": {"preset": args.preset}})
    else:
        raise ConfigError("give --config or --preset")
    changes = {}
    if args.scheme:
        changes["scheme"] = args.scheme
    try:
        if args.dt is not None:
            changes["controller"] = StepController(cfl=None, dt_fixed=args.dt)
        elif args.cfl is not None:
            changes["controller"] = StepController(cfl=args.cfl)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    return RunConfig(**{**cfg.__dict__, **changes})


def _default_out(cfg: RunConfig, kind: str) -> Path:
    if cfg.out_dir is not None:
        return Path(cfg.out_dir)
    return Path("out") / f"{cfg.problem.name}_{kind}"


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    cfg = cfg.with_(out_dir=_default_out(cfg, cfg.scheme.replace("(", "").replace(")", "").replace(",", "")))
    rep = run(cfg)
    print(f"{rep.problem} {rep.scheme}: {rep.steps} steps, {rep.nonlinear_iterations} nonlinear iterations, "
          f"{rep.wallclock:.2f} s, cumulative energy drift {rep.cumulative_drift:.3e}")
    print(f"report: {cfg.out_dir / 'report.json'}")
    if not args.no_plots:
        paths = emit_plots([rep], out_dir=Path(cfg.out_dir) / "figures")
        print(f"figures: {len(paths)} files in {Path(cfg.out_dir) / 'figures'}")
    return EXIT_OK


def cmd_reference(args) -> int:
    cfg = resolve_config(args)
    ladder = cfl_ladder(cfg, args.halvings)
    dt_ref = args.dt_ref if args.dt_ref is not None else ladder[-1] / REFERENCE_FACTOR
    out = _default_out(cfg, "reference")
    scheme = args.scheme or "H-LDIRK2(2,2,2)"
    rep = reference(cfg, dt_ref, ladder[-1], scheme=scheme, out_dir=out)
    print(f"reference {rep.problem} with {scheme} at dt={dt_ref:.4e}: {rep.steps} steps, {rep.wallclock:.1f} s -> {out}")
    return EXIT_OK


def _format_table(tab: ConvergenceTable, variables=("rho", "Er")) -> str:
    lines = [f"{tab.scheme} on {tab.problem} (relative L2)"]
    head = f"{'dt':>12}  " + "  ".join(f"{v + ' err':>12} {'order':>6}" for v in variables)
    lines.append(head)
    orders = {v: [math.nan] + tab.orders(v) for v in variables}
    for i, r in enumerate(tab.rows):
        if not r.stable:
            lines.append(f"{r.dt:12.4e}  UNSTABLE ({r.message[:60]})")
            continue
        cells = "  ".join(f"{r.errors[v]['L2']:12.4e} {orders[v][i]:6.2f}" for v in variables)
        lines.append(f"{r.dt:12.4e}  {cells}")
    lines.append("fitted order: " + ", ".join(f"{v} {tab.fitted_order(v):.2f}" for v in variables))
    return "\n".join(lines)


def cmd_converge(args) -> int:
    cfg = resolve_config(args)
    schemes = args.schemes.split(",") if args.schemes else [cfg.scheme]
    ladder = cfl_ladder(cfg, args.halvings)
    out = _default_out(cfg, "convergence")
    if args.reference is not None:
        ref = load_reference(args.reference)
        if ref.dt_ref * REFERENCE_FACTOR > ladder[-1] * (1 + 1e-12):
            raise PreconditionError(f"stored reference dt {ref.dt_ref:.3e} is too coarse for the ladder")
    else:
        ref = reference(cfg, ladder[-1] / REFERENCE_FACTOR, ladder[-1], scheme=args.reference_scheme, out_dir=out / "reference")
    tables = []
    for scheme in schemes:
        tab = converge(cfg, ladder, ref, scheme=scheme.strip(), workers=args.workers)
        tab.to_csv(out / f"table_{tab.scheme.replace('(', '').replace(')', '').replace(',', '')}.csv")
        tables.append(tab)
        print(_format_table(tab))
    emit_plots(tables=tables, out_dir=out / "figures", norms=("L1", "L2", "Linf"))
    print(f"tables and figures in {out}")
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = resolve_config(args)
    rep = run(cfg, max_steps=args.steps, save=cfg.out_dir is not None)
    verdict = audit(rep, args.tol)
    print(verdict)
    return EXIT_OK if verdict.passed else EXIT_AUDIT


def cmd_tableaux(args) -> int:
    names = [args.name] if args.name else available()
    np.set_printoptions(precision=6, suppress=True)
    for name in names:
        pair = registry(name)
        rep = validate(pair)
        print(f"{pair.name}: order {pair.order}, {pair.stages} stages, {'valid' if rep.passed else 'INVALID'}")
        print(f"  provenance: {pair.provenance}")
        print("  explicit A:\n" + "\n".join("    " + str(r) for r in pair.explicit.A))
        print("  implicit A:\n" + "\n".join("    " + str(r) for r in pair.implicit.A))
        print(f"  b: {pair.implicit.b}")
    if not args.name:
        print("other schemes: " + ", ".join(n for n in scheme_names() if n not in available()))
    return EXIT_OK


def cmd_emit_plots(args) -> int:
    reports = [load_report(d) for d in args.runs]
    tables = [ConvergenceTable.from_csv(p) for p in args.tables]
    paths = emit_plots(reports, tables, args.out)
    print(f"wrote {len(paths)} files to {args.out}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "reference": cmd_reference,
    "converge": cmd_converge,
    "audit": cmd_audit,
    "tableaux": cmd_tableaux,
    "emit-plots": cmd_emit_plots,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UnknownSchemeError, PreconditionError, KeyError) as exc:
        print(f"radimex: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SimulationError, RadimexError, ArithmeticError) as exc:
        print(f"radimex: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"radimex: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
