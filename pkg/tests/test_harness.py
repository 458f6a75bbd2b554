import json
import math
import subprocess
import sys

import numpy as np
import pytest

from radimex.errors import ConfigError, PreconditionError
from radimex.harness import (
    ConvergenceRow,
    ConvergenceTable,
    RunConfig,
    audit,
    cfl_ladder,
    config_from_mapping,
    converge,
    emit_plots,
    load_config,
    load_reference,
    load_report,
    reference,
    run,
    scalar_convergence,
)
from radimex.harness import convergence as convergence_mod
from radimex.harness.cli import main
from radimex.integrators import StepController, compute_dt
from radimex.problems import setup_problem

# small, fast variants of the presets
TINY_SHOCK = {"preset": "mach3", "n_cells": "40", "t_final": "2e-11"}
TINY_BOX = {"preset": "perturbed", "n_cells": "32", "t_final": "5e-10"}


def tiny(section=TINY_SHOCK, scheme="H-LDIRK2(2,2,2)"):
    return config_from_mapping({"problem": dict(section), "scheme": {"name": scheme}})


# --- configuration --------------------------------------------------------------


INI = """
[problem]
preset = mach1.2
n_cells = 64            ; coarse grid
output_times = 0, 1e-10, 2e-10
t_final = 2e-10

[scheme]
name = SSP-LDIRK3(3,3,2)
cfl = 0.25

[solver]
rel_tol = 1e-12
Er_floor = 0

[output]
directory = somewhere
snapshots = no
"""


def test_load_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(INI)
    cfg = load_config(path)
    assert cfg.problem.name == "mach1.2"
    assert cfg.problem.n_cells == 64
    assert cfg.output_times == (0.0, 1e-10, 2e-10)
    assert cfg.scheme == "SSP-LDIRK3(3,3,2)"
    assert cfg.controller.cfl == 0.25
    assert cfg.solver.rel_tol == 1e-12
    assert str(cfg.out_dir) == "somewhere" and not cfg.write_snapshots


def test_t_final_alone_sets_outputs():
    cfg = tiny()
    assert cfg.output_times == (0.0, 2e-11)


@pytest.mark.parametrize(
    "data,match",
    [
        ({"problem": {"preset": "mach3"}, "scheme": {"name": "RK4"}}, "RK4"),
        ({"problem": {"preset": "mach9"}}, "mach9"),
        ({"problem": {"n_cells": "10"}}, "preset"),
        ({"problem": {"preset": "mach3", "colour": "red"}}, "colour"),
        ({"problem": {"preset": "mach3", "n_cells": "ten"}}, "number"),
        ({"problem": {"preset": "mach3", "n_cells": "10.5"}}, "integer"),
        ({"problem": {"preset": "mach3"}, "scheme": {"cfl": "0.5", "dt": "1e-12"}}, "exactly one"),
        ({"problem": {"preset": "mach3"}, "scheme": {"cfl": "2"}}, "cfl"),
        ({"problem": {"preset": "mach3"}, "solver": {"rel_tol": "-1"}}, "rel_tol"),
        ({"problem": {"preset": "mach3"}, "solver": {"speed": "1"}}, "speed"),
        ({"problem": {"preset": "mach3"}, "output": {"snapshots": "maybe"}}, "snapshots"),
        ({"scheme": {"name": "IMEX-Euler"}}, "problem"),
    ],
)
def test_config_errors(data, match):
    with pytest.raises(ConfigError, match=match):
        config_from_mapping(data)


def test_config_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")
    bad = tmp_path / "bad.ini"
    bad.write_text("[problem]\npreset = mach3\n[extra]\nx = 1\n")
    with pytest.raises(ConfigError, match="extra"):
        load_config(bad)


# --- driver --------------------------------------------------------------------


def test_run_zero_final_time():
    cfg = config_from_mapping({"problem": {"preset": "mach3", "n_cells": "20", "t_final": "0", "output_times": "0"}})
    rep = run(cfg)
    assert rep.steps == 0
    assert rep.times == [0.0]
    assert rep.cumulative_drift == 0.0


def test_run_lands_on_output_times():
    cfg = config_from_mapping({"problem": {**TINY_SHOCK, "output_times": "0, 7e-12, 2e-11"}})
    rep = run(cfg)
    assert rep.times == [0.0, 7e-12, 2e-11]
    assert math.fsum(rep.dts) == pytest.approx(2e-11, rel=1e-14)
    setup = setup_problem(cfg.problem)
    assert max(rep.dts) <= compute_dt(setup.state, setup.grid, StepController(0.5), setup.eos) * 1.01


def test_mach_one_is_a_fixed_point():
    cfg = config_from_mapping({"problem": {"preset": "mach3", "mach": "1", "n_cells": "30", "t_final": "1e-11"}})
    rep = run(cfg)
    q0 = rep.snapshots[0.0].q[:, rep.grid.interior]
    q1 = rep.final_state.q[:, rep.grid.interior]
    np.testing.assert_allclose(q1, q0, rtol=1e-12)


def test_max_steps_and_save_roundtrip(tmp_path):
    cfg = tiny(TINY_BOX).with_(out_dir=tmp_path / "run")
    rep = run(cfg, max_steps=3)
    assert rep.steps == 3
    meta = json.loads((tmp_path / "run" / "report.json").read_text())
    assert meta["steps"] == 3 and meta["bc"] == "NoFlux"
    back = load_report(tmp_path / "run")
    assert back.times == rep.times
    sl = rep.grid.interior
    for t in rep.times:
        np.testing.assert_allclose(back.snapshots[t].q[:4, sl], rep.snapshots[t].q[:4, sl], rtol=1e-14)
    assert back.drift == rep.drift


# --- audit --------------------------------------------------------------------


def test_audit_passes_on_closed_box():
    rep = run(tiny(TINY_BOX), max_steps=10)
    verdict = audit(rep)
    assert verdict.passed, str(verdict)
    assert verdict.tolerance == 1e-11
    assert str(verdict).startswith("PASS")


def test_audit_passes_with_boundary_inflow():
    rep = run(tiny())
    assert any(q != 0.0 for q in rep.inflow)
    verdict = audit(rep)
    assert verdict.passed and verdict.tolerance == 1e-10


def test_audit_flags_drift():
    rep = run(tiny(TINY_BOX), max_steps=4)
    rep.drift[2] = 5e-9
    rep.final_energy *= 1 + 5e-9
    verdict = audit(rep)
    assert not verdict.passed and verdict.worst_step == 2
    assert str(verdict).startswith("FAIL")


# --- convergence tables -----------------------------------------------------------


def row(dt, e, status="OK"):
    if status != "OK":
        return ConvergenceRow(dt, None, status, "boom")
    return ConvergenceRow(dt, {"y": {"L1": e, "L2": e, "Linf": e}})


def test_table_orders():
    tab = ConvergenceTable("s", "p", [row(0.25, 1e-4), row(1.0, 1.6e-3), row(0.5, 4e-4)], ("y",))
    assert tab.dts == [1.0, 0.5, 0.25]
    np.testing.assert_allclose(tab.orders("y"), [2.0, 2.0])
    assert tab.fitted_order("y") == pytest.approx(2.0)


def test_table_unstable_and_roundoff_rows():
    tab = ConvergenceTable("s", "p", [row(1.0, 1e-3, "UNSTABLE"), row(0.5, 4e-4), row(0.25, 1e-4), row(0.125, 1e-16)], ("y",))
    o = tab.orders("y")
    assert math.isnan(o[0]) and math.isnan(o[2])
    assert o[1] == pytest.approx(2.0)
    assert math.isnan(tab.errors("y")[0])


def test_table_rejects_duplicate_steps():
    with pytest.raises(PreconditionError):
        ConvergenceTable("s", "p", [row(1.0, 1.0), row(1.0, 2.0)], ("y",))


def test_table_csv_roundtrip(tmp_path):
    tab = ConvergenceTable("H-LDIRK2(2,2,2)", "mach3", [row(1.0, 1e-3), row(0.5, 2.5e-4), row(0.25, 0, "UNSTABLE")], ("y",))
    path = tab.to_csv(tmp_path / "t.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "# scheme,\"H-LDIRK2(2,2,2)\",problem,mach3"
    assert lines[1] == "dt,status,y_L1,y_L1_order,y_L2,y_L2_order,y_Linf,y_Linf_order"
    back = ConvergenceTable.from_csv(path)
    assert back.scheme == tab.scheme and back.problem == "mach3"
    assert back.errors("y") == pytest.approx([1e-3, 2.5e-4, math.nan], nan_ok=True)
    assert back.rows[2].status == "UNSTABLE"


def test_scalar_convergence_orders():
    tab = scalar_convergence("H-LDIRK2(2,2,2)", [0.1 / 2**k for k in range(4)])
    assert tab.orders("y")[-1] == pytest.approx(2.0, abs=0.05)
    with pytest.raises(PreconditionError):
        scalar_convergence("IMEX-Euler", [0.3])


def test_cfl_ladder_divides_final_time():
    cfg = tiny()
    ladder = cfl_ladder(cfg, 3)
    assert len(ladder) == 4
    n = cfg.problem.t_final / ladder[0]
    assert n == pytest.approx(round(n), abs=1e-9)
    np.testing.assert_allclose(np.array(ladder[:-1]) / np.array(ladder[1:]), 2.0)


def test_reference_preconditions():
    cfg = tiny()
    with pytest.raises(PreconditionError, match="32x"):
        reference(cfg, 1e-13, study_dt_min=1e-12)
    with pytest.raises(PreconditionError, match="second order"):
        reference(cfg, 1e-14, scheme="IMEX-Euler")


def test_converge_against_stored_reference(tmp_path):
    cfg = tiny()
    ladder = cfl_ladder(cfg, 1)
    ref = reference(cfg, ladder[-1] / 32, ladder[-1], out_dir=tmp_path / "ref")
    stored = load_reference(tmp_path / "ref")
    np.testing.assert_array_equal(stored.state.q, ref.final_state.q)
    assert stored.dt_ref == pytest.approx(ladder[-1] / 32)
    tab = converge(cfg, ladder, stored, scheme="H-LDIRK2(2,2,2)")
    e = tab.errors("rho")
    assert all(x > 0 for x in e) and e[0] > e[1]


def test_converge_marks_failures_unstable(monkeypatch):
    cfg = tiny()
    ladder = cfl_ladder(cfg, 1)
    ref = run(cfg)
    real_run = convergence_mod.run

    def flaky(config, constants):
        if config.controller.dt_fixed == ladder[0]:
            raise PreconditionError("injected failure")
        return real_run(config, constants)

    monkeypatch.setattr(convergence_mod, "run", flaky)
    tab = converge(cfg, ladder, ref)
    assert tab.rows[0].status == "UNSTABLE" and "injected" in tab.rows[0].message
    assert tab.rows[1].stable


# --- figures -------------------------------------------------------------------


def test_emit_plots_empty_warns(tmp_path):
    with pytest.warns(UserWarning):
        assert emit_plots(out_dir=tmp_path) == []
    assert not any(tmp_path.iterdir())


def test_emit_plots_profiles_and_script(tmp_path):
    cfg = config_from_mapping({"problem": {**TINY_SHOCK, "output_times": "0, 5e-12, 1e-11, 2e-11"}})
    rep = run(cfg)
    tab = ConvergenceTable("s", rep.problem, [row(1.0, 1e-3), row(0.5, 2.5e-4)], ("y",))
    paths = emit_plots([rep], [tab], tmp_path, norms=("L1", "L2"))
    names = {p.name for p in paths}
    assert "plot_figures.py" in names
    csv_path = tmp_path / "profile_mach3_H-LDIRK2_2_2_2_rho.csv"
    header = csv_path.read_text().splitlines()[0].split(",")
    assert header[0] == "x" and len(header) == 5
    assert (tmp_path / "convergence_mach3_L1.png").exists()
    # the script redraws from the CSVs alone
    for p in tmp_path.glob("*.png"):
        p.unlink()
    subprocess.run([sys.executable, str(tmp_path / "plot_figures.py")], check=True)
    assert (tmp_path / "profile_mach3_H-LDIRK2_2_2_2_T.png").exists()
    assert (tmp_path / "convergence_mach3_L2.png").exists()


# --- command line ----------------------------------------------------------------


def write_ini(tmp_path, problem=TINY_SHOCK, scheme="H-LDIRK2(2,2,2)"):
    path = tmp_path / "tiny.ini"
    body = "[problem]\n" + "".join(f"{k} = {v}\n" for k, v in problem.items()) + f"[scheme]\nname = {scheme}\n"
    path.write_text(body)
    return path


def test_cli_tableaux(capsys):
    assert main(["tableaux"]) == 0
    out = capsys.readouterr().out
    assert "H-LDIRK2(2,2,2): order 2" in out and "Op-Split" in out


def test_cli_run_writes_report_and_figures(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(write_ini(tmp_path)), "--out", str(out)]) == 0
    assert (out / "report.json").exists()
    assert (out / "figures" / "plot_figures.py").exists()
    assert list((out / "figures").glob("*.png"))
    assert main(["emit-plots", "--runs", str(out), "--out", str(tmp_path / "fig")]) == 0
    assert (tmp_path / "fig" / "profile_mach3_H-LDIRK2_2_2_2_Er.csv").exists()


def test_cli_audit_exit_codes(tmp_path):
    assert main(["audit", "--config", str(write_ini(tmp_path, TINY_BOX)), "--steps", "5"]) == 0
    # boundary fluxes leave roundoff-level drift, which a zero tolerance rejects
    assert main(["audit", "--config", str(write_ini(tmp_path)), "--tol", "0"]) == 3


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["run", "--preset", "mach7"]) == 1
    assert main(["run", "--preset", "mach3", "--scheme", "RK4"]) == 1
    assert main(["run", "--config", str(tmp_path / "nope.ini")]) == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    assert "error" in capsys.readouterr().err


def test_cli_numerical_failure_exit_code(tmp_path):
    # a fixed step far beyond the explicit limit breaks the hydro update
    ini = str(write_ini(tmp_path, {**TINY_SHOCK, "t_final": "1e-9"}, scheme="Op-Split"))
    assert main(["run", "--config", ini, "--dt", "1e-10", "--no-plots", "--out", str(tmp_path / "o")]) == 2
