import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from radimex.errors import PreconditionError
from radimex.physics import Constants, sound_speed
from radimex.problems import (
    NS,
    PRESETS,
    PerturbedBoxSpec,
    ShockProblemSpec,
    build_initial_state,
    jump_full,
    jump_hydro,
    jump_residuals,
    preset,
    setup_problem,
)
from radimex.spatial import FixedState, NoFlux
from radimex.state import total_energy


def rankine_hugoniot_density(gamma, M):
    return (gamma + 1) * M**2 / ((gamma - 1) * M**2 + 2)


def test_hydro_jump_mach3_density():
    jump = jump_hydro(preset("mach3"))
    assert jump.downstream.rho == pytest.approx(3.0, rel=1e-12)


def test_hydro_jump_mach12_density():
    jump = jump_hydro(preset("mach1.2"))
    assert jump.downstream.rho == pytest.approx(1.2972972972972973, rel=1e-12)


@given(M=st.floats(1.0, 60.0), gamma=st.floats(1.1, 3.0))
@settings(max_examples=60, deadline=None)
def test_hydro_jump_is_exact_without_radiation(M, gamma):
    spec = dataclasses.replace(preset("mach3"), mach=M, eos=dataclasses.replace(preset("mach3").eos, gamma=gamma))
    jump = jump_hydro(spec, Constants(a=1e-30))
    assert jump.downstream.rho == pytest.approx(rankine_hugoniot_density(gamma, M), rel=1e-12)
    assert np.max(np.abs(jump_residuals(jump, spec.eos))) <= 1e-12


def test_mach_one_is_identity():
    spec = dataclasses.replace(preset("mach3"), mach=1.0)
    jump = jump_hydro(spec)
    up, down = jump.upstream, jump.downstream
    for f in ("rho", "u", "p", "T"):
        assert getattr(down, f) == pytest.approx(getattr(up, f), rel=1e-14)


def test_subsonic_jump_rejected():
    spec = dataclasses.replace(preset("mach3"), mach=0.8)
    with pytest.raises(PreconditionError):
        jump_hydro(spec)
    with pytest.raises(ValueError):
        ShockProblemSpec("x", 0.0, spec.eos, spec.opacity, 1, 100, 100, 0, 0, 1, 10, 0.5, 1e-9, (0.0,))


@pytest.mark.parametrize("name", ["mach1.2", "mach3", "mach45"])
def test_full_jump_residuals(name):
    spec = preset(name)
    jump = jump_full(spec)
    assert np.max(np.abs(jump_residuals(jump, spec.eos))) <= 1e-10
    # both sides in radiative equilibrium
    a = Constants().a
    assert jump.downstream.Er == pytest.approx(a * jump.downstream.T**4, rel=1e-14)
    assert jump.upstream.Er == pytest.approx(a * jump.upstream.T**4, rel=1e-14)


def test_full_jump_tends_to_hydro_jump_as_a_vanishes():
    spec = preset("mach3")
    full = jump_full(spec, constants=Constants(a=1e-12))
    hydro = jump_hydro(spec, Constants(a=1e-12))
    assert full.downstream.rho == pytest.approx(hydro.downstream.rho, rel=1e-9)
    assert full.downstream.T == pytest.approx(hydro.downstream.T, rel=1e-9)


def test_full_jump_radiation_raises_downstream_temperature_less():
    # radiation energy and pressure soak up part of the shock heating
    spec = preset("mach45")
    assert jump_full(spec).downstream.T < jump_hydro(spec).downstream.T


def test_residuals_are_frame_invariant():
    spec = preset("mach3")
    jump = jump_full(spec)
    s = -2.0e7
    moved = type(jump)(
        dataclasses.replace(jump.upstream, u=jump.upstream.u + s),
        dataclasses.replace(jump.downstream, u=jump.downstream.u + s),
    )
    assert np.max(np.abs(jump_residuals(moved, spec.eos, shock_speed=s))) <= 1e-10
    assert np.max(np.abs(jump_residuals(moved, spec.eos))) > 1e-3


def test_initial_state_layout():
    spec = preset("mach3")
    jump = jump_full(spec)
    grid, state, bc = build_initial_state(spec, jump)
    assert isinstance(bc, FixedState)
    sl = grid.interior
    x = grid.centers
    rho = state.rho[sl]
    assert np.all(rho[x < spec.shock_position] == jump.upstream.rho)
    assert np.all(rho[x > spec.shock_position] == jump.downstream.rho)
    assert np.all(state.T[sl][x > spec.shock_position] == pytest.approx(jump.downstream.T, rel=1e-12))
    upstream_u = state.mom[sl][0] / rho[0]
    assert upstream_u / sound_speed(spec.eos, 1.0, jump.upstream.p) == pytest.approx(3.0, rel=1e-12)


def test_mach45_lab_frame_shift():
    spec = preset("mach45")
    setup = setup_problem(spec)
    sl = setup.grid.interior
    u = setup.state.mom[sl] / setup.state.rho[sl]
    assert u[0] == pytest.approx(setup.jump.upstream.u + spec.shock_speed, rel=1e-12)
    assert u[-1] == pytest.approx(setup.jump.downstream.u + spec.shock_speed, rel=1e-12)
    # the shock travels left through the domain but stays inside it
    assert spec.shock_position + spec.shock_speed * spec.t_final > spec.x_min
    assert setup.jump.downstream.T == pytest.approx(8358.0, rel=1e-3)


def test_perturbed_box():
    setup = setup_problem(PerturbedBoxSpec())
    assert isinstance(setup.bc, NoFlux)
    assert setup.grid.n_cells == 128
    assert setup.t_final == 2.0 * NS
    assert total_energy(setup.grid, setup.state) > 0


def test_unknown_preset():
    with pytest.raises(KeyError, match="mach3"):
        preset("mach7")


def test_preset_table():
    assert set(PRESETS) == {"mach1.2", "mach3", "mach45", "perturbed"}
    for name in ("mach1.2", "mach3"):
        spec = PRESETS[name]
        assert spec.n_cells == 240 and spec.t_final == pytest.approx(0.75 * NS)
