import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from centriclutch.driveline import (Configuration, DrivelineParams, TorqueSet, solve_first_gear,
                                    solve_locked, solve_second_gear_slipping)
from centriclutch.errors import DomainError

# Frozen from np.linalg.solve on the stacked linear systems.
FIRST_GEAR_A = (72.20792511, 57.34492459, 26.83742471)
LOCKED_A = (46.44325588, 78.26455625)


def first_gear_residuals(t, p, sol):
    s = p.configuration.sign
    rho = p.step_ratio
    r1 = (t.input_torque - t.output_torque / p.ratio_first - sol.one_way_torque * rho
          - s * t.centrifugal_torque - p.inertia_input * sol.alpha_input)
    r2 = sol.one_way_torque + s * t.centrifugal_torque - p.inertia_second * sol.alpha_second
    r3 = sol.alpha_second - rho * sol.alpha_input
    return r1, r2, r3


def second_gear_residuals(t, p, sol):
    s = p.configuration.sign
    r1 = t.input_torque - s * t.centrifugal_torque - p.inertia_input * sol.alpha_input
    r2 = s * t.centrifugal_torque - t.output_torque / p.ratio_second - p.inertia_second * sol.alpha_second
    return r1, r2


def locked_residuals(t, p, sol):
    # both shaft equations with the hold torque in place of T_cf, plus equal accelerations
    s = p.configuration.sign
    r1 = t.input_torque - s * sol.hold_torque - p.inertia_input * sol.alpha_input
    r2 = s * sol.hold_torque - t.output_torque / p.ratio_second - p.inertia_second * sol.alpha_second
    return r1, r2, sol.alpha_input - sol.alpha_second


def test_first_gear_example():
    sol = solve_first_gear(TorqueSet(100.0, 200.0, 0.0), DrivelineParams())
    assert (sol.alpha_input, sol.alpha_second, sol.one_way_torque) == pytest.approx(FIRST_GEAR_A, rel=1e-8)


def test_first_gear_linear_solve():
    p = DrivelineParams(configuration=Configuration.B)
    t = TorqueSet(90.0, 150.0, 35.0)
    s, rho = p.configuration.sign, p.step_ratio
    a = np.array([[p.inertia_input, 0.0, rho], [0.0, p.inertia_second, -1.0], [-rho, 1.0, 0.0]])
    b = np.array([t.input_torque - t.output_torque / p.ratio_first - s * t.centrifugal_torque,
                  s * t.centrifugal_torque, 0.0])
    expect = np.linalg.solve(a, b)
    sol = solve_first_gear(t, p)
    assert (sol.alpha_input, sol.alpha_second, sol.one_way_torque) == pytest.approx(tuple(expect), rel=1e-12)


def test_locked_example():
    sol = solve_locked(TorqueSet(100.0, 200.0), DrivelineParams())
    assert sol.alpha_input == sol.alpha_second
    assert (sol.alpha_input, sol.hold_torque) == pytest.approx(LOCKED_A, rel=1e-8)


def test_second_gear_example():
    sol = solve_second_gear_slipping(TorqueSet(50.0, 0.0, 0.0), DrivelineParams())
    assert sol.alpha_input == pytest.approx(106.84, abs=0.01)
    assert sol.alpha_second == 0.0


def test_configurations_agree_without_clutch_torque():
    a = DrivelineParams()
    b = DrivelineParams(configuration=Configuration.B)
    t = TorqueSet(120.0, 80.0, 0.0)
    for solve in (solve_first_gear, solve_second_gear_slipping):
        assert solve(t, a) == solve(t, b)


def test_configurations_mirror_clutch_torque():
    a = DrivelineParams()
    b = DrivelineParams(configuration=Configuration.B)
    assert solve_second_gear_slipping(TorqueSet(10.0, 20.0, 30.0), a) == \
        solve_second_gear_slipping(TorqueSet(10.0, 20.0, -30.0), b)


def test_locked_is_limit_of_slipping():
    # at T_cf equal to the hold torque the slipping equations give equal accelerations
    p = DrivelineParams()
    t = TorqueSet(70.0, 120.0)
    lock = solve_locked(t, p)
    slip = solve_second_gear_slipping(TorqueSet(70.0, 120.0, lock.hold_torque), p)
    assert slip.alpha_input == pytest.approx(lock.alpha_input, rel=1e-12)
    assert slip.alpha_second == pytest.approx(lock.alpha_second, rel=1e-12)


@given(st.floats(-500, 500), st.floats(-500, 500), st.floats(-500, 500),
       st.floats(0.01, 5.0), st.floats(0.01, 5.0), st.sampled_from(list(Configuration)))
def test_residuals_vanish(t_in, t_out, t_cf, i1, i2, c):
    p = DrivelineParams(inertia_input=i1, inertia_second=i2, configuration=c)
    t = TorqueSet(t_in, t_out, t_cf)
    scale = max(1.0, abs(t_in), abs(t_out), abs(t_cf))
    for r in (*first_gear_residuals(t, p, solve_first_gear(t, p)),
              *second_gear_residuals(t, p, solve_second_gear_slipping(t, p)),
              *locked_residuals(t, p, solve_locked(t, p))):
        assert abs(r) <= 1e-9 * scale


@pytest.mark.parametrize("kw", [
    {"inertia_input": 0.0}, {"inertia_second": -1.0}, {"ratio_first": 3.0}, {"ratio_second": 0.0},
])
def test_invalid_params(kw):
    with pytest.raises(DomainError):
        DrivelineParams(**kw)


def test_first_gear_static_balance():
    p = DrivelineParams()
    sol = solve_first_gear(TorqueSet(200.0 / p.ratio_first, 200.0, 0.0), p)
    assert sol.alpha_input == pytest.approx(0.0, abs=1e-12)
    assert sol.alpha_second == pytest.approx(0.0, abs=1e-12)
    assert sol.one_way_torque == pytest.approx(0.0, abs=1e-12)


def test_first_gear_one_way_torque_drives_second_shaft():
    p = DrivelineParams()
    sol = solve_first_gear(TorqueSet(100.0, 200.0, 0.0), p)
    assert sol.one_way_torque == pytest.approx(p.inertia_second * sol.alpha_second, rel=1e-12)


def test_second_gear_static_balance():
    p = DrivelineParams()
    t_cf = 100.0 / p.ratio_second
    sol = solve_second_gear_slipping(TorqueSet(t_cf, 100.0, t_cf), p)
    assert sol.alpha_input == pytest.approx(0.0, abs=1e-12)
    assert sol.alpha_second == pytest.approx(0.0, abs=1e-12)


def test_second_gear_b_clutch_torque_adds_on_input():
    p = DrivelineParams(configuration=Configuration.B)
    sol = solve_second_gear_slipping(TorqueSet(50.0, 100.0, 10.0), p)
    assert sol.alpha_input > 50.0 / p.inertia_input


def test_locked_static_and_configuration_free():
    a = DrivelineParams()
    b = DrivelineParams(configuration=Configuration.B)
    assert solve_locked(TorqueSet(100.0 / a.ratio_second, 100.0), a).alpha_input == pytest.approx(0.0, abs=1e-12)
    t = TorqueSet(100.0, 200.0, 55.0)
    assert solve_locked(t, a).alpha_input == solve_locked(t, b).alpha_input
    assert solve_locked(t, a).hold_torque == -solve_locked(t, b).hold_torque
