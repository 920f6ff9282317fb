"""
Rigid-body equations of the two-speed gearbox with a one-way clutch and a
centrifugal clutch.

Shaft 1 carries the input, shaft 2 the second-gear path. In first gear the
one-way clutch ties the shafts kinematically (alpha_2 = alpha_1 * n_2/n_1).
In second gear the one-way clutch freewheels and only the centrifugal clutch
couples them. Configuration A and B differ in the sign with which the
centrifugal clutch torque enters each shaft:

    A, first gear     T_in - T_out/n1 - T_ow*n2/n1 - T_cf = I1*a1
                      T_ow + T_cf                         = I2*a2
    A, second gear    T_in - T_cf                         = I1*a1
                      T_cf - T_out/n2                     = I2*a2

B flips the sign of every T_cf term.

The public solvers take and return values in exactly this convention.
"""

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError


class Configuration(Enum):
    A = "A"  # clutch paired forward: spider on the input shaft
    B = "B"  # clutch paired in reverse: spider on the second shaft

    @property
    def sign(self):
        """Sign of T_cf in the input-shaft equation, negated."""
        return 1.0 if self is Configuration.A else -1.0


@dataclass(frozen=True)
class DrivelineParams:
    ratio_first: float = 4.455
    ratio_second: float = 3.538
    inertia_input: float = 0.468
    inertia_second: float = 0.468
    configuration: Configuration = Configuration.A

    def __post_init__(self):
        if not self.ratio_first > self.ratio_second > 0:
            raise DomainError("need ratio_first > ratio_second > 0")
        if not (self.inertia_input > 0 and self.inertia_second > 0):
            raise DomainError("shaft inertias must be > 0")

    @property
    def step_ratio(self):
        """n_2 / n_1, the second-shaft to input-shaft speed ratio in first gear."""
        return self.ratio_second / self.ratio_first


@dataclass(frozen=True)
class TorqueSet:
    input_torque: float
    output_torque: float
    centrifugal_torque: float = 0.0


@dataclass(frozen=True)
class DriveSolution:
    alpha_input: float
    alpha_second: float
    one_way_torque: float = 0.0
    hold_torque: float = 0.0  # clutch torque that keeps a locked clutch locked


def _check(p):
    if p.inertia_input <= 0 or p.inertia_second <= 0:
        raise DomainError("singular driveline: zero inertia")


def _first_gear(t_in, t_out, t_cf, p):
    s = p.configuration.sign
    rho = p.step_ratio
    i2 = p.inertia_second
    # substitute a2 = rho*a1 and T_ow = I2*a2 -+ T_cf into the input-shaft equation
    a1 = (t_in - t_out / p.ratio_first - s * t_cf * (1.0 - rho)) / (p.inertia_input + rho * rho * i2)
    a2 = rho * a1
    t_ow = i2 * a2 - s * t_cf
    return a1, a2, t_ow


def _second_gear(t_in, t_out, t_cf, p):
    s = p.configuration.sign
    return (t_in - s * t_cf) / p.inertia_input, (s * t_cf - t_out / p.ratio_second) / p.inertia_second


def _locked(t_in, t_out, p):
    a = (t_in - t_out / p.ratio_second) / (p.inertia_input + p.inertia_second)
    hold = p.configuration.sign * (p.inertia_second * a + t_out / p.ratio_second)
    return a, hold


def solve_first_gear(t, p):
    """One-way clutch engaged: solve for (alpha_1, alpha_2, T_one-way)."""
    _check(p)
    a1, a2, t_ow = _first_gear(t.input_torque, t.output_torque, t.centrifugal_torque, p)
    return DriveSolution(a1, a2, t_ow)


def solve_second_gear_slipping(t, p):
    """One-way clutch freewheeling, centrifugal clutch slipping."""
    _check(p)
    a1, a2 = _second_gear(t.input_torque, t.output_torque, t.centrifugal_torque, p)
    return DriveSolution(a1, a2, 0.0)


def solve_locked(t, p):
    """Centrifugal clutch locked: both shafts share one acceleration.

    `t.centrifugal_torque` is ignored; the returned `hold_torque` is the value
    of T_cf, in the configuration's sign convention, that keeps the lock.
    """
    _check(p)
    a, hold = _locked(t.input_torque, t.output_torque, p)
    return DriveSolution(a, a, 0.0, hold)
