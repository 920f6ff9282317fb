"""Centrifugal clutch + two-speed gearbox simulation and engagement classifier."""

from .clutch import (ClutchGeometry, ClutchParams, EngagementMode, FrictionMode, FrictionSpec,
                     SpringSpec, onset_speed, peak_pressure, spring_elongation, torque_capacity,
                     transmitted_torque)
from .driveline import (Configuration, DriveSolution, DrivelineParams, TorqueSet, solve_first_gear,
                        solve_locked, solve_second_gear_slipping)
from .errors import ConfigError, DomainError, IntegrationError, SelfLockingError, TrainingError
from .sim import (DriveMode, Scenario, SimConfig, SimState, SimTrace, TorqueProfile,
                  full_engagement_speed, run_scenario, step)

__version__ = "0.1.0"
