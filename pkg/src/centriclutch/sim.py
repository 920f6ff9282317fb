"""
Fixed-step simulation of the clutch + two-speed gearbox through shifts.

The driveline switches between three drive modes:

    FirstGear     one-way clutch engaged, omega_2 = omega_1 * n2/n1
    Slipping      one-way clutch freewheels, centrifugal clutch slips
    LockedSecond  centrifugal clutch locked, omega_1 = omega_2

Each step integrates the active mode with classical RK4, then checks the mode
rules. Entering a constrained mode (lock-up, one-way re-engagement) merges the
shaft speeds with a momentum-conserving plastic impact; the kinetic energy lost
there is booked as dissipation so the energy balance closes.

Clutch torque in the trace (`T_centrifugal`) is the torque passed from the
input shaft to the second shaft; it is positive while the input shaft is the
faster one.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .clutch import torque_curve
from .driveline import Configuration, _first_gear, _locked, _second_gear
from .errors import DomainError, IntegrationError


class DriveMode(Enum):
    FIRST_GEAR = "FirstGear"
    SLIPPING = "Slipping"
    LOCKED_SECOND = "LockedSecond"


@dataclass(frozen=True)
class TorqueProfile:
    """Piecewise-constant torque: `segments` are (start_time, torque) pairs."""
    segments: tuple = ((0.0, 0.0),)

    def __post_init__(self):
        segs = tuple((float(t), float(v)) for t, v in self.segments)
        if not segs or segs[0][0] != 0.0:
            raise DomainError("torque profile must start at t = 0")
        if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
            raise DomainError("torque profile start times must increase")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def constant(cls, value):
        return cls(((0.0, value),))

    def __call__(self, t):
        value = self.segments[0][1]
        for start, v in self.segments:
            if t < start:
                break
            value = v
        return value


@dataclass(frozen=True)
class Scenario:
    input_torque: TorqueProfile
    output_torque: TorqueProfile
    initial_speed_input: float = 0.0
    duration: float = 1.0

    def __post_init__(self):
        # zero duration is allowed and yields an empty trace
        if not self.duration >= 0:
            raise DomainError("duration must be >= 0")


@dataclass(frozen=True)
class SimConfig:
    time_step: float = 1e-4
    lock_slip_tolerance: float = 0.5
    mode_hold_steps: int = 10
    max_speed: float = 1000.0  # ceiling of the full-engagement search

    def __post_init__(self):
        if not self.time_step > 0:
            raise DomainError("time_step must be > 0")
        if not self.lock_slip_tolerance > 0:
            raise DomainError("lock_slip_tolerance must be > 0")
        if self.mode_hold_steps < 1:
            raise DomainError("mode_hold_steps must be >= 1")
        if not self.max_speed > 0:
            raise DomainError("max_speed must be > 0")


@dataclass(frozen=True)
class SimState:
    t: float = 0.0
    omega_input: float = 0.0
    omega_driven: float = 0.0
    mode: DriveMode = DriveMode.FIRST_GEAR
    hold: int = 0  # steps left before another transition is allowed
    input_work: float = 0.0
    output_work: float = 0.0
    dissipated_energy: float = 0.0
    steps: int = 0


@dataclass
class Sample:
    """Accelerations and torques of a state, in trace conventions."""
    alpha_input: float
    alpha_driven: float
    clutch_torque: float
    one_way_torque: float


class _Plant:
    """Mode equations with the clutch torque law bound in."""

    def __init__(self, clutch, drive, scn):
        self.drive = drive
        self.curve = torque_curve(clutch)
        self.sign = drive.configuration.sign
        self.rho = drive.step_ratio
        self.reverse = drive.configuration is Configuration.B
        self.t_in = scn.input_torque
        self.t_out = scn.output_torque

    def clutch_speed(self, w1, w2):
        return w2 if self.reverse else w1

    def slip_torque(self, w1, w2):
        """Torque passed from shaft 1 to shaft 2, opposing the slip."""
        mag = self.curve.torque(self.clutch_speed(w1, w2))
        slip = w1 - w2
        if slip > 0:
            return mag
        if slip < 0:
            return -mag
        return 0.0

    def rates(self, mode, t, w1, w2):
        """(alpha_1, alpha_2, input power, output power, dissipation, clutch torque, one-way torque)."""
        p = self.drive
        t_in = self.t_in(t)
        t_out = self.t_out(t)
        if mode is DriveMode.FIRST_GEAR:
            w2 = self.rho * w1
            tau = self.slip_torque(w1, w2)
            a1, a2, t_ow = _first_gear(t_in, t_out, self.sign * tau, p)
            return a1, a2, t_in * w1, t_out * w1 / p.ratio_first, tau * (w1 - w2), tau, t_ow
        if mode is DriveMode.SLIPPING:
            tau = self.slip_torque(w1, w2)
            a1, a2 = _second_gear(t_in, t_out, self.sign * tau, p)
            return a1, a2, t_in * w1, t_out * w2 / p.ratio_second, tau * (w1 - w2), tau, 0.0
        a, hold = _locked(t_in, t_out, p)
        return a, a, t_in * w1, t_out * w1 / p.ratio_second, 0.0, self.sign * hold, 0.0


def _rk4(plant, mode, t, y, h):
    def f(tt, yy):
        r = plant.rates(mode, tt, yy[0], yy[1])
        return (r[0], r[1], r[2], r[3], r[4])

    k1 = f(t, y)
    k2 = f(t + h / 2, [a + h / 2 * b for a, b in zip(y, k1)])
    k3 = f(t + h / 2, [a + h / 2 * b for a, b in zip(y, k2)])
    k4 = f(t + h, [a + h * b for a, b in zip(y, k3)])
    return [a + h / 6 * (b1 + 2 * b2 + 2 * b3 + b4) for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4)]


def _impact(w1, w2, i1, i2, ratio):
    """Plastic impact onto omega_2 = ratio * omega_1; returns (w1, w2, energy lost)."""
    w = (i1 * w1 + ratio * i2 * w2) / (i1 + ratio * ratio * i2)
    before = 0.5 * (i1 * w1 * w1 + i2 * w2 * w2)
    after = 0.5 * (i1 + ratio * ratio * i2) * w * w
    return w, ratio * w, max(before - after, 0.0)


def _advance(plant, state, cfg):
    p = plant.drive
    h = cfg.time_step
    mode = state.mode
    y = [state.omega_input, state.omega_driven, state.input_work, state.output_work,
         state.dissipated_energy]
    w1, w2, w_in, w_out, diss = _rk4(plant, mode, state.t, y, h)
    n = state.steps + 1
    t = n * h  # no accumulated round-off in time

    if mode is DriveMode.FIRST_GEAR:
        w2 = plant.rho * w1
    elif mode is DriveMode.LOCKED_SECOND:
        w2 = w1
    if not (math.isfinite(w1) and math.isfinite(w2) and math.isfinite(diss)):
        raise IntegrationError(f"non-finite state at t={t:.6g} s", time=t)

    hold = max(state.hold - 1, 0)
    new_mode = mode
    if hold == 0:
        if mode is DriveMode.FIRST_GEAR:
            if plant.rates(mode, t, w1, w2)[6] < 0:
                new_mode = DriveMode.SLIPPING
        elif mode is DriveMode.SLIPPING:
            if abs(w1 - w2) <= cfg.lock_slip_tolerance:
                lw1, lw2, loss = _impact(w1, w2, p.inertia_input, p.inertia_second, 1.0)
                hold_torque = plant.rates(DriveMode.LOCKED_SECOND, t, lw1, lw2)[5]
                if abs(hold_torque) <= plant.curve.capacity(lw1):
                    new_mode, w1, w2, diss = DriveMode.LOCKED_SECOND, lw1, lw2, diss + loss
            if new_mode is mode and plant.rho * w1 >= w2:
                fw1, fw2, loss = _impact(w1, w2, p.inertia_input, p.inertia_second, plant.rho)
                if plant.rates(DriveMode.FIRST_GEAR, t, fw1, fw2)[6] >= 0:
                    new_mode, w1, w2, diss = DriveMode.FIRST_GEAR, fw1, fw2, diss + loss
        else:
            hold_torque = plant.rates(mode, t, w1, w2)[5]
            if abs(hold_torque) > plant.curve.capacity(plant.clutch_speed(w1, w2)):
                new_mode = DriveMode.SLIPPING
        if new_mode is not mode:
            hold = cfg.mode_hold_steps

    return SimState(t, w1, w2, new_mode, hold, w_in, w_out, diss, n)


def _sample(plant, state):
    a1, a2, _, _, _, tau, t_ow = plant.rates(state.mode, state.t, state.omega_input, state.omega_driven)
    return Sample(a1, a2, tau, t_ow)


def step(state, clutch, drive, cfg, scn):
    """Advance `state` by one time step under the torques of `scn`."""
    return _advance(_Plant(clutch, drive, scn), state, cfg)


def initial_state(scn, drive):
    w1 = float(scn.initial_speed_input)
    return SimState(omega_input=w1, omega_driven=drive.step_ratio * w1)


TRACE_COLUMNS = ("t", "omega_input", "omega_driven", "alpha_input", "alpha_driven",
                 "T_centrifugal", "T_one_way", "mode", "E_dissipated")


@dataclass
class SimTrace:
    """One row per step; the initial state is kept separately in `initial`."""
    t: np.ndarray
    omega_input: np.ndarray
    omega_driven: np.ndarray
    alpha_input: np.ndarray
    alpha_driven: np.ndarray
    clutch_torque: np.ndarray
    one_way_torque: np.ndarray
    mode: list
    dissipated_energy: np.ndarray
    input_work: np.ndarray
    output_work: np.ndarray
    initial: SimState = field(default_factory=SimState)

    def __len__(self):
        return len(self.t)

    def transitions(self):
        """List of (time, old_mode, new_mode)."""
        out = []
        prev = self.initial.mode
        for t, m in zip(self.t, self.mode):
            if m is not prev:
                out.append((float(t), prev, m))
                prev = m
        return out

    def mode_sequence(self):
        seq = [self.initial.mode]
        for _, _, m in self.transitions():
            seq.append(m)
        return seq

    def to_csv(self, path, decimation=1):
        with open(path, "w", newline="") as fh:
            write_trace_csv(self, fh, decimation)


def write_trace_csv(trace, fh, decimation=1):
    if decimation < 1:
        raise DomainError("decimation must be >= 1")
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for i in range(decimation - 1, len(trace), decimation):
        writer.writerow([
            repr(float(trace.t[i])), repr(float(trace.omega_input[i])), repr(float(trace.omega_driven[i])),
            repr(float(trace.alpha_input[i])), repr(float(trace.alpha_driven[i])),
            repr(float(trace.clutch_torque[i])), repr(float(trace.one_way_torque[i])),
            trace.mode[i].value, repr(float(trace.dissipated_energy[i])),
        ])


def _steps_for(duration, h):
    return int(round(duration / h)) if duration > 0 else 0


def run_scenario(scn, clutch, drive, cfg):
    """Integrate from t = 0 to `scn.duration` and record every step."""
    plant = _Plant(clutch, drive, scn)
    state = initial_state(scn, drive)
    initial = state
    n = _steps_for(scn.duration, cfg.time_step)
    cols = {k: np.empty(n) for k in ("t", "w1", "w2", "a1", "a2", "tau", "tow", "diss", "win", "wout")}
    modes = []
    for i in range(n):
        state = _advance(plant, state, cfg)
        s = _sample(plant, state)
        cols["t"][i] = state.t
        cols["w1"][i] = state.omega_input
        cols["w2"][i] = state.omega_driven
        cols["a1"][i] = s.alpha_input
        cols["a2"][i] = s.alpha_driven
        cols["tau"][i] = s.clutch_torque
        cols["tow"][i] = s.one_way_torque
        cols["diss"][i] = state.dissipated_energy
        cols["win"][i] = state.input_work
        cols["wout"][i] = state.output_work
        modes.append(state.mode)
    return SimTrace(cols["t"], cols["w1"], cols["w2"], cols["a1"], cols["a2"], cols["tau"], cols["tow"],
                    modes, cols["diss"], cols["win"], cols["wout"], initial)


def kinetic_energy(drive, omega_input, omega_driven):
    return 0.5 * (drive.inertia_input * omega_input ** 2 + drive.inertia_second * omega_driven ** 2)


def energy_residual(trace, drive):
    """Input work - output work - change in kinetic energy - dissipation at the end of a run."""
    if len(trace) == 0:
        return 0.0
    ke0 = kinetic_energy(drive, trace.initial.omega_input, trace.initial.omega_driven)
    ke1 = kinetic_energy(drive, trace.omega_input[-1], trace.omega_driven[-1])
    return float(trace.input_work[-1] - trace.output_work[-1] - (ke1 - ke0) - trace.dissipated_energy[-1])


def full_engagement_speed(clutch, drive, scn, cfg):
    """Input speed at the first lock-up of the centrifugal clutch.

    Returns None (not engaged) if no lock occurs before the scenario ends or
    before the input shaft exceeds `cfg.max_speed`.
    """
    plant = _Plant(clutch, drive, scn)
    # lock needs clutch torque, which needs the spider above onset
    if plant.curve.onset > cfg.max_speed:
        return None
    state = initial_state(scn, drive)
    n = _steps_for(scn.duration, cfg.time_step)
    for _ in range(n):
        prev = state.mode
        state = _advance(plant, state, cfg)
        if prev is DriveMode.SLIPPING and state.mode is DriveMode.LOCKED_SECOND:
            return state.omega_input
        if abs(state.omega_input) > cfg.max_speed:
            return None
    return None


def with_configuration(drive, configuration):
    return replace(drive, configuration=Configuration(configuration))
