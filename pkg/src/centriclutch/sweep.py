"""
Shoe-mass x spring-preload grids: full-engagement speed surfaces and labeled
engagement datasets for the classifier.

Grid points are simulated together as one vectorized batch. The batch
integrator performs, element by element, the same floating-point operations
as the scalar engine in `sim`, so a point gives the same answer whether it is
run alone, in a batch, or in a worker process.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .clutch import torque_curve
from .driveline import Configuration
from .errors import DomainError, IntegrationError
from .sim import DriveMode, _steps_for, full_engagement_speed

FG, SL, LK = 0, 1, 2
# below this many points the per-step numpy overhead outweighs vectorization
BATCH_MIN_POINTS = 24

SURFACE_COLUMNS = ("shoe_mass", "preload", "full_engagement_speed", "engaged")


@dataclass(frozen=True)
class GridSpec:
    mass_range: tuple = (0.05, 0.5, 21)      # (min, max, count), kg
    preload_range: tuple = (20.0, 300.0, 21)  # (min, max, count), N
    configuration: Configuration = Configuration.A
    operating_speed_max: float = 400.0

    def __post_init__(self):
        for name in ("mass_range", "preload_range"):
            lo, hi, count = getattr(self, name)
            if not lo < hi:
                raise DomainError(f"{name}: min must be < max")
            if int(count) != count or count < 2:
                raise DomainError(f"{name}: count must be an integer >= 2")
        if not self.operating_speed_max > 0:
            raise DomainError("operating_speed_max must be > 0")
        object.__setattr__(self, "configuration", Configuration(self.configuration))

    def masses(self):
        lo, hi, n = self.mass_range
        return np.linspace(lo, hi, int(n))

    def preloads(self):
        lo, hi, n = self.preload_range
        return np.linspace(lo, hi, int(n))

    def points(self):
        """Row-major (mass, preload) pairs: mass outer, preload inner."""
        return [(float(m), float(f)) for m in self.masses() for f in self.preloads()]


@dataclass(frozen=True)
class EngagementSample:
    shoe_mass: float
    preload: float
    full_engagement_speed: float = None  # None: never locked
    engaged: bool = False


def is_engaged(speed, operating_speed_max):
    return speed is not None and speed <= operating_speed_max


def with_mass_preload(base, mass, preload):
    return replace(base, shoe_mass=mass, spring=replace(base.spring, preload=preload))


class _Batch:
    """Vectorized twin of `sim._Plant`."""

    def __init__(self, onset, gain, cap_gain, drive, scn):
        self.drive = drive
        self.onset = onset
        self.gain = gain
        self.cap_gain = cap_gain
        self.sign = drive.configuration.sign
        self.rho = drive.step_ratio
        self.reverse = drive.configuration is Configuration.B
        self.t_in = scn.input_torque
        self.t_out = scn.output_torque

    def take(self, idx):
        self.onset, self.gain, self.cap_gain = self.onset[idx], self.gain[idx], self.cap_gain[idx]

    def _curve(self, g, omega):
        w2 = omega * omega
        o2 = self.onset * self.onset
        return np.where(w2 > o2, g * (w2 - o2), 0.0)

    def capacity(self, omega):
        return self._curve(self.cap_gain, omega)

    def slip_torque(self, w1, w2):
        mag = self._curve(self.gain, w2 if self.reverse else w1)
        slip = w1 - w2
        return np.where(slip > 0, mag, np.where(slip < 0, -mag, 0.0))

    def first_gear(self, t_in, t_out, w1):
        p, s, rho = self.drive, self.sign, self.rho
        w2 = rho * w1
        tau = self.slip_torque(w1, w2)
        t_cf = s * tau
        a1 = (t_in - t_out / p.ratio_first - s * t_cf * (1.0 - rho)) / (p.inertia_input + rho * rho * p.inertia_second)
        a2 = rho * a1
        t_ow = p.inertia_second * a2 - s * t_cf
        return a1, a2, t_ow

    def hold_torque(self, t_in, t_out):
        p, s = self.drive, self.sign
        a = (t_in - t_out / p.ratio_second) / (p.inertia_input + p.inertia_second)
        hold = s * (p.inertia_second * a + t_out / p.ratio_second)
        return a, s * hold

    def accel(self, mode, t, w1, w2):
        p, s = self.drive, self.sign
        t_in, t_out = self.t_in(t), self.t_out(t)
        f1, f2, _ = self.first_gear(t_in, t_out, w1)
        t_cf = s * self.slip_torque(w1, w2)
        s1 = (t_in - s * t_cf) / p.inertia_input
        s2 = (s * t_cf - t_out / p.ratio_second) / p.inertia_second
        a, _ = self.hold_torque(t_in, t_out)
        a1 = np.where(mode == FG, f1, np.where(mode == SL, s1, a))
        a2 = np.where(mode == FG, f2, np.where(mode == SL, s2, a))
        return a1, a2


def _impact(w1, w2, i1, i2, ratio):
    w = (i1 * w1 + ratio * i2 * w2) / (i1 + ratio * ratio * i2)
    return w, ratio * w


def _batch_engagement(onset, gain, cap_gain, drive, scn, cfg):
    """Full-engagement speeds for many clutches at once; NaN where none."""
    n_pts = len(onset)
    result = np.full(n_pts, np.nan)
    batch = _Batch(np.asarray(onset, float), np.asarray(gain, float), np.asarray(cap_gain, float), drive, scn)
    # mirror the early exit of sim.full_engagement_speed
    live = np.flatnonzero(~(batch.onset > cfg.max_speed))
    batch.take(live)
    if live.size == 0:
        return result

    p = drive
    h = cfg.time_step
    rho = batch.rho
    w1 = np.full(live.size, float(scn.initial_speed_input))
    w2 = rho * w1
    mode = np.full(live.size, FG)
    hold = np.zeros(live.size, dtype=int)
    t = 0.0

    for n in range(1, _steps_for(scn.duration, h) + 1):
        k1 = batch.accel(mode, t, w1, w2)
        k2 = batch.accel(mode, t + h / 2, w1 + h / 2 * k1[0], w2 + h / 2 * k1[1])
        k3 = batch.accel(mode, t + h / 2, w1 + h / 2 * k2[0], w2 + h / 2 * k2[1])
        k4 = batch.accel(mode, t + h, w1 + h * k3[0], w2 + h * k3[1])
        w1 = w1 + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w2 = w2 + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        t = n * h
        w2 = np.where(mode == FG, rho * w1, np.where(mode == LK, w1, w2))
        bad = ~(np.isfinite(w1) & np.isfinite(w2))
        if bad.any():
            err = IntegrationError(f"non-finite state at t={t:.6g} s", time=t)
            err.index = int(live[np.flatnonzero(bad)[0]])
            raise err

        hold = np.maximum(hold - 1, 0)
        free = hold == 0
        t_in, t_out = batch.t_in(t), batch.t_out(t)
        new_mode = mode.copy()

        _, _, t_ow = batch.first_gear(t_in, t_out, w1)
        new_mode[free & (mode == FG) & (t_ow < 0)] = SL

        slipping = free & (mode == SL)
        _, tau_lock = batch.hold_torque(t_in, t_out)
        lw1, lw2 = _impact(w1, w2, p.inertia_input, p.inertia_second, 1.0)
        lock = slipping & (np.abs(w1 - w2) <= cfg.lock_slip_tolerance) & (np.abs(tau_lock) <= batch.capacity(lw1))
        fw1, fw2 = _impact(w1, w2, p.inertia_input, p.inertia_second, rho)
        _, _, f_ow = batch.first_gear(t_in, t_out, fw1)
        regear = slipping & ~lock & (rho * w1 >= w2) & (f_ow >= 0)
        new_mode[lock] = LK
        new_mode[regear] = FG
        w1 = np.where(lock, lw1, np.where(regear, fw1, w1))
        w2 = np.where(lock, lw2, np.where(regear, fw2, w2))

        spider = w2 if batch.reverse else w1
        new_mode[free & (mode == LK) & (np.abs(tau_lock) > batch.capacity(spider))] = SL

        hold = np.where(new_mode != mode, cfg.mode_hold_steps, hold)
        mode = new_mode

        result[live[lock]] = w1[lock]
        done = lock | (np.abs(w1) > cfg.max_speed)
        if done.any():
            keep = ~done
            live, w1, w2, mode, hold = live[keep], w1[keep], w2[keep], mode[keep], hold[keep]
            batch.take(keep)
            if live.size == 0:
                break
    return result


def engagement_speeds(points, base, drive, scn, cfg):
    """Full-engagement speed (or None) for each (mass, preload) in `points`."""
    if len(points) < BATCH_MIN_POINTS:
        return [_scalar_speed(base, mass, preload, drive, scn, cfg) for mass, preload in points]
    curves = []
    for mass, preload in points:
        try:
            curves.append(torque_curve(with_mass_preload(base, mass, preload)))
        except DomainError as exc:
            raise DomainError(f"at shoe_mass={mass!r}, preload={preload!r}: {exc}") from exc
    onset = np.array([c.onset for c in curves])
    gain = np.array([c.gain for c in curves])
    cap = np.array([c.capacity_gain for c in curves])
    try:
        speeds = _batch_engagement(onset, gain, cap, drive, scn, cfg)
    except IntegrationError as exc:
        mass, preload = points[exc.index]
        raise IntegrationError(f"at shoe_mass={mass!r}, preload={preload!r}: {exc}", exc.time) from exc
    return [None if math.isnan(s) else float(s) for s in speeds]


def _scalar_speed(base, mass, preload, drive, scn, cfg):
    where = f"at shoe_mass={mass!r}, preload={preload!r}"
    try:
        return full_engagement_speed(with_mass_preload(base, mass, preload), drive, scn, cfg)
    except DomainError as exc:
        raise DomainError(f"{where}: {exc}") from exc
    except IntegrationError as exc:
        raise IntegrationError(f"{where}: {exc}", exc.time) from exc


def _chunks(seq, n):
    size = -(-len(seq) // n)
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def _run_points(points, base, drive, scn, cfg, workers=1):
    if workers <= 1 or len(points) < 2:
        return engagement_speeds(points, base, drive, scn, cfg)
    chunks = _chunks(points, workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(engagement_speeds, chunks, *([x] * len(chunks) for x in (base, drive, scn, cfg)))
        return [s for part in parts for s in part]


def sweep_engagement_speed(grid, base, drive, scn, cfg, workers=1):
    """One full-engagement evaluation per grid node, row-major (mass, then preload)."""
    drive = replace(drive, configuration=grid.configuration)
    points = grid.points()
    speeds = _run_points(points, base, drive, scn, cfg, workers)
    return [EngagementSample(m, f, s, is_engaged(s, grid.operating_speed_max))
            for (m, f), s in zip(points, speeds)]


@dataclass
class EngagementDataset:
    samples: list = field(default_factory=list)

    def features(self):
        x = np.array([[s.shoe_mass, s.preload] for s in self.samples], dtype=float).reshape(-1, 2)
        y = np.array([1.0 if s.engaged else 0.0 for s in self.samples])
        return x, y

    def to_csv(self, path):
        write_samples_csv(self.samples, path)

    @classmethod
    def from_csv(cls, path):
        return cls(read_samples_csv(path))


def generate_dataset(grid, base, drive, scn, cfg, seed, jitter_points=0, workers=1):
    """Labeled samples at every grid node, then `jitter_points` seeded uniform draws."""
    samples = sweep_engagement_speed(grid, base, drive, scn, cfg, workers)
    if jitter_points > 0:
        rng = np.random.default_rng(seed)
        (m0, m1, _), (f0, f1, _) = grid.mass_range, grid.preload_range
        extra = [(float(m), float(f)) for m, f in zip(rng.uniform(m0, m1, jitter_points),
                                                     rng.uniform(f0, f1, jitter_points))]
        drive = replace(drive, configuration=grid.configuration)
        speeds = _run_points(extra, base, drive, scn, cfg, workers)
        samples += [EngagementSample(m, f, s, is_engaged(s, grid.operating_speed_max))
                    for (m, f), s in zip(extra, speeds)]
    return EngagementDataset(samples)


def write_samples_csv(samples, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SURFACE_COLUMNS)
        for s in samples:
            speed = "" if s.full_engagement_speed is None else repr(s.full_engagement_speed)
            writer.writerow([repr(s.shoe_mass), repr(s.preload), speed, int(s.engaged)])


def read_samples_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SURFACE_COLUMNS:
            raise DomainError(f"{path}: expected header {','.join(SURFACE_COLUMNS)}")
        return [EngagementSample(float(r["shoe_mass"]), float(r["preload"]),
                                 float(r["full_engagement_speed"]) if r["full_engagement_speed"] else None,
                                 r["engaged"] == "1")
                for r in reader]


__all__ = ["GridSpec", "EngagementSample", "EngagementDataset", "sweep_engagement_speed",
           "generate_dataset", "engagement_speeds", "is_engaged", "DriveMode"]
