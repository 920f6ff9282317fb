"""
Three-shoe centrifugal clutch: shoe kinematics, onset speed, lining pressure
and transmitted torque.

Each shoe is pivoted on the spider and pressed onto the drum by its own
centrifugal force, against a spring. The lining pressure follows the
pivoted-shoe law p(theta) = P_a * sin(theta) / sin(theta_a), with
theta_a = min(theta2, pi/2), so the torque of all shoes is

    T = n * mu * r**2 * b * P_a / sin(theta_a) * (cos(theta1) - cos(theta2))

All quantities are SI; angles are radians.
"""

from dataclasses import dataclass
from enum import Enum
from math import cos, pi, radians, sin, sqrt

from .errors import DomainError, SelfLockingError


class FrictionMode(Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class EngagementMode(Enum):
    """Shoe orientation relative to the drum's sliding direction."""
    SELF_REINFORCING = "self_reinforcing"  # friction moment helps the centrifugal moment
    SELF_REDUCING = "self_reducing"


@dataclass(frozen=True)
class ClutchGeometry:
    shoe_count: int = 3
    shoe_width: float = 0.023            # b
    theta1: float = radians(33.0)        # lining start angle from the pin
    theta2: float = radians(93.0)        # lining end angle from the pin
    drum_radius: float = 0.0575          # r, placeholder
    pin_to_center: float = 0.046         # a
    shoe_cm_radius: float = 0.0467       # r_cm
    centrifugal_arm: float = 0.03952     # c, arm of the centrifugal force about the pin
    reaction_arm: float = 0.055          # d, arm of the drum normal resultant
    spring_arm_primary: float = 0.05066  # r_s1
    spring_arm_secondary: float = 0.00089  # r_s2

    def __post_init__(self):
        if int(self.shoe_count) != self.shoe_count or self.shoe_count < 1:
            raise DomainError(f"shoe_count must be a positive integer, got {self.shoe_count}")
        for name in ("shoe_width", "drum_radius", "pin_to_center", "shoe_cm_radius",
                     "centrifugal_arm", "reaction_arm", "spring_arm_primary"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.spring_arm_secondary >= 0:
            raise DomainError("spring_arm_secondary must be >= 0")
        if not 0 < self.theta1 < self.theta2 < pi:
            raise DomainError("need 0 < theta1 < theta2 < pi")
        if not self.shoe_cm_radius < self.drum_radius:
            raise DomainError("shoe centre of mass must lie inside the drum")

    @property
    def theta_a(self):
        """Angle of peak lining pressure."""
        return min(self.theta2, pi / 2)


@dataclass(frozen=True)
class FrictionSpec:
    mu_static: float = 0.35
    mu_dynamic: float = 0.30
    mode: FrictionMode = FrictionMode.DYNAMIC

    def __post_init__(self):
        # mu = 0 is accepted for the frictionless limit
        if not 0 <= self.mu_dynamic <= self.mu_static < 2:
            raise DomainError("need 0 <= mu_dynamic <= mu_static < 2")

    @property
    def mu(self):
        return self.mu_static if self.mode is FrictionMode.STATIC else self.mu_dynamic


@dataclass(frozen=True)
class SpringSpec:
    preload: float = 100.0       # N
    stiffness: float = 10_000.0  # N/m
    shoe_clearance: float = 0.0  # radial gap closed before the lining touches

    def __post_init__(self):
        for name in ("preload", "stiffness", "shoe_clearance"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ClutchParams:
    geometry: ClutchGeometry = ClutchGeometry()
    friction: FrictionSpec = FrictionSpec()
    spring: SpringSpec = SpringSpec()
    shoe_mass: float = 0.2
    engagement_mode: EngagementMode = EngagementMode.SELF_REINFORCING
    # Add F_spring * r_s2 to the restraining moment. Off by default.
    secondary_arm_moment: bool = False

    def __post_init__(self):
        if not self.shoe_mass > 0:
            raise DomainError(f"shoe_mass must be > 0, got {self.shoe_mass}")


def spring_elongation(swing_angle, geometry):
    """Spring stretch when the shoe swings `swing_angle` about its pin (arc-length model)."""
    if not 0 <= swing_angle < pi / 4:
        raise DomainError(f"swing angle {swing_angle} outside [0, pi/4)")
    return geometry.spring_arm_primary * swing_angle


def contact_swing_angle(params):
    """Pin swing needed to close the shoe clearance, measured at the reaction arm."""
    return params.spring.shoe_clearance / params.geometry.reaction_arm


def spring_force_at_contact(params):
    delta = spring_elongation(contact_swing_angle(params), params.geometry)
    return params.spring.preload + params.spring.stiffness * delta


def restraining_moment(params):
    """Spring moment about the pin once the lining touches the drum."""
    g = params.geometry
    arm = g.spring_arm_primary
    if params.secondary_arm_moment:
        arm += g.spring_arm_secondary
    return spring_force_at_contact(params) * arm


def _centrifugal_coefficient(params):
    # centrifugal moment about the pin = coefficient * omega**2
    g = params.geometry
    return params.shoe_mass * g.shoe_cm_radius * g.centrifugal_arm


def onset_speed(params):
    """Lowest rotor speed at which the shoe presses on the drum (rad/s)."""
    if not params.shoe_mass > 0:
        raise DomainError("shoe_mass must be > 0")
    return sqrt(restraining_moment(params) / _centrifugal_coefficient(params))


def normal_moment_integral(geometry):
    """Integral of sin(theta)**2 over the lining arc."""
    t1, t2 = geometry.theta1, geometry.theta2
    return (t2 - t1) / 2 - (sin(2 * t2) - sin(2 * t1)) / 4


def friction_moment_integral(geometry):
    """Integral of sin(theta) * (r - d*cos(theta)) over the lining arc."""
    t1, t2 = geometry.theta1, geometry.theta2
    r, d = geometry.drum_radius, geometry.reaction_arm
    return r * (cos(t1) - cos(t2)) - d / 2 * (sin(t2) ** 2 - sin(t1) ** 2)


def _pressure_denominator(params, mu):
    """Moment about the pin per unit peak pressure, signed by engagement mode."""
    g = params.geometry
    scale = g.shoe_width * g.drum_radius / sin(g.theta_a)
    m_n = scale * g.reaction_arm * normal_moment_integral(g)
    m_f = scale * mu * friction_moment_integral(g)
    if params.engagement_mode is EngagementMode.SELF_REINFORCING:
        if m_f >= m_n:
            raise SelfLockingError(
                f"self-locking shoe: friction moment {m_f:.6g} >= normal moment {m_n:.6g} per Pa")
        return m_n - m_f
    return m_n + m_f


def peak_pressure(omega, params, mu=None):
    """Peak lining pressure P_a (Pa) from the moment balance about the pin.

    `mu` defaults to the coefficient selected by the friction mode.
    """
    if mu is None:
        mu = params.friction.mu
    denominator = _pressure_denominator(params, mu)
    if omega < onset_speed(params):
        raise DomainError(f"omega={omega} is below the onset speed")
    actuating = _centrifugal_coefficient(params) * omega ** 2 - restraining_moment(params)
    return max(actuating, 0.0) / denominator


def torque_from_pressure(p_a, geometry, mu):
    """Friction torque of all shoes for peak lining pressure `p_a`."""
    g = geometry
    return (g.shoe_count * mu * g.drum_radius ** 2 * g.shoe_width * p_a / sin(g.theta_a)
            * (cos(g.theta1) - cos(g.theta2)))


def _torque(omega, params, mu):
    if omega < 0:
        raise DomainError(f"omega must be >= 0, got {omega}")
    _pressure_denominator(params, mu)  # surface self-locking at any speed
    if omega < onset_speed(params):
        return 0.0
    return torque_from_pressure(peak_pressure(omega, params, mu), params.geometry, mu)


def transmitted_torque(omega, params):
    """Torque carried by the slipping clutch at spider speed `omega` (N*m)."""
    return _torque(omega, params, params.friction.mu)


def torque_capacity(omega, params):
    """Largest torque the engaged clutch holds without slipping (static friction)."""
    return _torque(omega, params, params.friction.mu_static)


@dataclass(frozen=True)
class TorqueCurve:
    """Precomputed torque law T = gain * (omega**2 - onset**2) above onset.

    Equivalent to `transmitted_torque` / `torque_capacity` but cheap enough to
    call inside the integrator. Negative speeds use |omega|.
    """
    onset: float
    gain: float
    capacity_gain: float

    def torque(self, omega):
        w2 = omega * omega
        o2 = self.onset * self.onset
        return self.gain * (w2 - o2) if w2 > o2 else 0.0

    def capacity(self, omega):
        w2 = omega * omega
        o2 = self.onset * self.onset
        return self.capacity_gain * (w2 - o2) if w2 > o2 else 0.0


def torque_curve(params):
    g = params.geometry
    arc = g.shoe_count * g.drum_radius ** 2 * g.shoe_width * (cos(g.theta1) - cos(g.theta2)) / sin(g.theta_a)
    coeff = _centrifugal_coefficient(params)

    def gain(mu):
        return arc * mu * coeff / _pressure_denominator(params, mu)

    return TorqueCurve(onset_speed(params), gain(params.friction.mu), gain(params.friction.mu_static))
