"""
Loading of the shared YAML configuration file.

Every problem is reported as ``path:line: section.key: message`` so that a
bad value can be found in the file directly.
"""

import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import yaml

from .clutch import (ClutchGeometry, ClutchParams, EngagementMode, FrictionMode,
                     FrictionSpec, SpringSpec)
from .driveline import Configuration, DrivelineParams
from .errors import ConfigError
from .mlp import MlpSpec, TrainConfig
from .sim import Scenario, SimConfig, TorqueProfile
from .sweep import GridSpec

SCHEMA = {
    "seed": None,
    "clutch": ("shoe_count", "shoe_width", "theta1_deg", "theta2_deg", "drum_radius", "pin_to_center",
               "shoe_cm_radius", "centrifugal_arm", "reaction_arm", "spring_arm_primary",
               "spring_arm_secondary", "secondary_arm_moment", "shoe_mass", "preload", "stiffness",
               "shoe_clearance", "mu_static", "mu_dynamic", "friction_mode", "engagement_mode"),
    "driveline": ("ratio_first", "ratio_second", "inertia_input", "inertia_second", "configuration"),
    "scenario": ("duration", "initial_speed_input", "input_torque", "output_torque"),
    "engagement_scenario": ("duration", "initial_speed_input", "input_torque", "output_torque"),
    "sim": ("time_step", "lock_slip_tolerance", "mode_hold_steps", "max_speed", "decimation"),
    "grid": ("mass_range", "preload_range", "operating_speed_max", "jitter_points", "workers"),
    "mlp": ("layer_sizes", "hidden_activation"),
    "train": ("learning_rate", "epochs", "batch_size", "validation_fraction"),
}
OPTIONAL = {("clutch", "secondary_arm_moment"), ("sim", "decimation"),
            ("grid", "jitter_points"), ("grid", "workers")}


def default_config_path():
    return Path(str(resources.files("centriclutch") / "data" / "default.yaml"))


@dataclass(frozen=True)
class Config:
    path: str
    seed: int
    clutch: ClutchParams
    drive: DrivelineParams
    scenario: Scenario
    engagement_scenario: Scenario
    sim: SimConfig
    decimation: int
    grid: GridSpec
    jitter_points: int
    workers: int
    mlp: MlpSpec
    train: TrainConfig

    def with_configuration(self, configuration):
        c = Configuration(configuration)
        return replace(self, drive=replace(self.drive, configuration=c),
                       grid=replace(self.grid, configuration=c))


class _Reader:
    """Typed access to the parsed mapping with line-numbered errors."""

    def __init__(self, path, data, lines):
        self.path = path
        self.data = data
        self.lines = lines

    def fail(self, where, message):
        line = self.lines.get(where) or self.lines.get(where[:1]) or 1
        raise ConfigError(f"{self.path}:{line}: {'.'.join(where)}: {message}")

    def get(self, section, key):
        sec = self.data.get(section)
        if not isinstance(sec, dict):
            self.fail((section,), "missing section")
        if key not in sec:
            self.fail((section, key), "missing key")
        return sec[key]

    def number(self, section, key, integer=False):
        v = self.get(section, key)
        if isinstance(v, str):
            try:
                v = float(v)
            except ValueError:
                self.fail((section, key), f"expected a number, got {v!r}")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail((section, key), f"expected a number, got {v!r}")
        if integer:
            if int(v) != v:
                self.fail((section, key), f"expected an integer, got {v!r}")
            return int(v)
        return float(v)

    def choice(self, section, key, enum):
        v = self.get(section, key)
        try:
            return enum(str(v))
        except ValueError:
            self.fail((section, key), f"expected one of {[e.value for e in enum]}, got {v!r}")

    def optional(self, section, key, default, integer=False):
        if key not in (self.data.get(section) or {}):
            return default
        if isinstance(default, bool):
            v = self.get(section, key)
            if not isinstance(v, bool):
                self.fail((section, key), f"expected true or false, got {v!r}")
            return v
        return self.number(section, key, integer)

    def build(self, section, factory, *args, **kwargs):
        """Call a validating constructor, blaming the key its message names."""
        try:
            return factory(*args, **kwargs)
        except (ValueError, TypeError) as exc:
            msg = str(exc)
            keys = SCHEMA.get(section) or ()
            hit = next((k for k in sorted(keys, key=len, reverse=True) if k.split("_deg")[0] in msg), None)
            self.fail((section, hit) if hit else (section,), msg)


def _key_lines(node):
    lines = {}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            lines[(k.value,)] = k.start_mark.line + 1
            if isinstance(v, yaml.MappingNode):
                for k2, _ in v.value:
                    lines[(k.value, k2.value)] = k2.start_mark.line + 1
    return lines


def _apply_override(data, item):
    if "=" not in item or "." not in item.split("=", 1)[0]:
        raise ConfigError(f"override {item!r}: expected section.key=value")
    dotted, raw = item.split("=", 1)
    section, key = dotted.split(".", 1)
    data.setdefault(section, {})
    if not isinstance(data[section], dict):
        raise ConfigError(f"override {item!r}: {section} is not a section")
    data[section][key] = yaml.safe_load(raw)


def _profile(r, section, key):
    v = r.get(section, key)
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        v = [[0.0, v]]
    try:
        return TorqueProfile(tuple((float(t), float(x)) for t, x in v))
    except (TypeError, ValueError) as exc:
        r.fail((section, key), f"expected [[start_time, torque], ...]: {exc}")


def _scenario(r, section):
    return r.build(section, Scenario, _profile(r, section, "input_torque"), _profile(r, section, "output_torque"),
                   r.number(section, "initial_speed_input"), r.number(section, "duration"))


def _range(r, key):
    v = r.get("grid", key)
    if not (isinstance(v, list) and len(v) == 3):
        r.fail(("grid", key), "expected [min, max, count]")
    try:
        lo, hi, n = float(v[0]), float(v[1]), v[2]
    except (TypeError, ValueError):
        r.fail(("grid", key), "expected [min, max, count]")
    if isinstance(n, bool) or not isinstance(n, (int, float)) or int(n) != n:
        r.fail(("grid", key), "count must be an integer")
    return lo, hi, int(n)


def parse_config(text, path="<config>", overrides=(), seed=None):
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else 1
        raise ConfigError(f"{path}:{line}: invalid YAML: {exc.problem or exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be a mapping")
    for item in overrides:
        _apply_override(data, item)
    if seed is not None:
        data["seed"] = seed
    r = _Reader(path, data, _key_lines(node))

    for section, value in data.items():
        if section not in SCHEMA:
            r.fail((str(section),), "unknown section")
        keys = SCHEMA[section]
        if keys is None:
            continue
        if not isinstance(value, dict):
            r.fail((section,), "expected a mapping")
        for key in value:
            if key not in keys:
                r.fail((section, str(key)), "unknown key")
    for section, keys in SCHEMA.items():
        for key in keys or ():
            if (section, key) not in OPTIONAL:
                r.get(section, key)

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        r.fail(("seed",), f"expected an integer, got {seed!r}")

    n = lambda key, **kw: r.number("clutch", key, **kw)  # noqa: E731
    geometry = r.build("clutch", ClutchGeometry,
                       shoe_count=n("shoe_count", integer=True), shoe_width=n("shoe_width"),
                       theta1=math.radians(n("theta1_deg")), theta2=math.radians(n("theta2_deg")),
                       drum_radius=n("drum_radius"), pin_to_center=n("pin_to_center"),
                       shoe_cm_radius=n("shoe_cm_radius"), centrifugal_arm=n("centrifugal_arm"),
                       reaction_arm=n("reaction_arm"), spring_arm_primary=n("spring_arm_primary"),
                       spring_arm_secondary=n("spring_arm_secondary"))
    friction = r.build("clutch", FrictionSpec, n("mu_static"), n("mu_dynamic"),
                       r.choice("clutch", "friction_mode", FrictionMode))
    spring = r.build("clutch", SpringSpec, n("preload"), n("stiffness"), n("shoe_clearance"))
    clutch = r.build("clutch", ClutchParams, geometry, friction, spring, n("shoe_mass"),
                     r.choice("clutch", "engagement_mode", EngagementMode),
                     r.optional("clutch", "secondary_arm_moment", False))

    d = lambda key: r.number("driveline", key)  # noqa: E731
    configuration = r.choice("driveline", "configuration", Configuration)
    drive = r.build("driveline", DrivelineParams, d("ratio_first"), d("ratio_second"),
                    d("inertia_input"), d("inertia_second"), configuration)

    sim = r.build("sim", SimConfig, r.number("sim", "time_step"), r.number("sim", "lock_slip_tolerance"),
                  r.number("sim", "mode_hold_steps", integer=True), r.number("sim", "max_speed"))
    decimation = r.optional("sim", "decimation", 1, integer=True)
    if decimation < 1:
        r.fail(("sim", "decimation"), "must be >= 1")

    grid = r.build("grid", GridSpec, _range(r, "mass_range"), _range(r, "preload_range"), configuration,
                   r.number("grid", "operating_speed_max"))
    jitter = r.optional("grid", "jitter_points", 0, integer=True)
    workers = r.optional("grid", "workers", 1, integer=True)
    if jitter < 0:
        r.fail(("grid", "jitter_points"), "must be >= 0")
    if workers < 1:
        r.fail(("grid", "workers"), "must be >= 1")

    sizes = r.get("mlp", "layer_sizes")
    if not isinstance(sizes, list) or not all(isinstance(s, int) and not isinstance(s, bool) for s in sizes):
        r.fail(("mlp", "layer_sizes"), "expected a list of integers")
    mlp = r.build("mlp", MlpSpec, tuple(sizes), str(r.get("mlp", "hidden_activation")))
    train = r.build("train", TrainConfig, r.number("train", "learning_rate"),
                    r.number("train", "epochs", integer=True), r.number("train", "batch_size", integer=True),
                    r.number("train", "validation_fraction"), seed)

    return Config(str(path), seed, clutch, drive, _scenario(r, "scenario"), _scenario(r, "engagement_scenario"),
                  sim, decimation, grid, jitter, workers, mlp, train)


def load_config(path=None, overrides=(), seed=None):
    path = Path(path) if path is not None else default_config_path()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, str(path), overrides, seed)
