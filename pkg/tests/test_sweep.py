import filecmp
from dataclasses import replace

import numpy as np
import pytest

from centriclutch import sweep
from centriclutch.clutch import torque_curve
from centriclutch.driveline import Configuration
from centriclutch.errors import DomainError
from centriclutch.sim import full_engagement_speed
from centriclutch.sweep import (SURFACE_COLUMNS, _batch_engagement, EngagementDataset, EngagementSample, GridSpec,
                                engagement_speeds, generate_dataset, is_engaged, read_samples_csv,
                                sweep_engagement_speed, with_mass_preload, write_samples_csv)

from centriclutch.sim import Scenario, TorqueProfile

SMALL = dict(mass_range=(0.1, 0.4, 3), preload_range=(40.0, 240.0, 3))
# stronger input than the reference run so the unit suite stays quick
FAST = Scenario(TorqueProfile.constant(250.0), TorqueProfile.constant(60.0), 0.0, 4.0)


@pytest.fixture(scope="module")
def surfaces(default_config):
    cfg = default_config
    out = {}
    for c in Configuration:
        grid = GridSpec(**SMALL, configuration=c)
        out[c] = sweep_engagement_speed(grid, cfg.clutch, cfg.drive, FAST, cfg.sim)
    return out


class TestGridSpec:
    def test_row_major(self):
        g = GridSpec(mass_range=(0.1, 0.2, 2), preload_range=(10.0, 30.0, 3))
        assert g.points() == [(0.1, 10.0), (0.1, 20.0), (0.1, 30.0), (0.2, 10.0), (0.2, 20.0), (0.2, 30.0)]

    @pytest.mark.parametrize("kw", [
        {"mass_range": (0.5, 0.1, 3)}, {"preload_range": (0.0, 10.0, 1)}, {"mass_range": (0.1, 0.2, 2.5)},
        {"operating_speed_max": 0.0},
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            GridSpec(**kw)


def test_is_engaged():
    assert is_engaged(300.0, 400.0)
    assert is_engaged(400.0, 400.0)
    assert not is_engaged(400.5, 400.0)
    assert not is_engaged(None, 400.0)


def test_single_point_grid_matches_scalar(default_config):
    cfg = default_config
    point = [(0.2, 100.0)]
    got = engagement_speeds(point, cfg.clutch, cfg.drive, FAST, cfg.sim)
    expect = full_engagement_speed(with_mass_preload(cfg.clutch, 0.2, 100.0), cfg.drive,
                                   FAST, cfg.sim)
    assert got == [expect]


def test_batch_matches_scalar(surfaces, default_config):
    # the vectorized integrator must reproduce the scalar engine bit for bit
    cfg = default_config
    for c, samples in surfaces.items():
        drive = replace(cfg.drive, configuration=c)
        curves = [torque_curve(with_mass_preload(cfg.clutch, s.shoe_mass, s.preload)) for s in samples]
        got = _batch_engagement(np.array([k.onset for k in curves]), np.array([k.gain for k in curves]),
                                np.array([k.capacity_gain for k in curves]), drive, FAST, cfg.sim)
        ref = [np.nan if s.full_engagement_speed is None else s.full_engagement_speed for s in samples]
        assert np.array_equal(got, ref, equal_nan=True)


def test_large_point_set_uses_batch(default_config, monkeypatch):
    cfg = default_config
    points = [(0.2, 100.0), (0.3, 80.0)]
    scalar = engagement_speeds(points, cfg.clutch, cfg.drive, FAST, cfg.sim)
    monkeypatch.setattr(sweep, "BATCH_MIN_POINTS", 1)
    assert engagement_speeds(points, cfg.clutch, cfg.drive, FAST, cfg.sim) == scalar


def test_rows_non_decreasing_in_preload(surfaces):
    for samples in surfaces.values():
        rows = np.array([1e300 if s.full_engagement_speed is None else s.full_engagement_speed
                         for s in samples]).reshape(3, 3)
        assert np.all(np.diff(rows, axis=1) >= 0)


def test_b_surface_not_below_a(surfaces):
    tol = 0.5  # one lock-detection step of speed
    for a, b in zip(surfaces[Configuration.A], surfaces[Configuration.B]):
        if a.full_engagement_speed is None:
            assert b.full_engagement_speed is None
        elif b.full_engagement_speed is not None:
            assert b.full_engagement_speed >= a.full_engagement_speed - tol


def test_all_unengaged_when_preload_too_high(default_config):
    cfg = default_config
    grid = GridSpec(mass_range=(0.05, 0.06, 2), preload_range=(5000.0, 6000.0, 2))
    samples = sweep_engagement_speed(grid, cfg.clutch, cfg.drive, FAST, cfg.sim)
    assert [s.engaged for s in samples] == [False] * 4
    assert all(s.full_engagement_speed is None for s in samples)


def test_workers_give_identical_results(default_config):
    cfg = default_config
    grid = GridSpec(mass_range=(0.2, 0.3, 2), preload_range=(60.0, 120.0, 2))
    scn = FAST
    one = sweep_engagement_speed(grid, cfg.clutch, cfg.drive, scn, cfg.sim, workers=1)
    two = sweep_engagement_speed(grid, cfg.clutch, cfg.drive, scn, cfg.sim, workers=2)
    assert one == two


def test_dataset_same_seed_same_file(tmp_path, default_config):
    cfg = default_config
    grid = GridSpec(mass_range=(0.2, 0.3, 2), preload_range=(60.0, 400.0, 2))
    scn = FAST
    paths = []
    for name in ("a.csv", "b.csv"):
        data = generate_dataset(grid, cfg.clutch, cfg.drive, scn, cfg.sim, seed=3, jitter_points=2)
        data.to_csv(tmp_path / name)
        paths.append(tmp_path / name)
    assert filecmp.cmp(*paths, shallow=False)
    assert len(EngagementDataset.from_csv(paths[0]).samples) == 6


def test_jitter_points_inside_grid(default_config):
    cfg = default_config
    grid = GridSpec(mass_range=(0.2, 0.3, 2), preload_range=(60.0, 80.0, 2))
    scn = replace(FAST, duration=0.01)
    data = generate_dataset(grid, cfg.clutch, cfg.drive, scn, cfg.sim, seed=1, jitter_points=5)
    extra = data.samples[4:]
    assert len(extra) == 5
    assert all(0.2 <= s.shoe_mass <= 0.3 and 60.0 <= s.preload <= 80.0 for s in extra)


def test_csv_round_trip(tmp_path):
    samples = [EngagementSample(0.1, 20.0, 350.25, True), EngagementSample(0.1, 300.0, None, False)]
    path = tmp_path / "s.csv"
    write_samples_csv(samples, path)
    assert path.read_text().splitlines()[0] == ",".join(SURFACE_COLUMNS)
    assert path.read_text().splitlines()[2] == "0.1,300.0,,0"
    assert read_samples_csv(path) == samples


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DomainError):
        read_samples_csv(path)


def test_features_shape():
    x, y = EngagementDataset([]).features()
    assert x.shape == (0, 2) and y.shape == (0,)
