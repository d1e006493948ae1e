import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chan3d.geom import (
    SPEED_OF_LIGHT,
    AngleVector,
    GeometryError,
    Vec3,
    doppler_phase,
    field_lcs_to_gcs,
    local_angles,
    los_angles,
    rotation_x,
    rotation_y,
    rotation_z,
    rotation_zyx,
    unit_vector,
    wave_vector,
    wrap_azimuth,
)


def test_angle_vector_wraps_azimuth():
    a = AngleVector(3.0 * math.pi, math.pi / 2)
    assert -math.pi <= a.azimuth < math.pi
    assert_allclose(a.azimuth, -math.pi)


def test_angle_vector_rejects_bad_zenith():
    with pytest.raises(ValueError):
        AngleVector(0.0, -0.5)
    with pytest.raises(ValueError):
        AngleVector(0.0, math.pi + 0.1)


def test_unit_vector_horizon_along_x():
    v = unit_vector(AngleVector(0.0, math.pi / 2))
    assert_allclose([v.x, v.y, v.z], [1.0, 0.0, 0.0], atol=1e-15)


def test_unit_vector_zenith():
    for az in (0.0, 1.0, -2.5):
        v = unit_vector(AngleVector(az, 0.0))
        assert_allclose([v.x, v.y, v.z], [0.0, 0.0, 1.0], atol=1e-15)


def test_unit_vector_oblique():
    # Direct evaluation of (sin t cos p, sin t sin p, cos t) at p=pi/2, t=pi/4.
    v = unit_vector(AngleVector(math.pi / 2, math.pi / 4))
    assert_allclose([v.x, v.y, v.z], [0.0, 0.7071067811865476, 0.7071067811865476], atol=1e-15)


def test_unit_vector_norm_is_one():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        a = AngleVector(rng.uniform(-math.pi, math.pi), rng.uniform(0.0, math.pi))
        assert abs(unit_vector(a).norm() - 1.0) < 1e-12


def test_wave_vector_magnitude_2ghz():
    k = wave_vector(2e9, AngleVector(0.0, math.pi / 2))
    # 2*pi*f/c with c = 299792458 m/s exactly.
    assert_allclose(k.magnitude, 41.91690043903363, rtol=1e-15)


def test_wave_vector_linear_in_frequency():
    a = AngleVector(0.3, 1.1)
    assert_allclose(wave_vector(4e9, a).magnitude, 2.0 * wave_vector(2e9, a).magnitude)


def test_wave_vector_direction_delegates():
    k = wave_vector(1e9, AngleVector(0.0, math.pi / 2))
    assert_allclose([k.direction.x, k.direction.y, k.direction.z], [1.0, 0.0, 0.0], atol=1e-15)


def test_wave_vector_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        wave_vector(0.0, AngleVector(0.0, 1.0))
    with pytest.raises(ValueError):
        wave_vector(-1e9, AngleVector(0.0, 1.0))


def test_doppler_phase_static_ue():
    k = wave_vector(2e9, AngleVector(0.4, 1.2))
    for t in (0.0, 1.0, 5.0):
        assert doppler_phase(k, Vec3(0.0, 0.0, 0.0), t) == 0.0


def test_doppler_phase_orthogonal_velocity():
    k = wave_vector(2e9, AngleVector(0.0, math.pi / 2))  # along +x
    assert_allclose(doppler_phase(k, Vec3(0.0, 3.0, 0.0), 2.0), 0.0, atol=1e-12)


def test_doppler_frequency_3kmh():
    # Classic oracle: f_D = |v| f / c for motion parallel to the wave vector.
    speed = 3.0 / 3.6
    k = wave_vector(2e9, AngleVector(0.0, math.pi / 2))
    phase = doppler_phase(k, Vec3(speed, 0.0, 0.0), 1.0)
    f_doppler = phase / (2.0 * math.pi)
    assert_allclose(f_doppler, speed * 2e9 / SPEED_OF_LIGHT, rtol=1e-12)
    assert_allclose(f_doppler, 5.559401586635867, rtol=1e-12)


def test_doppler_phase_linear_in_time_and_velocity():
    k = wave_vector(2e9, AngleVector(0.7, 0.9))
    v = Vec3(1.0, -2.0, 0.5)
    assert_allclose(doppler_phase(k, v, 3.0), 3.0 * doppler_phase(k, v, 1.0))
    v2 = Vec3(2.0, -4.0, 1.0)
    assert_allclose(doppler_phase(k, v2, 1.0), 2.0 * doppler_phase(k, v, 1.0))


def test_los_angles_co_altitude():
    dep, arr = los_angles(Vec3(0, 0, 25), Vec3(100, 0, 25))
    assert_allclose([dep.azimuth, dep.zenith], [0.0, math.pi / 2])
    assert_allclose([arr.azimuth, arr.zenith], [-math.pi, math.pi / 2])


def test_los_angles_straight_down():
    dep, _ = los_angles(Vec3(0, 0, 25), Vec3(0, 0, 1.5))
    assert_allclose(dep.zenith, math.pi)


def test_los_angles_oblique():
    dep, _ = los_angles(Vec3(0, 0, 25), Vec3(10, 0, 15))
    assert_allclose(dep.zenith, 3.0 * math.pi / 4)


def test_los_angles_reciprocity():
    rng = np.random.default_rng(11)
    for _ in range(200):
        a = Vec3(*rng.uniform(-100, 100, 3))
        b = Vec3(*rng.uniform(-100, 100, 3))
        dep, arr = los_angles(a, b)
        dep_r, arr_r = los_angles(b, a)
        assert_allclose([dep.azimuth, dep.zenith], [arr_r.azimuth, arr_r.zenith], atol=1e-12)
        assert_allclose([arr.azimuth, arr.zenith], [dep_r.azimuth, dep_r.zenith], atol=1e-12)


def test_los_angles_coincident_raises():
    with pytest.raises(GeometryError):
        los_angles(Vec3(1, 2, 3), Vec3(1, 2, 3))


def _random_rotation(rng):
    return rotation_zyx(
        rng.uniform(-math.pi, math.pi),
        rng.uniform(-math.pi / 2, math.pi / 2),
        rng.uniform(-math.pi, math.pi),
    )


def test_field_transform_identity():
    direction = AngleVector(0.3, 1.0)
    g_v, g_h = field_lcs_to_gcs(1.2, -0.7, np.eye(3), direction)
    assert_allclose([g_v, g_h], [1.2, -0.7], atol=1e-12)


def test_field_transform_preserves_norm():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        rot = _random_rotation(rng)
        direction = AngleVector(rng.uniform(-math.pi, math.pi), rng.uniform(0.01, math.pi - 0.01))
        a, b = rng.normal(size=2)
        g_v, g_h = field_lcs_to_gcs(a, b, rot, direction)
        assert abs((g_v**2 + g_h**2) - (a**2 + b**2)) < 1e-12


def test_field_transform_quarter_roll_swaps_polarizations():
    # Element rolled 90 deg about the +x boresight: a vertical field at
    # boresight must come out purely horizontal. Oracle: at direction
    # (az=0, zen=pi/2), e_theta=(0,0,-1) and e_phi=(0,1,0); rolling the frame
    # maps the local e_theta onto -e_phi.
    direction = AngleVector(0.0, math.pi / 2)
    rot = rotation_x(math.pi / 2)
    g_v, g_h = field_lcs_to_gcs(1.0, 0.0, rot, direction)
    assert abs(g_v) < 1e-12
    assert_allclose(abs(g_h), 1.0, atol=1e-12)


def test_field_transform_rejects_improper_rotation():
    reflection = np.diag([1.0, 1.0, -1.0])
    with pytest.raises(ValueError):
        field_lcs_to_gcs(1.0, 0.0, reflection, AngleVector(0.0, 1.0))
    with pytest.raises(ValueError):
        field_lcs_to_gcs(1.0, 0.0, 2.0 * np.eye(3), AngleVector(0.0, 1.0))


def test_local_angles_pure_bearing():
    rot = rotation_z(math.radians(120.0))
    local = local_angles(rot, AngleVector(math.radians(120.0), 1.0))
    assert_allclose([local.azimuth, local.zenith], [0.0, 1.0], atol=1e-12)


def test_rotation_helpers_are_proper():
    rng = np.random.default_rng(5)
    for builder in (rotation_x, rotation_y, rotation_z):
        r = builder(rng.uniform(-3, 3))
        assert_allclose(r @ r.T, np.eye(3), atol=1e-12)
        assert_allclose(np.linalg.det(r), 1.0, atol=1e-12)


def test_wrap_azimuth_range():
    rng = np.random.default_rng(3)
    values = rng.uniform(-50, 50, 1000)
    wrapped = wrap_azimuth(values)
    assert np.all(wrapped >= -math.pi)
    assert np.all(wrapped < math.pi)
    assert_allclose(np.cos(wrapped), np.cos(values), atol=1e-9)
    assert_allclose(np.sin(wrapped), np.sin(values), atol=1e-9)
