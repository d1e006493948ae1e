import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chan3d.antenna import (
    ArrayGeometry,
    PatternSpec,
    array_response,
    composite_port_gain_db,
    downtilt_weights,
    element_gain_db,
    element_pattern_3gpp,
    itu_port_pattern,
    port_gain_itu_db,
    slant_fields_36814,
    uniform_planar_array,
    virtualize_port,
)
from chan3d.geom import AngleVector, wave_vector

D2R = math.pi / 180.0


def test_element_boresight_gain():
    spec = element_pattern_3gpp()
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(element_gain_db(spec, 0.0, tilt), 8.0, atol=1e-9)


def test_element_azimuth_half_power():
    spec = element_pattern_3gpp()
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(element_gain_db(spec, 32.5 * D2R, tilt), 5.0, atol=1e-9)


def test_element_back_lobe_clipped():
    spec = element_pattern_3gpp()
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(element_gain_db(spec, 180.0 * D2R, tilt), -22.0, atol=1e-9)


def test_itu_port_boresight_gain():
    spec = itu_port_pattern(downtilt_deg=6.0)
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(port_gain_itu_db(spec, 0.0, tilt), 17.0, atol=1e-9)


def test_itu_port_elevation_half_power():
    spec = itu_port_pattern()
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(port_gain_itu_db(spec, 0.0, tilt + 7.5 * D2R), 14.0, atol=1e-9)


def test_itu_port_vertical_floor():
    spec = itu_port_pattern()
    tilt = spec.theta_tilt_deg * D2R
    assert_allclose(port_gain_itu_db(spec, 0.0, tilt + 60.0 * D2R), -3.0, atol=1e-9)


def test_element_pattern_peak_on_sphere_grid():
    spec = element_pattern_3gpp()
    az = np.radians(np.arange(-180.0, 180.0, 1.0))
    zen = np.radians(np.arange(0.0, 181.0, 1.0))
    gains = element_gain_db(spec, az[:, None], zen[None, :])
    assert gains.max() <= 8.0 + 1e-12
    assert_allclose(element_gain_db(spec, 0.0, math.radians(90.0)), gains.max())


def test_pattern_symmetry():
    spec = element_pattern_3gpp()
    rng = np.random.default_rng(2)
    az = rng.uniform(0, math.pi, 100)
    zen_off = rng.uniform(0, math.pi / 2, 100)
    tilt = math.radians(spec.theta_tilt_deg)
    assert_allclose(
        element_gain_db(spec, az, np.full_like(az, tilt)),
        element_gain_db(spec, -az, np.full_like(az, tilt)),
    )
    assert_allclose(
        element_gain_db(spec, 0.0, tilt + zen_off),
        element_gain_db(spec, 0.0, tilt - zen_off),
    )


def test_pattern_spec_validation():
    with pytest.raises(ValueError):
        PatternSpec(8.0, 30.0, 30.0, 0.0, 65.0)
    with pytest.raises(ValueError):
        PatternSpec(8.0, -1.0, 30.0, 65.0, 65.0)


def test_slant_fields_limits():
    g_v, g_h = slant_fields_36814(4.0, 0.0)
    assert_allclose([g_v, g_h], [2.0, 0.0], atol=1e-15)
    g_v, g_h = slant_fields_36814(4.0, math.pi / 2)
    assert_allclose([g_v, g_h], [0.0, 2.0], atol=1e-15)
    g_v, g_h = slant_fields_36814(4.0, math.pi / 4)
    assert_allclose(g_v, g_h)
    assert_allclose(g_v, math.sqrt(2.0))


def test_slant_fields_power_conservation():
    rng = np.random.default_rng(9)
    gains = rng.uniform(0.0, 50.0, 500)
    alphas = rng.uniform(-math.pi, math.pi, 500)
    g_v, g_h = slant_fields_36814(gains, alphas)
    assert_allclose(g_v**2 + g_h**2, gains, rtol=1e-12)


def test_slant_fields_rejects_negative_gain():
    with pytest.raises(ValueError):
        slant_fields_36814(-1.0, 0.0)


def _column(m, d_v, wavelength=0.15):
    return uniform_planar_array(m, 1, d_v, 0.5, wavelength)


def test_array_response_single_element():
    geom = _column(1, 0.5)
    k = wave_vector(2e9, AngleVector(0.3, 1.0))
    assert_allclose(array_response(geom, k), [1.0 + 0j])


def test_array_response_horizon_wave_orthogonal():
    wavelength = 0.15
    geom = _column(2, 0.5, wavelength)
    k = wave_vector(299792458.0 / wavelength, AngleVector(0.0, math.pi / 2))
    resp = array_response(geom, k)
    assert_allclose(resp[0], resp[1], atol=1e-12)


def test_array_response_zenith_wave_pi_shift():
    wavelength = 0.15
    geom = _column(2, 0.5, wavelength)
    k = wave_vector(299792458.0 / wavelength, AngleVector(0.0, 0.0))
    resp = array_response(geom, k)
    # k . dx = (2 pi / lambda)(lambda / 2) = pi between the two elements.
    assert_allclose(np.angle(resp[1] / resp[0]), math.pi, atol=1e-12)


def test_array_response_unit_modulus():
    geom = uniform_planar_array(4, 2, 0.7, 0.5, 0.15)
    rng = np.random.default_rng(4)
    for _ in range(50):
        k = wave_vector(2e9, AngleVector(rng.uniform(-3, 3), rng.uniform(0, math.pi)))
        assert_allclose(np.abs(array_response(geom, k)), 1.0, atol=1e-12)


def test_virtualize_single_element_port():
    geom = uniform_planar_array(4, 1, 0.5, 0.5, 0.15, k_per_port=1)
    rows = np.arange(8, dtype=complex).reshape(4, 2)
    assert_allclose(virtualize_port(rows, geom, 2), rows[2])


def test_virtualize_coherent_sum():
    m = 4
    geom = _column(m, 0.5)
    h = np.array([0.3 - 0.2j, 1.1 + 0.4j])
    rows = np.tile(h, (m, 1))
    assert_allclose(virtualize_port(rows, geom, 0), math.sqrt(m) * h, rtol=1e-12)


def test_virtualize_matches_bruteforce():
    m = 4
    rng = np.random.default_rng(17)
    weights = rng.normal(size=m) + 1j * rng.normal(size=m)
    weights /= np.linalg.norm(weights)
    geom = _column(m, 0.5).with_port_weights(weights)
    rows = rng.normal(size=(m, 3)) + 1j * rng.normal(size=(m, 3))
    expected = np.zeros(3, dtype=complex)
    for k in range(m):
        expected += weights[k] * rows[k]
    assert_allclose(virtualize_port(rows, geom, 0), expected, atol=1e-12)


def test_virtualize_is_linear():
    m = 3
    rng = np.random.default_rng(21)
    weights = rng.normal(size=m) + 1j * rng.normal(size=m)
    weights /= np.linalg.norm(weights)
    geom = _column(m, 0.5).with_port_weights(weights)
    h1 = rng.normal(size=(m, 2)) + 1j * rng.normal(size=(m, 2))
    h2 = rng.normal(size=(m, 2)) + 1j * rng.normal(size=(m, 2))
    a, b = 1.7 - 0.3j, -0.6 + 2.2j
    assert_allclose(
        virtualize_port(a * h1 + b * h2, geom, 0),
        a * virtualize_port(h1, geom, 0) + b * virtualize_port(h2, geom, 0),
        rtol=1e-12,
    )


def test_virtualize_unknown_port():
    geom = _column(2, 0.5)
    with pytest.raises(ValueError):
        virtualize_port(np.zeros((2, 1), dtype=complex), geom, 5)


def test_downtilt_weights_single_element():
    assert_allclose(downtilt_weights(1, 0.5, math.radians(100.0)), [1.0 + 0j])


def test_downtilt_weights_unit_power():
    w = downtilt_weights(10, 0.5, math.radians(102.0))
    assert_allclose(np.sum(np.abs(w) ** 2), 1.0, atol=1e-12)


def test_downtilt_weights_steer_peak():
    # Scan the composite array factor magnitude over zenith in 0.1 deg steps;
    # the peak must fall within 0.5 deg of the steering angle.
    m, d_v, tilt_deg = 10, 0.5, 102.0
    w = downtilt_weights(m, d_v, math.radians(tilt_deg))
    zen = np.radians(np.arange(0.0, 180.0, 0.1))
    phases = np.exp(2j * math.pi * d_v * np.arange(m)[None, :] * np.cos(zen)[:, None])
    af = np.abs(phases @ w)
    peak_deg = math.degrees(zen[np.argmax(af)])
    assert abs(peak_deg - tilt_deg) <= 0.5


def test_downtilt_weights_validation():
    with pytest.raises(ValueError):
        downtilt_weights(0, 0.5, 1.0)
    with pytest.raises(ValueError):
        downtilt_weights(4, 0.0, 1.0)


def test_uniform_planar_array_counts():
    geom = uniform_planar_array(4, 3, 0.5, 0.6, 0.15)
    assert geom.n_elements == 12
    assert geom.n_ports == 3
    geom_k1 = uniform_planar_array(4, 3, 0.5, 0.6, 0.15, k_per_port=1)
    assert geom_k1.n_ports == 12
    cross = uniform_planar_array(4, 2, 0.5, 0.5, 0.15, cross_polarized=True)
    assert cross.n_elements == 16
    assert cross.n_ports == 4
    assert set(np.round(np.degrees(np.unique(cross.slant_rad)), 6)) == {-45.0, 45.0}


def test_array_geometry_validates_port_power():
    with pytest.raises(ValueError):
        ArrayGeometry(
            np.zeros((2, 3)), 2, 1, 0.5, 0.5, np.zeros(2),
            ports=[(np.array([0, 1]), np.array([1.0, 1.0]))],
        )


def test_array_geometry_requires_partition():
    with pytest.raises(ValueError):
        ArrayGeometry(
            np.zeros((2, 3)), 2, 1, 0.5, 0.5, np.zeros(2),
            ports=[(np.array([0]), np.array([1.0]))],
        )


def test_composite_port_gain_peaks_near_tilt():
    wavelength = 0.15
    geom = uniform_planar_array(10, 1, 0.5, 0.5, wavelength)
    w = downtilt_weights(10, 0.5, math.radians(102.0))
    geom = geom.with_port_weights(w)
    spec = element_pattern_3gpp()
    zen = np.radians(np.arange(60.0, 150.0, 0.1))
    gains = composite_port_gain_db(spec, geom, 0, wavelength, 0.0, zen)
    peak = math.degrees(zen[np.argmax(gains)])
    assert abs(peak - 102.0) <= 0.5
    # Peak composite gain is the element peak plus the coherent array gain,
    # less the element roll-off at 12 deg off broadside.
    expected = 8.0 + 10.0 * math.log10(10.0) - 12.0 * (12.0 / 65.0) ** 2
    assert abs(gains.max() - expected) < 0.05
