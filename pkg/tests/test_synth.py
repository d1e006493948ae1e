import io
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from chan3d.antenna import element_pattern_3gpp, uniform_planar_array
from chan3d.geom import SPEED_OF_LIGHT, AngleVector
from chan3d.ssp import ClusterSet
from chan3d.synth import (
    LinkContext,
    LinkEnd,
    cluster_matrix_nlos,
    cluster_matrix_with_los,
    dump_realization,
    isotropic_end,
    synthesize,
)


def _single_ray_clusters(phase_vv=0.7, xpr=1e-12):
    return ClusterSet(
        delays_s=np.array([0.0]),
        cluster_powers=np.array([1.0]),
        ray_powers=np.array([[1.0]]),
        aod=np.array([[0.3]]),
        zod=np.array([[1.4]]),
        aoa=np.array([[2.1]]),
        zoa=np.array([[1.6]]),
        phases=np.array([[[phase_vv, 0.1, 0.2, 0.3]]]),
        xpr=np.array([[xpr]]),
        los_phase_vv=0.5,
        los_phase_hh=1.5,
    )


def _random_clusters(rng, n_clusters=2, n_rays=3):
    delays = np.sort(rng.uniform(0.0, 1e-6, n_clusters))
    delays -= delays[0]
    powers = rng.dirichlet(np.ones(n_clusters))
    ray_powers = np.repeat(powers[:, None] / n_rays, n_rays, axis=1)
    return ClusterSet(
        delays_s=delays,
        cluster_powers=powers,
        ray_powers=ray_powers,
        aod=rng.uniform(-math.pi, math.pi, (n_clusters, n_rays)),
        zod=rng.uniform(0.2, math.pi - 0.2, (n_clusters, n_rays)),
        aoa=rng.uniform(-math.pi, math.pi, (n_clusters, n_rays)),
        zoa=rng.uniform(0.2, math.pi - 0.2, (n_clusters, n_rays)),
        phases=rng.uniform(0.0, 2.0 * math.pi, (n_clusters, n_rays, 4)),
        xpr=10.0 ** (rng.normal(-0.8, 0.3, (n_clusters, n_rays))),
        los_phase_vv=float(rng.uniform(0, 2 * math.pi)),
        los_phase_hh=float(rng.uniform(0, 2 * math.pi)),
    )


def _ctx(clusters, tx=None, rx=None, slow_db=0.0, k_rice=0.0, velocity=(0.0, 0.0, 0.0)):
    return LinkContext(
        tx=tx or isotropic_end(),
        rx=rx or isotropic_end(),
        clusters=clusters,
        slow_fading_db=slow_db,
        carrier_hz=2e9,
        velocity_mps=np.array(velocity),
        rice_k_linear=k_rice,
        los_departure=AngleVector(0.2, 1.5),
        los_arrival=AngleVector(0.2 + math.pi, math.pi - 1.5),
    )


def test_single_ray_isotropic_collapses_to_phase():
    phase = 0.7
    ctx = _ctx(_single_ray_clusters(phase))
    h = cluster_matrix_nlos(ctx, 0, 0.0)
    assert h.shape == (1, 1)
    assert_allclose(h[0, 0], np.exp(1j * phase), atol=1e-12)


def test_static_ue_time_invariant():
    rng = np.random.default_rng(1)
    ctx = _ctx(_random_clusters(rng))
    a = cluster_matrix_nlos(ctx, 1, 0.0)
    b = cluster_matrix_nlos(ctx, 1, 3.7)
    assert_allclose(a, b, atol=1e-15)


def test_cluster_matrix_matches_bruteforce_oracle():
    # Independent term-by-term re-summation with explicit scalar loops.
    rng = np.random.default_rng(2)
    clusters = _random_clusters(rng, n_clusters=2, n_rays=3)
    tx = LinkEnd(rng.uniform(-0.1, 0.1, (2, 3)), np.array([0.0, math.radians(45.0)]))
    rx = LinkEnd(rng.uniform(-0.1, 0.1, (2, 3)), np.array([math.radians(90.0), math.radians(30.0)]))
    velocity = np.array([0.5, -0.3, 0.0])
    ctx = _ctx(clusters, tx=tx, rx=rx, slow_db=7.0, velocity=velocity)
    t = 0.37
    k0 = 2.0 * math.pi * 2e9 / SPEED_OF_LIGHT

    n = 1
    expected = np.zeros((2, 2), dtype=complex)
    for m in range(3):
        aod, zod = clusters.aod[n, m], clusters.zod[n, m]
        aoa, zoa = clusters.aoa[n, m], clusters.zoa[n, m]
        kd = k0 * np.array([math.sin(zod) * math.cos(aod), math.sin(zod) * math.sin(aod), math.cos(zod)])
        ka = k0 * np.array([math.sin(zoa) * math.cos(aoa), math.sin(zoa) * math.sin(aoa), math.cos(zoa)])
        pvv, pvh, phv, phh = clusters.phases[n, m]
        root_k = math.sqrt(clusters.xpr[n, m])
        alpha = np.array(
            [
                [np.exp(1j * pvv), root_k * np.exp(1j * pvh)],
                [root_k * np.exp(1j * phv), np.exp(1j * phh)],
            ]
        )
        for s in range(2):
            g_t = np.array([math.cos(tx.slant_rad[s]), math.sin(tx.slant_rad[s])])
            a_t = np.exp(1j * float(kd @ tx.positions_m[s]))
            for u in range(2):
                g_r = np.array([math.cos(rx.slant_rad[u]), math.sin(rx.slant_rad[u])])
                a_r = np.exp(1j * float(ka @ rx.positions_m[u]))
                doppler = np.exp(1j * float(ka @ velocity) * t)
                expected[s, u] += (
                    math.sqrt(clusters.ray_powers[n, m])
                    * (g_r @ alpha @ g_t)
                    * a_t
                    * a_r
                    * doppler
                )
    expected *= 10.0 ** (-7.0 / 20.0)
    assert_allclose(cluster_matrix_nlos(ctx, n, t), expected, atol=1e-10)


def test_rice_zero_equals_nlos():
    rng = np.random.default_rng(3)
    ctx = _ctx(_random_clusters(rng))
    assert_allclose(
        cluster_matrix_with_los(ctx, 0, 0.5, 0.0),
        cluster_matrix_nlos(ctx, 0, 0.5),
        atol=1e-15,
    )


def test_los_gate_only_first_cluster():
    rng = np.random.default_rng(4)
    ctx = _ctx(_random_clusters(rng))
    k = 5.0
    later = cluster_matrix_with_los(ctx, 1, 0.0, k)
    assert_allclose(later, math.sqrt(1.0 / (k + 1.0)) * cluster_matrix_nlos(ctx, 1, 0.0), atol=1e-14)


def test_large_rice_factor_limit():
    slow_db = 9.0
    ctx = _ctx(_single_ray_clusters(), slow_db=slow_db)
    h = cluster_matrix_with_los(ctx, 0, 0.0, 1e9)
    assert_allclose(abs(h[0, 0]), 10.0 ** (-slow_db / 20.0), rtol=1e-4)


def test_negative_rice_factor_rejected():
    ctx = _ctx(_single_ray_clusters())
    with pytest.raises(ValueError):
        cluster_matrix_with_los(ctx, 0, 0.0, -0.5)


def test_link_end_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        LinkEnd(np.zeros((3, 3)), np.zeros(2))


def test_synthesize_orders_taps_and_matches_cluster_ops():
    rng = np.random.default_rng(5)
    clusters = _random_clusters(rng, n_clusters=4, n_rays=3)
    ctx = _ctx(clusters, velocity=(0.8, 0.0, 0.0))
    times = [0.0, 1e-3]
    real = synthesize(ctx, times)
    assert np.all(np.diff(real.delays_s) >= 0.0)
    assert real.taps.shape == (2, 4, 1, 1)
    for ti, t in enumerate(times):
        for n in range(4):
            assert_allclose(real.taps[ti, n], cluster_matrix_with_los(ctx, n, t, 0.0), atol=1e-12)


def test_synthesize_rejects_empty_times():
    ctx = _ctx(_single_ray_clusters())
    with pytest.raises(ValueError):
        synthesize(ctx, [])


def test_port_output_equals_manual_weight_sum():
    rng = np.random.default_rng(6)
    clusters = _random_clusters(rng, n_clusters=2, n_rays=3)
    geom = uniform_planar_array(4, 1, 0.5, 0.5, SPEED_OF_LIGHT / 2e9)
    tx = LinkEnd(
        geom.element_positions, geom.slant_rad, element_pattern_3gpp(), 0.0, ports=geom.ports
    )
    ctx = _ctx(clusters, tx=tx)
    elements = synthesize(ctx, [0.0], output="elements")
    ports = synthesize(ctx, [0.0], output="ports")
    assert ports.taps.shape == (1, 2, 1, 1)
    idx, w = geom.ports[0]
    manual = np.einsum("k,nku->nu", w, elements.taps[0][:, idx, :])
    assert_allclose(ports.taps[0][:, 0, :], manual, atol=1e-12)


def test_total_mean_tap_power_is_one():
    # Monte Carlo over polarization draws only; geometry and powers fixed.
    rng = np.random.default_rng(7)
    base = _random_clusters(rng, n_clusters=3, n_rays=3)
    total = 0.0
    n_draws = 10_000
    for _ in range(n_draws):
        clusters = ClusterSet(
            delays_s=base.delays_s,
            cluster_powers=base.cluster_powers,
            ray_powers=base.ray_powers,
            aod=base.aod, zod=base.zod, aoa=base.aoa, zoa=base.zoa,
            phases=rng.uniform(0.0, 2.0 * math.pi, base.phases.shape),
            xpr=np.full_like(base.xpr, 1e-12),
            los_phase_vv=0.0, los_phase_hh=0.0,
        )
        real = synthesize(_ctx(clusters), [0.0])
        total += float(np.sum(np.abs(real.taps) ** 2))
    assert abs(total / n_draws - 1.0) < 0.02


def test_amplitude_scaling_linearity():
    # Scaling every sqrt(P) by c scales each matrix entry by c; bypass the
    # sum-to-one constructor check by assigning the field after validation.
    rng = np.random.default_rng(8)
    base = _random_clusters(rng, n_clusters=2, n_rays=3)
    h_base = cluster_matrix_nlos(_ctx(base), 0, 0.0)
    scaled = _random_clusters(np.random.default_rng(8), n_clusters=2, n_rays=3)
    scaled.ray_powers = base.ray_powers * 4.0
    h_scaled = cluster_matrix_nlos(_ctx(scaled), 0, 0.0)
    assert_allclose(h_scaled, 2.0 * h_base, rtol=1e-12)


def test_doppler_trajectory_single_ray():
    clusters = _single_ray_clusters()
    velocity = np.array([0.8, 0.2, 0.0])
    ctx = _ctx(clusters, velocity=velocity)
    k0 = 2.0 * math.pi * 2e9 / SPEED_OF_LIGHT
    zoa, aoa = clusters.zoa[0, 0], clusters.aoa[0, 0]
    k_arr = k0 * np.array([
        math.sin(zoa) * math.cos(aoa), math.sin(zoa) * math.sin(aoa), math.cos(zoa),
    ])
    omega = float(k_arr @ velocity)
    h0 = cluster_matrix_nlos(ctx, 0, 0.0)[0, 0]
    for t in (1e-3, 5e-3, 0.02):
        ht = cluster_matrix_nlos(ctx, 0, t)[0, 0]
        assert_allclose(ht / h0, np.exp(1j * omega * t), atol=1e-12)


def test_dump_realization_format():
    rng = np.random.default_rng(9)
    clusters = _random_clusters(rng, n_clusters=2, n_rays=3)
    real = synthesize(_ctx(clusters), [0.0, 1e-3])
    buf = io.StringIO()
    dump_realization(real, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "# times=2 taps=2 n_tx=1 n_rx=1"
    assert len(lines) == 1 + 2 * 2
    fields = lines[1].split()
    # time, tap index, delay, then re/im per entry
    assert len(fields) == 3 + 2 * 1 * 1
    parsed = complex(float(fields[3]), float(fields[4]))
    assert_allclose(parsed, real.taps[0, 0, 0, 0], rtol=1e-15)
