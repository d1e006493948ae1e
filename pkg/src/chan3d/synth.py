"""Per-tap MIMO channel assembly from geometry, antennas, and small-scale draws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .antenna import PatternSpec, element_gain_db, response_phases
from .geom import (
    SPEED_OF_LIGHT,
    AngleVector,
    rotation_x,
    rotation_z,
    spherical_basis,
    unit_vectors,
    wrap_azimuth,
)
from .ssp import ClusterSet, polarization_matrix


@dataclass
class LinkEnd:
    """One side of a link: element positions (frame-aligned offsets in meters),
    slants, the element pattern (None = isotropic 0 dBi) and its bearing."""

    positions_m: np.ndarray
    slant_rad: np.ndarray
    pattern: PatternSpec | None = None
    bearing_rad: float = 0.0
    ports: list | None = None

    def __post_init__(self):
        self.positions_m = np.asarray(self.positions_m, dtype=float).reshape(-1, 3)
        self.slant_rad = np.asarray(self.slant_rad, dtype=float).reshape(-1)
        if self.slant_rad.size != self.positions_m.shape[0]:
            raise ValueError("one slant per element required")

    @property
    def n_elements(self) -> int:
        return self.positions_m.shape[0]


def isotropic_end(n_elements: int = 1) -> LinkEnd:
    return LinkEnd(np.zeros((n_elements, 3)), np.zeros(n_elements))


@dataclass
class LinkContext:
    """Everything needed to evaluate the cluster channel of one link."""

    tx: LinkEnd
    rx: LinkEnd
    clusters: ClusterSet
    slow_fading_db: float
    carrier_hz: float
    velocity_mps: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rice_k_linear: float = 0.0
    los_departure: AngleVector | None = None
    los_arrival: AngleVector | None = None
    xpr_offdiag_inverse: bool = False
    polarization_model: str = "slant"  # slant | rotated

    def __post_init__(self):
        self.velocity_mps = np.asarray(self.velocity_mps, dtype=float).reshape(3)
        if self.polarization_model not in ("slant", "rotated"):
            raise ValueError("polarization model must be 'slant' or 'rotated'")


def _end_fields(end: LinkEnd, azimuth, zenith, model: str) -> np.ndarray:
    """Per-element (V, H) field amplitudes toward each direction.

    Returns shape (..., 2, n_elements). The slant model splits the pattern
    amplitude angle-independently; the rotated model transforms a vertically
    polarized element field through the element orientation.
    """
    az = np.atleast_1d(np.asarray(azimuth, dtype=float))
    zen = np.atleast_1d(np.asarray(zenith, dtype=float))
    out = np.empty(az.shape + (2, end.n_elements), dtype=complex)
    if model == "slant":
        local_az = wrap_azimuth(az - end.bearing_rad)
        if end.pattern is None:
            amp = np.ones_like(az)
        else:
            amp = np.sqrt(10.0 ** (element_gain_db(end.pattern, local_az, zen) / 10.0))
        out[..., 0, :] = amp[..., None] * np.cos(end.slant_rad)
        out[..., 1, :] = amp[..., None] * np.sin(end.slant_rad)
        return out

    dirs = unit_vectors(az, zen)
    et_g, ep_g = spherical_basis(az, zen)
    for slant in np.unique(end.slant_rad):
        members = end.slant_rad == slant
        rot = rotation_z(end.bearing_rad) @ rotation_x(float(slant))
        local = dirs @ rot  # row-vector form of R^T @ v
        local_az = np.arctan2(local[..., 1], local[..., 0])
        local_zen = np.arccos(np.clip(local[..., 2], -1.0, 1.0))
        if end.pattern is None:
            amp = np.ones_like(local_az)
        else:
            amp = np.sqrt(10.0 ** (element_gain_db(end.pattern, local_az, local_zen) / 10.0))
        et_local, _ = spherical_basis(local_az, local_zen)
        field_global = (amp[..., None] * et_local) @ rot.T
        out[..., 0, members] = np.sum(field_global * et_g, axis=-1)[..., None]
        out[..., 1, members] = np.sum(field_global * ep_g, axis=-1)[..., None]
    return out


def _ray_terms(ctx: LinkContext, cluster: int):
    """Static per-ray tap contributions and Doppler rates for one cluster.

    Returns (terms, omega): terms is (n_rays, n_tx, n_rx) holding
    sqrt(P) * (gR^T a gT) * aT * aR, omega the per-ray k_arr . v in rad/s.
    """
    cs = ctx.clusters
    k0 = 2.0 * math.pi * ctx.carrier_hz / SPEED_OF_LIGHT
    aod, zod = cs.aod[cluster], cs.zod[cluster]
    aoa, zoa = cs.aoa[cluster], cs.zoa[cluster]
    g_t = _end_fields(ctx.tx, aod, zod, ctx.polarization_model)  # (M, 2, S)
    g_r = _end_fields(ctx.rx, aoa, zoa, ctx.polarization_model)  # (M, 2, U)
    alpha = polarization_matrix(cs.xpr[cluster], cs.phases[cluster], ctx.xpr_offdiag_inverse)
    bilinear = np.einsum("mpu,mpq,mqs->msu", g_r, alpha, g_t)
    a_t = response_phases(ctx.tx.positions_m, k0 * unit_vectors(aod, zod))  # (M, S)
    a_r = response_phases(ctx.rx.positions_m, k0 * unit_vectors(aoa, zoa))  # (M, U)
    terms = (
        np.sqrt(cs.ray_powers[cluster])[:, None, None]
        * bilinear
        * a_t[:, :, None]
        * a_r[:, None, :]
    )
    omega = (k0 * unit_vectors(aoa, zoa)) @ ctx.velocity_mps
    return terms, omega


def _los_term(ctx: LinkContext):
    """Deterministic LOS tap contribution and its Doppler rate."""
    if ctx.los_departure is None or ctx.los_arrival is None:
        raise ValueError("LOS angles required when the Rice factor is positive")
    k0 = 2.0 * math.pi * ctx.carrier_hz / SPEED_OF_LIGHT
    dep, arr = ctx.los_departure, ctx.los_arrival
    g_t = _end_fields(ctx.tx, dep.azimuth, dep.zenith, ctx.polarization_model)[0]
    g_r = _end_fields(ctx.rx, arr.azimuth, arr.zenith, ctx.polarization_model)[0]
    alpha = np.diag(
        [np.exp(1j * ctx.clusters.los_phase_vv), np.exp(1j * ctx.clusters.los_phase_hh)]
    )
    bilinear = np.einsum("pu,pq,qs->su", g_r, alpha, g_t)
    k_dep = k0 * unit_vectors(dep.azimuth, dep.zenith)
    k_arr = k0 * unit_vectors(arr.azimuth, arr.zenith)
    a_t = response_phases(ctx.tx.positions_m, k_dep)
    a_r = response_phases(ctx.rx.positions_m, k_arr)
    term = bilinear * a_t[:, None] * a_r[None, :]
    return term, float(k_arr @ ctx.velocity_mps)


def _slow_fading_amplitude(ctx: LinkContext) -> float:
    return 10.0 ** (-ctx.slow_fading_db / 20.0)


def cluster_matrix_nlos(ctx: LinkContext, cluster: int, t: float) -> np.ndarray:
    """Channel matrix (n_tx, n_rx) of one cluster from its diffuse rays only."""
    terms, omega = _ray_terms(ctx, cluster)
    return _slow_fading_amplitude(ctx) * np.einsum(
        "msu,m->su", terms, np.exp(1j * omega * t)
    )


def cluster_matrix_with_los(
    ctx: LinkContext, cluster: int, t: float, k_rice: float
) -> np.ndarray:
    """Rice-weighted cluster matrix: diffuse rays scaled by 1/(K+1) in power,
    plus the deterministic LOS ray on the first cluster only. K=0 reproduces
    the NLOS matrix exactly."""
    if k_rice < 0:
        raise ValueError("Rice factor must be non-negative")
    h = math.sqrt(1.0 / (k_rice + 1.0)) * cluster_matrix_nlos(ctx, cluster, t)
    if cluster == 0 and k_rice > 0:
        term, omega = _los_term(ctx)
        h = h + (
            _slow_fading_amplitude(ctx)
            * math.sqrt(k_rice / (k_rice + 1.0))
            * term
            * np.exp(1j * omega * t)
        )
    return h


@dataclass
class ChannelRealization:
    """Taps of one link: delays plus per-time channel matrices.

    taps is (n_times, n_taps, n_tx, n_rx); the tx axis is elements or ports
    depending on how the realization was synthesized.
    """

    delays_s: np.ndarray
    taps: np.ndarray
    times_s: np.ndarray
    carrier_hz: float

    def __post_init__(self):
        self.delays_s = np.asarray(self.delays_s, dtype=float)
        self.taps = np.asarray(self.taps, dtype=complex)
        self.times_s = np.asarray(self.times_s, dtype=float)
        if self.taps.ndim != 4 or self.taps.shape[:2] != (self.times_s.size, self.delays_s.size):
            raise ValueError("taps must be (n_times, n_taps, n_tx, n_rx)")
        if not np.all(np.isfinite(self.taps.view(float))):
            raise ValueError("tap matrices must be finite")


def synthesize(ctx: LinkContext, times, output: str = "elements") -> ChannelRealization:
    """Evaluate every cluster tap at the requested times.

    output='ports' applies the TX port weights to every tap, using the port
    map carried by the TX end.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.size == 0:
        raise ValueError("at least one time sample is required")
    if output not in ("elements", "ports"):
        raise ValueError("output must be 'elements' or 'ports'")

    cs = ctx.clusters
    scale = _slow_fading_amplitude(ctx)
    diffuse_scale = scale * math.sqrt(1.0 / (ctx.rice_k_linear + 1.0))
    per_cluster = [_ray_terms(ctx, n) for n in range(cs.n_clusters)]
    n_rx = ctx.rx.n_elements
    taps = np.zeros((times.size, cs.n_clusters, ctx.tx.n_elements, n_rx), dtype=complex)
    for ti, t in enumerate(times):
        for n, (terms, omega) in enumerate(per_cluster):
            taps[ti, n] = diffuse_scale * np.einsum("msu,m->su", terms, np.exp(1j * omega * t))
    if ctx.rice_k_linear > 0:
        los_term, los_omega = _los_term(ctx)
        los_scale = scale * math.sqrt(ctx.rice_k_linear / (ctx.rice_k_linear + 1.0))
        for ti, t in enumerate(times):
            taps[ti, 0] += los_scale * los_term * np.exp(1j * los_omega * t)

    if output == "ports":
        if not ctx.tx.ports:
            raise ValueError("TX end carries no port map")
        weight_matrix = np.zeros((len(ctx.tx.ports), ctx.tx.n_elements), dtype=complex)
        for p, (idx, w) in enumerate(ctx.tx.ports):
            weight_matrix[p, np.asarray(idx, dtype=int)] = np.asarray(w, dtype=complex)
        taps = np.einsum("pk,tnku->tnpu", weight_matrix, taps)
    return ChannelRealization(cs.delays_s.copy(), taps, times, ctx.carrier_hz)


def dump_realization(realization: ChannelRealization, fh):
    """Write a realization as plain text: a dimension header, then one record
    per (time, tap) with the delay and the row-major complex entries."""
    t, n, s, u = realization.taps.shape
    fh.write(f"# times={t} taps={n} n_tx={s} n_rx={u}\n")
    for ti in range(t):
        for tap in range(n):
            entries = realization.taps[ti, tap].reshape(-1)
            parts = [repr(float(realization.times_s[ti])), str(tap), repr(float(realization.delays_s[tap]))]
            for e in entries:
                parts.append(repr(float(e.real)))
                parts.append(repr(float(e.imag)))
            fh.write(" ".join(parts) + "\n")
