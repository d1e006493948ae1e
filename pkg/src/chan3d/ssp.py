"""Small-scale parameters: cluster delays, powers, angles, ray offsets, phases, XPR."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import AngleVector, wrap_azimuth

# Symmetric 20-ray offset basis of the SCM/WINNER family (dimensionless,
# scaled by the per-kind intra-cluster spread factors).
RAY_OFFSETS_20 = np.array(
    [
        0.0447, -0.0447, 0.1413, -0.1413, 0.2492, -0.2492, 0.3715, -0.3715,
        0.5129, -0.5129, 0.6797, -0.6797, 0.8844, -0.8844, 1.1481, -1.1481,
        1.5195, -1.5195, 2.1551, -2.1551,
    ]
)

# Ray partition and extra delays used when splitting a strong cluster into
# sub-clusters (SCME/WINNER convention: 10/6/4 rays at 0/5/10 ns).
SUBCLUSTER_RAYS = (
    np.array([0, 1, 2, 3, 4, 5, 6, 7, 18, 19]),
    np.array([8, 9, 10, 11, 16, 17]),
    np.array([12, 13, 14, 15]),
)
SUBCLUSTER_DELAYS_S = (0.0, 5e-9, 10e-9)


@dataclass
class SubpathOffsets:
    """Fixed symmetric ray offsets and the four intra-cluster spread scalers (deg)."""

    alpha: np.ndarray = field(default_factory=lambda: RAY_OFFSETS_20.copy())
    c_aod_deg: float = 5.0
    c_zod_deg: float = 3.0
    c_aoa_deg: float = 11.0
    c_zoa_deg: float = 7.0

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=float)
        mirrored = np.sort(-self.alpha)
        if not np.allclose(np.sort(self.alpha), mirrored, atol=1e-12):
            raise ValueError("ray offsets must be symmetric about zero")


def generate_delays(
    ds: float, n_clusters: int, r_tau: float, rng: np.random.Generator
) -> np.ndarray:
    """Exponential cluster delays, sorted and shifted so the first is zero."""
    if ds <= 0:
        raise ValueError("delay spread must be positive")
    if n_clusters < 1:
        raise ValueError("need at least one cluster")
    raw = -r_tau * ds * np.log(rng.random(n_clusters))
    raw.sort()
    return raw - raw[0]


def generate_cluster_powers(
    delays: np.ndarray,
    ds: float,
    r_tau: float,
    shadow_sigma_db: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-cluster powers, exponential in delay with log-normal shadowing, sum 1."""
    delays = np.asarray(delays, dtype=float)
    shadow = rng.normal(0.0, shadow_sigma_db, delays.shape)
    powers = np.exp(-delays * (r_tau - 1.0) / (r_tau * ds)) * 10.0 ** (-shadow / 10.0)
    return powers / powers.sum()


def circular_mean(angles: np.ndarray, powers: np.ndarray) -> float:
    """Power-weighted circular mean angle in radians."""
    p = np.asarray(powers, dtype=float)
    return float(np.arctan2((p * np.sin(angles)).sum(), (p * np.cos(angles)).sum()))


def _rescale_to_spread(
    angles: np.ndarray, powers: np.ndarray, target_rad: float, passes: int = 6
) -> np.ndarray:
    """Scale deviations about the circular mean so the RMS spread hits the target.

    The fixed-point iteration converges to float precision for targets up to
    ~75 degrees; beyond the circular-spread ceiling no exact match exists.
    Degenerate inputs (zero current spread) are returned unchanged; a zero
    target collapses every angle onto the mean.
    """
    p = np.asarray(powers, dtype=float) / np.asarray(powers, dtype=float).sum()
    out = np.asarray(angles, dtype=float).copy()
    for _ in range(passes):
        mean = circular_mean(out, p)
        dev = np.asarray(wrap_azimuth(out - mean))
        current = math.sqrt(float((p * dev**2).sum()))
        if current < 1e-15:
            return np.full_like(out, mean) if target_rad < 1e-15 else out
        out = mean + dev * (target_rad / current)
    return out


def generate_cluster_angles(
    azimuth_spread_deg: float,
    zenith_spread_deg: float,
    powers: np.ndarray,
    los_angle: AngleVector,
    rng: np.random.Generator,
    elevation_mean_offset_deg: float = 0.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-cluster azimuth and zenith angles around the LOS direction.

    Stronger clusters land closer to the mean (deviations shaped by the
    cluster powers), each with a random sign and a small perturbation; the
    deviations are then rescaled so the power-weighted circular RMS spread
    matches the requested value. Zenith means are shifted by the constant
    elevation offset and results reflected into [0, pi].
    """
    if azimuth_spread_deg <= 0 or zenith_spread_deg <= 0:
        raise ValueError("angular spreads must be positive")
    p = np.asarray(powers, dtype=float)
    rel = np.clip(p / p.max(), 1e-30, 1.0)
    az_spread = math.radians(azimuth_spread_deg)
    zen_spread = math.radians(zenith_spread_deg)

    az_shape = np.sqrt(-np.log(rel)) * az_spread
    sign = rng.integers(0, 2, p.size) * 2 - 1
    perturb = rng.normal(0.0, az_spread / 7.0, p.size)
    azimuth = los_angle.azimuth + sign * az_shape + perturb
    azimuth = np.asarray(wrap_azimuth(_rescale_to_spread(azimuth, p, az_spread)))

    zen_shape = -np.log(rel) * zen_spread
    sign = rng.integers(0, 2, p.size) * 2 - 1
    perturb = rng.normal(0.0, zen_spread / 7.0, p.size)
    mean_zen = los_angle.zenith + math.radians(elevation_mean_offset_deg)
    zenith = mean_zen + sign * zen_shape + perturb
    zenith = reflect_zenith(_rescale_to_spread(zenith, p, zen_spread))
    return azimuth, zenith


def reflect_zenith(zenith):
    """Mirror zenith angles at the poles back into [0, pi]."""
    z = np.mod(np.asarray(zenith, dtype=float), 2.0 * math.pi)
    return np.where(z > math.pi, 2.0 * math.pi - z, z)


@dataclass
class ClusterAngles:
    """Per-cluster departure/arrival angle sets (radians)."""

    aod: np.ndarray
    zod: np.ndarray
    aoa: np.ndarray
    zoa: np.ndarray


def expand_subpaths(cluster_angles: ClusterAngles, offsets: SubpathOffsets):
    """Per-ray angles: each kind offset by its own scaled copy of the ray basis.

    Returns four (n_clusters, n_rays) arrays (aod, zod, aoa, zoa); azimuths
    wrapped, zeniths reflected into [0, pi].
    """
    a = offsets.alpha[np.newaxis, :]
    aod = np.asarray(wrap_azimuth(cluster_angles.aod[:, None] + math.radians(offsets.c_aod_deg) * a))
    aoa = np.asarray(wrap_azimuth(cluster_angles.aoa[:, None] + math.radians(offsets.c_aoa_deg) * a))
    zod = reflect_zenith(cluster_angles.zod[:, None] + math.radians(offsets.c_zod_deg) * a)
    zoa = reflect_zenith(cluster_angles.zoa[:, None] + math.radians(offsets.c_zoa_deg) * a)
    return aod, zod, aoa, zoa


def polarization_matrix(kappa, phases, offdiag_inverse: bool = False) -> np.ndarray:
    """2x2 polarization coupling matrix per ray.

    phases has trailing axis (VV, VH, HV, HH); the off-diagonal magnitude is
    sqrt(kappa) as displayed in the cluster model, or sqrt(1/kappa) with the
    inverse convention.
    """
    kappa = np.asarray(kappa, dtype=float)
    phases = np.asarray(phases, dtype=float)
    cross = np.sqrt(1.0 / kappa) if offdiag_inverse else np.sqrt(kappa)
    e = np.exp(1j * phases)
    mat = np.empty(kappa.shape + (2, 2), dtype=complex)
    mat[..., 0, 0] = e[..., 0]
    mat[..., 0, 1] = cross * e[..., 1]
    mat[..., 1, 0] = cross * e[..., 2]
    mat[..., 1, 1] = e[..., 3]
    return mat


def draw_polarization(
    rng: np.random.Generator,
    xpr_mu_db: float,
    xpr_sigma_db: float,
    shape=(),
) -> tuple[np.ndarray, np.ndarray]:
    """Log-normal XPR (linear) and four i.i.d. uniform phases per ray."""
    kappa = 10.0 ** (rng.normal(xpr_mu_db, xpr_sigma_db, shape) / 10.0)
    phases = rng.uniform(0.0, 2.0 * math.pi, tuple(np.atleast_1d(shape)) + (4,))
    return kappa, phases


@dataclass
class ClusterSet:
    """Realized small-scale parameters of one link.

    Arrays are (n_clusters,) or (n_clusters, n_rays); phases carry a trailing
    (VV, VH, HV, HH) axis. LOS co-polar phases are kept for the deterministic
    ray of Rice-weighted synthesis.
    """

    delays_s: np.ndarray
    cluster_powers: np.ndarray
    ray_powers: np.ndarray
    aod: np.ndarray
    zod: np.ndarray
    aoa: np.ndarray
    zoa: np.ndarray
    phases: np.ndarray
    xpr: np.ndarray
    los_phase_vv: float = 0.0
    los_phase_hh: float = 0.0

    def __post_init__(self):
        self.delays_s = np.asarray(self.delays_s, dtype=float)
        if self.delays_s[0] != 0.0 or np.any(np.diff(self.delays_s) < 0):
            raise ValueError("delays must be non-decreasing with first delay 0")
        if abs(float(np.sum(self.ray_powers)) - 1.0) > 1e-9:
            raise ValueError("ray powers must sum to 1")
        if np.any(self.xpr <= 0):
            raise ValueError("XPR must be positive")
        if np.any(self.phases < 0) or np.any(self.phases >= 2.0 * math.pi):
            raise ValueError("phases must lie in [0, 2pi)")

    @property
    def n_clusters(self) -> int:
        return self.delays_s.size

    @property
    def n_rays(self) -> int:
        return self.ray_powers.shape[1]


@dataclass
class SspConfig:
    """Scenario block controlling small-scale generation."""

    n_clusters: int = 20
    n_rays: int = 20
    r_tau: float = 2.5
    cluster_shadow_db: float = 3.0
    xpr_mu_db: float = -8.0
    xpr_sigma_db: float = 3.0
    xpr_offdiag_inverse: bool = False
    offsets: SubpathOffsets = field(default_factory=SubpathOffsets)
    elevation_offset_dep_deg: float = 0.0
    elevation_offset_arr_deg: float = 0.0
    split_strongest: bool = False

    def __post_init__(self):
        if self.n_rays != self.offsets.alpha.size:
            raise ValueError("ray count must match the offset table length")


def generate_cluster_set(
    lsps,
    los_departure: AngleVector,
    los_arrival: AngleVector,
    cfg: SspConfig,
    rng: np.random.Generator,
) -> ClusterSet:
    """Full small-scale draw for one link, following the generation pipeline:
    delays, powers, cluster angles, ray expansion, polarization."""
    delays = generate_delays(lsps.ds_s, cfg.n_clusters, cfg.r_tau, rng)
    powers = generate_cluster_powers(delays, lsps.ds_s, cfg.r_tau, cfg.cluster_shadow_db, rng)
    aod, zod = generate_cluster_angles(
        lsps.asd_deg, lsps.esd_deg, powers, los_departure, rng, cfg.elevation_offset_dep_deg
    )
    aoa, zoa = generate_cluster_angles(
        lsps.asa_deg, lsps.esa_deg, powers, los_arrival, rng, cfg.elevation_offset_arr_deg
    )
    ray_aod, ray_zod, ray_aoa, ray_zoa = expand_subpaths(
        ClusterAngles(aod, zod, aoa, zoa), cfg.offsets
    )
    kappa, phases = draw_polarization(
        rng, cfg.xpr_mu_db, cfg.xpr_sigma_db, (cfg.n_clusters, cfg.n_rays)
    )
    los_phases = rng.uniform(0.0, 2.0 * math.pi, 2)
    clusters = ClusterSet(
        delays_s=delays,
        cluster_powers=powers,
        ray_powers=np.repeat(powers[:, None] / cfg.n_rays, cfg.n_rays, axis=1),
        aod=ray_aod,
        zod=ray_zod,
        aoa=ray_aoa,
        zoa=ray_zoa,
        phases=phases,
        xpr=kappa,
        los_phase_vv=float(los_phases[0]),
        los_phase_hh=float(los_phases[1]),
    )
    if cfg.split_strongest:
        clusters = split_strongest_clusters(clusters)
    return clusters


def split_strongest_clusters(clusters: ClusterSet, n_split: int = 2) -> ClusterSet:
    """Subdivide the strongest clusters into three delay-offset sub-clusters.

    Rays are partitioned per the fixed 10/6/4 mapping; rays outside a
    sub-cluster get zero power there, so downstream synthesis is unchanged.
    Requires the 20-ray layout.
    """
    if clusters.n_rays != 20:
        raise ValueError("sub-cluster splitting is defined for 20-ray clusters")
    strongest = np.argsort(clusters.cluster_powers)[-n_split:]
    keep = [i for i in range(clusters.n_clusters) if i not in strongest]

    rows = {
        "delays": [clusters.delays_s[keep]],
        "cpow": [clusters.cluster_powers[keep]],
        "rpow": [clusters.ray_powers[keep]],
    }
    ray_fields = {
        name: [getattr(clusters, name)[keep]] for name in ("aod", "zod", "aoa", "zoa", "xpr")
    }
    phase_rows = [clusters.phases[keep]]
    for i in strongest:
        for rays, extra in zip(SUBCLUSTER_RAYS, SUBCLUSTER_DELAYS_S):
            mask = np.zeros(clusters.n_rays)
            mask[rays] = 1.0
            rows["delays"].append(np.array([clusters.delays_s[i] + extra]))
            rows["rpow"].append((clusters.ray_powers[i] * mask)[None, :])
            rows["cpow"].append(np.array([clusters.ray_powers[i][rays].sum()]))
            for name in ray_fields:
                ray_fields[name].append(getattr(clusters, name)[i][None, :])
            phase_rows.append(clusters.phases[i][None, :])

    delays = np.concatenate(rows["delays"])
    order = np.argsort(delays, kind="stable")
    return ClusterSet(
        delays_s=delays[order],
        cluster_powers=np.concatenate(rows["cpow"])[order],
        ray_powers=np.concatenate(rows["rpow"])[order],
        aod=np.concatenate(ray_fields["aod"])[order],
        zod=np.concatenate(ray_fields["zod"])[order],
        aoa=np.concatenate(ray_fields["aoa"])[order],
        zoa=np.concatenate(ray_fields["zoa"])[order],
        phases=np.concatenate(phase_rows)[order],
        xpr=np.concatenate(ray_fields["xpr"])[order],
        los_phase_vv=clusters.los_phase_vv,
        los_phase_hh=clusters.los_phase_hh,
    )
