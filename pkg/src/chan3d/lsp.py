"""Slow fading and correlated large-scale parameter generation per UE-site link."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import GeometryError
from .rng import STREAM_FIELD, STREAM_LOS_STATE, STREAM_LSP, substream

# Canonical ordering of the seven large-scale parameters.
LSP_NAMES = ("sf", "k", "ds", "asd", "asa", "esd", "esa")


@dataclass
class LargeScaleParams:
    """The seven per-link LSPs: shadow fading, Rice factor, and RMS spreads."""

    sf_db: float
    k_factor_db: float
    ds_s: float
    asd_deg: float
    asa_deg: float
    esd_deg: float
    esa_deg: float

    def __post_init__(self):
        spreads = (self.ds_s, self.asd_deg, self.asa_deg, self.esd_deg, self.esa_deg)
        if not all(math.isfinite(v) and v > 0 for v in spreads):
            raise ValueError("delay and angular spreads must be positive and finite")
        if not (math.isfinite(self.sf_db) and math.isfinite(self.k_factor_db)):
            raise ValueError("SF and K factor must be finite")


@dataclass
class LinkGeometry:
    """Distances, heights and state flags of one UE-site link."""

    d_2d: float
    d_3d: float
    h_bs: float
    h_ue: float
    indoor: bool = False
    los: bool = False

    def __post_init__(self):
        expected = math.hypot(self.d_2d, self.h_bs - self.h_ue)
        if abs(self.d_3d - expected) > 1e-6 * max(1.0, expected):
            raise ValueError("d_3d inconsistent with d_2d and the height difference")

    @staticmethod
    def from_positions(bs_xyz, ue_xyz, indoor: bool = False, los: bool = False) -> "LinkGeometry":
        bs = np.asarray(bs_xyz, dtype=float)
        ue = np.asarray(ue_xyz, dtype=float)
        d_2d = float(np.hypot(ue[0] - bs[0], ue[1] - bs[1]))
        d_3d = float(np.linalg.norm(ue - bs))
        return LinkGeometry(d_2d, d_3d, float(bs[2]), float(ue[2]), indoor, los)


@dataclass
class Marginal:
    """Mean and standard deviation of one LSP in its generation domain
    (dB for SF/K, log10 of the natural unit for the spreads)."""

    mu: float
    sigma: float


@dataclass
class DistanceTable:
    """(mu, sigma) as piecewise-linear functions of 2D distance.

    An optional slope adds mu_height_slope_per_m * (h_ue - 1.5) to mu, for
    elevation spreads that depend on the UE height. Values are clamped at
    the table ends.
    """

    distances_m: tuple
    mu: tuple
    sigma: tuple
    mu_height_slope_per_m: float = 0.0

    def __post_init__(self):
        if not (len(self.distances_m) == len(self.mu) == len(self.sigma)) or not self.distances_m:
            raise ValueError("distance table needs equal-length, non-empty columns")
        if list(self.distances_m) != sorted(self.distances_m):
            raise ValueError("distance breakpoints must be ascending")

    def at(self, d_2d: float, h_ue: float = 1.5) -> Marginal:
        mu = float(np.interp(d_2d, self.distances_m, self.mu))
        sigma = float(np.interp(d_2d, self.distances_m, self.sigma))
        return Marginal(mu + self.mu_height_slope_per_m * (h_ue - 1.5), sigma)


@dataclass
class LspDistributionSpec:
    """Marginals, 7x7 cross-correlation, and decorrelation distances.

    ESD/ESA marginals are distance tables so they can depend on the link
    geometry; the others are plain (mu, sigma) pairs.
    """

    sf: Marginal
    k_factor: Marginal
    ds_log10: Marginal
    asd_log10: Marginal
    asa_log10: Marginal
    esd_log10: DistanceTable
    esa_log10: DistanceTable
    correlation: np.ndarray
    decorrelation_m: dict = field(default_factory=dict)
    _factor: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.correlation = np.asarray(self.correlation, dtype=float)
        if self.correlation.shape != (7, 7):
            raise ValueError("correlation matrix must be 7x7")

    def mixing_factor(self) -> np.ndarray:
        """Factor F with F F^T equal to the correlation matrix.

        Uses Cholesky when positive definite, an eigenvalue factor for the
        semi-definite case, and raises ValueError otherwise.
        """
        if self._factor is not None:
            return self._factor
        corr = self.correlation
        if not np.allclose(corr, corr.T, atol=1e-12) or not np.allclose(
            np.diag(corr), 1.0, atol=1e-12
        ):
            raise ValueError("correlation matrix must be symmetric with unit diagonal")
        try:
            factor = np.linalg.cholesky(corr)
        except np.linalg.LinAlgError:
            w, v = np.linalg.eigh(corr)
            if w.min() < -1e-8:
                raise ValueError(
                    f"correlation matrix is not positive semi-definite "
                    f"(min eigenvalue {w.min():.3g})"
                ) from None
            factor = v @ np.diag(np.sqrt(np.clip(w, 0.0, None)))
        self._factor = factor
        return factor


def lsps_from_normals(
    spec: LspDistributionSpec, link: LinkGeometry, normals: np.ndarray
) -> LargeScaleParams:
    """Map 7 standard normals through the correlation factor and marginals."""
    z = spec.mixing_factor() @ np.asarray(normals, dtype=float)
    esd = spec.esd_log10.at(link.d_2d, link.h_ue)
    esa = spec.esa_log10.at(link.d_2d, link.h_ue)
    return LargeScaleParams(
        sf_db=spec.sf.mu + spec.sf.sigma * z[0],
        k_factor_db=spec.k_factor.mu + spec.k_factor.sigma * z[1],
        ds_s=10.0 ** (spec.ds_log10.mu + spec.ds_log10.sigma * z[2]),
        asd_deg=10.0 ** (spec.asd_log10.mu + spec.asd_log10.sigma * z[3]),
        asa_deg=10.0 ** (spec.asa_log10.mu + spec.asa_log10.sigma * z[4]),
        esd_deg=10.0 ** (esd.mu + esd.sigma * z[5]),
        esa_deg=10.0 ** (esa.mu + esa.sigma * z[6]),
    )


def draw_lsps(
    spec: LspDistributionSpec, link: LinkGeometry, rng: np.random.Generator
) -> LargeScaleParams:
    """Draw one correlated LSP vector for a link from the given stream."""
    return lsps_from_normals(spec, link, rng.standard_normal(7))


@dataclass
class PathlossCoeffs:
    """PL = intercept + 10*exponent*log10(d_3d) + freq_coeff*log10(f_GHz)."""

    intercept_db: float
    exponent: float
    freq_coeff_db: float


@dataclass
class PathlossModel:
    los: PathlossCoeffs
    nlos: PathlossCoeffs
    ue_height_gain_db_per_m: float = 0.6
    indoor_penetration_db: float = 20.0


def pathloss_model_for(scenario: str) -> PathlossModel:
    """Documented default coefficients per scenario (36.873-flavored shapes)."""
    if scenario == "UMa":
        return PathlossModel(
            los=PathlossCoeffs(28.0, 2.2, 20.0),
            nlos=PathlossCoeffs(13.54, 3.908, 20.0),
            ue_height_gain_db_per_m=0.6,
        )
    if scenario == "UMi":
        return PathlossModel(
            los=PathlossCoeffs(32.4, 2.1, 20.0),
            nlos=PathlossCoeffs(22.4, 3.53, 21.3),
            ue_height_gain_db_per_m=0.3,
        )
    raise ValueError(f"unknown scenario {scenario!r}")


def pathloss_db(model: PathlossModel, link: LinkGeometry, frequency_hz: float) -> float:
    """Deterministic pathloss in dB over the 3D distance.

    NLOS links get a UE-height gain term relative to the 1.5 m reference;
    indoor links add the configured penetration constant.
    """
    if link.d_3d <= 0:
        raise GeometryError("pathloss undefined at zero distance")
    if frequency_hz <= 0:
        raise ValueError("frequency must be positive")
    coeffs = model.los if link.los else model.nlos
    pl = (
        coeffs.intercept_db
        + 10.0 * coeffs.exponent * math.log10(link.d_3d)
        + coeffs.freq_coeff_db * math.log10(frequency_hz / 1e9)
    )
    if not link.los:
        pl -= model.ue_height_gain_db_per_m * (link.h_ue - 1.5)
    if link.indoor:
        pl += model.indoor_penetration_db
    return pl


@dataclass
class LosProbability:
    """P(LOS) = min(1, exp(-(d_2d - d0) / decay)); a documented default shape."""

    d0_m: float = 18.0
    decay_m: float = 63.0

    def at(self, d_2d: float) -> float:
        return min(1.0, math.exp(-(d_2d - self.d0_m) / self.decay_m))


class SpatialGaussianField:
    """Sum-of-sinusoids Gaussian field with exponential autocorrelation.

    Samples evaluate in closed form at any (x, y), so correlated values can
    be produced by independent workers without coordination. The radial
    wavenumber law is the 2D spectral density of exp(-d/decorrelation).
    """

    def __init__(self, decorrelation_m: float, seed_seq_key, n_terms: int = 128):
        if decorrelation_m <= 0:
            raise ValueError("decorrelation distance must be positive")
        rng = substream(*seed_seq_key)
        u = rng.random(n_terms)
        k_mag = np.sqrt(1.0 / (1.0 - u) ** 2 - 1.0) / decorrelation_m
        direction = rng.uniform(0.0, 2.0 * math.pi, n_terms)
        self._kx = k_mag * np.cos(direction)
        self._ky = k_mag * np.sin(direction)
        self._phase = rng.uniform(0.0, 2.0 * math.pi, n_terms)
        self._scale = math.sqrt(2.0 / n_terms)

    def sample(self, x: float, y: float) -> float:
        return self._scale * float(
            np.cos(self._kx * x + self._ky * y + self._phase).sum()
        )


class LspSampler:
    """Per-link LSP source with site-shared draws.

    All three cells of a site see the same draw for a given UE. With spatial
    correlation enabled the underlying normals come from per-(site, LSP)
    Gaussian fields evaluated at the UE position, so nearby UEs receive
    correlated parameters; otherwise each (UE, site) pair owns a keyed
    substream. Both modes are deterministic under any worker schedule.
    """

    def __init__(
        self,
        spec_los: LspDistributionSpec,
        spec_nlos: LspDistributionSpec,
        master_seed: int,
        los_model: LosProbability | None = None,
        spatial: bool = False,
        n_field_terms: int = 128,
    ):
        self.spec_los = spec_los
        self.spec_nlos = spec_nlos
        self.master_seed = master_seed
        self.los_model = los_model or LosProbability()
        self.spatial = spatial
        self.n_field_terms = n_field_terms
        self._fields: dict = {}

    def los_state(self, ue_id: int, site_id: int, d_2d: float) -> bool:
        rng = substream(self.master_seed, STREAM_LOS_STATE, ue_id, site_id)
        return bool(rng.random() < self.los_model.at(d_2d))

    def prebuild_fields(self, site_ids):
        """Materialize the spatial fields of the given sites (e.g. before
        forking workers, so children inherit them instead of rebuilding)."""
        for site_id in site_ids:
            self._field_normals(int(site_id), 0.0, 0.0)

    def _field_normals(self, site_id: int, x: float, y: float) -> np.ndarray:
        decorr = self.spec_nlos.decorrelation_m
        out = np.empty(7)
        for i, name in enumerate(LSP_NAMES):
            key = (site_id, i)
            if key not in self._fields:
                self._fields[key] = SpatialGaussianField(
                    float(decorr.get(name, 50.0)),
                    (self.master_seed, STREAM_FIELD, site_id, i),
                    self.n_field_terms,
                )
            out[i] = self._fields[key].sample(x, y)
        return out

    def link_lsps(
        self, ue_id: int, site_id: int, link: LinkGeometry, ue_xy=None
    ) -> LargeScaleParams:
        """One LSP draw per (UE, site), reused by all cells of the site."""
        spec = self.spec_los if link.los else self.spec_nlos
        if self.spatial and ue_xy is not None:
            normals = self._field_normals(site_id, float(ue_xy[0]), float(ue_xy[1]))
        else:
            rng = substream(self.master_seed, STREAM_LSP, ue_id, site_id)
            normals = rng.standard_normal(7)
        return lsps_from_normals(spec, link, normals)
