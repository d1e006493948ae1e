"""Element and port radiation patterns, slant polarization, and port virtualization."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import WaveVector, unit_vectors, wrap_azimuth


@dataclass
class PatternSpec:
    """Constants of the min-clipped parabolic power pattern.

    theta_tilt_deg is the zenith angle of the vertical-cut peak: 90 for a
    broadside (horizon-pointing) beam, 90 + downtilt for an electrically
    tilted port.
    """

    g_max_dbi: float
    a_m_db: float
    sla_v_db: float
    phi_3db_deg: float
    theta_3db_deg: float
    theta_tilt_deg: float = 0.0

    def __post_init__(self):
        if self.phi_3db_deg <= 0 or self.theta_3db_deg <= 0:
            raise ValueError("3 dB beamwidths must be positive")
        if self.a_m_db <= 0 or self.sla_v_db <= 0:
            raise ValueError("front-back ratio and sidelobe floor must be positive")


def element_pattern_3gpp(theta_peak_deg: float = 90.0) -> PatternSpec:
    """Single-element pattern: 8 dBi peak, 65 deg cuts, 30 dB floors."""
    return PatternSpec(8.0, 30.0, 30.0, 65.0, 65.0, theta_peak_deg)


def itu_port_pattern(downtilt_deg: float = 0.0) -> PatternSpec:
    """Narrow-elevation port approximation: 17 dBi, 70/15 deg cuts, 20 dB clip."""
    return PatternSpec(17.0, 20.0, 20.0, 70.0, 15.0, 90.0 + downtilt_deg)


def _clipped_pattern_db(spec: PatternSpec, azimuth, zenith, vertical_floor_db: float):
    az_deg = np.degrees(wrap_azimuth(azimuth))
    zen_deg = np.degrees(np.asarray(zenith, dtype=float))
    a_h = -np.minimum(12.0 * (az_deg / spec.phi_3db_deg) ** 2, spec.a_m_db)
    a_v = -np.minimum(
        12.0 * ((zen_deg - spec.theta_tilt_deg) / spec.theta_3db_deg) ** 2,
        vertical_floor_db,
    )
    return spec.g_max_dbi - np.minimum(-(a_h + a_v), spec.a_m_db)


def element_gain_db(spec: PatternSpec, azimuth, zenith):
    """Element power gain in dB at the given angles (radians, broadcastable).

    Horizontal cut clipped at the front-back ratio, vertical cut at the
    sidelobe floor, combined with the overall front-back clip.
    """
    return _clipped_pattern_db(spec, azimuth, zenith, spec.sla_v_db)


def port_gain_itu_db(spec: PatternSpec, azimuth, zenith):
    """Port power gain in dB; the front-back ratio also floors the vertical cut."""
    return _clipped_pattern_db(spec, azimuth, zenith, spec.a_m_db)


def slant_fields_36814(gain_linear, alpha):
    """Split a linear power gain into (vertical, horizontal) field amplitudes.

    Angle-independent slant approximation: (sqrt(A) cos a, sqrt(A) sin a),
    so the squared amplitudes always sum back to the gain.
    """
    gain = np.asarray(gain_linear, dtype=float)
    if np.any(gain < 0):
        raise ValueError("linear gain must be non-negative")
    amp = np.sqrt(gain)
    return amp * np.cos(alpha), amp * np.sin(alpha)


@dataclass
class ArrayGeometry:
    """Physical element layout plus the port virtualization map.

    element_positions are meters in the array frame (boresight +x, columns
    along y, rows along z). Each port is a pair (element indices, complex
    weights) with unit total weight power; within one polarization (slant)
    group the ports partition the elements.
    """

    element_positions: np.ndarray
    m_rows: int
    n_cols: int
    d_v: float
    d_h: float
    slant_rad: np.ndarray
    ports: list = field(default_factory=list)

    def __post_init__(self):
        self.element_positions = np.asarray(self.element_positions, dtype=float).reshape(-1, 3)
        self.slant_rad = np.asarray(self.slant_rad, dtype=float).reshape(-1)
        if len(self.slant_rad) != self.n_elements:
            raise ValueError("one slant angle required per element")
        self.ports = [
            (np.asarray(idx, dtype=int), np.asarray(w, dtype=complex)) for idx, w in self.ports
        ]
        for idx, w in self.ports:
            if idx.shape != w.shape:
                raise ValueError("port indices and weights must have equal length")
            if abs(float(np.sum(np.abs(w) ** 2)) - 1.0) > 1e-9:
                raise ValueError("port weights must have unit total power")
        for slant in np.unique(self.slant_rad):
            members = np.flatnonzero(self.slant_rad == slant)
            claimed = np.concatenate(
                [idx for idx, _ in self.ports if np.all(self.slant_rad[idx] == slant)]
                or [np.array([], dtype=int)]
            )
            if sorted(claimed.tolist()) != members.tolist():
                raise ValueError("ports must partition the elements of each polarization")

    @property
    def n_elements(self) -> int:
        return self.element_positions.shape[0]

    @property
    def n_ports(self) -> int:
        return len(self.ports)

    def with_port_weights(self, weights) -> "ArrayGeometry":
        """Copy of the geometry with every port using the given weight vector."""
        w = np.asarray(weights, dtype=complex)
        ports = []
        for idx, old in self.ports:
            if len(idx) != len(w):
                raise ValueError("weight vector length does not match port size")
            ports.append((idx.copy(), w.copy()))
        return ArrayGeometry(
            self.element_positions.copy(), self.m_rows, self.n_cols,
            self.d_v, self.d_h, self.slant_rad.copy(), ports,
        )


def uniform_planar_array(
    m_rows: int,
    n_cols: int,
    d_v: float,
    d_h: float,
    wavelength: float,
    k_per_port: int | None = None,
    slant_deg: float = 0.0,
    cross_polarized: bool = False,
) -> ArrayGeometry:
    """Uniform M x N array with one port per column (K=M) or per element (K=1).

    d_v/d_h are in wavelengths. With cross_polarized=True each position holds
    a +/-45 deg pair and every column maps to two ports, one per slant.
    """
    if m_rows < 1 or n_cols < 1:
        raise ValueError("array must have at least one row and one column")
    k = m_rows if k_per_port is None else k_per_port
    if k not in (1, m_rows):
        raise ValueError("elements per port must be 1 or the full column")
    base = np.array(
        [
            [0.0, c * d_h * wavelength, r * d_v * wavelength]
            for c in range(n_cols)
            for r in range(m_rows)
        ]
    )
    slants = [math.radians(-45.0), math.radians(45.0)] if cross_polarized else [
        math.radians(slant_deg)
    ]
    positions = np.repeat(base, len(slants), axis=0)
    slant = np.tile(np.array(slants), len(base))
    ports = []
    n_pol = len(slants)
    for c in range(n_cols):
        for p in range(n_pol):
            column = np.array([(c * m_rows + r) * n_pol + p for r in range(m_rows)])
            if k == 1:
                ports.extend((np.array([e]), np.array([1.0 + 0j])) for e in column)
            else:
                ports.append((column, np.full(m_rows, 1.0 / math.sqrt(m_rows), dtype=complex)))
    return ArrayGeometry(positions, m_rows, n_cols, d_v, d_h, slant, ports)


def array_response(geometry: ArrayGeometry, k: WaveVector) -> np.ndarray:
    """Per-element response exp(j k . x_i); all entries have unit modulus."""
    return np.exp(1j * (geometry.element_positions @ k.as_array()))


def response_phases(positions: np.ndarray, k_vectors: np.ndarray) -> np.ndarray:
    """exp(j k . x) for a batch of wave vectors; shape (..., n_elements)."""
    return np.exp(1j * (np.asarray(k_vectors) @ np.asarray(positions).T))


def virtualize_port(
    per_element_rows: np.ndarray, geometry: ArrayGeometry, port: int
) -> np.ndarray:
    """Weighted sum of element channel rows for one port.

    per_element_rows is indexed (element, rx antenna); the result is one row
    per rx antenna. Linear in both the weights and the element channels.
    """
    if not 0 <= port < geometry.n_ports:
        raise ValueError(f"unknown port index {port}")
    idx, w = geometry.ports[port]
    rows = np.asarray(per_element_rows)
    if rows.shape[0] <= int(idx.max()):
        raise ValueError("element rows do not cover all port members")
    return w @ rows[idx]


def downtilt_weights(m: int, d_v: float, theta_tilt: float) -> np.ndarray:
    """Unit-power progressive phase weights steering a column to zenith theta_tilt.

    d_v is the vertical spacing in wavelengths; theta_tilt in radians.
    """
    if m < 1:
        raise ValueError("element count must be >= 1")
    if d_v <= 0:
        raise ValueError("vertical spacing must be positive")
    idx = np.arange(m)
    return np.exp(-2j * math.pi * d_v * idx * math.cos(theta_tilt)) / math.sqrt(m)


def port_fields(
    spec: PatternSpec,
    geometry: ArrayGeometry,
    port: int,
    wavelength: float,
    azimuth,
    zenith,
    bearing_rad: float = 0.0,
):
    """Composite (vertical, horizontal) field amplitudes of one virtualized port.

    Evaluates the element pattern in the port's local frame (azimuth measured
    from `bearing_rad`), applies per-element slant fields and steering phases
    at the given wavelength, and sums with the port weights. azimuth/zenith
    broadcast together; outputs are complex with a matching shape.
    """
    if not 0 <= port < geometry.n_ports:
        raise ValueError(f"unknown port index {port}")
    idx, w = geometry.ports[port]
    local_az = wrap_azimuth(np.asarray(azimuth, dtype=float) - bearing_rad)
    zen = np.asarray(zenith, dtype=float)
    amp = np.sqrt(10.0 ** (element_gain_db(spec, local_az, zen) / 10.0))
    k_vecs = (2.0 * math.pi / wavelength) * unit_vectors(local_az, zen)
    phases = response_phases(geometry.element_positions[idx], k_vecs)
    steer = phases @ (w * np.cos(geometry.slant_rad[idx])), phases @ (
        w * np.sin(geometry.slant_rad[idx])
    )
    return amp * steer[0], amp * steer[1]


def composite_port_gain_db(
    spec: PatternSpec,
    geometry: ArrayGeometry,
    port: int,
    wavelength: float,
    azimuth,
    zenith,
    bearing_rad: float = 0.0,
):
    """Power gain in dB of the virtualized port (element pattern + weights)."""
    g_v, g_h = port_fields(spec, geometry, port, wavelength, azimuth, zenith, bearing_rad)
    power = np.abs(g_v) ** 2 + np.abs(g_h) ** 2
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(power)
