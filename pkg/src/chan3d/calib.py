"""Calibration metrics: RSRP, attachment, coupling gain, geometry factor,
spread estimators, channel eigenvalues, and empirical CDFs."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import wrap_azimuth
from .ssp import circular_mean
from .synth import ChannelRealization


def rsrp_db(p_tx_dbm, g_tx_db, g_rx_db, pathloss_db, sf_db):
    """Slow-fading RSRP: P_TX + G_T + G_R - PL - SF, all in dB. Broadcasts."""
    return (
        np.asarray(p_tx_dbm, dtype=float)
        + np.asarray(g_tx_db, dtype=float)
        + np.asarray(g_rx_db, dtype=float)
        - np.asarray(pathloss_db, dtype=float)
        - np.asarray(sf_db, dtype=float)
    )


def rsrp_fast_fading_db(p_tx_dbm: float, realization: ChannelRealization) -> float:
    """RSRP including fast fading: transmit power plus the time-averaged total
    tap energy, normalized per TX-RX pair. Slow fading is already embedded in
    the realization's taps."""
    taps = realization.taps
    n_pairs = taps.shape[2] * taps.shape[3]
    energy = float(np.mean(np.sum(np.abs(taps) ** 2, axis=(1, 2, 3)))) / n_pairs
    return p_tx_dbm + 10.0 * math.log10(energy)


def attach(rsrp_values) -> int:
    """Index of the serving cell: argmax RSRP, ties to the lowest index."""
    values = np.asarray(rsrp_values, dtype=float)
    if values.size == 0:
        raise ValueError("at least one cell required")
    return int(np.argmax(values))


def coupling_gain_db(serving_rsrp_db: float, p_tx_dbm: float) -> float:
    """Serving-cell RSRP minus its transmit power (total link gain)."""
    return serving_rsrp_db - p_tx_dbm


def geometry_factor_db(rsrp_values, serving: int) -> float:
    """Serving power over the linear sum of all other cells' powers, in dB.

    Interference is accumulated in the linear power domain. With no
    interferer the UE is isolated and +inf is returned (callers exclude it
    from CDFs).
    """
    values = np.asarray(rsrp_values, dtype=float)
    linear = 10.0 ** (values / 10.0)
    interference = float(linear.sum() - linear[serving])
    if interference <= 0.0:
        return math.inf
    return 10.0 * math.log10(float(linear[serving]) / interference)


def angular_spread_deg(angles_rad, powers) -> float:
    """Power-weighted circular RMS spread in degrees.

    Deviations are wrapped about the power-weighted circular mean direction.
    """
    p = np.asarray(powers, dtype=float).reshape(-1)
    a = np.asarray(angles_rad, dtype=float).reshape(-1)
    total = p.sum()
    if total <= 0:
        raise ValueError("total power must be positive")
    mean = circular_mean(a, p)
    dev = np.asarray(wrap_azimuth(a - mean))
    return math.degrees(math.sqrt(float((p * dev**2).sum() / total)))


def delay_spread_s(delays_s, powers) -> float:
    """Power-weighted RMS delay spread in seconds."""
    p = np.asarray(powers, dtype=float).reshape(-1)
    tau = np.asarray(delays_s, dtype=float).reshape(-1)
    total = p.sum()
    if total <= 0:
        raise ValueError("total power must be positive")
    mean = float((p * tau).sum() / total)
    second = float((p * tau**2).sum() / total)
    return math.sqrt(max(0.0, second - mean * mean))


def top_eigenvalues(realization: ChannelRealization, count: int = 2):
    """Largest eigenvalues of the time-averaged wideband covariance
    sum_n H_n H_n^H, via singular values of the stacked tap matrices."""
    taps = realization.taps
    n_times, n_taps, n_tx, n_rx = taps.shape
    stacked = taps.transpose(2, 0, 1, 3).reshape(n_tx, n_times * n_taps * n_rx)
    singular = np.linalg.svd(stacked, compute_uv=False)
    eigenvalues = np.zeros(count)
    top = (singular**2 / n_times)[:count]
    eigenvalues[: top.size] = top
    return tuple(float(v) for v in eigenvalues)


def empirical_cdf(samples):
    """Sorted sample values with step probabilities i/n.

    Non-finite samples are dropped; an empty (or all-non-finite) input is an
    error.
    """
    values = np.asarray(samples, dtype=float).reshape(-1)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise ValueError("need at least one finite sample")
    values = np.sort(values)
    probabilities = np.arange(1, values.size + 1) / values.size
    return values, probabilities


REPORT_COLUMNS = (
    "ue_id", "site", "cell", "cl_db", "gf_db",
    "asd", "asa", "esd", "esa", "ds", "l1", "l2",
)


@dataclass
class DropReport:
    """Per-UE calibration record; spread/eigenvalue fields stay NaN in phase 1."""

    ue_id: int
    site: int
    cell: int
    cl_db: float
    gf_db: float
    asd_deg: float = math.nan
    asa_deg: float = math.nan
    esd_deg: float = math.nan
    esa_deg: float = math.nan
    ds_s: float = math.nan
    lambda1: float = math.nan
    lambda2: float = math.nan

    def row(self) -> str:
        fields = [str(self.ue_id), str(self.site), str(self.cell)]
        for v in (
            self.cl_db, self.gf_db, self.asd_deg, self.asa_deg,
            self.esd_deg, self.esa_deg, self.ds_s, self.lambda1, self.lambda2,
        ):
            fields.append(repr(float(v)))
        return " ".join(fields)


def write_report(reports, fh):
    """Delimited-text export of DropReport rows with a single header line."""
    fh.write(" ".join(REPORT_COLUMNS) + "\n")
    for report in reports:
        fh.write(report.row() + "\n")
