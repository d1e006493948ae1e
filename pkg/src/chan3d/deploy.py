"""Network layout, tri-sector cells, and 3D UE dropping."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geom import Vec3

CELL_BEARINGS_DEG = (0.0, 120.0, 240.0)


@dataclass
class Cell:
    site_index: int
    cell_index: int
    bearing_deg: float
    position: Vec3
    p_tx_dbm: float = 46.0
    downtilt_deg: float = 0.0
    antenna: object = None


@dataclass
class Site:
    index: int
    position: Vec3
    cells: list = field(default_factory=list)


@dataclass
class UE:
    position: Vec3
    indoor: bool
    floor: int = 0
    building_floors: int = 0
    velocity: Vec3 = field(default_factory=lambda: Vec3(0.0, 0.0, 0.0))


def hex_layout(n_rings: int, isd: float, bs_height: float = 25.0, p_tx_dbm: float = 46.0):
    """Hexagonal grid of tri-sector sites; nearest sites are exactly `isd` apart.

    n_rings=2 gives the standard 19-site (57-cell) deployment. The layout is
    deterministic: sites are ordered ring by ring, counter-clockwise.
    """
    if isd <= 0:
        raise ValueError("inter-site distance must be positive")
    if n_rings < 0:
        raise ValueError("ring count must be non-negative")
    u = np.array([1.0, 0.0])
    v = np.array([0.5, math.sqrt(3.0) / 2.0])
    coords = [(0, 0)]
    for ring in range(1, n_rings + 1):
        ring_coords = []
        for i in range(-ring, ring + 1):
            for j in range(-ring, ring + 1):
                if max(abs(i), abs(j), abs(i + j)) == ring:
                    ring_coords.append((i, j))
        ring_coords.sort(key=lambda c: math.atan2((c[0] * u + c[1] * v)[1], (c[0] * u + c[1] * v)[0]) % (2 * math.pi))
        coords.extend(ring_coords)
    sites = []
    cell_index = 0
    for s, (i, j) in enumerate(coords):
        xy = isd * (i * u + j * v)
        pos = Vec3(float(xy[0]), float(xy[1]), bs_height)
        site = Site(s, pos)
        for bearing in CELL_BEARINGS_DEG:
            site.cells.append(Cell(s, cell_index, bearing, pos, p_tx_dbm))
            cell_index += 1
        sites.append(site)
    return sites


def wrap_basis(n_rings: int, isd: float) -> np.ndarray:
    """Rows t1, t2 of the lattice that tiles the plane with this layout.

    A layout of r rings has 3r^2+3r+1 sites and tiles under
    t1 = (r+1)u + r v (u, v the site lattice basis) and t2 = t1 rotated by
    60 degrees. Wrap-around geometry folds UE-site offsets onto the nearest
    lattice image.
    """
    u = np.array([1.0, 0.0])
    v = np.array([0.5, math.sqrt(3.0) / 2.0])
    t1 = isd * ((n_rings + 1) * u + n_rings * v)
    c, s = math.cos(math.pi / 3.0), math.sin(math.pi / 3.0)
    t2 = np.array([c * t1[0] - s * t1[1], s * t1[0] + c * t1[1]])
    return np.array([t1, t2])


def fold_to_nearest_image(delta: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Fold 2D offsets onto their minimum-norm lattice image.

    Exact for this (reduced) basis: the nearest lattice point always lies in
    the 3x3 integer neighborhood of the rounded fractional coordinates.
    """
    delta = np.asarray(delta, dtype=float).reshape(-1, 2)
    frac = delta @ np.linalg.inv(basis)
    base = np.round(frac)
    best = None
    best_norm = None
    for di in (-1.0, 0.0, 1.0):
        for dj in (-1.0, 0.0, 1.0):
            image = delta - (base + np.array([di, dj])) @ basis
            norm = np.einsum("ik,ik->i", image, image)
            if best is None:
                best, best_norm = image, norm
            else:
                take = norm < best_norm
                best = np.where(take[:, None], image, best)
                best_norm = np.where(take, norm, best_norm)
    return best


def _hexagon_mask(xy: np.ndarray, half_isd: float) -> np.ndarray:
    """Points inside the flat-side hexagonal coverage area centered at origin.

    Sides face the six neighbor directions (multiples of 60 degrees) at
    distance isd/2, matching the Voronoi cell of the site grid.
    """
    inside = np.ones(xy.shape[0], dtype=bool)
    for k in range(3):
        n = np.array([math.cos(k * math.pi / 3.0), math.sin(k * math.pi / 3.0)])
        inside &= np.abs(xy @ n) <= half_isd + 1e-12
    return inside


def sample_cell_positions(
    n: int,
    site_xy: np.ndarray,
    bearing_deg: float,
    isd: float,
    min_dist_2d: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform 2D positions in one cell's 120-degree wedge of the site hexagon,
    at least min_dist_2d from the site."""
    half = isd / 2.0
    radius = isd / math.sqrt(3.0)
    bearing = math.radians(bearing_deg)
    out = np.empty((n, 2))
    filled = 0
    while filled < n:
        cand = rng.uniform(-radius, radius, size=(4 * (n - filled), 2))
        keep = _hexagon_mask(cand, half)
        az = np.arctan2(cand[:, 1], cand[:, 0])
        rel = (az - bearing + math.pi) % (2.0 * math.pi) - math.pi
        keep &= np.abs(rel) <= math.pi / 3.0
        keep &= np.hypot(cand[:, 0], cand[:, 1]) >= min_dist_2d
        cand = cand[keep]
        take = min(len(cand), n - filled)
        out[filled : filled + take] = cand[:take]
        filled += take
    return out + site_xy


def _drop(
    n_per_cell: int,
    layout,
    rng: np.random.Generator,
    isd: float,
    min_dist_2d: float,
    speed_kmh: float,
    three_d: bool,
):
    # The attribute stream is consumed identically in both drop modes so that
    # matched seeds give matched x/y positions.
    if n_per_cell < 1:
        raise ValueError("need at least one UE per cell")
    ues = []
    speed = speed_kmh / 3.6
    for site in layout:
        site_xy = np.array([site.position.x, site.position.y])
        for cell in site.cells:
            xy = sample_cell_positions(
                n_per_cell, site_xy, cell.bearing_deg, isd, min_dist_2d, rng
            )
            indoor = rng.random(n_per_cell) < 0.8
            floors_total = rng.integers(4, 9, n_per_cell)
            floor = rng.integers(1, floors_total + 1)
            heading = rng.uniform(0.0, 2.0 * math.pi, n_per_cell)
            for i in range(n_per_cell):
                if three_d and indoor[i]:
                    height = 3.0 * (int(floor[i]) - 1) + 1.5
                    ue = UE(
                        Vec3(float(xy[i, 0]), float(xy[i, 1]), height),
                        True,
                        int(floor[i]),
                        int(floors_total[i]),
                    )
                else:
                    ue = UE(Vec3(float(xy[i, 0]), float(xy[i, 1]), 1.5), False)
                ue.velocity = Vec3(
                    speed * math.cos(heading[i]), speed * math.sin(heading[i]), 0.0
                )
                ues.append(ue)
    return ues


def drop_ues(
    n_per_cell: int,
    layout,
    rng: np.random.Generator,
    isd: float,
    min_dist_2d: float = 35.0,
    speed_kmh: float = 3.0,
):
    """3D drop: 80% of UEs indoors on a uniform floor of a 4-8 story building
    (height 3(floor-1)+1.5 m), the rest outdoors at 1.5 m. Equal count per cell."""
    return _drop(n_per_cell, layout, rng, isd, min_dist_2d, speed_kmh, three_d=True)


def legacy_2d_drop(
    n_per_cell: int,
    layout,
    rng: np.random.Generator,
    isd: float,
    min_dist_2d: float = 35.0,
    speed_kmh: float = 3.0,
):
    """Legacy drop: identical positions to drop_ues under the same seed, but
    every UE outdoors at 1.5 m."""
    return _drop(n_per_cell, layout, rng, isd, min_dist_2d, speed_kmh, three_d=False)
