"""GBS layouts, UAV trajectories and link geometry.

Internal units are meters, seconds and degrees; velocities are given in km/h
at the trajectory boundary and converted here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import InvalidParameter

KMH_TO_MS = 1.0 / 3.6
SECTOR_SPACING_DEG = 120.0


@dataclass(frozen=True)
class SimulationRegion:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    guard_margin: float = 0.0

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise InvalidParameter(f"degenerate region {self}")

    @property
    def area_km2(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min) / 1e6

    def contains(self, xy) -> np.ndarray:
        xy = np.atleast_2d(xy)
        return ((xy[:, 0] >= self.x_min) & (xy[:, 0] <= self.x_max)
                & (xy[:, 1] >= self.y_min) & (xy[:, 1] <= self.y_max))


@dataclass(frozen=True)
class GbsSite:
    site_id: int
    position: tuple[float, float]
    height: float
    sector_boresights: tuple[float, float, float]

    def __post_init__(self):
        if self.height <= 0:
            raise InvalidParameter("GBS height must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Straight, constant-velocity flight at fixed height.

    ``velocity`` is in km/h, ``heading`` in degrees counter-clockwise from +x.
    """
    start: tuple[float, float] = (0.0, 0.0)
    heading: float = 0.0
    velocity: float = 30.0
    height: float = 120.0
    gap: float = 0.2
    duration: float = 100.0

    def __post_init__(self):
        if self.velocity < 0:
            raise InvalidParameter("velocity must be non-negative")
        if not 10.0 <= self.height <= 300.0:
            raise InvalidParameter(f"UAV height {self.height} m outside [10, 300]")
        if self.gap <= 0 or self.duration <= 0:
            raise InvalidParameter("gap and duration must be positive")

    @property
    def speed_ms(self) -> float:
        return self.velocity * KMH_TO_MS

    @property
    def step(self) -> float:
        """Distance flown between consecutive measurement instants (m)."""
        return self.speed_ms * self.gap

    @property
    def n_waypoints(self) -> int:
        # tolerate T/gap landing a hair below an integer
        return int(np.floor(self.duration / self.gap + 1e-9)) + 1

    def region(self, guard_margin: float) -> SimulationRegion:
        """Bounding box of the flight inflated by ``guard_margin`` on every side."""
        pos = self.positions()
        return SimulationRegion(
            pos[:, 0].min() - guard_margin, pos[:, 0].max() + guard_margin,
            pos[:, 1].min() - guard_margin, pos[:, 1].max() + guard_margin,
            guard_margin)

    def positions(self) -> np.ndarray:
        """(N, 3) array of waypoint positions."""
        k = np.arange(self.n_waypoints)
        h = np.deg2rad(self.heading)
        c, s = np.cos(h), np.sin(h)
        dist = k * self.step
        out = np.empty((k.size, 3))
        out[:, 0] = self.start[0] + dist * c
        out[:, 1] = self.start[1] + dist * s
        out[:, 2] = self.height
        return out


@dataclass(frozen=True)
class Waypoint:
    index: int
    time: float
    position: tuple[float, float, float]


@dataclass(frozen=True)
class LinkGeometry:
    d2d: float
    d3d: float
    theta: float
    phi: float


def waypoints(trajectory: Trajectory) -> list[Waypoint]:
    pos = trajectory.positions()
    return [Waypoint(i, i * trajectory.gap, tuple(p)) for i, p in enumerate(pos)]


def sample_ppp(intensity: float, region: SimulationRegion, rng: np.random.Generator,
               height: float = 35.0, rotation_rng: np.random.Generator | None = None) -> list[GbsSite]:
    """Homogeneous PPP of three-sector sites over ``region``.

    ``intensity`` is in sites per km^2. Each site gets boresights
    ``{a, a+120, a+240}`` with ``a ~ U[0, 120)``, drawn from ``rotation_rng``
    (defaults to ``rng``).
    """
    xy, alpha = sample_ppp_arrays(intensity, region, rng, rotation_rng)
    return [GbsSite(i, (float(x), float(y)), height,
                    tuple(float(a + k * SECTOR_SPACING_DEG) for k in range(3)))
            for i, ((x, y), a) in enumerate(zip(xy, alpha))]


def sample_ppp_arrays(intensity: float, region: SimulationRegion, rng: np.random.Generator,
                      rotation_rng: np.random.Generator | None = None):
    """Array form of :func:`sample_ppp`: (positions (n, 2), rotations (n,))."""
    if not intensity > 0:
        raise InvalidParameter(f"PPP intensity must be positive, got {intensity}")
    n = rng.poisson(intensity * region.area_km2)
    xy = np.column_stack([rng.uniform(region.x_min, region.x_max, n),
                          rng.uniform(region.y_min, region.y_max, n)])
    alpha = (rotation_rng or rng).uniform(0.0, SECTOR_SPACING_DEG, n)
    return xy, alpha


def wrap_deg(a):
    """Wrap angles to (-180, 180]."""
    w = np.mod(np.asarray(a, dtype=float) + 180.0, 360.0) - 180.0
    return np.where(w == -180.0, 180.0, w)


def link_angles(uav: np.ndarray, site_xy: np.ndarray, h_gbs: float):
    """Vectorised link geometry.

    ``uav`` is (N, 3), ``site_xy`` is (M, 2). Returns ``(d2d, d3d, theta, azimuth)``
    each shaped (M, N); theta is the zenith angle at the GBS (0 = straight up)
    and azimuth is the absolute bearing of the UAV seen from the site, before
    subtracting any sector boresight.
    """
    dx = uav[None, :, 0] - site_xy[:, 0, None]
    dy = uav[None, :, 1] - site_xy[:, 1, None]
    dz = uav[None, :, 2] - h_gbs
    d2d = np.hypot(dx, dy)
    d3d = np.hypot(d2d, dz)
    theta = np.degrees(np.arctan2(d2d, dz))
    azimuth = np.degrees(np.arctan2(dy, dx))
    return d2d, d3d, theta, azimuth


def link_geometry(waypoint: Waypoint, site: GbsSite, sector_index: int) -> LinkGeometry:
    d2d, d3d, theta, az = link_angles(np.asarray([waypoint.position], dtype=float),
                                      np.asarray([site.position], dtype=float), site.height)
    phi = wrap_deg(az[0, 0] - site.sector_boresights[sector_index])
    return LinkGeometry(float(d2d[0, 0]), float(d3d[0, 0]), float(theta[0, 0]), float(phi))
