"""3GPP sector antenna: element pattern, vertical array factor, sector gain.

All angles are in degrees. ``theta`` is the zenith angle (90 = horizon) and
``phi`` the azimuth relative to the sector boresight.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

AF_FLOOR_DB = -250.0


@dataclass(frozen=True)
class ElementPattern:
    phi_3db: float = 65.0
    theta_3db: float = 65.0
    a_m: float = 30.0
    sla_v: float = 30.0
    g_max: float = 8.0


@dataclass(frozen=True)
class ArrayConfig:
    """Uniform planar array with steering toward ``(tilt zenith, phi_d)``.

    ``tilt_mode`` picks how ``theta_d`` is turned into a steering zenith angle:
    ``"below_horizon"`` steers at ``90 + theta_d`` (a downtilt toward the
    ground); ``"zenith"`` plugs ``theta_d`` directly into the zenith angle.
    """
    m_v: int = 8
    m_h: int = 1
    spacing_v: float = 0.5
    spacing_h: float = 0.5
    theta_d: float = 6.0
    phi_d: float = 0.0
    rho: float = 1.0
    tilt_mode: str = "below_horizon"

    def __post_init__(self):
        if self.m_v < 1 or self.m_h < 1:
            raise ValueError("array needs at least one element")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.tilt_mode not in ("below_horizon", "zenith"):
            raise ValueError(f"unknown tilt_mode {self.tilt_mode!r}")

    @property
    def n(self) -> int:
        return self.m_v * self.m_h

    @property
    def steer_theta(self) -> float:
        return 90.0 + self.theta_d if self.tilt_mode == "below_horizon" else self.theta_d


def element_gain(theta, phi, pattern: ElementPattern = ElementPattern()):
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    a_h = -np.minimum(12.0 * (phi / pattern.phi_3db) ** 2, pattern.a_m)
    a_v = -np.minimum(12.0 * ((theta - 90.0) / pattern.theta_3db) ** 2, pattern.sla_v)
    return pattern.g_max - np.minimum(-(a_h + a_v), pattern.a_m)


def _dirichlet_sq(x, m: int):
    """|sum_{k<m} exp(j k x)|^2 = sin^2(m x / 2) / sin^2(x / 2)."""
    if m == 1:
        return np.ones_like(x)
    half = np.sin(0.5 * x)
    num = np.sin(0.5 * m * x)
    small = np.abs(half) < 1e-12
    safe = np.where(small, 1.0, half)
    return np.where(small, float(m * m), (num / safe) ** 2)


def array_gain_linear(theta, phi, cfg: ArrayConfig = ArrayConfig()):
    """``|a . w^T|^2`` for unit-norm amplitudes, via the separable closed form."""
    t = np.radians(np.asarray(theta, dtype=float))
    td = np.radians(cfg.steer_theta)
    psi_v = np.cos(t) - np.cos(td)
    g = _dirichlet_sq(2.0 * np.pi * cfg.spacing_v * psi_v, cfg.m_v)
    if cfg.m_h > 1:
        p = np.radians(np.asarray(phi, dtype=float))
        psi_h = np.sin(t) * np.sin(p) - np.sin(td) * np.sin(np.radians(cfg.phi_d))
        g = g * _dirichlet_sq(2.0 * np.pi * cfg.spacing_h * psi_h, cfg.m_h)
    else:
        g = np.broadcast_to(g, np.broadcast(t, np.asarray(phi)).shape)
    return g / cfg.n


def array_factor(theta, phi, cfg: ArrayConfig = ArrayConfig()):
    arg = 1.0 + cfg.rho * (array_gain_linear(theta, phi, cfg) - 1.0)
    with np.errstate(divide="ignore"):
        af = 10.0 * np.log10(np.maximum(arg, 0.0))
    return np.maximum(af, AF_FLOOR_DB)


def sector_gain(geom, pattern: ElementPattern = ElementPattern(), cfg: ArrayConfig = ArrayConfig()):
    """Element gain plus array factor for a :class:`~uav_hoc.geometry.LinkGeometry`."""
    return element_gain(geom.theta, geom.phi, pattern) + array_factor(geom.theta, geom.phi, cfg)
