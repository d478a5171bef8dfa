"""Fused numba kernel for the per-trial RSRP matrix (vertical arrays only).

Output is cell-major, ``(3 * n_sites, n_waypoints)``.

Mirrors ``campaign._rsrp_numpy`` operation by operation; the test suite
checks the two agree.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _dirichlet_sq(x, m):
    half = math.sin(0.5 * x)
    if abs(half) < 1e-12:
        return float(m * m)
    r = math.sin(0.5 * m * x) / half
    return r * r


@njit(cache=True)
def rsrp_kernel(uav, xy, alpha, z, h_gbs, p_gbs, pl_slope, pl_const, phi_3db, theta_3db,
                a_m, sla_v, g_max, m_v, spacing_v, cos_steer, rho_af, sigma, rho_sf,
                prune_radius, out):
    n_wp = uav.shape[0]
    m = xy.shape[0]
    innov = sigma * math.sqrt(1.0 - rho_sf * rho_sf)
    rad2deg = 180.0 / math.pi
    sf = np.empty(3)
    for i in range(m):
        for k in range(n_wp):
            dx = uav[k, 0] - xy[i, 0]
            dy = uav[k, 1] - xy[i, 1]
            dz = uav[k, 2] - h_gbs
            d2 = math.hypot(dx, dy)
            d3 = math.hypot(d2, dz)
            for s in range(3):
                if k == 0:
                    sf[s] = sigma * z[3 * i + s, 0]
                else:
                    sf[s] = rho_sf * sf[s] + innov * z[3 * i + s, k]
            if d2 > prune_radius:
                for s in range(3):
                    out[3 * i + s, k] = -np.inf
                continue
            theta = math.atan2(d2, dz) * rad2deg
            az = math.atan2(dy, dx) * rad2deg
            common = p_gbs - (pl_slope * math.log10(d3) + pl_const)
            g = 1.0
            if m_v > 1:
                psi = dz / d3 - cos_steer
                g = _dirichlet_sq(2.0 * math.pi * spacing_v * psi, m_v)
            arg = 1.0 + rho_af * (g / m_v - 1.0)
            af = 10.0 * math.log10(arg) if arg > 0.0 else -np.inf
            common += max(af, -250.0)
            tv = (theta - 90.0) / theta_3db
            att_v = min(12.0 * tv * tv, sla_v)
            for s in range(3):
                phi = az - (alpha[i] + 120.0 * s)
                while phi <= -180.0:
                    phi += 360.0
                ph = phi / phi_3db
                att_h = min(12.0 * ph * ph, a_m)
                gain = g_max - min(att_h + att_v, a_m)
                out[3 * i + s, k] = common + gain - sf[s]
    return out
