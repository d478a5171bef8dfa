"""RMa-AV-LoS path loss, distance-correlated shadow fading and RSRP."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import InvalidParameter


@dataclass(frozen=True)
class ChannelParams:
    fc: float = 1.5        # GHz
    p_gbs: float = 46.0    # dBm
    beta: float = 0.82
    x_c: float = 100.0     # m

    def __post_init__(self):
        if self.fc <= 0 or self.x_c <= 0 or not 0.0 < self.beta < 1.0:
            raise InvalidParameter(f"invalid channel parameters {self}")


def _check_height(h_uav) -> None:
    h = np.asarray(h_uav)
    if np.any((h < 10.0) | (h > 300.0)):
        raise InvalidParameter(f"UAV height {h_uav} m outside the RMa-AV validity range [10, 300]")


def sigma_sf(h_uav: float) -> float:
    """LoS shadow-fading standard deviation in dB."""
    _check_height(h_uav)
    return 4.2 * np.exp(-0.0046 * h_uav)


def path_loss(d3d, h_uav: float, fc: float = 1.5):
    """LoS path loss in dB, without shadowing. ``d3d`` in m, ``fc`` in GHz."""
    _check_height(h_uav)
    d3d = np.asarray(d3d, dtype=float)
    if np.any(d3d <= 0):
        raise InvalidParameter("3D distance must be positive")
    slope = max(23.9 - 1.8 * np.log10(h_uav), 20.0)
    return slope * np.log10(d3d) + 20.0 * np.log10(40.0 * np.pi * fc / 3.0)


def rsrp(p_gbs, gain, pl, sf=0.0):
    return p_gbs + gain - (pl + sf)


def step_correlation(delta: float, beta: float = 0.82, x_c: float = 100.0) -> float:
    """Correlation between shadowing values ``delta`` meters apart."""
    return beta ** (abs(delta) / x_c)


class ShadowingProcess:
    """Streaming first-order autoregressive shadowing for one link.

    The marginal is stationary N(0, sigma^2); successive values taken
    ``delta`` meters apart have correlation ``beta ** (delta / x_c)``.
    """

    def __init__(self, sigma: float, delta: float, rng: np.random.Generator,
                 beta: float = 0.82, x_c: float = 100.0):
        self.sigma = sigma
        self.rho_step = step_correlation(delta, beta, x_c)
        self.rng = rng
        self.value = sigma * rng.standard_normal()

    def advance(self) -> float:
        innov = self.sigma * np.sqrt(1.0 - self.rho_step ** 2)
        self.value = self.rho_step * self.value + innov * self.rng.standard_normal()
        return self.value


def correlated_sf_matrix(n_links: int, n_points: int, delta: float, sigma: float,
                         rng: np.random.Generator, beta: float = 0.82, x_c: float = 100.0):
    """Independent AR(1) shadowing sequences, one row per link, shape (n_links, n_points)."""
    if n_points < 1:
        raise InvalidParameter("need at least one point")
    if delta < 0:
        raise InvalidParameter("waypoint spacing must be non-negative")
    rho = step_correlation(delta, beta, x_c)
    z = rng.standard_normal((n_links, n_points))
    out = np.empty_like(z)
    out[:, 0] = sigma * z[:, 0]
    if n_points > 1 and n_links:
        innov = sigma * np.sqrt(1.0 - rho ** 2)
        out[:, 1:], _ = lfilter([innov], [1.0, -rho], z[:, 1:], axis=1,
                                zi=rho * out[:, :1])
    return out


def correlated_sf_sequence(n_points: int, delta: float, sigma: float, beta: float = 0.82,
                           x_c: float = 100.0, rng: np.random.Generator | None = None):
    rng = np.random.default_rng() if rng is None else rng
    return correlated_sf_matrix(1, n_points, delta, sigma, rng, beta, x_c)[0]


def sf_covariance(n_points: int, delta: float, sigma: float, beta: float = 0.82,
                  x_c: float = 100.0) -> np.ndarray:
    """Target covariance ``sigma^2 beta^(|i-j| delta / x_c)``."""
    lag = np.abs(np.subtract.outer(np.arange(n_points), np.arange(n_points)))
    return sigma ** 2 * beta ** (lag * delta / x_c)


def ar1_covariance(n_points: int, delta: float, sigma: float, beta: float = 0.82,
                   x_c: float = 100.0) -> np.ndarray:
    """Covariance implied by the AR(1) recursion, built by propagating it step by step."""
    rho = step_correlation(delta, beta, x_c)
    # s = L z with L lower-triangular: row k holds the recursion's impulse response
    L = np.zeros((n_points, n_points))
    L[0, 0] = sigma
    innov = sigma * np.sqrt(1.0 - rho ** 2)
    for k in range(1, n_points):
        L[k, :k] = rho * L[k - 1, :k]
        L[k, k] = innov
    return L @ L.T
