"""Handover-count based velocity estimation for cellular-connected UAVs.

Monte Carlo handover simulator (PPP ground base stations, 3GPP sector
antennas, RMa-AV-LoS path loss, correlated shadowing, A3/TTT handover) plus
the Poisson handover-count model, power-law rate fit, CRLB and the h/K
velocity estimator.
"""

__version__ = "0.1.0"


class InvalidParameter(ValueError):
    """A parameter violates a documented precondition."""


class UnidentifiableFit(ValueError):
    """The power-law fit has too few distinct densities to identify the exponent."""
