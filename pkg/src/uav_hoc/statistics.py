"""Handover-count PMFs, Poisson fits and the power-law rate model.

The rate model is ``lambda = a * lambda_gbs**b * d`` with ``lambda_gbs`` in
sites/km^2 and ``d = v*T`` in km (v in km/h, T in hours).
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from . import InvalidParameter, UnidentifiableFit

log = logging.getLogger(__name__)

REFERENCE_A = 0.2417
REFERENCE_B = 0.5278


@dataclass(frozen=True)
class EmpiricalPmf:
    support: np.ndarray
    probabilities: np.ndarray

    def __len__(self):
        return self.support.size


@dataclass(frozen=True)
class FitParams:
    a: float = REFERENCE_A
    b: float = REFERENCE_B
    residual: float = 0.0

    def rate(self, lambda_gbs, distance_km):
        """Poisson mean for density ``lambda_gbs`` and distance ``distance_km``."""
        return self.a * np.asarray(lambda_gbs, dtype=float) ** self.b * distance_km


def distance_km(v_kmh, t_seconds):
    return np.asarray(v_kmh, dtype=float) * np.asarray(t_seconds, dtype=float) / 3600.0


def empirical_pmf(samples) -> EmpiricalPmf:
    counts = np.asarray(samples, dtype=np.int64)
    if counts.size == 0:
        raise InvalidParameter("empirical PMF of an empty sample")
    if counts.min() < 0:
        raise InvalidParameter("handover counts must be non-negative")
    freq = np.bincount(counts)
    return EmpiricalPmf(np.arange(freq.size), freq / counts.size)


def poisson_pmf(lam, h):
    """Poisson probability mass, evaluated in log space."""
    lam = np.asarray(lam, dtype=float)
    h = np.asarray(h)
    if np.any(lam <= 0):
        raise InvalidParameter("Poisson rate must be positive")
    if np.any(h < 0):
        raise InvalidParameter("count must be non-negative")
    out = np.exp(-lam + h * np.log(lam) - gammaln(h + 1.0))
    return out if out.ndim else float(out)


def poisson_mle(samples) -> float:
    counts = np.asarray(samples, dtype=float)
    if counts.size == 0:
        raise InvalidParameter("Poisson MLE of an empty sample")
    return float(counts.mean())


def pmf_mse(empirical: EmpiricalPmf, lam: float) -> float:
    """Mean squared difference between the empirical PMF and Poisson(lam) on its support."""
    model = poisson_pmf(lam, empirical.support)
    return float(np.mean((empirical.probabilities - model) ** 2))


def power_fit(points: Iterable[Sequence[float]], refine: bool = False) -> FitParams:
    """Fit ``lambda_hat = a * lambda_gbs**b * d``.

    ``points`` holds ``(lambda_gbs, d_km, lambda_hat)`` triples. The fit is
    ordinary least squares of ``log(lambda_hat / d)`` on ``log(lambda_gbs)``.
    With ``refine`` one Gauss-Newton step on the linear-space squared error
    follows. ``residual`` is the sum of squared log residuals at the returned
    parameters.
    """
    pts = np.asarray(list(points), dtype=float).reshape(-1, 3)
    lam_gbs, d, lam_hat = pts.T
    if np.any(lam_gbs <= 0) or np.any(d <= 0) or np.any(lam_hat <= 0):
        raise InvalidParameter("power fit needs positive density, distance and rate")
    if np.unique(lam_gbs).size < 2:
        raise UnidentifiableFit("need at least two distinct GBS densities to fit the exponent")
    x = np.log(lam_gbs)
    y = np.log(lam_hat / d)
    A = np.column_stack([np.ones_like(x), x])
    (log_a, b), *_ = np.linalg.lstsq(A, y, rcond=None)
    a = float(np.exp(log_a))
    if refine:
        pred = a * lam_gbs ** b * d
        J = np.column_stack([pred / a, pred * x])
        delta, *_ = np.linalg.lstsq(J, lam_hat - pred, rcond=None)
        a, b = a + delta[0], b + delta[1]
        if a <= 0:
            raise InvalidParameter("Gauss-Newton step left the feasible region")
    resid = y - (np.log(a) + b * x)
    return FitParams(float(a), float(b), float(resid @ resid))


@dataclass(frozen=True)
class ScenarioSummary:
    v: float
    lambda_gbs: float
    t_window: float
    n: int
    lambda_hat: float
    variance: float
    mse: float


def summarize(datasets) -> list[ScenarioSummary]:
    out = []
    for ds in datasets:
        counts = ds.counts
        lam = poisson_mle(counts)
        mse = pmf_mse(empirical_pmf(counts), lam) if lam > 0 else float("nan")
        out.append(ScenarioSummary(ds.v, ds.lambda_gbs, ds.t_window, counts.size, lam,
                                   float(counts.var(ddof=1)) if counts.size > 1 else 0.0, mse))
    return out


def fit_datasets(datasets, refine: bool = False) -> tuple[FitParams, list[ScenarioSummary]]:
    """Per-scenario Poisson MLEs followed by the power-law fit.

    Scenarios with no handovers at all (or zero distance) carry no
    information in log space and are dropped with a warning.
    """
    summaries = summarize(datasets)
    points = []
    for s in summaries:
        d = float(distance_km(s.v, s.t_window))
        if s.lambda_hat <= 0 or d <= 0:
            log.warning("dropping scenario v=%g lambda=%g T=%g from the fit (zero rate)",
                        s.v, s.lambda_gbs, s.t_window)
            continue
        points.append((s.lambda_gbs, d, s.lambda_hat))
    if not points:
        raise UnidentifiableFit("no scenario with a positive handover rate")
    return power_fit(points, refine=refine), summaries


def write_pmf_csv(path, samples) -> None:
    pmf = empirical_pmf(samples)
    lam = poisson_mle(samples)
    model = poisson_pmf(lam, pmf.support) if lam > 0 else (pmf.support == 0).astype(float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["h", "empirical", "poisson"])
        for h, p, q in zip(pmf.support, pmf.probabilities, model):
            w.writerow([int(h), repr(float(p)), repr(float(q))])
