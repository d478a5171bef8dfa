"""Velocity estimation from handover counts.

Under the Poisson model ``H ~ Poisson(K v)`` with ``K = a * lambda_gbs**b * T``
(T in hours), ``v_hat = H / K`` is unbiased with variance ``v / K``, which is
the Cramer-Rao bound. Velocities are in km/h throughout.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import astuple, dataclass

import numpy as np

from . import InvalidParameter
from .statistics import FitParams, poisson_pmf


@dataclass(frozen=True)
class EstimatorReport:
    v_true: float
    lambda_gbs: float
    t_window: float
    n: int
    mean_vhat: float
    var_vhat: float
    crlb: float
    rmse: float

    @property
    def bias(self) -> float:
        return self.mean_vhat - self.v_true


def rate_coefficient(fit: FitParams, lambda_gbs: float, t_window: float) -> float:
    """Expected handovers per km/h of velocity, ``a * lambda_gbs**b * T_hours``."""
    if lambda_gbs <= 0 or t_window <= 0 or fit.a <= 0:
        raise InvalidParameter("rate coefficient needs positive a, density and window")
    return fit.a * lambda_gbs ** fit.b * (t_window / 3600.0)


def _check_k(k: float) -> None:
    if not k > 0:
        raise InvalidParameter(f"rate coefficient must be positive, got {k}")


def estimate_velocity(hoc, k: float):
    """``h / K``; a sequence of counts is reduced to its mean first."""
    _check_k(k)
    h = np.asarray(hoc, dtype=float)
    if np.any(h < 0):
        raise InvalidParameter("handover counts must be non-negative")
    return float(h.mean() / k) if h.ndim else float(h / k)


def fisher_information(v: float, k: float) -> float:
    _check_k(k)
    if not v > 0:
        raise InvalidParameter("velocity must be positive")
    return k / v


def crlb(v: float, k: float) -> float:
    return 1.0 / fisher_information(v, k)


def score(h, v: float, k: float):
    """d/dv of log Poisson(h; K v)."""
    return -k * (1.0 - np.asarray(h, dtype=float) / (k * v))


def regularity_check(v: float, k: float, truncation: int = 200) -> float:
    """Expected score, summed over counts 0..truncation. Zero up to tail mass."""
    lam = k * v
    h = np.arange(truncation + 1)
    p = poisson_pmf(lam, h)
    tail = 1.0 - p.sum()
    if tail > 1e-12:
        warnings.warn(f"truncation {truncation} leaves Poisson tail mass {tail:.3g}",
                      RuntimeWarning, stacklevel=2)
    return float(np.sum(p * score(h, v, k)))


def evaluate(dataset, fit: FitParams) -> EstimatorReport:
    counts = dataset.counts
    if counts.size < 2:
        raise InvalidParameter("evaluation needs at least two samples")
    k = rate_coefficient(fit, dataset.lambda_gbs, dataset.t_window)
    vhat = counts / k
    v = dataset.v
    return EstimatorReport(
        v_true=v, lambda_gbs=dataset.lambda_gbs, t_window=dataset.t_window, n=int(counts.size),
        mean_vhat=float(vhat.mean()), var_vhat=float(counts.var(ddof=1) / k ** 2),
        crlb=v / k if v > 0 else 0.0,
        rmse=float(np.sqrt(np.mean((vhat - v) ** 2))))


REPORT_HEADER = ["v_true", "lambda_gbs", "T_s", "n", "mean_vhat", "var_vhat", "crlb", "rmse"]


def write_reports(path, reports) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_HEADER)
        for r in reports:
            w.writerow([f"{x:g}" if isinstance(x, int) else repr(float(x)) for x in astuple(r)])
