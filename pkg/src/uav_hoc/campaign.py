"""Monte Carlo handover-count campaigns.

A trial draws a fresh site layout, sector rotations and per-link shadowing,
flies the UAV along +x from the origin, and counts handovers. Every random
stream of trial ``i`` is derived from ``(master_seed, i, stream_id)`` so a
campaign's output does not depend on execution order or worker count.
"""
from __future__ import annotations

import csv
import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import InvalidParameter, __version__
from .antenna import ArrayConfig, ElementPattern, array_factor
from .channel import ChannelParams, correlated_sf_matrix, path_loss, sigma_sf, step_correlation
from .geometry import SECTOR_SPACING_DEG, Trajectory, link_angles, sample_ppp_arrays, wrap_deg
from .handover import A3Config, count_handovers_array

try:
    from . import _kernels
except ImportError:  # numba missing: numpy path only
    _kernels = None

log = logging.getLogger(__name__)

STREAM_PPP, STREAM_ROTATION, STREAM_SHADOWING = 0, 1, 2
MIN_LOS_HEIGHT = 40.0


@dataclass(frozen=True)
class ScenarioConfig:
    v: float = 30.0                # km/h
    lambda_gbs: float = 6.0        # sites per km^2
    t_window: float = 100.0        # s
    gap: float = 0.2               # s
    h_uav: float = 120.0           # m
    h_gbs: float = 35.0            # m
    pattern: ElementPattern = field(default_factory=ElementPattern)
    array: ArrayConfig = field(default_factory=ArrayConfig)
    channel: ChannelParams = field(default_factory=ChannelParams)
    a3: A3Config = field(default_factory=A3Config)
    n_trials: int = 1000
    master_seed: int = 20200701
    guard_margin: float = 3000.0   # m
    prune_radius: float = 3000.0   # m

    def __post_init__(self):
        if self.n_trials < 1:
            raise InvalidParameter("n_trials must be at least 1")
        if self.lambda_gbs <= 0:
            raise InvalidParameter("GBS density must be positive")
        if not MIN_LOS_HEIGHT <= self.h_uav <= 300.0:
            raise InvalidParameter(
                f"h_uav = {self.h_uav} m: LoS-only channel needs 40 <= h_uav <= 300")
        if self.h_gbs <= 0 or self.h_gbs >= self.h_uav:
            raise InvalidParameter("need 0 < h_gbs < h_uav")
        if abs(self.a3.gap - self.gap) > 1e-12:
            raise InvalidParameter("handover gap must equal the measurement gap")
        if self.guard_margin < 0 or self.prune_radius <= 0:
            raise InvalidParameter("guard_margin must be >= 0 and prune_radius > 0")
        if not 0 <= self.master_seed < 2 ** 64:
            raise InvalidParameter("master_seed must be a 64-bit unsigned integer")

    @property
    def key(self) -> tuple[float, float, float]:
        return (self.v, self.lambda_gbs, self.t_window)

    def trajectory(self) -> Trajectory:
        return Trajectory(velocity=self.v, height=self.h_uav, gap=self.gap,
                          duration=self.t_window)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HocSample:
    trial_index: int
    hoc: int
    seed: int


@dataclass
class HocDataset:
    key: tuple[float, float, float]
    samples: list[HocSample]

    @property
    def v(self) -> float:
        return self.key[0]

    @property
    def lambda_gbs(self) -> float:
        return self.key[1]

    @property
    def t_window(self) -> float:
        return self.key[2]

    @property
    def counts(self) -> np.ndarray:
        return np.array([s.hoc for s in self.samples], dtype=np.int64)


def trial_seed(master_seed: int, trial_index: int) -> int:
    ss = np.random.SeedSequence([master_seed, trial_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def trial_rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))


def _segment_distance(xy: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return np.hypot(*(xy - a).T)
    u = np.clip((xy - a) @ ab / denom, 0.0, 1.0)
    return np.hypot(*(xy - (a + u[:, None] * ab)).T)


def simulate_rsrp(cfg: ScenarioConfig, seed: int, accelerated: bool = True):
    """RSRP of every candidate cell at every waypoint for one trial.

    Returns ``(rsrp, site_ids)`` where ``rsrp`` is ``(n_waypoints, 3 * n_sites)``
    in canonical (site_id, sector) column order, with -inf for cells beyond
    the pruning radius at that instant. ``accelerated`` selects the fused
    numba kernel when the array is a single column; both paths consume the
    same random draws.
    """
    traj = cfg.trajectory()
    uav = traj.positions()
    region = traj.region(cfg.guard_margin)
    xy, alpha = sample_ppp_arrays(cfg.lambda_gbs, region, trial_rng(seed, STREAM_PPP),
                                  trial_rng(seed, STREAM_ROTATION))
    n_wp = uav.shape[0]
    keep = _segment_distance(xy, uav[0, :2], uav[-1, :2]) <= cfg.prune_radius
    site_ids = np.flatnonzero(keep)
    xy, alpha = xy[keep], alpha[keep]
    m = site_ids.size
    sf_rng = trial_rng(seed, STREAM_SHADOWING)
    if m == 0:
        return np.empty((n_wp, 0)), site_ids

    sigma = sigma_sf(cfg.h_uav)
    if accelerated and cfg.array.m_h == 1 and _kernels is not None:
        z = sf_rng.standard_normal((3 * m, n_wp))
        return _rsrp_fused(cfg, uav, xy, alpha, z, traj.step, sigma), site_ids
    sf = correlated_sf_matrix(3 * m, n_wp, traj.step, sigma, sf_rng,
                              cfg.channel.beta, cfg.channel.x_c)
    return _rsrp_numpy(cfg, uav, xy, alpha, sf), site_ids


def _rsrp_numpy(cfg: ScenarioConfig, uav, xy, alpha, sf):
    d2d, d3d, theta, azimuth = link_angles(uav, xy, cfg.h_gbs)
    pat, arr = cfg.pattern, cfg.array
    common = cfg.channel.p_gbs - path_loss(d3d, cfg.h_uav, cfg.channel.fc)
    att_v = np.minimum(12.0 * ((theta - 90.0) / pat.theta_3db) ** 2, pat.sla_v)
    if arr.m_h == 1:
        common = common + array_factor(theta, 0.0, arr)
    common[d2d > cfg.prune_radius] = -np.inf
    out = np.empty((uav.shape[0], 3 * xy.shape[0]))
    for s in range(3):
        phi = wrap_deg(azimuth - (alpha + s * SECTOR_SPACING_DEG)[:, None])
        att_h = np.minimum(12.0 * (phi / pat.phi_3db) ** 2, pat.a_m)
        gain = pat.g_max - np.minimum(att_h + att_v, pat.a_m)
        if arr.m_h > 1:
            gain = gain + array_factor(theta, phi, arr)
        out[:, s::3] = (common + gain - sf[s::3]).T
    return out


def _rsrp_fused(cfg: ScenarioConfig, uav, xy, alpha, z, step, sigma):
    pat, arr, ch = cfg.pattern, cfg.array, cfg.channel
    out = np.empty((3 * xy.shape[0], uav.shape[0]))
    pl_slope = max(23.9 - 1.8 * np.log10(cfg.h_uav), 20.0)
    pl_const = 20.0 * np.log10(40.0 * np.pi * ch.fc / 3.0)
    _kernels.rsrp_kernel(
        uav, np.ascontiguousarray(xy), alpha, z, cfg.h_gbs, ch.p_gbs, pl_slope, pl_const,
        pat.phi_3db, pat.theta_3db, pat.a_m, pat.sla_v, pat.g_max, arr.m_v, arr.spacing_v,
        np.cos(np.radians(arr.steer_theta)), arr.rho, sigma,
        step_correlation(step, ch.beta, ch.x_c), cfg.prune_radius, out)
    return np.ascontiguousarray(out.T)


def run_trial(cfg: ScenarioConfig, trial_index: int) -> HocSample:
    seed = trial_seed(cfg.master_seed, trial_index)
    rsrp, _ = simulate_rsrp(cfg, seed)
    hoc = count_handovers_array(rsrp, cfg.a3) if rsrp.shape[1] else 0
    return HocSample(trial_index, hoc, seed)


def _run_chunk(args) -> list[HocSample]:
    cfg, start, stop = args
    return [run_trial(cfg, i) for i in range(start, stop)]


def _chunks(grid: Sequence[ScenarioConfig], size: int):
    for g, cfg in enumerate(grid):
        for start in range(0, cfg.n_trials, size):
            yield g, (cfg, start, min(start + size, cfg.n_trials))


def run_campaign(grid: Sequence[ScenarioConfig], workers: int = 1,
                 chunk_size: int = 50, progress=None) -> list[HocDataset]:
    """Run every scenario of ``grid``; one dataset per scenario, in grid order.

    ``workers > 1`` fans trial chunks out to a process pool. ``progress`` is
    an optional callable invoked with ``(done_trials, total_trials)``.
    """
    if not grid:
        raise InvalidParameter("empty scenario grid")
    jobs = list(_chunks(grid, chunk_size))
    results: list[list[HocSample]] = [[] for _ in grid]
    total, done = sum(c.n_trials for c in grid), 0

    def collect(g, samples):
        nonlocal done
        results[g].extend(samples)
        done += len(samples)
        if progress:
            progress(done, total)

    if workers <= 1:
        for g, job in jobs:
            collect(g, _run_chunk(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for (g, _), samples in zip(jobs, pool.map(_run_chunk, [j for _, j in jobs])):
                collect(g, samples)
    return [HocDataset(cfg.key, sorted(res, key=lambda s: s.trial_index))
            for cfg, res in zip(grid, results)]


def dataset_filename(key: tuple[float, float, float]) -> str:
    v, lam, t = key
    return f"hoc_v={v:g}_lambda={lam:g}_T={t:g}.csv"


_NAME_RE = re.compile(r"hoc_v=([^_]+)_lambda=([^_]+)_T=(.+)\.csv$")


def write_dataset(directory, dataset: HocDataset) -> Path:
    path = Path(directory) / dataset_filename(dataset.key)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "seed", "hoc"])
        for s in dataset.samples:
            w.writerow([s.trial_index, s.seed, s.hoc])
    return path


def read_dataset(path) -> HocDataset:
    path = Path(path)
    match = _NAME_RE.search(path.name)
    if not match:
        raise InvalidParameter(f"cannot parse scenario key from file name {path.name}")
    key = tuple(float(x) for x in match.groups())
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    samples = [HocSample(int(r["trial"]), int(r["hoc"]), int(r["seed"])) for r in rows]
    return HocDataset(key, samples)


def read_datasets(directory) -> list[HocDataset]:
    return [read_dataset(p) for p in sorted(Path(directory).glob("hoc_*.csv"))]


def write_manifest(path, config: dict, outputs: Iterable, extra: dict | None = None) -> None:
    import datetime as _dt

    manifest = {
        "tool": "uav_hoc",
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": config,
        "outputs": [str(p) for p in outputs],
    }
    if extra:
        manifest.update(extra)
    Path(path).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
