"""INI campaign configs.

A config has a ``[grid]`` section listing velocities (km/h), densities
(sites/km^2) and window lengths (s); every other section overrides scenario
defaults. A run manifest (JSON with a ``config`` object) is accepted in
place of an INI file, so a run can be replayed from its own manifest.
"""
from __future__ import annotations

import configparser
import dataclasses
import itertools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .antenna import ArrayConfig, ElementPattern
from .campaign import ScenarioConfig
from .channel import ChannelParams
from .handover import A3Config


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    items = [t for t in re.split(r"[,\s]+", text.strip()) if t]
    if not items:
        raise ValueError("empty list")
    return [float(t) for t in items]


# section -> key -> caster
_SCHEMA = {
    "campaign": {"master_seed": int, "n_trials": int, "workers": int},
    "grid": {"velocities": _floats, "densities": _floats, "t_windows": _floats},
    "scenario": {"gap": float, "h_uav": float, "h_gbs": float,
                 "guard_margin": float, "prune_radius": float},
    "antenna": {"phi_3db": float, "theta_3db": float, "a_m": float, "sla_v": float,
                "g_max": float, "m_v": int, "m_h": int, "spacing_v": float, "spacing_h": float,
                "theta_d": float, "phi_d": float, "rho": float, "tilt_mode": str},
    "channel": {f.name: float for f in dataclasses.fields(ChannelParams)},
    "handover": {"m_hyst": float, "ttt": float},
}

DEFAULT_GRID = {"velocities": [3.0, 30.0, 60.0, 120.0, 160.0],
                "densities": [2.0, 4.0, 6.0, 8.0, 10.0],
                "t_windows": [100.0]}


@dataclass
class RunConfig:
    grid: list[ScenarioConfig]
    workers: int = 1
    sections: dict = field(default_factory=dict)


def _line_of(text: str, section: str, key: str | None) -> int:
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"\[(.+)\]$", s)
        if m:
            current = m.group(1).strip()
            if key is None and current == section:
                return n
        elif current == section and key and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return n
    return 0


def parse_sections(sections: dict, source: str = "<config>", text: str = "") -> RunConfig:
    typed: dict = {}
    for sec, values in sections.items():
        if sec not in _SCHEMA:
            raise ConfigError(f"{source}:{_line_of(text, sec, None)}: unknown section [{sec}]")
        for key, raw in values.items():
            where = f"{source}:{_line_of(text, sec, key)}"
            if key not in _SCHEMA[sec]:
                raise ConfigError(f"{where}: unknown key '{key}' in [{sec}]")
            if isinstance(raw, list):
                raw = ", ".join(str(x) for x in raw)
            try:
                typed.setdefault(sec, {})[key] = _SCHEMA[sec][key](str(raw))
            except ValueError as exc:
                raise ConfigError(f"{where}: bad value for {key} = {raw!r} ({exc})") from None
    try:
        return _build(typed)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def _build(typed: dict) -> RunConfig:
    camp = typed.get("campaign", {})
    grid = {**DEFAULT_GRID, **typed.get("grid", {})}
    scen = dict(typed.get("scenario", {}))
    ant = typed.get("antenna", {})
    pattern_keys = {f.name for f in dataclasses.fields(ElementPattern)}
    pattern = ElementPattern(**{k: v for k, v in ant.items() if k in pattern_keys})
    array = ArrayConfig(**{k: v for k, v in ant.items() if k not in pattern_keys})
    channel = ChannelParams(**typed.get("channel", {}))
    gap = scen.get("gap", 0.2)
    a3 = A3Config(gap=gap, **typed.get("handover", {}))
    common = dict(scen, pattern=pattern, array=array, channel=channel, a3=a3,
                  n_trials=camp.get("n_trials", 1000),
                  master_seed=camp.get("master_seed", ScenarioConfig.master_seed))
    scenarios = [ScenarioConfig(v=v, lambda_gbs=lam, t_window=t, **common)
                 for t, lam, v in itertools.product(grid["t_windows"], grid["densities"],
                                                    grid["velocities"])]
    snapshot = {
        "campaign": {"master_seed": common["master_seed"], "n_trials": common["n_trials"],
                     "workers": camp.get("workers", 1)},
        "grid": grid,
        "scenario": {k: getattr(scenarios[0], k)
                     for k in ("gap", "h_uav", "h_gbs", "guard_margin", "prune_radius")},
        "antenna": {**dataclasses.asdict(pattern), **dataclasses.asdict(array)},
        "channel": dataclasses.asdict(channel),
        "handover": {"m_hyst": a3.m_hyst, "ttt": a3.ttt},
    }
    return RunConfig(scenarios, camp.get("workers", 1), snapshot)


def load_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        return parse_sections(doc.get("config", doc), str(path))
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        lineno = getattr(exc, "lineno", None)
        if lineno is None and getattr(exc, "errors", None):
            lineno = exc.errors[0][0]
        raise ConfigError(f"{path}:{lineno or 0}: {exc.message.splitlines()[0]}") from None
    return parse_sections({s: dict(parser[s]) for s in parser.sections()}, str(path), text)
