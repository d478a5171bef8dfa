"""A3-event handover with hysteresis and time-to-trigger.

Semantics, evaluated only at measurement instants:

* attach to the strongest cell at t = 0;
* at every later instant take the strongest non-serving cell ``j``; if
  ``RSRP_j > RSRP_serving + m_hyst`` either arm the trigger toward ``j`` (new
  or changed target) or, when the trigger toward ``j`` has been armed for at
  least ``ttt``, hand over to ``j``;
* any instant where the A3 condition fails clears the trigger.

Ties go to the smallest ``(site_id, sector_index)``. A cell absent from a
measurement mapping counts as -inf dBm.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from . import InvalidParameter

_EPS = 1e-9


class CellId(NamedTuple):
    site_id: int
    sector_index: int


@dataclass(frozen=True)
class A3Config:
    m_hyst: float = 3.0
    ttt: float = 0.160
    gap: float = 0.200

    def __post_init__(self):
        if self.m_hyst <= 0 or self.ttt <= 0 or self.gap <= 0:
            raise InvalidParameter(f"A3 parameters must be positive: {self}")


@dataclass(frozen=True)
class HandoverState:
    serving: CellId
    pending_target: CellId | None = None
    trigger_time: float | None = None
    hoc: int = 0


class HandoverEvent(NamedTuple):
    time: float
    source: CellId
    target: CellId


def strongest_cell(measurements: Mapping[CellId, float]) -> CellId:
    if not measurements:
        raise InvalidParameter("no measurements to attach to")
    best = None
    for cell in sorted(measurements):
        if best is None or measurements[cell] > measurements[best]:
            best = cell
    return best


def step(state: HandoverState, t: float, measurements: Mapping[CellId, float],
         cfg: A3Config) -> tuple[HandoverState, HandoverEvent | None]:
    others = {c: r for c, r in measurements.items() if c != state.serving}
    serving_rsrp = measurements.get(state.serving, -np.inf)
    if not others:
        return replace(state, pending_target=None, trigger_time=None), None
    target = strongest_cell(others)
    if not others[target] > serving_rsrp + cfg.m_hyst:
        return replace(state, pending_target=None, trigger_time=None), None
    if state.pending_target != target:
        return replace(state, pending_target=target, trigger_time=t), None
    if t - state.trigger_time >= cfg.ttt - _EPS:
        event = HandoverEvent(t, state.serving, target)
        return HandoverState(target, None, None, state.hoc + 1), event
    return state, None


def count_handovers(rsrp_series: Sequence[tuple[float, Mapping[CellId, float]]],
                    cfg: A3Config = A3Config(), events: list | None = None) -> int:
    """Number of handovers executed over a time-ordered measurement series.

    Executed events are appended to ``events`` when a list is passed.
    """
    if not rsrp_series:
        raise InvalidParameter("empty measurement series")
    t0, first = rsrp_series[0]
    state = HandoverState(strongest_cell(first))
    for t, meas in rsrp_series[1:]:
        state, ev = step(state, t, meas, cfg)
        if ev is not None and events is not None:
            events.append(ev)
    return state.hoc


def count_handovers_array(rsrp: np.ndarray, cfg: A3Config = A3Config(),
                          events: list | None = None) -> int:
    """Same state machine over a dense ``(n_steps, n_cells)`` RSRP array.

    Column order is the tie-break order; instant ``k`` is at time ``k * gap``.
    ``events`` (if given) receives ``(step, from_col, to_col)`` tuples.
    """
    rsrp = np.asarray(rsrp, dtype=float)
    if rsrp.ndim != 2 or rsrp.shape[0] == 0 or rsrp.shape[1] == 0:
        raise InvalidParameter("need a non-empty (n_steps, n_cells) array")
    n_steps, n_cells = rsrp.shape
    # steps the trigger must stay armed; robust to float gap/ttt ratios
    wait = int(np.ceil(cfg.ttt / cfg.gap - _EPS))
    serving = int(np.argmax(rsrp[0]))
    pending, armed_at, hoc = -1, 0, 0
    if n_cells == 1:
        return 0
    row = np.empty(n_cells)
    for k in range(1, n_steps):
        row[:] = rsrp[k]
        s_val = row[serving]
        row[serving] = -np.inf
        target = int(np.argmax(row))
        if not row[target] > s_val + cfg.m_hyst:
            pending = -1
        elif pending != target:
            pending, armed_at = target, k
        elif k - armed_at >= wait:
            if events is not None:
                events.append((k, serving, target))
            serving, pending, hoc = target, -1, hoc + 1
    return hoc


def write_event_log(path, events: Sequence[HandoverEvent]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "from_site", "from_sector", "to_site", "to_sector"])
        for ev in events:
            w.writerow([f"{ev.time:.3f}", *ev.source, *ev.target])
