"""The 1-2-3 trend indicator: a state machine over the MinMax extrema stream.

Both directions run independently on the same stream. For an up trend
(down trends mirror every comparison):

* each identified minimum that lies above the minimum two extrema earlier
  forms a candidate P1-P2-P3 and an s123 situation;
* the candidate activates when the next identified maximum exceeds P2. That
  maximum is the first P2_new, so every trend starts with an s232;
* while active, a maximum above the current P2 becomes P2_new (s232) and a
  minimum at or above the current P3 becomes the new P3, emitting an s323
  when it is strictly higher;
* a minimum below the current P3 breaks the trend. Each trend breaks once.

Situations whose defining P-point is identified only after price already
passed the relevant P2 are not recorded. Outcomes still open when the
series ends are ``censored``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .market_data import CandleSeries
from .sar_minmax import DOWN, UP, ExtremumEvent

__all__ = [
    "PricePoint",
    "Trend",
    "SituationRecord",
    "run_trend_indicator",
    "count_movements",
    "trend_state_series",
    "write_trends_csv",
    "write_situations_csv",
    "ACTIVATED",
    "PASSED",
    "FAILED",
    "CENSORED",
]

ACTIVATED = "trend_activated"
PASSED = "p2_passed"
FAILED = "failed"
CENSORED = "censored"


@dataclass(frozen=True)
class PricePoint:
    at: int
    price: float
    identified_at: int

    @classmethod
    def of(cls, e: ExtremumEvent) -> "PricePoint":
        return cls(e.at, e.price, e.identified_at)


@dataclass
class SituationRecord:
    kind: str  # "s123", "s323" or "s232"
    direction: int
    points: dict[str, PricePoint]
    close_at_identification: float
    identified_at: int
    outcome: str = CENSORED
    resolved_at: int | None = None
    break_point: tuple[int, float] | None = None
    trend_id: int | None = None
    index: int = -1

    def __getattr__(self, name):
        points = self.__dict__.get("points", {})
        if name in points:
            return points[name]
        raise AttributeError(name)


@dataclass(eq=False)
class Trend:
    direction: int
    p1: PricePoint
    p2_history: list[PricePoint]
    p3_history: list[PricePoint]
    activated_at: int
    first_pass_bar: int
    broken_at: int | None = None
    break_point: PricePoint | None = None
    situations: list[SituationRecord] = field(default_factory=list, repr=False)

    @property
    def p2(self) -> PricePoint:
        return self.p2_history[-1]

    @property
    def p3(self) -> PricePoint:
        return self.p3_history[-1]

    @property
    def status(self) -> str:
        return "active" if self.broken_at is None else "broken"

    @property
    def movements(self) -> int:
        return count_movements(self)


def count_movements(trend: Trend) -> int:
    """Initial P1->P2 movement plus one per P3->P2_new movement (at least two)."""
    if trend.activated_at is None or len(trend.p2_history) < 2:
        raise ValueError("trend was never activated")
    return len(trend.p2_history)


class _Machine:
    def __init__(self, direction: int, series: CandleSeries):
        self.d = direction
        self.lo_kind, self.hi_kind = ("min", "max") if direction == UP else ("max", "min")
        # favourable extreme in signed coordinates: highs for up, negated lows for down
        self.fav = series.high if direction == UP else -series.low
        self.close = series.close
        self.m = len(series)
        self.trend: Trend | None = None
        self.candidate = None
        self.trends: list[Trend] = []
        self.records: list[SituationRecord] = []
        self.open_232: SituationRecord | None = None
        self.open_323: list[SituationRecord] = []

    def s(self, p) -> float:
        return self.d * p.price

    def passed_before(self, level: PricePoint, until: int) -> bool:
        """Whether price passed ``level`` on some bar in (level.at, until]."""
        window = self.fav[level.at + 1:until + 1]
        return window.size > 0 and bool(np.max(window) > self.d * level.price)

    def first_pass(self, level: PricePoint, after: int, fallback: int) -> int:
        window = self.fav[after + 1:]
        hits = np.flatnonzero(window > self.d * level.price)
        return after + 1 + int(hits[0]) if hits.size else fallback

    def record(self, kind, points, decision: PricePoint, trend_id=None) -> SituationRecord:
        rec = SituationRecord(kind, self.d, points, float(self.close[decision.identified_at]),
                              decision.identified_at, trend_id=trend_id)
        self.records.append(rec)
        return rec

    def resolve(self, rec, outcome, at):
        if rec is not None and rec.outcome == CENSORED and rec.resolved_at is None:
            rec.outcome, rec.resolved_at = outcome, at

    def emit_232(self, trend: Trend, tid: int, p2_new: PricePoint):
        p2, p3 = trend.p2, trend.p3
        rec = self.record("s232", {"p2": p2, "p3": p3, "p2_new": p2_new}, p2_new, tid)
        t2_break = self.first_pass(p2, p3.at, p2_new.at)
        rec.break_point = (t2_break, float(self.d * self.fav[t2_break]))
        self.resolve(self.open_232, PASSED, p2_new.identified_at)
        for r in self.open_323:
            self.resolve(r, PASSED, p2_new.identified_at)
        self.open_323 = []
        self.open_232 = rec
        trend.p2_history.append(p2_new)
        trend.situations.append(rec)

    def step(self, k: int, ext: list[ExtremumEvent]):
        e = ext[k]
        pe = PricePoint.of(e)
        tid = len(self.trends) - 1
        if e.kind == self.lo_kind:
            trend = self.trend
            if trend is not None:
                if self.s(pe) < self.s(trend.p3):
                    trend.broken_at, trend.break_point = e.identified_at, pe
                    self.resolve(self.open_232, FAILED, e.identified_at)
                    for r in self.open_323:
                        self.resolve(r, FAILED, e.identified_at)
                    self.open_232, self.open_323, self.trend = None, [], None
                else:
                    old = trend.p3
                    trend.p3_history.append(pe)
                    if self.s(pe) > self.s(old) and not self.passed_before(trend.p2, e.identified_at):
                        rec = self.record("s323", {"p3": old, "p2": trend.p2, "p3_new": pe}, pe, tid)
                        trend.situations.append(rec)
                        self.open_323.append(rec)
                    return
            self.candidate = None
            if k >= 2 and self.s(pe) > self.d * ext[k - 2].price:
                p1, p2 = PricePoint.of(ext[k - 2]), PricePoint.of(ext[k - 1])
                rec = None
                if not self.passed_before(p2, e.identified_at):
                    rec = self.record("s123", {"p1": p1, "p2": p2, "p3": pe}, pe)
                self.candidate = (p1, p2, pe, rec)
        else:
            trend = self.trend
            if trend is not None:
                if self.s(pe) > self.s(trend.p2):
                    self.emit_232(trend, tid, pe)
            elif self.candidate is not None:
                p1, p2, p3, rec = self.candidate
                self.candidate = None
                if self.s(pe) > self.s(p2):
                    trend = Trend(self.d, p1, [p2], [p3], e.identified_at,
                                  self.first_pass(p2, p3.at, pe.at))
                    self.trends.append(trend)
                    self.trend = trend
                    tid = len(self.trends) - 1
                    if rec is not None:
                        rec.trend_id = tid
                        trend.situations.append(rec)
                    self.resolve(rec, ACTIVATED, e.identified_at)
                    self.emit_232(trend, tid, pe)
                else:
                    self.resolve(rec, FAILED, e.identified_at)


def run_trend_indicator(extrema, series: CandleSeries) -> tuple[list[Trend], list[SituationRecord]]:
    """Run the up and down trend machines over confirmed extrema.

    Provisional extrema are dropped. Returns trends ordered by activation bar
    and situation records ordered by identification bar (up before down on
    the same bar), with ``index`` set to that order.
    """
    ext = [e for e in extrema if not e.provisional]
    for a, b in zip(ext, ext[1:]):
        if a.kind == b.kind:
            raise ValueError(f"extrema do not alternate at bars {a.at} and {b.at}")
        if b.identified_at < a.identified_at:
            raise ValueError("extrema not in identification order")
    if ext and ext[-1].identified_at >= len(series):
        raise ValueError("extremum identified beyond the end of the series")
    machines = [_Machine(UP, series), _Machine(DOWN, series)]
    for k in range(len(ext)):
        for mach in machines:
            mach.step(k, ext)
    trends = sorted((t for m in machines for t in m.trends),
                    key=lambda t: (t.activated_at, -t.direction))
    records = sorted((r for m in machines for r in m.records),
                     key=lambda r: (r.identified_at, -r.direction))
    for i, r in enumerate(records):
        r.index = i
    # trend ids become positions in the merged list
    position = {id(t): i for i, t in enumerate(trends)}
    remap = {(mach.d, j): position[id(t)] for mach in machines for j, t in enumerate(mach.trends)}
    for r in records:
        if r.trend_id is not None:
            r.trend_id = remap[(r.direction, r.trend_id)]
    return trends, records


def trend_state_series(trends, length: int) -> np.ndarray:
    """Per-bar trend label: +1 while an up trend is active, -1 for down, 0 otherwise.

    A trend counts as active from its activation bar up to (excluding) its
    break identification bar. Where both directions overlap, the most
    recently activated trend wins.
    """
    state = np.zeros(length, dtype=np.int8)
    for t in sorted(trends, key=lambda t: t.activated_at):
        end = length if t.broken_at is None else t.broken_at
        state[t.activated_at:end] = t.direction
    return state


def write_trends_csv(trends, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("direction", "start", "break", "movements", "p1_at", "p1_price", "first_pass_bar"))
        for t in trends:
            w.writerow(("up" if t.direction == UP else "down", t.activated_at,
                        "" if t.broken_at is None else t.broken_at, t.movements,
                        t.p1.at, repr(t.p1.price), t.first_pass_bar))


_POINTS = {"s123": ("p1", "p2", "p3"), "s323": ("p3", "p2", "p3_new"), "s232": ("p2", "p3", "p2_new")}


def write_situations_csv(records, kind: str, path) -> None:
    names = _POINTS[kind]
    head = ["index", "direction", "identified_at", "close_at_identification", "outcome", "resolved_at", "trend_id"]
    for n in names:
        head += [f"{n}_at", f"{n}_price", f"{n}_identified_at"]
    if kind == "s232":
        head += ["t2_break", "p2_break"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(head)
        for r in records:
            if r.kind != kind:
                continue
            row = [r.index, "up" if r.direction == UP else "down", r.identified_at,
                   repr(r.close_at_identification), r.outcome,
                   "" if r.resolved_at is None else r.resolved_at,
                   "" if r.trend_id is None else r.trend_id]
            for n in names:
                p = r.points[n]
                row += [p.at, repr(p.price), p.identified_at]
            if kind == "s232":
                row += [r.break_point[0], repr(r.break_point[1])]
            w.writerow(row)
