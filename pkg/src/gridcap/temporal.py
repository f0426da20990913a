"""Planning periods, representative-day horizons, and weighted timepoints.

A period (one investment year) is resolved into horizons (representative days)
and timepoints (hour blocks within a horizon). Every timepoint carries an
annualization weight

    weight = 8760 / (n_timepoints * hours_in_tmp)

kept as an exact Fraction so that sum(weight * hours) == 8760 holds with no
rounding. The weight uses each timepoint's own duration, so mixed-duration
layouts still cover the year exactly.

The standard layout picks, for every month, the days with maximum, median, and
minimum total demand (3 representative days x 24 hours x 12 months). The
chronology mapping assigns every calendar hour to the representative timepoint
standing for its day, which is what the operational (8760 h) validation runs
on.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Sequence

import pandas as pd

from .errors import ValidationError
from .units import HOURS_PER_YEAR

DAY_KINDS = ("max", "median", "min")
# Rank used when grouping ranked calendar days onto horizons: lowest totals
# belong to the "min" day, highest to the "max" day.
_KIND_RANK = {"min": 0, "median": 1, "max": 2}


@dataclass(frozen=True)
class Period:
    """One investment period (a single target year at desk scale)."""

    label: str
    discount_rate: float = 0.08
    dollar_year: int = 2020

    def __post_init__(self):
        if self.discount_rate < 0:
            raise ValidationError(
                f"period {self.label!r}: discount rate must be >= 0, "
                f"got {self.discount_rate}")


@dataclass(frozen=True)
class Horizon:
    """A representative day: consecutive timepoints with a cyclic boundary."""

    id: str
    month: int
    day_kind: str
    day_index: int = 0  # calendar day the horizon stands for (ordering key)

    def __post_init__(self):
        if self.month < 1 or self.month > 12:
            raise ValidationError(f"horizon {self.id!r}: month {self.month} not in 1..12")
        if self.day_kind not in DAY_KINDS:
            raise ValidationError(
                f"horizon {self.id!r}: day_kind {self.day_kind!r} not in {DAY_KINDS}")


@dataclass(frozen=True)
class Timepoint:
    id: str
    horizon_id: str
    hour_of_day: int
    hours_in_tmp: float
    weight: Fraction

    @property
    def weight_f(self) -> float:
        return float(self.weight)

    @property
    def weighted_hours(self) -> Fraction:
        return self.weight * Fraction(self.hours_in_tmp)


def timepoint_weight(n_timepoints: int, hours_in_tmp) -> Fraction:
    """Exact annualization weight 8760 / (n_timepoints * hours_in_tmp)."""
    if n_timepoints <= 0:
        raise ValidationError(f"n_timepoints must be positive, got {n_timepoints}")
    hours = Fraction(hours_in_tmp)
    if hours <= 0:
        raise ValidationError(f"hours_in_tmp must be positive, got {hours_in_tmp}")
    return Fraction(HOURS_PER_YEAR) / (n_timepoints * hours)


class RepresentativeDays(NamedTuple):
    max_day: int
    median_day: int
    min_day: int


class ChronoHour(NamedTuple):
    month: int
    day: int
    hour: int
    timepoint_id: str


class TemporalStructure:
    """Validated container for one period's horizons and timepoints."""

    def __init__(self, period: Period, horizons: Sequence[Horizon],
                 timepoints: Sequence[Timepoint]):
        self.period = period
        self.horizons = list(horizons)
        self.timepoints = list(timepoints)
        self._validate()
        self.horizon_by_id = {h.id: h for h in self.horizons}
        self._tps_of_horizon: dict[str, list[Timepoint]] = {h.id: [] for h in self.horizons}
        for tp in self.timepoints:
            self._tps_of_horizon[tp.horizon_id].append(tp)
        for tps in self._tps_of_horizon.values():
            tps.sort(key=lambda tp: tp.hour_of_day)

    def _validate(self):
        if not self.timepoints:
            raise ValidationError("temporal structure has no timepoints")
        hids = [h.id for h in self.horizons]
        if len(set(hids)) != len(hids):
            raise ValidationError("duplicate horizon ids")
        tids = [tp.id for tp in self.timepoints]
        if len(set(tids)) != len(tids):
            raise ValidationError("duplicate timepoint ids")
        known = set(hids)
        for tp in self.timepoints:
            if tp.horizon_id not in known:
                raise ValidationError(
                    f"timepoint {tp.id!r} references unknown horizon {tp.horizon_id!r}")
            if tp.hours_in_tmp <= 0:
                raise ValidationError(f"timepoint {tp.id!r}: hours_in_tmp must be positive")
            if tp.weight <= 0:
                raise ValidationError(f"timepoint {tp.id!r}: weight must be positive")
        total = self.total_weighted_hours()
        if total != HOURS_PER_YEAR:
            raise ValidationError(
                f"weights do not cover the year: sum(weight*hours) = {total} != {HOURS_PER_YEAR}")

    def total_weighted_hours(self) -> Fraction:
        return sum((tp.weighted_hours for tp in self.timepoints), Fraction(0))

    def horizon_timepoints(self, horizon_id: str) -> list[Timepoint]:
        return self._tps_of_horizon[horizon_id]

    def ordered_horizons(self) -> list[Horizon]:
        """Horizons in calendar order (month, then represented day)."""
        return sorted(self.horizons,
                      key=lambda h: (h.month, h.day_index, _KIND_RANK[h.day_kind], h.id))

    def ordered_timepoints(self) -> list[Timepoint]:
        """All timepoints in period-linked chronological order."""
        out: list[Timepoint] = []
        for h in self.ordered_horizons():
            out.extend(self._tps_of_horizon[h.id])
        return out

    def month_timepoints(self, month: int) -> list[Timepoint]:
        out: list[Timepoint] = []
        for h in self.ordered_horizons():
            if h.month == month:
                out.extend(self._tps_of_horizon[h.id])
        return out

    @property
    def months(self) -> list[int]:
        return sorted({h.month for h in self.horizons})


def daily_totals_from_hourly(demand: pd.DataFrame) -> dict[int, dict[int, float]]:
    """Total system demand per calendar day, from hourly zone-level demand.

    `demand` needs columns zone, month, day, hour, demand_mw. Every (zone,
    month, day) must supply a complete 24-hour day.
    """
    required = {"zone", "month", "day", "hour", "demand_mw"}
    missing = required - set(demand.columns)
    if missing:
        raise ValidationError(f"demand table missing columns: {sorted(missing)}")
    counts = demand.groupby(["zone", "month", "day"])["hour"].nunique()
    bad = counts[counts != 24]
    if len(bad):
        where = ", ".join(f"zone {z!r} month {m} day {d} has {n} hours"
                          for (z, m, d), n in bad.head(5).items())
        raise ValidationError(f"incomplete days in demand series: {where}")
    sums = demand.groupby(["month", "day"])["demand_mw"].sum()
    out: dict[int, dict[int, float]] = {}
    for (month, day), total in sums.items():
        out.setdefault(int(month), {})[int(day)] = float(total)
    return out


def select_representative_days(
        daily_totals: Mapping[int, Mapping[int, float]]) -> dict[int, RepresentativeDays]:
    """Pick the max-, median-, and min-total-demand day of every month.

    Ties break to the lowest day index. The median of an even count is the
    lower-middle rank of the ascending ordering.
    """
    out: dict[int, RepresentativeDays] = {}
    for month in sorted(daily_totals):
        totals = daily_totals[month]
        if len(totals) < 3:
            raise ValidationError(
                f"month {month}: need at least 3 days to select representatives, "
                f"got {len(totals)}")
        items = sorted(totals.items())  # (day, total), day-ascending
        max_total = max(t for _, t in items)
        min_total = min(t for _, t in items)
        ranked = sorted(items, key=lambda dt: (dt[1], dt[0]))
        median_total = ranked[(len(ranked) + 1) // 2 - 1][1]
        max_day = next(d for d, t in items if t == max_total)
        min_day = next(d for d, t in items if t == min_total)
        median_day = next(d for d, t in items if t == median_total)
        out[month] = RepresentativeDays(max_day, median_day, min_day)
    return out


def build_standard_layout(demand: pd.DataFrame, period: Period,
                          hours_in_tmp: int = 1) -> tuple[TemporalStructure,
                                                          dict[int, RepresentativeDays]]:
    """Three representative days per month, hourly blocks of `hours_in_tmp`."""
    if 24 % hours_in_tmp != 0:
        raise ValidationError(f"hours_in_tmp must divide 24, got {hours_in_tmp}")
    totals = daily_totals_from_hourly(demand)
    selection = select_representative_days(totals)
    blocks_per_day = 24 // hours_in_tmp
    months = sorted(totals)
    n_timepoints = len(months) * len(DAY_KINDS) * blocks_per_day
    horizons: list[Horizon] = []
    timepoints: list[Timepoint] = []
    for month in months:
        rep = selection[month]
        for kind, day in zip(DAY_KINDS, rep):
            hid = f"m{month:02d}{kind}"
            horizons.append(Horizon(id=hid, month=month, day_kind=kind, day_index=day))
            for b in range(blocks_per_day):
                start = b * hours_in_tmp
                timepoints.append(Timepoint(
                    id=f"{hid}_h{start:02d}",
                    horizon_id=hid,
                    hour_of_day=start,
                    hours_in_tmp=hours_in_tmp,
                    weight=timepoint_weight(n_timepoints, hours_in_tmp),
                ))
    return TemporalStructure(period, horizons, timepoints), selection


def build_chronology(temporal: TemporalStructure,
                     daily_totals: Mapping[int, Mapping[int, float]]) -> list[ChronoHour]:
    """Map every calendar hour onto a representative timepoint.

    Within each month, days ranked by total demand are split into as many
    contiguous, near-equal groups as the month has horizons; the lowest-total
    group maps to the "min" horizon and so on upward. Hours map to the
    timepoint block covering their hour of day.
    """
    for month in sorted(daily_totals):
        if not any(h.month == month for h in temporal.horizons):
            raise ValidationError(f"no horizon covers calendar month {month}")
    for h in temporal.horizons:
        if h.month not in daily_totals:
            raise ValidationError(
                f"horizon {h.id!r} is for month {h.month} which the calendar lacks")

    out: list[ChronoHour] = []
    for month in sorted(daily_totals):
        horizons = sorted((h for h in temporal.horizons if h.month == month),
                          key=lambda h: (_KIND_RANK[h.day_kind], h.day_index, h.id))
        days_ranked = sorted(daily_totals[month].items(), key=lambda dt: (dt[1], dt[0]))
        n, k = len(days_ranked), len(horizons)
        base, rem = divmod(n, k)
        assignment: dict[int, Horizon] = {}
        pos = 0
        for i, h in enumerate(horizons):
            size = base + (1 if i < rem else 0)
            for day, _ in days_ranked[pos:pos + size]:
                assignment[day] = h
            pos += size
        block_of: dict[str, dict[int, str]] = {}
        for h in horizons:
            tps = temporal.horizon_timepoints(h.id)
            cover: dict[int, str] = {}
            for tp in tps:
                for hh in range(tp.hour_of_day, tp.hour_of_day + int(tp.hours_in_tmp)):
                    cover[hh] = tp.id
            if sorted(cover) != list(range(24)):
                raise ValidationError(
                    f"horizon {h.id!r} does not cover hours 0..23 exactly")
            block_of[h.id] = cover
        for day in sorted(daily_totals[month]):
            h = assignment[day]
            for hh in range(24):
                out.append(ChronoHour(month, day, hh, block_of[h.id][hh]))
    return out
