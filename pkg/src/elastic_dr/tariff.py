"""Price environment: utility RTP signal, class price scaling and period partition."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import FixtureError

PERIODS = ("peak", "valley", "off_peak")


@dataclass(frozen=True)
class PriceSignal:
    """Hourly utility price (¢/kWh) and a flat nominal reference price."""

    utility_price: np.ndarray
    nominal_price: float

    def __post_init__(self):
        price = np.asarray(self.utility_price, dtype=float)
        if price.ndim != 1 or price.size == 0:
            raise ValueError("utility_price must be a non-empty vector")
        if not np.all(np.isfinite(price)) or np.any(price <= 0):
            raise ValueError("utility prices must be finite and strictly positive")
        if not np.isfinite(self.nominal_price) or self.nominal_price <= 0:
            raise ValueError("nominal_price must be strictly positive")
        price.setflags(write=False)
        object.__setattr__(self, "utility_price", price)
        object.__setattr__(self, "nominal_price", float(self.nominal_price))

    @property
    def horizon_hours(self) -> int:
        return int(self.utility_price.size)


@dataclass(frozen=True)
class ClassPrice:
    """Price vector offered to one customer class: utility price times (1 + kappa)."""

    kappa: float
    class_price: np.ndarray
    class_nominal: float

    @property
    def relative_deviation(self) -> np.ndarray:
        """(rho(t) - rho0) / rho0, the per-unit price deviation."""
        return (self.class_price - self.class_nominal) / self.class_nominal

    @property
    def horizon_hours(self) -> int:
        return int(self.class_price.size)


def build_class_price(signal: PriceSignal, kappa: float) -> ClassPrice:
    if not np.isfinite(kappa) or 1.0 + kappa <= 0:
        raise ValueError(f"kappa={kappa} gives non-positive class prices (need kappa > -1)")
    scale = 1.0 + kappa
    price = signal.utility_price * scale
    price.setflags(write=False)
    return ClassPrice(kappa=float(kappa), class_price=price, class_nominal=signal.nominal_price * scale)


@dataclass(frozen=True)
class PeriodPartition:
    """Disjoint peak / valley / off-peak hour sets covering ``[0, horizon)``."""

    peak_hours: frozenset
    valley_hours: frozenset
    off_peak_hours: frozenset
    horizon: int = 24

    def __post_init__(self):
        sets = (self.peak_hours, self.valley_hours, self.off_peak_hours)
        for s in sets:
            if any(h < 0 or h >= self.horizon for h in s):
                raise ValueError("period hour outside horizon")
        if sum(len(s) for s in sets) != self.horizon or set().union(*sets) != set(range(self.horizon)):
            raise ValueError("periods must be disjoint and cover every hour")

    def hours(self, period: str) -> frozenset:
        return {"peak": self.peak_hours, "valley": self.valley_hours, "off_peak": self.off_peak_hours}[period]

    def label(self, hour: int) -> str:
        for name in PERIODS:
            if hour in self.hours(name):
                return name
        raise IndexError(hour)

    def mask(self, period: str) -> np.ndarray:
        m = np.zeros(self.horizon, dtype=bool)
        m[sorted(self.hours(period))] = True
        return m

    @property
    def peak_mask(self) -> np.ndarray:
        return self.mask("peak")

    def to_config(self) -> dict:
        """Serialize as ``{period: [[start, stop), ...]}`` with maximal contiguous runs."""
        out = {"horizon": self.horizon}
        for name in PERIODS:
            runs = []
            for h in sorted(self.hours(name)):
                if runs and runs[-1][1] == h:
                    runs[-1][1] = h + 1
                else:
                    runs.append([h, h + 1])
            out[name] = runs
        return out


def classify_hours(config: Mapping, horizon: int | None = None) -> PeriodPartition:
    """Build a partition from ``{period: [[start, stop), ...]}`` intervals.

    Hours not named by any interval take the period of the preceding hour
    (cyclically, so an unnamed hour 0 inherits from hour ``horizon - 1``).
    """
    horizon = int(horizon if horizon is not None else config.get("horizon", 24))
    owner: dict[int, str] = {}
    clashes: list[str] = []
    for name in PERIODS:
        for interval in config.get(name, []) or []:
            start, stop = _interval(interval, name, horizon)
            for h in range(start, stop):
                if h in owner:
                    clashes.append(f"hour {h} ({owner[h]} vs {name})")
                else:
                    owner[h] = name
    unknown = set(config) - set(PERIODS) - {"horizon"}
    if unknown:
        raise ValueError(f"unknown period names: {sorted(unknown)}")
    if clashes:
        raise ValueError("overlapping period intervals: " + ", ".join(clashes))
    if not owner:
        raise ValueError("no periods defined")

    start = min(owner)
    for step in range(1, horizon):
        h = (start + step) % horizon
        if h not in owner:
            owner[h] = owner[(h - 1) % horizon]
    return PeriodPartition(
        peak_hours=frozenset(h for h, p in owner.items() if p == "peak"),
        valley_hours=frozenset(h for h, p in owner.items() if p == "valley"),
        off_peak_hours=frozenset(h for h, p in owner.items() if p == "off_peak"),
        horizon=horizon,
    )


def _interval(interval: Sequence, name: str, horizon: int) -> tuple[int, int]:
    try:
        start, stop = (int(v) for v in interval)
    except (TypeError, ValueError):
        raise ValueError(f"{name}: interval {interval!r} is not a [start, stop) pair") from None
    if not 0 <= start < stop <= horizon:
        raise ValueError(f"{name}: interval [{start}, {stop}) outside [0, {horizon})")
    return start, stop


def load_price_csv(path: str | Path, nominal_price: float) -> PriceSignal:
    """Read a ``hour,price_cents_per_kwh`` fixture."""
    path = Path(path)
    rows = read_price_rows(path)
    hours = [h for h, _, _ in rows]
    if hours != list(range(len(hours))):
        raise FixtureError(path, "hours must run 0..T-1 in order", line=rows[0][2] if rows else 1)
    return PriceSignal(np.array([p for _, p, _ in rows]), nominal_price)


def read_price_rows(path: Path) -> list[tuple[int, float, int]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["hour", "price_cents_per_kwh"]:
            raise FixtureError(path, "header must be 'hour,price_cents_per_kwh'", line=1)
        rows = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                hour, price = int(rec[0]), float(rec[1])
            except (ValueError, IndexError):
                raise FixtureError(path, f"unparseable row {rec!r}", line=lineno) from None
            rows.append((hour, price, lineno))
    if not rows:
        raise FixtureError(path, "no price rows", line=1)
    return rows


def load_period_config(source: str | Path | Mapping, horizon: int | None = None) -> PeriodPartition:
    if isinstance(source, Mapping):
        return classify_hours(source, horizon)
    with open(source, encoding="utf-8") as fh:
        return classify_hours(json.load(fh), horizon)
