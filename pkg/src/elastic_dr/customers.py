"""Customer classes, truncated-normal load-factor sampling and population synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .errors import InfeasiblePopulation, SamplingError

MAX_REJECTION_ATTEMPTS = 10_000


@dataclass(frozen=True)
class CustomerClass:
    name: str
    kappa: float
    self_elasticity: float
    demand_range: tuple
    lf_pattern: np.ndarray
    cov_pattern: np.ndarray

    def __post_init__(self):
        lf = np.asarray(self.lf_pattern, dtype=float)
        cov = np.asarray(self.cov_pattern, dtype=float)
        if lf.ndim != 1 or lf.shape != cov.shape:
            raise ValueError(f"{self.name}: lf_pattern and cov_pattern must be vectors of equal length")
        if self.self_elasticity > 0:
            raise ValueError(f"{self.name}: self_elasticity must be <= 0")
        if 1.0 + self.kappa <= 0:
            raise ValueError(f"{self.name}: kappa must exceed -1")
        if np.any(lf <= 0) or np.any(lf > 1):
            raise ValueError(f"{self.name}: load factors must lie in (0, 1]")
        # COV >= 1 would allow a zero or negative lower bound.
        if np.any(cov < 0) or np.any(cov >= 1):
            raise ValueError(f"{self.name}: COV must lie in [0, 1)")
        lo, hi = (float(v) for v in self.demand_range)
        if not 0 < lo <= hi:
            raise ValueError(f"{self.name}: demand_range must satisfy 0 < min <= max")
        lf.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "lf_pattern", lf)
        object.__setattr__(self, "cov_pattern", cov)
        object.__setattr__(self, "demand_range", (lo, hi))

    @property
    def horizon(self) -> int:
        return int(self.lf_pattern.size)


@dataclass(frozen=True)
class LfBounds:
    lower: float
    upper: float
    mean: float
    sd: float


@dataclass(frozen=True)
class Customer:
    id: int
    class_name: str
    bus: int
    rated_demand: float
    baseline_profile: np.ndarray
    sampled_lf: np.ndarray


@dataclass(frozen=True)
class ClassAllocation:
    """Where a class sits on the feeder: bus -> allocated kW, plus a customer count.

    ``bus_counts`` pins the number of customers per bus; when omitted the
    class count is spread over buses in proportion to bus demand.
    """

    class_name: str
    customer_count: int
    bus_demand: Mapping[int, float]
    bus_counts: Mapping[int, int] | None = field(default=None)


def lf_bounds(cls: CustomerClass, hour: int) -> LfBounds:
    mean = float(cls.lf_pattern[hour])
    sd = float(cls.cov_pattern[hour]) * mean
    return LfBounds(lower=mean - sd, upper=mean + sd, mean=mean, sd=sd)


def _hourly_bounds(cls: CustomerClass):
    mean = np.ascontiguousarray(cls.lf_pattern, dtype=float)
    sd = np.ascontiguousarray(cls.cov_pattern * cls.lf_pattern, dtype=float)
    return mean, sd, mean - sd, mean + sd


def sample_truncated(mean, sd, lower, upper, rng: np.random.Generator) -> np.ndarray:
    """One rejection-sampled draw per element, consuming ``rng`` in element order."""
    mean, sd, lower, upper = (np.ascontiguousarray(np.broadcast_to(a, np.shape(mean)), dtype=float)
                              for a in (mean, sd, lower, upper))
    out = np.empty(mean.shape[0])
    failed = kernels.truncnorm_fill(rng.bit_generator, mean, sd, lower, upper, out,
                                    MAX_REJECTION_ATTEMPTS)
    if failed >= 0:
        raise SamplingError(
            f"no draw within [{lower[failed]:.6g}, {upper[failed]:.6g}] after "
            f"{MAX_REJECTION_ATTEMPTS} attempts (element {failed})")
    return out


def sample_load_factor(bounds: LfBounds, rng: np.random.Generator) -> float:
    return float(sample_truncated(np.array([bounds.mean]), bounds.sd, bounds.lower, bounds.upper, rng)[0])


def synthesize_customer(cls: CustomerClass, bus: int, rated_demand: float,
                        rng: np.random.Generator, customer_id: int = 0) -> Customer:
    lo, hi = cls.demand_range
    if not lo <= rated_demand <= hi:
        raise ValueError(f"rated demand {rated_demand} kW outside {cls.name} range [{lo}, {hi}]")
    lf = sample_truncated(*_hourly_bounds(cls), rng)
    profile = lf * rated_demand
    lf.setflags(write=False)
    profile.setflags(write=False)
    return Customer(id=customer_id, class_name=cls.name, bus=int(bus), rated_demand=float(rated_demand),
                    baseline_profile=profile, sampled_lf=lf)


def bus_customer_counts(alloc: ClassAllocation, demand_range: Sequence[float]) -> dict[int, int]:
    lo, hi = demand_range
    buses = sorted(alloc.bus_demand)
    if alloc.bus_counts is not None:
        counts = {b: int(alloc.bus_counts[b]) for b in buses}
        for b in buses:
            _check_bus(alloc.class_name, b, alloc.bus_demand[b], counts[b], lo, hi)
        if sum(counts.values()) != alloc.customer_count:
            raise InfeasiblePopulation(
                f"class {alloc.class_name}: bus counts sum to {sum(counts.values())}, "
                f"expected {alloc.customer_count}")
        return counts

    n_min = {b: max(1, math.ceil(alloc.bus_demand[b] / hi - 1e-9)) for b in buses}
    n_max = {b: math.floor(alloc.bus_demand[b] / lo + 1e-9) for b in buses}
    for b in buses:
        if n_min[b] > n_max[b]:
            _check_bus(alloc.class_name, b, alloc.bus_demand[b], n_min[b], lo, hi)
    total = alloc.customer_count
    if sum(n_min.values()) > total or sum(n_max.values()) < total:
        worst = max(buses, key=lambda b: n_min[b] if sum(n_min.values()) > total else -n_max[b])
        raise InfeasiblePopulation(
            f"class {alloc.class_name}: {total} customers with ratings in [{lo}, {hi}] kW cannot cover "
            f"bus demands {dict(alloc.bus_demand)} (bus {worst} is binding; feasible count range "
            f"{sum(n_min.values())}..{sum(n_max.values())})")

    demand_total = sum(alloc.bus_demand.values())
    share = {b: total * alloc.bus_demand[b] / demand_total for b in buses}
    counts = {b: min(max(math.floor(share[b]), n_min[b]), n_max[b]) for b in buses}
    while sum(counts.values()) < total:
        b = max((b for b in buses if counts[b] < n_max[b]), key=lambda b: (share[b] - counts[b], -b))
        counts[b] += 1
    while sum(counts.values()) > total:
        b = min((b for b in buses if counts[b] > n_min[b]), key=lambda b: (share[b] - counts[b], b))
        counts[b] -= 1
    return counts


def _check_bus(name, bus, demand, count, lo, hi):
    if count < 1 or count * lo > demand or count * hi < demand:
        raise InfeasiblePopulation(
            f"class {name}, bus {bus}: {count} customers rated in [{lo}, {hi}] kW "
            f"cannot sum to {demand} kW")


def split_bus_demand(target: float, count: int, demand_range: Sequence[float],
                     rng: np.random.Generator, tol: float = 1e-3) -> np.ndarray:
    """Rated demands in ``demand_range`` summing to ``target``.

    Uniform draws are rescaled toward the target; entries pushed past a
    bound are clamped and frozen, and the free entries are rescaled again.
    """
    lo, hi = demand_range
    if count < 1 or count * lo > target * (1 + 1e-12) or count * hi < target * (1 - 1e-12):
        raise InfeasiblePopulation(f"{count} customers in [{lo}, {hi}] kW cannot sum to {target} kW")
    rated = rng.uniform(lo, hi, size=count)
    fixed = np.zeros(count, dtype=bool)
    for _ in range(count + 1):
        free = ~fixed
        if not free.any():
            break
        remaining = target - rated[fixed].sum()
        rated[free] *= remaining / rated[free].sum()
        over, under = free & (rated > hi), free & (rated < lo)
        if not (over.any() or under.any()):
            break
        rated[over], rated[under] = hi, lo
        fixed |= over | under
    free_idx = np.flatnonzero(~fixed)
    if free_idx.size:
        # absorb rounding residue so the bus total is hit to machine precision
        j = free_idx[-1]
        rated[j] = min(max(rated[j] + target - rated.sum(), lo), hi)
    if abs(rated.sum() - target) > tol * target:
        raise InfeasiblePopulation(f"bus split missed {target} kW by {rated.sum() - target:.6g} kW")
    return rated


def build_population(classes: Sequence[CustomerClass], allocations: Sequence[ClassAllocation],
                     rng: np.random.Generator, tol: float = 1e-3) -> list[Customer]:
    """Synthesize every customer, class by class and bus by bus in ascending order."""
    by_name = {c.name: c for c in classes}
    people: list[Customer] = []
    next_id = 1
    for alloc in allocations:
        cls = by_name[alloc.class_name]
        counts = bus_customer_counts(alloc, cls.demand_range)
        for bus in sorted(alloc.bus_demand):
            rated = split_bus_demand(alloc.bus_demand[bus], counts[bus], cls.demand_range, rng, tol)
            for r in rated:
                people.append(synthesize_customer(cls, bus, float(r), rng, customer_id=next_id))
                next_id += 1
    return people
