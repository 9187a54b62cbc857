"""Reductions over DR outcomes: bills, load-factor curves, curtail/shift shares, model comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .customers import Customer
from .engine import DrOutcome
from .tariff import PERIODS, ClassPrice, PeriodPartition


def pct(diff: float, base: float) -> float:
    return 100.0 * diff / base if base else 0.0


def bill(profile, class_price: ClassPrice, partition: PeriodPartition) -> dict[str, float]:
    """Money (¢) per period plus ``total``, the exact sum of the period bills."""
    cost = np.asarray(profile, dtype=float) * class_price.class_price
    out = {p: math.fsum(cost[partition.mask(p)]) for p in PERIODS}
    out["total"] = sum(out[p] for p in PERIODS)
    return out


@dataclass(frozen=True)
class BillReport:
    per_period: dict   # class -> period -> {"bdr": ..., "adr": ...}
    per_class: dict    # class -> {"bdr", "adr", "diff", "pct_change"}
    overall: dict


def _change(bdr: float, adr: float) -> dict:
    return {"bdr": bdr, "adr": adr, "diff": adr - bdr, "pct_change": pct(adr - bdr, bdr)}


def _check_lengths(customers: Sequence[Customer], outcomes: Sequence[DrOutcome]):
    if len(customers) != len(outcomes):
        raise ValueError(f"{len(outcomes)} outcomes for {len(customers)} customers")


def bill_report(customers: Sequence[Customer], outcomes: Sequence[DrOutcome],
                class_prices: Mapping[str, ClassPrice], partition: PeriodPartition) -> BillReport:
    _check_lengths(customers, outcomes)
    parts: dict[str, dict[str, dict[str, list]]] = {}
    for cust, out in zip(customers, outcomes):
        price = class_prices[cust.class_name]
        before = bill(cust.baseline_profile, price, partition)
        after = bill(out.demand_adr, price, partition)
        cls = parts.setdefault(cust.class_name, {p: {"bdr": [], "adr": []} for p in PERIODS})
        for p in PERIODS:
            cls[p]["bdr"].append(before[p])
            cls[p]["adr"].append(after[p])
    per_period = {c: {p: {k: math.fsum(v) for k, v in d.items()} for p, d in cls.items()}
                  for c, cls in parts.items()}
    per_class = {}
    for c, cls in per_period.items():
        per_class[c] = _change(sum(cls[p]["bdr"] for p in PERIODS), sum(cls[p]["adr"] for p in PERIODS))
    overall = _change(math.fsum(v["bdr"] for v in per_class.values()),
                      math.fsum(v["adr"] for v in per_class.values()))
    return BillReport(per_period=per_period, per_class=per_class, overall=overall)


def load_factor_curve(bdr_profiles: Sequence, adr_profiles: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Aggregate BDR and ADR demand, both divided by the BDR aggregate maximum."""
    if len(bdr_profiles) == 0:
        raise ValueError("need at least one customer")
    bdr = np.sum(np.asarray(bdr_profiles, dtype=float), axis=0)
    adr = np.sum(np.asarray(adr_profiles, dtype=float), axis=0)
    peak = bdr.max()
    if peak <= 0:
        raise ValueError("aggregate demand is zero")
    return bdr / peak, adr / peak


def curtail_shift_report(customers: Sequence[Customer], outcomes: Sequence[DrOutcome],
                         partition: PeriodPartition) -> list[dict]:
    """Per class and period: energy change, % of that period's baseline and % of class energy.

    Rows come in class order of first appearance, then period order.
    """
    _check_lengths(customers, outcomes)
    acc: dict[str, dict] = {}
    for cust, out in zip(customers, outcomes):
        cls = acc.setdefault(cust.class_name, {p: ([], []) for p in PERIODS})
        for p in PERIODS:
            m = partition.mask(p)
            cls[p][0].append(math.fsum(np.asarray(cust.baseline_profile)[m]))
            cls[p][1].append(math.fsum(out.delta[m]))
    rows = []
    for c, cls in acc.items():
        base = {p: math.fsum(cls[p][0]) for p in PERIODS}
        delta = {p: math.fsum(cls[p][1]) for p in PERIODS}
        energy = math.fsum(base.values())
        for p in PERIODS:
            rows.append({"class": c, "period": p, "baseline_kwh": base[p], "delta_kwh": delta[p],
                         "pct_of_period": pct(delta[p], base[p]), "pct_of_class_energy": pct(delta[p], energy)})
    return rows


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    total_cost: float
    diff: float | None
    pct_change: float
    total_energy: float
    energy_pct_change: float


def population_totals(customers: Sequence[Customer], outcomes: Sequence[DrOutcome] | None,
                      class_prices: Mapping[str, ClassPrice]) -> tuple[float, float]:
    """(total cost ¢, total energy kWh) of ADR demand, or of the baseline when ``outcomes`` is None."""
    if outcomes is not None:
        _check_lengths(customers, outcomes)
    costs, energies = [], []
    for i, cust in enumerate(customers):
        D = cust.baseline_profile if outcomes is None else outcomes[i].demand_adr
        costs.append(math.fsum(np.asarray(D) * class_prices[cust.class_name].class_price))
        energies.append(math.fsum(D))
    return math.fsum(costs), math.fsum(energies)


def comparison_rows(base: tuple[float, float],
                    totals_by_method: Mapping[str, Sequence[tuple[float, float]]]) -> list[ComparisonRow]:
    """Rows from (cost, energy) totals; several totals for one method are averaged."""
    base_cost, base_energy = base
    rows = [ComparisonRow("Base", base_cost, None, 0.0, base_energy, 0.0)]
    for method, totals in totals_by_method.items():
        cost = math.fsum(c for c, _ in totals) / len(totals)
        energy = math.fsum(e for _, e in totals) / len(totals)
        rows.append(ComparisonRow(method, cost, cost - base_cost, pct(cost - base_cost, base_cost),
                                  energy, pct(energy - base_energy, base_energy)))
    return rows


def comparison_table(customers: Sequence[Customer], class_prices: Mapping[str, ClassPrice],
                     outcomes_by_method: Mapping[str, Sequence[Sequence[DrOutcome]]]) -> list[ComparisonRow]:
    """Base row plus one row per method; a method with several replications reports their mean."""
    base = population_totals(customers, None, class_prices)
    totals = {m: [population_totals(customers, rep, class_prices) for rep in reps]
              for m, reps in outcomes_by_method.items()}
    return comparison_rows(base, totals)
