"""Post-DR demand, multiplier solve, quadratic benefit and aggregate energy balance."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import kernels
from .elasticity import ElasticityMatrix
from .errors import ConstraintUnreachable
from .tariff import ClassPrice, PeriodPartition

log = logging.getLogger(__name__)

LAMBDA_MODES = ("zero", "balance_solve")
BALANCE_RTOL = 1e-8


@dataclass(frozen=True)
class DrConfig:
    lambda_mode: str = "zero"
    lambda_value: float = 0.0
    floor_demand: float = 0.0

    def __post_init__(self):
        if self.lambda_mode not in LAMBDA_MODES:
            raise ValueError(f"unknown lambda_mode {self.lambda_mode!r}")
        if self.lambda_mode == "zero" and self.lambda_value != 0:
            raise ValueError("lambda_value must be 0 in zero mode")


@dataclass(frozen=True)
class DrOutcome:
    demand_adr: np.ndarray
    delta: np.ndarray
    lambda_used: float
    balance_residual: float
    curtailed_peak: float
    shifted_off: float
    clamped_hours: tuple = ()

    @property
    def energy_change(self) -> float:
        return math.fsum(self.delta)


@dataclass(frozen=True)
class BenefitParams:
    baseline: np.ndarray
    nominal_price: float
    self_elasticity_diag: np.ndarray
    multiplier: float = 0.0
    constant: float = 0.0


def _arrays(baseline, class_price: ClassPrice, matrix: ElasticityMatrix, partition: PeriodPartition | None):
    D0 = np.ascontiguousarray(baseline, dtype=float)
    price = np.ascontiguousarray(class_price.class_price, dtype=float)
    E = matrix.entries
    if not (D0.shape[0] == price.shape[0] == E.shape[0]):
        raise ValueError(f"dimension mismatch: baseline {D0.shape[0]}, price {price.shape[0]}, "
                         f"matrix {E.shape[0]}")
    if partition is not None and partition.horizon != D0.shape[0]:
        raise ValueError("partition horizon does not match the profile length")
    return D0, price, E


def _peak_flags(partition: PeriodPartition) -> np.ndarray:
    return np.ascontiguousarray(partition.peak_mask, dtype=np.uint8)


def respond(baseline, class_price: ClassPrice, matrix: ElasticityMatrix, partition: PeriodPartition,
            config: DrConfig = DrConfig(), lam: float | None = None) -> DrOutcome:
    """Demand after DR under multi-period price elasticity.

    ``D(t) = D0(t) * (1 + sum_tau eps(t, tau) * (rho(tau) - rho0 + lambda) / rho0)``,
    clamped below at ``config.floor_demand``. ``lam`` overrides the multiplier
    taken from ``config``.
    """
    D0, price, E = _arrays(baseline, class_price, matrix, partition)
    lam = config.lambda_value if lam is None else float(lam)
    rho0 = class_price.class_nominal
    if not (np.all(np.isfinite(price)) and math.isfinite(lam)):
        raise ValueError("non-finite price deviation")
    D = np.empty_like(D0)
    n_clamped = kernels.respond_into(D0, E, price, rho0, lam, config.floor_demand, D)
    clamped = ()
    if n_clamped:
        clamped = tuple(int(t) for t in np.flatnonzero(D == config.floor_demand))
        log.warning("demand clamped at floor %.3g kW in hours %s", config.floor_demand, clamped)
    delta = D - D0
    peak = partition.peak_mask
    curtailed = -math.fsum(delta[peak])
    shifted = math.fsum(delta[~peak])
    D.setflags(write=False)
    delta.setflags(write=False)
    return DrOutcome(demand_adr=D, delta=delta, lambda_used=lam, balance_residual=curtailed - shifted,
                     curtailed_peak=curtailed, shifted_off=shifted, clamped_hours=clamped)


def balance_residual(baseline, class_price: ClassPrice, matrix: ElasticityMatrix, partition: PeriodPartition,
                     lam: float, floor_demand: float = 0.0) -> float:
    """psi(lambda): peak curtailment minus off-peak/valley increase."""
    D0, price, E = _arrays(baseline, class_price, matrix, partition)
    return float(kernels.psi_at(D0, E, price, class_price.class_nominal, float(lam), floor_demand,
                                _peak_flags(partition)))


def solve_lambda(baseline, class_price: ClassPrice, matrix: ElasticityMatrix, partition: PeriodPartition,
                 floor_demand: float = 0.0) -> float:
    """Multiplier driving the balance residual psi to zero.

    Without clamping psi is affine in lambda, so the closed form is tried
    first; if the floor makes it miss, bisection runs on a bracket grown
    geometrically from ``[-rho0, rho0]``.
    """
    D0, price, E = _arrays(baseline, class_price, matrix, partition)
    rho0 = class_price.class_nominal
    peak = _peak_flags(partition)
    total = float(D0.sum())
    tol = BALANCE_RTOL * total

    def psi(lam):
        return kernels.psi_at(D0, E, price, rho0, lam, floor_demand, peak)

    # psi = -sum_t (D(t) - D0(t)) once the partition covers every hour, so the
    # unclamped slope is -sum_t D0(t) * sum_tau eps(t, tau) / rho0.
    if not E.any():
        raise ConstraintUnreachable("constraint unreachable: all elasticities are zero")
    f0 = psi(0.0)
    if abs(f0) <= tol:
        return 0.0
    slope = -float(D0 @ E.sum(axis=1)) / rho0
    if abs(slope) * rho0 <= 1e-14 * total:
        raise ConstraintUnreachable("constraint unreachable: balance residual does not depend on lambda")
    lam = -f0 / slope
    if abs(psi(lam)) <= tol:
        return lam

    lo, hi = -rho0, rho0
    f_lo, f_hi = psi(lo), psi(hi)
    for _ in range(200):
        if (f_lo <= 0 <= f_hi) or (f_hi <= 0 <= f_lo):
            break
        lo, hi = 2 * lo, 2 * hi
        f_lo, f_hi = psi(lo), psi(hi)
    else:
        raise ConstraintUnreachable("could not bracket a root of the balance residual")
    lam = kernels.bisect_lambda(D0, E, price, rho0, floor_demand, peak, lo, hi, tol, 200)
    if abs(psi(lam)) > tol:
        raise ConstraintUnreachable(f"bisection stalled with residual {psi(lam):.3g}")
    return float(lam)


def respond_balanced(baseline, class_price: ClassPrice, matrix: ElasticityMatrix, partition: PeriodPartition,
                     config: DrConfig = DrConfig(lambda_mode="balance_solve")) -> DrOutcome:
    """``respond`` with lambda from ``solve_lambda`` in balance mode, falling back to 0."""
    if config.lambda_mode == "zero":
        return respond(baseline, class_price, matrix, partition, config)
    try:
        lam = solve_lambda(baseline, class_price, matrix, partition, config.floor_demand)
    except ConstraintUnreachable as exc:
        log.warning("%s; using lambda = 0", exc)
        lam = 0.0
    return respond(baseline, class_price, matrix, partition, config, lam=lam)


def benefit(params: BenefitParams, demand) -> float:
    """Second-order benefit expansion about the baseline, summed over hours."""
    D0 = np.asarray(params.baseline, dtype=float)
    D = np.asarray(demand, dtype=float)
    eps = np.asarray(params.self_elasticity_diag, dtype=float)
    step = D - D0
    moved = step != 0
    if np.any(moved & (eps == 0)):
        raise ValueError("benefit curvature undefined where elasticity is 0 and demand moves")
    rho0 = params.nominal_price
    curvature = np.zeros_like(D0)
    curvature[moved] = rho0 / (eps[moved] * D0[moved])
    terms = (rho0 + params.multiplier) * step + curvature * step ** 2 / 2
    return params.constant + math.fsum(terms)


def net_benefit(params: BenefitParams, demand, class_price: ClassPrice) -> float:
    D = np.asarray(demand, dtype=float)
    return benefit(params, D) - math.fsum(D * class_price.class_price)


def aggregate_balance(outcomes: Iterable[DrOutcome]) -> float:
    """Total energy change over all customers, reduced in the given order."""
    return math.fsum(math.fsum(o.delta) for o in outcomes)
