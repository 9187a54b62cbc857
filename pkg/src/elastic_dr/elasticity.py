"""Per-customer T x T elasticity matrices for the static, dynamic and stochastic models."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .customers import Customer
from .tariff import ClassPrice, PeriodPartition

MODEL_TAGS = ("PEM", "DPEM", "SPEM")


@dataclass(frozen=True)
class ElasticityMatrix:
    """Entry ``(t, tau)`` is the response of demand at ``t`` to the price at ``tau``."""

    entries: np.ndarray
    model_tag: str

    def __post_init__(self):
        e = np.ascontiguousarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError("elasticity matrix must be square")
        if self.model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {self.model_tag!r}")
        if not np.all(np.isfinite(e)):
            raise ValueError("elasticity entries must be finite")
        off = ~np.eye(e.shape[0], dtype=bool)
        if np.any(np.diag(e) > 0) or np.any(e[off] < 0):
            raise ValueError("sign convention violated: need diagonal <= 0, off-diagonal >= 0")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def horizon(self) -> int:
        return int(self.entries.shape[0])


@dataclass(frozen=True)
class GbmParams:
    """Cross-elasticity GBM: per-hour drift ``mu`` and volatility ``sigma``.

    ``enforce_decay`` rejects the growth regime ``mu > sigma**2 / 2``; the
    stochastic matrix builder always requires decay.
    """

    mu: float = 0.2
    sigma: float = 1.2
    epsilon0_fraction: float = 0.15
    recovery_window: int = 3
    seed: int = 0
    enforce_decay: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if not 0 < self.epsilon0_fraction <= 1:
            raise ValueError("epsilon0_fraction must lie in (0, 1]")
        if self.recovery_window < 1:
            raise ValueError("recovery_window must be >= 1")
        if self.enforce_decay and not self.decays:
            raise ValueError(f"growth regime mu={self.mu} > sigma^2/2={self.sigma ** 2 / 2} is not supported")

    @property
    def log_drift(self) -> float:
        return self.mu - 0.5 * self.sigma ** 2

    @property
    def decays(self) -> bool:
        return self.mu <= 0.5 * self.sigma ** 2


@dataclass(frozen=True)
class PeakSpec:
    mode: str = "max_demand"
    alpha: float = 0.1
    peak_elasticity: float = -0.3

    def __post_init__(self):
        if self.mode not in ("max_demand", "peak_price"):
            raise ValueError(f"unknown peak mode {self.mode!r}")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.peak_elasticity > 0:
            raise ValueError("peak_elasticity must be <= 0")


def build_pem_matrix(class_self: float, partition: PeriodPartition, cross_fraction: float = 0.15) -> ElasticityMatrix:
    """Static benchmark: constant self term, constant cross term between peak and non-peak hours."""
    if class_self > 0:
        raise ValueError("class_self must be <= 0")
    if cross_fraction < 0:
        raise ValueError("cross_fraction must be >= 0")
    peak = partition.peak_mask
    coupled = peak[:, None] != peak[None, :]
    entries = np.where(coupled, cross_fraction * abs(class_self), 0.0)
    np.fill_diagonal(entries, class_self)
    return ElasticityMatrix(entries, "PEM")


def build_dpem_diagonal(customer: Customer, class_price: ClassPrice, spec: PeakSpec) -> np.ndarray:
    """Hourly self-elasticity with ``eps(t) * D0(t)`` equal to its peak-hour value.

    ``max_demand`` anchors at the hour of largest baseline demand with the
    given peak elasticity. ``peak_price`` anchors at the highest-price hour
    and derives the elasticity there from a curtailment fraction ``alpha``.
    Ties go to the lowest hour index.
    """
    base = np.asarray(customer.baseline_profile, dtype=float)
    if np.any(base <= 0):
        raise ValueError("baseline profile must be strictly positive")
    if spec.mode == "max_demand":
        t_peak = int(np.argmax(base))
        eps_peak = spec.peak_elasticity
    else:
        t_peak = int(np.argmax(class_price.class_price))
        gap = class_price.class_price[t_peak] - class_price.class_nominal
        if gap <= 0:
            raise ValueError("peak price must exceed the nominal price in peak_price mode")
        eps_peak = -spec.alpha * class_price.class_nominal / gap
    anchor = eps_peak * base[t_peak]
    eps = anchor / base
    eps[t_peak] = eps_peak
    return eps


def build_dpem_matrix(customer: Customer, class_price: ClassPrice, spec: PeakSpec) -> ElasticityMatrix:
    return ElasticityMatrix(np.diag(build_dpem_diagonal(customer, class_price, spec)), "DPEM")


def sample_gbm_path(params: GbmParams, steps: int, rng: np.random.Generator, eps0: float | None = None) -> np.ndarray:
    """``steps`` values of the exact GBM recursion with a 1 h step, starting at ``eps0``."""
    return sample_gbm_paths(params, steps, 1, rng, eps0)[0]


def sample_gbm_paths(params: GbmParams, steps: int, n_paths: int, rng: np.random.Generator,
                     eps0: float | None = None) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if params.enforce_decay and not params.decays:
        raise ValueError("growth regime not supported")
    start = params.epsilon0_fraction if eps0 is None else eps0
    if start <= 0:
        raise ValueError("initial value must be positive")
    z = rng.standard_normal((n_paths, steps - 1))
    # exact solution eps0 * exp((mu - sigma^2/2) k + sigma W_k), W_k a Gaussian random walk
    walk = np.concatenate([np.zeros((n_paths, 1)), np.cumsum(z, axis=1)], axis=1)
    k = np.arange(steps, dtype=float)
    return start * np.exp(params.log_drift * k + params.sigma * walk)


def build_spem_matrix(customer: Customer, class_self: float, partition: PeriodPartition, params: GbmParams,
                      rng: np.random.Generator | None = None, cap_recovery: bool = True) -> ElasticityMatrix:
    """Peak-hour self terms plus GBM cross terms on the hours following each peak hour.

    Entry ``(t, tau)`` for peak ``tau`` and non-peak ``t`` at cyclic forward
    distance ``d`` in ``[1, recovery_window]`` is the path value at step
    ``d``; the path starts at ``epsilon0_fraction * |class_self|``.

    With ``cap_recovery`` a peak column whose recovery capacity
    ``sum_t eps(t, tau) D0(t)`` exceeds its curtailment capacity
    ``|eps(tau, tau)| D0(tau)`` is scaled down to equality, so a price rise
    at ``tau`` can never bring back more energy than it removed.
    """
    if class_self > 0:
        raise ValueError("class_self must be <= 0")
    if not params.decays:
        raise ValueError("stochastic recovery requires the decay regime mu <= sigma^2/2")
    T = partition.horizon
    if params.recovery_window >= T:
        raise ValueError(f"recovery_window {params.recovery_window} must be < horizon {T}")
    if rng is None:
        rng = np.random.default_rng(params.seed)
    path = sample_gbm_path(params, params.recovery_window, rng, eps0=params.epsilon0_fraction * abs(class_self))

    peak = partition.peak_mask
    entries = np.zeros((T, T))
    for tau in np.flatnonzero(peak):
        entries[tau, tau] = class_self
        for d in range(1, params.recovery_window + 1):
            t = (tau + d) % T
            if not peak[t]:
                entries[t, tau] = path[d - 1]
    if cap_recovery:
        base = np.asarray(customer.baseline_profile, dtype=float)
        for tau in np.flatnonzero(peak):
            col = entries[:, tau].copy()
            col[tau] = 0.0
            recovery = float(col @ base)
            curtail = abs(class_self) * base[tau]
            if recovery > curtail:
                scale = curtail / recovery
                entries[:, tau] = np.where(np.arange(T) == tau, class_self, col * scale)
    return ElasticityMatrix(entries, "SPEM")
