"""Scenario loading, fixture validation, model orchestration and CSV export."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__, kernels
from .customers import ClassAllocation, Customer, CustomerClass, build_population
from .elasticity import (GbmParams, PeakSpec, build_dpem_matrix, build_pem_matrix, build_spem_matrix)
from .engine import DrConfig, DrOutcome, respond_balanced
from .errors import FixtureError
from .metrics import (bill_report, comparison_rows, curtail_shift_report, load_factor_curve,
                      population_totals)
from .rng import stream
from .tariff import (PERIODS, ClassPrice, PeriodPartition, PriceSignal, build_class_price, classify_hours,
                     read_price_rows)

log = logging.getLogger(__name__)

MODELS = ("PEM", "DPEM", "SPEM")
DEFAULT_LAMBDA_MODE = {"PEM": "zero", "DPEM": "balance_solve", "SPEM": "zero"}
FIXTURE_KINDS = ("prices", "classes", "lf", "periods", "scenario")
REPORT_FILES = ("bills_by_period.csv", "bills_by_class.csv", "comparison.csv", "load_factor.csv",
                "curtail_shift.csv")


# ---------------------------------------------------------------------------
# fixture validation


def _diag(path, line, msg) -> str:
    return f"{path}:{line}: {msg}" if line is not None else f"{path}: {msg}"


def _load_json(path: Path, diags: list):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        diags.append(_diag(path, exc.lineno, f"invalid JSON: {exc.msg}"))
    return None


def validate_fixture(path, kind: str) -> list[str]:
    """Schema and invariant diagnostics for one fixture; empty means usable.

    Raises ``OSError`` when the file cannot be read.
    """
    path = Path(path)
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"unknown fixture kind {kind!r}; expected one of {FIXTURE_KINDS}")
    path.stat()
    return {"prices": _validate_prices, "classes": _validate_classes, "lf": _validate_lf,
            "periods": _validate_periods, "scenario": _validate_scenario}[kind](path)


def _validate_prices(path: Path) -> list[str]:
    try:
        rows = read_price_rows(path)
    except FixtureError as exc:
        return [str(exc)]
    diags = []
    for i, (hour, price, line) in enumerate(rows):
        if hour != i:
            diags.append(_diag(path, line, f"expected hour {i}, found {hour}"))
        if not math.isfinite(price) or price <= 0:
            diags.append(_diag(path, line, f"price {price} must be finite and strictly positive"))
    return diags


def _validate_classes(path: Path) -> list[str]:
    diags: list[str] = []
    doc = _load_json(path, diags)
    if doc is None:
        return diags
    classes = doc.get("classes") if isinstance(doc, dict) else None
    if not isinstance(classes, list) or not classes:
        return [_diag(path, None, "expected a non-empty 'classes' list")]
    seen = set()
    for i, c in enumerate(classes):
        where = f"classes[{i}]"
        if not isinstance(c, dict):
            diags.append(_diag(path, None, f"{where}: not an object"))
            continue
        missing = {"name", "kappa", "self_elasticity", "demand_range", "customer_count", "bus_demand"} - set(c)
        if missing:
            diags.append(_diag(path, None, f"{where}: missing fields {sorted(missing)}"))
            continue
        name = c["name"]
        where = f"class {name}"
        if name in seen:
            diags.append(_diag(path, None, f"{where}: duplicate class name"))
        seen.add(name)
        try:
            kappa, eps = float(c["kappa"]), float(c["self_elasticity"])
            lo, hi = (float(v) for v in c["demand_range"])
            count = int(c["customer_count"])
            buses = {int(b): float(d) for b, d in c["bus_demand"].items()}
        except (TypeError, ValueError, AttributeError):
            diags.append(_diag(path, None, f"{where}: non-numeric field"))
            continue
        if 1 + kappa <= 0:
            diags.append(_diag(path, None, f"{where}: kappa={kappa} makes prices non-positive (need > -1)"))
        if eps > 0:
            diags.append(_diag(path, None, f"{where}: self_elasticity={eps} must be <= 0"))
        if not 0 < lo <= hi:
            diags.append(_diag(path, None, f"{where}: demand_range must satisfy 0 < min <= max"))
        if count < 1:
            diags.append(_diag(path, None, f"{where}: customer_count must be >= 1"))
        if not buses or any(d <= 0 for d in buses.values()):
            diags.append(_diag(path, None, f"{where}: bus_demand must list buses with positive kW"))
        if "bus_counts" in c and set(map(int, c["bus_counts"])) != set(buses):
            diags.append(_diag(path, None, f"{where}: bus_counts must name the same buses as bus_demand"))
    return diags


def _read_lf_rows(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["class", "hour", "mean_lf", "cov"]:
            raise FixtureError(path, "header must be 'class,hour,mean_lf,cov'", line=1)
        rows = []
        for line, rec in enumerate(reader, start=2):
            if not rec:
                continue
            try:
                rows.append((rec[0].strip(), int(rec[1]), float(rec[2]), float(rec[3]), line))
            except (ValueError, IndexError):
                raise FixtureError(path, f"unparseable row {rec!r}", line=line) from None
    return rows


def _validate_lf(path: Path) -> list[str]:
    try:
        rows = _read_lf_rows(path)
    except FixtureError as exc:
        return [str(exc)]
    diags = []
    hours: dict[str, list[int]] = {}
    for cls, hour, mean, cov, line in rows:
        if not 0 < mean <= 1:
            diags.append(_diag(path, line, f"{cls} hour {hour}: mean_lf {mean} outside (0, 1]"))
        if not 0 <= cov < 1:
            diags.append(_diag(path, line, f"{cls} hour {hour}: cov {cov} outside [0, 1)"))
        hours.setdefault(cls, []).append(hour)
    lengths = set()
    for cls, hs in hours.items():
        if hs != list(range(len(hs))):
            diags.append(_diag(path, None, f"{cls}: hours must run 0..T-1 in order"))
        lengths.add(len(hs))
    if len(lengths) > 1:
        diags.append(_diag(path, None, f"classes have different horizons {sorted(lengths)}"))
    return diags


def _validate_periods(path: Path) -> list[str]:
    diags: list[str] = []
    doc = _load_json(path, diags)
    if doc is None:
        return diags
    try:
        classify_hours(doc)
    except (ValueError, TypeError, AttributeError) as exc:
        diags.append(_diag(path, None, str(exc)))
    return diags


def _validate_scenario(path: Path) -> list[str]:
    diags: list[str] = []
    doc = _load_json(path, diags)
    if doc is None:
        return diags
    try:
        scenario = Scenario.from_dict(doc, base_dir=path.parent)
    except (ValueError, TypeError, KeyError) as exc:
        return [_diag(path, None, f"invalid scenario: {exc}")]
    refs = [(scenario.price_fixture, "prices"), (scenario.class_catalog, "classes"),
            (scenario.lf_fixture, "lf")]
    if not isinstance(scenario.period_config, Mapping):
        refs.append((scenario.period_config, "periods"))
    for ref, kind in refs:
        try:
            diags.extend(validate_fixture(ref, kind))
        except OSError as exc:
            diags.append(_diag(path, None, f"cannot read {kind} fixture {ref}: {exc.strerror}"))
    if isinstance(scenario.period_config, Mapping):
        try:
            classify_hours(scenario.period_config)
        except ValueError as exc:
            diags.append(_diag(path, None, f"period_config: {exc}"))
    if not diags:
        try:
            load_inputs(scenario)
        except (FixtureError, ValueError) as exc:
            diags.append(str(exc))
    return diags


def _line_of(diag: str, path) -> int | None:
    rest = diag.removeprefix(f"{path}:")
    head = rest.split(":", 1)[0]
    return int(head) if head.isdigit() else None


# ---------------------------------------------------------------------------
# scenario


def _model_order(models) -> tuple:
    wanted = {str(m).strip().upper() for m in models}
    unknown = wanted - set(MODELS)
    if unknown:
        raise ValueError(f"unknown models {sorted(unknown)}; expected a subset of {list(MODELS)}")
    return tuple(m for m in MODELS if m in wanted)


@dataclass(frozen=True)
class Scenario:
    price_fixture: Path
    class_catalog: Path
    lf_fixture: Path
    period_config: object
    nominal_price: float = 5.0
    model_set: tuple = MODELS
    gbm: GbmParams = field(default_factory=GbmParams)
    peak_spec: dict = field(default_factory=lambda: {"mode": "max_demand", "alpha": 0.1})
    lambda_modes: dict = field(default_factory=lambda: dict(DEFAULT_LAMBDA_MODE))
    floor_demand: float = 0.0
    cross_fraction: float = 0.15
    seed: int = 0
    spem_replications: int = 1
    output_dir: Path = Path("out")

    def __post_init__(self):
        if not self.model_set:
            raise ValueError("model_set must not be empty")
        object.__setattr__(self, "model_set", _model_order(self.model_set))
        if self.spem_replications < 1:
            raise ValueError("spem_replications must be >= 1")

    @classmethod
    def from_dict(cls, doc: Mapping, base_dir: Path = Path(".")) -> "Scenario":
        base_dir = Path(base_dir)

        def resolve(p):
            return p if isinstance(p, Mapping) else (base_dir / p).resolve()

        gbm_doc = dict(doc.get("gbm", {}))
        seed = int(doc.get("seed", 0))
        modes = dict(DEFAULT_LAMBDA_MODE)
        dr = doc.get("dr_config", {})
        lm = dr.get("lambda_mode", {})
        if isinstance(lm, str):
            modes = {m: lm for m in MODELS}
        else:
            modes.update(lm)
        for m in modes.values():
            DrConfig(lambda_mode=m)
        models = doc.get("models", MODELS)
        return cls(
            price_fixture=resolve(doc["price_fixture"]),
            class_catalog=resolve(doc["class_catalog"]),
            lf_fixture=resolve(doc["lf_fixture"]),
            period_config=resolve(doc["period_config"]),
            nominal_price=float(doc.get("nominal_price", 5.0)),
            model_set=_model_order(models),
            gbm=GbmParams(**gbm_doc),
            peak_spec=dict(doc.get("peak_spec", {"mode": "max_demand", "alpha": 0.1})),
            lambda_modes=modes,
            floor_demand=float(dr.get("floor_demand", 0.0)),
            cross_fraction=float(doc.get("pem", {}).get("cross_fraction", 0.15)),
            seed=seed,
            spem_replications=int(doc.get("spem_replications", 1)),
            # outputs land relative to where the command runs, not beside the config
            output_dir=Path(doc.get("output_dir", "out")),
        )

    def with_overrides(self, seed: int | None = None, models=None, output_dir=None) -> "Scenario":
        changes = {}
        if seed is not None:
            changes["seed"] = int(seed)
        if models:
            changes["model_set"] = _model_order(models)
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        return Scenario(**{**self.__dict__, **changes})

    def fingerprint(self) -> str:
        """sha256 over the settings and fixture contents (paths excluded)."""
        h = hashlib.sha256()
        files = [self.price_fixture, self.class_catalog, self.lf_fixture]
        if not isinstance(self.period_config, Mapping):
            files.append(self.period_config)
        for f in files:
            h.update(Path(f).read_bytes())
        settings = {
            "periods": self.period_config if isinstance(self.period_config, Mapping) else None,
            "nominal_price": self.nominal_price, "models": list(self.model_set),
            "gbm": dict(self.gbm.__dict__), "peak_spec": self.peak_spec,
            "lambda_modes": self.lambda_modes, "floor_demand": self.floor_demand,
            "cross_fraction": self.cross_fraction, "seed": self.seed,
            "spem_replications": self.spem_replications,
        }
        h.update(json.dumps(settings, sort_keys=True).encode())
        return h.hexdigest()


def load_scenario(path) -> Scenario:
    path = Path(path)
    diags: list[str] = []
    doc = _load_json(path, diags)
    if doc is None:
        raise FixtureError(path, diags[0].split(": ", 1)[1] if diags else "unreadable", line=_line_of(diags[0], path))
    try:
        return Scenario.from_dict(doc, base_dir=path.parent)
    except KeyError as exc:
        raise FixtureError(path, f"missing required key {exc.args[0]!r}") from None
    except (ValueError, TypeError) as exc:
        raise FixtureError(path, f"invalid scenario: {exc}") from None


# ---------------------------------------------------------------------------
# loading


@dataclass(frozen=True)
class Inputs:
    signal: PriceSignal
    partition: PeriodPartition
    classes: tuple
    allocations: tuple

    @property
    def class_prices(self) -> dict[str, ClassPrice]:
        return {c.name: build_class_price(self.signal, c.kappa) for c in self.classes}

    def cls(self, name: str) -> CustomerClass:
        return next(c for c in self.classes if c.name == name)


def _checked(path, kind):
    diags = validate_fixture(path, kind)
    if diags:
        line = _line_of(diags[0], path)
        msg = diags[0].removeprefix(str(path)).lstrip(":").lstrip("0123456789").lstrip(":").strip()
        raise FixtureError(path, msg, line=line)


def load_inputs(scenario: Scenario) -> Inputs:
    for path, kind in ((scenario.price_fixture, "prices"), (scenario.class_catalog, "classes"),
                       (scenario.lf_fixture, "lf")):
        _checked(path, kind)
    signal = PriceSignal(np.array([p for _, p, _ in read_price_rows(Path(scenario.price_fixture))]),
                         scenario.nominal_price)
    if isinstance(scenario.period_config, Mapping):
        partition = classify_hours(scenario.period_config, signal.horizon_hours)
    else:
        _checked(scenario.period_config, "periods")
        with open(scenario.period_config, encoding="utf-8") as fh:
            partition = classify_hours(json.load(fh), signal.horizon_hours)

    lf: dict[str, tuple[list, list]] = {}
    for name, _, mean, cov, _ in _read_lf_rows(Path(scenario.lf_fixture)):
        lf.setdefault(name, ([], []))
        lf[name][0].append(mean)
        lf[name][1].append(cov)
    with open(scenario.class_catalog, encoding="utf-8") as fh:
        catalog = json.load(fh)["classes"]
    classes, allocations = [], []
    for c in catalog:
        if c["name"] not in lf:
            raise FixtureError(scenario.lf_fixture, f"no load-factor pattern for class {c['name']}")
        mean, cov = lf[c["name"]]
        if len(mean) != signal.horizon_hours:
            raise FixtureError(scenario.lf_fixture,
                               f"class {c['name']} has {len(mean)} hours, price signal has {signal.horizon_hours}")
        classes.append(CustomerClass(name=c["name"], kappa=float(c["kappa"]),
                                     self_elasticity=float(c["self_elasticity"]),
                                     demand_range=tuple(c["demand_range"]),
                                     lf_pattern=np.array(mean), cov_pattern=np.array(cov)))
        counts = c.get("bus_counts")
        allocations.append(ClassAllocation(
            class_name=c["name"], customer_count=int(c["customer_count"]),
            bus_demand={int(b): float(d) for b, d in c["bus_demand"].items()},
            bus_counts={int(b): int(n) for b, n in counts.items()} if counts else None))
    return Inputs(signal, partition, tuple(classes), tuple(allocations))


# ---------------------------------------------------------------------------
# model runs


def model_matrix(model: str, customer: Customer, inputs: Inputs, scenario: Scenario,
                 class_price: ClassPrice, replication: int = 0):
    cls = inputs.cls(customer.class_name)
    if model == "PEM":
        return build_pem_matrix(cls.self_elasticity, inputs.partition, scenario.cross_fraction)
    if model == "DPEM":
        spec = PeakSpec(mode=scenario.peak_spec.get("mode", "max_demand"),
                        alpha=float(scenario.peak_spec.get("alpha", 0.1)),
                        peak_elasticity=float(scenario.peak_spec.get("peak_elasticity", cls.self_elasticity)))
        return build_dpem_matrix(customer, class_price, spec)
    rng = stream(scenario.seed, "gbm", replication, customer.id)
    return build_spem_matrix(customer, cls.self_elasticity, inputs.partition, scenario.gbm, rng)


def run_model(model: str, population, inputs: Inputs, scenario: Scenario, replication: int = 0,
              class_prices=None) -> list[DrOutcome]:
    class_prices = class_prices or inputs.class_prices
    config = DrConfig(lambda_mode=scenario.lambda_modes.get(model, "zero"), floor_demand=scenario.floor_demand)
    out = []
    for cust in population:
        price = class_prices[cust.class_name]
        matrix = model_matrix(model, cust, inputs, scenario, price, replication)
        out.append(respond_balanced(cust.baseline_profile, price, matrix, inputs.partition, config))
    return out


def synthesize(inputs: Inputs, scenario: Scenario) -> list[Customer]:
    return build_population(inputs.classes, inputs.allocations, stream(scenario.seed, "population"))


REBOUND_RTOL = 1e-12


def rebounds(outcome: DrOutcome) -> bool:
    """Shifted energy above curtailed energy, beyond rounding at the recovery cap."""
    return outcome.shifted_off - outcome.curtailed_peak > REBOUND_RTOL * max(abs(outcome.curtailed_peak), 1.0)


@dataclass
class RunResult:
    population: list
    outcomes: dict            # model -> list[DrOutcome] (replication 0 for SPEM)
    spem_totals: list         # per-replication (cost, energy)
    rebound_violations: int = 0


def simulate(scenario: Scenario, inputs: Inputs | None = None) -> RunResult:
    inputs = inputs or load_inputs(scenario)
    population = synthesize(inputs, scenario)
    prices = inputs.class_prices
    outcomes, spem_totals, violations = {}, [], 0
    for model in scenario.model_set:
        reps = scenario.spem_replications if model == "SPEM" else 1
        for k in range(reps):
            res = run_model(model, population, inputs, scenario, k, prices)
            if k == 0:
                outcomes[model] = res
            if model == "SPEM":
                spem_totals.append(population_totals(population, res, prices))
                violations += sum(rebounds(o) for o in res)
    return RunResult(population, outcomes, spem_totals, violations)


# ---------------------------------------------------------------------------
# CSV export


def _f(x: float) -> str:
    return repr(float(x))


def _money(x: float) -> str:
    return f"{x:.6f}"


def _pct(x: float) -> str:
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _write_csv(path: Path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")
    return path


def write_population(path: Path, population) -> Path:
    rows = ([c.id, c.class_name, c.bus, _f(c.rated_demand), t, _f(c.sampled_lf[t]), _f(c.baseline_profile[t])]
            for c in population for t in range(len(c.baseline_profile)))
    return _write_csv(path, ["customer_id", "class", "bus", "rated_kw", "hour", "lf", "baseline_kw"], rows)


def write_outcomes(out_dir: Path, model: str, population, outcomes) -> list[Path]:
    tag = model.lower()
    rows = ([c.id, t, _f(c.baseline_profile[t]), _f(o.demand_adr[t]), _f(o.delta[t])]
            for c, o in zip(population, outcomes) for t in range(len(o.delta)))
    a = _write_csv(out_dir / f"outcomes_{tag}.csv", ["customer_id", "hour", "baseline_kw", "adr_kw", "delta_kw"], rows)
    rows = ([c.id, c.class_name, _f(o.lambda_used), _f(o.balance_residual), _f(o.curtailed_peak), _f(o.shifted_off)]
            for c, o in zip(population, outcomes))
    b = _write_csv(out_dir / f"summary_{tag}.csv",
                   ["customer_id", "class", "lambda", "residual_kwh", "curtailed_kwh", "shifted_kwh"], rows)
    return [a, b]


def write_spem_replications(out_dir: Path, base: tuple, totals: list) -> list[Path]:
    base_cost, base_energy = base
    rows, cost_pct, energy_pct = [], [], []
    for k, (cost, energy) in enumerate(totals):
        cp, ep = 100 * (cost - base_cost) / base_cost, 100 * (energy - base_energy) / base_energy
        cost_pct.append(cp)
        energy_pct.append(ep)
        rows.append([k, _f(cost), _f(cp), _f(energy), _f(ep)])
    a = _write_csv(out_dir / "spem_replications.csv",
                   ["replication", "total_cost_cents", "cost_pct_change", "total_energy_kwh", "energy_pct_change"],
                   rows)
    summary = [["cost_pct_change", _f(np.mean(cost_pct)), _f(np.std(cost_pct)), len(totals)],
               ["energy_pct_change", _f(np.mean(energy_pct)), _f(np.std(energy_pct)), len(totals)]]
    b = _write_csv(out_dir / "spem_summary.csv", ["quantity", "mean", "std", "replications"], summary)
    return [a, b]


def write_reports(out_dir: Path, inputs: Inputs, population, outcomes: Mapping, spem_totals) -> list[Path]:
    """The five report CSVs, in long format, models in canonical order."""
    prices = inputs.class_prices
    period_rows, class_rows, lf_rows, cs_rows = [], [], [], []
    for model in (m for m in MODELS if m in outcomes):
        res = outcomes[model]
        rep = bill_report(population, res, prices, inputs.partition)
        for cls, periods in rep.per_period.items():
            for p in PERIODS:
                b, a = periods[p]["bdr"], periods[p]["adr"]
                period_rows.append([model, cls, p, _money(b), _money(a), _money(a - b),
                                    _pct(100 * (a - b) / b if b else 0.0)])
        for cls, v in [*rep.per_class.items(), ("Overall", rep.overall)]:
            class_rows.append([model, cls, _money(v["bdr"]), _money(v["adr"]), _money(v["diff"]),
                               _pct(v["pct_change"])])
        bdr, adr = load_factor_curve([c.baseline_profile for c in population], [o.demand_adr for o in res])
        for series, curve in (("bdr", bdr), ("adr", adr)):
            lf_rows.extend([model, series, t, f"{v:.6f}"] for t, v in enumerate(curve))
        for r in curtail_shift_report(population, res, inputs.partition):
            cs_rows.append([model, r["class"], r["period"], _money(r["baseline_kwh"]), _money(r["delta_kwh"]),
                            _pct(r["pct_of_period"]), _pct(r["pct_of_class_energy"])])

    base = population_totals(population, None, prices)
    totals = {m: ([population_totals(population, outcomes[m], prices)] if m != "SPEM" else spem_totals)
              for m in MODELS if m in outcomes}
    comp_rows = [[r.method, _money(r.total_cost), "" if r.diff is None else _money(r.diff), _pct(r.pct_change),
                  _money(r.total_energy), _pct(r.energy_pct_change)] for r in comparison_rows(base, totals)]
    return [
        _write_csv(out_dir / "bills_by_period.csv",
                   ["model", "class", "period", "bdr_cents", "adr_cents", "diff_cents", "pct_change"], period_rows),
        _write_csv(out_dir / "bills_by_class.csv",
                   ["model", "class", "bdr_cents", "adr_cents", "diff_cents", "pct_change"], class_rows),
        _write_csv(out_dir / "comparison.csv",
                   ["method", "total_cost_cents", "diff_cents", "pct_change", "total_energy_kwh",
                    "energy_pct_change"], comp_rows),
        _write_csv(out_dir / "load_factor.csv", ["model", "series", "hour", "load_factor"], lf_rows),
        _write_csv(out_dir / "curtail_shift.csv",
                   ["model", "class", "period", "baseline_kwh", "delta_kwh", "pct_of_period",
                    "pct_of_class_energy"], cs_rows),
    ]


@dataclass(frozen=True)
class RunManifest:
    scenario_hash: str
    seed: int
    files: dict          # model or "population"/"reports" -> list of file names
    wall_clock_s: float
    version: str
    backend: str

    def to_json(self) -> str:
        # wall-clock is left out so identical runs give identical directories
        doc = {"scenario_hash": self.scenario_hash, "seed": self.seed, "files": self.files,
               "version": self.version, "kernel_backend": self.backend}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_scenario(scenario: Scenario) -> RunManifest:
    start = time.perf_counter()
    inputs = load_inputs(scenario)
    result = simulate(scenario, inputs)
    out_dir = Path(scenario.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = {"population": [write_population(out_dir / "population.csv", result.population).name]}
    for model in scenario.model_set:
        names = [p.name for p in write_outcomes(out_dir, model, result.population, result.outcomes[model])]
        if model == "SPEM":
            base = population_totals(result.population, None, inputs.class_prices)
            names += [p.name for p in write_spem_replications(out_dir, base, result.spem_totals)]
        files[model] = names
    files["reports"] = [p.name for p in write_reports(out_dir, inputs, result.population, result.outcomes,
                                                      result.spem_totals)]
    if result.rebound_violations:
        log.warning("%d SPEM customer runs recovered more energy than they curtailed", result.rebound_violations)
    manifest = RunManifest(scenario.fingerprint(), scenario.seed, files, time.perf_counter() - start,
                           __version__, kernels.BACKEND)
    (out_dir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8", newline="\n")
    log.info("run finished in %.2f s, outputs in %s", manifest.wall_clock_s, out_dir)
    return manifest


# ---------------------------------------------------------------------------
# report regeneration from stored outputs


def read_population(path: Path, inputs: Inputs) -> list[Customer]:
    rows: dict[int, dict] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for line, r in enumerate(csv.DictReader(fh), start=2):
            try:
                cid = int(r["customer_id"])
                c = rows.setdefault(cid, {"class": r["class"], "bus": int(r["bus"]), "rated": float(r["rated_kw"]),
                                          "lf": [], "base": []})
                c["lf"].append(float(r["lf"]))
                c["base"].append(float(r["baseline_kw"]))
            except (KeyError, ValueError):
                raise FixtureError(path, "malformed population row", line=line) from None
    return [Customer(id=cid, class_name=c["class"], bus=c["bus"], rated_demand=c["rated"],
                     baseline_profile=np.array(c["base"]), sampled_lf=np.array(c["lf"]))
            for cid, c in rows.items()]


def read_outcomes(out_dir: Path, model: str, population) -> list[DrOutcome]:
    tag = model.lower()
    adr: dict[int, list] = {}
    delta: dict[int, list] = {}
    path = out_dir / f"outcomes_{tag}.csv"
    with open(path, newline="", encoding="utf-8") as fh:
        for line, r in enumerate(csv.DictReader(fh), start=2):
            try:
                cid = int(r["customer_id"])
                adr.setdefault(cid, []).append(float(r["adr_kw"]))
                delta.setdefault(cid, []).append(float(r["delta_kw"]))
            except (KeyError, ValueError):
                raise FixtureError(path, "malformed outcome row", line=line) from None
    summary = {}
    with open(out_dir / f"summary_{tag}.csv", newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            summary[int(r["customer_id"])] = r
    out = []
    for c in population:
        s = summary[c.id]
        out.append(DrOutcome(demand_adr=np.array(adr[c.id]), delta=np.array(delta[c.id]),
                             lambda_used=float(s["lambda"]), balance_residual=float(s["residual_kwh"]),
                             curtailed_peak=float(s["curtailed_kwh"]), shifted_off=float(s["shifted_kwh"])))
    return out


def regenerate_reports(scenario: Scenario, out_dir=None) -> list[Path]:
    out_dir = Path(out_dir or scenario.output_dir)
    inputs = load_inputs(scenario)
    population = read_population(out_dir / "population.csv", inputs)
    outcomes = {m: read_outcomes(out_dir, m, population) for m in MODELS
                if (out_dir / f"outcomes_{m.lower()}.csv").exists()}
    spem_totals = []
    if "SPEM" in outcomes:
        with open(out_dir / "spem_replications.csv", newline="", encoding="utf-8") as fh:
            spem_totals = [(float(r["total_cost_cents"]), float(r["total_energy_kwh"])) for r in csv.DictReader(fh)]
    return write_reports(out_dir, inputs, population, outcomes, spem_totals)
