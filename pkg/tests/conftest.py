from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from elastic_dr.customers import Customer
from elastic_dr.scenario import load_inputs, load_scenario, simulate
from elastic_dr.tariff import ClassPrice, PeriodPartition

DATA = Path(__file__).resolve().parents[1] / "src" / "elastic_dr" / "data"
SCENARIO_PATH = DATA / "scenario.json"


def two_state():
    """Hour 0 off-peak at 3 c/kWh and 2 kW, hour 1 peak at 8 c/kWh and 10 kW; nominal 5."""
    part = PeriodPartition(peak_hours=frozenset({1}), valley_hours=frozenset(), off_peak_hours=frozenset({0}),
                           horizon=2)
    price = ClassPrice(kappa=0.0, class_price=np.array([3.0, 8.0]), class_nominal=5.0)
    base = np.array([2.0, 10.0])
    return base, price, part


def make_customer(profile, class_name="X", cid=1) -> Customer:
    profile = np.asarray(profile, dtype=float)
    return Customer(id=cid, class_name=class_name, bus=1, rated_demand=float(profile.max()),
                    baseline_profile=profile, sampled_lf=profile / profile.max())


@pytest.fixture(scope="session")
def shipped_scenario():
    return load_scenario(SCENARIO_PATH)


@pytest.fixture(scope="session")
def shipped_inputs(shipped_scenario):
    return load_inputs(shipped_scenario)


@pytest.fixture(scope="session")
def shipped_run(shipped_scenario, shipped_inputs):
    return simulate(shipped_scenario, shipped_inputs)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
