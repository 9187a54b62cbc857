import numpy as np
import pytest

from elastic_dr import kernels
from elastic_dr.rng import derive_seed, stream

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def instance(seed, T=24):
    rng = np.random.default_rng(seed)
    D0 = rng.uniform(0.5, 20, T)
    E = rng.uniform(0, 0.2, (T, T))
    np.fill_diagonal(E, -rng.uniform(0.05, 0.8, T))
    price = rng.uniform(1, 12, T)
    peak = (rng.random(T) < 0.4).astype(np.uint8)
    return D0, E, price, peak


def test_selected_backend_is_listed():
    assert kernels.BACKEND in BACKENDS


@needs_both
def test_truncnorm_draws_bit_identical():
    mean = np.linspace(0.2, 0.9, 500)
    sd = 0.1 * mean
    outs, states = [], []
    for mod in BACKENDS.values():
        g = np.random.default_rng(42)
        out = np.empty(500)
        assert mod.truncnorm_fill(g.bit_generator, mean, sd, mean - sd, mean + sd, out, 10_000) == -1
        outs.append(out)
        states.append(g.bit_generator.state)
    assert np.array_equal(outs[0], outs[1])
    assert states[0] == states[1]


@needs_both
@pytest.mark.parametrize("seed", range(10))
def test_respond_and_psi_agree(seed):
    D0, E, price, peak = instance(seed)
    results = []
    for mod in BACKENDS.values():
        out = np.empty_like(D0)
        n = mod.respond_into(D0, E, price, 5.0, 0.3, 0.0, out)
        results.append((out, n, mod.psi_at(D0, E, price, 5.0, 0.3, 0.0, peak)))
    (a, na, pa), (b, nb, pb) = results
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-13)
    assert na == nb and pa == pytest.approx(pb, rel=1e-10, abs=1e-10)


@needs_both
def test_bisection_agrees():
    D0, E, price, peak = instance(3)
    lams = [m.bisect_lambda(D0, E, price, 5.0, 0.0, peak, -50.0, 50.0, 1e-10, 200) for m in BACKENDS.values()]
    assert lams[0] == pytest.approx(lams[1], abs=1e-9)


def test_rejection_cap_reports_index():
    mod = BACKENDS["python"]
    out = np.empty(2)
    g = np.random.default_rng(0)
    failed = mod.truncnorm_fill(g.bit_generator, np.array([0.5, 0.5]), np.array([0.1, 0.1]),
                                np.array([0.4, 0.9]), np.array([0.6, 0.9 + 1e-15]), out, 50)
    assert failed == 1


def test_seed_derivation_is_stable():
    assert derive_seed(2024, "population") == derive_seed(2024, "population")
    assert derive_seed(2024, "gbm", 0, 1) != derive_seed(2024, "gbm", 1, 0)
    a = stream(1, "x").random(3)
    assert np.array_equal(a, stream(1, "x").random(3))
