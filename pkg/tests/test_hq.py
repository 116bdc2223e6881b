import math

import numpy as np
import pytest
from scipy.special import i0 as scipy_i0

from apvar import hq, zerostats as zst
from apvar.arith import euler_phi
from apvar.characters import select_C

N_SMALL = 200_000


@pytest.fixture(scope="module")
def setup3(zero_maps):
    zeros = zero_maps(3)
    weights = hq.weights_map(3, zeros, T_cut=150.0)
    return zeros, weights


@pytest.fixture(scope="module")
def setup5(zero_maps):
    zeros = zero_maps(5)
    weights = hq.weights_map(5, zeros, T_cut=150.0)
    return zeros, weights


def test_i0_against_reference():
    xs = np.concatenate([np.linspace(0.0, 15.0, 200), np.linspace(15.0, 60.0, 100)])
    ref = scipy_i0(xs)
    assert np.max(np.abs(hq.i0(xs) - ref) / ref) < 1e-9
    # seam continuity between series and asymptotic branches
    assert hq.i0(15.0 - 1e-9) == pytest.approx(hq.i0(15.0 + 1e-9), rel=1e-8)
    assert hq.i0(0.0) == 1.0
    assert hq.i0(-3.0) == pytest.approx(hq.i0(3.0), rel=1e-12)


def test_y_weights_bookkeeping(setup3):
    zeros, weights = setup3
    w = weights["3:1"]
    assert np.all(w.weights > 0)
    two_sided = 2.0 * float(np.sum(w.weights**2))
    assert two_sided + w.tail_var == pytest.approx(w.b_closed, abs=1e-12)
    assert w.tail_var > 0  # truncated at T_cut < closed form


def test_sample_y_single_weight_moments():
    toy = hq.YWeights(label="3:1", is_real=True, weights=np.array([0.5]),
                      b_closed=0.5, tail_var=0.0)
    y = hq.sample_y(toy, hq._generator(5, "toy-real"), N_SMALL)
    # E[(2 w cos)^2] = 2 w^2
    se = np.std(y**2) / math.sqrt(N_SMALL)
    assert np.mean(y**2) == pytest.approx(0.5, abs=3 * se)
    toyc = hq.YWeights(label="5:1", is_real=False, weights=np.array([0.5]),
                       b_closed=0.25, tail_var=0.0)
    yc = hq.sample_y(toyc, hq._generator(5, "toy-cplx"), 1000)
    assert np.max(np.abs(np.abs(yc) ** 2 - 0.5)) < 1e-12  # deterministic modulus


def test_sample_y_empty_weights():
    with pytest.raises(ValueError):
        hq.YWeights(label="3:1", is_real=True, weights=np.array([-1.0]),
                    b_closed=0.0, tail_var=0.0)
    empty = hq.YWeights(label="3:1", is_real=True, weights=np.array([]),
                        b_closed=0.0, tail_var=0.0)
    y = hq.sample_y(empty, hq._generator(1, "empty"), 100)
    assert np.all(y == 0.0)


def test_sample_hq_determinism(setup3):
    _, weights = setup3
    b1 = hq.sample_hq(3, weights, seed=42, n=5000)
    b2 = hq.sample_hq(3, weights, seed=42, n=5000)
    assert np.array_equal(b1.values, b2.values)
    b3 = hq.sample_hq(3, weights, seed=43, n=5000)
    assert not np.array_equal(b1.values, b3.values)


def test_sample_hq_mean_matches_exact(setup3):
    _, weights = setup3
    batch = hq.sample_hq(3, weights, seed=7, n=N_SMALL)
    assert np.all(batch.values >= 0)
    exact = zst.mean_hq_exact(3)
    se = batch.values.std() / math.sqrt(N_SMALL)
    assert batch.values.mean() == pytest.approx(exact, abs=3 * se)


def test_sample_hq_missing_weights(setup5):
    _, weights = setup5
    partial = {k: v for k, v in list(weights.items())[:1]}
    with pytest.raises(KeyError):
        hq.sample_hq(5, partial, seed=1, n=10)


def test_variance_bookkeeping(setup5):
    """MC Var[Y] plus nothing extra reproduces b (real) / 2b (complex)."""
    _, weights = setup5
    for w in weights.values():
        y = hq.sample_y(w, hq._generator(13, w.label, "varbook"), N_SMALL)
        target = w.b_closed if w.is_real else 2.0 * w.b_closed
        sq = np.abs(y) ** 2
        se = sq.std() / math.sqrt(N_SMALL)
        assert sq.mean() == pytest.approx(target, abs=3 * se), w.label


def test_mgf_bessel_even_and_at_zero(setup3):
    _, weights = setup3
    w = weights["3:1"]
    assert hq.mgf_y_bessel(w, 0.0) == 1.0
    assert hq.mgf_y_bessel(w, 0.7) == hq.mgf_y_bessel(w, -0.7)


def test_mgf_bessel_single_weight():
    toy = hq.YWeights(label="3:1", is_real=True, weights=np.array([0.5]),
                      b_closed=0.5, tail_var=0.0)
    assert hq.mgf_y_bessel(toy, 2.0) == pytest.approx(scipy_i0(2.0), rel=1e-10)


def test_mgf_bessel_vs_mc(setup5):
    _, weights = setup5
    for w in weights.values():
        y = hq.sample_y(w, hq._generator(17, w.label, "mgf"), N_SMALL)
        re = np.real(y) if not w.is_real else y
        for z in (0.2, 0.5, 1.0):
            mc = float(np.mean(np.exp(z * re)))
            prod = hq.mgf_y_bessel(w, z) * hq.mgf_tail_factor(w, z)
            assert mc == pytest.approx(prod, rel=0.01), (w.label, z)


def test_mgf_overflow_guard():
    toy = hq.YWeights(label="3:1", is_real=True, weights=np.array([1.0]),
                      b_closed=2.0, tail_var=0.0)
    with pytest.raises(OverflowError):
        hq.mgf_y_bessel(toy, 100.0)


def test_moment_bound(setup5):
    _, weights = setup5
    for w in weights.values():
        y = hq.sample_y(w, hq._generator(19, w.label, "mom"), N_SMALL)
        for n in (1, 2, 3):
            mc, bound = hq.moment_bound_check(w, n, y)
            assert mc <= bound, (w.label, n)
    with pytest.raises(ValueError):
        hq.moment_bound_check(next(iter(weights.values())), 7, np.ones(10))


def test_mgf_hq_bound(setup5):
    _, weights = setup5
    batch = hq.sample_hq(5, weights, seed=23, n=N_SMALL)
    for sign in (+1, -1):
        t = sign / (80.0 * math.log(5))
        mc, bound = hq.mgf_hq_bound_check(5, batch, t)
        assert mc <= bound * 1.01
    with pytest.raises(ValueError):
        hq.mgf_hq_bound_check(5, batch, 1.0)


def test_chernoff_upper_values():
    q = 101  # phi = 100: eps with eps^2 phi = 751 sits inside the range
    eps = math.sqrt(751.0 / euler_phi(q))
    assert hq.chernoff_upper(q, eps) == pytest.approx(2.0 / math.e, rel=1e-12)
    assert hq.chernoff_upper(q, 0.0) == 2.0
    with pytest.raises(ValueError):
        hq.chernoff_upper(q, 10.0)


def test_gaussian_reference_values():
    # eps sqrt(phi/2) = 1 -> two-sided standard normal tail at 1
    q = 5  # phi = 4
    eps = math.sqrt(2.0 / euler_phi(q))
    assert hq.gaussian_reference_tail(q, eps) == pytest.approx(0.3173, abs=2e-4)
    assert hq.gaussian_reference_tail(q, 50.0) < 1e-12


def test_paley_zygmund_fixtures():
    lhs, rhs = hq.paley_zygmund(np.full(1000, 3.0), 0.5)
    assert lhs == 1.0 and rhs == pytest.approx(0.25)
    rng = np.random.Generator(np.random.Philox(key=1))
    for p in (0.1, 0.5, 0.9):
        bern = (rng.random(100000) < p).astype(float)
        for a in (0.3, 0.5, 0.9):
            lhs, rhs = hq.paley_zygmund(bern, a)
            assert lhs >= rhs - 3.0 * math.sqrt(0.25 / bern.size)


def test_tail_report(setup5):
    _, weights = setup5
    batch = hq.sample_hq(5, weights, seed=29, n=N_SMALL)
    reports = hq.tail_report(5, batch, [0.1, 1.0, 8.0])
    for r in reports:
        assert 0.0 <= r.empirical <= 1.0
        assert r.chernoff > 0 and r.gaussian >= 0
    assert reports[-1].empirical == 0.0  # huge eps


def test_lower_bound_evaluator(setup5):
    _, weights = setup5
    batch = hq.sample_hq(5, weights, seed=31, n=N_SMALL)
    out = hq.lower_bound_evaluate(5, batch, 0.5)
    assert out["t"] == pytest.approx(1.4 * 0.5 / math.log(5))
    assert out["mean_x"] > 0 and out["second_x"] >= out["mean_x"] ** 2
    assert 0.0 <= out["empirical_upper_dev"] <= 1.0
