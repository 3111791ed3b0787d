import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import comb, gammaln, logsumexp
from scipy.stats import binom

from inconclusive.errors import EmptySequence, InvalidThresholds, OverlappingSets, TooManyTypes
from inconclusive.regions import ExponentRegions
from inconclusive.states import bernoulli
from inconclusive.types_engine import (
    TypeVector, enumerate_types, eval_hoeffding_test, eval_reject_test, eval_stein_test,
    eval_threshold_test, log_prob_type_class, sanov_log_prob, type_count, type_of,
)

LN2 = math.log(2)


def test_type_of_examples():
    assert tuple(type_of([0, 0, 1], 2).counts) == (2, 1)
    assert tuple(type_of([0] * 5, 2).counts) == (5, 0)
    t = type_of([0, 1, 0, 1, 2, 2, 2], 3)
    assert tuple(t.counts) == (2, 2, 3) and t.n == 7
    with pytest.raises(EmptySequence):
        type_of([], 2)
    with pytest.raises(ValueError):
        type_of([0, 3], 2)


@pytest.mark.parametrize("n, k, count", [(3, 2, 4), (2, 3, 6), (10, 2, 11), (7, 4, 120)])
def test_enumeration_count_and_order(n, k, count):
    types = [tuple(t.counts) for t in enumerate_types(n, k)]
    assert len(types) == count == type_count(n, k)
    assert types == sorted(types)
    assert len(set(types)) == count
    assert all(sum(t) == n for t in types)
    assert count <= (n + 1) ** k


def test_enumeration_refuses_budget():
    with pytest.raises(TooManyTypes):
        next(iter(enumerate_types(400, 6)))


def test_log_prob_type_class_examples():
    p = bernoulli(0.9)
    assert log_prob_type_class(TypeVector(np.array([10, 0])), p) == pytest.approx(10 * math.log(0.9))
    assert log_prob_type_class(TypeVector(np.array([8, 2])), p) == pytest.approx(
        math.log(45 * 0.9 ** 8 * 0.1 ** 2), rel=1e-13)
    total = logsumexp([log_prob_type_class(t, p) for t in enumerate_types(10, 2)])
    assert abs(math.expm1(total)) <= 1e-12


@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_type_class_matches_multinomial(n, seed):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(3)) * 0.97 + 0.01
    p /= p.sum()
    counts = rng.multinomial(n, p)
    ref = gammaln(n + 1) - np.sum(gammaln(counts + 1)) + np.sum(counts * np.log(p))
    assert log_prob_type_class(TypeVector(counts), p) == pytest.approx(ref, abs=1e-11)


def test_stein_binomial_example(bern_p, bern_q):
    st_ = eval_stein_test(bern_p, bern_q, 10, delta=0.15)
    near_p = sum(comb(10, k) * 0.9 ** k * 0.1 ** (10 - k) for k in range(8, 11))
    # the ball around Q = (0.2, 0.8) holds k = 1, 2, 3 and also counts as conclusive
    near_q = sum(comb(10, k) * 0.9 ** k * 0.1 ** (10 - k) for k in range(1, 4))
    assert math.exp(st_.log_pi_P) == pytest.approx(near_p + near_q, abs=1e-12)
    assert round(near_p, 4) == 0.9298
    assert math.exp(st_.log_alpha_bar) == pytest.approx(near_q / (near_p + near_q), rel=1e-10)
    assert st_.exact and st_.flags == ()


def test_outcomes_normalise(bern_p, bern_q):
    for n, delta in ((10, 0.15), (57, None), (300, None)):
        s = eval_stein_test(bern_p, bern_q, n, delta=delta)
        assert abs(np.logaddexp(s.log_pi_P, s.log_incon_P)) <= 1e-12
        assert abs(np.logaddexp(s.log_pi_Q, s.log_incon_Q)) <= 1e-12
        assert all(v <= 1e-12 for v in (s.log_alpha_bar, s.log_beta_bar, s.log_pi_P, s.log_pi_Q))


def test_stein_overlap_rejected(bern_p):
    for delta in (0.01, 0.2):
        with pytest.raises(OverlappingSets):
            eval_stein_test(bern_p, bern_p, 20, delta=delta)


def test_stein_exponents_improve_with_n(bern_p, bern_q):
    d = ExponentRegions(bern_p, bern_q).D("rs")
    small = eval_stein_test(bern_p, bern_q, 200)
    big = eval_stein_test(bern_p, bern_q, 2000)
    assert abs(big.exponent("beta_bar") - d) < abs(small.exponent("beta_bar") - d)
    assert math.exp(big.log_pi_P) >= 0.99 and math.exp(big.log_pi_Q) >= 0.99


def test_reject_test_inconclusive_exponent(bern_p, bern_q):
    k = l = 0.1 * LN2
    s = eval_reject_test(bern_p, bern_q, 2000, k, l)
    assert s.exponent("incon_P") >= 0.9 * k
    assert s.exponent("incon_Q") >= 0.9 * l
    with pytest.raises(InvalidThresholds):
        eval_reject_test(bern_p, bern_q, 50, 5.0, 1.0)


def test_empty_guess_set_flagged(bern_p, bern_q):
    s = eval_threshold_test(bern_p, bern_q, 40, math.inf, 0.1)
    assert "empty_guess_rho" in s.flags
    assert s.log_beta_bar == -math.inf
    with pytest.raises(InvalidThresholds):
        eval_threshold_test(bern_p, bern_q, 40, 0.1, 0.2)


def test_hoeffding_test_is_deterministic(bern_p, bern_q):
    s = eval_hoeffding_test(bern_p, bern_q, 100, 0.3)
    assert s.log_incon_P == -math.inf and s.log_incon_Q == -math.inf
    assert s.log_pi_P == pytest.approx(0.0, abs=1e-12)


def test_monte_carlo_fallback_is_flagged():
    p = np.array([0.3, 0.2, 0.15, 0.15, 0.1, 0.1])
    q = np.array([0.05, 0.05, 0.1, 0.2, 0.25, 0.35])
    with pytest.raises(TooManyTypes):
        eval_stein_test(p, q, 400, delta=0.1)
    s = eval_stein_test(p, q, 400, delta=0.1, exact=False, mc_samples=2000, seed=1)
    assert not s.exact and "monte_carlo" in s.flags
    again = eval_stein_test(p, q, 400, delta=0.1, exact=False, mc_samples=2000, seed=1)
    assert again == s


def test_sanov_examples(bern_p, bern_q):
    assert sanov_log_prob(bern_p, 50.0, bern_q, 30) == pytest.approx(0.0, abs=1e-12)
    assert sanov_log_prob(bern_p, 0.0, bern_p, 10) == pytest.approx(math.log(binom.pmf(9, 10, 0.9)), rel=1e-12)
    n, kk = 300, 0.2
    val = sanov_log_prob(bern_q, kk, bern_q, n, complement=True)
    assert val <= 2 * math.log(n + 1) - n * kk


def test_sanov_matches_hoeffding_exponent(bern_p, bern_q):
    k = 0.1 * LN2
    h_k = ExponentRegions(bern_p, bern_q).hoeffding(k, "sr")
    n = 2000
    val = -sanov_log_prob(bern_q, h_k, bern_q, n, complement=True) / n
    assert val == pytest.approx(h_k, rel=0.10)


def test_statistics_serialisation(bern_p, bern_q):
    s = eval_threshold_test(bern_p, bern_q, 40, math.inf, 0.1)
    d = s.to_dict()
    assert d["log_beta_bar"] == "-inf"
    assert d["base2"]["log2_pi_P"] == pytest.approx(s.log_pi_P / LN2)
    assert '"flags"' in s.to_json()
