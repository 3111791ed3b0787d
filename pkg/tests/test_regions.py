import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy.optimize import brentq

from conftest import qubit_pairs
from inconclusive.errors import InputError
from inconclusive.regions import (
    ExponentRegions, RegionBoundary, boundary_scan, d_plus, d_plus_simplification, han_kobayashi,
    hoeffding, milan_threshold,
)

LN2 = math.log(2)
# Frozen dense-grid oracle for K* on the Bernoulli pair (P = (.9,.1), Q = (.2,.8)), nats.
K_STAR_OUTSIDE = 0.0010847941051249103
# Frozen values of H_A(Q||P) in nats (mpmath, 40 digits, variational and dual forms agree).
HOEFFDING_QP = {0.2: 0.51256381094679501063, 0.5: 0.23005366026355845449}


def kl(a, b):
    return float(np.sum(a * np.log(a / b)))


def variational_hoeffding(a, p, q):
    """min { D(R||q) : D(R||p) <= a } over binary R.

    The minimiser sits on the constraint boundary between ``p`` and ``q``.
    """
    def d(r, x):
        return r * math.log(r / x[0]) + (1 - r) * math.log((1 - r) / x[1])

    r = brentq(lambda r: d(r, p) - a, q[0], p[0], xtol=1e-15)
    return d(r, q)


@pytest.fixture
def reg(bern_p, bern_q):
    return ExponentRegions(bern_p, bern_q)


def test_hoeffding_against_variational_oracle(reg, bern_p, bern_q):
    p, q = bern_p.probs, bern_q.probs
    for a, frozen in HOEFFDING_QP.items():
        assert reg.hoeffding(a, "sr") == pytest.approx(frozen, abs=1e-9)
        assert variational_hoeffding(a, p, q) == pytest.approx(frozen, abs=1e-12)
    assert hoeffding(0.2, bern_q, bern_p) == pytest.approx(HOEFFDING_QP[0.2], abs=1e-9)


def test_hoeffding_endpoints(reg, bern_p, bern_q):
    p, q = bern_p.probs, bern_q.probs
    assert reg.hoeffding(0.0, "sr") == pytest.approx(kl(p, q), abs=1e-9)
    assert reg.hoeffding(kl(q, p), "sr") == pytest.approx(0.0, abs=1e-9)
    assert reg.hoeffding(kl(q, p) + 0.5, "sr") == 0.0


def test_bernoulli_examples_in_bits(reg):
    assert reg.D("rs") / LN2 == pytest.approx(1.652932501, abs=1e-8)
    assert reg.D("sr") / LN2 == pytest.approx(1.966015, abs=1e-6)
    assert reg.d_plus() / LN2 == pytest.approx(4.652932501, abs=1e-6)
    assert reg.milan_threshold("rs") / LN2 == pytest.approx(math.log2(5), abs=1e-6)
    assert reg.han_kobayashi(5 * LN2, "rs") / LN2 == pytest.approx(5 - math.log2(4.5), abs=1e-6)
    holds, lhs, rhs = reg.d_plus_simplification()
    assert holds and lhs == pytest.approx(reg.d_plus(), abs=1e-8)


def test_module_wrappers_argument_order(bern_p, bern_q):
    reg = ExponentRegions(bern_p, bern_q)
    assert d_plus(bern_q, bern_p) == pytest.approx(reg.d_plus())
    assert d_plus_simplification(bern_q, bern_p)[0]
    assert han_kobayashi(1.0, bern_p, bern_q) == pytest.approx(reg.han_kobayashi(1.0, "rs"))
    assert milan_threshold(bern_p, bern_q) == pytest.approx(reg.milan_threshold("rs"))


def test_han_kobayashi_linear_beyond_threshold(reg):
    r0 = reg.milan_threshold("rs")
    dmax = reg.D_max("rs")
    for r in (r0 + 0.1, r0 + 1.0):
        assert reg.han_kobayashi(r, "rs") == pytest.approx(r - dmax, abs=1e-7)
    assert reg.han_kobayashi(reg.D("rs") * 0.9, "rs") == 0.0


def test_min_conclusiveness_exponent_frozen(reg):
    a = reg.D("sr") + 0.2
    b0 = reg.onesided_boundary(a)
    assert reg.min_conclusiveness_exponent(a, b0 + 0.05) == pytest.approx(K_STAR_OUTSIDE, abs=1e-9)
    assert reg.min_conclusiveness_exponent(a, b0 - 0.01) == 0.0
    assert reg.min_conclusiveness_exponent(reg.d_omega, 0.01) == math.inf


@pytest.mark.parametrize("frac", [0.1, 0.4, 0.7, 0.95])
def test_min_conclusiveness_straddles_onesided_boundary(reg, frac):
    a = frac * reg.d_plus()
    b0 = reg.onesided_boundary(a)
    if b0 > 0.02:
        assert reg.min_conclusiveness_exponent(a, b0 - 0.02) == 0.0
    assert reg.min_conclusiveness_exponent(a, b0 + 0.02) > 0.0


def test_conclusive_region_at_zero_is_the_rectangle(reg):
    d_rs, d_sr = reg.D("rs"), reg.D("sr")
    for a in np.linspace(0, 1.5 * d_sr, 15):
        for b in np.linspace(0, 1.5 * d_rs, 15):
            expected = a <= d_sr + 1e-12 and b <= d_rs + 1e-12
            assert reg.conclusive_region(a, b, 0.0, 0.0).inside == expected


def test_conclusive_region_grows_with_k_and_l(reg):
    a, b = reg.D("sr") + 0.1, reg.D("rs") + 0.1
    assert not reg.conclusive_region(a, b, 0.0, 0.0).inside
    assert reg.conclusive_region(a, b, 0.5, 0.5).inside


def test_monotonicity_on_grids(reg):
    grid = np.linspace(0.0, reg.D("sr") * 1.2, 20)
    h = [reg.hoeffding(a, "sr") for a in grid]
    assert np.all(np.diff(h) <= 1e-9)
    hk = [reg.han_kobayashi(r, "sr") for r in np.linspace(0, 4, 20)]
    assert np.all(np.diff(hk) >= -1e-9)
    zs = [reg.symmetric_boundary(z) for z in np.linspace(0, 3, 20)]
    assert np.all(np.diff(zs) >= -1e-9)


@settings(max_examples=10)
@given(qubit_pairs())
def test_nesting_of_regimes(pair):
    reg = ExponentRegions(*pair)
    grid = np.linspace(0.0, reg.D("sr"), 12)
    for a in grid:
        det = reg.hoeffding(a, "sr")
        rect = reg.D("rs")
        one = reg.onesided_boundary(a)
        assert det <= rect + 1e-9
        assert rect <= one + 1e-9


@settings(max_examples=10)
@given(qubit_pairs())
def test_quantum_reject_envelopes_ordered(pair):
    reg = ExponentRegions(*pair)
    k = l = 0.05
    for a in np.linspace(0.0, reg.D("sr"), 6):
        rb = reg.quantum_reject_region(a, k, l)
        assert rb.achievable <= rb.converse + 1e-12
        assert rb.gap >= 0


def test_quantum_reject_tight_for_commuting(reg):
    k = l = 0.1 * LN2
    for a in np.linspace(0.0, reg.D("sr"), 8):
        rb = reg.quantum_reject_region(a, k, l)
        assert rb.gap == pytest.approx(0.0, abs=1e-9)
        assert rb.achievable == pytest.approx(reg.classical_reject_region(a, k, l), abs=1e-9)


def test_reject_branches(reg):
    k = l = 0.1 * LN2
    assert reg.reject_branch(0.05 * LN2, k, l) == "hoeffding_low"
    h_l = reg.hoeffding(l, "rs")
    assert reg.reject_branch(0.5 * (k + h_l), k, l) == "boosted"
    assert reg.reject_branch(h_l + 0.1, k, l) == "hoeffding_high"


def test_symmetric_examples(reg):
    assert reg.symmetric_boundary(0.0, "average") / LN2 == pytest.approx(1.966015, abs=1e-6)
    assert reg.symmetric_boundary(0.0, "maximal") / LN2 == pytest.approx(1.652933, abs=1e-6)
    assert reg.symmetric_boundary(100 * LN2, "average") / LN2 == pytest.approx(3.0, abs=1e-3)
    with pytest.raises(InputError):
        reg.symmetric_boundary(-1.0)
    with pytest.raises(InputError):
        reg.symmetric_boundary(1.0, "median")


def test_scan_endpoints_and_roundtrip(bern_p, bern_q):
    reg = ExponentRegions(bern_p, bern_q)
    bd = boundary_scan("deterministic_hoeffding", bern_p, bern_q, samples=9)
    assert bd.y[0] == pytest.approx(reg.D("rs"), abs=1e-9)
    assert bd.x[-1] == pytest.approx(reg.D("sr"))
    assert bd.y[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(np.diff(bd.x) > 0)
    back = RegionBoundary.from_json(bd.to_json())
    assert np.array_equal(back.x, bd.x) and np.array_equal(back.y, bd.y)
    assert back.meta == bd.meta
    lines = bd.to_csv().splitlines()
    assert lines[0] == "x,y" and len(lines) == 10
    assert float(lines[3].split(",")[1]) == bd.y[2]
    rect = reg.boundary_scan("high_conclusiveness", 5)
    assert rect.x[-1] == pytest.approx(reg.D("sr")) and np.allclose(rect.y, reg.D("rs"))
    one = reg.boundary_scan("onesided", 7)
    assert one.y[0] == pytest.approx(reg.D("rs")) and one.y[-1] == pytest.approx(0.0, abs=1e-7)
    assert one.meta["clipped"] is False
    sym = reg.boundary_scan("symmetric", 4, mode="maximal", Z_max=2.0)
    assert sym.x_label == "Z" and sym.y[0] == pytest.approx(reg.D("rs"))
    bits = bd.scaled(1 / LN2)
    assert bits.y[0] == pytest.approx(1.652932501, abs=1e-8)


def test_slice_scan_flags_clipping(reg):
    slice_ = reg.boundary_scan("conclusive_KL_slice", 4, K=0.0, L=10.0)
    assert slice_.meta["clipped"] is True
    assert np.all(slice_.y == 0.0)


def test_scan_rejects_bad_requests(reg):
    with pytest.raises(InputError):
        reg.boundary_scan("onesided", 1)
    with pytest.raises(InputError):
        reg.boundary_scan("nope", 5)


def test_region_examples(reg, bern_p, bern_q):
    assert hoeffding(0.0, bern_q, bern_p) == pytest.approx(reg.D("rs"), abs=1e-9)
    assert hoeffding(2.0 * LN2, bern_q, bern_p) == 0.0
    assert hoeffding(0.3, bern_p, bern_p) == 0.0
    assert han_kobayashi(0.0, bern_p, bern_q) == 0.0
    assert han_kobayashi(reg.D("rs"), bern_p, bern_q) == pytest.approx(0.0, abs=1e-9)
    res = reg.conclusive_region(0.0, 0.0, 0.0, 0.0)
    assert res.inside
    assert (res.slack_a, res.slack_b) == pytest.approx((reg.D("sr"), reg.D("rs")), abs=1e-9)
    assert not reg.conclusive_region(reg.D("sr") + 0.01, 0.0, 0.0, 0.0).inside
    assert reg.min_conclusiveness_exponent(0.0, 0.0) == 0.0
    assert reg.onesided_boundary(0.0) == pytest.approx(reg.D("rs"), abs=1e-12)
    assert reg.onesided_boundary(reg.D("sr")) == pytest.approx(reg.D("rs"), abs=1e-9)
    assert reg.onesided_boundary(reg.d_plus()) == pytest.approx(0.0, abs=1e-7)


def test_projective_cap_excludes_far_points(reg):
    a = 0.6 * reg.d_omega
    b = reg.d_omega - a + 0.01
    for k in np.linspace(0, 10, 6):
        for l in np.linspace(0, 10, 6):
            assert not reg.conclusive_region(a, b, k, l).inside


@settings(max_examples=10)
@given(qubit_pairs())
def test_d_plus_at_least_sum_of_relative_entropies(pair):
    reg = ExponentRegions(*pair)
    assert reg.d_plus() >= reg.D("rs") + reg.D("sr") - 1e-8
    assert reg.d_plus() <= reg.D("rs") + reg.D_max("sr") + 1e-9


def test_classical_reject_examples(reg):
    k = l = 0.1 * LN2
    a = 1.0 * LN2
    assert reg.reject_branch(a, k, l) == "boosted"
    b = reg.classical_reject_region(a, k, l)
    assert b == pytest.approx(reg.hoeffding(k, "sr"), abs=1e-12)
    assert b > reg.hoeffding(a, "sr")
    tiny = 1e-6
    assert reg.classical_reject_region(0.5 * tiny, tiny, l) == pytest.approx(reg.hoeffding(0.5 * tiny, "sr"))
    assert reg.classical_reject_region(10.0, k, l) == 0.0


def test_quantum_reject_identical_and_gap_reported(pinch_rho, pinch_sigma):
    same = ExponentRegions(pinch_rho, pinch_rho).quantum_reject_region(0.1, 0.05, 0.05)
    assert (same.achievable, same.converse) == (0.0, 0.0)
    rb = ExponentRegions(pinch_rho, pinch_sigma).quantum_reject_region(0.5 * LN2, 0.1 * LN2, 0.1 * LN2)
    assert 0.0 <= rb.achievable <= rb.converse
    assert rb.gap >= 0.0
