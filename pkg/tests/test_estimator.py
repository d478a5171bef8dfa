import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uav_hoc import InvalidParameter
from uav_hoc.campaign import HocDataset, HocSample
from uav_hoc.estimator import (crlb, estimate_velocity, evaluate, fisher_information,
                               rate_coefficient, regularity_check, score, write_reports)
from uav_hoc.statistics import FitParams, poisson_pmf

REF_FIT = FitParams()


def test_rate_coefficient():
    assert rate_coefficient(REF_FIT, 6, 500) == pytest.approx(0.2417 * 6 ** 0.5278 * 500 / 3600)
    assert rate_coefficient(REF_FIT, 6, 500) == pytest.approx(0.086424, abs=1e-5)
    assert rate_coefficient(REF_FIT, 10, 500) == pytest.approx(0.113172, abs=1e-5)
    flat = FitParams(0.3, 0.0)
    assert rate_coefficient(flat, 2, 100) == rate_coefficient(flat, 10, 100)
    with pytest.raises(InvalidParameter):
        rate_coefficient(REF_FIT, 0, 100)
    with pytest.raises(InvalidParameter):
        rate_coefficient(REF_FIT, 6, 0)


def test_estimate_velocity():
    k = rate_coefficient(REF_FIT, 6, 500)
    assert estimate_velocity(0, k) == 0
    assert estimate_velocity(6, k) == pytest.approx(6 / k)
    assert estimate_velocity(6, k) == pytest.approx(69.42, abs=0.01)
    assert estimate_velocity([6, 6, 6], k) == estimate_velocity(6, k)


@given(st.lists(st.integers(0, 100), min_size=1, max_size=30), st.randoms())
def test_estimate_depends_only_on_counts(counts, r):
    shuffled = counts[:]
    r.shuffle(shuffled)
    assert estimate_velocity(counts, 0.1) == pytest.approx(estimate_velocity(shuffled, 0.1))


def test_fisher_and_crlb():
    k = rate_coefficient(REF_FIT, 6, 500)
    assert fisher_information(68, k) == pytest.approx(0.0012709, abs=1e-7)
    assert fisher_information(68, k) * crlb(68, k) == pytest.approx(1.0)
    k2 = rate_coefficient(REF_FIT, 6, 1000)
    assert fisher_information(68, k2) == pytest.approx(2 * fisher_information(68, k))
    assert crlb(1e-9, k) < 1e-6
    with pytest.raises(InvalidParameter):
        crlb(0, k)


def test_fisher_matches_expected_squared_score():
    for v, lam, t in [(30, 6, 100), (160, 10, 500), (3, 2, 100)]:
        k = rate_coefficient(REF_FIT, lam, t)
        h = np.arange(400)
        p = poisson_pmf(k * v, h)
        assert np.sum(p * score(h, v, k) ** 2) == pytest.approx(fisher_information(v, k), rel=1e-9)


def test_score_matches_finite_difference():
    k, v, h = 0.05, 60.0, 4
    eps = 1e-5
    fd = (math.log(poisson_pmf(k * (v + eps), h)) - math.log(poisson_pmf(k * (v - eps), h))) / (2 * eps)
    assert score(h, v, k) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("v, lam, t", [(30, 6, 100), (160, 10, 500)])
def test_regularity(v, lam, t):
    assert abs(regularity_check(v, rate_coefficient(REF_FIT, lam, t), 200)) < 1e-10


def test_regularity_truncation_warns():
    k = rate_coefficient(REF_FIT, 6, 100)
    with pytest.warns(RuntimeWarning):
        r = regularity_check(30, k, 1)
    assert abs(r) > 1e-4


@settings(max_examples=100)
@given(st.floats(1, 200), st.floats(1, 200), st.floats(0.5, 20), st.floats(0.5, 20),
       st.floats(10, 1000), st.floats(10, 1000))
def test_crlb_monotone_in_v_lambda_t(v1, v2, l1, l2, t1, t2):
    c = lambda v, l, t: crlb(v, rate_coefficient(REF_FIT, l, t))
    if v1 < v2:
        assert c(v1, 6, 100) < c(v2, 6, 100)
    if l1 < l2:
        assert c(60, l1, 100) > c(60, l2, 100)
    if t1 < t2:
        assert c(60, 6, t1) > c(60, 6, t2)


def _dataset(counts, v=60.0, lam=10.0, t=100.0):
    return HocDataset((v, lam, t), [HocSample(i, int(c), i) for i, c in enumerate(counts)])


def test_evaluate_constant_counts():
    rep = evaluate(_dataset([5] * 10), REF_FIT)
    k = rate_coefficient(REF_FIT, 10, 100)
    assert rep.var_vhat == 0
    assert rep.rmse == pytest.approx(abs(5 / k - 60))
    assert rep.crlb == pytest.approx(60 / k)
    with pytest.raises(InvalidParameter):
        evaluate(_dataset([5]), REF_FIT)


def test_evaluate_under_model(rng):
    v, lam, t = 60.0, 10.0, 500.0
    k = rate_coefficient(REF_FIT, lam, t)
    rep = evaluate(_dataset(rng.poisson(k * v, 100_000), v, lam, t), REF_FIT)
    se = math.sqrt(v / k / rep.n)
    assert abs(rep.mean_vhat - v) < 3 * se
    assert rep.var_vhat / (v / k) == pytest.approx(1.0, abs=0.1)


def test_write_reports(tmp_path):
    rep = evaluate(_dataset([1, 2, 3]), REF_FIT)
    write_reports(tmp_path / "r.csv", [rep])
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "v_true,lambda_gbs,T_s,n,mean_vhat,var_vhat,crlb,rmse"
    assert lines[1].startswith("60.0,10.0,100.0,3,")
