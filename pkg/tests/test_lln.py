import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxitive.core import DomainError
from maxitive.corpus import random_affine_scenario, scenario_corpus
from maxitive.lln import (
    PsiFunction,
    check_linear_expectation_remark,
    check_thm33,
    check_thm34,
    check_thm35,
    horizon_moments,
    psi_eval,
    run_lln,
)
from maxitive.scenario import parse_scenario

LINEAR = PsiFunction("power", 1.0)


def test_psi_examples():
    assert psi_eval(PsiFunction("power", 1.0), 400) == 400.0
    assert psi_eval(PsiFunction("power", 2.0, scale=0.5), 4) == 8.0
    assert psi_eval(PsiFunction("log-power", 1.0), 1) == math.log(2)
    assert psi_eval(PsiFunction("table", table=(2, 4, 8)), 3) == 8.0


def test_psi_errors():
    with pytest.raises(DomainError):
        psi_eval(LINEAR, 0)
    with pytest.raises(DomainError):
        PsiFunction("table", table=(2, 4, 8)).values(4)
    with pytest.raises(DomainError):
        PsiFunction("table", table=(1, 0, 2)).values(3)
    with pytest.raises(DomainError):
        PsiFunction("exp")
    with pytest.raises(DomainError):
        PsiFunction("power", 1.0, scale=0.0)


def test_s2_moments(s2):
    hm = horizon_moments(s2.sequence(), s2.distribution, 1000)
    k = np.arange(1, 1001)
    assert np.allclose(hm.variances, 0.5 * k, rtol=0, atol=1e-9)
    assert np.array_equal(hm.max_expectation, k.astype(float))


def test_psi_rate_infers_half(s2):
    rep = check_thm33(s2, LINEAR, horizon=1000)
    assert rep.satisfied == "yes"
    assert abs(rep.C - 0.5) <= 1e-12
    assert rep.margins.min() >= -1e-12


def test_psi_rate_strict_constant_violated(s2):
    rep = check_thm33(s2, PsiFunction("power", 2.0), C=0.5, horizon=1000)
    assert rep.satisfied == "no"
    assert rep.first_violation == 2


def test_psi_rate_flat_psi_rejected(s2):
    flat = PsiFunction("table", table=(1.0,) * 100)
    assert check_thm33(s2, flat, horizon=100).satisfied == "no"


def test_psi_rate_per_index_route(s2):
    rep = check_thm33(s2, LINEAR, horizon=1000, per_k=True)
    assert rep.per_k["ratio_non_decreasing"] and rep.per_k["implies_hypothesis"]


def test_power_rate_discrimination(s2):
    good = check_thm34(s2, 1.0, horizon=1000)
    assert good.satisfied == "yes" and abs(good.C - 0.5) <= 1e-12
    bad = check_thm34(s2, 0.5, horizon=1000)
    assert bad.satisfied != "yes"
    assert abs(bad.C - 0.5 * math.sqrt(1000)) <= 1e-6


def test_power_rate_delta_range(s2):
    for delta in (0.0, 2.0, -1.0):
        with pytest.raises(DomainError):
            check_thm34(s2, delta)


def test_variance_series_converges_on_shifted_pair(s3):
    rep = check_thm35(s3, 1.5, horizon=10000)
    assert rep.satisfied == "yes" and rep.C == 0.5
    oracle = 0.5 * math.fsum(k**-1.5 for k in range(1, 10001))
    assert abs(rep.partial_sum - oracle) <= 1e-9


def test_variance_series_divergent_trend(s2):
    rep = check_thm35(s2, 1.5, horizon=1000)
    assert rep.satisfied == "undecided"
    assert any("divergent" in note for note in rep.notes)


def test_variance_series_constant_sequence(constant):
    assert check_thm35(constant, 1.0).satisfied == "yes"


def test_linear_expectation_examples(s1, s3):
    assert not check_linear_expectation_remark(s1).satisfied
    single = parse_scenario(
        """
space: {outcomes: [w]}
distribution: {weights: {w: 1}}
generator: {family: affine-basis, coefficients: {w: {alpha: 3}}}
"""
    )
    remark = check_linear_expectation_remark(single, horizon=50)
    assert remark.satisfied and remark.mu == 3.0
    assert check_linear_expectation_remark(s3, horizon=1000).mu == 1.0


def test_run_lln_s2(s2):
    rep = run_lln(s2)
    assert rep.ok and not rep.forced
    assert rep.violations == 0 and rep.contraction_ok and rep.rate_bound_ok
    p = rep.measured[0.05]
    assert np.all(p[:400] == 0.5) and np.all(p[400:] == 0.0)
    assert rep.in_measure.decided == "holds" and rep.ae.decided == "holds"


def test_run_lln_s3_mu(s3):
    rep = run_lln(s3, horizon=10000)
    assert rep.ok
    assert rep.remark.mu == 1.0
    assert rep.mu_verdict.decided == "holds"
    assert rep.mu_gap["b"] == 1 / 10000
    assert rep.mu_gap["a"] == 0.0


def test_run_lln_force(s2):
    rep = run_lln(s2, "3.5", delta=1.5)
    assert not rep.ok and not rep.forced
    forced = run_lln(s2, "3.5", delta=1.5, force=True)
    assert forced.ok and forced.forced


def test_run_lln_needs_parameters(s1):
    with pytest.raises(DomainError):
        run_lln(s1)
    with pytest.raises(DomainError):
        run_lln(s1, "3.3")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["3.4", "3.5"]), st.sampled_from([0.5, 1.0, 1.5]))
def test_inferred_constant_always_bounds(seed, theorem, delta):
    sc = random_affine_scenario(np.random.default_rng(seed))
    rep = run_lln(sc, theorem, delta=delta, horizon=300, eps_grid=(0.5, 0.1, 0.01))
    assert rep.violations == 0
    assert rep.contraction_ok and rep.rate_bound_ok


def test_psi_rate_accepted_implies_rate_bound():
    psis = [PsiFunction("power", 1.0), PsiFunction("power", 0.5), PsiFunction("log-power", 2.0)]
    seen = 0
    for i, sc in enumerate(scenario_corpus(5, 120, horizon=300)):
        psi = psis[i % len(psis)]
        hyp = check_thm33(sc, psi, horizon=300)
        if hyp.satisfied != "yes":
            continue
        seen += 1
        rep = run_lln(sc, "3.3", psi=psi, C=hyp.C, horizon=300)
        assert rep.rate_bound_ok and rep.violations == 0
    assert seen > 0
