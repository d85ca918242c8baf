"""Tests for the multitype branching analytics.

The load-bearing checks compare the analytic extinction probabilities
and outbreak probability against a generative Monte Carlo simulation of
the typed process (tests/oracles.py), which shares only the quantile
table with the implementation.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netepi.branching import (
    AnalyticReport,
    BranchingModel,
    ModelParams,
    TuneResult,
    analyze,
    backward_extinction_and_z,
    forward_extinction,
    mean_matrix,
    p_major,
    r_star,
    rewired_tuning,
    tune_poisson,
)
from netepi.distributions import (
    InfectionSpec,
    from_pmf,
    point,
    poisson,
    poisson_plus,
)
from netepi.errors import (
    ConstantPeriodRequired,
    Infeasible,
    InvalidTarget,
    ReducibleMatrixWarning,
    ZeroMean,
)
from netepi.household import HouseholdEngine
from netepi.netprops import poisson_c_rho

from oracles import MultitypeForwardMC


def params(h, g, r=0.0, n_q=1, p_i=0.2, p_rw=0.0, infection=None):
    inf = infection if infection is not None else InfectionSpec.constant(p_i)
    return ModelParams(household=h, global_degree=g, r=r, n_q=n_q,
                       infection=inf, p_rw=p_rw)


# -- mean matrix and threshold ------------------------------------------


def test_single_member_households_classical_threshold():
    # without households the process is the classical configuration-model
    # branching process with mean p_i E[G(G-1)]/E[G] = p_i * mu for Poisson
    pm = params(point(1), poisson(10.0), p_i=0.1)
    assert abs(BranchingModel(pm).r_star() - 1.0) <= 1e-9


def test_threshold_matches_moment_assembly_single_type():
    h = poisson_plus(2.0)
    g = poisson(8.0)
    p_i = 0.15
    pm = params(h, g, p_i=p_i)
    mu_g = g.mean()
    spare = g.falling_moment(2) / mu_g
    engine = HouseholdEngine(InfectionSpec.constant(p_i), int(h.max_support()))
    pi_tilde = h.support * h.probs / h.mean()
    local = sum(w * engine.final_size_mean(int(hh))
                for hh, w in zip(h.support, pi_tilde))
    expect = p_i * (spare + mu_g * local)
    got = BranchingModel(pm).r_star()
    assert got == pytest.approx(expect, abs=1e-10)


def test_uncorrelated_blocks_collapse_to_single_type():
    h = poisson_plus(2.0)
    g = poisson(6.0)
    one = analyze(params(h, g, r=0.0, n_q=1, p_i=0.22))
    many = analyze(params(h, g, r=0.0, n_q=7, p_i=0.22))
    assert many.r_star == pytest.approx(one.r_star, abs=1e-10)
    assert many.p_major == pytest.approx(one.p_major, abs=1e-10)
    assert many.z == pytest.approx(one.z, abs=1e-10)
    m = mean_matrix(params(h, g, r=0.0, n_q=7, p_i=0.22)).entries
    # without labelling the target block is uniform: columns all equal
    assert np.allclose(m, m[:, :1], atol=1e-15)


def test_mean_matrix_structure():
    pm = params(poisson_plus(2.0), poisson(6.0), r=-0.8, n_q=6, p_i=0.3)
    m = mean_matrix(pm)
    assert m.entries.shape == (6, 6)
    assert not m.has_infinite
    assert np.all(m.entries >= 0.0)
    assert not np.any(np.isnan(m.entries))


def test_infinite_local_growth_infinite_threshold():
    # fully rewired size-4 cliques become trees; p_i >= 1/(h-2) makes the
    # local process supercritical, so one global case can seed infinitely
    # many global cases in a single step
    pm = params(point(4), poisson(4.0), r=0.3, n_q=4, p_i=0.6, p_rw=1.0)
    m = mean_matrix(pm)
    assert m.has_infinite
    assert not np.any(np.isnan(m.entries))
    assert r_star(m) == math.inf
    rep = analyze(pm)
    assert rep.r_star == math.inf
    assert 0.0 < rep.p_major < 1.0
    assert 0.0 < rep.z < 1.0
    assert rep.p_major == pytest.approx(rep.z, abs=1e-9)


def test_partly_rewired_mixture_with_infinite_branch():
    pm = params(from_pmf({2: 0.5, 4: 0.5}), poisson(3.0), r=0.0, n_q=3,
                p_i=0.6, p_rw=0.5)
    m = mean_matrix(pm)
    assert m.has_infinite
    assert not np.any(np.isnan(m.entries))
    rep = analyze(pm)
    assert rep.r_star == math.inf
    assert 0.0 < rep.z < 1.0


def test_diagonal_kernel_warns_reducible_and_matches_max_block():
    pm = params(point(1), poisson(8.0), r=1.0, n_q=4, p_i=0.1)
    model = BranchingModel(pm)
    with pytest.warns(ReducibleMatrixWarning):
        got = model.r_star()
    table = model.table
    block_mean = table.d_given_q.T @ table.degrees.astype(float)
    assert got == pytest.approx(0.1 * float(np.max(block_mean - 1.0)), abs=1e-9)


def test_no_global_edges_rejected():
    with pytest.raises(ZeroMean):
        BranchingModel(params(point(3), point(0), p_i=0.5))


def test_params_validation():
    inf = InfectionSpec.constant(0.2)
    with pytest.raises(ValueError):
        ModelParams(from_pmf({0: 0.5, 2: 0.5}), poisson(5.0), 0.0, 1, inf)
    with pytest.raises(ValueError):
        ModelParams(point(2), poisson(5.0), 1.5, 1, inf)
    with pytest.raises(ValueError):
        ModelParams(point(2), poisson(5.0), 0.0, 0, inf)
    with pytest.raises(ValueError):
        ModelParams(point(2), poisson(5.0), 0.0, 1, inf, p_rw=-0.1)


# -- extinction probabilities and outbreak sizes ------------------------


def test_below_threshold_everything_trivial():
    pm = params(poisson_plus(1.0), poisson(3.0), r=0.4, n_q=5, p_i=0.05)
    rep = analyze(pm)
    assert rep.r_star < 1.0
    assert rep.p_major == 0.0
    assert rep.z == 0.0
    assert np.all(rep.sigma == 1.0)
    assert np.all(rep.xi == 1.0)


def test_fixed_point_residual_invariant():
    for r, p_rw in [(-0.9, 0.0), (0.0, 0.3), (0.7, 0.0), (0.5, 1.0)]:
        pm = params(poisson_plus(2.0), poisson(7.0), r=r, n_q=8,
                    p_i=0.25, p_rw=p_rw)
        model = BranchingModel(pm)
        if model.r_star() <= 1.0:
            continue
        for backward in (False, True):
            s = model._solve_extinction(backward)
            assert np.all((0.0 <= s) & (s <= 1.0))
            res = np.max(np.abs(model._offspring_pgf(s, backward) - s))
            assert res <= 1e-10


def test_constant_period_outbreak_prob_equals_final_size():
    h = poisson_plus(2.0)
    g = poisson(6.0)
    for r in (-0.7, 0.0, 0.6):
        for p_rw in (0.0, 0.3):
            pm = params(h, g, r=r, n_q=6, p_i=0.3, p_rw=p_rw)
            rep = analyze(pm)
            assert rep.r_star > 1.0
            assert rep.p_major == pytest.approx(rep.z, abs=1e-9)


def test_rewiring_strictly_raises_all_outputs():
    h = from_pmf({1: 0.3, 2: 0.4, 3: 0.3})
    g = poisson(6.0)
    reports = [analyze(params(h, g, r=0.3, n_q=5, p_i=0.2, p_rw=p))
               for p in (0.0, 0.5, 1.0)]
    for lo, hi in zip(reports, reports[1:]):
        assert hi.r_star > lo.r_star + 1e-9
        assert hi.p_major > lo.p_major + 1e-9
        assert hi.z > lo.z + 1e-9


def test_threshold_crossing_matches_outbreak_onset():
    h = poisson_plus(2.0)
    g = poisson(6.0)

    def rs(p_i):
        return BranchingModel(params(h, g, r=-0.5, n_q=6, p_i=p_i)).r_star()

    lo, hi = 0.01, 0.5
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if rs(mid) < 1.0:
            lo = mid
        else:
            hi = mid
    crit = 0.5 * (lo + hi)
    below = analyze(params(h, g, r=-0.5, n_q=6, p_i=crit * 0.999))
    above = analyze(params(h, g, r=-0.5, n_q=6, p_i=crit * 1.001))
    assert below.r_star < 1.0 and below.p_major == 0.0 and below.z == 0.0
    assert above.r_star > 1.0 and above.p_major > 0.0 and above.z > 0.0


def test_general_period_gives_z_but_no_forward_quantities():
    inf = InfectionSpec.exponential(rate=1.0, mean=0.35)
    pm = params(poisson_plus(2.0), poisson(7.0), r=0.4, n_q=6, infection=inf)
    model = BranchingModel(pm)
    assert model.r_star() > 1.0
    with pytest.raises(ConstantPeriodRequired):
        model.p_major()
    with pytest.raises(ConstantPeriodRequired):
        model.forward_extinction()
    rep = analyze(pm)
    assert rep.p_major is None and rep.sigma is None
    assert 0.0 < rep.z < 1.0
    xi = rep.xi
    res = np.max(np.abs(model._offspring_pgf(xi, backward=True) - xi))
    assert res <= 1e-10


def test_module_level_wrappers_agree_with_model():
    pm = params(poisson_plus(2.0), poisson(6.0), r=0.5, n_q=4, p_i=0.3)
    model = BranchingModel(pm)
    assert r_star(mean_matrix(pm)) == pytest.approx(model.r_star(), abs=1e-12)
    assert np.allclose(forward_extinction(pm), model.forward_extinction())
    assert p_major(pm) == pytest.approx(model.p_major(), abs=1e-12)
    xi, z = backward_extinction_and_z(pm)
    assert np.allclose(xi, model.backward_extinction())
    assert z == pytest.approx(model.z_final_size(), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(
    w1=st.floats(0.05, 1.0), w2=st.floats(0.05, 1.0), w3=st.floats(0.05, 1.0),
    gmu=st.floats(1.0, 6.0),
    r=st.floats(-1.0, 1.0),
    p_lo=st.floats(0.02, 0.4),
)
def test_threshold_monotone_in_transmission(w1, w2, w3, gmu, r, p_lo):
    tot = w1 + w2 + w3
    h = from_pmf({1: w1 / tot, 2: w2 / tot, 3: w3 / tot})
    g = poisson(gmu)
    lo = BranchingModel(params(h, g, r=r, n_q=4, p_i=p_lo)).r_star()
    hi = BranchingModel(params(h, g, r=r, n_q=4, p_i=min(1.0, p_lo * 2))).r_star()
    assert lo >= 0.0
    assert hi >= lo - 1e-12


# -- Monte Carlo oracle comparisons -------------------------------------


def _mc_setup(pm):
    model = BranchingModel(pm)
    mc = MultitypeForwardMC(
        pm.household.support, pm.household.probs,
        pm.global_degree.support, pm.global_degree.probs,
        model.d_vals, model.table.d_given_q, model.table.q_given_d,
        pm.r, pm.n_q, pm.infection.p_i, cap=200,
    )
    return model, mc


def test_typed_extinction_matches_generative_simulation():
    pm = params(poisson_plus(2.0), poisson(8.0), r=0.5, n_q=10, p_i=0.2)
    model, mc = _mc_setup(pm)
    sigma = model.forward_extinction()
    n = 50_000
    for seed, q_type in ((11, 0), (12, 4), (13, 9)):
        frac = mc.extinction_fraction(n, seed=seed, root_type=q_type)
        se = math.sqrt(max(frac * (1.0 - frac), 1e-12) / n)
        assert abs(frac - sigma[q_type]) <= 3.0 * se, (
            f"type {q_type}: analytic {sigma[q_type]:.4f} vs mc {frac:.4f}"
        )


def test_outbreak_probability_matches_generative_simulation():
    pm = params(poisson_plus(2.0), poisson(8.0), r=-0.6, n_q=10, p_i=0.2)
    model, mc = _mc_setup(pm)
    pm_analytic = model.p_major()
    n = 150_000
    frac = mc.extinction_fraction(n, seed=77, root_type=None)
    surv = 1.0 - frac
    se = math.sqrt(max(surv * (1.0 - surv), 1e-12) / n)
    assert abs(surv - pm_analytic) <= 3.0 * se, (
        f"analytic {pm_analytic:.4f} vs mc {surv:.4f}"
    )


# -- tuning ---------------------------------------------------------------


def test_tune_poisson_hits_both_targets():
    res = tune_poisson(10.0, 0.25, 0.05, n_q=10)
    assert res.mu == pytest.approx(5.0, abs=1e-12)
    c, rho = poisson_c_rho(10.0, res.mu, res.r, 10)
    assert c == pytest.approx(0.25, abs=1e-12)
    assert rho == pytest.approx(0.05, abs=1e-8)
    neg = tune_poisson(10.0, 0.25, -0.08, n_q=10)
    assert neg.r < 0.0
    _, rho_neg = poisson_c_rho(10.0, neg.mu, neg.r, 10)
    assert rho_neg == pytest.approx(-0.08, abs=1e-8)


def test_tune_poisson_infeasible_reports_envelope():
    with pytest.raises(Infeasible) as exc:
        tune_poisson(10.0, 0.25, 0.95, n_q=10)
    assert exc.value.lo < exc.value.hi < 0.95
    _, rho_max = poisson_c_rho(10.0, 5.0, 1.0, 10)
    assert exc.value.hi == pytest.approx(rho_max, abs=1e-12)


def test_tune_poisson_invalid_targets():
    with pytest.raises(InvalidTarget):
        tune_poisson(10.0, 1.2, 0.0, n_q=10)
    with pytest.raises(InvalidTarget):
        tune_poisson(10.0, -0.1, 0.0, n_q=10)
    with pytest.raises(InvalidTarget):
        tune_poisson(0.0, 0.25, 0.0, n_q=10)


def test_rewired_tuning_scales_clustering_only():
    c0, rho0 = rewired_tuning(10.0, 6.0, -0.5, 0.0, 10)
    c1, rho1 = rewired_tuning(10.0, 6.0, -0.5, 0.4, 10)
    assert c1 == pytest.approx(0.6 * c0, abs=1e-12)
    assert rho1 == pytest.approx(rho0, abs=1e-15)


def test_analyze_report_shape():
    pm = params(poisson_plus(2.0), poisson(6.0), r=0.3, n_q=5, p_i=0.3)
    rep = analyze(pm)
    assert isinstance(rep, AnalyticReport)
    assert rep.sigma.shape == (5,)
    assert rep.xi.shape == (5,)
    assert not rep.has_infinite
    assert 0.0 < rep.p_major < 1.0
