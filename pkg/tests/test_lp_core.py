import itertools
import math

import numpy as np
import pytest
from conftest import INSTANCE_A_ARMS, random_instances
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from linconts.exceptions import DegeneracyError, DomainError, InvalidInputError
from linconts.lp_core import (
    ArmParams,
    DualCertificate,
    LpSolution,
    compute_dual_certificate,
    slack_threshold,
    solve_constrained_lp,
    verify_kkt,
)


def brute_force_optimum(mu, r, eta):
    """Best objective over every single-arm and two-arm basic solution."""
    best = -math.inf
    for j in range(len(mu)):
        if mu[j] >= eta:
            best = max(best, mu[j] * r[j])
    for i, j in itertools.combinations(range(len(mu)), 2):
        lo, hi = (i, j) if mu[i] < mu[j] else (j, i)
        if mu[lo] < eta <= mu[hi]:
            w = (eta - mu[lo]) / (mu[hi] - mu[lo])
            best = max(best, (1 - w) * mu[lo] * r[lo] + w * mu[hi] * r[hi])
    return best


def scipy_optimum(mu, r, eta):
    res = linprog(-(mu * r), A_ub=[-mu], b_ub=[-eta], A_eq=[np.ones_like(mu)], b_eq=[1.0],
                  bounds=[(0, None)] * len(mu), method="highs")
    return -res.fun if res.status == 0 else None


def test_single_arm_meets_constraint_exactly(backend):
    sol = solve_constrained_lp([(0.5, 1.0)], 0.5, backend=backend)
    assert sol.feasible
    assert sol.x.tolist() == [1.0]
    assert sol.objective == pytest.approx(0.5, abs=1e-12)


def test_two_arm_mixture_closed_form(backend):
    mu1, mu2, eta = 0.1, 0.9, 0.5
    sol = solve_constrained_lp([(mu1, 1.0), (mu2, 0.1)], eta, backend=backend)
    x1 = (mu2 - eta) / (mu2 - mu1)
    x2 = (eta - mu1) / (mu2 - mu1)
    np.testing.assert_allclose(sol.x, [x1, x2], atol=1e-12)
    np.testing.assert_allclose(sol.x, [0.5, 0.5], atol=1e-12)
    assert sol.objective == pytest.approx(0.095, abs=1e-12)
    assert sol.support == (0, 1)


def test_instance_a(backend):
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5, backend=backend)
    np.testing.assert_allclose(sol.x, [0.5, 0.5, 0.0], atol=1e-12)
    assert sol.objective == pytest.approx(0.095, abs=1e-12)
    # competing bases, by hand: arm 3 mixed with arm 2, and arm 2 alone
    w = (0.5 - 0.3) / (0.9 - 0.3)
    assert (1 - w) * 0.3 * 0.2 + w * 0.9 * 0.1 == pytest.approx(0.07)
    assert 0.9 * 0.1 == pytest.approx(0.09)


def test_infeasible_when_no_arm_reaches_eta(backend):
    sol = solve_constrained_lp([(0.2, 1.0), (0.3, 0.9)], 0.5, backend=backend)
    assert not sol.feasible
    assert sol.support == ()


@pytest.mark.parametrize("arms", [[], [(1.5, 0.5)], [(0.5, 0.0)], [(math.nan, 0.5)], [(0.5, 1.2)]])
def test_invalid_arms_rejected(arms):
    with pytest.raises(InvalidInputError):
        solve_constrained_lp(arms, 0.5)


@pytest.mark.parametrize("eta", [-0.1, 1.1, math.nan])
def test_invalid_eta_rejected(eta):
    with pytest.raises(InvalidInputError):
        solve_constrained_lp([(0.5, 0.5)], eta)


def test_tie_break_prefers_singleton_then_lexicographic(backend):
    # arm 1 alone (0.5 * 0.4 = 0.2) ties the (0, 1) mixture only if mu_1 == eta
    sol = solve_constrained_lp([(0.1, 1.0), (0.5, 0.4)], 0.5, backend=backend)
    assert sol.support == (1,)
    # duplicated arms: two identical mixtures, the lower index pair wins
    sol = solve_constrained_lp([(0.1, 1.0), (0.9, 0.1), (0.1, 1.0), (0.9, 0.1)], 0.5,
                               backend=backend)
    assert sol.support == (0, 1)


def test_oracle_equivalence_random(backend):
    checked = 0
    for mu, r, eta in random_instances(500, seed=3):
        sol = solve_constrained_lp(list(zip(mu, r)), eta, backend=backend)
        best = brute_force_optimum(mu, r, eta)
        assert sol.feasible == math.isfinite(best)
        if not sol.feasible:
            continue
        checked += 1
        assert abs(sol.objective - best) <= 1e-9
        ref = scipy_optimum(mu, r, eta)
        assert ref is not None and abs(sol.objective - ref) <= 1e-7
        assert abs(sol.x.sum() - 1.0) <= 1e-9
        assert sol.x.min() >= 0.0
        assert sol.x @ mu >= eta - 1e-9
        assert len(sol.support) <= 2
    assert checked > 100


def test_dual_certificate_closed_forms():
    arms = [(0.1, 1.0), (0.9, 0.1)]
    sol = solve_constrained_lp(arms, 0.5)
    d = compute_dual_certificate(arms, 0.5, sol)
    (mu1, r1), (mu2, r2) = arms
    assert d.lam == pytest.approx((r1 * mu1 - r2 * mu2) / (mu2 - mu1), abs=1e-12)
    assert d.nu == pytest.approx((r1 - r2) * mu1 * mu2 / (mu2 - mu1), abs=1e-12)
    assert d.lam == pytest.approx(0.0125, abs=1e-12)
    assert d.nu == pytest.approx(0.10125, abs=1e-12)
    assert d.nu - d.lam * 0.5 == pytest.approx(sol.objective, abs=1e-12)


def test_dual_slack_singleton():
    sol = solve_constrained_lp([(0.5, 1.0)], 0.3)
    d = compute_dual_certificate([(0.5, 1.0)], 0.3, sol)
    assert d.lam == 0.0
    assert d.nu == pytest.approx(0.5)
    assert d.psi.tolist() == [0.0]


def test_dual_instance_a_suboptimal_psi():
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    assert d.psi[2] == pytest.approx(0.10125 - 0.3 * (0.2 + 0.0125), abs=1e-12)
    assert d.psi[2] == pytest.approx(0.0375, abs=1e-12)


def test_dual_degenerate_support_raises():
    arms = [(0.5, 1.0), (0.5, 0.2)]
    fake = LpSolution(x=np.array([0.5, 0.5]), objective=0.3, support=(0, 1), feasible=True)
    with pytest.raises(DegeneracyError):
        compute_dual_certificate(arms, 0.5, fake)


def test_slack_threshold_instance_a():
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    xi = slack_threshold(2, INSTANCE_A_ARMS, d)
    assert xi == pytest.approx(0.10125 / 0.2125, abs=1e-12)
    assert xi == pytest.approx(0.476471, abs=1e-6)
    assert xi > INSTANCE_A_ARMS[2][0]
    with pytest.raises(DomainError):
        slack_threshold(0, INSTANCE_A_ARMS, d)


def test_slack_threshold_matches_pair_formula():
    (mu1, r1), (mu2, r2), (_, ri) = INSTANCE_A_ARMS
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    direct = (r1 - r2) * mu1 * mu2 / ((ri - r2) * mu2 - (ri - r1) * mu1)
    assert slack_threshold(2, INSTANCE_A_ARMS, d) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("mu3", [0.47, 0.476])
def test_perturbation_below_slack_keeps_support(mu3):
    arms = [(0.1, 1.0), (0.9, 0.1), (mu3, 0.2)]
    assert solve_constrained_lp(arms, 0.5).support == (0, 1)


def test_perturbation_above_slack_changes_support():
    arms = [(0.1, 1.0), (0.9, 0.1), (0.48, 0.2)]
    assert 2 in solve_constrained_lp(arms, 0.5).support


def test_kkt_passes_on_optimum():
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    rep = verify_kkt(INSTANCE_A_ARMS, 0.5, sol, d, tol=1e-9)
    assert rep.ok, rep.residuals
    assert set(rep.residuals) == {"primal_feasibility", "dual_feasibility", "stationarity",
                                  "complementary_slackness", "duality_gap"}


def test_kkt_flags_infeasible_primal():
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    bad = LpSolution(np.array([1.0, 0.0, 0.0]), 0.1, (0,), True)
    rep = verify_kkt(INSTANCE_A_ARMS, 0.5, bad, d)
    assert not rep.passed["primal_feasibility"]


def test_kkt_flags_negative_lambda():
    sol = solve_constrained_lp(INSTANCE_A_ARMS, 0.5)
    d = compute_dual_certificate(INSTANCE_A_ARMS, 0.5, sol)
    flipped = DualCertificate(-d.lam, d.nu, d.psi)
    rep = verify_kkt(INSTANCE_A_ARMS, 0.5, sol, flipped)
    assert not rep.passed["dual_feasibility"]
    assert "dual_feasibility" in rep.failures()


def test_kkt_and_duality_random():
    for mu, r, eta in random_instances(500, seed=8):
        arms = list(zip(mu, r))
        sol = solve_constrained_lp(arms, eta)
        if not sol.feasible:
            continue
        d = compute_dual_certificate(arms, eta, sol)
        rep = verify_kkt(arms, eta, sol, d, tol=1e-8)
        assert rep.ok, (arms, eta, rep.residuals)
        assert abs(sol.objective - (d.nu - d.lam * eta)) <= 1e-9
        for i in np.flatnonzero(d.psi > 1e-9):
            assert slack_threshold(int(i), arms, d) > mu[i]


arm_st = st.tuples(st.floats(0.0, 1.0), st.floats(0.01, 1.0))


@settings(max_examples=200, deadline=None)
@given(st.lists(arm_st, min_size=1, max_size=8), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
def test_reward_scaling_invariance(arms, eta, scale):
    scaled = [(m, r * scale) for m, r in arms]
    a = solve_constrained_lp(arms, eta)
    b = solve_constrained_lp(scaled, eta)
    assert a.feasible == b.feasible
    if a.feasible:
        assert b.objective == pytest.approx(a.objective * scale, rel=1e-9, abs=1e-12)
        # ties may resolve differently after rescaling rounds, so compare objectives on x
        mu = np.array([m for m, _ in arms])
        r = np.array([v for _, v in arms])
        assert a.x @ (mu * r) == pytest.approx(b.x @ (mu * r), rel=1e-9, abs=1e-12)


def test_arm_params_coerces_to_float():
    a = ArmParams(1, 1)
    assert isinstance(a.mu, float) and isinstance(a.r, float)
