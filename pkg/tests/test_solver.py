import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    central_difference,
    dense_incidence,
    dense_laplacian,
    dense_objective,
    dense_subproblem,
    signed_pair,
    subgradient_reference,
    tikhonov_signals,
)
from sglhn.baselines import scsgl_config, scsgl_from_covariance
from sglhn.graph import LaplacianPair, laplacian_pair, num_pairs, trace_form_coeffs
from sglhn.metrics import evaluate
from sglhn.solver import (
    AdmmConfig,
    BcdConfig,
    GramSolver,
    HiddenAux,
    SolverError,
    admm_L_update,
    grad_f,
    initial_state,
    newton_system_solve,
    objective_eval,
    p_objective,
    p_update,
    project_complementarity,
    project_hyperplane,
    r_update,
    relative_change,
    sgl_hncs,
    subproblem_value,
    total_variation,
)
from sglhn.synth import (
    GenConfig,
    gen_signals,
    hide_nodes,
    observed_groundtruth,
    sample_covariance,
    signed_er_graph,
)


def random_cov(rng, b, k=20):
    X = rng.standard_normal((b, k))
    return X @ X.T / k


def reference_data(seed=0, h=2, k=50):
    g = signed_er_graph(GenConfig(seed=seed))
    x = gen_signals(laplacian_pair(g), k, 0.1, seed)
    obs = hide_nodes(x, h, seed)
    return obs.CB, observed_groundtruth(g, obs.partition)


# --- configuration ------------------------------------------------------------------

def test_sigma_minus_guard():
    with pytest.raises(ValueError, match="sigma_minus"):
        BcdConfig(sigma_minus=2.0)
    BcdConfig(sigma_minus=1.0, pin_hidden=True)
    with pytest.raises(ValueError):
        AdmmConfig(rho=0)


# --- projections ----------------------------------------------------------------------

def test_complementarity_examples():
    assert project_complementarity(np.array([1.0]), np.array([2.0])) == (0.0, 0.0)
    vp, vm = project_complementarity(np.array([-1.0]), np.array([-2.0]))
    assert (vp[0], vm[0]) == (0.0, -2.0)
    vp, vm = project_complementarity(np.array([-3.0]), np.array([-1.0]))
    assert (vp[0], vm[0]) == (-3.0, 0.0)


def test_complementarity_matches_enumeration():
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(10_000) * 3, rng.standard_normal(10_000) * 3
    # sprinkle exact ties and boundary values
    a[:50], b[:50] = -1.0, -1.0
    a[50:100], b[50:100] = 0.0, rng.standard_normal(50)
    vp, vm = project_complementarity(a, b)
    assert np.all(vp <= 0) and np.all(vm <= 0) and np.all(vp * vm == 0)
    for i in range(len(a)):
        # the feasible set is the union of two rays; enumerate the nearest point on each
        cands = [(min(a[i], 0.0), 0.0), (0.0, min(b[i], 0.0))]
        costs = [(x - a[i]) ** 2 + (y - b[i]) ** 2 for x, y in cands]
        got = (vp[i] - a[i]) ** 2 + (vm[i] - b[i]) ** 2
        assert got == min(costs)
        if costs[0] != costs[1]:
            assert (vp[i], vm[i]) == cands[int(np.argmin(costs))]


def test_hyperplane_examples():
    np.testing.assert_allclose(project_hyperplane(np.zeros(6), 4), -np.ones(6) / 3)
    x = project_hyperplane(np.random.default_rng(1).standard_normal(10), 5)
    np.testing.assert_allclose(project_hyperplane(x, 5), x, rtol=0, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 15), st.integers(0, 2**32 - 1))
def test_hyperplane_properties(B, seed):
    rng = np.random.default_rng(seed)
    p = num_pairs(B)
    x, y = rng.standard_normal(p) * 5, rng.standard_normal(p) * 5
    px = project_hyperplane(x, B)
    assert abs(px.sum() + B / 2) <= 1e-12 * max(1, np.abs(x).sum())
    np.testing.assert_allclose(project_hyperplane(px, B), px, atol=1e-12)
    assert np.linalg.norm(px - project_hyperplane(y, B)) <= np.linalg.norm(x - y) + 1e-12
    for _ in range(100):
        z = project_hyperplane(rng.standard_normal(p) * 5, B)
        assert np.linalg.norm(px - x) <= np.linalg.norm(z - x) + 1e-12


# --- gradient and Newton system ---------------------------------------------------------------

def feasible_point(rng, B, C, slack=0.1):
    """Random point on the hyperplane with hidden-node offsets giving g >= slack."""
    q = trace_form_coeffs(C)
    p = num_pairs(B)
    ell = [project_hyperplane(-rng.random(p), B) for _ in range(2)]
    r = [max(0.0, slack - q @ e) + rng.random() for e in ell]
    aux = HiddenAux(np.zeros(B), np.zeros(B), r[0], r[1])
    return ell[0], ell[1], q, aux


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    cfg = BcdConfig(alpha_plus=0.3, alpha_minus=0.2, eta_plus=5.0, eta_minus=8.0)
    for _ in range(20):
        B = int(rng.integers(3, 9))
        C = random_cov(rng, B)
        lp_, lm_, q, aux = feasible_point(rng, B, C)
        assert q @ lp_ + aux.offset(1) >= 0.1 and q @ lm_ + aux.offset(-1) >= 0.1
        gp, gm = grad_f(lp_, lm_, q, aux, cfg)
        fd_p = central_difference(lambda x: subproblem_value(x, lm_, q, aux, cfg), lp_)
        fd_m = central_difference(lambda x: subproblem_value(lp_, x, q, aux, cfg), lm_)
        for g, fd in ((gp, fd_p), (gm, fd_m)):
            assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-5


def test_gradient_special_cases():
    B = 5
    cfg = BcdConfig()
    aux = HiddenAux(np.zeros(B), np.zeros(B), 1.0, 1.0)
    q = trace_form_coeffs(random_cov(np.random.default_rng(0), B))
    gp, _ = grad_f(np.zeros(10), np.zeros(10), q, aux, cfg)
    np.testing.assert_allclose(gp, q * (1 - 1 / cfg.eta_plus))
    ell = project_hyperplane(-np.random.default_rng(1).random(10), B)
    gp, gm = grad_f(ell, ell, np.zeros(10), aux, cfg)
    S = dense_incidence(B)
    np.testing.assert_allclose(gp, 2 * cfg.alpha_plus * (2 * np.eye(10) + S.T @ S) @ ell)
    np.testing.assert_allclose(gm, 2 * cfg.alpha_minus * (2 * np.eye(10) + S.T @ S) @ ell)


def test_subproblem_value_matches_dense():
    rng = np.random.default_rng(4)
    cfg = BcdConfig()
    for _ in range(10):
        B = int(rng.integers(3, 8))
        C = random_cov(rng, B)
        lp_, lm_, q, aux = feasible_point(rng, B, C)
        assert math.isclose(subproblem_value(lp_, lm_, q, aux, cfg),
                            dense_subproblem(lp_, lm_, C, aux, cfg), rel_tol=1e-10, abs_tol=1e-10)


def dense_system(B, alpha, rho, q, g, eta):
    S = dense_incidence(B)
    A = 2 * alpha * (2 * np.eye(S.shape[1]) + S.T @ S) + rho * np.eye(S.shape[1])
    if np.isfinite(eta):
        A = A + np.outer(q, q) / (eta * g**2)
    return A


def test_gram_solver_against_dense():
    rng = np.random.default_rng(5)
    for B in (2, 3, 6, 12):
        gs = GramSolver(B, 0.3, 1.5)
        y = rng.standard_normal(num_pairs(B))
        A = dense_system(B, 0.3, 1.5, None, None, math.inf)
        np.testing.assert_allclose(A @ gs.solve(y), y, atol=1e-10)
        np.testing.assert_allclose(gs.matvec(y), A @ y, atol=1e-10)


def test_newton_solve_against_dense():
    rng = np.random.default_rng(6)
    for _ in range(50):
        B = int(rng.integers(2, 13))
        p = num_pairs(B)
        q = rng.standard_normal(p)
        alpha, rho, eta, g = rng.uniform(0.01, 1), rng.uniform(0.1, 10), rng.uniform(1, 20), rng.uniform(0.05, 3)
        rhs = rng.standard_normal(p)
        x = newton_system_solve(q, g, alpha, rho, eta, rhs)
        A = dense_system(B, alpha, rho, q, g, eta)
        assert np.linalg.norm(A @ x - rhs) / np.linalg.norm(rhs) < 1e-8
        np.testing.assert_allclose(x, np.linalg.solve(A, rhs), rtol=1e-8, atol=1e-10)
        xq = newton_system_solve(q, g, alpha, rho, eta, q)
        np.testing.assert_allclose(xq, np.linalg.solve(A, q), rtol=1e-8, atol=1e-10)


def test_newton_without_barrier_is_plain_solve():
    q = np.ones(6)
    rhs = np.arange(6.0)
    x = newton_system_solve(q, 1.0, 0.2, 1.0, math.inf, rhs)
    np.testing.assert_allclose(x, GramSolver(4, 0.2, 1.0).solve(rhs))


# --- closed-form P and R updates ------------------------------------------------------------

def test_p_update_examples():
    cfg = BcdConfig(sigma_plus=3.0, sigma_minus=3.0)
    pp, _ = p_update(1.0, 0.0, HiddenAux.zeros(4), cfg)
    np.testing.assert_array_equal(pp, np.zeros(4))
    pp, pm = p_update(-2.0, -2.0, HiddenAux.zeros(4), cfg)
    np.testing.assert_allclose(pp, 0.25 * np.ones(4))
    np.testing.assert_allclose(pm, 0.25 * np.ones(4))
    assert math.isclose(2 * pp.sum() + 3.0 * np.abs(pp).sum(), 5.0)


def test_r_update_examples():
    assert r_update(0.5, 0.5) == (0.0, 0.0)
    assert r_update(-0.3, 0.0) == (0.3, 0.0)
    assert r_update(0.0, -1.0) == (0.0, 1.0)


def random_p_instances(n=50, seed=7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        B = int(rng.integers(2, 13))
        tp, tm = rng.uniform(-5, 5, 2)
        rp, rm = rng.uniform(0, 2, 2)
        cfg = BcdConfig(sigma_plus=rng.uniform(0.5, 5), sigma_minus=rng.uniform(2.05, 5))
        out.append((B, tp, tm, HiddenAux(np.zeros(B), np.zeros(B), rp, rm), cfg))
    return out


def closed_form_values(inst):
    B, tp, tm, aux, cfg = inst
    pp, pm = p_update(tp, tm, aux, cfg)
    return pp, pm, (2 * pp.sum() + cfg.sigma_plus * np.abs(pp).sum(),
                    -2 * pm.sum() + cfg.sigma_minus * np.abs(pm).sum())


def run_p_reference(instances, iters=50_000):
    c, sig, t, Bs = [], [], [], []
    for B, tp, tm, aux, cfg in instances:
        c += [2.0, -2.0]
        sig += [cfg.sigma_plus, cfg.sigma_minus]
        t += [-(tp + aux.r_plus) / 2, -(tm + aux.r_minus) / 2]
        Bs += [B, B]
    return subgradient_reference(c, sig, t, Bs, iters).reshape(-1, 2)


@pytest.mark.slow
def test_p_update_matches_subgradient_reference():
    instances = random_p_instances()
    ref = run_p_reference(instances)
    for inst, (rp, rm) in zip(instances, ref):
        _, _, (vp, vm) = closed_form_values(inst)
        assert abs(vp - rp) < 1e-5 and abs(vm - rm) < 1e-5


def test_p_update_feasible_and_unbeaten_by_samples():
    rng = np.random.default_rng(8)
    for inst in random_p_instances():
        B, tp, tm, aux, cfg = inst
        pp, pm, (vp, vm) = closed_form_values(inst)
        assert tp + 2 * pp.sum() + aux.r_plus >= -1e-12
        assert tm + 2 * pm.sum() + aux.r_minus >= -1e-12
        for sign, t, c, sigma, best in ((1, -(tp + aux.r_plus) / 2, 2.0, cfg.sigma_plus, vp),
                                        (-1, -(tm + aux.r_minus) / 2, -2.0, cfg.sigma_minus, vm)):
            P = rng.standard_normal((2000, B)) * rng.choice([0.01, 0.3, 3.0], size=(2000, 1))
            short = np.maximum(t - P.sum(1), 0.0)
            P += (short / B)[:, None]
            assert np.all(P.sum(1) >= t - 1e-12)
            vals = c * P.sum(1) + sigma * np.abs(P).sum(1)
            assert vals.min() >= best - 1e-7


def test_r_update_unbeaten_by_samples():
    rng = np.random.default_rng(9)
    for tv in rng.uniform(-3, 3, 50):
        r, _ = r_update(tv, 0.0)
        cand = rng.uniform(0, 6, 2000)
        cand = cand[tv + cand >= 0]
        assert tv + r >= 0 and r >= 0
        assert cand.min() >= r - 1e-7


def test_dense_p_reduces_to_diagonal():
    """Dense (non-diagonal) P matrices never beat the diagonal closed form."""
    rng = np.random.default_rng(10)
    for _ in range(20):
        B = int(rng.integers(2, 7))
        cfg = BcdConfig(sigma_plus=rng.uniform(0.5, 5), sigma_minus=rng.uniform(2.05, 5))
        tp, tm = rng.uniform(-3, 3, 2)
        pp, pm = p_update(tp, tm, HiddenAux.zeros(B), cfg)
        best = p_objective(pp, pm, cfg)
        for _ in range(500):
            Ps = []
            for tr_ in (tp, tm):
                P = rng.standard_normal((B, B)) * rng.uniform(0.01, 2)
                # raise the diagonal uniformly until tr_ + 2 tr(P) >= 0
                P += np.eye(B) * max(0.0, -(tr_ + 2 * np.trace(P))) / (2 * B)
                Ps.append(P)
            val = (2 * np.trace(Ps[0]) - 2 * np.trace(Ps[1])
                   + cfg.sigma_plus * np.linalg.norm(Ps[0], axis=0).sum()
                   + cfg.sigma_minus * np.linalg.norm(Ps[1], axis=0).sum())
            assert val >= best - 1e-7


# --- objective --------------------------------------------------------------------------------

def test_objective_eval_basics():
    B = 4
    cfg = BcdConfig()
    zero = LaplacianPair(np.zeros((B, B)), np.zeros((B, B)))
    assert objective_eval(zero, HiddenAux.zeros(B), np.eye(B), cfg) == 0.0
    rng = np.random.default_rng(11)
    C = random_cov(rng, B)
    lp = LaplacianPair(dense_laplacian(-rng.random(6), B), dense_laplacian(-rng.random(6), B))
    aux = HiddenAux(rng.standard_normal(B), rng.standard_normal(B), 0.3, 0.7)
    base = objective_eval(lp, aux, C, cfg)
    doubled = objective_eval(lp, aux, C, BcdConfig(alpha_plus=2 * cfg.alpha_plus))
    assert math.isclose(doubled - base, cfg.alpha_plus * np.sum(lp.Lplus**2), rel_tol=1e-12)


def test_objective_eval_matches_dense():
    rng = np.random.default_rng(12)
    cfg = BcdConfig(alpha_plus=0.2, sigma_plus=1.5, sigma_minus=3.5)
    for _ in range(10):
        B = int(rng.integers(2, 8))
        p = num_pairs(B)
        C = random_cov(rng, B)
        lp = LaplacianPair(dense_laplacian(-rng.random(p), B), dense_laplacian(-rng.random(p), B))
        aux = HiddenAux(rng.standard_normal(B), rng.standard_normal(B), rng.random(), rng.random())
        got = objective_eval(lp, aux, C, cfg)
        want = dense_objective(lp, np.diag(aux.p_plus), np.diag(aux.p_minus),
                               aux.r_plus, aux.r_minus, C, cfg)
        assert math.isclose(got, want, rel_tol=1e-12, abs_tol=1e-12)


def test_relative_change():
    assert relative_change(1.0, 2.0) == 0.5
    assert relative_change(0.0, 0.0) == 0.0
    assert relative_change(1.0, 0.0) == math.inf


# --- ADMM and BCD -----------------------------------------------------------------------------

def test_initial_state():
    st = initial_state(5)
    assert math.isclose(st.ell_plus.sum(), -2.5)
    np.testing.assert_array_equal(st.ell_plus, st.ell_minus)
    assert np.all(st.v_plus * st.v_minus == 0)


def test_identity_covariance_is_sign_symmetric():
    """With C = I the smooth subproblem is invariant under swapping the two signs."""
    B = 6
    q = trace_form_coeffs(np.eye(B))
    cfg = BcdConfig()
    aux = HiddenAux(np.zeros(B), np.zeros(B), 0.5, 0.5)
    rng = np.random.default_rng(13)
    for _ in range(20):
        a = project_hyperplane(-rng.random(15), B)
        b = project_hyperplane(-rng.random(15), B)
        assert math.isclose(subproblem_value(a, b, q, aux, cfg),
                            subproblem_value(b, a, q, aux, cfg), rel_tol=1e-12)


def test_identity_covariance_nonconvergence_is_reported():
    """Uniform start plus C = I ties every coordinate; the ADMM cannot split the
    edges between signs and must report a residual above tolerance."""
    B = 6
    admm = AdmmConfig(inner_iters=200)
    _, st = admm_L_update(np.eye(B), HiddenAux(np.zeros(B), np.zeros(B), 1.0, 1.0),
                          initial_state(B), BcdConfig(), admm)
    assert st.iterations == admm.inner_iters
    assert st.residual > admm.primal_tol


def two_community_toy():
    tri = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]
    inter = [(i, j) for i in range(3) for j in range(3, 6)]
    return signed_pair(tri, inter, 6)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_two_community_toy(seed):
    lp = two_community_toy()
    C = sample_covariance(tikhonov_signals(lp, 10_000, seed, strength=0.5))
    est, st = admm_L_update(C, HiddenAux.zeros(6), initial_state(6), BcdConfig(), AdmmConfig())
    assert st.residual < AdmmConfig().primal_tol
    rep = evaluate(est, lp, 0.1)
    assert rep.fscore_plus == 1.0
    assert rep.fscore_minus == 1.0


def assert_feasible(lp, B, tol=1e-6):
    off = ~np.eye(B, dtype=bool)
    assert np.all(lp.Lplus[off] <= 0) and np.all(lp.Lminus[off] <= 0)
    assert not np.any((lp.Lplus[off] != 0) & (lp.Lminus[off] != 0))
    assert abs(np.trace(lp.Lplus) - B) <= tol and abs(np.trace(lp.Lminus) - B) <= tol


@pytest.mark.parametrize("seed", range(5))
def test_sgl_hncs_feasibility(seed):
    CB, _ = reference_data(seed)
    cfg = BcdConfig()
    lp, aux, trace = sgl_hncs(CB, cfg)
    B = CB.shape[0]
    assert_feasible(lp, B)
    assert lp.violations(1e-9) == []
    tv_p, tv_m = total_variation(lp, aux, CB)
    assert tv_p >= -1e-8 and tv_m >= -1e-8
    assert len(trace.error) == trace.outer_iters_used == len(trace.objective) - 1
    assert len(trace.primal_residual) == trace.outer_iters_used
    for m in range(1, len(trace.objective)):
        assert trace.error[m - 1] == relative_change(trace.objective[m], trace.objective[m - 1])


def test_sgl_hncs_deterministic():
    CB, _ = reference_data(3)
    a, _, ta = sgl_hncs(CB)
    b, _, tb = sgl_hncs(CB)
    np.testing.assert_array_equal(a.Lplus, b.Lplus)
    assert ta.objective == tb.objective


def test_outer_tol_zero_runs_all_iterations():
    CB, _ = reference_data(1)
    _, _, trace = sgl_hncs(CB, BcdConfig(outer_iters=7, outer_tol=0.0))
    assert trace.outer_iters_used == 7


def test_pinned_config_matches_scsgl():
    CB, _ = reference_data(4, h=0)
    lp, aux, trace = sgl_hncs(CB, scsgl_config(0.1, 0.1))
    ref = scsgl_from_covariance(CB, 0.1, 0.1)
    np.testing.assert_allclose(lp.Lplus, ref.Lplus, atol=1e-6)
    np.testing.assert_allclose(lp.Lminus, ref.Lminus, atol=1e-6)
    assert trace.outer_iters_used == 1
    assert not aux.p_plus.any() and aux.r_plus == 0


def test_infeasible_start_raises():
    B = 4
    # strongly negative offset puts the starting point outside the barrier domain
    aux = HiddenAux(-np.ones(B) * 10, np.zeros(B), 0.0, 0.0)
    with pytest.raises(SolverError):
        admm_L_update(np.eye(B), aux, initial_state(B), BcdConfig(), AdmmConfig())


def test_hncs_not_worse_than_scsgl_at_k200():
    f_h, f_s = [], []
    for seed in range(20):
        CB, truth = reference_data(seed, h=2, k=200)
        lp, _, _ = sgl_hncs(CB)
        f_h.append(evaluate(lp, truth, 0.1).fscore)
        f_s.append(evaluate(scsgl_from_covariance(CB), truth, 0.1).fscore)
    assert np.mean(f_h) > np.mean(f_s) - 0.02


def test_bad_covariance_shape():
    with pytest.raises(ValueError):
        sgl_hncs(np.ones((1, 1)))
    with pytest.raises(ValueError):
        sgl_hncs(np.ones((2, 3)))
