import numpy as np
import pytest

import pchqp as P
from oracles import central_difference, level_value_by_enumeration, random_psd_problem
from pchqp.errors import DataError


def dominant_instance(s=2, n=6, eta=1.0):
    # diagonal spectrum with s clearly dominant linear coefficients
    Q = np.diag(np.linspace(1.0, 0.1, n))
    c = np.full(n, 0.05)
    c[:s] = np.array([10.0, 9.0])[:s]
    return P.build_problem(Q, c, s=s, eta=eta)


class TestBRUnconstrained:
    def test_empty_support_gives_zero(self):
        p = random_psd_problem(np.random.default_rng(0), n=5)
        trunc = P.truncate(P.eig_sym(p.Q), 3)
        assert np.allclose(P.br_unconstrained(trunc, p, P.SupportVector.empty(5)), 0.0)

    def test_scalar_closed_form(self):
        lam = 1.7
        c = np.array([-0.8])
        eta = 2.3
        p = P.build_problem(np.array([[lam]]), c, s=1, eta=eta)
        trunc = P.truncate(P.eig_sym(p.Q), 1)
        alpha = P.br_unconstrained(trunc, p, P.SupportVector.full(1))
        expected = -np.sqrt(lam) * c[0] / (1.0 / eta + lam)
        assert alpha[0] == pytest.approx(expected, rel=1e-12)

    def test_stationarity_by_finite_differences(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p = random_psd_problem(rng, n=6)
            k = int(rng.integers(1, 7))
            trunc = P.truncate(P.eig_sym(p.Q), k)
            z = P.select_support(rng.standard_normal(6), p.s)
            alpha = P.br_unconstrained(trunc, p, z)

            def L_of(a):
                return P.eval_L(trunc, p, z, P.DualPoint(a, np.zeros(0)))

            assert np.linalg.norm(central_difference(L_of, alpha)) <= 1e-9 * max(
                1.0, np.linalg.norm(alpha)
            ) + 1e-9

    def test_rejects_constrained_problem(self):
        p = random_psd_problem(np.random.default_rng(2), n=4, m=1)
        trunc = P.truncate(P.eig_sym(p.Q), 2)
        with pytest.raises(DataError):
            P.br_unconstrained(trunc, p, P.SupportVector.full(4))


class TestBRConstrained:
    def test_vacuous_constraints_match_unconstrained(self):
        rng = np.random.default_rng(3)
        base = random_psd_problem(rng, n=5, s=2)
        p = P.build_problem(base.Q, base.c, np.zeros((2, 5)), np.zeros(2), s=2, eta=base.eta)
        trunc = P.truncate(P.eig_sym(p.Q), 3)
        z = P.select_support(p.c, 2)
        d = P.br_constrained(trunc, p, z)
        assert np.allclose(d.beta, 0.0)
        assert np.allclose(d.alpha, P.br_unconstrained(trunc, base, z), atol=1e-7)

    def test_inactive_constraint_matches_unconstrained(self):
        rng = np.random.default_rng(4)
        base = random_psd_problem(rng, n=5, s=2)
        # a very slack constraint stays inactive at the unconstrained optimum
        A = rng.standard_normal((1, 5))
        b = np.array([100.0])
        p = P.build_problem(base.Q, base.c, A, b, s=2, eta=base.eta)
        trunc = P.truncate(P.eig_sym(p.Q), 4)
        z = P.select_support(p.c, 2)
        d = P.br_constrained(trunc, p, z)
        assert np.allclose(d.alpha, P.br_unconstrained(trunc, base, z), atol=1e-6)

    def test_iteration_cap_warns_and_returns_best_iterate(self):
        rng = np.random.default_rng(30)
        base = random_psd_problem(rng, n=5, s=2)
        p = P.build_problem(base.Q, base.c, rng.standard_normal((2, 5)), np.full(2, 5.0), s=2, eta=base.eta)
        trunc = P.truncate(P.eig_sym(p.Q), 3)
        z = P.select_support(p.c, 2)
        with pytest.warns(RuntimeWarning, match="iteration cap"):
            d = P.br_constrained(trunc, p, z, P.BRConfig(qp_max_iters=1))
        assert d.alpha.shape == (3,) and d.beta.shape == (2,)

    def test_toy_instance_against_grid_refinement(self):
        Q = np.array([[1.5]])
        c = np.array([1.0])
        A = np.array([[1.0]])
        b = np.array([-0.4])
        p = P.build_problem(Q, c, A, b, s=1, eta=1.0)
        trunc = P.truncate(P.eig_sym(Q), 1)
        z = P.SupportVector.full(1)
        d = P.br_constrained(trunc, p, z)

        def L_of(a, be):
            return P.eval_L(trunc, p, z, P.DualPoint(np.array([a]), np.array([be])))

        lo_a, hi_a, lo_b, hi_b = -6.0, 6.0, 0.0, 8.0
        for _ in range(8):
            al = np.linspace(lo_a, hi_a, 41)
            bl = np.linspace(lo_b, hi_b, 41)
            vals = np.array([[L_of(a, be) for be in bl] for a in al])
            ia, ib = np.unravel_index(np.argmax(vals), vals.shape)
            ra, rb = (hi_a - lo_a) / 8, (hi_b - lo_b) / 8
            lo_a, hi_a = al[ia] - ra, al[ia] + ra
            lo_b, hi_b = max(0.0, bl[ib] - rb), bl[ib] + rb
        best_grid = vals.max()
        assert P.eval_L(trunc, p, z, d) == pytest.approx(best_grid, abs=1e-5)


class TestRunBestResponse:
    def test_dominant_support_fixed_point(self):
        p = dominant_instance()
        trunc = P.truncate(P.eig_sym(p.Q), p.n)
        trace = P.run_best_response(trunc, p)
        assert trace.converged_certificate
        assert trace.cycle_start <= 3
        z_star = trace.iterates[trace.cycle_start].z
        best, _ = level_value_by_enumeration(trunc, p)
        assert P.primal_value_k(trunc, p, z_star) == pytest.approx(best, rel=1e-9)

    def test_fixed_point_start_short_trace(self):
        p = dominant_instance()
        trunc = P.truncate(P.eig_sym(p.Q), p.n)
        first = P.run_best_response(trunc, p)
        z_star = first.iterates[first.cycle_start].z
        again = P.run_best_response(trunc, p, z0=z_star)
        assert again.cycle_period == 1
        assert len(again.iterates) <= 2

    def test_limit_cycle_without_saddle_point(self):
        # scanned seed: the alternation oscillates, so no certificate
        rng = np.random.default_rng(0)
        B = rng.standard_normal((8, 8))
        p = P.build_problem(B.T @ B / 8, rng.standard_normal(8), s=2, eta=2.0)
        trunc = P.truncate(P.eig_sym(p.Q), 8)
        trace = P.run_best_response(trunc, p)
        assert trace.cycle_period is not None and trace.cycle_period >= 2
        assert not trace.converged_certificate

    def test_certificate_instances_are_brute_force_optima(self):
        rng = np.random.default_rng(5)
        certified = 0
        for _ in range(40):
            p = random_psd_problem(rng, n=int(rng.integers(4, 9)))
            k = int(rng.integers(1, p.n + 1))
            trunc = P.truncate(P.eig_sym(p.Q), k)
            trace = P.run_best_response(trunc, p)
            if trace.converged_certificate:
                certified += 1
                z_star = trace.iterates[trace.cycle_start].z
                best, _ = level_value_by_enumeration(trunc, p)
                assert P.primal_value_k(trunc, p, z_star) == pytest.approx(
                    best, rel=1e-9, abs=1e-12
                )
        assert certified >= 1

    def test_best_response_dominates_random_duals(self):
        rng = np.random.default_rng(6)
        p = random_psd_problem(rng, n=6, m=2)
        trunc = P.truncate(P.eig_sym(p.Q), 4)
        for _ in range(5):
            z = P.select_support(rng.standard_normal(6), p.s)
            d_star = P.best_response(trunc, p, z)
            L_star = P.eval_L(trunc, p, z, d_star)
            for _ in range(100):
                d = P.DualPoint(rng.standard_normal(4), np.abs(rng.standard_normal(2)))
                assert L_star >= P.eval_L(trunc, p, z, d) - 1e-9

    def test_cycle_replay_reproduces_trace(self):
        rng = np.random.default_rng(0)
        B = rng.standard_normal((8, 8))
        p = P.build_problem(B.T @ B / 8, rng.standard_normal(8), s=2, eta=2.0)
        trunc = P.truncate(P.eig_sym(p.Q), 8)
        trace = P.run_best_response(trunc, p)
        assert trace.cycle_period is not None
        its = trace.iterates
        # support update replays from the recorded duals
        for i in range(trace.cycle_start, len(its)):
            expected_next = (
                its[i + 1].z if i + 1 < len(its) else its[trace.cycle_start].z
            )
            replayed = P.select_support(P.gamma(trunc, p, its[i].dual), p.s)
            assert replayed == expected_next
        # dual update replays from the previous support
        for i in range(max(trace.cycle_start, 1), len(its)):
            alpha = P.br_unconstrained(trunc, p, its[i - 1].z)
            assert np.allclose(alpha, its[i].alpha, atol=1e-12)

    def test_infeasible_start_rejected(self):
        p = random_psd_problem(np.random.default_rng(7), n=5, s=2)
        trunc = P.truncate(P.eig_sym(p.Q), 3)
        with pytest.raises(DataError):
            P.run_best_response(trunc, p, z0=P.SupportVector.full(5))

    def test_fresh_variant_also_certifies_dominant_instance(self):
        p = dominant_instance()
        trunc = P.truncate(P.eig_sym(p.Q), p.n)
        trace = P.run_best_response(trunc, p, cfg=P.BRConfig(fresh_support_update=True))
        assert trace.converged_certificate
        best, _ = level_value_by_enumeration(trunc, p)
        z_star = trace.iterates[trace.cycle_start].z
        assert P.primal_value_k(trunc, p, z_star) == pytest.approx(best, rel=1e-9)

    def test_random_start_is_seedable(self):
        p = random_psd_problem(np.random.default_rng(8), n=7, s=3)
        z1 = P.initial_support(p, np.random.default_rng(11))
        z2 = P.initial_support(p, np.random.default_rng(11))
        assert z1 == z2 and z1.count() == 3


class TestScreenFromTrace:
    def test_fixed_point_yields_exactly_s(self):
        p = dominant_instance()
        trunc = P.truncate(P.eig_sym(p.Q), p.n)
        trace = P.run_best_response(trunc, p)
        Z = P.screen_from_trace(trace)
        assert trace.cycle_period == 1
        assert Z == trace.iterates[trace.cycle_start].z
        assert Z.count() == p.s

    def test_or_of_alternating_supports(self):
        a = P.SupportVector.from_indices(4, [0, 1])
        b = P.SupportVector.from_indices(4, [1, 2])
        d = P.DualPoint.zeros(1, 0)
        trace = P.BRTrace(
            iterates=[
                P.Iterate(a, d.alpha, d.beta, 0.0),
                P.Iterate(b, d.alpha, d.beta, 0.0),
            ],
            cycle_start=None,
            cycle_period=None,
            converged_certificate=False,
        )
        assert tuple(P.screen_from_trace(trace, 2).indices()) == (0, 1, 2)

    def test_desk_scale_screened_size_mostly_below_2s(self):
        hits = 0
        trials = 10
        for seed in range(trials):
            ds = P.generate_synthetic(
                P.SyntheticSpec(n=30, samples=100, s_true=3, rho=0.5, snr=6.0, seed=seed)
            )
            prob = P.from_regression(ds.train, s=3, eta=1.0)
            trunc = P.truncate(P.eig_sym(prob.Q), 12)
            trace = P.run_best_response(trunc, prob, cfg=P.BRConfig(max_iters=20))
            if P.screen_from_trace(trace, 6).count() <= 2 * prob.s:
                hits += 1
        assert hits >= 0.9 * trials

    def test_window_validation(self):
        with pytest.raises(DataError):
            P.screen_from_trace(
                P.BRTrace(iterates=[], cycle_start=None, cycle_period=None, converged_certificate=False),
                1,
            )
