import math

import numpy as np
import pytest

from laemec.flow import MinCostMaxFlow
from laemec.instance import record_seed, sample_scenario
from laemec.solve import (EnumerationCapError, InfeasibleAllocationError,
                          Solution, SolverError, check_constraints,
                          evaluate_objective, inner_allocation,
                          solve_alternating, solve_bruteforce, solve_mcmf,
                          solve_random)

from synth_instances import build_instance, feat


def grid_search_allocation(loads, step=1e-4):
    """Independent allocation oracle: pairwise quanta transfers on the
    step grid until no single transfer improves the cost."""
    quanta = round(1.0 / step)
    n = len(loads)
    js = [j for j, _ in loads]
    qmin = [max(1, math.ceil(m * quanta - 1e-9)) for _, m in loads]
    q = list(qmin)
    q[0] += quanta - sum(q)

    def pair_gain(i, k, d):
        before = js[i] / (q[i] * step) + js[k] / (q[k] * step)
        after = js[i] / ((q[i] - d) * step) + js[k] / ((q[k] + d) * step)
        return after - before

    improved = True
    while improved:
        improved = False
        d = quanta
        while d >= 1:
            for i in range(n):
                for k in range(n):
                    if i == k:
                        continue
                    while q[i] - d >= qmin[i] \
                            and pair_gain(i, k, d) < -1e-12:
                        q[i] -= d
                        q[k] += d
                        improved = True
            d //= 2
    return [qi * step for qi in q]


def alloc_cost(loads, ys):
    return sum(j / y for (j, _), y in zip(loads, ys))


def random_loads(rng, n):
    js = rng.uniform(0.5, 50.0, n)
    mus = rng.uniform(0.02, 0.9 / n, n)
    return list(zip(js.tolist(), mus.tolist()))


class TestInnerAllocation:
    def test_proportional_to_sqrt(self):
        y = inner_allocation([(1.0, 0.1), (4.0, 0.1)])
        assert y == pytest.approx([1 / 3, 2 / 3])
        assert alloc_cost([(1.0, 0.1), (4.0, 0.1)], y) == pytest.approx(9.0)

    def test_pinned_lower_bound(self):
        y = inner_allocation([(1.0, 0.6), (1.0, 0.1)])
        assert y == pytest.approx([0.6, 0.4])

    def test_single_load_gets_everything(self):
        assert inner_allocation([(3.0, 0.2)]) == pytest.approx([1.0])

    def test_infeasible_minimums(self):
        with pytest.raises(InfeasibleAllocationError):
            inner_allocation([(1.0, 0.6), (1.0, 0.5)])

    def test_invalid_loads(self):
        with pytest.raises(ValueError):
            inner_allocation([(0.0, 0.1)])
        with pytest.raises(ValueError):
            inner_allocation([(1.0, 0.0)])

    def test_matches_grid_search(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            loads = random_loads(rng, int(rng.integers(2, 7)))
            closed = alloc_cost(loads, inner_allocation(loads))
            grid = alloc_cost(loads, grid_search_allocation(loads))
            assert closed <= grid * (1 + 1e-4)

    def test_kkt_properties(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            loads = random_loads(rng, int(rng.integers(2, 7)))
            y = inner_allocation(loads)
            mus = [m for _, m in loads]
            assert all(v >= m - 1e-12 for v, m in zip(y, mus))
            pinned = [v <= m + 1e-12 for v, m in zip(y, mus)]
            if not all(pinned):
                assert sum(y) == pytest.approx(1.0, abs=1e-9)
            # any epsilon transfer between unpinned coordinates hurts
            free = [i for i, p in enumerate(pinned) if not p]
            eps = 1e-6
            base = alloc_cost(loads, y)
            for i in free:
                for k in free:
                    if i == k or y[i] - eps < mus[i]:
                        continue
                    trial = list(y)
                    trial[i] -= eps
                    trial[k] += eps
                    assert alloc_cost(loads, trial) >= base - 1e-12


class TestEvaluateObjective:
    def test_all_local_counts_each_user_once(self, two_server_instance):
        inst = two_server_instance
        sol = Solution((0,) * inst.n_edges, (0.0,) * inst.n_edges)
        expected = 0.0
        for u in inst.users:
            expected += inst.edges[inst.user_edges[u][0]].feature.j_loc
        assert evaluate_objective(inst, sol) == pytest.approx(expected)

    def test_mode_difference_for_multi_degree_user(self):
        inst = build_instance(1, [[(0, feat(j_loc=7.0)),
                                   (1, feat(j_loc=7.0))]])
        sol = Solution((0, 0), (0.0, 0.0))
        assert evaluate_objective(inst, sol, "per_user") \
            == pytest.approx(7.0)
        assert evaluate_objective(inst, sol, "literal_edge_sum") \
            == pytest.approx(14.0)

    def test_full_allocation_offload(self):
        inst = build_instance(1, [[(0, feat(j_tr=2.0, j_exe=5.0))]])
        sol = Solution((1,), (1.0,))
        assert evaluate_objective(inst, sol) == pytest.approx(7.0)

    def test_zero_allocation_sentinel(self):
        inst = build_instance(1, [[(0, feat())]])
        sol = Solution((1,), (0.0,))
        assert math.isinf(evaluate_objective(inst, sol))
        assert math.isinf(evaluate_objective(inst, sol,
                                             "literal_edge_sum"))

    def test_length_mismatch(self, two_server_instance):
        with pytest.raises(ValueError):
            evaluate_objective(two_server_instance, Solution((0,), (0.0,)))

    def test_unknown_mode(self, two_server_instance):
        inst = two_server_instance
        sol = Solution((0,) * inst.n_edges, (0.0,) * inst.n_edges)
        with pytest.raises(ValueError):
            evaluate_objective(inst, sol, "banana")

    def test_edge_order_invariance(self):
        specs = [[(0, feat(j_tr=1.0, j_exe=4.0, mu=0.2)),
                  (1, feat(j_tr=2.0, j_exe=3.0, mu=0.1))],
                 [(0, feat(j_tr=0.5, j_exe=6.0, mu=0.3))]]
        inst = build_instance(1, specs)
        x = (1, 0, 1)
        y = (0.5, 0.0, 0.5)
        base = evaluate_objective(inst, Solution(x, y))
        # permute the edges and the solution together
        perm = [2, 0, 1]
        from laemec.instance import ProblemInstance
        edges = tuple(inst.edges[p] for p in perm)
        shuffled = ProblemInstance(inst.nodes, edges, 1, 2, 0)
        x2 = tuple(x[p] for p in perm)
        y2 = tuple(y[p] for p in perm)
        assert evaluate_objective(shuffled, Solution(x2, y2)) \
            == pytest.approx(base, rel=1e-12)


class TestCheckConstraints:
    def test_all_local_with_lambda_one_passes(self):
        inst = build_instance(1, [[(0, feat(lam=1))],
                                  [(0, feat(lam=1)), (1, feat(lam=1))]])
        sol = Solution((0, 0, 0), (0.0, 0.0, 0.0))
        assert check_constraints(inst, sol).passed

    def test_c3_two_edges_selected(self):
        inst = build_instance(1, [[(0, feat()), (1, feat())]])
        report = check_constraints(inst, Solution((1, 1), (0.5, 0.5)))
        assert not report.c3
        assert report.first_violation["c3"] == 2  # the user's node index

    def test_c4_oversubscribed_server(self):
        inst = build_instance(1, [[(0, feat(mu=0.2))], [(0, feat(mu=0.2))]])
        report = check_constraints(inst, Solution((1, 1), (0.7, 0.5)))
        assert not report.c4
        assert report.first_violation["c4"] == 0

    def test_c5_local_needs_lambda(self):
        inst = build_instance(1, [[(0, feat(lam=0))]])
        report = check_constraints(inst, Solution((0,), (0.0,)))
        assert not report.c5

    def test_c5_allocation_below_mu(self):
        inst = build_instance(1, [[(0, feat(mu=0.5))]])
        report = check_constraints(inst, Solution((1,), (0.3,)))
        assert not report.c5
        assert report.first_violation["c5"] == 0

    def test_c1_c2_violations(self):
        inst = build_instance(1, [[(0, feat())]])
        assert not check_constraints(inst, Solution((2,), (0.5,))).c1
        assert not check_constraints(inst, Solution((1,), (1.5,))).c2


class TestBruteforce:
    def test_offload_dominance(self):
        inst = build_instance(1, [[(0, feat(j_loc=100.0, j_tr=1.0,
                                            j_exe=10.0, lam=1, mu=0.2))]])
        sol = solve_bruteforce(inst)
        assert sol.x == (1,)
        assert sol.y[0] == pytest.approx(1.0)

    def test_all_local_forced_when_mu_zero(self):
        inst = build_instance(1, [[(0, feat(lam=1, mu=0.0))]])
        sol = solve_bruteforce(inst)
        assert sol.x == (0,)

    def test_local_preferred_when_cheaper(self):
        inst = build_instance(1, [[(0, feat(j_loc=5.0, j_tr=1.0,
                                            j_exe=10.0, lam=1, mu=0.2))]])
        sol = solve_bruteforce(inst)
        assert sol.x == (0,)

    def test_cap_enforced(self):
        inst = sample_scenario((2, 4, 2), seed=30)
        with pytest.raises(EnumerationCapError):
            solve_bruteforce(inst, cap=3)

    def test_lexicographic_tie_break(self):
        f = feat(j_tr=1.0, j_exe=10.0, mu=0.2)
        inst = build_instance(2, [[(1, f), (2, f)]])
        sol = solve_bruteforce(inst)
        assert sol.x == (0, 1)

    def test_infeasible_instance_raises(self):
        inst = build_instance(1, [[(0, feat(mu=0.8))], [(0, feat(mu=0.8))]])
        with pytest.raises(SolverError):
            solve_bruteforce(inst)

    def test_dominates_every_solver_on_random_instances(self):
        for i in range(25):
            inst = sample_scenario((2, 4, 2), seed=record_seed(31, i))
            best = evaluate_objective(inst, solve_bruteforce(inst))
            for sol in (solve_alternating(inst),
                        solve_random(inst, seed=record_seed(32, i)),
                        solve_mcmf(inst)):
                assert best <= evaluate_objective(inst, sol) + 1e-9


def distinct_server_instance():
    # each user has one cheap private server plus the shared (dear) HAP
    users = []
    for i in range(3):
        users.append([(0, feat(j_tr=5.0, j_exe=30.0, mu=0.6)),
                      (1 + i, feat(j_tr=0.5, j_exe=6.0, mu=0.2))])
    return build_instance(3, users)


class TestAlternating:
    def test_finds_uncontended_optimum(self):
        inst = distinct_server_instance()
        sol = solve_alternating(inst)
        assert evaluate_objective(inst, sol) == pytest.approx(
            evaluate_objective(inst, solve_bruteforce(inst)))

    def test_output_feasible_on_random_instances(self):
        for i in range(20):
            inst = sample_scenario((2, 5, 3), seed=record_seed(33, i))
            sol = solve_alternating(inst)
            assert check_constraints(inst, sol).passed

    def test_deterministic(self):
        inst = sample_scenario((2, 4, 2), seed=34)
        assert solve_alternating(inst) == solve_alternating(inst)


class TestRandom:
    def test_deterministic_given_seed(self):
        inst = sample_scenario((2, 4, 2), seed=35)
        a = solve_random(inst, n_candidates=1, seed=7)
        b = solve_random(inst, n_candidates=1, seed=7)
        assert a == b

    def test_seed_changes_output(self):
        inst = sample_scenario((2, 4, 2), seed=36)
        outs = {solve_random(inst, seed=s).y for s in range(6)}
        assert len(outs) > 1

    def test_feasible_on_random_instances(self):
        for i in range(20):
            inst = sample_scenario((2, 4, 2), seed=record_seed(37, i))
            sol = solve_random(inst, seed=record_seed(38, i))
            assert check_constraints(inst, sol).passed

    def test_candidate_count_validated(self):
        inst = sample_scenario((2, 4, 2), seed=39)
        with pytest.raises(ValueError):
            solve_random(inst, n_candidates=0)


class TestMCMF:
    def test_matches_oracle_without_contention(self):
        inst = distinct_server_instance()
        a = evaluate_objective(inst, solve_mcmf(inst))
        b = evaluate_objective(inst, solve_bruteforce(inst))
        assert a == pytest.approx(b, rel=1e-9)

    def test_respects_mu_and_capacity(self):
        for i in range(20):
            inst = sample_scenario((3, 6, 4), seed=record_seed(40, i))
            sol = solve_mcmf(inst)
            report = check_constraints(inst, sol)
            assert report.passed
            for s in inst.servers:
                load = sum(sol.y[k] for k in inst.server_edges[s]
                           if sol.x[k])
                assert load <= 1.0 + 1e-9

    def test_parameter_validation(self):
        inst = sample_scenario((2, 4, 2), seed=41)
        with pytest.raises(ValueError):
            solve_mcmf(inst, y_quanta=1)
        with pytest.raises(ValueError):
            solve_mcmf(inst, weight_grid=0)

    def test_deterministic(self):
        inst = sample_scenario((2, 4, 2), seed=42)
        assert solve_mcmf(inst) == solve_mcmf(inst)


class TestFlowSolver:
    def test_textbook_example(self):
        # two disjoint augmenting paths, one shared expensive arc
        net = MinCostMaxFlow(4)
        net.add_edge(0, 1, 2, 1)
        net.add_edge(0, 2, 1, 2)
        net.add_edge(1, 3, 1, 1)
        net.add_edge(1, 2, 1, 1)
        net.add_edge(2, 3, 2, 1)
        flow, cost = net.max_flow(0, 3)
        assert flow == 3
        assert cost == 2 + 3 + 3  # 0-1-3, 0-1-2-3, 0-2-3

    def test_flow_on_reports_arc_usage(self):
        net = MinCostMaxFlow(3)
        cheap = net.add_edge(0, 1, 1, 0)
        net.add_edge(1, 2, 1, 0)
        expensive = net.add_edge(0, 2, 1, 5)
        flow, cost = net.max_flow(0, 2)
        assert flow == 2
        assert net.flow_on(cheap) == 1
        assert net.flow_on(expensive) == 1

    def test_negative_cost_rejected(self):
        net = MinCostMaxFlow(2)
        with pytest.raises(ValueError):
            net.add_edge(0, 1, 1, -1)
