import numpy as np
import pytest

from laemec.cost import (ServerCompute, Task, UserCompute, deadline_params,
                         execution_cost, local_cost, transmission_cost)


def make_task(workload=4.5e9, data_size=4.5e6, deadline=2.0, w=0.5):
    return Task(workload, data_size, deadline, w)


USER = UserCompute(local_freq=3e6, chip_energy_factor=1.2e10, tx_power=0.2)
SERVER = ServerCompute(total_freq=1.2e10, active_power=120.0)


class TestLocalCost:
    def test_delay_from_median_parameters(self):
        c = local_cost(make_task(), USER)
        assert c.delay == pytest.approx(1500.0)

    def test_delay_only_weight(self):
        c = local_cost(make_task(w=1.0), USER)
        assert c.weighted == pytest.approx(c.delay)

    def test_energy_only_weight(self):
        c = local_cost(make_task(w=0.0), USER)
        assert c.weighted == pytest.approx(c.energy)

    def test_energy_formula(self):
        c = local_cost(make_task(), USER)
        assert c.energy == pytest.approx(1.2e10 * (3e6) ** 3 * 1500.0)


class TestTransmissionCost:
    def test_unit_rate_case(self):
        c = transmission_cost(Task(1e9, 1e6, 2.0, 0.5), 1e6, USER)
        assert c.delay == pytest.approx(1.0)
        assert c.energy == pytest.approx(0.2)

    def test_rate_linearity(self):
        t = make_task()
        c1 = transmission_cost(t, 5e6, USER)
        c2 = transmission_cost(t, 1e7, USER)
        assert c1.delay == pytest.approx(2.0 * c2.delay)
        assert c1.energy == pytest.approx(2.0 * c2.energy)

    def test_hand_computed(self):
        c = transmission_cost(Task(8e9, 8e6, 2.0, 0.5), 7.98e7, USER)
        assert c.delay == pytest.approx(0.1003, rel=1e-3)
        assert c.energy == pytest.approx(0.02005, rel=1e-3)
        assert c.weighted == pytest.approx(0.0602, rel=1e-2)

    def test_nonpositive_rate(self):
        with pytest.raises(ValueError):
            transmission_cost(make_task(), 0.0, USER)


class TestExecutionCost:
    def test_delay(self):
        c = execution_cost(make_task(), SERVER, 0.5)
        assert c.delay == pytest.approx(0.375)

    def test_weighted_hand_computed(self):
        c = execution_cost(make_task(), SERVER, 0.3)
        assert c.weighted == pytest.approx(0.3 * 0.375 + 0.7 * 45.0)

    def test_infinite_frequency_limit(self):
        c = execution_cost(make_task(), ServerCompute(1e30, 120.0), 0.5)
        assert c.delay < 1e-20
        assert c.energy < 1e-17
        assert c.weighted < 1e-17


class TestDeadlineParams:
    def test_hand_computed_mu(self):
        # transmission takes 0.5 s of the 2 s budget
        task = Task(4.5e9, 5e6, 2.0, 0.5)
        lam, mu = deadline_params(task, USER, 1e7, SERVER)
        assert lam == 0
        assert mu == pytest.approx(4.5e9 / (1.5 * 1.2e10))

    def test_boundary_gives_mu_one(self):
        # t_tr + workload/F equals the deadline exactly
        task = Task(1.2e10, 1e7, 2.0, 0.5)
        lam, mu = deadline_params(task, USER, 1e7, SERVER)
        assert mu == pytest.approx(1.0)

    def test_transmission_alone_exceeds_deadline(self):
        task = Task(4.5e9, 3e7, 2.0, 0.5)
        _, mu = deadline_params(task, USER, 1e7, SERVER)
        assert mu == 0.0

    def test_lambda_local_feasible(self):
        task = Task(5e6, 1e6, 2.0, 0.5)  # 5e6 / 3e6 < 2 s
        lam, _ = deadline_params(task, USER, 1e7, SERVER)
        assert lam == 1

    def test_mu_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            task = Task(rng.uniform(1e9, 8e9), rng.uniform(1e5, 1e7), 2.0,
                        0.5)
            _, mu = deadline_params(task, USER, rng.uniform(1e6, 1e9),
                                    SERVER)
            assert 0.0 <= mu <= 1.0

    def test_deadline_attained_at_mu(self):
        # offloading at exactly y=mu uses the whole delay budget
        rng = np.random.default_rng(6)
        for _ in range(300):
            task = Task(rng.uniform(1e9, 8e9), rng.uniform(1e5, 5e6), 2.0,
                        0.5)
            rate = rng.uniform(5e6, 5e8)
            _, mu = deadline_params(task, USER, rate, SERVER)
            if mu == 0.0:
                continue
            total = task.data_size / rate \
                + task.workload / (mu * SERVER.total_freq)
            assert total == pytest.approx(task.deadline, rel=1e-9)

    def test_mu_monotonicity(self):
        task = make_task()
        _, mu_slow = deadline_params(task, USER, 1e7, SERVER)
        _, mu_fast = deadline_params(task, USER, 1e8, SERVER)
        assert mu_fast <= mu_slow
        big = Task(6e9, 4.5e6, 2.0, 0.5)
        _, mu_big = deadline_params(big, USER, 1e7, SERVER)
        assert mu_big >= mu_slow


class TestWeightedCombination:
    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            w = rng.uniform(0.0, 1.0)
            task = Task(rng.uniform(1e9, 8e9), rng.uniform(1e5, 1e7), 2.0, w)
            for c in (local_cost(task, USER),
                      transmission_cost(task, 1e7, USER),
                      execution_cost(task, SERVER, w)):
                assert min(c.delay, c.energy) - 1e-12 <= c.weighted
                assert c.weighted <= max(c.delay, c.energy) + 1e-12

    def test_invariant_validation(self):
        with pytest.raises(ValueError):
            Task(1e9, 1e6, 2.0, 1.5)
        with pytest.raises(ValueError):
            Task(-1e9, 1e6, 2.0, 0.5)
        with pytest.raises(ValueError):
            UserCompute(0.0, 1e10, 0.2)
        with pytest.raises(ValueError):
            ServerCompute(1e10, 0.0)
