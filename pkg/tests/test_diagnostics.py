"""Front-dynamics diagnostics: EI decomposition and persistence."""

import numpy as np
import pytest

from paretobo.acquisition import Candidate, dominates, ei, pareto_front
from paretobo.cost import ConstantCost
from paretobo.diagnostics import (
    FrontSnapshot,
    ei_decomposition,
    front_persistence,
    rescore,
)
from paretobo.surrogate import KernelParams, build_model, gp_posterior


def toy_model(seed, n=6):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(n, 2))
    y = rng.normal(size=n)
    params = KernelParams(1.0, np.array([0.3, 0.4]), 0.01)
    return build_model(X, y, params)


class TestDecomposition:
    def test_nothing_changed_gives_zeros(self):
        model = toy_model(0)
        x = np.array([0.5, 0.5])
        dec = ei_decomposition(model, model, 0.3, 0.3, x)
        assert abs(dec.global_term) < 1e-12
        assert abs(dec.local_term) < 1e-12
        assert abs(dec.exact_delta) < 1e-12

    def test_incumbent_drop_in_high_certainty_region(self):
        # at a point whose posterior sits far below both incumbents, the EI
        # change is exactly the incumbent drop and the local term vanishes
        model = toy_model(1)
        x = model.train_inputs[0]
        post = gp_posterior(model, x)
        sigma = np.sqrt(post.variance)
        y_min_t = post.mean + 8 * sigma + 1.0
        delta = 0.25
        dec = ei_decomposition(model, model, y_min_t, y_min_t - delta, x)
        assert dec.exact_delta == pytest.approx(-delta, abs=1e-6)
        assert dec.local_term == pytest.approx(0.0, abs=1e-6)

    def test_exact_delta_is_definitional(self):
        rng = np.random.default_rng(7)
        for seed in range(20):
            m_t = toy_model(seed)
            m_t1 = toy_model(seed + 100)
            y_t = float(rng.normal())
            y_t1 = y_t - abs(rng.normal())
            x = rng.uniform(size=2)
            dec = ei_decomposition(m_t, m_t1, y_t, y_t1, x)
            p_t = gp_posterior(m_t, x)
            p_t1 = gp_posterior(m_t1, x)
            direct = ei(p_t1.mean, np.sqrt(p_t1.variance), y_t1) - ei(
                p_t.mean, np.sqrt(p_t.variance), y_t
            )
            assert dec.exact_delta == pytest.approx(direct, abs=1e-12)
            assert dec.global_term + dec.local_term == pytest.approx(
                dec.exact_delta, abs=1e-12
            )


class TestPersistence:
    @staticmethod
    def snapshot_from(model, cost_model, points, f_min, iteration=1):
        cands = rescore(points, model, cost_model, f_min)
        return FrontSnapshot(iteration=iteration, front=tuple(pareto_front(cands)))

    def test_unchanged_models_full_survival(self):
        model = toy_model(2)
        cost_model = ConstantCost(log_cost=0.5, _space=None)
        rng = np.random.default_rng(3)
        points = rng.uniform(size=(12, 2))
        f_min = 0.0
        snap = self.snapshot_from(model, cost_model, points, f_min)
        stat = front_persistence(snap, model, cost_model, f_min, snap.front)
        assert stat.survived == stat.total == len(snap.front)

    def test_constructed_dethroning(self):
        model = toy_model(4)
        cost_model = ConstantCost(log_cost=0.0, _space=None)
        old_point = model.train_inputs[0]
        old_front = (Candidate(point=old_point, ei=0.9, cost_pred=1.0),)
        post = gp_posterior(model, old_point)
        # incumbent far below the posterior: re-scored EI collapses to ~0
        f_min = post.mean - 10 * np.sqrt(post.variance) - 5.0
        challenger = Candidate(point=np.array([0.9, 0.9]), ei=0.5, cost_pred=0.5)
        stat = front_persistence(
            FrontSnapshot(iteration=1, front=old_front),
            model,
            cost_model,
            f_min,
            [challenger],
        )
        assert stat.total == 1
        assert stat.survived == 0

    def test_matches_brute_force_recount(self):
        rng = np.random.default_rng(9)
        for seed in range(10):
            m_t = toy_model(seed, n=5)
            m_t1 = toy_model(seed + 50, n=5)
            cost_model = ConstantCost(log_cost=0.2, _space=None)
            points = rng.uniform(size=(15, 2))
            snap = self.snapshot_from(m_t, cost_model, points, 0.5)
            current = rescore(rng.uniform(size=(15, 2)), m_t1, cost_model, 0.2)
            current_front = pareto_front(current)
            stat = front_persistence(snap, m_t1, cost_model, 0.2, current_front)

            rescored = rescore([c.point for c in snap.front], m_t1, cost_model, 0.2)
            union = rescored + list(current_front)
            expected = sum(
                1
                for c in rescored
                if not any(
                    dominates(other, c) == "strict"
                    for other in union
                    if other is not c
                )
            )
            assert stat.survived == expected
            assert 0 <= stat.survived <= stat.total
            assert len(stat.flags) == stat.total
            assert len(stat.rescored) == stat.total
