import math

import numpy as np
import pytest

from random_search.errors import PlanningError
from random_search.objectives import TheoryConstants
from random_search.planner import (
    Plan,
    PlanRegime,
    brute_force_epoch,
    closed_form_epoch,
    epoch_calls,
    format_plan,
    iteration_budget,
    plan_parameters,
    vr_batch,
)


def _constants(**overrides):
    values = dict(L0=1.0, L1=2.0, G=1.0, sigma0=0.5, sigma1=0.8, F0=3.0, mu_D=0.15, dim=10)
    values.update(overrides)
    return TheoryConstants(**values)


def test_iteration_budget_formula():
    # d L1 / eps + d L0 F0 / eps^2 = 200 + 3000
    T = iteration_budget(_constants(), 0.1)
    assert 3200 <= T <= 3201


def test_closed_form_epoch_example():
    assert closed_form_epoch(10**6, 30, 1.0, 0.1) == pytest.approx((10**6 * 0.01 / 30) ** (1 / 3))
    plan = plan_parameters(
        PlanRegime.FINITE_SUM_VR, _constants(G=1.0, dim=30), 0.1, 10**6
    )
    assert plan.m == 6
    assert plan.b == vr_batch(6, 30, 1.0, 0.1)
    assert plan.b <= 10**6
    assert any("factor d" in note for note in plan.notes)


def test_closed_form_is_within_factor_two_of_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(10 ** rng.uniform(3, 7))
        d = int(rng.integers(2, 101))
        G = float(rng.uniform(0.5, 2.0))
        eps = float(rng.uniform(0.05, 0.5))
        plan = plan_parameters(PlanRegime.FINITE_SUM_VR, _constants(G=G, dim=d), eps, n)
        best = brute_force_epoch(n, d, G, eps)
        planned = epoch_calls(plan.m, 1.0, n, d, G, eps)
        assert planned <= 2.0 * epoch_calls(best, 1.0, n, d, G, eps)


def test_epoch_fallback_when_batch_exceeds_n(caplog):
    plan = plan_parameters(PlanRegime.FINITE_SUM_VR, _constants(G=5.0, dim=30), 0.05, 1000)
    assert plan.m == 1
    assert plan.b <= 1000
    assert any("exceeds n" in note for note in plan.notes)


def test_every_plan_respects_its_caps():
    rng = np.random.default_rng(1)
    for regime in PlanRegime:
        for _ in range(10):
            c = _constants(
                L0=float(rng.uniform(0.1, 5)),
                L1=float(rng.uniform(0.0, 5)),
                F0=float(rng.uniform(0.1, 10)),
                mu_D=float(rng.uniform(0.05, 0.5)),
            )
            plan = plan_parameters(regime, c, float(rng.uniform(0.05, 1.0)), 1000, delta=1e-3)
            assert plan.satisfies_caps()
            assert plan.eta > 0 and plan.T >= 1 and plan.b >= 1


def test_cap_names_per_regime():
    c = _constants()
    assert set(plan_parameters("avg-smooth", c, 0.1, 100).caps) == {"descent"}
    assert set(plan_parameters("helper", c, 0.1, 100).caps) == {"descent"}
    assert set(plan_parameters("finite-sum-vr", c, 0.1, 10**6).caps) == {"descent-sample"}
    sample = plan_parameters("sample-smooth", c, 0.1, 100)
    assert set(sample.caps) == {"descent-sample", "individual"}
    assert sample.caps["descent-sample"] == pytest.approx(0.15 / 10.0)
    assert sample.caps["individual"] == pytest.approx(
        0.15 * math.sqrt(sample.b) / (32 * math.sqrt(2) * 2.0)
    )


def test_binding_cap_is_reported():
    # tiny mu_D / L1 makes the descent cap the smallest candidate
    plan = plan_parameters("avg-smooth", _constants(mu_D=1e-6, L1=10.0), 0.1, 100)
    assert plan.eta == pytest.approx(1e-7)
    assert plan.caps_applied == ["descent"]


def test_helper_term_only_when_delta_positive():
    c = _constants(L1=0.0, F0=100.0)
    with_delta = plan_parameters("helper", c, 0.5, 10, delta=1e-8)
    assert with_delta.eta == pytest.approx(math.sqrt(2e-8))
    assert any("helper" in note for note in with_delta.notes)
    without = plan_parameters("helper", c, 0.5, 10, delta=0.0)
    assert without.eta > with_delta.eta


def test_batch_formulas():
    c = _constants(sigma0=0.5, L0=1.0, dim=10)
    avg = plan_parameters("avg-smooth", c, 1.0, 100)
    assert avg.b == math.ceil((10 * 1.0 * 0.5) ** 2)
    sample = plan_parameters("sample-smooth", c, 0.5, 100)
    assert sample.b == math.ceil(0.8**2 / 0.25)


def test_invalid_inputs():
    with pytest.raises(PlanningError):
        plan_parameters("avg-smooth", _constants(), 0.0, 100)
    with pytest.raises(PlanningError):
        plan_parameters("avg-smooth", _constants(), 0.1, 0)
    with pytest.raises(PlanningError):
        plan_parameters("helper", _constants(), 0.1, 10, delta=-1.0)
    with pytest.raises(PlanningError):
        Plan(eta=0.0, T=1)
    with pytest.raises(ValueError):
        plan_parameters("nonsense", _constants(), 0.1, 10)


def test_format_plan_lists_caps():
    text = format_plan(plan_parameters("sample-smooth", _constants(), 0.2, 100))
    assert "caps_applied:" in text
    assert "individual" in text
    assert text.startswith("regime: sample-smooth")
