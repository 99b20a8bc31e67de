import numpy as np
import pytest

from sepsplit import operators as ops
from sepsplit import problems
from sepsplit.base import ConfigurationError, LineSearchError
from sepsplit.linesearch import acceptance_gap, backtrack, trial_point
from sepsplit.problems import ProblemInstance


def scaled_identity_problem():
    return ProblemInstance("si", ops.Zero(2), ops.ScaledIdentity(1.0, 2), ops.Zero(2), problems.SinglePoint([0.0, 0.0]))


def test_skew_a2_accepts_first_trial():
    p = problems.rotation2d()
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.standard_normal(2)
        res = backtrack(p, x, 0.8, 0.5, 0.3)
        assert res.j_k == 0 and res.alpha_k == 0.8 and res.trials == 1


def test_scaled_identity_hand_example():
    # x_bar_j = (1 - alpha_j) x; acceptance needs alpha_j <= delta / c = 0.25
    res = backtrack(scaled_identity_problem(), np.array([1.0, -2.0]), 1.0, 0.5, 0.25)
    assert res.j_k == 2
    assert res.alpha_k == 0.25
    assert res.trials == 3
    np.testing.assert_allclose(res.x_bar, 0.75 * np.array([1.0, -2.0]), atol=1e-15)


def test_fixed_point_accepts_immediately():
    p = problems.box_vip()
    x = p.solution.point
    res = backtrack(p, x, 1.0, 0.5, 0.5)
    assert res.j_k == 0
    assert np.linalg.norm(res.x_bar - x) <= 1e-14


def test_postconditions_on_catalog():
    rng = np.random.default_rng(1)
    theta, delta = 0.5, 0.4
    for p in problems.catalog():
        for _ in range(10):
            x = 2 * rng.standard_normal(p.dim)
            res = backtrack(p, x, 1.0, theta, delta)
            assert res.alpha_k == 1.0 * theta**res.j_k
            np.testing.assert_array_equal(res.x_bar, trial_point(p, x, res.alpha_k))
            assert acceptance_gap(res.alpha_k, x, res.x_bar, res.a2x, res.a2x_bar, delta) >= 0.0
            if res.j_k > 0:
                a = res.alpha_k / theta
                xb = trial_point(p, x, a)
                assert acceptance_gap(a, x, xb, p.a2.apply(x), p.a2.apply(xb), delta) < 0.0
            # acceptance consequence <w2, x - x_bar> >= (1 - delta)/alpha ||x - x_bar||^2
            d = x - res.x_bar
            w2 = d / res.alpha_k - (res.a2x - res.a2x_bar)
            assert float(w2 @ d) >= (1 - delta) / res.alpha_k * float(d @ d) - 1e-12 * max(1.0, float(d @ d) / res.alpha_k)


def test_deterministic():
    p = problems.skew_mix()
    x = np.array([3.0, -1.0, 2.0])
    a = backtrack(p, x, 1.0, 0.7, 0.5)
    b = backtrack(p, x, 1.0, 0.7, 0.5)
    assert a.j_k == b.j_k and a.x_bar.tobytes() == b.x_bar.tobytes()


def test_exhausted_budget_raises():
    # a huge Lipschitz constant needs ~log2(1e12) halvings, more than the budget
    p = ProblemInstance("stiff", ops.Zero(2), ops.ScaledIdentity(1e12, 2), ops.Zero(2))
    with pytest.raises(LineSearchError) as info:
        backtrack(p, np.array([1.0, 1.0]), 1.0, 0.5, 0.5, max_trials=10)
    assert info.value.trials == 10


@pytest.mark.parametrize(
    "kwargs",
    [dict(alpha_prev=0.0), dict(theta=1.0), dict(theta=0.0), dict(delta=1.0), dict(max_trials=0)],
)
def test_bad_parameters(kwargs):
    args = dict(alpha_prev=1.0, theta=0.5, delta=0.5, max_trials=5)
    args.update(kwargs)
    with pytest.raises(ConfigurationError):
        backtrack(problems.rotation2d(), np.array([1.0, 0.0]), **args)
