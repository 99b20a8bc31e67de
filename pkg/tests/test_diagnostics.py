import math

import numpy as np
import pytest

from sepsplit import diagnostics as D
from sepsplit import operators as ops
from sepsplit import problems
from sepsplit.problems import ProblemInstance, SinglePoint
from sepsplit.solvers import SolverConfig, solve


def run(name, method, x0, **kw):
    p = problems.get_problem(name)
    return p, solve(p, method, SolverConfig(**kw), x0)


def test_fejer_vacuous_single_iterate():
    p, res = run("box_vip", "Method1", problems.box_vip().solution.point)
    assert len(D.iterates(res.trace)) == 1
    assert D.fejer_check(res.trace, p.solution.point).passed


def test_fejer_method1_affine_grad():
    p, res = run("affine_grad", "Method1", [1.0, 2.0])
    for xs in ([0.0, 2.0], [0.0, -5.0], [0.0, 0.0]):
        assert D.fejer_check(res.trace, xs).passed


def test_fejer_fb_rotation_fails_every_step():
    alpha = 0.5
    p, res = run("rotation2d", "FB", [1.0, 0.0], fixed_alpha=alpha, max_iter=20)
    rep = D.fejer_check(res.trace, [0.0, 0.0])
    assert rep.passed is False and rep.value > 0
    norms = [np.linalg.norm(x) for x in D.iterates(res.trace)]
    assert all(b - a > 0 for a, b in zip(norms, norms[1:]))
    np.testing.assert_allclose(np.diff(np.log(norms)), 0.5 * math.log(1 + alpha**2), rtol=1e-12)


def test_ball_boundary_at_x0():
    x0 = np.array([1.0, 2.0])
    p, res = run("affine_grad", "Method2", x0, max_iter=1)
    rep = D.ball_check(res.trace[:1], x0, [0.0, 2.0])
    assert rep.passed and abs(rep.value) <= 1e-15


def test_ball_method2_affine_grad():
    x0 = np.array([1.0, 2.0])
    p, res = run("affine_grad", "Method2", x0)
    assert D.ball_check(res.trace, x0, p.solution.project(x0)).passed


def test_ball_informational_mode():
    x0 = np.array([1.0, 2.0])
    p, res = run("affine_grad", "Method1", x0)
    rep = D.ball_check(res.trace, x0, p.solution.project(x0), asserted=False)
    assert rep.passed is None and rep.status == "INFO" and math.isfinite(rep.value)


def test_separation_solution_start_vacuous():
    p, res = run("box_vip", "Method1", problems.box_vip().solution.point)
    assert D.separation_check(res.trace, [p.solution.point]).passed


def test_separation_method1_box_vip():
    p, res = run("box_vip", "Method1", [1.0, 0.0])
    assert D.separation_check(res.trace, [p.solution.point], residual_tol=1e-10).passed


def test_separation_method2_skew_mix():
    p, res = run("skew_mix", "Method2", [2.0, -1.0, 1.0], max_iter=500)
    rep = D.separation_check(res.trace, [p.solution.point], residual_tol=1e-10)
    assert rep.passed, rep.line()
    assert all(r.G is not None for r in res.trace[:-1])


def test_separation_detects_bad_solution():
    p, res = run("box_vip", "Method1", [1.0, 0.0])
    assert D.separation_check(res.trace, [np.array([1.0, 1.0])]).passed is False


def test_stepsize_floor_skew_is_exact():
    p, res = run("rotation2d", "Method1", [1.0, 0.0])
    assert all(r.alpha == 1.0 for r in res.trace)
    assert D.stepsize_floor_check(res.trace, p.lipschitz2, 1.0, 0.5).passed


def test_stepsize_floor_scaled_identity_tight():
    p = ProblemInstance("si", ops.Zero(2), ops.ScaledIdentity(1.0, 2), ops.Zero(2), SinglePoint([0.0, 0.0]))
    res = solve(p, "Method1", SolverConfig(delta=0.25, delta_bar=0.25, alpha_init=1.0), [1.0, -2.0])
    assert res.trace[0].alpha == 0.25
    rep = D.stepsize_floor_check(res.trace, 1.0, 1.0, 0.25)
    assert rep.passed and rep.value == 0.0


def test_stepsize_floor_mixed_problem():
    p, res = run("skew_mix", "Method1", [2.0, 2.0, -1.0])
    cfg = SolverConfig()
    assert D.stepsize_floor_check(res.trace, p.lipschitz2, cfg.initial_alpha(p), cfg.delta).passed


def test_grid_floor():
    assert D.grid_floor(1.0, 0.5, 1.0 / 6.0) == 0.125
    assert D.grid_floor(0.1, 0.5, 1.0) == 0.1
    assert D.grid_floor(1.0, 0.5, 0.25) == 0.25


def test_stepsize_grid_floor_holds_on_catalog():
    cfg = SolverConfig(max_iter=500)
    for p in problems.catalog():
        if p.lipschitz2 is None:
            continue
        for seed in range(3):
            x0 = 3 * np.random.default_rng(seed).standard_normal(p.dim)
            for m in ("Method1", "Method2"):
                res = solve(p, m, cfg, x0)
                rep = D.stepsize_floor_check(res.trace, p.lipschitz2, cfg.initial_alpha(p), cfg.delta, theta=cfg.theta)
                assert rep.passed, (p.name, rep.line())


def test_fbhf_equivalence_zero_a2_is_exact():
    p = ProblemInstance("fb", ops.ScaledIdentity(1.0, 2), ops.Zero(2), ops.NormalConeBox([0.0, 0.0], [1.0, 1.0]))
    rep = D.fbhf_equivalence_check(p, [2.0, -1.0], [0.5] * 20)
    assert rep.passed and rep.value == 0.0


@pytest.mark.parametrize("name", ["rotation2d", "skew_mix"])
def test_fbhf_equivalence_50_steps(name):
    p = problems.get_problem(name)
    rep = D.fbhf_equivalence_check(p, np.linspace(-1, 2, p.dim), [D._fbhf_alpha(p)] * 50)
    assert rep.passed, rep.line()


def test_linesearch_audit_catalog():
    cfg = SolverConfig(max_iter=300)
    for p in problems.catalog():
        res = solve(p, "Method1", cfg, 2 * np.ones(p.dim))
        assert D.linesearch_audit(res.trace, p, cfg).passed


def test_linesearch_audit_catches_forged_stepsize():
    from dataclasses import replace

    p = problems.box_vip()
    cfg = SolverConfig(max_iter=20)
    res = solve(p, "Method1", cfg, [1.0, 0.0])
    # claim acceptance at a larger stepsize than the search found
    forged = [replace(r, alpha=r.alpha * 8, j=0) for r in res.trace]
    assert D.linesearch_audit(forged, p, cfg).passed is False


def test_checks_are_pure():
    p = problems.skew_mix()
    r1, runs = D.run_checks(p, seed=3)
    before = [rec.x.copy() for rec in runs["Method1"].trace]
    r2, _ = D.run_checks(p, seed=3)
    assert [r.line() for r in r1] == [r.line() for r in r2]
    D.fejer_check(runs["Method1"].trace, p.solution.point)
    assert all(np.array_equal(a, rec.x) for a, rec in zip(before, runs["Method1"].trace))


def test_run_checks_unknown_solution_skips():
    reports, _ = D.run_checks(problems.unknown_vip(), seed=0)
    skipped = [r for r in reports if r.skipped]
    assert {r.name.split(".")[1] for r in skipped} == {"fejer", "separation", "ball"}
    assert all(r.status == "SKIP" for r in skipped)
    assert not any(r.passed is False for r in reports)


def test_monitored_quantity_vanishes():
    p, res = run("skew_mix", "Method1", [2.0, 2.0, -1.0])
    q = D.monitored_quantity(res.trace, p, SolverConfig())
    assert abs(q[-1]) <= 1e-10 * abs(q[0])
