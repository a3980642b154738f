"""Proximal-step tests: closed forms, optimality residuals, fixed points."""

import numpy as np
import pytest

from swflow.errors import NoProxOracle
from swflow.prox import (
    IsotropicQuadratic,
    L1Norm,
    RestrictedFunction,
    SquaredDistance,
    ZeroFunction,
    prox,
    prox_residual,
)
from swflow.sets import Ball, Box, WholeSpace

RNG = np.random.default_rng(4242)


def test_zero_function_prox_is_projection():
    rf = RestrictedFunction(ZeroFunction(2),
                            Box(np.zeros(2), np.ones(2)))
    x = np.array([2.0, -1.0])
    assert np.allclose(rf.prox(x, 0.3), [1.0, 0.0])


def test_l1_prox_is_soft_threshold():
    rf = RestrictedFunction(L1Norm(3, weight=2.0), WholeSpace(3))
    x = np.array([1.0, -0.1, 0.25])
    h = 0.1
    want = np.maximum(np.abs(x) - 0.2, 0.0) * np.sign(x)
    assert np.allclose(rf.prox(x, h), want, atol=1e-12)


def test_l1_prox_clipped_on_box():
    rf = RestrictedFunction(L1Norm(2, weight=1.0),
                            Box(np.array([0.5, -2.0]), np.array([2.0, 2.0])))
    x = np.array([0.55, 1.0])
    u = rf.prox(x, 0.2)
    # thresholding pulls x below the lower bound, the box clips it back
    assert np.allclose(u, [0.5, 0.8], atol=1e-12)
    assert prox_residual(rf, 0.2, x, u) <= 1e-8


def test_quadratic_prox_closed_form():
    c = np.array([1.0, -2.0])
    rf = RestrictedFunction(IsotropicQuadratic(weight=3.0, center=c),
                            WholeSpace(2))
    x = np.array([4.0, 4.0])
    h = 0.5
    want = (x + h * 3.0 * c) / (1.0 + h * 3.0)
    assert np.allclose(rf.prox(x, h), want, atol=1e-12)


def test_quadratic_prox_restricted_projects():
    c = np.zeros(2)
    box = Box(np.array([1.0, -5.0]), np.array([5.0, 5.0]))
    rf = RestrictedFunction(IsotropicQuadratic(weight=1.0, center=c), box)
    x = np.array([1.2, 2.0])
    u = rf.prox(x, 1.0)
    # free prox is x/2 which violates the box; optimality is certified by
    # the residual rather than a guessed formula
    assert box.contains(u)
    assert prox_residual(rf, 1.0, x, u) <= 1e-8


def test_squared_distance_prox_via_inner_solver():
    target = Box(np.zeros(2), np.ones(2))
    rf = RestrictedFunction(SquaredDistance(target, weight=2.0),
                            WholeSpace(2))
    x = np.array([3.0, 0.5])
    h = 0.25
    u = rf.prox(x, h)
    # 1-d closed form along the x-axis: u minimizes w/2 (u-1)^2 + (u-3)^2/(2h)
    want0 = (x[0] / h + 2.0 * 1.0) / (1.0 / h + 2.0)
    assert abs(u[0] - want0) <= 1e-9
    assert abs(u[1] - 0.5) <= 1e-9
    assert prox_residual(rf, h, x, u) <= 1e-8


def test_prox_fixed_point_at_minimizer():
    c = np.array([0.5, 0.5])
    rf = RestrictedFunction(IsotropicQuadratic(weight=2.0, center=c),
                            Box(np.zeros(2), np.ones(2)))
    assert np.allclose(rf.prox(c, 0.7), c, atol=1e-12)

    rf2 = RestrictedFunction(L1Norm(2), WholeSpace(2))
    assert np.allclose(rf2.prox(np.zeros(2), 0.3), np.zeros(2))


def test_prox_residual_flags_non_optimal_points():
    rf = RestrictedFunction(L1Norm(2), WholeSpace(2))
    x = np.array([1.0, 1.0])
    u_good = rf.prox(x, 0.25)
    u_bad = u_good + np.array([0.3, 0.0])
    assert prox_residual(rf, 0.25, x, u_good) <= 1e-8
    assert prox_residual(rf, 0.25, x, u_bad) >= 0.1


def test_prox_random_instances_satisfy_residual():
    sets = [WholeSpace(2), Box(np.full(2, -1.0), np.full(2, 1.0)),
            Ball(np.zeros(2), 1.5)]
    fns = [ZeroFunction(2), IsotropicQuadratic(weight=1.3, center=np.ones(2)),
           SquaredDistance(Box(np.zeros(2), np.ones(2)), weight=0.7)]
    for cset in sets:
        for fn in fns:
            rf = RestrictedFunction(fn, cset)
            for x in RNG.uniform(-2, 2, size=(10, 2)):
                for h in (0.03, 0.4):
                    u = rf.prox(x, h)
                    assert cset.contains(u)
                    assert prox_residual(rf, h, x, u) <= 1e-7


def test_l1_on_ball_has_no_prox_route():
    rf = RestrictedFunction(L1Norm(2), Ball(np.zeros(2), 1.0))
    with pytest.raises(NoProxOracle):
        rf.prox(np.array([2.0, 2.0]), 0.1)


def test_prox_rejects_nonpositive_step():
    rf = RestrictedFunction(ZeroFunction(1), WholeSpace(1))
    with pytest.raises(ValueError):
        rf.prox(np.zeros(1), 0.0)


def test_module_level_wrapper():
    rf = RestrictedFunction(L1Norm(1), WholeSpace(1))
    assert np.allclose(prox(rf, 0.5, np.array([2.0])), [1.5])
