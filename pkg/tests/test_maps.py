"""Monotone map descriptor tests.

Monotonicity is probed by sampling <M(a) - M(b), a - b> over random
pairs; skew maps must sit exactly at zero, gradients of convex
functions must stay nonnegative, and a flipped-sign map must be caught.
"""

import numpy as np
import pytest

from swflow.graphs import WeightedGraph
from swflow.maps import (
    MonotoneMapDescriptor,
    gradient_map,
    linear_map,
    rotation_map,
    saddle_flow_map,
)
from swflow.objectives import ObjectiveDescriptor, PNormCoupling
from swflow.state import AgentLayout


def test_linear_map_evaluates_matrix_product():
    m = linear_map([[2.0, 0.0], [0.0, 3.0]])
    assert np.allclose(m.evaluate(np.array([1.0, -1.0])), [2.0, -3.0])
    assert np.allclose(m.anchor_point(), [0.0, 0.0])
    assert m.dim == 2


def test_linear_map_rejects_non_square():
    with pytest.raises(ValueError):
        linear_map([[1.0, 0.0]])


def test_rotation_map_is_quarter_turn():
    m = rotation_map()
    assert np.allclose(m.evaluate(np.array([1.0, 0.0])), [0.0, 1.0])
    assert np.allclose(m.evaluate(np.array([0.0, 1.0])), [-1.0, 0.0])


def test_rotation_monotonicity_residual_is_zero():
    res = rotation_map().monotonicity_residual(np.random.default_rng(0))
    assert abs(res) <= 1e-14


def test_saddle_map_matrix_entries():
    m = saddle_flow_map(2.0, 3.0, 4.0)
    # (dL/dx, -dL/dy) at (1, 1) for L = 2 x^2 + 3 xy - 4 y^2
    assert np.allclose(m.evaluate(np.array([1.0, 1.0])), [7.0, 5.0])


def test_saddle_map_is_monotone():
    res = saddle_flow_map(1.0, 1.0, 1.0).monotonicity_residual(
        np.random.default_rng(1))
    assert res >= -1e-12


def test_negated_gradient_fails_monotonicity():
    m = linear_map([[-1.0, 0.0], [0.0, -1.0]])
    res = m.monotonicity_residual(np.random.default_rng(2))
    assert res < -1.0


def test_saddle_probe_points_only_for_degenerate_case():
    assert saddle_flow_map(1.0, 1.0, 0.0).probes == ((0.0, 1.0),)
    assert saddle_flow_map(1.0, 0.0, 0.0).probes == ()
    assert saddle_flow_map(1.0, 1.0, 1.0).probes == ()


def test_saddle_rejects_negative_curvature():
    with pytest.raises(ValueError):
        saddle_flow_map(-1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        saddle_flow_map(1.0, 1.0, -1.0)


def test_gradient_map_wraps_objective():
    lay = AgentLayout(2, 1)
    g = WeightedGraph.from_edges(2, [(0, 1, 1.0)])
    f = ObjectiveDescriptor(layout=lay,
                            coupling=PNormCoupling(2, squared=True), graph=g)
    m = gradient_map(f, dim=2, anchor=(0.5, 0.5))
    assert np.allclose(m.evaluate(np.array([1.0, 0.0])), [1.0, -1.0])
    assert np.linalg.norm(m.evaluate(m.anchor_point())) <= 1e-12
    res = m.monotonicity_residual(np.random.default_rng(3))
    assert res >= -1e-12


def test_descriptor_is_frozen():
    m = rotation_map()
    with pytest.raises(Exception):
        m.dim = 3


def test_custom_descriptor_roundtrip():
    m = MonotoneMapDescriptor(
        dim=1,
        evaluate_fn=lambda x: np.tanh(x),
        anchor=(0.0,),
        name="tanh",
    )
    assert m.evaluate(np.array([0.0])) == pytest.approx(0.0)
    assert m.monotonicity_residual(np.random.default_rng(4)) >= -1e-12
