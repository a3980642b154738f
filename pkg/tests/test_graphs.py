"""Interaction-graph tests: construction, connectivity, weight envelopes."""

import numpy as np
import pytest

from swflow.graphs import (
    SinusoidWeights,
    WeightedGraph,
    union_graph,
    union_graph_connected,
)


def test_from_edges_builds_symmetric_matrix():
    g = WeightedGraph.from_edges(3, [(0, 1, 2.0), (1, 2, 0.5)])
    w = g.weights_at(0.0)
    assert np.array_equal(w, w.T)
    assert w[0, 1] == 2.0 and w[1, 0] == 2.0
    assert w[0, 2] == 0.0
    assert g.edges() == [(0, 1), (1, 2)]


def test_from_edges_rejects_bad_input():
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 0, 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 3, 1.0)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(2, [(0, 1, -1.0)])
    with pytest.raises(ValueError):
        WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 0, 2.0)])


def test_edge_list_text_round_trip():
    g = WeightedGraph.from_edges(4, [(0, 2, 1.25), (1, 3, 0.75)])
    text = g.to_edge_list_text()
    back = WeightedGraph.from_edge_list_text(text, 4)
    assert np.array_equal(g.weights_at(0.0), back.weights_at(0.0))


def test_edge_list_text_parses_comments():
    g = WeightedGraph.from_edge_list_text(
        "# a comment\n0 1 1.5\n\n 1 2 0.5 # trailing\n", 3)
    assert g.edges() == [(0, 1), (1, 2)]


def test_connectivity():
    path = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])
    assert path.is_connected()
    split = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not split.is_connected()
    assert split.connected_components() == [[0, 1], [2, 3]]


def test_union_connectivity_of_disconnected_pieces():
    e01 = WeightedGraph.from_edges(3, [(0, 1, 1.0)])
    e12 = WeightedGraph.from_edges(3, [(1, 2, 1.0)])
    assert not e01.is_connected()
    assert not e12.is_connected()
    assert union_graph_connected([e01, e12])
    merged = union_graph([e01, e12])
    assert merged.is_connected()
    assert merged.weights_at(0.0)[0, 1] == 1.0


def test_laplacian_rows_sum_to_zero():
    g = WeightedGraph.from_edges(3, [(0, 1, 2.0), (1, 2, 0.5), (0, 2, 1.0)])
    lap = g.laplacian_at(0.0)
    assert np.allclose(lap.sum(axis=1), 0.0)
    assert np.allclose(lap, lap.T)
    vals = np.linalg.eigvalsh(lap)
    assert vals[0] >= -1e-12          # positive semidefinite
    assert vals[1] >= 1e-6            # connected: second eigenvalue positive


def _sin_graph():
    k = 3
    base = np.zeros((k, k))
    amp = np.zeros((k, k))
    freq = np.zeros((k, k))
    phase = np.zeros((k, k))
    for i, j, b, a, f, p in [(0, 1, 1.0, 0.5, 2.0, 0.3),
                             (1, 2, 1.2, 0.4, 1.0, 0.0)]:
        base[i, j] = base[j, i] = b
        amp[i, j] = amp[j, i] = a
        freq[i, j] = freq[j, i] = f
        phase[i, j] = phase[j, i] = p
    return WeightedGraph(agents=k, sinusoid=SinusoidWeights(
        base=base, amp=amp, freq=freq, phase=phase))


def test_sinusoid_weights_follow_the_model():
    g = _sin_graph()
    assert g.time_varying
    for t in (0.0, 0.7, 3.1):
        w = g.weights_at(t)
        assert abs(w[0, 1] - (1.0 + 0.5 * np.sin(2.0 * t + 0.3))) <= 1e-12
        assert abs(w[1, 2] - (1.2 + 0.4 * np.sin(1.0 * t))) <= 1e-12
        assert np.array_equal(w, w.T)


def test_sinusoid_envelope_bounds_sampled_weights():
    g = _sin_graph()
    lo, hi = g.weight_envelope()
    for t in np.linspace(0.0, 20.0, 400):
        w = g.weights_at(t)
        assert np.all(w >= lo - 1e-12)
        assert np.all(w <= hi + 1e-12)
    static = g.lower_weight_graph()
    assert not static.time_varying
    assert np.allclose(static.weights_at(0.0)[0, 1], 0.5)


def test_sinusoid_requires_positive_lower_envelope():
    k = 2
    base = np.zeros((k, k))
    amp = np.zeros((k, k))
    base[0, 1] = base[1, 0] = 0.5
    amp[0, 1] = amp[1, 0] = 0.6      # dips to -0.1
    with pytest.raises(ValueError):
        WeightedGraph(agents=k, sinusoid=SinusoidWeights(
            base=base, amp=amp, freq=np.zeros((k, k)),
            phase=np.zeros((k, k))))


def test_exactly_one_weight_source():
    with pytest.raises(ValueError):
        WeightedGraph(agents=2)
