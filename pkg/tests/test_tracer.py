import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from surfmatch.circuit import CHANNEL_OUTCOMES, NoiseModel, build_cycle_circuit, detection_events, propagate
from surfmatch.layout import PauliTerm, build_layout
from surfmatch.tracer import (
    build_detector_graphs,
    export_graph,
    graphs_equal,
    import_graph,
    perfect_sources,
    trace_all_single_faults,
)


def test_p0_gives_empty_table_and_graph():
    lay = build_layout(3)
    src = trace_all_single_faults(build_cycle_circuit(lay, 2), NoiseModel(0.0), lay)
    assert len(src) == 0
    gx, gz = build_detector_graphs(src)
    assert gx.n_edges == 0 and gz.n_edges == 0
    doc = json.loads(export_graph(gx))
    assert doc["edges"] == []
    assert graphs_equal(import_graph(export_graph(gx)), gx)
    assert len(perfect_sources(lay, 0.0)) == 0


def test_completeness(ft_d3):
    _, circuit, sources, _, _ = ft_d3
    kind, *_ , noisy = circuit.arrays
    counts = np.bincount(sources.gate, minlength=len(circuit))
    expected = np.where(noisy, CHANNEL_OUTCOMES[kind], 0)
    assert np.array_equal(counts, expected)
    assert set(np.unique(expected[noisy.astype(bool)])) == {1, 3, 15}
    assert np.all(sources.prob > 0)


def test_sources_agree_with_direct_propagation(ft_d3):
    layout, circuit, sources, _, _ = ft_d3
    for i in range(0, len(sources), 7):
        s = sources[i]
        from surfmatch.circuit import Fault
        ev = detection_events(propagate(circuit, [Fault(s.gate, s.paulis)])[0], layout)
        nx, nz = len(layout.x_stabilizers), len(layout.z_stabilizers)
        ex = sorted(t * nx + j for j, t in ev.x)
        ez = sorted(t * nz + j for j, t in ev.z)
        bx, bz = sources.boundary("X"), sources.boundary("Z")
        assert sorted(v for v in s.x_endpoints if v != bx) == ex
        assert sorted(v for v in s.z_endpoints if v != bz) == ez


def test_idle_y_between_rounds_hits_both_graphs(ft_d3):
    layout, circuit, sources, _, _ = ft_d3
    g = next(i for i, gt in enumerate(circuit.gates)
             if gt.kind == "idle" and gt.targets == (4,) and gt.time_step == 11)
    i = next(i for i in range(len(sources)) if sources.gate[i] == g and sources[i].paulis == (PauliTerm.Y,))
    s = sources[i]
    assert len(s.x_endpoints) == 2 and len(s.z_endpoints) == 2
    assert sources.boundary("X") not in s.x_endpoints or sources.boundary("Z") not in s.z_endpoints


def test_measurement_flip_time_pair(ft_d3):
    layout, circuit, sources, gx, gz = ft_d3
    g = next(i for i, gt in enumerate(circuit.gates) if gt.kind == "measure_x" and gt.time_step == 11)
    i = int(np.flatnonzero(sources.gate == g)[0])
    s = sources[i]
    assert len(s.z_endpoints) == 0
    a, b = sorted(s.x_endpoints)
    assert b - a == gx.n_stabilizers


def test_perfect_edge_probability_and_equal_weights(graphs2d_d4, layout4):
    p = 0.01
    for g in graphs2d_d4:
        assert g.n_edges == layout4.n_data
        assert np.allclose(g.edge_p, 2 * p / 3 - p * p / 9, rtol=0, atol=1e-15)
        assert np.ptp(g.weights) < 1e-12
        assert np.all(g.weights > 0) and np.all(np.isfinite(g.weights))


def test_2d_edge_count_d3():
    gx, gz = build_detector_graphs(perfect_sources(build_layout(3), 0.01))
    # one edge per data qubit: d^2 + (d-1)^2 = 13
    assert gx.n_edges == gz.n_edges == 13


def test_ft_vertex_count(ft_d3):
    _, _, _, gx, gz = ft_d3
    assert gx.n_detectors == gz.n_detectors == 3 * 2 * 4
    assert gx.n_vertices == 25


def test_edge_probability_is_or_of_sources(ft_d3):
    _, _, sources, gx, gz = ft_d3
    for g in (gx, gz):
        for e in range(g.n_edges):
            ps = sources.prob[g.sources_of(e)]
            assert g.edge_p[e] == pytest.approx(1 - np.prod(1 - ps), rel=1e-12)
            assert g.src_total[e] == pytest.approx(ps.sum(), rel=1e-12)
            # plain sum and OR differ by at most the square of the total
            assert abs(ps.sum() - g.edge_p[e]) <= ps.sum() ** 2
        assert np.all((g.edge_p > 0) & (g.edge_p < 1))


def test_two_component_sources_have_one_edge_per_graph(ft_d3):
    _, _, sources, gx, gz = ft_d3
    both = np.flatnonzero((sources.ends["X"][:, 0] >= 0) & (sources.ends["Z"][:, 0] >= 0))
    assert both.size > 0
    occ_x = np.bincount(gx.src_ids, minlength=len(sources))
    occ_z = np.bincount(gz.src_ids, minlength=len(sources))
    assert np.all(occ_x[both] == 1) and np.all(occ_z[both] == 1)
    edge_x = {int(s): e for e in range(gx.n_edges) for s in gx.sources_of(e)}
    edge_z = {int(s): e for e in range(gz.n_edges) for s in gz.sources_of(e)}
    for s in both[:200]:
        links = gx.links_of(edge_x[int(s)])
        assert (edge_z[int(s)], pytest.approx(sources.prob[s])) in links


def test_edge_flip_consistent_with_sources(ft_d3):
    _, _, sources, gx, gz = ft_d3
    for g in (gx, gz):
        for e in range(g.n_edges):
            flips = set(sources.flip[g.basis][g.sources_of(e)].tolist())
            assert flips == {int(g.edge_flip[e])}


@pytest.mark.parametrize("d", [3, 4, 5])
def test_rotation_symmetry_2d(d):
    gx, gz = build_detector_graphs(perfect_sources(build_layout(d), 0.02))

    def edge_sites(g, transpose):
        out = set()
        for u, v in zip(g.edge_u.tolist(), g.edge_v.tolist()):
            ends = []
            for x in (u, v):
                s = g.vertex_site(x)
                ends.append("B" if s is None else ((s[1], s[0]) if transpose else s[:2]))
            out.add(frozenset(ends) if ends[0] != ends[1] else ends[0])
        return out

    assert edge_sites(gx, True) == edge_sites(gz, False)
    assert sorted(gx.weights) == pytest.approx(sorted(gz.weights))


def test_json_round_trip(ft_d3, graphs2d_d4):
    _, _, _, gx, gz = ft_d3
    for g in (gx, gz, *graphs2d_d4):
        text = export_graph(g)
        back = import_graph(text)
        assert graphs_equal(back, g)
        assert export_graph(back) == text


@settings(max_examples=20, deadline=None)
@given(st.integers(3, 6), st.floats(1e-4, 0.3))
def test_perfect_graph_properties(d, p):
    gx, gz = build_detector_graphs(perfect_sources(build_layout(d), p))
    for g in (gx, gz):
        assert g.n_edges == d * d + (d - 1) ** 2
        assert np.allclose(g.edge_p, 1 - (1 - p / 3) ** 2)
        # Y links to the other basis on every edge
        assert np.all(np.diff(g.link_ptr) == 1)
