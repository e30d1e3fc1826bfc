import numpy as np
import pytest

from surfmatch.circuit import NoiseModel, detection_events, propagate, sample_noise
from surfmatch.correlated import correlated_decode
from surfmatch.engine import build_problem, run_trials
from surfmatch.layout import PauliFrame, PauliTerm, ideal_syndrome, logical_failure
from surfmatch.matching import decode

PAULI = (PauliTerm.X, PauliTerm.Y, PauliTerm.Z)


def _python_2d(problem, seed, correlated):
    """Frame-level reference: sample, take the ideal syndrome, decode, check logicals."""
    lay = problem.sources.layout
    ids = problem.sample_sources(seed, 0)
    frame = PauliFrame.from_paulis(lay.n_data, {})
    for i in ids:
        single = PauliFrame.from_paulis(lay.n_data, {int(problem.sources.gate[i]): PAULI[problem.sources.outcome[i]]})
        frame = frame @ single
    syn = ideal_syndrome(frame, lay)
    ex, ez = sorted(syn.x), sorted(syn.z)
    gx, gz = problem.graph_x, problem.graph_z
    if correlated:
        res = correlated_decode(gx, gz, ex, ez, seed)
        cx, cz = res.corrections["X"], res.corrections["Z"]
    else:
        cx, _ = decode(gx, ex, seed)
        cz, _ = decode(gz, ez, seed)
    x, z = frame.x.copy(), frame.z.copy()
    for e in cx:
        z[problem.sources.gate[gx.sources_of(int(e))[0]]] ^= 1
    for e in cz:
        x[problem.sources.gate[gz.sources_of(int(e))[0]]] ^= 1
    fail = logical_failure(PauliFrame(x, z), lay)
    return int(fail.x), int(fail.z)


def _python_3d(problem, seed, correlated):
    circuit = problem.sources.circuit
    lay = problem.sources.layout
    faults = sample_noise(circuit, NoiseModel(problem.p), seed, trial=0)
    rec, frame = propagate(circuit, faults)
    ev = detection_events(rec, lay)
    gx, gz = problem.graph_x, problem.graph_z
    ex = sorted(t * gx.n_stabilizers + s for s, t in ev.x)
    ez = sorted(t * gz.n_stabilizers + s for s, t in ev.z)
    if correlated:
        res = correlated_decode(gx, gz, ex, ez, seed)
        cx, cz = res.corrections["X"], res.corrections["Z"]
    else:
        cx, _ = decode(gx, ex, seed)
        cz, _ = decode(gz, ez, seed)
    actual_x = int(frame.x[list(lay.logical_z_support)].sum()) & 1
    actual_z = int(frame.z[list(lay.logical_x_support)].sum()) & 1
    fail_x = actual_x ^ (int(gz.edge_flip[cz].sum()) & 1)
    fail_z = actual_z ^ (int(gx.edge_flip[cx].sum()) & 1)
    return fail_x, fail_z


@pytest.mark.parametrize("decoder", ["independent", "correlated"])
def test_kernel_matches_frame_pipeline_2d(decoder):
    problem = build_problem("perfect2d", 4, 0.12)
    fails = 0
    for seed in range(300):
        fx, fz = run_trials(problem, seed, 0, 1, decoder)
        ref = _python_2d(problem, seed, decoder == "correlated")
        assert (int(fx[0]), int(fz[0])) == ref, seed
        fails += sum(ref)
    assert fails > 10


@pytest.mark.parametrize("decoder", ["independent", "correlated"])
def test_kernel_matches_circuit_pipeline_3d(decoder):
    problem = build_problem("fault_tolerant3d", 3, 0.01, 3)
    fails = 0
    for seed in range(150):
        fx, fz = run_trials(problem, seed, 0, 1, decoder)
        ref = _python_3d(problem, seed, decoder == "correlated")
        assert (int(fx[0]), int(fz[0])) == ref, seed
        fails += sum(ref)
    assert fails > 5


def test_sample_sources_matches_circuit_sampler():
    problem = build_problem("fault_tolerant3d", 3, 0.02, 2)
    circuit = problem.sources.circuit
    for trial in range(20):
        ids = problem.sample_sources(9, trial)
        faults = sample_noise(circuit, NoiseModel(0.02), 9, trial=trial)
        assert [int(problem.sources.gate[i]) for i in ids] == [f.gate for f in faults]
        assert [problem.sources[int(i)].paulis for i in ids] == [f.paulis for f in faults]


def test_events_of_matches_propagation():
    problem = build_problem("fault_tolerant3d", 3, 0.02, 2)
    circuit, lay = problem.sources.circuit, problem.sources.layout
    for trial in range(30):
        ids = problem.sample_sources(4, trial)
        ev = detection_events(propagate(circuit, sample_noise(circuit, NoiseModel(0.02), 4, trial))[0], lay)
        nx, nz = problem.graph_x.n_stabilizers, problem.graph_z.n_stabilizers
        assert problem.events_of(ids, "X").tolist() == sorted(t * nx + s for s, t in ev.x)
        assert problem.events_of(ids, "Z").tolist() == sorted(t * nz + s for s, t in ev.z)


def test_run_trials_blocks_are_consistent():
    problem = build_problem("perfect2d", 4, 0.05)
    fx, fz = run_trials(problem, 21, 0, 2000)
    a = run_trials(problem, 21, 0, 700)
    b = run_trials(problem, 21, 700, 1300)
    assert np.array_equal(fx, np.concatenate([a[0], b[0]]))
    assert np.array_equal(fz, np.concatenate([a[1], b[1]]))
    assert not np.array_equal(fx, run_trials(problem, 22, 0, 2000)[0])


def test_2d_bases_agree_statistically():
    problem = build_problem("perfect2d", 4, 0.03)
    fx, fz = run_trials(problem, 3, 0, 100_000)
    nx_, nz_ = int(fx.sum()), int(fz.sum())
    assert abs(nx_ - nz_) < 5 * np.sqrt(nx_ + nz_)


def test_build_problem_rejects():
    with pytest.raises(ValueError):
        build_problem("bogus", 3, 0.01)
    with pytest.raises(ValueError):
        build_problem("perfect2d", 3, 0.0)
    with pytest.raises(ValueError):
        build_problem("perfect2d", 2, 0.01)
    with pytest.raises(ValueError):
        build_problem("fault_tolerant3d", 3, 0.01, 0)
    with pytest.raises(ValueError):
        run_trials(build_problem("perfect2d", 3, 0.01), 1, 0, 5, "bogus")
