import numpy as np
import pytest

from surfmatch.circuit import NoiseModel, build_cycle_circuit
from surfmatch.layout import build_layout
from surfmatch.tracer import build_detector_graphs, perfect_sources, trace_all_single_faults


@pytest.fixture(scope="session")
def layout4():
    return build_layout(4)


@pytest.fixture(scope="session")
def graphs2d_d4():
    return build_detector_graphs(perfect_sources(build_layout(4), 0.01))


@pytest.fixture(scope="session")
def ft_d3():
    layout = build_layout(3)
    circuit = build_cycle_circuit(layout, 3)
    sources = trace_all_single_faults(circuit, NoiseModel(0.01), layout)
    gx, gz = build_detector_graphs(sources)
    return layout, circuit, sources, gx, gz


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
