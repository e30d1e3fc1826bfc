"""Nearest-neighbour syndrome-extraction circuit with gate-level depolarizing noise.

Each round takes six time steps: ancilla initialization, four CNOT layers and
ancilla measurement. Qubits not acted on in a step receive an explicit idle
gate, so every qubit is exposed to noise at every step. After the last noisy
round the data qubits are read out ideally. The Pauli-frame simulator records
the readout in both bases, which a frame simulation can do for free; this
gives every error chain a final detection layer in both matching problems.

Faults are Pauli operators on a gate's targets. They act after the gate,
except on measurements, where the Pauli is applied just before the readout
so that it flips the reported bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._jit import njit
from .layout import CodeLayout, PauliFrame, PauliTerm
from .rng import NOISE_SALT, as_seed, next_uniform, trial_state

IDLE, INIT_Z, INIT_X, CNOT, MEASURE_Z, MEASURE_X = range(6)
KIND_NAMES = ("idle", "init_z", "init_x", "cnot", "measure_z", "measure_x")
KIND_CODES = {name: i for i, name in enumerate(KIND_NAMES)}

# data-qubit order of the four CNOT layers
X_SCHEDULE = ("N", "E", "W", "S")
Z_SCHEDULE = ("N", "W", "E", "S")
STEPS_PER_ROUND = 6

_SINGLE = (PauliTerm.X, PauliTerm.Y, PauliTerm.Z)
# outcome count of each channel, indexed by kind code
CHANNEL_OUTCOMES = np.array([3, 1, 1, 15, 1, 1], dtype=np.int64)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    time_step: int
    noisy: bool = True

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        want = 2 if self.kind == "cnot" else 1
        if len(self.targets) != want or len(set(self.targets)) != want:
            raise ValueError(f"{self.kind} needs {want} distinct targets, got {self.targets}")


@dataclass(frozen=True, eq=False)
class Circuit:
    gates: tuple[Gate, ...]
    n_qubits: int
    rounds: int = 0
    layout: CodeLayout | None = field(default=None, repr=False)
    roles: tuple[str, ...] = ()
    # measurement gate -> record slot; -1 for other gates
    slots: np.ndarray | None = field(default=None, repr=False)
    n_slots: int = 0

    def __post_init__(self):
        seen: set[tuple[int, int]] = set()
        last = -1
        for g in self.gates:
            if g.time_step < last:
                raise ValueError("gates must be ordered by time step")
            last = g.time_step
            for q in g.targets:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(f"qubit {q} out of range")
                if (g.time_step, q) in seen:
                    raise ValueError(f"qubit {q} used twice in step {g.time_step}")
                seen.add((g.time_step, q))
        if self.slots is None:
            slots = np.full(len(self.gates), -1, np.int64)
            n = 0
            for i, g in enumerate(self.gates):
                if g.kind.startswith("measure"):
                    slots[i] = n
                    n += 1
            object.__setattr__(self, "slots", slots)
            object.__setattr__(self, "n_slots", n)

    def __len__(self) -> int:
        return len(self.gates)

    @cached_property
    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """(kind, q0, q1, slot, noisy) arrays consumed by the kernels."""
        kind = np.array([KIND_CODES[g.kind] for g in self.gates], np.int64)
        q0 = np.array([g.targets[0] for g in self.gates], np.int64)
        q1 = np.array([g.targets[1] if len(g.targets) > 1 else -1 for g in self.gates], np.int64)
        noisy = np.array([g.noisy for g in self.gates], np.bool_)
        return kind, q0, q1, self.slots, noisy

    def dump(self) -> str:
        """One gate per line: ``step kind targets``."""
        return "\n".join(
            f"{g.time_step} {g.kind}{'' if g.noisy else '*'} {' '.join(map(str, g.targets))}"
            for g in self.gates
        ) + "\n"


def build_cycle_circuit(layout: CodeLayout, rounds: int) -> Circuit:
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    nd = layout.n_data
    nx, nz = len(layout.x_stabilizers), len(layout.z_stabilizers)
    xa = [nd + i for i in range(nx)]
    za = [nd + nx + j for j in range(nz)]
    n_qubits = nd + nx + nz
    gates: list[Gate] = []
    slots: list[int] = []
    per_round = nx + nz

    def fill_idle(step, busy):
        for q in range(n_qubits):
            if q not in busy:
                gates.append(Gate("idle", (q,), step))
                slots.append(-1)

    for r in range(rounds):
        base = STEPS_PER_ROUND * r
        busy = set(xa) | set(za)
        for a in xa:
            gates.append(Gate("init_x", (a,), base))
            slots.append(-1)
        for a in za:
            gates.append(Gate("init_z", (a,), base))
            slots.append(-1)
        fill_idle(base, busy)
        for k in range(4):
            step = base + 1 + k
            busy = set()
            for i, s in enumerate(layout.x_stabilizers):
                q = s.neighbors[X_SCHEDULE[k]]
                if q is not None:
                    gates.append(Gate("cnot", (xa[i], q), step))
                    slots.append(-1)
                    busy.update((xa[i], q))
            for j, s in enumerate(layout.z_stabilizers):
                q = s.neighbors[Z_SCHEDULE[k]]
                if q is not None:
                    gates.append(Gate("cnot", (q, za[j]), step))
                    slots.append(-1)
                    busy.update((q, za[j]))
            fill_idle(step, busy)
        step = base + 5
        for i, a in enumerate(xa):
            gates.append(Gate("measure_x", (a,), step))
            slots.append(r * per_round + i)
        for j, a in enumerate(za):
            gates.append(Gate("measure_z", (a,), step))
            slots.append(r * per_round + nx + j)
        fill_idle(step, set(xa) | set(za))
    step = STEPS_PER_ROUND * rounds
    for q in range(nd):
        gates.append(Gate("measure_z", (q,), step, noisy=False))
        slots.append(rounds * per_round + q)
    roles = ("data",) * nd + ("x_ancilla",) * nx + ("z_ancilla",) * nz
    return Circuit(
        gates=tuple(gates),
        n_qubits=n_qubits,
        rounds=rounds,
        layout=layout,
        roles=roles,
        slots=np.array(slots, np.int64),
        n_slots=rounds * per_round + nd,
    )


@dataclass(frozen=True)
class NoiseModel:
    """Balanced depolarizing noise of strength ``p`` on every noisy gate.

    Idle: X, Y, Z with p/3 each. CNOT: each of the 15 nontrivial two-qubit
    Paulis with p/15. Initialization: orthogonal state with p. Measurement:
    reported bit flipped with p.
    """

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"p must lie in [0, 1), got {self.p}")

    def n_outcomes(self, kind: str) -> int:
        return int(CHANNEL_OUTCOMES[KIND_CODES[kind]])

    def outcome_probability(self, kind: str) -> float:
        return self.p / self.n_outcomes(kind)


def outcome_codes(kind: int, outcome: int) -> tuple[int, int]:
    """Pauli codes (bit 0 = X, bit 1 = Z) put on the targets by one channel outcome."""
    if kind == IDLE:
        return _SINGLE[outcome].value, 0
    if kind == CNOT:
        code = outcome + 1
        return code & 3, code >> 2
    if kind in (INIT_Z, MEASURE_Z):
        return PauliTerm.X.value, 0
    return PauliTerm.Z.value, 0


class Fault(NamedTuple):
    gate: int
    paulis: tuple[PauliTerm, ...]


def fault_from_outcome(circuit: Circuit, gate: int, outcome: int) -> Fault:
    kind = KIND_CODES[circuit.gates[gate].kind]
    c0, c1 = outcome_codes(kind, outcome)
    if kind == CNOT:
        return Fault(gate, (PauliTerm(c0), PauliTerm(c1)))
    return Fault(gate, (PauliTerm(c0),))


@njit
def sample_fault_kernel(noisy_gates, n_out, p, state):
    """Geometric skipping over the noisy gates; each fails with probability p."""
    n = noisy_gates.shape[0]
    gates = np.empty(16, np.int64)
    outs = np.empty(16, np.int64)
    count = 0
    if p <= 0.0 or n == 0:
        return gates[:0], outs[:0]
    logq = np.log1p(-p)
    i = -1
    while True:
        u = 1.0 - next_uniform(state)
        i += 1 + np.int64(np.floor(np.log(u) / logq))
        if i >= n:
            break
        g = noisy_gates[i]
        o = np.int64(next_uniform(state) * n_out[g])
        if count == gates.shape[0]:
            gates = np.concatenate((gates, np.empty(count, np.int64)))
            outs = np.concatenate((outs, np.empty(count, np.int64)))
        gates[count] = g
        outs[count] = o
        count += 1
    return gates[:count], outs[:count]


def sample_noise(circuit: Circuit, noise: NoiseModel, rng_seed: int, trial: int = 0) -> list[Fault]:
    """Independent faults on every noisy gate; reproducible for a fixed seed.

    ``trial`` selects the stream of one trial within a seeded run.
    """
    kind, _, _, _, noisy = circuit.arrays
    n_out = CHANNEL_OUTCOMES[kind]
    state = np.array([trial_state(as_seed(rng_seed), trial, NOISE_SALT)], np.uint64)
    gates, outs = sample_fault_kernel(np.flatnonzero(noisy).astype(np.int64), n_out, noise.p, state)
    return [fault_from_outcome(circuit, int(g), int(o)) for g, o in zip(gates, outs)]


@njit
def _apply_gate(k, a, b, slot, fx, fz, c0, c1, rec):
    if k == MEASURE_Z or k == MEASURE_X:
        fx[a] ^= c0 & 1
        fz[a] ^= (c0 >> 1) & 1
        rec[slot] = fx[a] if k == MEASURE_Z else fz[a]
        return
    if k == INIT_Z or k == INIT_X:
        fx[a] = 0
        fz[a] = 0
    elif k == CNOT:
        fx[b] ^= fx[a]
        fz[a] ^= fz[b]
        fx[b] ^= c1 & 1
        fz[b] ^= (c1 >> 1) & 1
    fx[a] ^= c0 & 1
    fz[a] ^= (c0 >> 1) & 1


@njit
def propagate_kernel(kind, q0, q1, slot, n_qubits, n_slots, f0, f1):
    fx = np.zeros(n_qubits, np.uint8)
    fz = np.zeros(n_qubits, np.uint8)
    rec = np.zeros(n_slots, np.uint8)
    for g in range(kind.shape[0]):
        _apply_gate(kind[g], q0[g], q1[g], slot[g], fx, fz, f0[g], f1[g], rec)
    return rec, fx, fz


@njit
def trace_kernel(kind, q0, q1, slot, n_qubits, n_slots, src_gate, src_c0, src_c1):
    """Record flips and final frame caused by each lone fault."""
    n_src = src_gate.shape[0]
    recs = np.zeros((n_src, n_slots), np.uint8)
    fxs = np.zeros((n_src, n_qubits), np.uint8)
    fzs = np.zeros((n_src, n_qubits), np.uint8)
    for s in range(n_src):
        fx = fxs[s]
        fz = fzs[s]
        rec = recs[s]
        g0 = src_gate[s]
        _apply_gate(kind[g0], q0[g0], q1[g0], slot[g0], fx, fz, src_c0[s], src_c1[s], rec)
        for g in range(g0 + 1, kind.shape[0]):
            _apply_gate(kind[g], q0[g], q1[g], slot[g], fx, fz, 0, 0, rec)
    return recs, fxs, fzs


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    """Stabilizer outcomes per round plus the ideal final data readout.

    ``readout_z`` holds the Z-basis readout (the X components of the final
    frame) and ``readout_x`` the X-basis readout (its Z components).
    """

    x_outcomes: np.ndarray  # (rounds, n_x_stabilizers)
    z_outcomes: np.ndarray  # (rounds, n_z_stabilizers)
    readout_z: np.ndarray
    readout_x: np.ndarray

    @property
    def rounds(self) -> int:
        return self.x_outcomes.shape[0]


def _split_record(circuit: Circuit, rec: np.ndarray, fx: np.ndarray, fz: np.ndarray):
    layout = circuit.layout
    nd = layout.n_data
    nx, nz = len(layout.x_stabilizers), len(layout.z_stabilizers)
    body = rec[: circuit.rounds * (nx + nz)].reshape(circuit.rounds, nx + nz)
    record = MeasurementRecord(
        x_outcomes=body[:, :nx].copy(),
        z_outcomes=body[:, nx:].copy(),
        readout_z=fx[:nd].copy(),
        readout_x=fz[:nd].copy(),
    )
    return record, PauliFrame(fx[:nd], fz[:nd])


def propagate(circuit: Circuit, faults: list[Fault]) -> tuple[MeasurementRecord, PauliFrame]:
    """Push the faults through the circuit; returns the record and final data frame."""
    if circuit.layout is None:
        raise ValueError("propagate needs a circuit built from a layout")
    kind, q0, q1, slot, _ = circuit.arrays
    f0 = np.zeros(len(circuit), np.int64)
    f1 = np.zeros(len(circuit), np.int64)
    for fault in faults:
        if not 0 <= fault.gate < len(circuit):
            raise ValueError(f"fault on unknown gate {fault.gate}")
        if len(fault.paulis) != len(circuit.gates[fault.gate].targets):
            raise ValueError(f"fault {fault} does not match its gate's targets")
        f0[fault.gate] ^= fault.paulis[0].value
        if len(fault.paulis) > 1:
            f1[fault.gate] ^= fault.paulis[1].value
    rec, fx, fz = propagate_kernel(kind, q0, q1, slot, circuit.n_qubits, circuit.n_slots, f0, f1)
    return _split_record(circuit, rec, fx, fz)


@dataclass(frozen=True)
class SyndromeInstance:
    """Detection events of one trial as ``(stabilizer, layer)`` sites per basis."""

    x: tuple[tuple[int, int], ...]
    z: tuple[tuple[int, int], ...]

    def events(self, basis: str) -> tuple[tuple[int, int], ...]:
        return self.x if basis == "X" else self.z

    def vertices(self, basis: str, n_stabilizers: int) -> np.ndarray:
        return np.array([t * n_stabilizers + s for s, t in self.events(basis)], np.int64)


def event_layers(outcomes: np.ndarray, final: np.ndarray) -> np.ndarray:
    """XOR of consecutive outcome layers; the final ideal layer closes every chain.

    Works on a leading batch axis as well: ``outcomes`` (..., rounds, n),
    ``final`` (..., n) -> (..., rounds + 1, n).
    """
    stacked = np.concatenate([outcomes, final[..., None, :]], axis=-2)
    prev = np.zeros_like(stacked)
    prev[..., 1:, :] = stacked[..., :-1, :]
    return stacked ^ prev


def detection_events(record: MeasurementRecord, layout: CodeLayout) -> SyndromeInstance:
    final_x = (layout.x_checks.astype(np.int64) @ record.readout_x).astype(np.uint8) & 1
    final_z = (layout.z_checks.astype(np.int64) @ record.readout_z).astype(np.uint8) & 1
    ex = event_layers(record.x_outcomes, final_x)
    ez = event_layers(record.z_outcomes, final_z)
    as_sites = lambda e: tuple((int(s), int(t)) for t, s in zip(*np.nonzero(e)))
    return SyndromeInstance(x=tuple(sorted(as_sites(ex))), z=tuple(sorted(as_sites(ez))))
