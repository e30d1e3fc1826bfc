"""Planar surface-code geometry, Pauli frames and ideal syndrome extraction.

Coordinates live on a ``(2d-1) x (2d-1)`` integer grid. Data qubits sit on
even-even and odd-odd sites, X stabilizers on (even row, odd column) sites and
Z stabilizers on (odd row, even column) sites. With this convention the
minimum-length logical X operators are the ``d`` straight columns of even-even
qubits (top to bottom) and logical Z operators are straight rows (left to
right). X errors are flagged by Z stabilizers and terminate on the top/bottom
edges; Z errors are flagged by X stabilizers and terminate on the left/right
edges.
"""

from __future__ import annotations

import enum
import json
from functools import cached_property
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

DIRECTIONS = ("N", "W", "E", "S")
_OFFSETS = {"N": (-1, 0), "W": (0, -1), "E": (0, 1), "S": (1, 0)}


class PauliTerm(enum.Enum):
    I = 0
    X = 1
    Z = 2
    Y = 3

    @property
    def has_x(self) -> bool:
        return bool(self.value & 1)

    @property
    def has_z(self) -> bool:
        return bool(self.value & 2)

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        # phase discarded
        return PauliTerm(self.value ^ other.value)


@dataclass(frozen=True)
class Stabilizer:
    site: tuple[int, int]
    qubits: tuple[int, ...]
    neighbors: dict[str, int | None] = field(compare=False)

    @property
    def weight(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True, eq=False)
class CodeLayout:
    d: int
    data_qubits: tuple[tuple[int, int], ...]
    x_stabilizers: tuple[Stabilizer, ...]
    z_stabilizers: tuple[Stabilizer, ...]
    logical_x_support: tuple[int, ...]
    logical_z_support: tuple[int, ...]
    boundary_kind: dict[str, tuple[str, str]]
    x_checks: np.ndarray = field(repr=False)
    z_checks: np.ndarray = field(repr=False)

    @property
    def n_data(self) -> int:
        return len(self.data_qubits)

    def qubit_index(self, site: tuple[int, int]) -> int:
        return self._index[tuple(site)]

    @cached_property
    def _index(self) -> dict[tuple[int, int], int]:
        return {q: i for i, q in enumerate(self.data_qubits)}

    def stabilizers(self, basis: str) -> tuple[Stabilizer, ...]:
        return self.x_stabilizers if basis == "X" else self.z_stabilizers

    def checks(self, basis: str) -> np.ndarray:
        return self.x_checks if basis == "X" else self.z_checks

    def to_json(self) -> str:
        doc = {
            "d": self.d,
            "data_qubits": [list(q) for q in self.data_qubits],
            "x_stabilizers": [
                {"site": list(s.site), "qubits": list(s.qubits)} for s in self.x_stabilizers
            ],
            "z_stabilizers": [
                {"site": list(s.site), "qubits": list(s.qubits)} for s in self.z_stabilizers
            ],
            "logical_x_support": list(self.logical_x_support),
            "logical_z_support": list(self.logical_z_support),
            "boundary_kind": {k: list(v) for k, v in self.boundary_kind.items()},
        }
        return json.dumps(doc, indent=1)


def build_layout(d: int) -> CodeLayout:
    """Distance-``d`` planar surface code. Deterministic for fixed ``d``."""
    if not isinstance(d, (int, np.integer)) or d < 2:
        raise ValueError(f"code distance must be an integer >= 2, got {d!r}")
    d = int(d)
    size = 2 * d - 1
    data = tuple((r, c) for r in range(size) for c in range(size) if (r + c) % 2 == 0)
    index = {q: i for i, q in enumerate(data)}

    def make(sites):
        stabs = []
        for r, c in sites:
            nb = {}
            for name in DIRECTIONS:
                dr, dc = _OFFSETS[name]
                nb[name] = index.get((r + dr, c + dc))
            qubits = tuple(q for q in (nb[k] for k in DIRECTIONS) if q is not None)
            stabs.append(Stabilizer((r, c), qubits, nb))
        return tuple(stabs)

    xs = make([(r, c) for r in range(0, size, 2) for c in range(1, size, 2)])
    zs = make([(r, c) for r in range(1, size, 2) for c in range(0, size, 2)])

    def check_matrix(stabs):
        h = np.zeros((len(stabs), len(data)), dtype=np.uint8)
        for i, s in enumerate(stabs):
            h[i, list(s.qubits)] = 1
        h.setflags(write=False)
        return h

    logical_x = tuple(index[(r, 0)] for r in range(0, size, 2))
    logical_z = tuple(index[(0, c)] for c in range(0, size, 2))
    return CodeLayout(
        d=d,
        data_qubits=data,
        x_stabilizers=xs,
        z_stabilizers=zs,
        logical_x_support=logical_x,
        logical_z_support=logical_z,
        # sides where chains flagged by each stabilizer type may terminate
        boundary_kind={"X": ("left", "right"), "Z": ("top", "bottom")},
        x_checks=check_matrix(xs),
        z_checks=check_matrix(zs),
    )


@dataclass(frozen=True, eq=False)
class PauliFrame:
    """X/Z error record; a qubit carries Y when both bits are set."""

    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.uint8) & 1
        z = np.asarray(self.z, dtype=np.uint8) & 1
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z bit vectors must be 1-D and equally sized")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @classmethod
    def identity(cls, n: int) -> "PauliFrame":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def from_paulis(cls, n: int, paulis: dict[int, PauliTerm]) -> "PauliFrame":
        x = np.zeros(n, np.uint8)
        z = np.zeros(n, np.uint8)
        for q, p in paulis.items():
            x[q] ^= p.has_x
            z[q] ^= p.has_z
        return cls(x, z)

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, q: int) -> PauliTerm:
        return PauliTerm(int(self.x[q]) | (int(self.z[q]) << 1))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliFrame):
            return NotImplemented
        return np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z)

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes()))

    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    def __matmul__(self, other: "PauliFrame") -> "PauliFrame":
        return compose(self, other)


def compose(a: PauliFrame, b: PauliFrame) -> PauliFrame:
    if len(a) != len(b):
        raise ValueError(f"frame size mismatch: {len(a)} vs {len(b)}")
    return PauliFrame(a.x ^ b.x, a.z ^ b.z)


class Syndrome(NamedTuple):
    """Indices of violated X and Z stabilizers."""

    x: frozenset[int]
    z: frozenset[int]

    def is_empty(self) -> bool:
        return not self.x and not self.z


def _check_size(frame: PauliFrame, layout: CodeLayout) -> None:
    if len(frame) != layout.n_data:
        raise ValueError(f"frame has {len(frame)} qubits, layout has {layout.n_data}")


def ideal_syndrome(frame: PauliFrame, layout: CodeLayout) -> Syndrome:
    _check_size(frame, layout)
    sx = (layout.x_checks.astype(np.int64) @ frame.z) & 1
    sz = (layout.z_checks.astype(np.int64) @ frame.x) & 1
    return Syndrome(frozenset(np.flatnonzero(sx).tolist()), frozenset(np.flatnonzero(sz).tolist()))


class LogicalFailure(NamedTuple):
    x: bool
    z: bool


def logical_failure(residual: PauliFrame, layout: CodeLayout) -> LogicalFailure:
    """Which logical operators the residual implements.

    The residual must already be back in the code space.
    """
    if not ideal_syndrome(residual, layout).is_empty():
        raise ValueError("residual frame has a nonzero syndrome; correction incomplete")
    fx = int(residual.x[list(layout.logical_z_support)].sum()) & 1
    fz = int(residual.z[list(layout.logical_x_support)].sum()) & 1
    return LogicalFailure(bool(fx), bool(fz))
