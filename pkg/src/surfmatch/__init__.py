"""Surface-code matching decoders with correlation-aware reweighting.

Hot loops are compiled with numba when it is importable; set
``SURFMATCH_NO_JIT=1`` before import to run the same kernels as plain Python.
"""

from ._jit import JIT_ENABLED
from .layout import CodeLayout, PauliFrame, PauliTerm, build_layout, ideal_syndrome, logical_failure

__version__ = "0.1.0"

__all__ = [
    "JIT_ENABLED",
    "CodeLayout",
    "PauliFrame",
    "PauliTerm",
    "build_layout",
    "ideal_syndrome",
    "logical_failure",
]
