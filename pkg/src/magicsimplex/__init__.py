"""Bell-diagonal qudit states in the magic simplex.

Construction of Weyl-Heisenberg Bell states, uniform sampling of mixing
probabilities, symmetry-group machinery, and a battery of separability /
entanglement detectors with a combined classification pipeline.
"""

__version__ = "0.1.0"

from .weyl import (
    bell_projector,
    bell_state,
    enumerate_cosets,
    enumerate_order_d_subgroups,
    partial_trace,
    partial_transpose,
    realignment,
    weyl_operator,
    PhaseSubgroup,
)
from .states import (
    BellDiagonalState,
    density_matrix,
    in_enclosure,
    indicator_state,
    kernel_vertices,
    sample_enclosure,
    sample_simplex,
    uniform_state,
)

__all__ = [
    "BellDiagonalState",
    "PhaseSubgroup",
    "bell_projector",
    "bell_state",
    "density_matrix",
    "enumerate_cosets",
    "enumerate_order_d_subgroups",
    "in_enclosure",
    "indicator_state",
    "kernel_vertices",
    "partial_trace",
    "partial_transpose",
    "realignment",
    "sample_enclosure",
    "sample_simplex",
    "uniform_state",
    "weyl_operator",
]
