"""Formation control on digraphs.

Vertices and agents are 0-based. Configurations are (N, n) NumPy arrays, one
agent per row.
"""

from ._core import (
    Digraph,
    FormctlError,
    LarcReport,
    ScdReport,
    closure_check,
    coarse_scd,
    configuration_rank,
    flow_constant,
    in_q,
    is_weakly_connected,
    lie_algebra_at,
    lie_basis,
    lie_dimension,
    sample_configuration,
    simulate,
    steer,
    stratum_dimension,
    structural_verdict,
    track_path,
    transitive_closure,
    witness_basis,
)

__version__ = "0.1.0"

__all__ = [
    "Digraph",
    "FormctlError",
    "LarcReport",
    "ScdReport",
    "closure_check",
    "coarse_scd",
    "configuration_rank",
    "flow_constant",
    "in_q",
    "is_weakly_connected",
    "lie_algebra_at",
    "lie_basis",
    "lie_dimension",
    "sample_configuration",
    "simulate",
    "steer",
    "stratum_dimension",
    "structural_verdict",
    "track_path",
    "transitive_closure",
    "witness_basis",
]
