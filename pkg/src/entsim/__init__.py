"""Simulator for photonic-entanglement experiments and entanglement-based
quantum communication.

The package covers nonlocality tests (CHSH and the three-party Mermin
combination), the detection-efficiency loophole, teleportation, dense
coding, entanglement swapping, local-filtering distillation, two-qubit
state tomography, and a quantitative key-distribution model with Monte
Carlo protocol runs.  ``entsim.cli`` exposes the same experiments as a
command-line tool.
"""

from .belltest import (
    ALPHA_MAXIMAL,
    DEFAULT_ALPHA_SWEEP,
    LHV_BOUND,
    MERMIN_LHV_BOUND,
    SPEED_OF_LIGHT,
    TSIRELSON,
    BoundReport,
    ChshSettings,
    chsh,
    chsh_estimate,
    chsh_optimize,
    correlation_matrix_bound,
    correlation_tensor,
    critical_efficiency,
    diagonal_coincidence_profile,
    mermin3,
    speed_lower_bound,
    threshold_sweep,
)
from .distill import (
    DistillationReport,
    LocalFilter,
    best_diagonal_filter,
    hidden_family,
    hidden_nonlocality_demo,
    local_filter,
    procrustean_filter_for,
)
from .measure import (
    IDEAL_DETECTOR,
    CorrelationEstimate,
    CountTable,
    DetectorModel,
    correlation,
    correlation_from_counts,
    estimate_correlation,
    joint_expectation,
)
from .protocols import (
    BsmKind,
    BsmOutcome,
    ClassicalMessage,
    average_teleport_fidelity,
    bsm_probabilities,
    dense_capacity,
    dense_code,
    dense_decode,
    entanglement_swap,
    full_bsm,
    partial_bsm,
    swap_outcomes,
    teleport,
    teleport_outcomes,
)
from .qcore import (
    BLOCH_X,
    BLOCH_Y,
    BLOCH_Z,
    BlochVector,
    DensityMatrix,
    StateVector,
    born_probabilities,
    fidelity,
    partial_trace,
    tensor,
)
from .qkdsim import (
    COHERENT_ATTACK_QBER,
    INDIVIDUAL_ATTACK_QBER,
    KeyExchangeRecord,
    LinkParams,
    RatePoint,
    bb84_montecarlo,
    binary_entropy,
    ekert_montecarlo,
    eve_information,
    max_distance,
    qber_model,
    rate_curve,
    secret_rate,
    secret_sharing_ghz,
    sifted_rate,
    t_link,
    write_rate_curve,
    write_record,
)
from .sources import (
    BellKind,
    SourceModel,
    bell_state,
    ghz,
    nonmax_state,
    werner,
)
from .tomography import (
    ReconstructionResult,
    linear_inversion,
    log_likelihood,
    mle_reconstruct,
    project_to_physical,
    simulate_counts,
    tomo_settings,
    write_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_MAXIMAL",
    "BLOCH_X",
    "BLOCH_Y",
    "BLOCH_Z",
    "BellKind",
    "BlochVector",
    "BoundReport",
    "BsmKind",
    "BsmOutcome",
    "COHERENT_ATTACK_QBER",
    "ChshSettings",
    "ClassicalMessage",
    "CorrelationEstimate",
    "CountTable",
    "DEFAULT_ALPHA_SWEEP",
    "DensityMatrix",
    "DetectorModel",
    "DistillationReport",
    "IDEAL_DETECTOR",
    "INDIVIDUAL_ATTACK_QBER",
    "KeyExchangeRecord",
    "LHV_BOUND",
    "LinkParams",
    "LocalFilter",
    "MERMIN_LHV_BOUND",
    "RatePoint",
    "ReconstructionResult",
    "SPEED_OF_LIGHT",
    "SourceModel",
    "StateVector",
    "TSIRELSON",
    "average_teleport_fidelity",
    "bb84_montecarlo",
    "bell_state",
    "best_diagonal_filter",
    "binary_entropy",
    "born_probabilities",
    "bsm_probabilities",
    "chsh",
    "chsh_estimate",
    "chsh_optimize",
    "correlation",
    "correlation_from_counts",
    "correlation_matrix_bound",
    "correlation_tensor",
    "critical_efficiency",
    "dense_capacity",
    "dense_code",
    "dense_decode",
    "diagonal_coincidence_profile",
    "ekert_montecarlo",
    "entanglement_swap",
    "estimate_correlation",
    "eve_information",
    "fidelity",
    "full_bsm",
    "ghz",
    "hidden_family",
    "hidden_nonlocality_demo",
    "joint_expectation",
    "linear_inversion",
    "local_filter",
    "log_likelihood",
    "max_distance",
    "mermin3",
    "mle_reconstruct",
    "nonmax_state",
    "partial_bsm",
    "partial_trace",
    "procrustean_filter_for",
    "project_to_physical",
    "qber_model",
    "rate_curve",
    "secret_rate",
    "secret_sharing_ghz",
    "sifted_rate",
    "simulate_counts",
    "speed_lower_bound",
    "swap_outcomes",
    "t_link",
    "teleport",
    "teleport_outcomes",
    "tensor",
    "threshold_sweep",
    "tomo_settings",
    "werner",
    "write_matrix",
    "write_rate_curve",
    "write_record",
]
