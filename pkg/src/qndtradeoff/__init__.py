"""Quantum non-demolition measurement on d-level systems.

Library and CLI for the trade-off between Eve's estimation fidelity G
and Bob's output fidelity F under an ancilla-coupled QND measurement:
closed-form fidelities, the tight (G, F) boundary, explicit circuit and
Kraus constructions, pointer-state discrimination strategies, and
seed-reproducible Monte Carlo over Haar-random input states.
"""

from ._backend import active_backend, available_backends, set_backend
from .channel import (
    AncillaPreparation,
    KrausChannel,
    QndSpec,
    channel_from_circuit,
    cnot_qudit,
    kraus_qnd,
    make_ancilla,
    natural_matrix,
    phase_correction,
    qnd_unitary,
    qubit_pointer_spec,
    twirl_wrap,
)
from .discrimination import (
    INCONCLUSIVE,
    Povm,
    PovmReport,
    error_rate,
    helstrom_povm,
    povm_validate,
    projective_povm,
    sample_outcome,
    unambiguous_povm,
)
from .qlinalg import hermitian_eig, partial_trace, tensor, unitary_with_column
from .rng import SeededRng
from .states import DensityMatrix, PureState, fidelity, haar_state, haar_unitary
from .tradeoff import (
    Protocol,
    RunRecord,
    SubensembleStats,
    TradeoffPoint,
    analytic_fg,
    bound_rhs,
    imperfect_fg,
    imperfect_protocol,
    kraus_fg,
    mc_fg,
    mc_fixed_state,
    perfect_protocol,
    qubit_minerror_point,
    saturation_gap,
    simulate_run,
)

__version__ = "0.1.0"
