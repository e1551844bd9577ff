"""Bell-state decoherence, entanglement sudden death and noisy dense coding."""

__version__ = "0.1.0"

from .channels import (
    Channel,
    ChannelKind,
    EvolutionSpec,
    IntegrationError,
    KrausSet,
    LindbladTerm,
    analytic_apply,
    compose,
    evolve,
    kraus_for,
    lindblad_rhs,
    rk4_step,
    spec_for,
    trajectory,
)
from .densecoding import (
    AlphabetEnsemble,
    EncodingCurve,
    NoisyEncoding,
    ProtocolSpec,
    Transmission,
    alphabet_amp_phase,
    alphabet_noisy_encoding,
    alphabet_pauli,
    build_alphabet,
    capacity_bowen,
    capacity_closed,
    critical_omega,
    critical_time,
    first_maximum,
    holevo,
)
from .entanglement import (
    AZ_AFTER_BZ,
    EsdResult,
    Noise,
    RotationSpec,
    closed_negativity,
    esd_time,
    negativity_curve,
    noisy_rotation,
    rotation_esd_root_phase_x,
    table_tau_d,
)
from .qstate import (
    InvalidStateError,
    Subsystem,
    bell_state,
    check_state,
    commutator,
    hermitian_eigenvalues,
    negativity,
    partial_trace,
    partial_transpose,
    pauli,
    von_neumann_entropy,
)
from .sweep import SweepResult
