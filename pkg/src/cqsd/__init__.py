"""Continuous quantum secure dialogue: EPR-pair simulator and attack harness."""

from .channel import (
    BasisStrategy,
    ChannelModel,
    ChannelSpec,
    InterceptResendConfig,
    ParticleInjectionConfig,
    detection_probability_closed_form,
    ideal_channel,
    intercept_resend,
    particle_injection,
)
from .codec import ALL_BIT_PAIRS, BitPair, decode, encode, pack_bits, unpack_bits
from .protocol import (
    Aborted,
    Delivered,
    Party,
    ProtocolParams,
    Session,
    SessionState,
    close_session,
    error_rate,
    establish_channel,
    init_session,
    run_dialogue,
    send_message,
)
from .quantum import (
    BellKind,
    MeasBasis,
    PauliOp,
    RandomSource,
    TwoQubitState,
    apply_pauli,
    bell_measure,
    bell_state,
    measure_pair_in_basis,
    measure_single,
    singlet,
)
from .experiments import StatsReport, attack_stats

__version__ = "0.1.0"
