"""
Dense coding on a shared singlet
================================

Each party holds one half of a singlet.  Applying one of four local
operators to your half moves the pair onto one of the four Bell states,
and a Bell measurement on both halves tells the receiver which operator
was used, i.e. two classical bits per qubit sent.
"""

from cqsd import (
    ALL_BIT_PAIRS,
    MeasBasis,
    RandomSource,
    apply_pauli,
    bell_measure,
    decode,
    encode,
    measure_pair_in_basis,
    singlet,
)

rng = RandomSource(1)

# The singlet is perfectly anti-correlated in both checking bases.
for basis in MeasBasis:
    outcomes = [measure_pair_in_basis(singlet(), basis, rng) for _ in range(8)]
    print(basis.value, outcomes)

# message -> operator -> resulting Bell state -> decoded message
for bits in ALL_BIT_PAIRS:
    op = encode(bits)
    state = apply_pauli(singlet(), 0, op)
    kind = bell_measure(state, rng)
    amps = " ".join(f"{a.real:+.3f}" for a in state.amps)
    print(f"{bits}  {op.gate:<2}  [{amps}]  {kind.label:<4}  -> {decode(kind)}")
