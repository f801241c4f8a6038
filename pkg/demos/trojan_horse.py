"""
Counting qubits stops a Trojan horse
====================================

An attacker who slips extra probe particles into a batch changes its
size.  Every batch has a fixed, known size of 2(m+n), so the receiver
counts before measuring anything and aborts on a mismatch.
"""

from cqsd import Party, ProtocolParams, codec, particle_injection, run_dialogue

script = [(Party.ALICE, [codec.BitPair(1, 0)])]

for extra in (0, 1, 3):
    result = run_dialogue(ProtocolParams(1, 1, seed=5), script, particle_injection(extra_per_batch=extra))
    kinds = result.session.transcript.kinds()
    status = result.aborted or f"delivered {len(result.deliveries)} message(s)"
    print(f"extra={extra}: {status}")
    print("   ", " -> ".join(kinds[:6]))
