"""
A long dialogue on one handshake
================================

After the initial check the two parties keep exactly m+n live pairs each.
Every message spends them and ships the same number of fresh halves, so
the conversation can go on without setting the channel up again.
"""

from cqsd import Party, ProtocolParams, Session, pack_bits, unpack_bits

params = ProtocolParams(m=4, n=4, seed=2024)
session = Session(params)
session.distribute()
print(session.establish_channel())

lines = {
    Party.ALICE: "hello bob",
    Party.BOB: "hi alice",
}
for turn in range(6):
    sender = Party.ALICE if turn % 2 == 0 else Party.BOB
    text = lines[sender].encode()
    bits = [(byte >> (7 - i)) & 1 for byte in text for i in range(8)]
    # m=4 carries one byte per transmission
    received = []
    for start in range(0, len(bits), 8):
        chunk, _ = pack_bits(bits[start:start + 8])
        received.extend(unpack_bits(session.send_message(sender, chunk).payload))
    data = bytes(int("".join(map(str, received[i:i + 8])), 2) for i in range(0, len(received), 8))
    print(f"{sender.value:>5}: {data.decode()}   live pairs {session.live_counts()[Party.ALICE]}")

print("transmissions:", session.transmissions, "handshakes:", session.handshakes)
print("batch sizes seen:", sorted(set(session.batch_sizes)))
session.close()

# the last few transcript lines
for event in session.transcript.events[-4:]:
    print(event.to_json())
