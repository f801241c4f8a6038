"""Session state machine for the continuous secure dialogue.

A session walks through four phases:

1. the initiator prepares ``2(m+n)`` singlets and ships one half of each;
2. ``m+n`` of those pairs are sacrificed as an initial eavesdropping check;
3. either party may then send an ``m``-symbol message.  The sender spends
   its ``m+n`` live pairs (``n`` become checks, ``m`` carry the message)
   and ships ``m+n`` fresh halves along with them, so both sides end the
   transmission holding ``m+n`` live pairs again;
4. one side closes the dialogue.

Any failed check or particle-count mismatch aborts the session for good.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from .channel import Carrier, ChannelModel, EPRPair, IdealChannel, _no_log
from .codec import BitPair, decode, encode, format_pairs
from .quantum import (
    MeasBasis,
    RandomSource,
    apply_pauli,
    bell_measure,
    derive_seed,
    measure_pair_in_basis,
    singlet,
)

EAVESDROPPER_DETECTED = "eavesdropper detected"
COUNT_MISMATCH = "count mismatch"
ALREADY_CLOSED = "already closed"


class ProtocolError(RuntimeError):
    """An operation was invoked in a state that does not allow it."""


class LedgerError(AssertionError):
    """Internal bookkeeping was violated (a defect, not a protocol abort)."""


class Party(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"

    @property
    def other(self) -> "Party":
        return Party.BOB if self is Party.ALICE else Party.ALICE


class Actor(str, enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"
    CHANNEL = "Channel"
    ADVERSARY = "Adversary"


class SessionState(str, enum.Enum):
    CREATED = "Created"
    HALVES_DISTRIBUTED = "HalvesDistributed"
    CHANNEL_ESTABLISHED = "ChannelEstablished"
    IN_TRANSMISSION = "InTransmission"
    ABORTED = "Aborted"
    CLOSED = "Closed"


@dataclass(frozen=True)
class ProtocolParams:
    m: int
    n: int
    error_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.m, int) or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m!r}")
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if not 0.0 <= self.error_threshold < 1.0:
            raise ValueError(f"error_threshold must lie in [0, 1), got {self.error_threshold!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    @property
    def live_pairs(self) -> int:
        return self.m + self.n

    @property
    def batch_size(self) -> int:
        return 2 * (self.m + self.n)


class PairStatus(str, enum.Enum):
    LIVE = "Live"
    CONSUMED_CHECK = "ConsumedCheck"
    CONSUMED_MESSAGE = "ConsumedMessage"


@dataclass(slots=True)
class LedgerEntry:
    pair: EPRPair
    my_half: int
    status: PairStatus = PairStatus.LIVE


class PairLedger:
    """One party's record of the pair halves it holds or has spent."""

    def __init__(self, owner: Party) -> None:
        self.owner = owner
        self.entries: dict[str, LedgerEntry] = {}
        self._live: dict[str, None] = {}

    def add(self, pair: EPRPair, my_half: int) -> None:
        if pair.id in self.entries:
            raise LedgerError(f"{self.owner.value} already holds pair {pair.id}")
        self.entries[pair.id] = LedgerEntry(pair, my_half)
        self._live[pair.id] = None

    def live_ids(self) -> list[str]:
        return list(self._live)

    @property
    def live_count(self) -> int:
        return len(self._live)

    def entry(self, pair_id: str) -> LedgerEntry:
        return self.entries[pair_id]

    def consume(self, pair_id: str, status: PairStatus) -> LedgerEntry:
        entry = self.entries.get(pair_id)
        if entry is None or entry.status is not PairStatus.LIVE:
            raise LedgerError(f"{self.owner.value}: pair {pair_id} is not live")
        entry.status = status
        del self._live[pair_id]
        return entry

    def discard_live(self) -> list[str]:
        dropped = list(self._live)
        for pair_id in dropped:
            del self.entries[pair_id]
        self._live.clear()
        return dropped


# -- classical announcements -------------------------------------------------


@dataclass(frozen=True)
class CheckPositions:
    pair_ids: tuple[str, ...]
    bases: tuple[MeasBasis, ...]
    slots: tuple[int, ...] | None = None

    def to_payload(self) -> dict[str, Any]:
        out: dict[str, Any] = {"pairs": list(self.pair_ids), "bases": [b.value for b in self.bases]}
        if self.slots is not None:
            out["slots"] = list(self.slots)
        return out


@dataclass(frozen=True)
class CheckResults:
    pair_ids: tuple[str, ...]
    outcomes: tuple[tuple[int, int], ...]
    error_rate: float

    def to_payload(self) -> dict[str, Any]:
        return {
            "pairs": list(self.pair_ids),
            "outcomes": [list(o) for o in self.outcomes],
            "error_rate": self.error_rate,
        }


@dataclass(frozen=True)
class PositionsOfNewPairs:
    pair_ids: tuple[str, ...]
    slots: tuple[int, ...]
    message_pair_ids: tuple[str, ...] = ()
    message_slots: tuple[int, ...] = ()

    def to_payload(self) -> dict[str, Any]:
        return {
            "pairs": list(self.pair_ids),
            "slots": list(self.slots),
            "message_pairs": list(self.message_pair_ids),
            "message_slots": list(self.message_slots),
        }


@dataclass(frozen=True)
class Abort:
    reason: str

    def to_payload(self) -> dict[str, Any]:
        return {"reason": self.reason}


@dataclass(frozen=True)
class Terminate:
    def to_payload(self) -> dict[str, Any]:
        return {}


Announcement = CheckPositions | CheckResults | PositionsOfNewPairs | Abort | Terminate

_ANNOUNCEMENT_KINDS = {
    CheckPositions: "check_positions",
    CheckResults: "check_results",
    PositionsOfNewPairs: "new_pair_positions",
    Abort: "abort",
    Terminate: "terminate",
}


# -- transcript ----------------------------------------------------------------


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    actor: str
    kind: str
    payload: dict[str, Any]

    def to_json(self) -> str:
        record = {"seq": self.seq, "actor": self.actor, "kind": self.kind, "payload": self.payload}
        return json.dumps(record, separators=(",", ":"))


_ACTOR_NAMES = {a: a.value for a in Actor} | {p: p.value for p in Party} | {a.value: a.value for a in Actor}


class Transcript:
    """Ordered event log.  With ``record=False`` events are dropped (bulk runs)."""

    def __init__(self, record: bool = True) -> None:
        self.record = record
        self.events: list[TranscriptEvent] = []

    def emit(self, actor: Actor | Party | str, kind: str, **payload: Any) -> None:
        if not self.record:
            return
        self.events.append(TranscriptEvent(len(self.events), _ACTOR_NAMES[actor], kind, payload))

    def kinds(self) -> list[str]:
        return [e.kind for e in self.events]

    def of_kind(self, kind: str) -> list[TranscriptEvent]:
        return [e for e in self.events if e.kind == kind]

    def to_jsonl(self) -> str:
        return "".join(e.to_json() + "\n" for e in self.events)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)


def read_transcript(path: str | Path) -> list[TranscriptEvent]:
    events = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            record = json.loads(line)
            events.append(
                TranscriptEvent(record["seq"], record["actor"], record["kind"], record["payload"])
            )
    return events


# -- outcomes ------------------------------------------------------------------


@dataclass(frozen=True)
class Established:
    check_pairs: int
    error_rate: float


@dataclass(frozen=True)
class Delivered:
    sender: Party
    payload: tuple[BitPair, ...]
    qubits: int
    error_rate: float


@dataclass(frozen=True)
class Aborted:
    reason: str
    stage: str


def error_rate(check_outcomes: Sequence[tuple[int, int]]) -> float:
    """Fraction of check outcomes that came out correlated."""
    if not check_outcomes:
        raise ValueError("no checks")
    return sum(1 for b0, b1 in check_outcomes if b0 == b1) / len(check_outcomes)


# -- session ---------------------------------------------------------------------


class Session:
    """One dialogue between Alice and Bob over a given channel model.

    Randomness comes from two streams derived from ``params.seed``: the
    session stream (both parties' position and basis choices plus
    measurement outcomes, drawn in timeline order) and a separate stream
    handed to the channel model, so an adversary's coin flips never shift
    the honest parties' draws.  The channel attribute may be swapped
    between phases, e.g. to attack only the message transmissions.
    """

    def __init__(
        self,
        params: ProtocolParams,
        channel: ChannelModel | None = None,
        initiator: Party = Party.ALICE,
        *,
        record: bool = True,
    ) -> None:
        self.params = params
        self.channel = channel if channel is not None else IdealChannel()
        self.initiator = Party(initiator)
        self.state = SessionState.CREATED
        self.abort: Aborted | None = None
        self.transcript = Transcript(record)
        # (stage, results) for every check round, kept even when not recording.
        self.check_history: list[tuple[str, CheckResults]] = []
        self.ledgers = {Party.ALICE: PairLedger(Party.ALICE), Party.BOB: PairLedger(Party.BOB)}
        self.handshakes = 0
        self.transmissions = 0
        self.batch_sizes: list[int] = []

        self._rng = RandomSource(derive_seed(params.seed, "session"))
        self._channel_rng_: RandomSource | None = None
        self._generation = {Party.ALICE: 0, Party.BOB: 0}

    # -- helpers --------------------------------------------------------------

    @property
    def _channel_rng(self) -> RandomSource:
        # Seeded on first use; the ideal channel never draws.
        if self._channel_rng_ is None:
            self._channel_rng_ = RandomSource(derive_seed(self.params.seed, "channel"))
        return self._channel_rng_

    def _require(self, *states: SessionState) -> None:
        if self.state is SessionState.CLOSED and SessionState.CLOSED not in states:
            raise ProtocolError(ALREADY_CLOSED)
        if self.state not in states:
            allowed = ", ".join(s.value for s in states)
            raise ProtocolError(f"session is {self.state.value}; expected {allowed}")

    def _announce(self, actor: Party, announcement: Announcement) -> None:
        self.channel.observe(announcement)
        if self.transcript.record:
            self.transcript.emit(
                actor, _ANNOUNCEMENT_KINDS[type(announcement)], **announcement.to_payload()
            )

    def _abort(self, actor: Party, reason: str, stage: str) -> Aborted:
        self._announce(actor, Abort(reason))
        self.state = SessionState.ABORTED
        self.abort = Aborted(reason, stage)
        return self.abort

    def _adversary_log(self, kind: str, **payload: Any) -> None:
        self.transcript.emit(Actor.ADVERSARY, kind, **payload)

    def _log_live(self, actor: Party, kind: str, **payload: Any) -> None:
        if self.transcript.record:
            live = {p.value: self.ledgers[p].live_count for p in Party}
            self.transcript.emit(actor, kind, live=live, **payload)

    def _new_pairs(self, creator: Party, count: int) -> list[EPRPair]:
        generation = self._generation[creator]
        self._generation[creator] += 1
        tag = creator.value[0]
        state = singlet()
        pairs = [EPRPair(f"{tag}{generation}.{i}", state) for i in range(count)]
        ledger = self.ledgers[creator]
        for pair in pairs:
            ledger.add(pair, 0)
        self.transcript.emit(
            creator, "prepare_pairs", generation=generation, count=count, state="Psi-"
        )
        return pairs

    def _transmit(self, sender: Party, carriers: list[Carrier], stage: str) -> list[Carrier] | Aborted:
        """Push a batch through the channel and run the receiver's count check."""
        expected = len(carriers)
        self.transcript.emit(sender, "send_batch", count=expected)
        rng = self._channel_rng
        log = self._adversary_log if self.transcript.record else _no_log
        channel = self.channel
        arrived = [channel.on_qubit(c, rng, log) for c in carriers]
        arrived = channel.on_batch_complete(arrived, rng, log)
        self.batch_sizes.append(len(arrived))
        receiver = sender.other
        self.transcript.emit(receiver, "receive_batch", expected=expected, actual=len(arrived))
        if len(arrived) != expected:
            return self._abort(receiver, COUNT_MISMATCH, stage)
        return arrived

    def _run_checks(
        self,
        announcer: Party,
        measurer: Party,
        check_ids: Sequence[str],
        slots: Sequence[int] | None,
        holders: Sequence[Party],
    ) -> CheckResults:
        rng = self._rng
        bases = tuple(rng.basis() for _ in check_ids)
        self._announce(announcer, CheckPositions(tuple(check_ids), bases, None if slots is None else tuple(slots)))
        outcomes = []
        for pair_id, basis in zip(check_ids, bases):
            for party in holders:
                self.ledgers[party].consume(pair_id, PairStatus.CONSUMED_CHECK)
            pair = self.ledgers[measurer].entry(pair_id).pair
            outcomes.append(measure_pair_in_basis(pair.state, basis, self._rng))
        results = CheckResults(tuple(check_ids), tuple(outcomes), error_rate(outcomes))
        self._announce(measurer, results)
        self.check_history.append(("handshake" if slots is None else "transmission", results))
        return results

    # -- phases ---------------------------------------------------------------

    def distribute(self) -> Aborted | None:
        """Initiator prepares 2(m+n) singlets and sends one half of each."""
        self._require(SessionState.CREATED)
        sender = self.initiator
        pairs = self._new_pairs(sender, self.params.batch_size)
        arrived = self._transmit(sender, [Carrier(p, 1) for p in pairs], "distribution")
        if isinstance(arrived, Aborted):
            return arrived
        receiver = self.ledgers[sender.other]
        for carrier in arrived:
            receiver.add(carrier.pair, carrier.qubit)
        self.state = SessionState.HALVES_DISTRIBUTED
        return None

    def establish_channel(self) -> Established | Aborted:
        """Sacrifice m+n of the distributed pairs as the initial check."""
        self._require(SessionState.HALVES_DISTRIBUTED)
        announcer = self.initiator
        live = self.ledgers[announcer].live_ids()
        check_ids = self._rng.sample(live, self.params.live_pairs)
        results = self._run_checks(announcer, announcer, check_ids, None, tuple(Party))
        self.handshakes += 1
        if results.error_rate > self.params.error_threshold:
            return self._abort(announcer, EAVESDROPPER_DETECTED, "handshake")
        self.state = SessionState.CHANNEL_ESTABLISHED
        self._log_live(announcer, "channel_established")
        return Established(len(check_ids), results.error_rate)

    def send_message(self, sender: Party, payload: Sequence[BitPair]) -> Delivered | Aborted:
        """Send exactly ``m`` bit pairs from ``sender`` to the other party."""
        self._require(SessionState.CHANNEL_ESTABLISHED)
        sender = Party(sender)
        message = tuple(BitPair(*b) for b in payload)
        if len(message) != self.params.m:
            raise ValueError(f"payload must hold exactly m={self.params.m} bit pairs, got {len(message)}")
        self.state = SessionState.IN_TRANSMISSION
        receiver = sender.other
        rng = self._rng
        ledger = self.ledgers[sender]

        live = ledger.live_ids()
        if len(live) != self.params.live_pairs:
            raise LedgerError(f"{sender.value} holds {len(live)} live pairs, expected {self.params.live_pairs}")
        check_ids = rng.sample(live, self.params.n)
        check_set = set(check_ids)
        message_ids = [p for p in live if p not in check_set]

        carriers: list[Carrier] = []
        for pair_id, bits in zip(message_ids, message):
            entry = ledger.consume(pair_id, PairStatus.CONSUMED_MESSAGE)
            entry.pair.state = apply_pauli(entry.pair.state, entry.my_half, encode(bits))
            carriers.append(Carrier(entry.pair, entry.my_half))
        if self.transcript.record:
            self.transcript.emit(
                sender,
                "encode",
                pairs=message_ids,
                operators=[encode(b).gate for b in message],
                payload=format_pairs(message),
            )
        for pair_id in check_ids:
            entry = ledger.consume(pair_id, PairStatus.CONSUMED_CHECK)
            carriers.append(Carrier(entry.pair, entry.my_half))
        fresh = self._new_pairs(sender, self.params.live_pairs)
        carriers.extend(Carrier(p, 1) for p in fresh)
        rng.shuffle(carriers)

        arrived = self._transmit(sender, carriers, "transmission")
        if isinstance(arrived, Aborted):
            return arrived

        slot_of = {c.pair.id: i for i, c in enumerate(arrived) if c.pair is not None}
        fresh_ids = tuple(p.id for p in fresh)
        self._announce(
            sender,
            PositionsOfNewPairs(
                fresh_ids,
                tuple(slot_of[p] for p in fresh_ids),
                tuple(message_ids),
                tuple(slot_of[p] for p in message_ids),
            ),
        )
        results = self._run_checks(
            sender, receiver, check_ids, [slot_of[p] for p in check_ids], (receiver,)
        )
        if results.error_rate > self.params.error_threshold:
            return self._abort(receiver, EAVESDROPPER_DETECTED, "transmission")

        inbox = self.ledgers[receiver]
        classes = []
        decoded = []
        for pair_id in message_ids:
            entry = inbox.consume(pair_id, PairStatus.CONSUMED_MESSAGE)
            kind = bell_measure(entry.pair.state, self._rng)
            classes.append(kind)
            decoded.append(decode(kind))
        if self.transcript.record:
            self.transcript.emit(
                receiver, "bell_measure", pairs=message_ids, classes=[k.label for k in classes]
            )

        for pair in fresh:
            inbox.add(pair, 1)
        self.state = SessionState.CHANNEL_ESTABLISHED
        self.transmissions += 1
        delivered = Delivered(sender, tuple(decoded), len(arrived), results.error_rate)
        self._log_live(
            receiver,
            "delivered",
            sender=sender.value,
            payload=format_pairs(decoded),
            qubits=len(arrived),
        )
        return delivered

    def close(self, by: Party = Party.ALICE) -> SessionState:
        self._require(SessionState.CHANNEL_ESTABLISHED)
        by = Party(by)
        self._announce(by, Terminate())
        dropped = sum(len(ledger.discard_live()) for ledger in self.ledgers.values())
        self.transcript.emit(by, "closed", discarded_halves=dropped)
        self.state = SessionState.CLOSED
        return self.state

    def live_counts(self) -> dict[Party, int]:
        return {p: ledger.live_count for p, ledger in self.ledgers.items()}


# -- module-level entry points ---------------------------------------------------


def init_session(
    params: ProtocolParams,
    channel: ChannelModel | None = None,
    initiator: Party = Party.ALICE,
    *,
    record: bool = True,
) -> Session:
    """Create a session and run the initial pair distribution."""
    session = Session(params, channel, initiator, record=record)
    session.distribute()
    return session


def establish_channel(session: Session) -> Established | Aborted:
    return session.establish_channel()


def send_message(session: Session, sender: Party, payload: Sequence[BitPair]) -> Delivered | Aborted:
    return session.send_message(sender, payload)


def close_session(session: Session, by: Party = Party.ALICE) -> SessionState:
    return session.close(by)


@dataclass
class DialogueResult:
    session: Session
    deliveries: list[Delivered] = field(default_factory=list)

    @property
    def aborted(self) -> Aborted | None:
        return self.session.abort


def run_dialogue(
    params: ProtocolParams,
    script: Iterable[tuple[Party, Sequence[BitPair]]],
    channel: ChannelModel | None = None,
    *,
    close: bool = True,
    attack_transmissions_only: bool = False,
    record: bool = True,
) -> DialogueResult:
    """Distribute, establish, play ``script`` in order, then close.

    Stops at the first abort.  With ``attack_transmissions_only`` the
    setup phases run over an ideal channel and ``channel`` is switched in
    once the secure channel is up.
    """
    setup_channel = IdealChannel() if attack_transmissions_only else channel
    session = init_session(params, setup_channel, record=record)
    result = DialogueResult(session)
    if session.abort is not None:
        return result
    if isinstance(session.establish_channel(), Aborted):
        return result
    if attack_transmissions_only and channel is not None:
        session.channel = channel
    for sender, payload in script:
        outcome = session.send_message(sender, payload)
        if isinstance(outcome, Aborted):
            return result
        result.deliveries.append(outcome)
    if close:
        session.close()
    return result
