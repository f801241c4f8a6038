"""Two-bit message alphabet: bit pairs <-> encoding operators <-> Bell classes."""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

from .quantum import BellKind, PauliOp, apply_pauli, classify_bell, singlet


class BitPair(NamedTuple):
    hi: int
    lo: int

    def __str__(self) -> str:
        return f"{self.hi}{self.lo}"

    @classmethod
    def parse(cls, text: str) -> "BitPair":
        if len(text) != 2 or any(c not in "01" for c in text):
            raise ValueError(f"bit pair must be two binary digits, got {text!r}")
        return cls(int(text[0]), int(text[1]))


ALL_BIT_PAIRS = (BitPair(1, 1), BitPair(1, 0), BitPair(0, 1), BitPair(0, 0))

_ENCODE = {
    BitPair(1, 1): PauliOp.U1_I,
    BitPair(1, 0): PauliOp.U2_X,
    BitPair(0, 1): PauliOp.U3_Z,
    BitPair(0, 0): PauliOp.U4_ZX,
}

_DECODE = {
    BellKind.PSI_MINUS: BitPair(1, 1),
    BellKind.PHI_MINUS: BitPair(1, 0),
    BellKind.PSI_PLUS: BitPair(0, 1),
    BellKind.PHI_PLUS: BitPair(0, 0),
}


def induced_bell_class(op: PauliOp, target: int = 0) -> BellKind:
    """Bell class reached by applying ``op`` to one half of a fresh singlet."""
    return classify_bell(apply_pauli(singlet(), target, op))


def _check_tables() -> None:
    derived = {induced_bell_class(op): bits for bits, op in _ENCODE.items()}
    if derived != _DECODE:
        raise RuntimeError(f"decode table disagrees with operator physics: {derived}")


_check_tables()


def encode(message: BitPair) -> PauliOp:
    return _ENCODE[BitPair(*message)]


def decode(outcome: BellKind) -> BitPair:
    return _DECODE[BellKind(outcome)]


def pack_bits(payload: Sequence[int], *, pad: bool = False) -> tuple[list[BitPair], int]:
    """Group bits into consecutive pairs.

    Returns ``(pairs, pad_length)``.  An odd payload is an error unless
    ``pad`` is set, in which case a trailing 0 is appended and
    ``pad_length`` is 1.
    """
    bits = list(payload)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("payload must contain only 0 and 1")
    pad_length = len(bits) % 2
    if pad_length:
        if not pad:
            raise ValueError("odd payload")
        bits.append(0)
    pairs = [BitPair(bits[i], bits[i + 1]) for i in range(0, len(bits), 2)]
    return pairs, pad_length


def unpack_bits(pairs: Iterable[BitPair], pad_length: int = 0) -> list[int]:
    bits = [b for pair in pairs for b in pair]
    return bits[: len(bits) - pad_length] if pad_length else bits


def parse_bits(text: str) -> list[int]:
    """``"1001"`` -> ``[1, 0, 0, 1]``."""
    if any(c not in "01" for c in text):
        raise ValueError(f"not a bit string: {text!r}")
    return [int(c) for c in text]


def format_pairs(pairs: Iterable[BitPair]) -> str:
    return "".join(str(BitPair(*p)) for p in pairs)
