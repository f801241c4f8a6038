"""Exact statevector engine for a single two-qubit EPR pair.

Amplitudes are stored in computational-basis order |00>, |01>, |10>, |11>
with qubit 0 as the high bit.  By convention qubit 0 is the half kept by
the pair's creator and qubit 1 is the half that gets transmitted.

Everything here works on plain tuples of Python complex numbers.  A
4-element vector is far too small for numpy to pay off, and the Monte
Carlo experiments push millions of these operations through.
"""

from __future__ import annotations

import cmath
import enum
import hashlib
import math
import random
from dataclasses import dataclass
from typing import Sequence

TOL = 1e-9
# Born probabilities below this are rounding noise, not physics.
_PROB_FLOOR = 1e-12

SQRT1_2 = 1.0 / math.sqrt(2.0)

Amplitudes = tuple[complex, complex, complex, complex]
OneQubit = tuple[complex, complex]
Matrix2 = tuple[tuple[complex, complex], tuple[complex, complex]]


class BellKind(enum.IntEnum):
    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3

    @property
    def label(self) -> str:
        return _BELL_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "BellKind":
        for kind, text in _BELL_LABELS.items():
            if text == label:
                return kind
        raise ValueError(f"unknown Bell label {label!r}")


_BELL_LABELS = {
    BellKind.PHI_PLUS: "Phi+",
    BellKind.PHI_MINUS: "Phi-",
    BellKind.PSI_PLUS: "Psi+",
    BellKind.PSI_MINUS: "Psi-",
}


class PauliOp(enum.Enum):
    """The four encoding operators, valued by their gate name."""

    U1_I = "I"
    U2_X = "X"
    U3_Z = "Z"
    U4_ZX = "ZX"

    @property
    def gate(self) -> str:
        return self.value

    @property
    def matrix(self) -> Matrix2:
        return _PAULI_MATRICES[self]


# U4 is Z.X, i.e. |0><1| - |1><0|.
_PAULI_MATRICES: dict[PauliOp, Matrix2] = {
    PauliOp.U1_I: ((1, 0), (0, 1)),
    PauliOp.U2_X: ((0, 1), (1, 0)),
    PauliOp.U3_Z: ((1, 0), (0, -1)),
    PauliOp.U4_ZX: ((0, 1), (-1, 0)),
}


class MeasBasis(str, enum.Enum):
    Z = "Z"
    X = "X"


class RandomSource:
    """Seeded random stream; one owner at a time.

    Wraps :class:`random.Random` (Mersenne Twister), so equal seeds give
    identical draw sequences on every platform.  Child streams derived
    with :meth:`spawn` are independent of how much the parent has been
    used.
    """

    __slots__ = ("seed", "_gen")

    def __init__(self, seed: int) -> None:
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = random.Random(seed)

    def spawn(self, key: str | int) -> "RandomSource":
        return RandomSource(derive_seed(self.seed, key))

    def random(self) -> float:
        return self._gen.random()

    def bit(self) -> int:
        return self._gen.getrandbits(1)

    def basis(self) -> MeasBasis:
        return MeasBasis.X if self._gen.getrandbits(1) else MeasBasis.Z

    def sample(self, population: Sequence, k: int) -> list:
        return self._gen.sample(population, k)

    def shuffle(self, items: list) -> None:
        self._gen.shuffle(items)


def derive_seed(seed: int, key: str | int) -> int:
    """Deterministic 64-bit child seed for ``(seed, key)``."""
    digest = hashlib.blake2b(f"{seed}/{key}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class TwoQubitState:
    amps: Amplitudes

    def __post_init__(self) -> None:
        if len(self.amps) != 4:
            raise ValueError("a two-qubit state has exactly 4 amplitudes")

    @classmethod
    def from_amplitudes(cls, amps: Sequence[complex]) -> "TwoQubitState":
        """Validated constructor: finite and normalized within ``TOL``."""
        values = tuple(complex(a) for a in amps)
        if len(values) != 4:
            raise ValueError("a two-qubit state has exactly 4 amplitudes")
        if not all(cmath.isfinite(a) for a in values):
            raise ValueError("amplitudes must be finite")
        state = cls(values)  # type: ignore[arg-type]
        if abs(state.norm_squared() - 1.0) > TOL:
            raise ValueError(f"state is not normalized (|psi|^2 = {state.norm_squared()})")
        return state

    def norm_squared(self) -> float:
        return sum(abs(a) ** 2 for a in self.amps)

    def probabilities(self) -> tuple[float, float, float, float]:
        a = self.amps
        return (abs(a[0]) ** 2, abs(a[1]) ** 2, abs(a[2]) ** 2, abs(a[3]) ** 2)


def inner(left: TwoQubitState, right: TwoQubitState) -> complex:
    """<left|right>."""
    return sum(a.conjugate() * b for a, b in zip(left.amps, right.amps))


def fidelity(left: TwoQubitState, right: TwoQubitState) -> float:
    return abs(inner(left, right)) ** 2


def basis_state(bit0: int, bit1: int) -> TwoQubitState:
    amps = [0j, 0j, 0j, 0j]
    amps[2 * bit0 + bit1] = 1 + 0j
    return TwoQubitState(tuple(amps))  # type: ignore[arg-type]


def product_state(qubit0: OneQubit, qubit1: OneQubit) -> TwoQubitState:
    a0, a1 = qubit0
    b0, b1 = qubit1
    return TwoQubitState((a0 * b0, a0 * b1, a1 * b0, a1 * b1))


def eigenstate(basis: MeasBasis, outcome: int) -> OneQubit:
    """Single-qubit eigenstate of ``basis``; outcome 0 is |0> or |+>."""
    if basis is MeasBasis.Z:
        return (0j, 1 + 0j) if outcome else (1 + 0j, 0j)
    return (complex(SQRT1_2), complex(-SQRT1_2 if outcome else SQRT1_2))


def factor_product(state: TwoQubitState) -> tuple[OneQubit, OneQubit]:
    """Split a product state into its two single-qubit factors.

    Raises ValueError for entangled input.  Phase is put on qubit 0.
    """
    a00, a01, a10, a11 = state.amps
    if abs(a00 * a11 - a01 * a10) > TOL:
        raise ValueError("state is entangled; it has no product decomposition")
    # Pick the largest amplitude as the anchor so the division is stable.
    k = max(range(4), key=lambda i: abs(state.amps[i]))
    i0, i1 = divmod(k, 2)
    row = (state.amps[2 * i0], state.amps[2 * i0 + 1])
    col = (state.amps[i1], state.amps[2 + i1])
    q1_norm = math.sqrt(abs(row[0]) ** 2 + abs(row[1]) ** 2)
    q1 = (row[0] / q1_norm, row[1] / q1_norm)
    q0 = (col[0] / q1[i1], col[1] / q1[i1])
    return q0, q1


def bell_state(kind: BellKind) -> TwoQubitState:
    s = complex(SQRT1_2)
    if kind is BellKind.PHI_PLUS:
        return TwoQubitState((s, 0j, 0j, s))
    if kind is BellKind.PHI_MINUS:
        return TwoQubitState((s, 0j, 0j, -s))
    if kind is BellKind.PSI_PLUS:
        return TwoQubitState((0j, s, s, 0j))
    return TwoQubitState((0j, s, -s, 0j))


def singlet() -> TwoQubitState:
    return bell_state(BellKind.PSI_MINUS)


def _apply_1q(amps: Amplitudes, target: int, u: Matrix2) -> Amplitudes:
    (u00, u01), (u10, u11) = u
    a00, a01, a10, a11 = amps
    if target == 0:
        return (
            u00 * a00 + u01 * a10,
            u00 * a01 + u01 * a11,
            u10 * a00 + u11 * a10,
            u10 * a01 + u11 * a11,
        )
    if target == 1:
        return (
            u00 * a00 + u01 * a01,
            u10 * a00 + u11 * a01,
            u00 * a10 + u01 * a11,
            u10 * a10 + u11 * a11,
        )
    raise ValueError(f"qubit index must be 0 or 1, got {target}")


def _hadamard(amps: Amplitudes, target: int) -> Amplitudes:
    a00, a01, a10, a11 = amps
    h = SQRT1_2
    if target == 0:
        return ((a00 + a10) * h, (a01 + a11) * h, (a00 - a10) * h, (a01 - a11) * h)
    return ((a00 + a01) * h, (a00 - a01) * h, (a10 + a11) * h, (a10 - a11) * h)


def apply_pauli(state: TwoQubitState, target: int, op: PauliOp) -> TwoQubitState:
    """Apply ``op`` to qubit ``target`` (U x I for 0, I x U for 1)."""
    return TwoQubitState(_apply_1q(state.amps, target, op.matrix))


def _sample(probs: Sequence[float], rng: RandomSource) -> int:
    cleaned = [p if p > _PROB_FLOOR else 0.0 for p in probs]
    r = rng.random() * sum(cleaned)
    last = 0
    for i, p in enumerate(cleaned):
        if p == 0.0:
            continue
        last = i
        if r < p:
            return i
        r -= p
    return last


def _sample2(p0: float, p1: float, rng: RandomSource) -> int:
    if p0 <= _PROB_FLOOR:
        return 1
    if p1 <= _PROB_FLOOR:
        return 0
    return 0 if rng.random() * (p0 + p1) < p0 else 1


def measure_single(
    state: TwoQubitState, target: int, basis: MeasBasis, rng: RandomSource
) -> tuple[int, TwoQubitState]:
    """Projectively measure one qubit; returns ``(outcome, post_state)``."""
    amps = state.amps
    if basis is MeasBasis.X:
        amps = _hadamard(amps, target)
    a00, a01, a10, a11 = amps
    if target == 0:
        p0 = abs(a00) ** 2 + abs(a01) ** 2
        p1 = abs(a10) ** 2 + abs(a11) ** 2
        outcome = _sample2(p0, p1, rng)
        if outcome:
            scale = 1.0 / math.sqrt(p1)
            post = (0j, 0j, a10 * scale, a11 * scale)
        else:
            scale = 1.0 / math.sqrt(p0)
            post = (a00 * scale, a01 * scale, 0j, 0j)
    elif target == 1:
        p0 = abs(a00) ** 2 + abs(a10) ** 2
        p1 = abs(a01) ** 2 + abs(a11) ** 2
        outcome = _sample2(p0, p1, rng)
        if outcome:
            scale = 1.0 / math.sqrt(p1)
            post = (0j, a01 * scale, 0j, a11 * scale)
        else:
            scale = 1.0 / math.sqrt(p0)
            post = (a00 * scale, 0j, a10 * scale, 0j)
    else:
        raise ValueError(f"qubit index must be 0 or 1, got {target}")
    if basis is MeasBasis.X:
        post = _hadamard(post, target)
    return outcome, TwoQubitState(post)


def measure_pair_in_basis(
    state: TwoQubitState, basis: MeasBasis, rng: RandomSource
) -> tuple[int, int]:
    """Measure both qubits in the same basis; the state is consumed."""
    a00, a01, a10, a11 = state.amps
    if basis is MeasBasis.X:
        # H x H, written out.
        a00, a01, a10, a11 = (
            (a00 + a01 + a10 + a11) * 0.5,
            (a00 - a01 + a10 - a11) * 0.5,
            (a00 + a01 - a10 - a11) * 0.5,
            (a00 - a01 - a10 + a11) * 0.5,
        )
    k = _sample((abs(a00) ** 2, abs(a01) ** 2, abs(a10) ** 2, abs(a11) ** 2), rng)
    return k >> 1, k & 1


def bell_overlaps(state: TwoQubitState) -> tuple[float, float, float, float]:
    """|<Bell_k|psi>|^2 for k in BellKind order."""
    a00, a01, a10, a11 = state.amps
    return (
        abs(a00 + a11) ** 2 / 2,
        abs(a00 - a11) ** 2 / 2,
        abs(a01 + a10) ** 2 / 2,
        abs(a01 - a10) ** 2 / 2,
    )


def classify_bell(state: TwoQubitState) -> BellKind:
    """The Bell class of a state that is a Bell state up to global phase."""
    overlaps = bell_overlaps(state)
    k = max(range(4), key=overlaps.__getitem__)
    if abs(overlaps[k] - 1.0) > TOL:
        raise ValueError("state is not a Bell basis state")
    return BellKind(k)


def bell_measure(state: TwoQubitState, rng: RandomSource) -> BellKind:
    """Projective Bell-basis measurement; the state is consumed."""
    return BellKind(_sample(bell_overlaps(state), rng))
