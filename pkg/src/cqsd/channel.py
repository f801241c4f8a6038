"""Quantum channel and adversary models.

Every qubit a party transmits is handed to the session's channel model
one at a time (``on_qubit``), then the whole batch passes through
``on_batch_complete``, and the receiver gets whatever comes out.  Models
see public announcements through ``observe`` but cannot change them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Protocol

from .quantum import (
    MeasBasis,
    OneQubit,
    RandomSource,
    TwoQubitState,
    measure_single,
)


class EPRPair:
    """Shared handle to one pair's joint state.

    Both parties' ledgers and any in-flight carrier point at the same
    object, so a disturbance in transit is visible to whoever measures
    the pair later.
    """

    __slots__ = ("id", "state")

    def __init__(self, pair_id: str, state: TwoQubitState) -> None:
        self.id = pair_id
        self.state = state

    def __repr__(self) -> str:
        return f"EPRPair({self.id!r})"


@dataclass(slots=True)
class Carrier:
    """One physical qubit in flight.

    ``pair`` is None for counterfeit particles that belong to no pair;
    those carry their own single-qubit ``state``.
    """

    pair: EPRPair | None
    qubit: int
    state: OneQubit | None = None

    @property
    def counterfeit(self) -> bool:
        return self.pair is None


class AdversaryLog(Protocol):
    def __call__(self, kind: str, **payload: Any) -> None: ...


def _no_log(kind: str, **payload: Any) -> None:
    pass


class ChannelModel:
    """Base channel: forwards everything untouched."""

    name = "ideal"

    def on_qubit(
        self, carrier: Carrier, rng: RandomSource, log: AdversaryLog = _no_log
    ) -> Carrier:
        return carrier

    def on_batch_complete(
        self, carriers: list[Carrier], rng: RandomSource, log: AdversaryLog = _no_log
    ) -> list[Carrier]:
        return carriers

    def observe(self, announcement: Any) -> None:
        """Public classical traffic; read-only."""

    def describe(self) -> dict[str, Any]:
        return {"kind": self.name}


class IdealChannel(ChannelModel):
    pass


class BasisStrategy(str, enum.Enum):
    UNIFORM_RANDOM = "uniform"
    FIXED_Z = "fixed_z"
    FIXED_X = "fixed_x"


@dataclass(frozen=True)
class InterceptResendConfig:
    intercept_prob: float = 1.0
    basis_strategy: BasisStrategy = BasisStrategy.UNIFORM_RANDOM
    # Restrict the attack to carriers of these pair ids (None = every carrier).
    targets: frozenset[str] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.intercept_prob <= 1.0:
            raise ValueError(f"intercept_prob must lie in [0, 1], got {self.intercept_prob}")
        object.__setattr__(self, "basis_strategy", BasisStrategy(self.basis_strategy))
        if self.targets is not None:
            object.__setattr__(self, "targets", frozenset(self.targets))


class InterceptResend(ChannelModel):
    """Measure-and-forward attack.

    With probability ``intercept_prob`` Eve measures the in-flight half in
    a basis chosen by the strategy, then forwards a fresh qubit prepared in
    the eigenstate she saw.  The pair is left as a product of the
    untouched half's collapsed state and that fresh qubit.
    """

    name = "intercept_resend"

    def __init__(self, config: InterceptResendConfig) -> None:
        self.config = config
        self._p = config.intercept_prob
        self._targets = config.targets
        self._fixed = {
            BasisStrategy.FIXED_Z: MeasBasis.Z,
            BasisStrategy.FIXED_X: MeasBasis.X,
        }.get(config.basis_strategy)

    def on_qubit(
        self, carrier: Carrier, rng: RandomSource, log: AdversaryLog = _no_log
    ) -> Carrier:
        pair = carrier.pair
        if pair is None:
            return carrier
        targets = self._targets
        if targets is not None and pair.id not in targets:
            return carrier
        # Always draw the coin so the stream position never depends on p.
        if rng.random() >= self._p:
            return carrier
        basis = self._fixed or rng.basis()
        outcome, collapsed = measure_single(pair.state, carrier.qubit, basis, rng)
        # The collapsed pair is already (untouched half) x (eigenstate Eve saw),
        # which is exactly the untouched half alongside her freshly prepared qubit.
        pair.state = collapsed
        log("intercept", pair=pair.id, qubit=carrier.qubit, basis=basis.value, outcome=outcome)
        return carrier

    def describe(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "kind": self.name,
            "p": self.config.intercept_prob,
            "strategy": self.config.basis_strategy.value,
        }
        if self.config.targets is not None:
            out["targets"] = sorted(self.config.targets)
        return out


@dataclass(frozen=True)
class ParticleInjectionConfig:
    extra_per_batch: int = 1

    def __post_init__(self) -> None:
        if self.extra_per_batch < 0:
            raise ValueError(f"extra_per_batch must be >= 0, got {self.extra_per_batch}")


class ParticleInjection(ChannelModel):
    """Appends counterfeit |0> carriers to every batch."""

    name = "particle_injection"

    def __init__(self, config: ParticleInjectionConfig) -> None:
        self.config = config

    def on_batch_complete(
        self, carriers: list[Carrier], rng: RandomSource, log: AdversaryLog = _no_log
    ) -> list[Carrier]:
        extra = self.config.extra_per_batch
        if not extra:
            return carriers
        log("inject", count=extra)
        counterfeit = [Carrier(None, 0, (1 + 0j, 0j)) for _ in range(extra)]
        return carriers + counterfeit

    def describe(self) -> dict[str, Any]:
        return {"kind": self.name, "extra": self.config.extra_per_batch}


def ideal_channel() -> ChannelModel:
    return IdealChannel()


def intercept_resend(config: InterceptResendConfig | None = None, **kwargs: Any) -> InterceptResend:
    return InterceptResend(config if config is not None else InterceptResendConfig(**kwargs))


def particle_injection(
    config: ParticleInjectionConfig | None = None, **kwargs: Any
) -> ParticleInjection:
    return ParticleInjection(config if config is not None else ParticleInjectionConfig(**kwargs))


def detection_probability_closed_form(n_checks: int, intercept_prob: float) -> float:
    """Chance that at least one of ``n_checks`` check pairs flags.

    Each intercepted check half is caught with probability 1/4: the check
    basis differs from Eve's half the time, and a mismatched basis leaves
    the outcomes correlated half the time.
    """
    if n_checks < 1:
        raise ValueError("n_checks must be >= 1")
    if not 0.0 <= intercept_prob <= 1.0:
        raise ValueError("intercept_prob must lie in [0, 1]")
    return 1.0 - (1.0 - intercept_prob / 4.0) ** n_checks



CHANNEL_KINDS = ("ideal", "intercept_resend", "particle_injection")
CHANNEL_SCOPES = ("all", "transmissions")


@dataclass(frozen=True)
class ChannelSpec:
    """Serializable description of a channel model.

    ``scope`` says which batches the adversary touches: ``"all"`` includes
    the initial distribution, ``"transmissions"`` only message batches.
    """

    kind: str = "ideal"
    p: float = 1.0
    strategy: BasisStrategy = BasisStrategy.UNIFORM_RANDOM
    extra: int = 1
    scope: str = "all"

    def __post_init__(self) -> None:
        if self.kind not in CHANNEL_KINDS:
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.scope not in CHANNEL_SCOPES:
            raise ValueError(f"unknown channel scope {self.scope!r}")
        object.__setattr__(self, "strategy", BasisStrategy(self.strategy))

    def build(self) -> ChannelModel:
        if self.kind == "intercept_resend":
            return intercept_resend(intercept_prob=self.p, basis_strategy=self.strategy)
        if self.kind == "particle_injection":
            return particle_injection(extra_per_batch=self.extra)
        return ideal_channel()

    def predicted_abort_rate(self, n_checks: int) -> float:
        """Closed-form abort probability for one attacked transmission."""
        if self.kind == "intercept_resend":
            return detection_probability_closed_form(n_checks, self.p)
        if self.kind == "particle_injection":
            return 1.0 if self.extra > 0 else 0.0
        return 0.0

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "scope": self.scope}
        if self.kind == "intercept_resend":
            out.update(p=self.p, strategy=self.strategy.value)
        elif self.kind == "particle_injection":
            out["extra"] = self.extra
        return out
