"""Run configuration files.

A config is a small YAML (or JSON) mapping::

    m: 1
    n: 1
    seed: 7
    error_threshold: 0.0
    output: transcript.jsonl
    channel:
      kind: intercept_resend     # ideal | intercept_resend | particle_injection
      p: 1.0
      strategy: uniform          # uniform | fixed_z | fixed_x
      scope: all                 # all | transmissions
    script:
      - {sender: Alice, payload: "10"}
      - {sender: Bob, payload: "01"}

Every payload must hold exactly ``2m`` bits.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .channel import CHANNEL_KINDS, CHANNEL_SCOPES, BasisStrategy, ChannelSpec
from .codec import BitPair, pack_bits, parse_bits
from .protocol import Party, ProtocolParams


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class ScriptStep:
    sender: Party
    payload: list[BitPair]


@dataclass
class RunConfig:
    m: int
    n: int
    seed: int = 0
    error_threshold: float = 0.0
    channel: ChannelSpec = field(default_factory=ChannelSpec)
    # Whether the config named a scope; commands pick their own default otherwise.
    channel_scope_set: bool = False
    script: list[ScriptStep] = field(default_factory=list)
    output: Path | None = None

    @property
    def params(self) -> ProtocolParams:
        return ProtocolParams(self.m, self.n, self.error_threshold, self.seed)

    def with_scope_default(self, scope: str) -> ChannelSpec:
        if self.channel_scope_set:
            return self.channel
        return dataclasses.replace(self.channel, scope=scope)


_TOP_KEYS = {"m", "n", "seed", "error_threshold", "channel", "script", "output"}
_CHANNEL_KEYS = {"kind", "p", "strategy", "extra", "scope"}


def _int(data: Mapping[str, Any], key: str, default: Any = None, *, low: int | None = None) -> int:
    value = data.get(key, default)
    if value is None:
        raise ConfigError(key, "is required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    if low is not None and value < low:
        raise ConfigError(key, f"must be >= {low}, got {value}")
    return value


def _float(value: Any, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    return float(value)


def _parse_channel(raw: Any) -> tuple[ChannelSpec, bool]:
    if raw is None:
        return ChannelSpec(), False
    if isinstance(raw, str):
        raw = {"kind": raw}
    if not isinstance(raw, Mapping):
        raise ConfigError("channel", "expected a mapping")
    unknown = set(raw) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"channel.{sorted(unknown)[0]}", "unknown key")
    kind = raw.get("kind", "ideal")
    if kind not in CHANNEL_KINDS:
        raise ConfigError("channel.kind", f"expected one of {', '.join(CHANNEL_KINDS)}, got {kind!r}")
    p = _float(raw.get("p", 1.0), "channel.p")
    if not 0.0 <= p <= 1.0:
        raise ConfigError("channel.p", f"must lie in [0, 1], got {p}")
    strategy = raw.get("strategy", "uniform")
    try:
        strategy = BasisStrategy(strategy)
    except ValueError:
        choices = ", ".join(s.value for s in BasisStrategy)
        raise ConfigError("channel.strategy", f"expected one of {choices}, got {strategy!r}") from None
    extra = raw.get("extra", 1)
    if isinstance(extra, bool) or not isinstance(extra, int) or extra < 0:
        raise ConfigError("channel.extra", f"expected a nonnegative integer, got {extra!r}")
    scope = raw.get("scope", "all")
    if scope not in CHANNEL_SCOPES:
        raise ConfigError("channel.scope", f"expected one of {', '.join(CHANNEL_SCOPES)}, got {scope!r}")
    return ChannelSpec(kind, p, strategy, extra, scope), "scope" in raw


def _parse_script(raw: Any, m: int) -> list[ScriptStep]:
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise ConfigError("script", "expected a list of {sender, payload} entries")
    steps = []
    for i, item in enumerate(raw):
        where = f"script[{i}]"
        if not isinstance(item, Mapping):
            raise ConfigError(where, "expected a mapping with sender and payload")
        try:
            sender = Party(item.get("sender"))
        except ValueError:
            raise ConfigError(f"{where}.sender", f"expected Alice or Bob, got {item.get('sender')!r}") from None
        payload = item.get("payload")
        if isinstance(payload, int) and not isinstance(payload, bool):
            raise ConfigError(f"{where}.payload", "quote bit strings so leading zeros survive")
        if not isinstance(payload, str):
            raise ConfigError(f"{where}.payload", f"expected a bit string, got {payload!r}")
        try:
            bits = parse_bits(payload)
        except ValueError as exc:
            raise ConfigError(f"{where}.payload", str(exc)) from None
        if len(bits) != 2 * m:
            raise ConfigError(f"{where}.payload", f"expected exactly 2m = {2 * m} bits, got {len(bits)}")
        pairs, _ = pack_bits(bits)
        steps.append(ScriptStep(sender, pairs))
    return steps


def parse_config(data: Any) -> RunConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("<root>", "expected a mapping at the top level")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    m = _int(data, "m", low=1)
    n = _int(data, "n", low=1)
    seed = _int(data, "seed", 0, low=0)
    if seed >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    threshold = _float(data.get("error_threshold", 0.0), "error_threshold")
    if not 0.0 <= threshold < 1.0:
        raise ConfigError("error_threshold", f"must lie in [0, 1), got {threshold}")
    channel, scope_set = _parse_channel(data.get("channel"))
    script = _parse_script(data.get("script"), m)
    output = data.get("output")
    if output is not None:
        if not isinstance(output, str):
            raise ConfigError("output", f"expected a path string, got {output!r}")
        output = Path(output)
    return RunConfig(m, n, seed, threshold, channel, scope_set, script, output)


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("<file>", f"not valid YAML: {exc}") from None
    return parse_config(data)
