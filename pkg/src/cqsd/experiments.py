"""Monte Carlo attack-detection experiments.

Each trial is an independent session (own seed derived from the master
seed and the trial index) that sets up the secure channel, then makes a
single attacked transmission.  Because trial seeds never depend on
execution order, serial and parallel runs give identical reports.
"""

from __future__ import annotations

import gc
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any

from .channel import ChannelSpec
from .codec import BitPair
from .protocol import Aborted, Party, ProtocolParams, run_dialogue
from .quantum import derive_seed


@dataclass
class StatsReport:
    trials: int
    aborts: int
    abort_rate: float
    closed_form_prediction: float
    abort_histogram: dict[str, int]
    delivered: int
    mean_bit_error_rate: float | None
    check_pairs: int
    check_errors: int
    check_error_rate: float | None
    m: int
    n: int
    seed: int
    channel: dict[str, Any] = field(default_factory=dict)

    @property
    def standard_error(self) -> float:
        """Binomial standard error of ``abort_rate`` under the prediction."""
        p = self.closed_form_prediction
        return math.sqrt(p * (1 - p) / self.trials)

    def within_sigma(self, k: float = 3.0) -> bool:
        return abs(self.abort_rate - self.closed_form_prediction) <= k * self.standard_error

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def format(self) -> str:
        lines = [
            f"trials            {self.trials}",
            f"aborts            {self.aborts}",
            f"abort_rate        {self.abort_rate:.6f}",
            f"closed_form       {self.closed_form_prediction:.6f}",
            f"3-sigma band      +/-{3 * self.standard_error:.6f}",
        ]
        for key in sorted(self.abort_histogram):
            lines.append(f"  {key:<30} {self.abort_histogram[key]}")
        if self.check_error_rate is not None:
            lines.append(f"check_error_rate  {self.check_error_rate:.6f} ({self.check_pairs} pairs)")
        if self.mean_bit_error_rate is not None:
            lines.append(f"bit_error_rate    {self.mean_bit_error_rate:.6f} ({self.delivered} delivered)")
        return "\n".join(lines)


def trial_payload(trial_seed: int, m: int) -> list[BitPair]:
    """Deterministic pseudo-random ``m``-symbol payload for one trial."""
    bits: list[int] = []
    block = 0
    while len(bits) < 2 * m:
        word = derive_seed(trial_seed, f"payload/{block}")
        bits.extend((word >> i) & 1 for i in range(64))
        block += 1
    return [BitPair(bits[2 * i], bits[2 * i + 1]) for i in range(m)]


@dataclass
class _Tally:
    aborts: int = 0
    delivered: int = 0
    bit_errors: int = 0
    bits: int = 0
    check_pairs: int = 0
    check_errors: int = 0
    histogram: Counter = field(default_factory=Counter)

    def merge(self, other: "_Tally") -> None:
        self.aborts += other.aborts
        self.delivered += other.delivered
        self.bit_errors += other.bit_errors
        self.bits += other.bits
        self.check_pairs += other.check_pairs
        self.check_errors += other.check_errors
        self.histogram.update(other.histogram)


def _run_trials(
    m: int,
    n: int,
    error_threshold: float,
    channel: ChannelSpec,
    seed: int,
    start: int,
    stop: int,
) -> _Tally:
    tally = _Tally()
    transmissions_only = channel.scope == "transmissions"
    # Sessions hold no reference cycles; the cyclic collector only adds jitter here.
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        for index in range(start, stop):
            trial_seed = derive_seed(seed, index)
            params = ProtocolParams(m, n, error_threshold, trial_seed)
            payload = trial_payload(trial_seed, m)
            result = run_dialogue(
                params,
                [(Party.ALICE, payload)],
                channel.build(),
                close=False,
                attack_transmissions_only=transmissions_only,
                record=False,
            )
            session = result.session
            for stage, checks in session.check_history:
                if stage == "transmission":
                    tally.check_pairs += len(checks.outcomes)
                    tally.check_errors += sum(1 for a, b in checks.outcomes if a == b)
            abort = session.abort
            if isinstance(abort, Aborted):
                tally.aborts += 1
                tally.histogram[f"{abort.stage}: {abort.reason}"] += 1
                continue
            tally.delivered += 1
            decoded = result.deliveries[0].payload
            tally.bits += 2 * m
            tally.bit_errors += sum(
                (s.hi != d.hi) + (s.lo != d.lo) for s, d in zip(payload, decoded)
            )
    finally:
        if was_enabled:
            gc.enable()
    return tally


def attack_stats(
    m: int,
    n: int,
    channel: ChannelSpec,
    trials: int,
    seed: int = 0,
    *,
    error_threshold: float = 0.0,
    workers: int = 1,
    first_trial: int = 0,
) -> StatsReport:
    """Run ``trials`` independent single-transmission sessions under ``channel``.

    Trials are numbered from ``first_trial``, so consecutive chunks of a
    large run can be computed separately and still match the single run.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if first_trial < 0:
        raise ValueError("first_trial must be >= 0")
    ProtocolParams(m, n, error_threshold, seed)  # validate up front
    tally = _Tally()
    stop = first_trial + trials
    if workers <= 1:
        tally = _run_trials(m, n, error_threshold, channel, seed, first_trial, stop)
    else:
        bounds = [first_trial + trials * k // workers for k in range(workers + 1)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_trials, m, n, error_threshold, channel, seed, lo, hi)
                for lo, hi in zip(bounds, bounds[1:])
            ]
            for future in futures:
                tally.merge(future.result())

    return StatsReport(
        trials=trials,
        aborts=tally.aborts,
        abort_rate=tally.aborts / trials,
        closed_form_prediction=channel.predicted_abort_rate(n),
        abort_histogram=dict(sorted(tally.histogram.items())),
        delivered=tally.delivered,
        mean_bit_error_rate=tally.bit_errors / tally.bits if tally.bits else None,
        check_pairs=tally.check_pairs,
        check_errors=tally.check_errors,
        check_error_rate=tally.check_errors / tally.check_pairs if tally.check_pairs else None,
        m=m,
        n=n,
        seed=seed,
        channel=channel.to_dict(),
    )
