"""Operation counters attributed to whichever party is currently acting.

Algebra calls report into the active :class:`CostMeter` (if any) under the
active party name. Both live in context variables, so nothing is counted
unless a caller opts in with :func:`metered` and :func:`acting`.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections import Counter
from typing import Iterator

OPS = ("pairing", "scalar_mul", "group_add", "gt_mul", "gt_exp", "gt_inv")

OUTSOURCER = "T"
SETUP = "setup"
ORACLE = "oracle"

_meter: contextvars.ContextVar[CostMeter | None] = contextvars.ContextVar("meter", default=None)
_party: contextvars.ContextVar[str] = contextvars.ContextVar("party", default=ORACLE)


class CostMeter:
    """Per-party operation counts plus per-channel message and byte totals."""

    def __init__(self) -> None:
        self.ops: dict[str, Counter] = {}
        self.channels: dict[str, Counter] = {}

    def charge(self, party: str, op: str, n: int = 1) -> None:
        self.ops.setdefault(party, Counter())[op] += n

    def record_message(self, channel: str, nbytes: int) -> None:
        c = self.channels.setdefault(channel, Counter())
        c["messages"] += 1
        c["bytes"] += nbytes

    def count(self, party: str, op: str) -> int:
        return self.ops.get(party, Counter())[op]

    def to_dict(self) -> dict:
        return {
            "parties": {
                party: {op: counts[op] for op in OPS}
                for party, counts in sorted(self.ops.items())
            },
            "channels": {
                ch: {"messages": c["messages"], "bytes": c["bytes"]}
                for ch, c in sorted(self.channels.items())
            },
        }


def tally(op: str, n: int = 1) -> None:
    meter = _meter.get()
    if meter is not None:
        meter.charge(_party.get(), op, n)


@contextlib.contextmanager
def metered(meter: CostMeter) -> Iterator[CostMeter]:
    token = _meter.set(meter)
    try:
        yield meter
    finally:
        _meter.reset(token)


@contextlib.contextmanager
def acting(party: str) -> Iterator[None]:
    token = _party.set(party)
    try:
        yield
    finally:
        _party.reset(token)


@contextlib.contextmanager
def unmetered() -> Iterator[None]:
    """Suspend counting, e.g. for oracle-side checks inside a metered run."""
    token = _meter.set(None)
    try:
        yield
    finally:
        _meter.reset(token)
