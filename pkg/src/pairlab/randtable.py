"""Trusted setup of the Rand table and its one-shot consumption by the outsourcer."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import metering
from .algebra import G1Elem, G2Elem, GTElem, PairingParams, Scalar, pair
from .codec import DecodeError, canonical_json, decode_g1, decode_g2, decode_gt


class TableExhausted(RuntimeError):
    """Fewer unconsumed rows remain than requested; the outsourcer needs a new table."""


@dataclass(frozen=True)
class SixTuple:
    """One Rand row ``(W1, W2, w1*W1, w2*W1, w2*W2, e(w1*W1, w2*W2))``.

    ``oracle_w1`` / ``oracle_w2`` keep the raw scalars so tests can check
    attack residuals exactly. Protocol code never reads them.
    """

    W1: G1Elem
    W2: G2Elem
    w1W1: G1Elem
    w2W1: G1Elem
    w2W2: G2Elem
    pre_pairing: GTElem
    oracle_w1: Scalar = field(default=0, repr=False, compare=False)
    oracle_w2: Scalar = field(default=0, repr=False, compare=False)

    @classmethod
    def build(cls, W1: G1Elem, W2: G2Elem, w1: Scalar, w2: Scalar) -> SixTuple:
        w1W1 = w1 * W1
        w2W2 = w2 * W2
        return cls(W1, W2, w1W1, w2 * W1, w2W2, pair(w1W1, w2W2), w1, w2)

    def is_consistent(self) -> bool:
        """Recompute the five derived entries from the oracle scalars."""
        w1, w2 = self.oracle_w1, self.oracle_w2
        q = self.W1.params.q
        with metering.unmetered():
            return (
                w1 % q != 0
                and w2 % q != 0
                and self.w1W1 == w1 * self.W1
                and self.w2W1 == w2 * self.W1
                and self.w2W2 == w2 * self.W2
                and self.pre_pairing == pair(self.w1W1, self.w2W2)
            )

    def to_json(self) -> dict:
        return {
            "W1": self.W1.encode(),
            "W2": self.W2.encode(),
            "w1W1": self.w1W1.encode(),
            "w2W1": self.w2W1.encode(),
            "w2W2": self.w2W2.encode(),
            "pre_pairing": self.pre_pairing.encode(),
            "oracle": {"w1": str(self.oracle_w1), "w2": str(self.oracle_w2)},
        }

    @classmethod
    def from_json(cls, data: dict, params: PairingParams) -> SixTuple:
        try:
            row = cls(
                decode_g1(data["W1"], params),
                decode_g2(data["W2"], params),
                decode_g1(data["w1W1"], params),
                decode_g1(data["w2W1"], params),
                decode_g2(data["w2W2"], params),
                decode_gt(data["pre_pairing"], params),
                int(data["oracle"]["w1"]),
                int(data["oracle"]["w2"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DecodeError(f"malformed table row: {exc}") from exc
        if not row.is_consistent():
            raise DecodeError("table row fails recomputation of its derived entries")
        return row


@dataclass
class RandTable:
    params: PairingParams
    rows: list[SixTuple]
    cursor: int = 0

    @property
    def remaining(self) -> int:
        return len(self.rows) - self.cursor

    def take(self, k: int) -> list[SixTuple]:
        if k > self.remaining:
            raise TableExhausted(f"requested {k} rows, {self.remaining} left")
        out = self.rows[self.cursor : self.cursor + k]
        self.cursor += k
        return out

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "rows": [r.to_json() for r in self.rows]}

    @classmethod
    def from_json(cls, data: dict) -> RandTable:
        params = PairingParams.from_json(data["params"])
        return cls(params, [SixTuple.from_json(r, params) for r in data["rows"]])

    def save(self, path: str | Path) -> None:
        Path(path).write_text(canonical_json(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> RandTable:
        return cls.from_json(json.loads(Path(path).read_text()))


def generate_table(n: int, params: PairingParams, seed: int | str) -> RandTable:
    """Trusted-setup generation of ``n`` independent rows, charged to the setup party.

    W1 and W2 are drawn as non-identity elements: an identity base would put
    A (or B) in the clear inside the second server's query.
    """
    if n < 1:
        raise ValueError(f"table size must be >= 1, got {n}")
    rng = random.Random(seed)
    rows = []
    with metering.acting(metering.SETUP):
        for _ in range(n):
            W1 = params.random_g1(rng, nonzero=True)
            W2 = params.random_g2(rng, nonzero=True)
            w1 = params.random_scalar(rng)
            w2 = params.random_scalar(rng)
            rows.append(SixTuple.build(W1, W2, w1, w2))
    return RandTable(params, rows)


def take_tuples(table: RandTable, k: int) -> list[SixTuple]:
    return table.take(k)
