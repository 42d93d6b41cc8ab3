"""Deterministic message-level session runner, channel tap, and cost comparison.

A session is one delegation of e(A, B). Messages are exchanged in a fixed
order (U1 before U2), every algebra call is charged to the party making it,
and channel byte counts are the length of each payload's canonical JSON plus
an optional per-message encryption overhead.

"Encryption" is only a flag: an encrypted message is opaque to anything that
reads the transcript as an observer.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import metering
from .adversaries import ServerBehavior
from .algebra import G1Elem, G2Elem, GTElem, pair
from .codec import canonical_json
from .metering import CostMeter
from .protocols import (
    ChenOutsourcer,
    CMOutsourcer,
    CMPublic,
    Outsourcer,
    Query,
    Response,
    RevisedOutsourcer,
    Verdict,
)
from .randtable import RandTable


class MalformedTranscript(ValueError):
    pass


@dataclass(frozen=True)
class ChannelMessage:
    session: int
    protocol: str
    channel: str  # "T->U1", "U1->T", ...
    payload: Query | Response
    encrypted: bool = False

    @property
    def direction(self) -> str:
        return "request" if self.channel.startswith("T->") else "response"

    @property
    def server(self) -> str:
        a, b = self.channel.split("->")
        return b if a == "T" else a

    def payload_json(self) -> list:
        return self.payload.to_json()

    def to_json(self) -> dict:
        return {
            "session": self.session,
            "protocol": self.protocol,
            "channel": self.channel,
            "direction": self.direction,
            "encrypted": self.encrypted,
            "payload": self.payload_json(),
        }


@dataclass
class Transcript:
    messages: list[ChannelMessage] = field(default_factory=list)

    def append(self, msg: ChannelMessage) -> None:
        if msg.direction == "response":
            asked = any(
                m.session == msg.session and m.server == msg.server and m.direction == "request"
                for m in self.messages
            )
            if not asked:
                raise MalformedTranscript(f"response on {msg.channel} precedes its query")
        self.messages.append(msg)

    def extend(self, other: Transcript) -> None:
        for m in other.messages:
            self.append(m)

    def to_jsonl(self) -> str:
        return "".join(canonical_json(m.to_json()) + "\n" for m in self.messages)

    def __iter__(self):
        return iter(self.messages)

    def __len__(self) -> int:
        return len(self.messages)


@dataclass
class SessionResult:
    protocol: str
    session: int
    A: G1Elem
    B: G2Elem
    verdict: Verdict
    output: GTElem | None
    truth: GTElem
    transcript: Transcript
    costs: dict
    tuples_consumed: int = 0
    behaviors: dict = field(default_factory=dict)
    # outsourcer's session secrets; for test oracles, never serialized
    oracle_secrets: object = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        if (self.output is None) != (self.verdict is Verdict.REJECTED):
            raise ValueError("output must be present exactly when the verdict is not rejected")

    @property
    def correct(self) -> bool:
        return self.output is not None and self.output == self.truth

    @property
    def residual(self) -> GTElem | None:
        """output / truth; the identity for a correct session."""
        if self.output is None:
            return None
        with metering.unmetered():
            return self.output / self.truth

    def summary(self) -> dict:
        residual = self.residual
        return {
            "session": self.session,
            "protocol": self.protocol,
            "A": self.A.encode(),
            "B": self.B.encode(),
            "verdict": self.verdict.value,
            "output": None if self.output is None else self.output.encode(),
            "truth": self.truth.encode(),
            "output_equals_truth": self.correct,
            "residual": None if residual is None else residual.encode(),
            "tuples_consumed": self.tuples_consumed,
            "behaviors": self.behaviors,
            "costs": self.costs,
        }


def _payload_bytes(msg: ChannelMessage, overhead: int) -> int:
    return len(canonical_json(msg.payload_json()).encode()) + (overhead if msg.encrypted else 0)


def make_outsourcer(
    protocol: str,
    *,
    table: RandTable | None = None,
    cm_public: CMPublic | None = None,
    rng: random.Random | None = None,
) -> Outsourcer:
    if protocol in ("chen", "revised"):
        if table is None:
            raise ValueError(f"{protocol} needs a Rand table")
        return ChenOutsourcer(table) if protocol == "chen" else RevisedOutsourcer(table)
    if protocol == "cm":
        if cm_public is None:
            raise ValueError("cm needs public points")
        return CMOutsourcer(cm_public, rng or random.Random(0))
    raise ValueError(f"unknown protocol {protocol!r}")


def run_session(
    protocol: str,
    A: G1Elem,
    B: G2Elem,
    behaviors: Mapping[str, ServerBehavior],
    *,
    table: RandTable | None = None,
    cm_public: CMPublic | None = None,
    seed: int | str = 0,
    encrypted: bool = False,
    session: int = 0,
    encryption_overhead: int = 0,
) -> SessionResult:
    """Run one delegation end to end.

    ``behaviors`` maps server names ("U1", "U2" for two-server protocols, "U"
    for cm) to fresh behavior instances. ``seed`` drives the outsourcer's own
    randomness (cm session keys); table-based protocols draw none.
    """
    out = make_outsourcer(protocol, table=table, cm_public=cm_public, rng=random.Random(seed))
    if set(behaviors) != set(out.servers):
        raise ValueError(f"{protocol} needs behaviors for {out.servers}, got {sorted(behaviors)}")

    meter = CostMeter()
    transcript = Transcript()
    cursor_before = table.cursor if table is not None else 0

    def send(channel: str, payload) -> None:
        msg = ChannelMessage(session, protocol, channel, payload, encrypted)
        transcript.append(msg)
        meter.record_message(channel, _payload_bytes(msg, encryption_overhead))

    with metering.metered(meter):
        with metering.acting(metering.OUTSOURCER):
            queries = out.prepare(A, B)
        for server in out.servers:
            send(f"T->{server}", queries[server])
            with metering.acting(server):
                resp = behaviors[server].respond(queries[server])
            send(f"{server}->T", resp)
            out.deliver(server, resp)
        with metering.acting(metering.OUTSOURCER):
            verdict, output = out.finish()

    with metering.unmetered():
        truth = pair(A, B)

    return SessionResult(
        protocol=protocol,
        session=session,
        A=A,
        B=B,
        verdict=verdict,
        output=output,
        truth=truth,
        transcript=transcript,
        costs=meter.to_dict(),
        tuples_consumed=(table.cursor - cursor_before) if table is not None else 0,
        behaviors={name: b.describe() for name, b in sorted(behaviors.items())},
        oracle_secrets=out.secrets,
    )


def eavesdrop_recover(transcript: Transcript | Iterable[ChannelMessage]) -> tuple[G1Elem, G2Elem] | None:
    """Recover (A, B) from the two outbound queries of a two-server session.

    U1's first pair is (A + v1V1, B + v2V2); U2's query carries v2V2 in its
    first pair and v1V1 in its second. Subtracting gives A and B. Returns
    None when either tapped query is encrypted.
    """
    to_u1 = to_u2 = None
    for m in transcript:
        if m.channel == "T->U1" and to_u1 is None:
            to_u1 = m
        elif m.channel == "T->U2" and to_u2 is None:
            to_u2 = m
    if to_u1 is None or to_u2 is None:
        raise MalformedTranscript("need the T->U1 and T->U2 queries of a two-server session")
    if to_u1.encrypted or to_u2.encrypted:
        return None
    q1, q2 = to_u1.payload.pairs, to_u2.payload.pairs
    if len(q1) < 2 or len(q2) < 2:
        raise MalformedTranscript("two-server queries carry at least two pairs")
    blinded_a, blinded_b = q1[0]
    v1V1 = q2[1][0]
    v2V2 = q2[0][1]
    return blinded_a - v1V1, blinded_b - v2V2


# -- cost comparison -------------------------------------------------------------

_SERVER_PARTIES = ("U", "U1", "U2")


def compare_costs(results: Iterable[SessionResult]) -> dict:
    """Aggregate costs per protocol, with per-session averages and simple ratios.

    Reports raw counts only; whether the communication outweighs the saved
    computation is left to the reader.
    """
    results = list(results)
    if not results:
        raise ValueError("compare_costs needs at least one session")
    table: dict[str, dict] = {}
    for r in results:
        agg = table.setdefault(
            r.protocol,
            {"sessions": 0, "parties": {}, "messages": 0, "bytes": 0, "response_values": 0, "tuples_consumed": 0},
        )
        agg["sessions"] += 1
        agg["tuples_consumed"] += r.tuples_consumed
        for party, ops in r.costs["parties"].items():
            c = agg["parties"].setdefault(party, Counter())
            c.update(ops)
        for ch in r.costs["channels"].values():
            agg["messages"] += ch["messages"]
            agg["bytes"] += ch["bytes"]
        agg["response_values"] += sum(
            len(m.payload) for m in r.transcript if m.direction == "response"
        )

    out = {}
    for proto, agg in sorted(table.items()):
        n = agg["sessions"]
        parties = {
            p: {op: c[op] for op in metering.OPS} for p, c in sorted(agg["parties"].items())
        }
        t_ops = parties.get(metering.OUTSOURCER, dict.fromkeys(metering.OPS, 0))
        server_pairings = sum(parties.get(p, {}).get("pairing", 0) for p in _SERVER_PARTIES)
        out[proto] = {
            "sessions": n,
            "parties": parties,
            "messages": agg["messages"],
            "bytes": agg["bytes"],
            "response_values": agg["response_values"],
            "tuples_consumed": agg["tuples_consumed"],
            "per_session": {
                "bytes": agg["bytes"] / n,
                "response_values": agg["response_values"] / n,
                "tuples_consumed": agg["tuples_consumed"] / n,
                "outsourcer_pairings": t_ops["pairing"] / n,
                "outsourcer_scalar_muls": t_ops["scalar_mul"] / n,
                "outsourcer_gt_exps": t_ops["gt_exp"] / n,
                "server_pairings": server_pairings / n,
            },
            # pairings moved off the outsourcer per transmitted byte
            "pairings_saved_per_kilobyte": (1000 * server_pairings / agg["bytes"]) if agg["bytes"] else None,
        }
    return out


def format_cost_table(comparison: dict) -> str:
    cols = [
        ("protocol", lambda p, c: p),
        ("sessions", lambda p, c: c["sessions"]),
        ("T pair", lambda p, c: c["per_session"]["outsourcer_pairings"]),
        ("T smul", lambda p, c: c["per_session"]["outsourcer_scalar_muls"]),
        ("T gtexp", lambda p, c: c["per_session"]["outsourcer_gt_exps"]),
        ("U pair", lambda p, c: c["per_session"]["server_pairings"]),
        ("tuples", lambda p, c: c["per_session"]["tuples_consumed"]),
        ("GT vals", lambda p, c: c["per_session"]["response_values"]),
        ("bytes", lambda p, c: c["per_session"]["bytes"]),
    ]

    def fmt(v) -> str:
        if isinstance(v, float):
            return f"{v:.2f}".rstrip("0").rstrip(".")
        return str(v)

    rows = [[name for name, _ in cols]]
    rows += [[fmt(f(p, c)) for _, f in cols] for p, c in comparison.items()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(cols))]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths))) for r in rows]
    return "\n".join(lines) + "\n"
