"""Outsourcer-side logic for three pairing-delegation protocols.

``chen``     two servers, three Rand rows per call, equality check on two
             table-only pairings (which is why it cannot catch a forged delta).
``revised``  the same blinding with the check pairs dropped; one Rand row per
             call, correct only if both servers are semi-honest.
``cm``       single server, fresh session keys, check via a fourth pairing
             whose exponents the server never learns.

Each protocol is exposed both as plain functions (``*_prepare``,
``*_verify``, ``*_recover``) and as an :class:`Outsourcer` state machine that
the simulator drives. Preparation for ``chen``/``revised`` uses only table
entries and group additions; the table's stored pairing is used in recovery
so the outsourcer never pairs anything itself.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass

from .algebra import G1Elem, G2Elem, GTElem, PairingParams, Scalar, pair
from .randtable import RandTable, SixTuple


class MalformedResponse(ValueError):
    """A server reply has the wrong shape for the query it answers."""


class ProtocolStateError(RuntimeError):
    """Outsourcer methods were called out of order."""


@dataclass(frozen=True)
class Query:
    pairs: tuple[tuple[G1Elem, G2Elem], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def to_json(self) -> list[list[str]]:
        return [[P.encode(), Q.encode()] for P, Q in self.pairs]


@dataclass(frozen=True)
class Response:
    values: tuple[GTElem, ...]

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> GTElem:
        return self.values[i]

    def to_json(self) -> list[str]:
        return [v.encode() for v in self.values]


def honest_eval(query: Query) -> Response:
    return Response(tuple(pair(P, Q) for P, Q in query.pairs))


def _expect_len(resp: Response, n: int, who: str) -> None:
    if len(resp) != n:
        raise MalformedResponse(f"{who}: expected {n} values, got {len(resp)}")


# -- Chen et al. and the revised variant --------------------------------------


@dataclass(frozen=True)
class ChenSecrets:
    V: SixTuple
    X: SixTuple | None = None
    Y: SixTuple | None = None

    @property
    def tuples_used(self) -> int:
        return sum(t is not None for t in (self.V, self.X, self.Y))


def _blind(A: G1Elem, B: G2Elem, V: SixTuple) -> tuple[list, list]:
    to_u1 = [(A + V.w1W1, B + V.w2W2), (V.w1W1 + V.w2W1, V.W2)]
    to_u2 = [(A + V.W1, V.w2W2), (V.w1W1, B + V.W2)]
    return to_u1, to_u2


def check_pairs(X: SixTuple, Y: SixTuple) -> list[tuple[G1Elem, G2Elem]]:
    """The two verification pairs; built from the X and Y rows alone."""
    return [(X.w1W1, X.w2W2), (Y.w1W1, Y.w2W2)]


def chen_prepare(A: G1Elem, B: G2Elem, table: RandTable) -> tuple[Query, Query, ChenSecrets]:
    V, X, Y = table.take(3)
    to_u1, to_u2 = _blind(A, B, V)
    checks = check_pairs(X, Y)
    return Query(tuple(to_u1 + checks)), Query(tuple(to_u2 + checks)), ChenSecrets(V, X, Y)


def chen_verify(resp1: Response, resp2: Response) -> bool:
    # Only the check slots are compared; slots 0-1 carry A, B and are never read.
    _expect_len(resp1, 4, "U1")
    _expect_len(resp2, 4, "U2")
    return resp1[2] == resp2[2] and resp1[3] == resp2[3]


def _combine(alpha1: GTElem, delta: GTElem, alpha2: GTElem, alpha3: GTElem, V: SixTuple) -> GTElem:
    return alpha1 * alpha2.inv() * alpha3.inv() * delta * V.pre_pairing.inv()


def chen_recover(resp1: Response, resp2: Response, secrets: ChenSecrets) -> GTElem:
    _expect_len(resp1, 4, "U1")
    _expect_len(resp2, 4, "U2")
    return _combine(resp1[0], resp1[1], resp2[0], resp2[1], secrets.V)


def revised_prepare(A: G1Elem, B: G2Elem, table: RandTable) -> tuple[Query, Query, ChenSecrets]:
    (V,) = table.take(1)
    to_u1, to_u2 = _blind(A, B, V)
    return Query(tuple(to_u1)), Query(tuple(to_u2)), ChenSecrets(V)


def revised_recover(resp1: Response, resp2: Response, secrets: ChenSecrets) -> GTElem:
    _expect_len(resp1, 2, "U1")
    _expect_len(resp2, 2, "U2")
    return _combine(resp1[0], resp1[1], resp2[0], resp2[1], secrets.V)


# -- Chevallier-Mames et al. ---------------------------------------------------


@dataclass(frozen=True)
class CMPublic:
    """Fixed public points held by the outsourcer, with their pairing precomputed."""

    P1: G1Elem
    P2: G2Elem
    pre: GTElem

    @classmethod
    def create(cls, params: PairingParams, seed: int | str = 0) -> CMPublic:
        rng = random.Random(seed)
        P1 = params.random_g1(rng, nonzero=True)
        P2 = params.random_g2(rng, nonzero=True)
        return cls(P1, P2, pair(P1, P2))


@dataclass(frozen=True)
class CMSecrets:
    g1: Scalar
    g2: Scalar
    a1: Scalar
    r1: Scalar
    a2: Scalar
    r2: Scalar
    public: CMPublic

    def __post_init__(self) -> None:
        q = self.public.P1.params.q
        for name in ("g1", "g2", "a1", "r1", "a2", "r2"):
            if getattr(self, name) % q == 0:
                raise ValueError(f"session key {name} must be nonzero mod q")

    @classmethod
    def draw(cls, public: CMPublic, rng: random.Random) -> CMSecrets:
        params = public.P1.params
        return cls(*(params.random_scalar(rng) for _ in range(6)), public=public)


def cm_query(A: G1Elem, B: G2Elem, s: CMSecrets) -> Query:
    P1, P2 = s.public.P1, s.public.P2
    blind_a = A + s.g1 * P1
    blind_b = B + s.g2 * P2
    check = (s.a1 * A + s.r1 * P1, s.a2 * B + s.r2 * P2)
    return Query(((blind_a, P2), (P1, blind_b), (blind_a, blind_b), check))


def cm_prepare(
    A: G1Elem, B: G2Elem, public: CMPublic, seed: int | str | random.Random
) -> tuple[Query, CMSecrets]:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    secrets = CMSecrets.draw(public, rng)
    return cm_query(A, B, secrets), secrets


def cm_recover(resp: Response, s: CMSecrets) -> GTElem:
    _expect_len(resp, 4, "U")
    return resp[0] ** -s.g2 * resp[1] ** -s.g1 * resp[2] * s.public.pre ** (s.g1 * s.g2)


def cm_verify(resp: Response, recovered: GTElem, s: CMSecrets) -> bool:
    """Check alpha4 against the recovered value, as the outsourcer runs it."""
    _expect_len(resp, 4, "U")
    rhs = (
        recovered ** (s.a1 * s.a2)
        * resp[0] ** (s.a1 * s.r2)
        * resp[1] ** (s.a2 * s.r1)
        * s.public.pre ** (s.r1 * s.r2 - s.a1 * s.g1 * s.r2 - s.a2 * s.g2 * s.r1)
    )
    return resp[3] == rhs


def cm_verify_expanded(resp: Response, s: CMSecrets) -> bool:
    """The same check with recovery substituted in and exponents collected per alpha."""
    _expect_len(resp, 4, "U")
    a1, a2, g1, g2, r1, r2 = s.a1, s.a2, s.g1, s.g2, s.r1, s.r2
    rhs = (
        resp[0] ** (-g2 * a1 * a2 + a1 * r2)
        * resp[1] ** (-g1 * a1 * a2 + a2 * r1)
        * resp[2] ** (a1 * a2)
        * s.public.pre ** (g1 * g2 * a1 * a2 + r1 * r2 - a1 * g1 * r2 - a2 * g2 * r1)
    )
    return resp[3] == rhs


# -- state machines -------------------------------------------------------------


class Verdict(str, enum.Enum):
    ACCEPTED = "accepted"
    REJECTED = "rejected"
    NO_VERIFICATION = "no-verification"


class Phase(enum.Enum):
    READY = "ready"
    AWAITING = "awaiting"
    DONE = "done"


class Outsourcer:
    """Single-session outsourcer: ``prepare`` -> ``deliver`` per channel -> ``finish``."""

    protocol: str
    servers: tuple[str, ...]

    def __init__(self) -> None:
        self.phase = Phase.READY
        self.responses: dict[str, Response] = {}
        self.verdict: Verdict | None = None
        self.output: GTElem | None = None
        self.secrets = None

    def prepare(self, A: G1Elem, B: G2Elem) -> dict[str, Query]:
        if self.phase is not Phase.READY:
            raise ProtocolStateError(f"prepare called in phase {self.phase.value}")
        queries = self._prepare(A, B)
        self.phase = Phase.AWAITING
        return queries

    def deliver(self, server: str, resp: Response) -> None:
        if self.phase is not Phase.AWAITING:
            raise ProtocolStateError(f"deliver called in phase {self.phase.value}")
        if server not in self.servers:
            raise ProtocolStateError(f"unknown server {server!r} for {self.protocol}")
        if server in self.responses:
            raise ProtocolStateError(f"duplicate response from {server}")
        self.responses[server] = resp

    def finish(self) -> tuple[Verdict, GTElem | None]:
        if self.phase is not Phase.AWAITING:
            raise ProtocolStateError(f"finish called in phase {self.phase.value}")
        missing = [s for s in self.servers if s not in self.responses]
        if missing:
            raise ProtocolStateError(f"missing responses from {missing}")
        self.verdict, self.output = self._finish()
        self.phase = Phase.DONE
        return self.verdict, self.output

    def _prepare(self, A: G1Elem, B: G2Elem) -> dict[str, Query]:
        raise NotImplementedError

    def _finish(self) -> tuple[Verdict, GTElem | None]:
        raise NotImplementedError


class ChenOutsourcer(Outsourcer):
    protocol = "chen"
    servers = ("U1", "U2")

    def __init__(self, table: RandTable) -> None:
        super().__init__()
        self.table = table
        self.secrets: ChenSecrets | None = None

    def _prepare(self, A, B):
        q1, q2, self.secrets = chen_prepare(A, B, self.table)
        return {"U1": q1, "U2": q2}

    def _finish(self):
        r1, r2 = self.responses["U1"], self.responses["U2"]
        if not chen_verify(r1, r2):
            return Verdict.REJECTED, None
        return Verdict.ACCEPTED, chen_recover(r1, r2, self.secrets)


class RevisedOutsourcer(ChenOutsourcer):
    protocol = "revised"

    def _prepare(self, A, B):
        q1, q2, self.secrets = revised_prepare(A, B, self.table)
        return {"U1": q1, "U2": q2}

    def _finish(self):
        r1, r2 = self.responses["U1"], self.responses["U2"]
        return Verdict.NO_VERIFICATION, revised_recover(r1, r2, self.secrets)


class CMOutsourcer(Outsourcer):
    protocol = "cm"
    servers = ("U",)

    def __init__(self, public: CMPublic, rng: random.Random) -> None:
        super().__init__()
        self.public = public
        self.rng = rng
        self.secrets: CMSecrets | None = None

    def _prepare(self, A, B):
        query, self.secrets = cm_prepare(A, B, self.public, self.rng)
        return {"U": query}

    def _finish(self):
        resp = self.responses["U"]
        recovered = cm_recover(resp, self.secrets)
        if not cm_verify(resp, recovered, self.secrets):
            return Verdict.REJECTED, None
        return Verdict.ACCEPTED, recovered


PROTOCOLS = ("chen", "revised", "cm")

