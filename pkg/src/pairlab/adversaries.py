"""Server behaviors: honest evaluation plus the deviations used to attack or test protocols.

Every behavior assumes full knowledge of the protocol layout (it knows which
slot carries delta, which carries alpha4, and so on). One instance serves one
server for one session; it keeps its own generator and log.
"""

from __future__ import annotations

import random
from typing import Any

from .algebra import GTElem
from .protocols import Query, Response, honest_eval


class BehaviorConfigError(ValueError):
    pass


class ServerBehavior:
    kind = "honest"

    def __init__(self, seed: int | str = 0) -> None:
        self.seed = seed
        self.rng = random.Random(seed)

    def respond(self, query: Query) -> Response:
        return honest_eval(query)

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind}


class Honest(ServerBehavior):
    pass


class SemiHonestLogging(ServerBehavior):
    """Answers correctly and keeps a copy of every query it receives."""

    kind = "semi_honest_logging"

    def __init__(self, seed: int | str = 0) -> None:
        super().__init__(seed)
        self.log: list[Query] = []

    def respond(self, query: Query) -> Response:
        self.log.append(query)
        return honest_eval(query)


class RhoSubstitution(ServerBehavior):
    """Honest except slot 1 (delta), which becomes a random GT element other than delta.

    The check slots are left alone, so an equality check on them passes.
    """

    kind = "rho_substitution"
    slot = 1

    def __init__(self, seed: int | str = 0) -> None:
        super().__init__(seed)
        self.rho: GTElem | None = None
        self.replaced: GTElem | None = None

    def respond(self, query: Query) -> Response:
        honest = honest_eval(query)
        if len(honest) <= self.slot:
            raise BehaviorConfigError(f"rho substitution needs >= {self.slot + 1} slots")
        delta = honest[self.slot]
        params = delta.params
        # uniform over the q-1 subgroup elements different from delta
        k = self.rng.randrange(1, params.q)
        self.rho = delta * params.gt_from_exponent(k)
        self.replaced = delta
        values = list(honest.values)
        values[self.slot] = self.rho
        return Response(tuple(values))

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "seed": self.seed}


class IndexTamper(ServerBehavior):
    """Multiplies one response slot by a random non-identity factor ``t``."""

    kind = "index_tamper"

    def __init__(self, index: int, seed: int | str = 0) -> None:
        super().__init__(seed)
        if index < 0:
            raise BehaviorConfigError(f"tamper index must be >= 0, got {index}")
        self.index = index
        self.factor: GTElem | None = None

    def respond(self, query: Query) -> Response:
        if self.index >= len(query):
            raise BehaviorConfigError(f"tamper index {self.index} out of range for {len(query)} slots")
        honest = honest_eval(query)
        params = honest[self.index].params
        self.factor = params.gt_from_exponent(self.rng.randrange(1, params.q))
        values = list(honest.values)
        values[self.index] = values[self.index] * self.factor
        return Response(tuple(values))

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "index": self.index, "seed": self.seed}


class RandomResponse(ServerBehavior):
    """Ignores the query contents; every slot is uniform in GT."""

    kind = "random_response"

    def respond(self, query: Query) -> Response:
        if not query.pairs:
            return Response(())
        params = query.pairs[0][0].params
        return Response(tuple(params.random_gt(self.rng) for _ in query.pairs))

    def describe(self) -> dict[str, Any]:
        return {"kind": self.kind, "seed": self.seed}


def apply_behavior(behavior: ServerBehavior, query: Query) -> Response:
    return behavior.respond(query)


def semi_honest_view(behavior: ServerBehavior) -> list[Query]:
    if not isinstance(behavior, SemiHonestLogging):
        raise BehaviorConfigError(f"{behavior.kind} keeps no view")
    return list(behavior.log)


_KINDS = {
    "honest": Honest,
    "semi_honest_logging": SemiHonestLogging,
    "rho_substitution": RhoSubstitution,
    "index_tamper": IndexTamper,
    "random_response": RandomResponse,
}


def behavior_from_config(cfg: dict[str, Any], seed: int | str | None = None) -> ServerBehavior:
    """Build a behavior from ``{"kind": ..., "seed": ..., "index": ...}``.

    ``seed`` overrides the configured seed; the scenario runner passes a
    per-session derivation so sessions do not share randomness.
    """
    try:
        cls = _KINDS[cfg["kind"]]
    except KeyError as exc:
        raise BehaviorConfigError(f"unknown or missing behavior kind in {cfg!r}") from exc
    s = cfg.get("seed", 0) if seed is None else seed
    if cls is IndexTamper:
        if "index" not in cfg:
            raise BehaviorConfigError("index_tamper requires an 'index'")
        return IndexTamper(int(cfg["index"]), s)
    return cls(s)
