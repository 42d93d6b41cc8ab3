"""Canonical text encoding: elements as decimal strings, compact sorted JSON."""

from __future__ import annotations

import json
from typing import Any

from .algebra import G1Elem, G2Elem, GTElem, PairingParams


class DecodeError(ValueError):
    pass


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _int(text: Any) -> int:
    if not isinstance(text, str) or not text.isdigit():
        raise DecodeError(f"expected a decimal string, got {text!r}")
    return int(text)


def decode_g1(text: str, params: PairingParams) -> G1Elem:
    v = _int(text)
    if v >= params.q:
        raise DecodeError(f"G1 value {v} out of range for q={params.q}")
    return params.g1(v)


def decode_g2(text: str, params: PairingParams) -> G2Elem:
    v = _int(text)
    if v >= params.q:
        raise DecodeError(f"G2 value {v} out of range for q={params.q}")
    return params.g2(v)


def decode_gt(text: str, params: PairingParams) -> GTElem:
    v = _int(text)
    if not 0 < v < params.p or pow(v, params.q, params.p) != 1:
        raise DecodeError(f"GT value {v} is not in the order-{params.q} subgroup")
    return params.gt(v)
