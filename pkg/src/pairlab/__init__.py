"""Laboratory for outsourced bilinear-pairing protocols and their attacks."""

from .algebra import (
    TOY,
    G1Elem,
    G2Elem,
    GTElem,
    PairingParams,
    ParamsError,
    make_params,
    pair,
    params_for_q,
)

__all__ = [
    "TOY",
    "G1Elem",
    "G2Elem",
    "GTElem",
    "PairingParams",
    "ParamsError",
    "make_params",
    "pair",
    "params_for_q",
]
