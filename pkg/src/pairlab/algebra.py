"""Toy symmetric pairing over transparent discrete-log representations.

G1 and G2 are copies of Z_q written additively; an element is stored as its
discrete log to the fixed generator 1. GT is the order-q subgroup of Z_p^*
generated by ``gt_gen``. The pairing is then

    pair(P, Q) = gt_gen ** (P.value * Q.value mod q)  (mod p)

which is bilinear and non-degenerate but offers no hiding whatsoever: every
algebraic identity a protocol relies on can be checked exactly.

Protocol code touches the backend only through :class:`PairingGroup`
(element constructors, sampling, ``pair``) and element operators
(``+``, ``-``, ``k * P`` on G1/G2; ``*``, ``**``, ``.inv()`` on GT), so a real
curve backend can be dropped in behind the same surface.

Every group operation reports itself to :mod:`pairlab.metering`.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Protocol, Union

from .metering import tally

Scalar = int

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


class ParamsError(ValueError):
    """Pairing parameters are inconsistent or could not be found."""


def is_prime(n: int) -> bool:
    """Miller-Rabin with the first 13 prime bases.

    Deterministic for n < 3.3 * 10**24, which covers every instance this
    package generates.
    """
    if n < 2:
        return False
    for b in _MR_BASES:
        if n % b == 0:
            return n == b
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for b in _MR_BASES:
        x = pow(b, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PairingParams:
    q: int
    p: int
    gt_gen: int

    def __post_init__(self) -> None:
        if not is_prime(self.q):
            raise ParamsError(f"group order q={self.q} is not prime")
        if not is_prime(self.p):
            raise ParamsError(f"GT modulus p={self.p} is not prime")
        if (self.p - 1) % self.q:
            raise ParamsError(f"q={self.q} does not divide p-1={self.p - 1}")
        g = self.gt_gen % self.p
        if g == 1 or g == 0 or pow(g, self.q, self.p) != 1:
            raise ParamsError(f"gt_gen={self.gt_gen} does not have order {self.q} mod {self.p}")

    # -- element constructors -------------------------------------------------

    def g1(self, value: int) -> G1Elem:
        return G1Elem(value % self.q, self)

    def g2(self, value: int) -> G2Elem:
        return G2Elem(value % self.q, self)

    def gt(self, value: int) -> GTElem:
        return GTElem(value % self.p, self)

    def gt_from_exponent(self, k: int) -> GTElem:
        return GTElem(pow(self.gt_gen, k % self.q, self.p), self)

    @property
    def g1_gen(self) -> G1Elem:
        return self.g1(1)

    @property
    def g2_gen(self) -> G2Elem:
        return self.g2(1)

    @property
    def gt_one(self) -> GTElem:
        return GTElem(1, self)

    # -- sampling -------------------------------------------------------------

    def random_scalar(self, rng: random.Random, nonzero: bool = True) -> Scalar:
        """Uniform in Z_q^* (default) or Z_q."""
        return rng.randrange(1, self.q) if nonzero else rng.randrange(self.q)

    def random_g1(self, rng: random.Random, nonzero: bool = False) -> G1Elem:
        return self.g1(self.random_scalar(rng, nonzero))

    def random_g2(self, rng: random.Random, nonzero: bool = False) -> G2Elem:
        return self.g2(self.random_scalar(rng, nonzero))

    def random_gt(self, rng: random.Random) -> GTElem:
        return self.gt_from_exponent(rng.randrange(self.q))

    def pair(self, P: G1Elem, Q: G2Elem) -> GTElem:
        return pair(P, Q)

    def to_json(self) -> dict[str, str]:
        return {"q": str(self.q), "p": str(self.p), "gt_gen": str(self.gt_gen)}

    @classmethod
    def from_json(cls, data: dict) -> PairingParams:
        try:
            return cls(int(data["q"]), int(data["p"]), int(data["gt_gen"]))
        except (KeyError, TypeError) as exc:
            raise ParamsError(f"malformed params record: {data!r}") from exc


class PairingGroup(Protocol):
    """What protocol code needs from a pairing backend."""

    q: int

    def g1(self, value: int) -> G1Elem: ...
    def g2(self, value: int) -> G2Elem: ...
    def random_scalar(self, rng: random.Random, nonzero: bool = True) -> Scalar: ...
    def random_gt(self, rng: random.Random) -> GTElem: ...
    def pair(self, P: G1Elem, Q: G2Elem) -> GTElem: ...


# -- additive groups ----------------------------------------------------------


@dataclass(frozen=True)
class _AdditiveElem:
    value: int
    params: PairingParams = field(repr=False)

    def _check(self, other: object) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.params != self.params:  # type: ignore[attr-defined]
            raise ValueError("elements belong to different pairing instances")

    def __add__(self, other):
        self._check(other)
        tally("group_add")
        return type(self)((self.value + other.value) % self.params.q, self.params)

    def __sub__(self, other):
        self._check(other)
        tally("group_add")
        return type(self)((self.value - other.value) % self.params.q, self.params)

    def __neg__(self):
        return type(self)((-self.value) % self.params.q, self.params)

    def __rmul__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        tally("scalar_mul")
        return type(self)(k * self.value % self.params.q, self.params)

    def is_identity(self) -> bool:
        return self.value == 0

    def encode(self) -> str:
        return str(self.value)


# Same representation, distinct types: the dataclass __eq__ refuses to equate
# instances of different classes, and _check rejects mixing them.
class G1Elem(_AdditiveElem):
    __slots__ = ()


class G2Elem(_AdditiveElem):
    __slots__ = ()


AdditiveElem = Union[G1Elem, G2Elem]


def g_add(P: AdditiveElem, Q: AdditiveElem) -> AdditiveElem:
    return P + Q


def g_neg(P: AdditiveElem) -> AdditiveElem:
    return -P


def g_scalar_mul(k: Scalar, P: AdditiveElem) -> AdditiveElem:
    return k * P


# -- target group -------------------------------------------------------------


@dataclass(frozen=True)
class GTElem:
    value: int
    params: PairingParams = field(repr=False)

    def __post_init__(self) -> None:
        if self.value == 0:
            raise ValueError("0 is not in GT")

    def _check(self, other: object) -> None:
        if not isinstance(other, GTElem):
            raise TypeError(f"cannot combine GTElem with {type(other).__name__}")
        if other.params != self.params:
            raise ValueError("elements belong to different pairing instances")

    def __mul__(self, other: GTElem) -> GTElem:
        self._check(other)
        tally("gt_mul")
        return GTElem(self.value * other.value % self.params.p, self.params)

    def __truediv__(self, other: GTElem) -> GTElem:
        return self * other.inv()

    def __pow__(self, k: int) -> GTElem:
        # exponents live in Z_q since the element has order dividing q
        tally("gt_exp")
        return GTElem(pow(self.value, k % self.params.q, self.params.p), self.params)

    def inv(self) -> GTElem:
        tally("gt_inv")
        p = self.params.p
        return GTElem(pow(self.value, p - 2, p), self.params)

    def in_subgroup(self) -> bool:
        return pow(self.value, self.params.q, self.params.p) == 1

    def is_one(self) -> bool:
        return self.value == 1

    def encode(self) -> str:
        return str(self.value)


def gt_mul(x: GTElem, y: GTElem) -> GTElem:
    return x * y


def gt_inv(x: GTElem) -> GTElem:
    return x.inv()


def gt_pow(x: GTElem, k: Scalar) -> GTElem:
    return x**k


def pair(P: G1Elem, Q: G2Elem) -> GTElem:
    if not isinstance(P, G1Elem) or not isinstance(Q, G2Elem):
        raise TypeError(f"pair expects (G1Elem, G2Elem), got ({type(P).__name__}, {type(Q).__name__})")
    if P.params != Q.params:
        raise ValueError("elements belong to different pairing instances")
    tally("pairing")
    prm = P.params
    return GTElem(pow(prm.gt_gen, P.value * Q.value % prm.q, prm.p), prm)


# -- parameter generation -----------------------------------------------------

TOY = PairingParams(q=11, p=23, gt_gen=2)


def params_for_q(q: int, max_cofactor: int = 10_000) -> PairingParams:
    """Smallest p = k*q + 1 (k even) that is prime, with the smallest order-q generator."""
    if not is_prime(q):
        raise ParamsError(f"group order q={q} is not prime")
    for k in range(2, max_cofactor + 1, 2):
        p = k * q + 1
        if not is_prime(p):
            continue
        for g in range(2, p):
            if pow(g, q, p) == 1:
                return PairingParams(q, p, g)
    raise ParamsError(f"no prime p = k*{q} + 1 with k <= {max_cofactor}")


def make_params(bits: int, seed: int | None = None, max_attempts: int = 100_000) -> PairingParams:
    """Deterministic instance with a ``bits``-bit prime group order.

    Without a seed the search starts at 2**(bits-1), so ``make_params(4)`` is
    the desk-scale instance q=11, p=23, gt_gen=2. A seed shifts the starting
    point pseudo-randomly within the bit range.
    """
    if bits < 4:
        raise ParamsError(f"bits must be >= 4, got {bits}")
    lo, hi = 1 << (bits - 1), 1 << bits
    start = lo if seed is None else random.Random(seed).randrange(lo, hi)
    q = start
    for _ in range(max_attempts):
        if q >= hi:
            q = lo
        if is_prime(q):
            try:
                return params_for_q(q)
            except ParamsError:
                pass
        q += 1
    raise ParamsError(f"no {bits}-bit parameters found within {max_attempts} candidates")
