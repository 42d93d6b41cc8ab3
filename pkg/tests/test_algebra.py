import pytest
from hypothesis import given, settings, strategies as st

from oracles import order_mod, pair_int
from pairlab.algebra import (
    TOY,
    G1Elem,
    GTElem,
    PairingParams,
    ParamsError,
    g_add,
    g_neg,
    g_scalar_mul,
    gt_inv,
    gt_mul,
    gt_pow,
    is_prime,
    make_params,
    pair,
    params_for_q,
)
from pairlab.codec import DecodeError, decode_g1, decode_gt
from pairlab.metering import CostMeter, acting, metered

zq = st.integers(min_value=0, max_value=10)


def test_is_prime_matches_trial_division():
    def slow(n):
        return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))

    assert [n for n in range(2000) if is_prime(n)] == [n for n in range(2000) if slow(n)]
    assert is_prime(2147483659)
    assert not is_prime(3215031751)  # strong pseudoprime to bases 2, 3, 5, 7


def test_make_params_desk_scale():
    assert make_params(4) == PairingParams(11, 23, 2)
    assert order_mod(2, 23) == 11


def test_make_params_large_is_deterministic(big):
    assert big == make_params(32)
    assert 2**31 <= big.q < 2**32
    assert pow(big.gt_gen, big.q, big.p) == 1 and big.gt_gen != 1
    seeded = make_params(32, seed=9)
    assert seeded == make_params(32, seed=9)


def test_make_params_rejects_small_bits():
    with pytest.raises(ParamsError):
        make_params(3)


def test_generator_of_order_one_rejected():
    with pytest.raises(ParamsError):
        PairingParams(11, 23, 1)


def test_generator_of_wrong_order_rejected():
    # 5 has order 22 mod 23
    assert order_mod(5, 23) == 22
    with pytest.raises(ParamsError):
        PairingParams(11, 23, 5)


def test_non_prime_order_rejected():
    with pytest.raises(ParamsError):
        params_for_q(15)
    with pytest.raises(ParamsError):
        PairingParams(15, 31, 2)


def test_params_json_roundtrip(toy):
    assert toy.to_json() == {"q": "11", "p": "23", "gt_gen": "2"}
    assert PairingParams.from_json(toy.to_json()) == toy
    with pytest.raises(ParamsError):
        PairingParams.from_json({"q": "11"})


def test_g_add_examples(toy):
    assert g_add(toy.g1(7), toy.g1(8)) == toy.g1((7 + 8) % 11) == toy.g1(4)
    for x in range(11):
        assert g_add(toy.g1(x), toy.g1(0)) == toy.g1(x)
        assert g_add(toy.g2(x), g_neg(toy.g2(x))).is_identity()


def test_scalar_mul_examples(toy):
    assert g_scalar_mul(3, toy.g1(5)) == toy.g1(4)
    assert g_scalar_mul(1, toy.g2(6)) == toy.g2(6)
    assert g_scalar_mul(0, toy.g1(6)).is_identity()


def test_pair_examples(toy):
    assert pair(toy.g1(3), toy.g2(4)).value == 2
    assert pair(toy.g1(2), toy.g2(3)).value == 18 == pow(pair(toy.g1(1), toy.g2(1)).value, 6, 23)
    for b in range(11):
        assert pair(toy.g1(0), toy.g2(b)).is_one()


def test_gt_examples(toy):
    assert gt_mul(toy.gt(18), toy.gt(2)).value == 13
    for k in range(11):
        x = toy.gt_from_exponent(k)
        assert gt_mul(x, gt_inv(x)).is_one()
    assert gt_pow(toy.gt(2), 0).is_one()


def test_g1_and_g2_do_not_mix(toy):
    assert toy.g1(3) != toy.g2(3)
    with pytest.raises(TypeError):
        toy.g1(3) + toy.g2(3)
    with pytest.raises(TypeError):
        pair(toy.g2(1), toy.g1(1))


def test_elements_from_different_instances_do_not_mix(toy, big):
    with pytest.raises(ValueError):
        toy.g1(1) + big.g1(1)
    with pytest.raises(ValueError):
        pair(toy.g1(1), big.g2(1))


def test_gt_rejects_zero(toy):
    with pytest.raises(ValueError):
        GTElem(0, toy)


def test_decode_validates(toy):
    assert decode_g1("7", toy) == toy.g1(7)
    assert decode_gt("18", toy) == toy.gt(18)
    for bad in ("11", "-1", "x", 7):
        with pytest.raises(DecodeError):
            decode_g1(bad, toy)
    with pytest.raises(DecodeError):
        decode_gt("5", toy)  # order 22, outside the subgroup


def test_bilinearity_exhaustive_toy(toy):
    for a in range(11):
        for b in range(11):
            lhs = pair(a * toy.g1_gen, b * toy.g2_gen)
            assert lhs == gt_pow(pair(toy.g1_gen, toy.g2_gen), a * b)
            assert lhs.value == pair_int(a, b, 11, 23, 2)


def test_non_degenerate(toy, big):
    assert not pair(toy.g1_gen, toy.g2_gen).is_one()
    assert not pair(big.g1_gen, big.g2_gen).is_one()


@given(zq, zq, zq)
def test_multiplicative_in_each_slot(x, y, z):
    P, P2, Q = TOY.g1(x), TOY.g1(y), TOY.g2(z)
    assert pair(P + P2, Q) == pair(P, Q) * pair(P2, Q)
    assert pair(P, TOY.g2(x) + TOY.g2(y)) == pair(P, TOY.g2(x)) * pair(P, TOY.g2(y))


@given(zq, zq, zq)
def test_group_laws(x, y, z):
    a, b, c = TOY.g1(x), TOY.g1(y), TOY.g1(z)
    assert (a + b) + c == a + (b + c)
    assert a + b == b + a
    assert a - b == a + (-b)


@settings(max_examples=200)
@given(st.integers(0, 2**40), st.integers(0, 2**40), st.integers(-(2**40), 2**40))
def test_closure_and_bilinearity_large(a, b, k):
    P = make_params(32)
    e = pair(a * P.g1_gen, b * P.g2_gen)
    assert e.in_subgroup()
    assert (e**k).in_subgroup()
    assert e.inv().in_subgroup()
    assert e == P.gt_from_exponent(a * b)
    assert e.value == pair_int(a % P.q, b % P.q, P.q, P.p, P.gt_gen)


def test_operations_are_metered_per_party(toy):
    meter = CostMeter()
    with metered(meter):
        with acting("T"):
            toy.g1(1) + toy.g1(2)
            3 * toy.g2(2)
        with acting("U1"):
            e = pair(toy.g1(1), toy.g2(1))
            e * e
            e**3
            e.inv()
    assert meter.count("T", "group_add") == 1
    assert meter.count("T", "scalar_mul") == 1
    assert meter.count("T", "pairing") == 0
    assert [meter.count("U1", op) for op in ("pairing", "gt_mul", "gt_exp", "gt_inv")] == [1, 1, 1, 1]


def test_unmetered_calls_are_free(toy):
    # no active meter: nothing recorded, nothing raised
    assert isinstance(toy.g1(1) + toy.g1(1), G1Elem)
