import random

import pytest

import oracles
from noins.errors import FormatError
from noins.group import SECP256K1, TOY, get_group, hash_to_bytes

X_2G = 0xC6047F9441ED7D6D3045406E95C07CD85C778E4B8CEF3CA7ABAC09B95C709EE5
X_3G = 0xF9308A019258C31049344F85F89D5229B531C845836F99B08601F113BCE036F9


def test_known_multiples_of_generator():
    assert SECP256K1.base_mul(2).encode()[1:] == X_2G.to_bytes(32, "big")
    assert SECP256K1.base_mul(3).encode()[1:] == X_3G.to_bytes(32, "big")


def test_scalar_mult_matches_naive_reference():
    rng = random.Random(1)
    for _ in range(25):
        k = rng.randrange(SECP256K1.q)
        assert SECP256K1.base_mul(k).encode() == oracles.ec_compress(oracles.ec_mul(k))


def test_variable_base_and_msm_match_reference():
    rng = random.Random(2)
    for _ in range(10):
        a, b, c = (rng.randrange(SECP256K1.q) for _ in range(3))
        P = SECP256K1.base_mul(a)
        Q = SECP256K1.base_mul(b)
        assert (c * P).encode() == oracles.ec_compress(oracles.ec_mul(a * c))
        got = SECP256K1.msm([(c, P), (a, Q)])
        assert got.encode() == oracles.ec_compress(oracles.ec_mul(c * a + a * b))


def test_homomorphism(group):
    rng = random.Random(3)
    for _ in range(20):
        a, b = group.random_scalar(rng), group.random_scalar(rng)
        assert group.base_mul(a + b) == group.base_mul(a) + group.base_mul(b)
    assert group.base_mul(0) == group.identity
    assert group.base_mul(1) == group.g
    assert group.base_mul(group.q) == group.identity


def test_toy_mult_is_repeated_addition_exhaustively():
    acc = TOY.identity
    for a in range(TOY.q):
        assert TOY.base_mul(a) == acc
        acc = acc + TOY.g
    assert acc == TOY.identity


def test_toy_elements_enumerate_the_subgroup():
    elems = TOY.elements()
    assert len({e.raw for e in elems}) == TOY.q
    assert all(pow(e.raw, TOY.q, TOY.p) == 1 for e in elems)


def test_point_roundtrip_and_lengths(group):
    rng = random.Random(4)
    for _ in range(20):
        p = group.base_mul(group.random_scalar(rng))
        enc = p.encode()
        assert len(enc) == group.point_len
        assert group.decode_point(enc) == p
    assert group.decode_point(group.identity.encode()) == group.identity
    assert SECP256K1.point_len == 33 and SECP256K1.scalar_len == 32


def test_decode_rejects_garbage(group):
    with pytest.raises(FormatError):
        group.decode_point(b"\xff" * group.point_len)
    with pytest.raises(FormatError):
        group.decode_point(b"\x02" * (group.point_len + 1))


def test_decode_rejects_off_curve_point():
    x = 5  # x^3 + 7 = 132 is not a square mod p
    assert pow((x ** 3 + 7) % oracles.P, (oracles.P - 1) // 2, oracles.P) != 1
    with pytest.raises(FormatError):
        SECP256K1.decode_point(b"\x02" + x.to_bytes(32, "big"))


def test_toy_decode_rejects_non_subgroup_element():
    # 2 is a quadratic non-residue mod 1019, so it lies outside the order-q subgroup
    with pytest.raises(FormatError):
        TOY.decode_point((2).to_bytes(2, "big"))


def test_scalar_codec(group):
    assert group.decode_scalar(group.encode_scalar(group.q - 1)) == group.q - 1
    with pytest.raises(FormatError):
        group.decode_scalar(group.q.to_bytes(group.scalar_len, "big"))
    with pytest.raises(FormatError):
        group.decode_scalar(b"\x00")


def test_hash_to_scalar_matches_reference_digest():
    pkc = SECP256K1.base_mul(12345)
    parts = [bytes(16), pkc.encode()]
    expected = oracles.tagged_scalar(b"h1", parts, SECP256K1.q)
    assert SECP256K1.hash_to_scalar(b"h1", parts) == expected
    assert hash_to_bytes(b"h1", parts) == oracles.tagged_digest(b"h1", parts)


def test_hash_to_scalar_deterministic_and_in_range(group):
    a = group.hash_to_scalar(b"h2", [b"x", b"y"])
    assert a == group.hash_to_scalar(b"h2", [b"x", b"y"])
    rng = random.Random(5)
    for _ in range(200):
        assert 0 <= group.hash_to_scalar(b"f", [rng.randbytes(8)]) < group.q


def test_hash_to_scalar_domain_separation():
    parts = [b"same", b"parts"]
    values = {SECP256K1.hash_to_scalar(t, parts) for t in (b"h1", b"h2", b"cha", b"kdf", b"f")}
    assert len(values) == 5


def test_hash_framing_is_unambiguous():
    assert SECP256K1.hash_to_scalar(b"h1", [b"ab", b"c"]) != SECP256K1.hash_to_scalar(b"h1", [b"a", b"bc"])


def test_hash_needs_parts():
    with pytest.raises(ValueError):
        SECP256K1.hash_to_scalar(b"h1", [])


def test_get_group():
    assert get_group("toy") is TOY
    assert get_group("production") is SECP256K1
    with pytest.raises(ValueError):
        get_group("p521")
