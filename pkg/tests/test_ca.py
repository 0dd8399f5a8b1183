import random

import pytest
from conftest import ZeroRng

import oracles
from noins.butterfly import CaterpillarKeyPair, derive_cocoon_private
from noins.ca import (
    CaKeyPair,
    CertificateAuthority,
    SanitizationKeyPair,
    h1_of,
    h2_of,
    issue_explicit,
    issue_noins,
    issue_simpl,
    unwrap_i2v,
    wrap_i2v,
)
from noins.errors import DecryptionError, IssuanceError
from noins.group import TOY
from noins.vehicle import accept_explicit, accept_simpl, issuance_holds
from noins.verification import verify_explicit_receiver
from noins.wire import Metadata, decode, encode

META = Metadata(1, 1_000, 2_000_000_000)


def setup(group, seed=31):
    rng = random.Random(seed)
    ca = CaKeyPair.generate(group, rng)
    san = SanitizationKeyPair.generate(group, "c", 2**32 - 1, rng)
    cocoon = derive_cocoon_private(CaterpillarKeyPair.generate(group, rng), 0)
    return rng, ca, san, cocoon


def test_issuance_equation_holds(group):
    rng, ca, san, cocoon = setup(group)
    for _ in range(10):
        p = issue_noins(cocoon.X_hat, META, rng.randbytes(16), ca, san, rng)
        assert issuance_holds(p, cocoon.x_hat, ca.pkc, san.pks)
        lhs = group.base_mul(cocoon.x_hat + p.sig1 + p.sig2)
        rhs = p.cert.rcv + h1_of(META, ca.pkc) * ca.pkc + h2_of(p.cert.rcv, p.cert.lv, san.pks) * san.pks
        assert lhs == rhs


def test_zero_randomness_gives_cocoon_key_as_rcv(group):
    _, ca, san, cocoon = setup(group)
    p = issue_noins(cocoon.X_hat, META, bytes(16), ca, san, ZeroRng())
    assert p.cert.rcv == cocoon.X_hat
    assert p.r2 == 0
    assert p.sig1 == h1_of(META, ca.pkc) * ca.skc % group.q


def test_toy_issuance_hand_oracle():
    q = oracles.TOY_Q
    rng, ca, san, cocoon = setup(TOY, seed=32)
    lv = bytes(range(16))
    p = issue_noins(cocoon.X_hat, META, lv, ca, san, random.Random(5))
    h1 = oracles.tagged_scalar(b"h1", [META.to_bytes(), ca.pkc.encode()], q)
    h2 = oracles.tagged_scalar(b"h2", [p.cert.rcv.encode(), lv, san.pks.encode()], q)
    # solve the sig1/sig2 equations for r1 + r2 in plain integers
    r_sum = (p.sig1 - h1 * ca.skc + p.sig2 - h2 * san.sks) % q
    assert p.cert.rcv.raw == cocoon.X_hat.raw * oracles.toy_pow(r_sum) % oracles.TOY_P
    assert (p.sig2 - h2 * san.sks) % q == p.r2


def test_tampered_payload_fails_issuance_check():
    from noins.group import SECP256K1 as g

    rng, ca, san, cocoon = setup(g)
    p = issue_noins(cocoon.X_hat, META, rng.randbytes(16), ca, san, rng)
    from dataclasses import replace

    assert not issuance_holds(replace(p, sig1=(p.sig1 + 1) % g.q), cocoon.x_hat, ca.pkc, san.pks)
    assert not issuance_holds(replace(p, sks=(p.sks + 1) % g.q), cocoon.x_hat, ca.pkc, san.pks)
    assert not issuance_holds(p, cocoon.x_hat + 1, ca.pkc, san.pks)


def test_identity_cocoon_rejected(group):
    _, ca, san, _ = setup(group)
    with pytest.raises(IssuanceError):
        issue_noins(group.identity, META, bytes(16), ca, san)
    with pytest.raises(IssuanceError):
        issue_simpl(group.identity, META, bytes(9), ca)
    with pytest.raises(IssuanceError):
        issue_explicit(group.identity, META, bytes(9), ca)


def test_linkage_width_enforced(group):
    _, ca, san, cocoon = setup(group)
    with pytest.raises(ValueError):
        issue_noins(cocoon.X_hat, META, bytes(9), ca, san)
    with pytest.raises(ValueError):
        issue_simpl(cocoon.X_hat, META, bytes(16), ca)


def test_simpl_and_explicit_completeness(group):
    rng, ca, _, cocoon = setup(group)
    for _ in range(5):
        s = accept_simpl(wrap_i2v(issue_simpl(cocoon.X_hat, META, rng.randbytes(9), ca, rng), cocoon.X_hat, rng), cocoon, ca.pkc)
        assert s.pkv == group.base_mul(s.skv)
        e = accept_explicit(wrap_i2v(issue_explicit(cocoon.X_hat, META, rng.randbytes(9), ca, rng), cocoon.X_hat, rng), cocoon, ca.pkc)
        assert e.pkv == group.base_mul(e.skv)


def test_explicit_certificate_every_byte_flip_rejected():
    from noins.group import SECP256K1 as g

    rng, ca, _, cocoon = setup(g)
    cert = issue_explicit(cocoon.X_hat, META, rng.randbytes(9), ca, rng).cert
    raw = encode(cert)
    for i in range(len(raw)):
        bad = bytearray(raw)
        bad[i] ^= 0x80
        try:
            c2 = decode(bytes(bad), g)
        except Exception:
            continue
        assert not verify_explicit_receiver(c2, ca.pkc), i


def test_wrap_unwrap(group):
    rng, ca, san, cocoon = setup(group)
    p = issue_noins(cocoon.X_hat, META, rng.randbytes(16), ca, san, rng)
    msg = wrap_i2v(p, cocoon.X_hat, rng)
    assert unwrap_i2v(msg, cocoon.x_hat, group) == p
    with pytest.raises(DecryptionError):
        unwrap_i2v(msg, cocoon.x_hat + 1, group)
    bad = bytearray(msg.blob)
    bad[-1] ^= 1
    with pytest.raises(DecryptionError):
        unwrap_i2v(type(msg)(msg.inner_kind, bytes(bad)), cocoon.x_hat, group)


def test_rcv_values_distinct():
    from noins.group import SECP256K1 as g

    rng, ca, san, cocoon = setup(g)
    seen = {issue_noins(cocoon.X_hat, META, bytes(16), ca, san, rng).cert.rcv.encode() for _ in range(300)}
    assert len(seen) == 300


def test_stateful_ca_batch_and_attribution(group):
    rng = random.Random(33)
    authority = CertificateAuthority.create(group, rng=rng)
    cat = CaterpillarKeyPair.generate(group, rng)
    batch = authority.issue_batch(cat.X, cat.expansion_seed, META, batch=4, rng=rng)
    assert [i for i, _ in batch.entries] == [0, 1, 2, 3]
    assert len(set(authority.issued_lvs)) == 4
    assert authority.registry(50).lvs == authority.issued_lvs
    with pytest.raises(ValueError):
        authority.issue(cat.X, META, approach="bogus", rng=rng)
