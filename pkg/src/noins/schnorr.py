"""Schnorr signatures over any group profile, in (challenge, response) form.

Used for V2X message signing under short-term keys and as the CA signature
of the explicit-certificate baseline.  A signature is ``e || s`` with both
halves fixed-width scalars, so it is 64 bytes on secp256k1.
"""

from __future__ import annotations

from .group import GroupParams, Point, Scalar

TAG = b"sig"


def _challenge(group: GroupParams, R: Point, pub: Point, message: bytes) -> Scalar:
    return group.hash_to_scalar(TAG, [R.encode(), pub.encode(), message])


def signature_len(group: GroupParams) -> int:
    return 2 * group.scalar_len


def sign(group: GroupParams, secret: Scalar, message: bytes, rng=None) -> bytes:
    k = group.random_scalar(rng, nonzero=True)
    R = group.base_mul(k)
    e = _challenge(group, R, group.base_mul(secret), message)
    s = (k + e * secret) % group.q
    return group.encode_scalar(e) + group.encode_scalar(s)


def verify(group: GroupParams, pub: Point, message: bytes, signature: bytes) -> bool:
    """True iff ``signature`` is valid for ``message`` under ``pub``.

    Malformed signatures verify as False rather than raising.
    """
    n = group.scalar_len
    if len(signature) != 2 * n:
        return False
    e = int.from_bytes(signature[:n], "big")
    s = int.from_bytes(signature[n:], "big")
    if e >= group.q or s >= group.q:
        return False
    R = group.msm([(s, group.g), (-e, pub)])
    return _challenge(group, R, pub, message) == e
