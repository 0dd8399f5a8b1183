"""ECIES-style public-key encryption used to wrap CA→vehicle messages.

Ephemeral-scalar Diffie-Hellman; the shared point is hashed with the ``kdf``
domain tag into a 128-bit AES-CTR key and a 128-bit HMAC-SHA256 key.  The tag
is truncated to 16 bytes and covers the associated data, the ephemeral point
and the ciphertext.
"""

from __future__ import annotations

import hashlib
import hmac

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import DecryptionError, FormatError
from .group import GroupParams, Point, Scalar, hash_to_bytes

TAG_LEN = 16
_ZERO_IV = bytes(16)  # keys are single-use, so a fixed counter block is safe


def overhead(group: GroupParams) -> int:
    """Bytes added to a plaintext: ephemeral point plus MAC tag."""
    return group.point_len + TAG_LEN


def _keys(shared: Point) -> tuple[bytes, bytes]:
    okm = hash_to_bytes(b"kdf", [shared.encode()])
    return okm[:16], okm[16:]


def _ctr(key: bytes, data: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), modes.CTR(_ZERO_IV)).encryptor()
    return enc.update(data) + enc.finalize()


def _tag(key: bytes, *chunks: bytes) -> bytes:
    return hmac.new(key, b"".join(chunks), hashlib.sha256).digest()[:TAG_LEN]


def encrypt(recipient: Point, plaintext: bytes, aad: bytes = b"", rng=None) -> bytes:
    group = recipient.group
    if recipient.is_identity:
        raise ValueError("cannot encrypt to the identity element")
    e = group.random_scalar(rng, nonzero=True)
    eph = group.base_mul(e).encode()
    k_enc, k_mac = _keys(e * recipient)
    ct = _ctr(k_enc, plaintext)
    return eph + ct + _tag(k_mac, aad, eph, ct)


def decrypt(group: GroupParams, secret: Scalar, blob: bytes, aad: bytes = b"") -> bytes:
    if len(blob) < overhead(group):
        raise FormatError("ciphertext shorter than ECIES overhead")
    eph_bytes = blob[: group.point_len]
    ct = blob[group.point_len : -TAG_LEN]
    tag = blob[-TAG_LEN:]
    try:
        eph = group.decode_point(eph_bytes)
    except FormatError as exc:
        raise DecryptionError("invalid ephemeral point") from exc
    shared = secret * eph
    if shared.is_identity:
        raise DecryptionError("degenerate shared secret")
    k_enc, k_mac = _keys(shared)
    if not hmac.compare_digest(tag, _tag(k_mac, aad, eph_bytes, ct)):
        raise DecryptionError("MAC check failed")
    return _ctr(k_enc, ct)
