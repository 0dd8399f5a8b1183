"""Canonical fixed-width encodings for every object that crosses a wire.

Every object starts with a two-byte header ``kind || version``.  Bodies are
fixed layouts of points (``P`` bytes), scalars (``S`` bytes) and raw byte
fields; nested objects are embedded with their own header.  Only V2X
messages carry a variable-length field (the application message, u32
length-prefixed), and I2V batches carry a u16 entry count.

``P``/``S`` are 33/32 on the production profile and 2/2 on the toy profile.
Byte-offset tables for each kind live in ``docs/wire-format.md``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, fields
from enum import IntEnum
from typing import Optional, Union

from .errors import FormatError
from .group import GroupParams, Point, Scalar

VERSION = 1
HEADER_LEN = 2
META_LEN = 16
LV_LEN = 16
SLV_LEN = 9
BASELINE_LV_LEN = 9
MAC_LEN = 16
MSG_LEN_PREFIX = 4
BATCH_COUNT_LEN = 2
BATCH_ENTRY_OVERHEAD = 4 + 2  # cocoon index u32, length u16

# Sizes substituted for the explicit baseline's CA signature when accounting
# for RSA-2048/SHA-256 certificates.  The public key width is listed for
# completeness; the CA key is distributed out of band and never counted.
RSA_SIZES = {"signature": 256, "public_key": 270}


class Kind(IntEnum):
    NOINS_CERT = 0x01
    SHORT_TERM_CERT = 0x02
    NOINS_I2V_PAYLOAD = 0x03
    I2V_MESSAGE = 0x04
    SIMPL_CERT = 0x05
    SIMPL_I2V_PAYLOAD = 0x06
    EXPLICIT_CERT = 0x07
    EXPLICIT_I2V_PAYLOAD = 0x08
    V2X_AUTH = 0x09
    SIMPL_V2X = 0x0A
    EXPLICIT_V2X = 0x0B
    I2V_BATCH = 0x0C


# --------------------------------------------------------------------------
# domain objects
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Metadata:
    """16-byte certificate metadata record.

    Layout: version u8 | issuer_id u32 | validity_start u32 | validity_end u32
    | psid u16 | reserved u8.  Times are unix seconds.
    """

    issuer_id: int
    validity_start: int
    validity_end: int
    psid: int = 0x20
    format_version: int = 1
    reserved: int = 0

    _STRUCT = struct.Struct(">BIIIHB")

    def __post_init__(self):
        if self.validity_start >= self.validity_end:
            raise ValueError("validity_start must precede validity_end")

    def to_bytes(self) -> bytes:
        return self._STRUCT.pack(
            self.format_version,
            self.issuer_id,
            self.validity_start,
            self.validity_end,
            self.psid,
            self.reserved,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Metadata":
        if len(data) != META_LEN:
            raise FormatError("metadata must be 16 bytes")
        ver, issuer, start, end, psid, reserved = cls._STRUCT.unpack(data)
        if start >= end:
            raise FormatError("metadata validity window is empty")
        return cls(issuer, start, end, psid, ver, reserved)

    def valid_at(self, now: int) -> bool:
        return self.validity_start <= now < self.validity_end


@dataclass(frozen=True)
class NoinsCertificate:
    rcv: Point
    meta: Metadata
    lv: bytes

    KIND = Kind.NOINS_CERT


@dataclass(frozen=True)
class ShortTermCert:
    rcv: Point
    meta: Metadata
    slv: bytes

    KIND = Kind.SHORT_TERM_CERT


@dataclass(frozen=True)
class NoinsI2VPayload:
    cert: NoinsCertificate
    sig1: Scalar
    sig2: Scalar
    sks: Scalar
    r2: Scalar

    KIND = Kind.NOINS_I2V_PAYLOAD


@dataclass(frozen=True)
class SimplCertificate:
    rcv: Point
    meta: Metadata
    lv: bytes

    KIND = Kind.SIMPL_CERT


@dataclass(frozen=True)
class SimplI2VPayload:
    cert: SimplCertificate
    sig: Scalar

    KIND = Kind.SIMPL_I2V_PAYLOAD


@dataclass(frozen=True)
class ExplicitCertificate:
    pkv: Point
    meta: Metadata
    lv: bytes
    sig: bytes

    KIND = Kind.EXPLICIT_CERT

    def tbs(self) -> bytes:
        """The bytes covered by the CA signature."""
        return explicit_tbs(self.pkv, self.meta, self.lv)


@dataclass(frozen=True)
class ExplicitI2VPayload:
    cert: ExplicitCertificate
    r: Scalar

    KIND = Kind.EXPLICIT_I2V_PAYLOAD


@dataclass(frozen=True)
class V2XAuthMessage:
    """On-air NOINS authentication values plus the signed message."""

    cert: ShortTermCert
    pks_j: Point
    com: Point
    resp: Scalar
    message: bytes
    signature: bytes

    KIND = Kind.V2X_AUTH

    def signed_bytes(self) -> bytes:
        return v2x_signed_bytes(self.cert, self.message)


@dataclass(frozen=True)
class SimplV2XMessage:
    cert: SimplCertificate
    message: bytes
    signature: bytes

    KIND = Kind.SIMPL_V2X


@dataclass(frozen=True)
class ExplicitV2XMessage:
    cert: ExplicitCertificate
    message: bytes
    signature: bytes

    KIND = Kind.EXPLICIT_V2X


@dataclass(frozen=True)
class I2VMessage:
    """Encrypted provisioning message; ``blob`` is eph || ciphertext || tag."""

    inner_kind: Kind
    blob: bytes

    KIND = Kind.I2V_MESSAGE


@dataclass(frozen=True)
class I2VBatch:
    entries: tuple[tuple[int, I2VMessage], ...]

    KIND = Kind.I2V_BATCH


WireObject = Union[
    NoinsCertificate, ShortTermCert, NoinsI2VPayload, SimplCertificate,
    SimplI2VPayload, ExplicitCertificate, ExplicitI2VPayload, V2XAuthMessage,
    SimplV2XMessage, ExplicitV2XMessage, I2VMessage, I2VBatch,
]

# Per-kind field whitelist; the test suite checks no other field is encoded.
FIELDS: dict[Kind, tuple[str, ...]] = {
    Kind.NOINS_CERT: ("rcv", "meta", "lv"),
    Kind.SHORT_TERM_CERT: ("rcv", "meta", "slv"),
    Kind.NOINS_I2V_PAYLOAD: ("cert", "sig1", "sig2", "sks", "r2"),
    Kind.SIMPL_CERT: ("rcv", "meta", "lv"),
    Kind.SIMPL_I2V_PAYLOAD: ("cert", "sig"),
    Kind.EXPLICIT_CERT: ("pkv", "meta", "lv", "sig"),
    Kind.EXPLICIT_I2V_PAYLOAD: ("cert", "r"),
    Kind.V2X_AUTH: ("cert", "pks_j", "com", "resp", "message", "signature"),
    Kind.SIMPL_V2X: ("cert", "message", "signature"),
    Kind.EXPLICIT_V2X: ("cert", "message", "signature"),
    Kind.I2V_MESSAGE: ("inner_kind", "blob"),
    Kind.I2V_BATCH: ("entries",),
}

_CLASSES = {
    cls.KIND: cls
    for cls in (
        NoinsCertificate, ShortTermCert, NoinsI2VPayload, SimplCertificate,
        SimplI2VPayload, ExplicitCertificate, ExplicitI2VPayload, V2XAuthMessage,
        SimplV2XMessage, ExplicitV2XMessage, I2VMessage, I2VBatch,
    )
}


def explicit_tbs(pkv: Point, meta: Metadata, lv: bytes) -> bytes:
    return pkv.encode() + meta.to_bytes() + lv


def v2x_signed_bytes(cert, message: bytes) -> bytes:
    """Sender signs the encoded certificate together with the message."""
    return encode(cert) + message


# --------------------------------------------------------------------------
# sizes
# --------------------------------------------------------------------------


def size_of(
    kind: Kind,
    group: GroupParams,
    *,
    message_len: int = 0,
    inner: Optional[Kind] = None,
    entries: int = 0,
    entry_kind: Optional[Kind] = None,
    rsa_sizes: bool = False,
) -> int:
    """Encoded length of ``kind`` on ``group``.

    ``message_len`` applies to V2X kinds, ``inner`` to I2V messages, and
    ``entries``/``entry_kind`` to batches.  ``rsa_sizes`` prices the explicit
    baseline as RSA-2048 throughout: certificate public key, CA signature and
    message signature (accounting only; nothing is encoded that way).
    """
    P, S = group.point_len, group.scalar_len
    sig = 2 * S
    rsa_sig = RSA_SIZES["signature"] if rsa_sizes else sig
    rsa_pk = RSA_SIZES["public_key"] if rsa_sizes else P
    rec = lambda k: size_of(k, group, rsa_sizes=rsa_sizes)  # noqa: E731
    body = {
        Kind.NOINS_CERT: lambda: P + META_LEN + LV_LEN,
        Kind.SHORT_TERM_CERT: lambda: P + META_LEN + SLV_LEN,
        Kind.NOINS_I2V_PAYLOAD: lambda: rec(Kind.NOINS_CERT) + 4 * S,
        Kind.SIMPL_CERT: lambda: P + META_LEN + BASELINE_LV_LEN,
        Kind.SIMPL_I2V_PAYLOAD: lambda: rec(Kind.SIMPL_CERT) + S,
        Kind.EXPLICIT_CERT: lambda: rsa_pk + META_LEN + BASELINE_LV_LEN + rsa_sig,
        Kind.EXPLICIT_I2V_PAYLOAD: lambda: rec(Kind.EXPLICIT_CERT) + S,
        Kind.V2X_AUTH: lambda: rec(Kind.SHORT_TERM_CERT) + 2 * P + S
        + MSG_LEN_PREFIX + message_len + sig,
        Kind.SIMPL_V2X: lambda: rec(Kind.SIMPL_CERT) + MSG_LEN_PREFIX + message_len + sig,
        Kind.EXPLICIT_V2X: lambda: rec(Kind.EXPLICIT_CERT) + MSG_LEN_PREFIX + message_len + rsa_sig,
    }
    if kind == Kind.I2V_MESSAGE:
        if inner is None:
            raise ValueError("I2V message size needs the inner payload kind")
        return HEADER_LEN + 1 + P + rec(inner) + MAC_LEN
    if kind == Kind.I2V_BATCH:
        if entries and entry_kind is None:
            raise ValueError("batch size needs the entry payload kind")
        per = BATCH_ENTRY_OVERHEAD + (
            size_of(Kind.I2V_MESSAGE, group, inner=entry_kind, rsa_sizes=rsa_sizes)
            if entries else 0
        )
        return HEADER_LEN + BATCH_COUNT_LEN + entries * per
    return HEADER_LEN + body[Kind(kind)]()


# --------------------------------------------------------------------------
# codecs
# --------------------------------------------------------------------------


class _Reader:
    def __init__(self, data: bytes, group: GroupParams):
        self.data = memoryview(bytes(data))
        self.pos = 0
        self.group = group

    def take(self, n: int) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise FormatError("truncated buffer")
        out = bytes(self.data[self.pos : self.pos + n])
        self.pos += n
        return out

    def u(self, n: int) -> int:
        return int.from_bytes(self.take(n), "big")

    def point(self) -> Point:
        return self.group.decode_point(self.take(self.group.point_len))

    def scalar(self) -> Scalar:
        return self.group.decode_scalar(self.take(self.group.scalar_len))

    def meta(self) -> Metadata:
        return Metadata.from_bytes(self.take(META_LEN))

    def sig(self) -> bytes:
        return self.take(2 * self.group.scalar_len)

    def nested(self, kind: Kind):
        return _decode_at(self, kind)

    def finish(self) -> None:
        if self.pos != len(self.data):
            raise FormatError("trailing bytes after object")


def _group_of(obj) -> GroupParams:
    for f in fields(obj):
        v = getattr(obj, f.name)
        if isinstance(v, Point):
            return v.group
        if hasattr(v, "KIND"):
            return _group_of(v)
    raise ValueError(f"cannot infer group for {type(obj).__name__}")


def _msg(message: bytes) -> bytes:
    return len(message).to_bytes(MSG_LEN_PREFIX, "big") + message


def _body(obj) -> bytes:
    k = obj.KIND
    if k == Kind.I2V_MESSAGE:
        return bytes([obj.inner_kind]) + obj.blob
    if k == Kind.I2V_BATCH:
        out = [len(obj.entries).to_bytes(BATCH_COUNT_LEN, "big")]
        for idx, msg in obj.entries:
            enc = encode(msg)
            out += [idx.to_bytes(4, "big"), len(enc).to_bytes(2, "big"), enc]
        return b"".join(out)
    es = _group_of(obj).encode_scalar
    if k == Kind.NOINS_CERT:
        _check_len(obj.lv, LV_LEN, "lv")
        return obj.rcv.encode() + obj.meta.to_bytes() + obj.lv
    if k == Kind.SHORT_TERM_CERT:
        _check_len(obj.slv, SLV_LEN, "slv")
        return obj.rcv.encode() + obj.meta.to_bytes() + obj.slv
    if k == Kind.NOINS_I2V_PAYLOAD:
        return encode(obj.cert) + b"".join(es(v) for v in (obj.sig1, obj.sig2, obj.sks, obj.r2))
    if k == Kind.SIMPL_CERT:
        _check_len(obj.lv, BASELINE_LV_LEN, "lv")
        return obj.rcv.encode() + obj.meta.to_bytes() + obj.lv
    if k == Kind.SIMPL_I2V_PAYLOAD:
        return encode(obj.cert) + es(obj.sig)
    if k == Kind.EXPLICIT_CERT:
        _check_len(obj.lv, BASELINE_LV_LEN, "lv")
        return obj.tbs() + obj.sig
    if k == Kind.EXPLICIT_I2V_PAYLOAD:
        return encode(obj.cert) + es(obj.r)
    if k == Kind.V2X_AUTH:
        return (encode(obj.cert) + obj.pks_j.encode() + obj.com.encode()
                + es(obj.resp) + _msg(obj.message) + obj.signature)
    if k in (Kind.SIMPL_V2X, Kind.EXPLICIT_V2X):
        return encode(obj.cert) + _msg(obj.message) + obj.signature
    raise ValueError(f"no codec for {k!r}")  # pragma: no cover


def _check_len(value: bytes, n: int, name: str) -> None:
    if len(value) != n:
        raise ValueError(f"{name} must be {n} bytes, got {len(value)}")


def encode(obj: WireObject) -> bytes:
    return bytes([obj.KIND, VERSION]) + _body(obj)


def _decode_at(r: _Reader, expect: Optional[Kind]):
    kind_byte, version = r.u(1), r.u(1)
    try:
        kind = Kind(kind_byte)
    except ValueError:
        raise FormatError(f"unknown kind tag {kind_byte:#04x}") from None
    if expect is not None and kind != expect:
        raise FormatError(f"expected {expect.name}, got {kind.name}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    g = r.group
    if kind == Kind.NOINS_CERT:
        return NoinsCertificate(r.point(), r.meta(), r.take(LV_LEN))
    if kind == Kind.SHORT_TERM_CERT:
        return ShortTermCert(r.point(), r.meta(), r.take(SLV_LEN))
    if kind == Kind.NOINS_I2V_PAYLOAD:
        return NoinsI2VPayload(r.nested(Kind.NOINS_CERT), r.scalar(), r.scalar(), r.scalar(), r.scalar())
    if kind == Kind.SIMPL_CERT:
        return SimplCertificate(r.point(), r.meta(), r.take(BASELINE_LV_LEN))
    if kind == Kind.SIMPL_I2V_PAYLOAD:
        return SimplI2VPayload(r.nested(Kind.SIMPL_CERT), r.scalar())
    if kind == Kind.EXPLICIT_CERT:
        return ExplicitCertificate(r.point(), r.meta(), r.take(BASELINE_LV_LEN), r.sig())
    if kind == Kind.EXPLICIT_I2V_PAYLOAD:
        return ExplicitI2VPayload(r.nested(Kind.EXPLICIT_CERT), r.scalar())
    if kind == Kind.V2X_AUTH:
        cert, pks_j, com, resp = r.nested(Kind.SHORT_TERM_CERT), r.point(), r.point(), r.scalar()
        return V2XAuthMessage(cert, pks_j, com, resp, r.take(r.u(MSG_LEN_PREFIX)), r.sig())
    if kind in (Kind.SIMPL_V2X, Kind.EXPLICIT_V2X):
        inner = Kind.SIMPL_CERT if kind == Kind.SIMPL_V2X else Kind.EXPLICIT_CERT
        cls = _CLASSES[kind]
        return cls(r.nested(inner), r.take(r.u(MSG_LEN_PREFIX)), r.sig())
    if kind == Kind.I2V_MESSAGE:
        inner_byte = r.u(1)
        try:
            inner = Kind(inner_byte)
        except ValueError:
            raise FormatError(f"unknown inner kind {inner_byte:#04x}") from None
        if inner not in (Kind.NOINS_I2V_PAYLOAD, Kind.SIMPL_I2V_PAYLOAD, Kind.EXPLICIT_I2V_PAYLOAD):
            raise FormatError("I2V message must wrap an issuance payload")
        n = g.point_len + size_of(inner, g) + MAC_LEN
        return I2VMessage(inner, r.take(n))
    if kind == Kind.I2V_BATCH:
        entries = []
        for _ in range(r.u(BATCH_COUNT_LEN)):
            idx, n = r.u(4), r.u(2)
            sub = _Reader(r.take(n), g)
            entries.append((idx, _decode_at(sub, Kind.I2V_MESSAGE)))
            sub.finish()
        return I2VBatch(tuple(entries))
    raise FormatError(f"no codec for {kind!r}")  # pragma: no cover


def decode(data: bytes, group: GroupParams, expect: Optional[Kind] = None) -> WireObject:
    """Decode one complete object; trailing bytes are a format error."""
    r = _Reader(data, group)
    obj = _decode_at(r, expect)
    r.finish()
    return obj


def kind_of(obj: WireObject) -> Kind:
    return obj.KIND
