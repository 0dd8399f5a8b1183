"""On-disk formats for CA keys, receiver trust stores and vehicle keystores.

CA key file (binary, big-endian)::

    magic "NOCA" | version u8 | profile u8 | skc scalar | id_ca len u8 + bytes
    | issuer_id u32 | cohorts u16 x (id len u8 + utf8 | expiry u32 | sks scalar)
    | lvs u32 x (len u8 + bytes)

Trust store file (binary)::

    magic "NOTS" | version u8 | profile u8 | pkc point | id_ca len u8 + bytes
    | keys u16 x (pks point | cohort len u8 + utf8 | expiry u32)

Public points are recomputed from secrets on load, so they are not stored in
the CA file.  The vehicle keystore is JSON (hex strings, sorted keys).
"""

from __future__ import annotations

import json
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .butterfly import CaterpillarKeyPair
from .ca import CaKeyPair, CertificateAuthority, SanitizationKeyPair
from .errors import FormatError
from .group import PROFILES, GroupParams, Point, get_group
from .vehicle import CaCredential, ShortTermBundle
from .verification import TrustedKey, TrustStore
from .wire import Kind, ShortTermCert, decode, encode

FILE_VERSION = 1
CA_MAGIC = b"NOCA"
TRUST_MAGIC = b"NOTS"
_PROFILE_CODES = {name: i for i, name in enumerate(sorted(PROFILES))}
_PROFILE_NAMES = {i: name for name, i in _PROFILE_CODES.items()}


class _Buf:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("file truncated")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u(self, fmt: str) -> int:
        s = struct.Struct(">" + fmt)
        return s.unpack(self.take(s.size))[0]

    def short(self) -> bytes:
        return self.take(self.u("B"))

    def done(self) -> None:
        if self.pos != len(self.data):
            raise FormatError("trailing bytes in file")


def _short(b: bytes) -> bytes:
    if len(b) > 255:
        raise ValueError("field longer than 255 bytes")
    return bytes([len(b)]) + b


def _header(magic: bytes, group: GroupParams) -> bytes:
    return magic + bytes([FILE_VERSION, _PROFILE_CODES[group.profile]])


def _read_header(buf: _Buf, magic: bytes) -> GroupParams:
    if buf.take(4) != magic:
        raise FormatError(f"not a {magic.decode()} file")
    version = buf.u("B")
    if version != FILE_VERSION:
        raise FormatError(f"unsupported file version {version}")
    code = buf.u("B")
    if code not in _PROFILE_NAMES:
        raise FormatError(f"unknown profile code {code}")
    return get_group(_PROFILE_NAMES[code])


def write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


# --------------------------------------------------------------------------
# CA
# --------------------------------------------------------------------------


def dump_ca(ca: CertificateAuthority) -> bytes:
    g = ca.group
    out = [_header(CA_MAGIC, g), g.encode_scalar(ca.keys.skc), _short(ca.id_ca),
           struct.pack(">IH", ca.issuer_id, len(ca.cohorts))]
    for cid, san in ca.cohorts.items():
        out += [_short(cid.encode()), struct.pack(">I", san.expiry), g.encode_scalar(san.sks)]
    out.append(struct.pack(">I", len(ca.issued_lvs)))
    out += [_short(lv) for lv in ca.issued_lvs]
    return b"".join(out)


def load_ca(data: bytes) -> CertificateAuthority:
    buf = _Buf(data)
    g = _read_header(buf, CA_MAGIC)
    skc = g.decode_scalar(buf.take(g.scalar_len))
    id_ca = buf.short()
    issuer_id = buf.u("I")
    cohorts = {}
    for _ in range(buf.u("H")):
        cid = buf.short().decode()
        expiry = buf.u("I")
        sks = g.decode_scalar(buf.take(g.scalar_len))
        cohorts[cid] = SanitizationKeyPair(sks, g.base_mul(sks), cid, expiry)
    lvs = [buf.short() for _ in range(buf.u("I"))]
    buf.done()
    return CertificateAuthority(g, CaKeyPair(skc, g.base_mul(skc)), cohorts, id_ca, issuer_id, lvs)


def save_ca(path, ca: CertificateAuthority) -> None:
    write_atomic(path, dump_ca(ca))


def read_ca(path) -> CertificateAuthority:
    return load_ca(Path(path).read_bytes())


# --------------------------------------------------------------------------
# trust store
# --------------------------------------------------------------------------


def trust_from_ca(ca: CertificateAuthority) -> TrustStore:
    keys = tuple(TrustedKey(s.pks, s.cohort_id, s.expiry) for s in ca.cohorts.values())
    return TrustStore(ca.keys.pkc, keys, id_ca=ca.id_ca)


def dump_trust(trust: TrustStore) -> bytes:
    g = trust.group
    out = [_header(TRUST_MAGIC, g), trust.pkc.encode(), _short(trust.id_ca),
           struct.pack(">H", len(trust.keys))]
    for k in trust.keys:
        out += [k.pks.encode(), _short(k.cohort_id.encode()), struct.pack(">I", k.expiry)]
    return b"".join(out)


def load_trust(data: bytes) -> TrustStore:
    buf = _Buf(data)
    g = _read_header(buf, TRUST_MAGIC)
    pkc = g.decode_point(buf.take(g.point_len))
    id_ca = buf.short()
    keys = []
    for _ in range(buf.u("H")):
        pks = g.decode_point(buf.take(g.point_len))
        cid = buf.short().decode()
        keys.append(TrustedKey(pks, cid, buf.u("I")))
    buf.done()
    return TrustStore(pkc, tuple(keys), id_ca=id_ca)


def save_trust(path, trust: TrustStore) -> None:
    write_atomic(path, dump_trust(trust))


def read_trust(path) -> TrustStore:
    return load_trust(Path(path).read_bytes())


# --------------------------------------------------------------------------
# vehicle keystore (JSON)
# --------------------------------------------------------------------------


def _pt(p: Point) -> str:
    return p.encode().hex()


@dataclass
class StoredCredential:
    cocoon_index: int
    cred: CaCredential
    id_ca: bytes
    n_cs: int = 50
    next_j: int = 1


@dataclass
class Keystore:
    group: GroupParams
    caterpillar: CaterpillarKeyPair
    credentials: list[StoredCredential] = field(default_factory=list)
    journal: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        g = self.group
        sc = g.encode_scalar
        doc = {
            "version": FILE_VERSION,
            "profile": g.profile,
            "caterpillar": {
                "x": sc(self.caterpillar.x).hex(),
                "seed": self.caterpillar.expansion_seed.hex(),
            },
            "credentials": [
                {
                    "cocoon_index": s.cocoon_index,
                    "id_ca": s.id_ca.hex(),
                    "n_cs": s.n_cs,
                    "next_j": s.next_j,
                    "cert": encode(s.cred.cert).hex(),
                    "sig1": sc(s.cred.sig1).hex(),
                    "sig2": sc(s.cred.sig2).hex(),
                    "sks": sc(s.cred.sks).hex(),
                    "r2": sc(s.cred.r2).hex(),
                    "x_hat": sc(s.cred.x_hat).hex(),
                    "pkc": _pt(s.cred.pkc),
                    "pks": _pt(s.cred.pks),
                }
                for s in self.credentials
            ],
            "journal": self.journal,
        }
        return json.dumps(doc, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Keystore":
        try:
            doc = json.loads(text)
            if doc["version"] != FILE_VERSION:
                raise FormatError(f"unsupported keystore version {doc['version']}")
            g = get_group(doc["profile"])
            sc = lambda h: g.decode_scalar(bytes.fromhex(h))  # noqa: E731
            pt = lambda h: g.decode_point(bytes.fromhex(h))  # noqa: E731
            x = sc(doc["caterpillar"]["x"])
            cat = CaterpillarKeyPair(x, g.base_mul(x), bytes.fromhex(doc["caterpillar"]["seed"]))
            creds = []
            for c in doc["credentials"]:
                cert = decode(bytes.fromhex(c["cert"]), g, expect=Kind.NOINS_CERT)
                cred = CaCredential(cert, sc(c["sig1"]), sc(c["sig2"]), sc(c["sks"]), sc(c["r2"]),
                                    sc(c["x_hat"]), pt(c["pkc"]), pt(c["pks"]))
                creds.append(StoredCredential(c["cocoon_index"], cred, bytes.fromhex(c["id_ca"]),
                                              c["n_cs"], c["next_j"]))
            return cls(g, cat, creds, list(doc.get("journal", [])))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed keystore: {exc}") from exc


def save_keystore(path, ks: Keystore) -> None:
    write_atomic(path, ks.to_json().encode())


def read_keystore(path) -> Keystore:
    return Keystore.from_json(Path(path).read_text())


# --------------------------------------------------------------------------
# bundles (JSON; holds the short-term private key)
# --------------------------------------------------------------------------


def bundle_to_json(b: ShortTermBundle, credential: Optional[int] = None) -> str:
    g = b.group
    doc = {
        "version": FILE_VERSION,
        "profile": g.profile,
        "credential": credential,
        "j": b.j,
        "cert": encode(b.cert).hex(),
        "skv": g.encode_scalar(b.skv).hex(),
        "sks_j": g.encode_scalar(b.sks_j).hex(),
        "pks_j": _pt(b.pks_j),
        "com": _pt(b.com),
        "resp": g.encode_scalar(b.resp).hex(),
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


def bundle_from_json(text: str) -> ShortTermBundle:
    try:
        doc = json.loads(text)
        g = get_group(doc["profile"])
        cert: ShortTermCert = decode(bytes.fromhex(doc["cert"]), g, expect=Kind.SHORT_TERM_CERT)
        skv = g.decode_scalar(bytes.fromhex(doc["skv"]))
        return ShortTermBundle(
            doc["j"], cert, skv, g.base_mul(skv),
            g.decode_scalar(bytes.fromhex(doc["sks_j"])),
            g.decode_point(bytes.fromhex(doc["pks_j"])),
            g.decode_point(bytes.fromhex(doc["com"])),
            g.decode_scalar(bytes.fromhex(doc["resp"])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed bundle file: {exc}") from exc

