"""Certificate authority: NOINS issuance plus the SIMPL and explicit baselines.

Hash inputs (all point/scalar fields in canonical wire encoding)::

    h1  = H("h1", meta, pkc)              NOINS immutable part
    h2  = H("h2", rcv, lv, pks)           NOINS sanitizable part
    h   = H("h1", enc(simpl cert), pkc)   SIMPL
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Union

from . import ecies, schnorr
from .butterfly import derive_cocoon_public
from .errors import DecryptionError, FormatError, IssuanceError
from .group import GroupParams, Point, Scalar, default_rng
from .linkage import LinkageContext, LinkageRegistry
from .wire import (
    BASELINE_LV_LEN,
    LV_LEN,
    VERSION,
    ExplicitCertificate,
    ExplicitI2VPayload,
    I2VBatch,
    I2VMessage,
    Kind,
    Metadata,
    NoinsCertificate,
    NoinsI2VPayload,
    SimplCertificate,
    SimplI2VPayload,
    decode,
    encode,
    explicit_tbs,
)

IssuancePayload = Union[NoinsI2VPayload, SimplI2VPayload, ExplicitI2VPayload]


@dataclass(frozen=True)
class CaKeyPair:
    skc: Scalar
    pkc: Point

    @classmethod
    def generate(cls, group: GroupParams, rng=None) -> "CaKeyPair":
        skc = group.random_scalar(rng, nonzero=True)
        return cls(skc, group.base_mul(skc))


@dataclass(frozen=True)
class SanitizationKeyPair:
    """Cohort-wide sanitization key pair shared with every member vehicle."""

    sks: Scalar
    pks: Point
    cohort_id: str
    expiry: int

    @classmethod
    def generate(cls, group: GroupParams, cohort_id: str, expiry: int, rng=None):
        sks = group.random_scalar(rng, nonzero=True)
        return cls(sks, group.base_mul(sks), cohort_id, expiry)


def h1_of(meta: Metadata, pkc: Point) -> Scalar:
    return pkc.group.hash_to_scalar(b"h1", [meta.to_bytes(), pkc.encode()])


def h2_of(rcv: Point, linkage: bytes, pks: Point) -> Scalar:
    return rcv.group.hash_to_scalar(b"h2", [rcv.encode(), linkage, pks.encode()])


def simpl_hash(cert: SimplCertificate, pkc: Point) -> Scalar:
    return pkc.group.hash_to_scalar(b"h1", [encode(cert), pkc.encode()])


def _check_cocoon(X_hat: Point) -> None:
    if X_hat.is_identity:
        raise IssuanceError("cocoon public key must not be the identity")


def issue_noins(
    X_hat: Point,
    meta: Metadata,
    lv: bytes,
    ca: CaKeyPair,
    san: SanitizationKeyPair,
    rng=None,
) -> NoinsI2VPayload:
    _check_cocoon(X_hat)
    if len(lv) != LV_LEN:
        raise ValueError("NOINS linkage value must be 16 bytes")
    group = X_hat.group
    q = group.q
    rng = rng or default_rng()
    r1 = group.random_scalar(rng)
    r2 = group.random_scalar(rng)
    rcv = group.msm([(1, X_hat), (r1 + r2, group.g)])
    cert = NoinsCertificate(rcv, meta, lv)
    sig1 = (r1 + h1_of(meta, ca.pkc) * ca.skc) % q
    sig2 = (r2 + h2_of(rcv, lv, san.pks) * san.sks) % q
    return NoinsI2VPayload(cert, sig1, sig2, san.sks, r2)


def issue_simpl(
    X_hat: Point, meta: Metadata, lv: bytes, ca: CaKeyPair, rng=None
) -> SimplI2VPayload:
    _check_cocoon(X_hat)
    if len(lv) != BASELINE_LV_LEN:
        raise ValueError("SIMPL linkage value must be 9 bytes")
    group = X_hat.group
    r = group.random_scalar(rng or default_rng())
    cert = SimplCertificate(X_hat + group.base_mul(r), meta, lv)
    sig = (r + simpl_hash(cert, ca.pkc) * ca.skc) % group.q
    return SimplI2VPayload(cert, sig)


def issue_explicit(
    X_hat: Point, meta: Metadata, lv: bytes, ca: CaKeyPair, rng=None
) -> ExplicitI2VPayload:
    _check_cocoon(X_hat)
    if len(lv) != BASELINE_LV_LEN:
        raise ValueError("explicit-certificate linkage value must be 9 bytes")
    group = X_hat.group
    rng = rng or default_rng()
    r = group.random_scalar(rng)
    pkv = X_hat + group.base_mul(r)
    sig = schnorr.sign(group, ca.skc, explicit_tbs(pkv, meta, lv), rng)
    return ExplicitI2VPayload(ExplicitCertificate(pkv, meta, lv, sig), r)


# --------------------------------------------------------------------------
# I2V wrapping
# --------------------------------------------------------------------------


def _aad(inner: Kind) -> bytes:
    return bytes([Kind.I2V_MESSAGE, VERSION, inner])


def wrap_i2v(payload: IssuancePayload, X_hat: Point, rng=None) -> I2VMessage:
    inner = payload.KIND
    blob = ecies.encrypt(X_hat, encode(payload), _aad(inner), rng)
    return I2VMessage(inner, blob)


def unwrap_i2v(msg: I2VMessage, x_hat: Scalar, group: GroupParams) -> IssuancePayload:
    """Decrypt and decode; raises DecryptionError or FormatError."""
    plain = ecies.decrypt(group, x_hat, msg.blob, _aad(msg.inner_kind))
    try:
        return decode(plain, group, expect=msg.inner_kind)
    except FormatError as exc:
        raise DecryptionError("decrypted payload is malformed") from exc


# --------------------------------------------------------------------------
# stateful CA
# --------------------------------------------------------------------------


@dataclass
class CertificateAuthority:
    """CA state: signing keys, cohort sanitization keys, issued linkage values.

    ``issue_batch`` is the single mutating entry point and is serialized by an
    internal lock.
    """

    group: GroupParams
    keys: CaKeyPair
    cohorts: dict[str, SanitizationKeyPair]
    id_ca: bytes
    issuer_id: int
    issued_lvs: list[bytes] = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @classmethod
    def create(
        cls,
        group: GroupParams,
        id_ca: bytes = b"CA01",
        issuer_id: int = 1,
        cohort_id: str = "default",
        cohort_expiry: int = 2**32 - 1,
        rng=None,
    ) -> "CertificateAuthority":
        rng = rng or default_rng()
        LinkageContext(id_ca)  # validates width
        keys = CaKeyPair.generate(group, rng)
        san = SanitizationKeyPair.generate(group, cohort_id, cohort_expiry, rng)
        return cls(group, keys, {cohort_id: san}, id_ca, issuer_id)

    def add_cohort(self, cohort_id: str, expiry: int, rng=None) -> SanitizationKeyPair:
        with self._lock:
            san = SanitizationKeyPair.generate(self.group, cohort_id, expiry, rng)
            self.cohorts[cohort_id] = san
            return san

    def _fresh_lv(self, rng, width: int) -> bytes:
        seen = set(self.issued_lvs)
        while True:
            lv = rng.randbytes(width)
            if lv not in seen:
                self.issued_lvs.append(lv)
                return lv

    def issue(
        self,
        X_hat: Point,
        meta: Metadata,
        approach: str = "noins",
        cohort_id: Optional[str] = None,
        rng=None,
    ) -> I2VMessage:
        rng = rng or default_rng()
        with self._lock:
            if approach == "noins":
                san = self.cohorts[cohort_id or next(iter(self.cohorts))]
                lv = self._fresh_lv(rng, LV_LEN)
                payload = issue_noins(X_hat, meta, lv, self.keys, san, rng)
            elif approach == "simpl":
                lv = self._fresh_lv(rng, BASELINE_LV_LEN)
                payload = issue_simpl(X_hat, meta, lv, self.keys, rng)
            elif approach == "explicit":
                lv = self._fresh_lv(rng, BASELINE_LV_LEN)
                payload = issue_explicit(X_hat, meta, lv, self.keys, rng)
            else:
                raise ValueError(f"unknown approach {approach!r}")
        return wrap_i2v(payload, X_hat, rng)

    def issue_batch(
        self,
        X: Point,
        seed: bytes,
        meta: Metadata,
        batch: int = 20,
        start_index: int = 0,
        approach: str = "noins",
        cohort_id: Optional[str] = None,
        rng=None,
    ) -> I2VBatch:
        """Expand caterpillar key ``X`` and issue one certificate per cocoon key.

        An index whose cocoon key is the identity (probability 1/q) is skipped;
        entries carry their index, so the vehicle is not confused by the gap.
        """
        entries = []
        for i in range(start_index, start_index + batch):
            X_hat = derive_cocoon_public(X, seed, i)
            if X_hat.is_identity:
                continue
            entries.append((i, self.issue(X_hat, meta, approach, cohort_id, rng)))
        return I2VBatch(tuple(entries))

    def registry(self, n_cs: int) -> LinkageRegistry:
        reg = LinkageRegistry(LinkageContext(self.id_ca), n_cs)
        for lv in self.issued_lvs:
            if len(lv) == LV_LEN:
                reg.add(lv)
        return reg

    def attribute(self, slv: bytes, n_cs: int) -> Optional[tuple[bytes, int]]:
        return self.registry(n_cs).attribute(slv)
