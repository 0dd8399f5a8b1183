"""Receiver side: proof checks, public-key reconstruction, V2X verification.

``verify_v2x`` runs a fixed pipeline and reports the first failing stage:

    format -> expiry -> untrusted_pks -> proof -> signature

Reconstruction of ``pkv_j`` sits between proof and signature and cannot fail
on its own; a wrong ``pkv_j`` shows up as a signature failure.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Union

from . import schnorr
from .ca import h1_of, h2_of, simpl_hash
from .errors import FormatError
from .group import GroupParams, Point, Scalar
from .vehicle import proof_challenge
from .wire import (
    ExplicitCertificate,
    ExplicitV2XMessage,
    Kind,
    ShortTermCert,
    SimplCertificate,
    SimplV2XMessage,
    V2XAuthMessage,
    decode,
    v2x_signed_bytes,
)


class Reason(str, Enum):
    ACCEPT = "accept"
    FORMAT = "format"
    EXPIRY = "expiry"
    UNTRUSTED_PKS = "untrusted_pks"
    PROOF = "proof"
    SIGNATURE = "signature"


STAGES = (Reason.FORMAT, Reason.EXPIRY, Reason.UNTRUSTED_PKS, Reason.PROOF, Reason.SIGNATURE)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    reason: Reason
    pkv: Optional[Point] = None

    def __bool__(self) -> bool:
        return self.accepted


@dataclass(frozen=True)
class TrustedKey:
    pks: Point
    cohort_id: str
    expiry: int


def _wall_clock() -> int:
    return int(time.time())


@dataclass(frozen=True)
class TrustStore:
    """Receiver trust anchors.  Immutable; ``with_key`` returns a new store."""

    pkc: Point
    keys: tuple[TrustedKey, ...] = ()
    clock: Callable[[], int] = field(default=_wall_clock, compare=False)
    id_ca: bytes = b"CA01"

    @property
    def group(self) -> GroupParams:
        return self.pkc.group

    def with_key(self, pks: Point, cohort_id: str, expiry: int) -> "TrustStore":
        return replace(self, keys=self.keys + (TrustedKey(pks, cohort_id, expiry),))

    def with_clock(self, clock: Callable[[], int]) -> "TrustStore":
        return replace(self, clock=clock)

    def live_keys(self, now: int) -> list[TrustedKey]:
        return [k for k in self.keys if now < k.expiry]


def verify_proof(com: Point, resp: Scalar, pks_j: Point, pks: Point) -> bool:
    group = pks.group
    delta = pks_j - pks
    cha = proof_challenge(group, com, delta)
    return group.base_mul(resp) == group.msm([(cha, delta), (1, com)])


def reconstruct_pkv(cert: ShortTermCert, pks_j: Point, pkc: Point) -> Point:
    h1 = h1_of(cert.meta, pkc)
    h2 = h2_of(cert.rcv, cert.slv, pks_j)
    return pkc.group.msm([(1, cert.rcv), (h1, pkc), (h2, pks_j)])


def verify_v2x(
    msg: Union[V2XAuthMessage, bytes],
    trust: TrustStore,
) -> Verdict:
    if not isinstance(msg, V2XAuthMessage):
        try:
            msg = decode(msg, trust.group, expect=Kind.V2X_AUTH)
        except FormatError:
            return Verdict(False, Reason.FORMAT)
    now = trust.clock()
    if not msg.cert.meta.valid_at(now):
        return Verdict(False, Reason.EXPIRY)
    live = trust.live_keys(now)
    if not live:
        return Verdict(False, Reason.UNTRUSTED_PKS)
    if not any(verify_proof(msg.com, msg.resp, msg.pks_j, k.pks) for k in live):
        return Verdict(False, Reason.PROOF)
    pkv = reconstruct_pkv(msg.cert, msg.pks_j, trust.pkc)
    if not schnorr.verify(trust.group, pkv, msg.signed_bytes(), msg.signature):
        return Verdict(False, Reason.SIGNATURE, pkv)
    return Verdict(True, Reason.ACCEPT, pkv)


# --------------------------------------------------------------------------
# baselines
# --------------------------------------------------------------------------


def verify_simpl_receiver(cert: SimplCertificate, pkc: Point) -> Point:
    return cert.rcv + simpl_hash(cert, pkc) * pkc


def verify_explicit_receiver(cert: ExplicitCertificate, pkc: Point) -> bool:
    return schnorr.verify(pkc.group, pkc, cert.tbs(), cert.sig)


def verify_simpl_v2x(msg: SimplV2XMessage, pkc: Point) -> bool:
    pkv = verify_simpl_receiver(msg.cert, pkc)
    return schnorr.verify(pkc.group, pkv, v2x_signed_bytes(msg.cert, msg.message), msg.signature)


def verify_explicit_v2x(msg: ExplicitV2XMessage, pkc: Point) -> bool:
    if not verify_explicit_receiver(msg.cert, pkc):
        return False
    return schnorr.verify(
        pkc.group, msg.cert.pkv, v2x_signed_bytes(msg.cert, msg.message), msg.signature
    )
