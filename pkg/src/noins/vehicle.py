"""Vehicle role: credential acceptance and short-term pseudonym generation.

For each pseudonym ``j`` the vehicle draws fresh ``r3, r4, rho`` and computes::

    slv_j          = Linkage(lv, ID_CA, j)
    rcv_j          = rcv + r3*g
    sks_j, pks_j   = sks + rho, pks + rho*g
    com_j, resp_j  = r4*g, r4 + H("cha", g, com_j, rho*g) * rho
    sig2_j         = r2 + H("h2", rcv_j, slv_j, pks_j) * sks_j
    skv_j          = x_hat + sig1 + sig2_j + r3

so that ``skv_j*g == rcv_j + h1*pkc + h2_j*pks_j``, which is exactly what a
receiver reconstructs.  The private key is built from the *sanitized*
``sig2_j``; using the CA-issued ``sig2`` instead leaves a residual of
``(h2*sks - h2_j*sks_j)*g`` and the receiver would reject every pseudonym.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import schnorr
from .butterfly import CocoonKeyPair
from .ca import h1_of, h2_of, simpl_hash, unwrap_i2v
from .errors import InvalidCredential, PolicyError
from .group import GroupParams, Point, Scalar, default_rng
from .linkage import LinkageContext, derive_slv
from .wire import (
    ExplicitCertificate,
    I2VMessage,
    NoinsCertificate,
    NoinsI2VPayload,
    ExplicitV2XMessage,
    ShortTermCert,
    SimplCertificate,
    SimplV2XMessage,
    V2XAuthMessage,
    v2x_signed_bytes,
)


# --------------------------------------------------------------------------
# credentials
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CaCredential:
    cert: NoinsCertificate
    sig1: Scalar
    sig2: Scalar
    sks: Scalar
    r2: Scalar
    x_hat: Scalar
    pkc: Point
    pks: Point

    @property
    def group(self) -> GroupParams:
        return self.pkc.group

    @cached_property
    def h1(self) -> Scalar:
        return h1_of(self.cert.meta, self.pkc)

    @cached_property
    def h2(self) -> Scalar:
        return h2_of(self.cert.rcv, self.cert.lv, self.pks)


def issuance_holds(payload: NoinsI2VPayload, x_hat: Scalar, pkc: Point, pks: Point) -> bool:
    """The vehicle-side issuance check, plus ``pks == sks*g``."""
    group = pkc.group
    cert = payload.cert
    if group.base_mul(payload.sks) != pks:
        return False
    lhs = group.base_mul(x_hat + payload.sig1 + payload.sig2)
    rhs = group.msm([
        (1, cert.rcv),
        (h1_of(cert.meta, pkc), pkc),
        (h2_of(cert.rcv, cert.lv, pks), pks),
    ])
    return lhs == rhs


def accept_credential(
    msg: I2VMessage, cocoon: CocoonKeyPair, pkc: Point, pks: Point
) -> CaCredential:
    """Decrypt an I2V message and keep it only if the issuance check passes.

    Raises DecryptionError when the message is not for this cocoon key and
    InvalidCredential when it decrypts but does not verify.
    """
    group = pkc.group
    payload = unwrap_i2v(msg, cocoon.x_hat, group)
    if not isinstance(payload, NoinsI2VPayload):
        raise InvalidCredential(f"expected a NOINS payload, got {type(payload).__name__}")
    if not issuance_holds(payload, cocoon.x_hat, pkc, pks):
        raise InvalidCredential("issuance equation does not hold")
    return CaCredential(
        payload.cert, payload.sig1, payload.sig2, payload.sks, payload.r2,
        cocoon.x_hat, pkc, pks,
    )


@dataclass(frozen=True)
class BaselineKeys:
    """Long-lived key pair obtained through a SIMPL or explicit certificate."""

    cert: object
    skv: Scalar
    pkv: Point


def accept_simpl(msg: I2VMessage, cocoon: CocoonKeyPair, pkc: Point) -> BaselineKeys:
    group = pkc.group
    payload = unwrap_i2v(msg, cocoon.x_hat, group)
    cert: SimplCertificate = payload.cert
    skv = (cocoon.x_hat + payload.sig) % group.q
    pkv = group.base_mul(skv)
    if pkv != cert.rcv + simpl_hash(cert, pkc) * pkc:
        raise InvalidCredential("SIMPL reconstruction mismatch")
    return BaselineKeys(cert, skv, pkv)


def accept_explicit(msg: I2VMessage, cocoon: CocoonKeyPair, pkc: Point) -> BaselineKeys:
    group = pkc.group
    payload = unwrap_i2v(msg, cocoon.x_hat, group)
    cert: ExplicitCertificate = payload.cert
    if not schnorr.verify(group, pkc, cert.tbs(), cert.sig):
        raise InvalidCredential("CA signature on explicit certificate is invalid")
    skv = (cocoon.x_hat + payload.r) % group.q
    if group.base_mul(skv) != cert.pkv:
        raise InvalidCredential("explicit public key does not match x_hat + r")
    return BaselineKeys(cert, skv, cert.pkv)


def sign_simpl_v2x(keys: BaselineKeys, message: bytes, rng=None) -> SimplV2XMessage:
    sig = schnorr.sign(keys.pkv.group, keys.skv, v2x_signed_bytes(keys.cert, message), rng)
    return SimplV2XMessage(keys.cert, message, sig)


def sign_explicit_v2x(keys: BaselineKeys, message: bytes, rng=None) -> ExplicitV2XMessage:
    sig = schnorr.sign(keys.pkv.group, keys.skv, v2x_signed_bytes(keys.cert, message), rng)
    return ExplicitV2XMessage(keys.cert, message, sig)


# --------------------------------------------------------------------------
# short-term generation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GenerationPolicy:
    n_cs: int = 50
    trigger: str = "on-demand"
    lifetime_hint: Optional[str] = None

    def __post_init__(self):
        if self.n_cs < 1:
            raise ValueError("n_cs must be positive")
        if self.trigger not in ("on-demand", "pre-generate-all"):
            raise ValueError(f"unknown trigger {self.trigger!r}")


# Presets for common pseudonym-change habits; they only set policy fields.
TEMPLATES = {
    "one-time": GenerationPolicy(50, "pre-generate-all", "discard after one message"),
    "crowdsensing": GenerationPolicy(50, "on-demand", "change every 15 min"),
    "etsi": GenerationPolicy(50, "on-demand", "change every 5 min / 100 messages / 500 m"),
}


@dataclass(frozen=True)
class ShortTermBundle:
    j: int
    cert: ShortTermCert
    skv: Scalar
    pkv: Point
    sks_j: Scalar
    pks_j: Point
    com: Point
    resp: Scalar

    @property
    def group(self) -> GroupParams:
        return self.pkv.group


def randkey(sks: Scalar, pks: Point, rho: Scalar, rho_g: Optional[Point] = None):
    group = pks.group
    rho_g = rho_g if rho_g is not None else group.base_mul(rho)
    return (sks + rho) % group.q, pks + rho_g


def proof_challenge(group: GroupParams, com: Point, delta: Point) -> Scalar:
    return group.hash_to_scalar(b"cha", [group.g.encode(), com.encode(), delta.encode()])


def profgen(group: GroupParams, r4: Scalar, rho: Scalar, rho_g: Optional[Point] = None):
    """Fiat-Shamir proof of knowledge of ``rho`` with ``rho_g == rho*g``."""
    rho_g = rho_g if rho_g is not None else group.base_mul(rho)
    com = group.base_mul(r4)
    cha = proof_challenge(group, com, rho_g)
    return com, (r4 + cha * rho) % group.q


def sansig(rcv_j: Point, slv_j: bytes, sks_j: Scalar, pks_j: Point, r2: Scalar) -> Scalar:
    return (r2 + h2_of(rcv_j, slv_j, pks_j) * sks_j) % pks_j.group.q


def sanitized_signature(cred: CaCredential, bundle: ShortTermBundle) -> Scalar:
    """Recompute ``sig2_j`` for a bundle (diagnostics only; never transmitted)."""
    return sansig(bundle.cert.rcv, bundle.cert.slv, bundle.sks_j, bundle.pks_j, cred.r2)


def gen_short_term(
    cred: CaCredential,
    j: int,
    policy: GenerationPolicy,
    id_ca: bytes,
    rng=None,
) -> ShortTermBundle:
    if not 1 <= j <= policy.n_cs:
        raise PolicyError(f"pseudonym index {j} outside 1..{policy.n_cs}")
    group = cred.group
    g = group.g
    rng = rng or default_rng()
    slv = derive_slv(cred.cert.lv, LinkageContext(id_ca), j)
    r3 = group.random_scalar(rng)
    r4 = group.random_scalar(rng)
    rho = group.random_scalar(rng)

    rcv_j = cred.cert.rcv + group.base_mul(r3)
    rho_g = group.base_mul(rho)
    sks_j, pks_j = randkey(cred.sks, cred.pks, rho, rho_g)
    com, resp = profgen(group, r4, rho, rho_g)
    cert_j = ShortTermCert(rcv_j, cred.cert.meta, slv)
    sig2_j = sansig(rcv_j, slv, sks_j, pks_j, cred.r2)
    skv = (cred.x_hat + cred.sig1 + sig2_j + r3) % group.q
    return ShortTermBundle(j, cert_j, skv, group.mul(skv, g), sks_j, pks_j, com, resp)


def sign_v2x(bundle: ShortTermBundle, message: bytes, rng=None) -> V2XAuthMessage:
    sig = schnorr.sign(bundle.group, bundle.skv, v2x_signed_bytes(bundle.cert, message), rng)
    return V2XAuthMessage(bundle.cert, bundle.pks_j, bundle.com, bundle.resp, message, sig)


@dataclass
class PseudonymGenerator:
    """One credential plus its index counter.

    ``j`` allocation is the only contended state; it is guarded by a lock so
    concurrent callers never receive the same index.
    """

    cred: CaCredential
    policy: GenerationPolicy
    id_ca: bytes
    next_j: int = 1
    bundles: dict[int, ShortTermBundle] = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def remaining(self) -> int:
        return self.policy.n_cs - self.next_j + 1

    def _allocate(self) -> int:
        with self._lock:
            if self.next_j > self.policy.n_cs:
                raise PolicyError("credential exhausted: all n_cs pseudonyms generated")
            j = self.next_j
            self.next_j += 1
            return j

    def next(self, rng=None) -> ShortTermBundle:
        j = self._allocate()
        bundle = gen_short_term(self.cred, j, self.policy, self.id_ca, rng)
        self.bundles[j] = bundle
        return bundle

    def generate_all(self, rng=None) -> list[ShortTermBundle]:
        out = []
        while self.remaining:
            out.append(self.next(rng))
        return out
