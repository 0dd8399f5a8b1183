"""Executable attacker strategies for the four security games.

Negative games (immutability, fraud, forgery) should record zero successes;
positive controls must succeed, which shows the harness can detect a win.
Linkability judges should land at the 1/2 prior.

Toy-profile exhaustive checks work at the level of keys: over a 509-element
group a Schnorr challenge collides with probability 1/509 per attempt, so a
signature-level sweep would be dominated by hash collisions that say nothing
about the scheme.  The key-level question (which candidate private keys
satisfy ``skv*g == pkv`` for the receiver-reconstructed ``pkv``) is exact.
"""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import kernels, schnorr
from .butterfly import CaterpillarKeyPair, derive_cocoon_private
from .ca import CertificateAuthority, h1_of, h2_of
from .group import GroupParams, Point, Scalar, ToyGroup
from .linkage import LinkageContext, LinkageRegistry
from .vehicle import (
    CaCredential,
    GenerationPolicy,
    PseudonymGenerator,
    ShortTermBundle,
    accept_credential,
    gen_short_term,
    proof_challenge,
    sign_v2x,
)
from .verification import TrustStore, reconstruct_pkv, verify_v2x
from .wire import Metadata, ShortTermCert, V2XAuthMessage, v2x_signed_bytes

GAMES = ("immutability", "unlinkability", "fraud", "forgery")


@dataclass(frozen=True)
class GameTranscript:
    game: str
    strategy: str
    trials: int
    successes: int
    seed: Optional[int] = None
    note: str = ""

    def __post_init__(self):
        if self.game not in GAMES:
            raise ValueError(f"unknown game {self.game!r}")
        if not 0 <= self.successes <= self.trials:
            raise ValueError("successes must lie in [0, trials]")

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rate"] = self.rate
        return d


# --------------------------------------------------------------------------
# world fixture
# --------------------------------------------------------------------------

NOW = 1_700_000_000


@dataclass
class World:
    """One CA, its trust store, and helpers to enrol vehicles."""

    group: GroupParams
    ca: CertificateAuthority
    trust: TrustStore
    meta: Metadata
    policy: GenerationPolicy = field(default_factory=GenerationPolicy)

    @classmethod
    def create(cls, group: GroupParams, rng, now: int = NOW, n_cs: int = 50) -> "World":
        ca = CertificateAuthority.create(group, rng=rng)
        san = next(iter(ca.cohorts.values()))
        trust = TrustStore(ca.keys.pkc).with_key(san.pks, san.cohort_id, san.expiry)
        trust = trust.with_clock(lambda: now)
        meta = Metadata(ca.issuer_id, now - 3600, now + 7 * 86400)
        return cls(group, ca, trust, meta, GenerationPolicy(n_cs))

    @property
    def pks(self) -> Point:
        return next(iter(self.ca.cohorts.values())).pks

    def enroll(self, rng, index: int = 0) -> CaCredential:
        cat = CaterpillarKeyPair.generate(self.group, rng)
        cocoon = derive_cocoon_private(cat, index)
        while cocoon.X_hat.is_identity:  # probability 1/q; only reachable on toy
            index += 1
            cocoon = derive_cocoon_private(cat, index)
        msg = self.ca.issue(cocoon.X_hat, self.meta, rng=rng)
        return accept_credential(msg, cocoon, self.ca.keys.pkc, self.pks)

    def generator(self, cred: CaCredential) -> PseudonymGenerator:
        return PseudonymGenerator(cred, self.policy, self.ca.id_ca)

    def bundle(self, cred: CaCredential, j: int, rng) -> ShortTermBundle:
        return gen_short_term(cred, j, self.policy, self.ca.id_ca, rng)


def other_meta(meta: Metadata, rng) -> Metadata:
    """A different but still currently-valid metadata record."""
    while True:
        cand = replace(
            meta,
            validity_end=meta.validity_end + rng.randrange(1, 10**6),
            psid=rng.randrange(1 << 16),
        )
        if cand != meta:
            return cand


def _accepts(world: World, msg: V2XAuthMessage) -> bool:
    return verify_v2x(msg, world.trust).accepted


# --------------------------------------------------------------------------
# game 1: immutability
# --------------------------------------------------------------------------


def _sig1_candidates(cred: CaCredential, target_meta: Metadata) -> dict[str, Callable]:
    group = cred.group
    h1_a = h1_of(target_meta, cred.pkc)
    return {
        "reuse": lambda rng: cred.sig1,
        "random": lambda rng: group.random_scalar(rng),
        # sig1 + (h1_A - h1) * guess: correct iff guess == skc
        "delta-shift": lambda rng: (cred.sig1 + (h1_a - cred.h1) * group.random_scalar(rng)) % group.q,
    }


IMMUTABILITY_STRATEGIES = ("reuse", "random", "delta-shift")


def play_immutability(
    world: World,
    cred: CaCredential,
    target_meta: Metadata,
    trials: int,
    strategy: str,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Holder of a genuine credential tries to ship a pseudonym under other metadata."""
    if target_meta == cred.cert.meta:
        raise ValueError("target metadata must differ from the issued metadata")
    rng = random.Random(seed)
    pick = _sig1_candidates(cred, target_meta)[strategy]
    forged = replace(cred, cert=replace(cred.cert, meta=target_meta))
    wins = 0
    for t in range(trials):
        cand = replace(forged, sig1=pick(rng))
        bundle = world.bundle(cand, t % world.policy.n_cs + 1, rng)
        wins += _accepts(world, sign_v2x(bundle, b"immutability", rng))
    return GameTranscript("immutability", strategy, trials, wins, seed)


# --------------------------------------------------------------------------
# game 2: unlinkability
# --------------------------------------------------------------------------


Judge = Callable[[ShortTermBundle, ShortTermBundle], bool]


def _judge_point_distance(a: ShortTermBundle, b: ShortTermBundle) -> bool:
    # "close" reconstruction values are guessed to share a vehicle; the
    # threshold splits uniformly random pairs in half
    ea, eb = a.cert.rcv.encode()[1:], b.cert.rcv.encode()[1:]
    span = 1 << (8 * len(ea))
    return abs(int.from_bytes(ea, "big") - int.from_bytes(eb, "big")) < (1 - 2**-0.5) * span


def _judge_hash_prefix(a: ShortTermBundle, b: ShortTermBundle) -> bool:
    return (a.cert.slv[0] >> 7) == (b.cert.slv[0] >> 7)


def _judge_pks_cluster(a: ShortTermBundle, b: ShortTermBundle) -> bool:
    # same cohort key underneath: test a bit of pks_a - pks_b
    return (a.pks_j - b.pks_j).encode()[-1] & 1 == 0


JUDGES: dict[str, Judge] = {
    "point-distance": _judge_point_distance,
    "hash-prefix": _judge_hash_prefix,
    "pks-cluster": _judge_pks_cluster,
}


def lv_judge(ca: CertificateAuthority, n_cs: int = 50) -> Judge:
    """Positive control: a judge holding the CA's linkage-value registry."""
    registry = LinkageRegistry(LinkageContext(ca.id_ca), n_cs)

    def lookup(slv):
        hit = registry.attribute(slv)
        if hit is None:  # pick up linkage values issued since the last call
            for lv in ca.issued_lvs[len(registry.lvs):]:
                registry.add(lv)
            hit = registry.attribute(slv)
        return hit

    def judge(a, b):
        ra, rb = lookup(a.cert.slv), lookup(b.cert.slv)
        return ra is not None and rb is not None and ra[0] == rb[0]

    return judge


class PairSource:
    """Fresh, never-reused pseudonym pairs so that trials are independent.

    A small fleet of enrolled vehicles is kept; a vehicle whose credential is
    used up is replaced by a newly enrolled one.
    """

    def __init__(self, world: World, rng, fleet: int = 8):
        if fleet < 2:
            raise ValueError("need at least two vehicles")
        self.world = world
        self.rng = rng
        self.fleet = [self._fresh() for _ in range(fleet)]

    def _fresh(self) -> PseudonymGenerator:
        return self.world.generator(self.world.enroll(self.rng))

    def _take(self, slot: int) -> ShortTermBundle:
        if self.fleet[slot].remaining == 0:
            self.fleet[slot] = self._fresh()
        return self.fleet[slot].next(self.rng)

    def pair(self, same: bool) -> tuple[ShortTermBundle, ShortTermBundle]:
        if same:
            slot = self.rng.randrange(len(self.fleet))
            if self.fleet[slot].remaining < 2:
                self.fleet[slot] = self._fresh()
            return self._take(slot), self._take(slot)
        sa, sb = self.rng.sample(range(len(self.fleet)), 2)
        return self._take(sa), self._take(sb)


def play_linkability(
    world: World,
    judges: dict[str, Judge],
    trials: int,
    seed: Optional[int] = None,
) -> dict[str, GameTranscript]:
    """Two-world game with prior 1/2; ``successes`` counts correct guesses.

    Every judge sees the same pairs.  Even trials are same-vehicle pairs, odd
    trials different-vehicle pairs, and the order inside a pair is shuffled.
    """
    rng = random.Random(seed)
    source = PairSource(world, rng)
    correct = dict.fromkeys(judges, 0)
    for t in range(trials):
        same = t % 2 == 0
        a, b = source.pair(same)
        if rng.random() < 0.5:
            a, b = b, a
        for name, judge in judges.items():
            correct[name] += judge(a, b) == same
    return {
        name: GameTranscript("unlinkability", name, trials, correct[name], seed)
        for name in judges
    }


def linkability_band(trials: int, k: float = 3.0) -> tuple[float, float]:
    sigma = 0.5 / trials**0.5
    return 0.5 - k * sigma, 0.5 + k * sigma


# --------------------------------------------------------------------------
# game 3: fraud
# --------------------------------------------------------------------------

FRAUD_STRATEGIES = ("random-signature", "replay-other-message", "own-key", "maul")


def play_fraud(
    world: World,
    victim: ShortTermBundle,
    trials: int,
    strategy: str,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Attacker holds the victim's public bundle and a signing oracle on it."""
    rng = random.Random(seed)
    group = world.group
    sig_len = schnorr.signature_len(group)
    wins = 0
    for t in range(trials):
        target = b"fraud-%d" % t
        seen = sign_v2x(victim, b"oracle-%d" % t, rng)  # oracle query
        if strategy == "random-signature":
            sig = rng.randbytes(sig_len)
        elif strategy == "replay-other-message":
            sig = seen.signature
        elif strategy == "own-key":
            sig = schnorr.sign(group, group.random_scalar(rng), v2x_signed_bytes(victim.cert, target), rng)
        elif strategy == "maul":
            half = group.scalar_len
            s = (group.decode_scalar(seen.signature[half:]) + rng.randrange(1, group.q)) % group.q
            sig = seen.signature[:half] + group.encode_scalar(s)
        else:
            raise ValueError(f"unknown fraud strategy {strategy!r}")
        wins += _accepts(world, replace(seen, message=target, signature=sig))
    return GameTranscript("fraud", strategy, trials, wins, seed)


def play_exact_replay(world: World, victim: ShortTermBundle, trials: int,
                      seed: Optional[int] = None) -> GameTranscript:
    """Re-sending an observed message verbatim is accepted: replay is out of model."""
    observed = sign_v2x(victim, b"observed", random.Random(seed))
    wins = sum(_accepts(world, observed) for _ in range(trials))
    return GameTranscript("fraud", "exact-replay", trials, wins, seed,
                          note="accepted by design; replay protection is not part of the scheme")


# --------------------------------------------------------------------------
# game 4: forgery
# --------------------------------------------------------------------------

FORGERY_STRATEGIES = ("rerandomize", "mix-and-match")


@dataclass(frozen=True)
class ForgeryAttempt:
    cert: ShortTermCert
    pks: Point
    skv: Scalar

    def wins(self, pkc: Point) -> bool:
        """Both game conditions: ``pkv = skv*g`` and ``pkv`` is what a receiver rebuilds."""
        group = pkc.group
        return group.base_mul(self.skv) == reconstruct_pkv(self.cert, self.pks, pkc)


def _public_scalars(b: ShortTermBundle, pkc: Point) -> list[Scalar]:
    return [
        b.resp,
        h1_of(b.cert.meta, pkc),
        h2_of(b.cert.rcv, b.cert.slv, b.pks_j),
    ]


def _forgery_attempt(strategy: str, published: list[ShortTermBundle], sks_a: Scalar,
                     pks_a: Point, pkc: Point, rng) -> ForgeryAttempt:
    group = pkc.group
    q = group.q
    src = rng.choice(published)
    r = group.random_scalar(rng)
    if strategy == "rerandomize":
        rcv = src.cert.rcv + group.base_mul(r)
        cert = ShortTermCert(rcv, src.cert.meta, src.cert.slv)
    elif strategy == "mix-and-match":
        other = rng.choice(published)
        cert = ShortTermCert(src.cert.rcv + group.base_mul(r), other.cert.meta, other.cert.slv)
    else:
        raise ValueError(f"unknown forgery strategy {strategy!r}")
    h2_a = h2_of(cert.rcv, cert.slv, pks_a)
    # best public guess for the unknown part, plus everything the attacker controls
    pub = _public_scalars(src, pkc)
    guess = sum(rng.randrange(-2, 3) * s for s in pub)
    return ForgeryAttempt(cert, pks_a, (guess + r + h2_a * sks_a) % q)


def play_forgery(
    world: World,
    published: list[ShortTermBundle],
    trials: int,
    strategy: str,
    seed: Optional[int] = None,
) -> GameTranscript:
    """Attacker sees published bundles and owns a sanitization key pair of its own."""
    rng = random.Random(seed)
    group = world.group
    sks_a = group.random_scalar(rng, nonzero=True)
    pks_a = group.base_mul(sks_a)
    pkc = world.ca.keys.pkc
    wins = sum(
        _forgery_attempt(strategy, published, sks_a, pks_a, pkc, rng).wins(pkc)
        for _ in range(trials)
    )
    return GameTranscript("forgery", strategy, trials, wins, seed)


def play_forgery_with_credential(world: World, cred: CaCredential, trials: int,
                                 seed: Optional[int] = None) -> GameTranscript:
    """Positive control: given a full credential the attacker is just a vehicle."""
    rng = random.Random(seed)
    wins = 0
    for t in range(trials):
        b = world.bundle(cred, t % world.policy.n_cs + 1, rng)
        ok = ForgeryAttempt(b.cert, b.pks_j, b.skv).wins(world.ca.keys.pkc)
        wins += ok and _accepts(world, sign_v2x(b, b"control", rng))
    return GameTranscript("forgery", "full-credential", trials, wins, seed,
                          note="positive control")


# --------------------------------------------------------------------------
# toy-profile exhaustive sweeps
# --------------------------------------------------------------------------


def _toy_logs(group: ToyGroup, target: Point, backend=None) -> set[int]:
    table = kernels.power_table(group.g.raw, group.p, group.q, backend)
    return {int(k) for k in kernels.discrete_logs(table, target.raw, backend)}


def accepting_keys(group: ToyGroup, pkv: Point, offset: Scalar = 0, backend=None) -> set[int]:
    """All ``s`` in ``[0, q)`` with ``(offset + s)*g == pkv``, by enumeration."""
    return {(k - offset) % group.q for k in _toy_logs(group, pkv, backend)}


@dataclass(frozen=True)
class ExhaustiveResult:
    game: str
    accepting: frozenset
    expected: frozenset
    attacker_hits: int
    note: str = ""

    @property
    def ok(self) -> bool:
        return self.accepting == self.expected and self.attacker_hits == 0


def exhaustive_immutability(world: World, cred: CaCredential, target_meta: Metadata,
                            rng, backend=None) -> ExhaustiveResult:
    """Sweep every sig1 for a pseudonym under ``target_meta``.

    The unique accepting value is ``r1 + h1_A*skc``; ``expected`` is computed
    from the CA secret purely as the oracle.  Reachable attacker values are the
    reused ``sig1`` and every delta-shift with a guess other than ``skc``.
    """
    group = world.group
    q = group.q
    bundle = world.bundle(replace(cred, cert=replace(cred.cert, meta=target_meta)), 1, rng)
    pkv_target = reconstruct_pkv(bundle.cert, bundle.pks_j, cred.pkc)
    # skv = x_hat + sig1 + sig2_j + r3; everything but sig1 is known to the holder
    rest = (bundle.skv - cred.sig1) % q
    accepting = accepting_keys(group, pkv_target, rest, backend)
    h1, h1_a = cred.h1, h1_of(target_meta, cred.pkc)
    r1 = (cred.sig1 - h1 * world.ca.keys.skc) % q
    expected = {(r1 + h1_a * world.ca.keys.skc) % q}
    reachable = {cred.sig1} | {
        (cred.sig1 + (h1_a - h1) * k) % q for k in range(q) if k != world.ca.keys.skc
    }
    note = "h1 collision: target metadata hashes like the original" if h1 == h1_a else ""
    return ExhaustiveResult("immutability", frozenset(accepting), frozenset(expected),
                            len(reachable & accepting), note)


def exhaustive_forgery(world: World, published: list[ShortTermBundle], rng,
                       backend=None) -> ExhaustiveResult:
    """Sweep every ``skv_A`` for a re-randomized copy of a published pseudonym.

    Exactly one key satisfies both conditions: ``skv_j - h2_j*sks_j + r + h2_A*sks_A``,
    which needs the victim's secret ``skv_j``.  ``attacker_hits`` counts how many
    combinations of public scalars land on it.
    """
    group = world.group
    q = group.q
    src = published[0]
    sks_a = group.random_scalar(rng, nonzero=True)
    pks_a = group.base_mul(sks_a)
    r = group.random_scalar(rng)
    cert = ShortTermCert(src.cert.rcv + group.base_mul(r), src.cert.meta, src.cert.slv)
    pkv = reconstruct_pkv(cert, pks_a, world.ca.keys.pkc)
    accepting = accepting_keys(group, pkv, 0, backend)
    h2_j = h2_of(src.cert.rcv, src.cert.slv, src.pks_j)
    h2_a = h2_of(cert.rcv, cert.slv, pks_a)
    expected = {(src.skv - h2_j * src.sks_j + r + h2_a * sks_a) % q}
    known = r + h2_a * sks_a
    hits = 0
    for b in published:
        for s in _public_scalars(b, world.ca.keys.pkc):
            for k in (-1, 1):
                hits += (known + k * s) % q in accepting
    return ExhaustiveResult("forgery", frozenset(accepting), frozenset(expected), hits,
                            "public-scalar guesses can coincide by chance in a 509-element group")


def exhaustive_fraud(world: World, victim: ShortTermBundle, backend=None) -> ExhaustiveResult:
    """Every signing key accepted for the victim's pseudonym: only ``skv_j`` itself."""
    group = world.group
    pkv = reconstruct_pkv(victim.cert, victim.pks_j, world.ca.keys.pkc)
    accepting = accepting_keys(group, pkv, 0, backend)
    publics = {victim.resp, *_public_scalars(victim, world.ca.keys.pkc)}
    return ExhaustiveResult("fraud", frozenset(accepting), frozenset({victim.skv}),
                            len(publics & accepting),
                            "public scalars can coincide with skv_j by chance in a 509-element group")


def exhaustive_rerandomization(group: ToyGroup, base: Point, backend=None) -> bool:
    """``r -> base + r*g`` hits every group element exactly once."""
    table = kernels.power_table(group.g.raw, group.p, group.q, backend)
    return kernels.orbit_size(table, base.raw, group.p, backend) == group.q


def proof_acceptance_set(group: ToyGroup, pks: Point, pks_j: Point, backend=None) -> np.ndarray:
    """Boolean ``q x q`` matrix over ``(log com, resp)`` of accepted proofs.

    The verification equation ``resp*g == cha*delta + com`` is evaluated with
    the kernels; ``cha`` comes from the protocol hash for every ``com``.
    """
    q, p = group.q, group.p
    table = kernels.power_table(group.g.raw, p, q, backend)
    delta = pks_j - pks
    chas = np.array(
        [proof_challenge(group, group.base_mul(c), delta) for c in range(q)], dtype=np.int64
    )
    d_pow = kernels.powmod(np.full(q, delta.raw), chas, p, backend)  # cha*delta per com
    rhs = d_pow * table % p  # + com (com = g^c)
    return kernels.match_matrix(table, rhs, backend)

