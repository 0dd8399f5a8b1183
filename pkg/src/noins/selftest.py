"""Toy-profile exhaustive oracles and the security-game sweep behind ``noins selftest``."""

from __future__ import annotations

import random
from dataclasses import asdict, dataclass
from typing import Optional

from . import adversary
from .group import SECP256K1, TOY, GroupParams
from .verification import verify_proof


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def schoolbook_pkv(bundle, pkc, h1: int, h2: int) -> int:
    """``rcv_j * pkc**h1 * pks_j**h2 mod p`` with plain integers (toy only)."""
    p = TOY.p
    return bundle.cert.rcv.raw * pow(pkc.raw, h1, p) * pow(bundle.pks_j.raw, h2, p) % p


def reconciliation(credentials: int = 100, seed: int = 0) -> tuple[int, int, int]:
    """``(bundles, corrected_ok, literal_ok)`` over every ``j`` of each credential.

    ``literal_ok`` counts bundles for which ``x_hat + sig1 + sig2 + r3`` (the
    CA-issued ``sig2`` rather than the sanitized one) would also have matched.
    """
    from .ca import h1_of, h2_of

    rng = random.Random(seed)
    world = adversary.World.create(TOY, rng)
    q, p, g = TOY.q, TOY.p, TOY.g.raw
    total = ok = literal = 0
    for _ in range(credentials):
        cred = world.enroll(rng)
        for j in range(1, world.policy.n_cs + 1):
            b = world.bundle(cred, j, rng)
            h1 = h1_of(b.cert.meta, cred.pkc)
            h2j = h2_of(b.cert.rcv, b.cert.slv, b.pks_j)
            target = schoolbook_pkv(b, cred.pkc, h1, h2j)
            total += 1
            ok += pow(g, b.skv, p) == target
            r3_part = (b.skv - cred.x_hat - cred.sig1 - (cred.r2 + h2j * b.sks_j)) % q
            lit = (cred.x_hat + cred.sig1 + cred.sig2 + r3_part) % q
            literal += pow(g, lit, p) == target
    return total, ok, literal


def run_oracles(backend: Optional[str] = None, seed: int = 0, credentials: int = 20) -> list[Check]:
    checks = []
    rng = random.Random(seed)

    elems = TOY.elements()
    acc, agree = TOY.identity, True
    for a in range(TOY.q):
        agree &= TOY.base_mul(a) == acc == elems[a]
        acc = acc + TOY.g
    checks.append(Check("toy scalar multiplication = repeated addition", agree))

    total, ok, literal = reconciliation(credentials, seed)
    checks.append(Check("skv_j*g equals reconstructed pkv_j (schoolbook)", ok == total,
                        f"{ok}/{total}"))
    checks.append(Check("literal x_hat+sig1+sig2+r3 composition fails", literal < total,
                        f"{literal}/{total} would match"))

    world = adversary.World.create(TOY, rng)
    cred = world.enroll(rng)
    bundle = world.bundle(cred, 1, rng)
    matrix = adversary.proof_acceptance_set(TOY, world.pks, bundle.pks_j, backend)
    rows_ok = bool((matrix.sum(axis=1) == 1).all())
    sample = rng.sample(range(TOY.q), 8)
    agree = all(
        bool(matrix[c, r]) == verify_proof(TOY.base_mul(c), r, bundle.pks_j, world.pks)
        for c in sample for r in range(TOY.q)
    )
    checks.append(Check("proof acceptance set has exactly q pairs", int(matrix.sum()) == TOY.q
                        and rows_ok, f"{int(matrix.sum())} accepted"))
    checks.append(Check("kernel acceptance set matches verify_proof", agree))

    checks.append(Check("r -> rcv + r*g is a bijection",
                        adversary.exhaustive_rerandomization(TOY, cred.cert.rcv, backend)))
    checks.append(Check("rho -> pks + rho*g is a bijection",
                        adversary.exhaustive_rerandomization(TOY, world.pks, backend)))

    imm = adversary.exhaustive_immutability(world, cred, adversary.other_meta(world.meta, rng),
                                            rng, backend)
    checks.append(Check("immutability: only r1 + h1'*skc accepts", imm.ok,
                        f"accepting={sorted(imm.accepting)}"))
    published = [world.bundle(cred, j, rng) for j in range(2, 6)]
    forg = adversary.exhaustive_forgery(world, published, rng, backend)
    checks.append(Check("forgery: unique accepting key needs skv_j", forg.accepting == forg.expected,
                        f"public-guess hits={forg.attacker_hits}"))
    fraud = adversary.exhaustive_fraud(world, published[0], backend)
    checks.append(Check("fraud: only skv_j signs for the pseudonym", fraud.accepting == fraud.expected,
                        f"public-guess hits={fraud.attacker_hits}"))
    return checks


def run_games(trials: int = 200, seed: int = 0, group: GroupParams = SECP256K1,
              link_trials: Optional[int] = None) -> list[adversary.GameTranscript]:
    """Every production strategy plus positive controls, seed-reproducible."""
    rng = random.Random(seed)
    world = adversary.World.create(group, rng)
    cred = world.enroll(rng)
    out = []
    target = adversary.other_meta(world.meta, rng)
    for i, s in enumerate(adversary.IMMUTABILITY_STRATEGIES):
        out.append(adversary.play_immutability(world, cred, target, trials, s, seed + i))
    victim_pool = [world.bundle(cred, j, rng) for j in range(1, 11)]
    for i, s in enumerate(adversary.FRAUD_STRATEGIES):
        out.append(adversary.play_fraud(world, victim_pool[0], trials, s, seed + 10 + i))
    out.append(adversary.play_exact_replay(world, victim_pool[0], min(trials, 20), seed + 20))
    for i, s in enumerate(adversary.FORGERY_STRATEGIES):
        out.append(adversary.play_forgery(world, victim_pool, trials, s, seed + 30 + i))
    out.append(adversary.play_forgery_with_credential(world, cred, min(trials, 20), seed + 40))
    judges = {**adversary.JUDGES, "lv-registry": adversary.lv_judge(world.ca)}
    out.extend(adversary.play_linkability(world, judges, link_trials or trials, seed + 50).values())
    return out


POSITIVE_CONTROLS = {"exact-replay", "full-credential", "lv-registry"}


def game_passes(t: adversary.GameTranscript) -> bool:
    if t.game == "unlinkability":
        if t.strategy in POSITIVE_CONTROLS:
            return t.rate >= 0.99
        lo, hi = adversary.linkability_band(t.trials)
        return lo <= t.rate <= hi
    if t.strategy in POSITIVE_CONTROLS:
        return t.successes == t.trials
    return t.successes == 0
