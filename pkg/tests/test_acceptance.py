"""Acceptance criteria, one test each.

Every test prints a single ``ACCEPTANCE <n> PASS|FAIL`` line (visible in
``pytest -v`` output) before asserting, so a failing criterion still reports
its measured numbers.
"""

import io
import random
import time

import pytest

import oracles
from noins import adversary as adv
from noins import costmodel
from noins.adversary import World
from noins.cli import run
from noins.group import SECP256K1, TOY
from noins.linkage import LinkageContext, derive_slv
from noins.selftest import POSITIVE_CONTROLS
from noins.vehicle import profgen, sign_v2x
from noins.verification import verify_proof, verify_v2x
from noins.wire import encode

GAME_TRIALS = 1_000
LINK_TRIALS = 10_000


@pytest.fixture
def report(capsys):
    def emit(n, name, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {name}: {detail}")
        return ok

    return emit


def test_1_end_to_end_completeness(report):
    t0 = time.perf_counter()
    rng = random.Random(1001)
    world = World.create(SECP256K1, rng)
    accepted = total = 0
    for _ in range(20):
        gen = world.generator(world.enroll(rng))
        for b in gen.generate_all(rng):
            msg = sign_v2x(b, b"hazard at km %d" % b.j, rng)
            accepted += verify_v2x(encode(msg), world.trust).accepted
            total += 1
    elapsed = time.perf_counter() - t0
    ok = total == 1000 and accepted == total and elapsed < 60
    assert report(1, "completeness", ok, f"{accepted}/{total} accepted in {elapsed:.1f} s (limit 60 s)")


def test_2_reconciliation_oracle(report):
    rng = random.Random(1002)
    world = World.create(TOY, rng)
    pkc = world.ca.keys.pkc
    q, p = oracles.TOY_Q, oracles.TOY_P
    total = match = literal = 0
    for _ in range(100):
        cred = world.enroll(rng)
        h1 = oracles.tagged_scalar(b"h1", [cred.cert.meta.to_bytes(), pkc.encode()], q)
        for j in range(1, world.policy.n_cs + 1):
            b = world.bundle(cred, j, rng)
            h2j = oracles.tagged_scalar(b"h2", [b.cert.rcv.encode(), b.cert.slv, b.pks_j.encode()], q)
            want = b.cert.rcv.raw * pow(pkc.raw, h1, p) * pow(b.pks_j.raw, h2j, p) % p
            total += 1
            match += oracles.toy_pow(b.skv) == want
            # the composition with the CA-issued sig2 instead of the sanitized sig2_j
            r3 = (b.skv - cred.x_hat - cred.sig1 - (cred.r2 + h2j * b.sks_j)) % q
            lit = (cred.x_hat + cred.sig1 + cred.sig2 + r3) % q
            literal += oracles.toy_pow(lit) == want
    ok = total == 5000 and match == total
    detail = (f"{match}/{total} skv_j*g == schoolbook pkv_j over 100 credentials; "
              f"issued-sig2 composition matches {literal}/{total} (residual (h2_j*sks_j - h2*sks)*g)")
    assert report(2, "reconciliation", ok, detail)


def _regions(raw: bytes, msg) -> list[tuple[str, int, int]]:
    """Byte ranges of the authentication fields inside an encoded V2X message."""
    cert = len(encode(msg.cert))
    P, S = SECP256K1.point_len, SECP256K1.scalar_len
    start = 2
    out = [("cert_j", start, start + cert)]
    start += cert
    out += [("pks_j", start, start + P), ("com_j", start + P, start + 2 * P),
            ("resp_j", start + 2 * P, start + 2 * P + S)]
    sig = len(msg.signature)
    out.append(("signature", len(raw) - sig, len(raw)))
    return out


MASKS = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0xFF)


def test_3_tamper_suite(report):
    rng = random.Random(1003)
    world = World.create(SECP256K1, rng)
    cred = world.enroll(rng)
    flips = false_accepts = honest = 0
    for j in range(1, 51):
        msg = sign_v2x(world.bundle(cred, j, rng), b"tamper target", rng)
        raw = encode(msg)
        honest += verify_v2x(raw, world.trust).accepted
        for _, lo, hi in _regions(raw, msg):
            for i in range(lo, hi):
                bad = bytearray(raw)
                bad[i] ^= MASKS[(i + j) % len(MASKS)]
                flips += 1
                false_accepts += verify_v2x(bytes(bad), world.trust).accepted
    ok = honest == 50 and false_accepts == 0
    detail = f"{flips} single-byte flips over 50 bundles, {false_accepts} false accepts; {honest}/50 honest accepted"
    assert report(3, "tamper", ok, detail)


def test_4_security_games(report):
    rng = random.Random(1004)
    world = World.create(SECP256K1, rng)
    cred = world.enroll(rng)
    target = adv.other_meta(world.meta, rng)
    pool = [world.bundle(cred, j, rng) for j in range(1, 11)]
    negatives = []
    for i, s in enumerate(adv.IMMUTABILITY_STRATEGIES):
        negatives.append(adv.play_immutability(world, cred, target, GAME_TRIALS, s, 100 + i))
    for i, s in enumerate(adv.FRAUD_STRATEGIES):
        negatives.append(adv.play_fraud(world, pool[0], GAME_TRIALS, s, 200 + i))
    for i, s in enumerate(adv.FORGERY_STRATEGIES):
        negatives.append(adv.play_forgery(world, pool, GAME_TRIALS, s, 300 + i))
    neg_ok = all(t.successes == 0 and t.trials == GAME_TRIALS for t in negatives)

    controls = [adv.play_exact_replay(world, pool[0], 20, 400),
                adv.play_forgery_with_credential(world, cred, 20, 401)]
    ctrl_ok = all(t.successes == t.trials for t in controls)

    toy_rng = random.Random(1005)
    toy = World.create(TOY, toy_rng)
    exhaustive = []
    for _ in range(5):
        c = toy.enroll(toy_rng)
        pub = [toy.bundle(c, j, toy_rng) for j in range(1, 6)]
        exhaustive += [
            adv.exhaustive_immutability(toy, c, adv.other_meta(toy.meta, toy_rng), toy_rng),
            adv.exhaustive_forgery(toy, pub, toy_rng),
            adv.exhaustive_fraud(toy, pub[0]),
        ]
    exh_ok = all(r.accepting == r.expected and len(r.accepting) == 1 for r in exhaustive)
    chance_hits = sum(r.attacker_hits for r in exhaustive)

    judges = {**adv.JUDGES, "lv-registry": adv.lv_judge(world.ca)}
    link = adv.play_linkability(world, judges, LINK_TRIALS, 500)
    lo, hi = adv.linkability_band(LINK_TRIALS)
    blind = {k: t for k, t in link.items() if k not in POSITIVE_CONTROLS}
    link_ok = all(lo <= t.rate <= hi for t in blind.values())
    lv_ok = link["lv-registry"].rate >= 0.99

    ok = neg_ok and ctrl_ok and exh_ok and link_ok and lv_ok
    detail = (
        f"negatives {sum(t.successes for t in negatives)} wins / {len(negatives)}x{GAME_TRIALS}; "
        f"controls {[t.successes for t in controls]}/20; "
        f"toy exhaustive {sum(r.accepting == r.expected for r in exhaustive)}/{len(exhaustive)} unique "
        f"(public-guess chance hits {chance_hits}); "
        f"linkability " + ", ".join(f"{k}={t.rate:.4f}" for k, t in sorted(blind.items()))
        + f" in [{lo:.4f}, {hi:.4f}]; lv-registry={link['lv-registry'].rate:.4f}"
    )
    assert report(4, "security games", ok, detail)


def test_5_function_oracles(report):
    rng = random.Random(1006)
    aes_ok = 0
    for _ in range(100):
        lv = rng.randbytes(16)
        id_ca = rng.randbytes(rng.randrange(1, 13))
        j = rng.randrange(1, 2**32)
        aes_ok += derive_slv(lv, LinkageContext(id_ca), j) == oracles.davies_meyer_slv(lv, id_ca, j)

    complete = 0
    pks = SECP256K1.base_mul(rng.randrange(1, SECP256K1.q))
    for _ in range(100):
        rho = rng.randrange(SECP256K1.q)
        com, resp = profgen(SECP256K1, rng.randrange(SECP256K1.q), rho)
        complete += verify_proof(com, resp, pks + SECP256K1.base_mul(rho), pks)

    # toy: exhaustive acceptance set equals the honest transcripts, for every commitment
    tpks = TOY.base_mul(rng.randrange(1, TOY.q))
    rho = rng.randrange(1, TOY.q)
    tpks_j = tpks + TOY.base_mul(rho)
    honest = {(c, profgen(TOY, c, rho)[1]) for c in range(TOY.q)}
    swept = {(c, r) for c in range(TOY.q) for r in range(TOY.q)
             if verify_proof(TOY.base_mul(c), r, tpks_j, tpks)}
    kernel = adv.proof_acceptance_set(TOY, tpks, tpks_j)
    kernel_set = {(int(c), int(r)) for c, r in zip(*kernel.nonzero())}
    sound = swept == honest == kernel_set

    ok = aes_ok == 100 and complete == 100 and sound
    detail = (f"derive_slv = independent AES {aes_ok}/100; Profver accepts {complete}/100 honest proofs; "
              f"toy acceptance set {len(swept)} pairs == honest transcripts: {swept == honest}, kernel agrees: "
              f"{kernel_set == swept}")
    assert report(5, "function oracles", ok, detail)


def test_6_cost_orderings(report):
    rows = []
    ok = True
    for scenario in ("small", "large"):
        for n_c in (500, 1000, 3000):
            r = {a: costmodel.cost_report(costmodel.Workload(a, n_c), costmodel.SCENARIOS[scenario])
                 for a in costmodel.APPROACHES}
            ratio = r["noins"].obtain_bytes / r["simpl"].obtain_bytes
            ok &= r["noins"].obtain_bytes < r["simpl"].obtain_bytes < r["explicit"].obtain_bytes
            ok &= r["noins"].total_bytes < r["simpl"].total_bytes < r["explicit"].total_bytes
            ok &= r["noins"].total_delay_s < r["simpl"].total_delay_s < r["explicit"].total_delay_s
            ok &= ratio <= 0.1
            rows.append(f"{scenario}/{n_c}: ratio {ratio:.4f}, total s "
                        f"{r['noins'].total_delay_s:.3f}<{r['simpl'].total_delay_s:.3f}<{r['explicit'].total_delay_s:.3f}")
    assert report(6, "cost orderings", ok, "; ".join(rows))


def test_7_op_count_structure(report):
    t = costmodel.op_counts("noins")
    ca_ok = bool(t.ca.per_ci) and not any(t.ca.per_c.values())
    veh_ok = any(t.vehicle.per_ci.values()) and any(t.vehicle.per_c.values())
    rx_ok = any(t.receiver.per_c.values()) and not any(t.receiver.per_ci.values())
    # symbolic linearity: evaluating at (n_ci, n_c) equals the coefficient combination
    lin_ok = True
    for cost in t.roles().values():
        a, b = cost.at(1, 0), cost.at(0, 1)
        for n_ci, n_c in ((10, 500), (20, 1000), (60, 3000)):
            got = cost.at(n_ci, n_c)
            lin_ok &= all(got[op] == a[op] * n_ci + b[op] * n_c for op in set(a) | set(b) | set(got))
    ok = ca_ok and veh_ok and rx_ok and lin_ok
    detail = "; ".join(f"{role} = {c.describe()}" for role, c in t.roles().items())
    assert report(7, "op-count structure", ok, detail)


def _pipeline(home):
    base = ["--home", str(home), "--seed", "42", "--now", "1700000000"]
    steps = [
        ["ca", "init"],
        ["vehicle", "keygen"],
        ["ca", "issue", "--batch", "2"],
        ["vehicle", "accept", "--batch", str(home / "batch-0.bin")],
        ["vehicle", "gen", "--all"],
    ]
    for argv in steps:
        assert run(base + argv, io.StringIO(), io.StringIO()) == 0, argv
    (home / "m.txt").write_bytes(b"determinism")
    assert run(base + ["vehicle", "sign", "--bundle", str(home / "bundles" / "c0-j01.json"),
                       "--msg", str(home / "m.txt")], io.StringIO(), io.StringIO()) == 0
    return {p.relative_to(home): p.read_bytes() for p in home.rglob("*") if p.is_file()}


def test_8_determinism(report, tmp_path):
    a = _pipeline(tmp_path / "a")
    b = _pipeline(tmp_path / "b")
    same = a.keys() == b.keys() and all(a[k] == b[k] for k in a)
    assert report(8, "determinism", same, f"{len(a)} artifacts, byte-identical: {same}")
