import random

import pytest

from noins import adversary as adv
from noins.group import TOY
from noins.selftest import game_passes, run_games


@pytest.fixture(scope="module")
def toy():
    rng = random.Random(71)
    world = adv.World.create(TOY, rng)
    cred = world.enroll(rng)
    return world, cred, rng


def test_transcript_validation():
    with pytest.raises(ValueError):
        adv.GameTranscript("poker", "x", 1, 0)
    with pytest.raises(ValueError):
        adv.GameTranscript("fraud", "x", 1, 2)
    t = adv.GameTranscript("fraud", "x", 4, 1, seed=3)
    assert t.rate == 0.25 and t.to_dict()["rate"] == 0.25


@pytest.mark.parametrize("strategy", adv.IMMUTABILITY_STRATEGIES)
def test_immutability_strategies_fail(prod_world, prod_cred, strategy):
    target = adv.other_meta(prod_world.meta, random.Random(1))
    t = adv.play_immutability(prod_world, prod_cred, target, 20, strategy, seed=1)
    assert t.successes == 0


def test_immutability_needs_different_metadata(prod_world, prod_cred):
    with pytest.raises(ValueError):
        adv.play_immutability(prod_world, prod_cred, prod_world.meta, 1, "reuse")


@pytest.mark.parametrize("strategy", adv.FRAUD_STRATEGIES)
def test_fraud_strategies_fail(prod_world, prod_cred, strategy):
    victim = prod_world.bundle(prod_cred, 1, random.Random(2))
    assert adv.play_fraud(prod_world, victim, 20, strategy, seed=2).successes == 0


def test_exact_replay_is_accepted(prod_world, prod_cred):
    victim = prod_world.bundle(prod_cred, 1, random.Random(3))
    t = adv.play_exact_replay(prod_world, victim, 5, seed=3)
    assert t.successes == 5 and "replay" in t.note


@pytest.mark.parametrize("strategy", adv.FORGERY_STRATEGIES)
def test_forgery_strategies_fail(prod_world, prod_cred, strategy):
    rng = random.Random(4)
    published = [prod_world.bundle(prod_cred, j, rng) for j in range(1, 6)]
    assert adv.play_forgery(prod_world, published, 20, strategy, seed=4).successes == 0


def test_forgery_positive_control(prod_world, prod_cred):
    t = adv.play_forgery_with_credential(prod_world, prod_cred, 5, seed=5)
    assert t.successes == 5


def test_unknown_strategies(prod_world, prod_cred):
    victim = prod_world.bundle(prod_cred, 1, random.Random(6))
    with pytest.raises(ValueError):
        adv.play_fraud(prod_world, victim, 1, "telepathy")
    with pytest.raises(ValueError):
        adv.play_forgery(prod_world, [victim], 1, "telepathy")
    with pytest.raises(KeyError):
        adv.play_immutability(prod_world, prod_cred, adv.other_meta(prod_world.meta, random.Random(0)), 1, "telepathy")


def test_pair_source_yields_disjoint_fresh_bundles(toy_world):
    src = adv.PairSource(toy_world, random.Random(7), fleet=3)
    seen = set()
    for t in range(200):
        a, b = src.pair(t % 2 == 0)
        for x in (a, b):
            key = (x.cert.slv, x.cert.rcv.raw, x.pks_j.raw)
            assert key not in seen
            seen.add(key)


def test_lv_judge_links_perfectly(prod_world):
    judges = {"lv": adv.lv_judge(prod_world.ca)}
    t = adv.play_linkability(prod_world, judges, 40, seed=8)["lv"]
    assert t.successes == 40


def test_linkability_judges_near_half():
    world = adv.World.create(TOY, random.Random(9))
    out = adv.play_linkability(world, adv.JUDGES, 2000, seed=9)
    lo, hi = adv.linkability_band(2000)
    for t in out.values():
        assert lo <= t.rate <= hi, t


def test_linkability_band():
    lo, hi = adv.linkability_band(10_000)
    assert (lo, hi) == pytest.approx((0.485, 0.515))


def test_exhaustive_games_toy(toy):
    world, cred, _ = toy
    rng = random.Random(10)
    imm = adv.exhaustive_immutability(world, cred, adv.other_meta(world.meta, rng), rng)
    assert imm.ok and len(imm.accepting) == 1
    published = [world.bundle(cred, j, rng) for j in range(1, 5)]
    forg = adv.exhaustive_forgery(world, published, rng)
    assert forg.accepting == forg.expected and len(forg.accepting) == 1
    fraud = adv.exhaustive_fraud(world, published[0])
    assert fraud.accepting == fraud.expected == {published[0].skv}


def test_accepting_keys_is_the_discrete_log(toy):
    world, _, _ = toy
    g = world.group
    for k in (0, 1, 200):
        assert adv.accepting_keys(g, g.base_mul(k)) == {k}
        assert adv.accepting_keys(g, g.base_mul(k), offset=3) == {(k - 3) % g.q}


def test_exhaustive_rerandomization(toy):
    world, cred, _ = toy
    assert adv.exhaustive_rerandomization(world.group, cred.cert.rcv)
    assert adv.exhaustive_rerandomization(world.group, world.group.identity)


def test_run_games_small_and_deterministic():
    a = run_games(trials=6, seed=3, link_trials=40)
    b = run_games(trials=6, seed=3, link_trials=40)
    assert [t.to_dict() for t in a] == [t.to_dict() for t in b]
    strategies = {t.strategy for t in a}
    assert set(adv.FRAUD_STRATEGIES) <= strategies and "lv-registry" in strategies
    for t in a:
        if t.game != "unlinkability":
            assert game_passes(t), t
