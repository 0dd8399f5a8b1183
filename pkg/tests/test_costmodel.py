import pytest

from noins.costmodel import (
    APPROACHES,
    REFERENCE_TIMINGS_MS,
    SCENARIOS,
    Scenario,
    Workload,
    batch_sizes,
    compare,
    cost_report,
    delays,
    obtain_bytes,
    op_counts,
    use_bytes,
    use_message_size,
)
from noins.group import SECP256K1
from noins.wire import Kind, size_of

N_C = (500, 1000, 3000)


@pytest.mark.parametrize("scenario", sorted(SCENARIOS))
@pytest.mark.parametrize("n_c", N_C)
def test_orderings(scenario, n_c):
    r = {a: cost_report(Workload(a, n_c), SCENARIOS[scenario]) for a in APPROACHES}
    assert r["noins"].obtain_bytes < r["simpl"].obtain_bytes < r["explicit"].obtain_bytes
    assert r["noins"].total_bytes < r["simpl"].total_bytes < r["explicit"].total_bytes
    assert r["noins"].total_delay_s < r["simpl"].total_delay_s < r["explicit"].total_delay_s
    assert r["noins"].obtain_bytes / r["simpl"].obtain_bytes <= 0.1


@pytest.mark.parametrize("n_c", N_C)
def test_orderings_hold_with_rsa_sizes(n_c):
    r = {a: cost_report(Workload(a, n_c), SCENARIOS["small"], rsa_sizes=True) for a in APPROACHES}
    assert r["noins"].total_bytes < r["simpl"].total_bytes < r["explicit"].total_bytes


def test_noins_use_message_bigger_but_total_smaller():
    assert use_message_size("noins") > use_message_size("simpl")
    n = cost_report(Workload("noins", 500), SCENARIOS["small"])
    s = cost_report(Workload("simpl", 500), SCENARIOS["small"])
    assert n.use_bytes > s.use_bytes and n.total_bytes < s.total_bytes


def test_obtain_bytes_from_wire_sizes():
    noins = Workload("noins", 500)
    assert noins.n_ci == 10 and noins.issued == 10
    i2v = size_of(Kind.I2V_MESSAGE, SECP256K1, inner=Kind.NOINS_I2V_PAYLOAD)
    assert obtain_bytes(noins) == 2 + 2 + 10 * (6 + i2v)
    simpl = Workload("simpl", 500)
    assert batch_sizes(simpl) == [size_of(Kind.I2V_BATCH, SECP256K1, entries=20, entry_kind=Kind.SIMPL_I2V_PAYLOAD)] * 25
    assert batch_sizes(Workload("simpl", 45)) == [
        size_of(Kind.I2V_BATCH, SECP256K1, entries=k, entry_kind=Kind.SIMPL_I2V_PAYLOAD) for k in (20, 20, 5)
    ]


def test_explicit_with_rsa_exceeds_simpl():
    assert obtain_bytes(Workload("explicit", 500), rsa_sizes=True) > obtain_bytes(Workload("simpl", 500))
    assert obtain_bytes(Workload("explicit", 500), rsa_sizes=True) > obtain_bytes(Workload("explicit", 500))


def test_zero_certificates():
    for a in APPROACHES:
        w = Workload(a, 0)
        assert obtain_bytes(w) == 0 and use_bytes(w) == 0
        assert delays(w, SCENARIOS["small"]) == (0.0, 0.0)


def test_linearity_in_n_c():
    for a in APPROACHES:
        assert use_bytes(Workload(a, 1000)) == 2 * use_bytes(Workload(a, 500))
        # exact once every batch is full; otherwise each extra batch adds one header
        assert obtain_bytes(Workload(a, 2000)) == 2 * obtain_bytes(Workload(a, 1000))
    assert obtain_bytes(Workload("noins", 1000)) == 2 * obtain_bytes(Workload("noins", 500)) - 4


def test_zero_distance_delay_is_serialization_only():
    s = Scenario("lab", 0.0, vehicle_rsu_distance_m=0.0, v2v_distance_m=0.0)
    w = Workload("simpl", 20)
    (nbytes,) = batch_sizes(w)
    obtain, total = delays(w, s)
    segs = -(-nbytes // 1460)
    air = (nbytes + segs * 76) * 8 / 6e6
    assert obtain == pytest.approx(nbytes * 8 / 1e9 + air)
    use = use_message_size("simpl")
    assert total - obtain == pytest.approx(20 * (use + 76) * 8 / 6e6)


def test_large_city_is_slower():
    w = Workload("noins", 1000)
    assert delays(w, SCENARIOS["large"])[0] > delays(w, SCENARIOS["small"])[0]


def test_workload_validation():
    with pytest.raises(ValueError):
        Workload("noins", 510)
    with pytest.raises(ValueError):
        Workload("akil", 500)
    with pytest.raises(ValueError):
        Workload("simpl", -1)
    with pytest.raises(ValueError):
        Scenario("bad", 1.0, air_bandwidth_bps=0)
    Workload("simpl", 510)  # baselines have no divisibility constraint


def test_reports_are_pure():
    assert compare() == compare()
    d = compare((500,), ("small",))[0].to_dict()
    assert d["total_bytes"] == d["obtain_bytes"] + d["use_bytes"]


def test_explicit_ca_reference_time():
    ca = op_counts("explicit").ca
    timings = dict(REFERENCE_TIMINGS_MS, sign=REFERENCE_TIMINGS_MS["sign_rsa"])
    assert ca.time_ms(0, 1, timings) == pytest.approx(307.7622, abs=1e-4)
    with pytest.raises(KeyError):
        op_counts("noins").ca.time_ms(1, 0, REFERENCE_TIMINGS_MS)


def _is_linear(cost, n_cs=50):
    """Check ``cost.at`` is a linear form over (n_ci, n_c)."""
    a = cost.at(1, 0)
    b = cost.at(0, 1)
    for n_ci, n_c in [(3, 150), (20, 1000), (7, 11)]:
        want = {op: a[op] * n_ci + b[op] * n_c for op in set(a) | set(b)}
        got = cost.at(n_ci, n_c)
        if {k: v for k, v in got.items() if v} != {k: v for k, v in want.items() if v}:
            return False
    return True


def test_noins_op_count_structure():
    t = op_counts("noins")
    assert all(_is_linear(c) for c in t.roles().values())
    # CA: proportional to n_ci only
    assert t.ca.per_ci and not any(t.ca.per_c.values())
    # vehicle: a*n_ci + b*n_c with both parts non-empty
    assert any(t.vehicle.per_ci.values()) and any(t.vehicle.per_c.values())
    # receiver: c*n_c
    assert any(t.receiver.per_c.values()) and not any(t.receiver.per_ci.values())
    # CA cost independent of n_cs for a fixed number of credentials
    assert t.at(1000, 50)["ca"] == t.ca.at(20, 1000)
    assert t.ca.at(20, 1000) == t.ca.at(20, 5000)


def test_baseline_op_counts():
    s, e = op_counts("simpl"), op_counts("explicit")
    assert s.receiver.per_c == {"hash": 1, "point_mul": 1, "point_add": 1}
    assert e.receiver.per_c == {"verify": 1}
    for t in (s, e):
        assert not any(t.ca.per_ci.values())
        assert t.at(500)["ca"] == t.ca.at(0, 500)
    with pytest.raises(ValueError):
        op_counts("akil")


def test_describe():
    assert "n_ci" in op_counts("noins").ca.describe()
    assert "n_ci" not in op_counts("noins").receiver.describe()
