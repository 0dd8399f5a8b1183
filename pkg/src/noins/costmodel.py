"""Analytic communication and computation cost of explicit, SIMPL and NOINS.

Bytes come straight from :func:`noins.wire.size_of`, so the model stays in
lock-step with the real encoders.  Delay is first order: propagation plus
serialization, with per-segment TCP/IP and 802.11 MAC overhead on the air
interface.  Absolute seconds are not meant to match packet-level simulation;
orderings and scaling are the contract.

Anonymous-credential (CL-signature) approaches are not modelled: their message
sizes depend on idemix parameters that are not pinned down here.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping

from .group import SECP256K1, GroupParams
from .wire import Kind, size_of

APPROACHES = ("explicit", "simpl", "noins")

I2V_KIND = {
    "explicit": Kind.EXPLICIT_I2V_PAYLOAD,
    "simpl": Kind.SIMPL_I2V_PAYLOAD,
    "noins": Kind.NOINS_I2V_PAYLOAD,
}
V2X_KIND = {
    "explicit": Kind.EXPLICIT_V2X,
    "simpl": Kind.SIMPL_V2X,
    "noins": Kind.V2X_AUTH,
}

LIGHT_KM_S = 299792.46


@dataclass(frozen=True)
class Scenario:
    """City scenario.  Parameters marked *assumed* are modelling choices."""

    name: str
    ca_rsu_distance_km: float
    wired_speed_km_s: float = LIGHT_KM_S
    wired_bandwidth_bps: float = 1e9  # assumed
    air_bandwidth_bps: float = 6e6  # assumed: 802.11p default MCS
    vehicle_rsu_distance_m: float = 150.0  # midpoint of 0-300 m
    v2v_distance_m: float = 55.0  # midpoint of 10-100 m
    segment_payload_bytes: int = 1460  # assumed TCP MSS
    per_segment_overhead_bytes: int = 76  # assumed: 40 TCP/IP + 36 MAC/LLC
    batch_size: int = 20

    def __post_init__(self):
        for name in ("wired_speed_km_s", "wired_bandwidth_bps", "air_bandwidth_bps",
                     "segment_payload_bytes", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("ca_rsu_distance_km", "vehicle_rsu_distance_m", "v2v_distance_m",
                     "per_segment_overhead_bytes"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


SCENARIOS = {
    "small": Scenario("small", 5.0),
    "large": Scenario("large", 60.0),
}

ASSUMPTIONS = (
    "wired CA-RSU bandwidth 1 Gbit/s",
    "802.11p air bandwidth 6 Mbit/s",
    "TCP MSS 1460 B, 76 B TCP/IP+MAC overhead per segment",
    "vehicle-RSU 150 m, vehicle-vehicle 55 m (range midpoints)",
    "first-order delay: propagation + serialization, no retransmission",
)


@dataclass(frozen=True)
class Workload:
    approach: str
    n_c: int
    n_cs: int = 50

    def __post_init__(self):
        if self.approach not in APPROACHES:
            raise ValueError(f"unknown approach {self.approach!r}")
        if self.n_c < 0 or self.n_cs < 1:
            raise ValueError("n_c must be >= 0 and n_cs >= 1")
        if self.approach == "noins" and self.n_c % self.n_cs:
            raise ValueError(f"n_c={self.n_c} is not a multiple of n_cs={self.n_cs}")

    @property
    def n_ci(self) -> int:
        return self.n_c // self.n_cs if self.approach == "noins" else self.n_c

    @property
    def issued(self) -> int:
        """Number of CA-issued I2V payloads."""
        return self.n_ci


def _batches(n: int, batch_size: int) -> list[int]:
    full, rem = divmod(n, batch_size)
    return [batch_size] * full + ([rem] if rem else [])


def batch_sizes(workload: Workload, batch_size: int = 20, group: GroupParams = SECP256K1,
                rsa_sizes: bool = False) -> list[int]:
    kind = I2V_KIND[workload.approach]
    return [
        size_of(Kind.I2V_BATCH, group, entries=k, entry_kind=kind, rsa_sizes=rsa_sizes)
        for k in _batches(workload.issued, batch_size)
    ]


def obtain_bytes(workload: Workload, batch_size: int = 20, group: GroupParams = SECP256K1,
                 rsa_sizes: bool = False) -> int:
    return sum(batch_sizes(workload, batch_size, group, rsa_sizes))


def use_message_size(approach: str, group: GroupParams = SECP256K1, rsa_sizes: bool = False) -> int:
    """Authentication values plus signature for one V2X message (empty body)."""
    return size_of(V2X_KIND[approach], group, rsa_sizes=rsa_sizes)


def use_bytes(workload: Workload, group: GroupParams = SECP256K1, rsa_sizes: bool = False) -> int:
    return workload.n_c * use_message_size(workload.approach, group, rsa_sizes)


def air_serialization_s(nbytes: int, scenario: Scenario) -> float:
    segments = max(1, math.ceil(nbytes / scenario.segment_payload_bytes))
    on_air = nbytes + segments * scenario.per_segment_overhead_bytes
    return on_air * 8 / scenario.air_bandwidth_bps


def obtain_message_delay(nbytes: int, scenario: Scenario) -> float:
    wired = (scenario.ca_rsu_distance_km / scenario.wired_speed_km_s
             + nbytes * 8 / scenario.wired_bandwidth_bps)
    air = scenario.vehicle_rsu_distance_m / 1000 / LIGHT_KM_S + air_serialization_s(nbytes, scenario)
    return wired + air


def use_message_delay(nbytes: int, scenario: Scenario) -> float:
    return scenario.v2v_distance_m / 1000 / LIGHT_KM_S + air_serialization_s(nbytes, scenario)


def delays(workload: Workload, scenario: Scenario, group: GroupParams = SECP256K1,
           rsa_sizes: bool = False) -> tuple[float, float]:
    """``(obtain_seconds, obtain_plus_use_seconds)``; messages are sequential."""
    obtain = sum(
        obtain_message_delay(b, scenario)
        for b in batch_sizes(workload, scenario.batch_size, group, rsa_sizes)
    )
    per_use = use_message_delay(use_message_size(workload.approach, group, rsa_sizes), scenario)
    return obtain, obtain + workload.n_c * per_use


# --------------------------------------------------------------------------
# operation counts
# --------------------------------------------------------------------------

OPS = ("point_mul", "point_add", "hash", "scalar_op", "sym", "sign", "verify", "encrypt", "decrypt")

# Per-operation timings (ms) on a 2.83 GHz reference desktop.  Other operations
# have no reference timing.
REFERENCE_TIMINGS_MS = {
    "point_add": 0.0573,
    "point_mul": 8.4791,
    "sign_rsa": 278.9789,
    "encrypt": 20.2469,
}


@dataclass(frozen=True)
class LinearCost:
    """Operation counts of the form ``per_ci * n_ci + per_c * n_c``."""

    per_ci: Mapping[str, int] = field(default_factory=dict)
    per_c: Mapping[str, int] = field(default_factory=dict)

    def at(self, n_ci: int, n_c: int) -> Counter:
        out = Counter()
        for op, k in self.per_ci.items():
            out[op] += k * n_ci
        for op, k in self.per_c.items():
            out[op] += k * n_c
        return out

    def time_ms(self, n_ci: int, n_c: int, timings: Mapping[str, float]) -> float:
        counts = self.at(n_ci, n_c)
        missing = [op for op, k in counts.items() if k and op not in timings]
        if missing:
            raise KeyError(f"no timing for {missing}")
        return sum(k * timings[op] for op, k in counts.items())

    def describe(self) -> str:
        def term(d, sym):
            return " + ".join(f"{k}{sym}·{op}" for op, k in sorted(d.items()) if k)
        parts = [t for t in (term(self.per_ci, " n_ci"), term(self.per_c, " n_c")) if t]
        return " + ".join(parts) or "0"


@dataclass(frozen=True)
class OpCountTable:
    approach: str
    ca: LinearCost
    vehicle: LinearCost
    receiver: LinearCost

    def roles(self) -> dict[str, LinearCost]:
        return {"ca": self.ca, "vehicle": self.vehicle, "receiver": self.receiver}

    def at(self, n_c: int, n_cs: int = 50) -> dict[str, Counter]:
        n_ci = n_c // n_cs if self.approach == "noins" else n_c
        return {role: cost.at(n_ci, n_c) for role, cost in self.roles().items()}


_COCOON = {"hash": 1, "scalar_op": 1}  # x_hat = x + f(seed, i)


def _plus(*ds):
    out = Counter()
    for d in ds:
        out.update(d)
    return dict(out)


def op_counts(approach: str) -> OpCountTable:
    """Primitive-operation counts per role, as executed by this package."""
    if approach == "explicit":
        return OpCountTable(
            approach,
            ca=LinearCost(per_c={"point_mul": 1, "point_add": 1, "sign": 1, "encrypt": 1}),
            vehicle=LinearCost(per_c=_plus(_COCOON, {"decrypt": 1, "verify": 1,
                                                    "scalar_op": 1, "point_mul": 1})),
            receiver=LinearCost(per_c={"verify": 1}),
        )
    if approach == "simpl":
        return OpCountTable(
            approach,
            ca=LinearCost(per_c={"point_mul": 1, "point_add": 1, "hash": 1,
                                 "scalar_op": 2, "encrypt": 1}),
            vehicle=LinearCost(per_c=_plus(_COCOON, {"decrypt": 1, "hash": 1, "scalar_op": 1,
                                                    "point_mul": 2, "point_add": 1})),
            receiver=LinearCost(per_c={"hash": 1, "point_mul": 1, "point_add": 1}),
        )
    if approach == "noins":
        return OpCountTable(
            approach,
            ca=LinearCost(per_ci={"point_mul": 2, "point_add": 2, "hash": 2,
                                  "scalar_op": 4, "encrypt": 1}),
            vehicle=LinearCost(
                # decrypt, issuance check (3 mults incl. sks*g, 2 adds, 2 hashes)
                per_ci=_plus(_COCOON, {"decrypt": 1, "scalar_op": 2, "point_mul": 4,
                                      "point_add": 2, "hash": 2}),
                # Linkage, Randkey, Profgen, Sansig, skv_j and pkv_j
                per_c={"sym": 1, "point_mul": 4, "point_add": 2, "hash": 2, "scalar_op": 8},
            ),
            # Profver then pkv_j reconstruction
            receiver=LinearCost(per_c={"hash": 3, "point_mul": 4, "point_add": 4}),
        )
    raise ValueError(f"unknown approach {approach!r}")


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CostReport:
    approach: str
    scenario: str
    n_c: int
    n_cs: int
    n_ci: int
    obtain_bytes: int
    use_bytes: int
    obtain_delay_s: float
    total_delay_s: float
    op_counts: dict

    @property
    def total_bytes(self) -> int:
        return self.obtain_bytes + self.use_bytes

    def to_dict(self) -> dict:
        d = asdict(self)
        d["total_bytes"] = self.total_bytes
        return d


def cost_report(workload: Workload, scenario: Scenario, group: GroupParams = SECP256K1,
                rsa_sizes: bool = False) -> CostReport:
    obtain_s, total_s = delays(workload, scenario, group, rsa_sizes)
    counts = op_counts(workload.approach).at(workload.n_c, workload.n_cs)
    return CostReport(
        approach=workload.approach,
        scenario=scenario.name,
        n_c=workload.n_c,
        n_cs=workload.n_cs,
        n_ci=workload.n_ci,
        obtain_bytes=obtain_bytes(workload, scenario.batch_size, group, rsa_sizes),
        use_bytes=use_bytes(workload, group, rsa_sizes),
        obtain_delay_s=obtain_s,
        total_delay_s=total_s,
        op_counts={role: dict(c) for role, c in counts.items()},
    )


def compare(
    n_c_values: Iterable[int] = (500, 1000, 3000),
    scenarios: Iterable[str] = ("small", "large"),
    n_cs: int = 50,
    approaches: Iterable[str] = APPROACHES,
    rsa_sizes: bool = False,
    group: GroupParams = SECP256K1,
) -> list[CostReport]:
    return [
        cost_report(Workload(a, n_c, n_cs), SCENARIOS[s], group, rsa_sizes)
        for s in scenarios
        for n_c in n_c_values
        for a in approaches
    ]
