"""Caterpillar to cocoon key expansion.

The expansion offset is ``f(seed, i) = H_f(seed, i as u32)`` reduced mod q, and
cocoon keys are additive: ``x_hat_i = x + f(seed, i)``.  Because the offset is
public given the seed, the RA/CA side can expand ``X`` without knowing ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .group import GroupParams, Point, Scalar, default_rng

SEED_LEN = 16
MAX_INDEX = 2**32


def expansion_offset(group: GroupParams, seed: bytes, i: int) -> Scalar:
    if not 0 <= i < MAX_INDEX:
        raise ValueError("cocoon index must be < 2**32")
    return group.hash_to_scalar(b"f", [seed, i.to_bytes(4, "big")])


OffsetFn = Callable[[GroupParams, bytes, int], Scalar]


@dataclass(frozen=True)
class CaterpillarKeyPair:
    x: Scalar
    X: Point
    expansion_seed: bytes

    @classmethod
    def generate(cls, group: GroupParams, rng=None) -> "CaterpillarKeyPair":
        rng = rng or default_rng()
        x = group.random_scalar(rng, nonzero=True)
        return cls(x, group.base_mul(x), rng.randbytes(SEED_LEN))

    @property
    def group(self) -> GroupParams:
        return self.X.group


@dataclass(frozen=True)
class CocoonKeyPair:
    index: int
    x_hat: Scalar
    X_hat: Point


def derive_cocoon_private(
    pair: CaterpillarKeyPair, i: int, offset: OffsetFn = expansion_offset
) -> CocoonKeyPair:
    group = pair.group
    x_hat = (pair.x + offset(group, pair.expansion_seed, i)) % group.q
    return CocoonKeyPair(i, x_hat, group.base_mul(x_hat))


def derive_cocoon_public(
    X: Point, seed: bytes, i: int, offset: OffsetFn = expansion_offset
) -> Point:
    return X + X.group.base_mul(offset(X.group, seed, i))
