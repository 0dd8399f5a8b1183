"""Short-term linkage values and CA-side attribution.

``slv_j`` is a truncated Davies-Meyer PRF output: AES-128 under the 16-byte
certificate linkage value, applied to one block built from the CA identity
and the pseudonym index, XORed with that block.

Block layout (16 bytes)::

    offset 0..11   ID_CA, left-justified, zero-padded
    offset 12..15  j, unsigned big-endian

With ``t_sv = 9`` two pseudonyms of one credential collide with probability
about ``n_cs**2 / 2**73``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import FormatError

LV_LEN = 16
BLOCK = 16
ID_WIDTH = 12
DEFAULT_T_SV = 9


@dataclass(frozen=True)
class LinkageContext:
    id_ca: bytes
    t_sv: int = DEFAULT_T_SV

    def __post_init__(self):
        if not 0 < self.t_sv <= BLOCK:
            raise ValueError("t_sv must be in 1..16")
        if len(self.id_ca) > ID_WIDTH:
            raise FormatError(f"ID_CA longer than {ID_WIDTH} bytes does not fit one block")


def linkage_block(id_ca: bytes, j: int) -> bytes:
    if len(id_ca) > ID_WIDTH:
        raise FormatError(f"ID_CA longer than {ID_WIDTH} bytes does not fit one block")
    if not 0 <= j < 2**32:
        raise ValueError("j must fit in 4 bytes")
    return id_ca.ljust(ID_WIDTH, b"\x00") + j.to_bytes(4, "big")


def derive_slv(lv: bytes, ctx: LinkageContext, j: int) -> bytes:
    if len(lv) != LV_LEN:
        raise ValueError("lv must be 16 bytes")
    block = linkage_block(ctx.id_ca, j)
    enc = Cipher(algorithms.AES(lv), modes.ECB()).encryptor()
    out = enc.update(block) + enc.finalize()
    return bytes(a ^ b for a, b in zip(out, block))[: ctx.t_sv]


def match_slv(lv: bytes, ctx: LinkageContext, observed: bytes, n_cs: int) -> Optional[int]:
    """Smallest ``j`` in ``1..n_cs`` whose short-term value equals ``observed``."""
    if n_cs < 1:
        raise ValueError("n_cs must be at least 1")
    for j in range(1, n_cs + 1):
        if derive_slv(lv, ctx, j) == observed:
            return j
    return None


class LinkageRegistry:
    """CA-side index from observed ``slv`` values to ``(lv, j)``.

    Every registered ``lv`` is expanded over ``1..n_cs`` up front.
    """

    def __init__(self, ctx: LinkageContext, n_cs: int):
        self.ctx = ctx
        self.n_cs = n_cs
        self._table: dict[bytes, tuple[bytes, int]] = {}
        self.lvs: list[bytes] = []

    def add(self, lv: bytes) -> None:
        self.lvs.append(lv)
        for j in range(1, self.n_cs + 1):
            self._table.setdefault(derive_slv(lv, self.ctx, j), (lv, j))

    def attribute(self, observed: bytes) -> Optional[tuple[bytes, int]]:
        return self._table.get(bytes(observed))
