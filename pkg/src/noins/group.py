"""Prime-order group arithmetic, hashing to scalars, and canonical encodings.

Two profiles share one interface so the protocol code is written once:

* ``production``: secp256k1, 33-byte compressed points, 32-byte scalars.
* ``toy``: the order-509 subgroup of Z*_1019, small enough that every group
  element and every discrete log can be enumerated in tests.

Scalars are plain ``int`` values reduced mod ``q``.  Points are immutable
:class:`Point` objects supporting ``P + Q``, ``P - Q``, ``-P`` and ``k * P``.
"""

from __future__ import annotations

import hashlib
import secrets
from typing import Iterable, Sequence

from .errors import FormatError

Scalar = int


def hash_to_bytes(tag: bytes, parts: Sequence[bytes]) -> bytes:
    """SHA-256 over ``tag`` followed by each part with a 4-byte length prefix."""
    h = hashlib.sha256(tag)
    for part in parts:
        h.update(len(part).to_bytes(4, "big"))
        h.update(part)
    return h.digest()


def default_rng() -> secrets.SystemRandom:
    return secrets.SystemRandom()


class Point:
    """An element of a :class:`GroupParams` group."""

    __slots__ = ("group", "raw")

    def __init__(self, group: "GroupParams", raw) -> None:
        self.group = group
        self.raw = raw

    def __add__(self, other: "Point") -> "Point":
        return Point(self.group, self.group._add(self.raw, other.raw))

    def __neg__(self) -> "Point":
        return Point(self.group, self.group._neg(self.raw))

    def __sub__(self, other: "Point") -> "Point":
        return self + (-other)

    def __rmul__(self, k: int) -> "Point":
        if not isinstance(k, int):
            return NotImplemented
        return self.group.mul(k, self)

    __mul__ = __rmul__

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Point)
            and other.group is self.group
            and other.raw == self.raw
        )

    def __hash__(self) -> int:
        return hash((self.group.profile, self.raw))

    @property
    def is_identity(self) -> bool:
        return self.raw == self.group._identity_raw

    def encode(self) -> bytes:
        return self.group.encode_point(self)

    def __repr__(self) -> str:
        return f"Point({self.group.profile}, {self.encode().hex()})"


class GroupParams:
    """Common surface of both group profiles.

    Subclasses provide the raw element operations; everything protocol-facing
    (hashing, scalar codecs, multi-scalar multiplication) lives here.
    """

    profile: str
    q: int
    point_len: int
    scalar_len: int
    _identity_raw = None

    @property
    def g(self) -> Point:
        return Point(self, self._g_raw)

    @property
    def identity(self) -> Point:
        return Point(self, self._identity_raw)

    # -- scalars -------------------------------------------------------------

    def random_scalar(self, rng=None, nonzero: bool = False) -> Scalar:
        rng = rng or default_rng()
        if nonzero:
            return rng.randrange(1, self.q)
        return rng.randrange(self.q)

    def hash_to_scalar(self, tag: bytes, parts: Sequence[bytes]) -> Scalar:
        if not parts:
            raise ValueError("hash_to_scalar needs at least one part")
        return int.from_bytes(hash_to_bytes(tag, parts), "big") % self.q

    def encode_scalar(self, k: Scalar) -> bytes:
        return (k % self.q).to_bytes(self.scalar_len, "big")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_len:
            raise FormatError(f"scalar must be {self.scalar_len} bytes, got {len(data)}")
        k = int.from_bytes(data, "big")
        if k >= self.q:
            raise FormatError("scalar out of range")
        return k

    # -- points --------------------------------------------------------------

    def encode_point(self, p: Point) -> bytes:
        if p.group is not self:
            raise ValueError("point belongs to another group")
        return self._encode_raw(p.raw)

    def decode_point(self, data: bytes) -> Point:
        if len(data) != self.point_len:
            raise FormatError(f"point must be {self.point_len} bytes, got {len(data)}")
        return Point(self, self._decode_raw(bytes(data)))

    def mul(self, k: Scalar, p: Point) -> Point:
        return Point(self, self._mul(p.raw, k % self.q))

    def base_mul(self, k: Scalar) -> Point:
        return self.mul(k, self.g)

    def msm(self, terms: Iterable[tuple[Scalar, Point]]) -> Point:
        """Sum of ``k * P`` over ``terms``."""
        acc = self.identity
        for k, p in terms:
            acc = acc + self.mul(k, p)
        return acc

    def __repr__(self) -> str:
        return f"<group {self.profile} q={self.q:#x}>"


# --------------------------------------------------------------------------
# secp256k1
# --------------------------------------------------------------------------

try:  # field arithmetic is ~2.5x faster on mpz
    from gmpy2 import invert as _invert, mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int

    def _invert(x, m):
        return pow(x, -1, m)


_P = _mpz(0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEFFFFFC2F)
_N = 0xFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFEBAAEDCE6AF48A03BBFD25E8CD0364141
_GX = _mpz(0x79BE667EF9DCBBAC55A06295CE870B07029BFCDB2DCE28D959F2815B16F81798)
_GY = _mpz(0x483ADA7726A3C4655DA4FBFC0E1108A8FD17B448A68554199C47D08FFB10D4B8)

_WINDOW = 4
_WMASK = (1 << _WINDOW) - 1
_NWINDOWS = 256 // _WINDOW

# Jacobian triples (X, Y, Z); Z == 0 encodes the point at infinity.
_JINF = (_mpz(1), _mpz(1), _mpz(0))


def _jdouble(P):
    X, Y, Z = P
    if Z == 0 or Y == 0:
        return _JINF
    p = _P
    A = X * X % p
    B = Y * Y % p
    C = B * B % p
    D = 2 * ((X + B) * (X + B) - A - C) % p
    E = 3 * A % p
    F = E * E % p
    X3 = (F - 2 * D) % p
    Y3 = (E * (D - X3) - 8 * C) % p
    Z3 = 2 * Y * Z % p
    return (X3, Y3, Z3)


def _jadd(P, Q):
    if P[2] == 0:
        return Q
    if Q[2] == 0:
        return P
    p = _P
    X1, Y1, Z1 = P
    X2, Y2, Z2 = Q
    Z1Z1 = Z1 * Z1 % p
    Z2Z2 = Z2 * Z2 % p
    U1 = X1 * Z2Z2 % p
    U2 = X2 * Z1Z1 % p
    S1 = Y1 * Z2 * Z2Z2 % p
    S2 = Y2 * Z1 * Z1Z1 % p
    if U1 == U2:
        if S1 == S2:
            return _jdouble(P)
        return _JINF
    H = (U2 - U1) % p
    R = (S2 - S1) % p
    H2 = H * H % p
    H3 = H * H2 % p
    U1H2 = U1 * H2 % p
    X3 = (R * R - H3 - 2 * U1H2) % p
    Y3 = (R * (U1H2 - X3) - S1 * H3) % p
    Z3 = H * Z1 * Z2 % p
    return (X3, Y3, Z3)


def _jadd_affine(P, x2, y2):
    """Jacobian + affine (mixed addition)."""
    if P[2] == 0:
        return (x2, y2, _mpz(1))
    p = _P
    X1, Y1, Z1 = P
    Z1Z1 = Z1 * Z1 % p
    U2 = x2 * Z1Z1 % p
    S2 = y2 * Z1 * Z1Z1 % p
    if X1 == U2:
        if Y1 == S2:
            return _jdouble(P)
        return _JINF
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    H2 = H * H % p
    H3 = H * H2 % p
    U1H2 = X1 * H2 % p
    X3 = (R * R - H3 - 2 * U1H2) % p
    Y3 = (R * (U1H2 - X3) - Y1 * H3) % p
    Z3 = H * Z1 % p
    return (X3, Y3, Z3)


def _to_affine(P):
    X, Y, Z = P
    if Z == 0:
        return None
    zi = _invert(Z, _P)
    zi2 = zi * zi % _P
    return (X * zi2 % _P, Y * zi2 * zi % _P)


def _window_table(raw):
    """[inf, P, 2P, ..., 15P] in Jacobian form."""
    base = (raw[0], raw[1], _mpz(1))
    table = [_JINF, base]
    for _ in range(2, 1 << _WINDOW):
        table.append(_jadd(table[-1], base))
    return table


class Secp256k1(GroupParams):
    profile = "production"
    q = _N
    p = int(_P)
    point_len = 33
    scalar_len = 32
    _g_raw = (_GX, _GY)

    def __init__(self) -> None:
        self._comb = None

    def _add(self, a, b):
        if a is None:
            return b
        if b is None:
            return a
        x1, y1 = a
        x2, y2 = b
        p = _P
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            lam = 3 * x1 * x1 * _invert(2 * y1, p) % p
        else:
            lam = (y2 - y1) * _invert(x2 - x1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def _neg(self, a):
        if a is None:
            return None
        return (a[0], (-a[1]) % _P)

    def _comb_table(self):
        if self._comb is None:
            rows = []
            base = self._g_raw
            for _ in range(_NWINDOWS):
                row = [None, base]
                for _ in range(2, 1 << _WINDOW):
                    row.append(self._add(row[-1], base))
                rows.append(row)
                base = self._add(row[-1], base)  # 16 * base
            self._comb = rows
        return self._comb

    def _base_mul_jac(self, k):
        acc = _JINF
        for row in self._comb_table():
            d = k & _WMASK
            if d:
                x, y = row[d]
                acc = _jadd_affine(acc, x, y)
            k >>= _WINDOW
        return acc

    def _mul(self, raw, k):
        if raw is None or k == 0:
            return None
        if raw == self._g_raw:
            return _to_affine(self._base_mul_jac(k))
        return _to_affine(self._var_mul_jac([(k, raw)]))

    def _var_mul_jac(self, terms):
        """Interleaved fixed-window multiplication for several variable bases."""
        tables = [(k, _window_table(raw)) for k, raw in terms]
        acc = _JINF
        for w in range(_NWINDOWS - 1, -1, -1):
            for _ in range(_WINDOW):
                acc = _jdouble(acc)
            shift = w * _WINDOW
            for k, table in tables:
                d = (k >> shift) & _WMASK
                if d:
                    acc = _jadd(acc, table[d])
        return acc

    def msm(self, terms):
        base_k = 0
        var = []
        for k, pt in terms:
            k %= self.q
            if k == 0 or pt.raw is None:
                continue
            if pt.raw == self._g_raw:
                base_k += k
            else:
                var.append((k, pt.raw))
        acc = self._var_mul_jac(var) if var else _JINF
        base_k %= self.q
        if base_k:
            acc = _jadd(acc, self._base_mul_jac(base_k))
        return Point(self, _to_affine(acc))

    def _encode_raw(self, raw) -> bytes:
        if raw is None:
            return bytes(33)
        x, y = raw
        return bytes([2 + int(y & 1)]) + int(x).to_bytes(32, "big")

    def _decode_raw(self, data: bytes):
        if data == bytes(33):
            return None
        prefix = data[0]
        if prefix not in (2, 3):
            raise FormatError("bad compressed point prefix")
        x = _mpz(int.from_bytes(data[1:], "big"))
        if x >= _P:
            raise FormatError("x coordinate out of range")
        y2 = (pow(x, 3, _P) + 7) % _P
        y = pow(y2, (_P + 1) // 4, _P)
        if y * y % _P != y2:
            raise FormatError("point not on curve")
        if (y & 1) != (prefix & 1):
            y = _P - y
        return (x, y)


# --------------------------------------------------------------------------
# toy subgroup of Z*_p
# --------------------------------------------------------------------------


class ToyGroup(GroupParams):
    """Order-``q`` subgroup of the multiplicative group mod the safe prime ``p``.

    Group "addition" is multiplication mod ``p`` and ``k * P`` is ``P**k``.
    """

    profile = "toy"
    _identity_raw = 1

    def __init__(self, p: int = 1019, q: int = 509, g: int = 4) -> None:
        if pow(g, q, p) != 1 or g == 1:
            raise ValueError("g must have order q")
        self.p = p
        self.q = q
        self._g_raw = g
        self.point_len = (p.bit_length() + 7) // 8
        self.scalar_len = (q.bit_length() + 7) // 8

    def _add(self, a, b):
        return a * b % self.p

    def _neg(self, a):
        return pow(a, self.p - 2, self.p)

    def _mul(self, raw, k):
        return pow(raw, k, self.p)

    def _encode_raw(self, raw) -> bytes:
        return raw.to_bytes(self.point_len, "big")

    def _decode_raw(self, data: bytes):
        x = int.from_bytes(data, "big")
        if not 0 < x < self.p or pow(x, self.q, self.p) != 1:
            raise FormatError("element not in the order-q subgroup")
        return x

    def elements(self) -> list[Point]:
        """Every group element, indexed by discrete log base ``g``."""
        out, x = [], 1
        for _ in range(self.q):
            out.append(Point(self, x))
            x = x * self._g_raw % self.p
        return out


SECP256K1 = Secp256k1()
TOY = ToyGroup()

PROFILES: dict[str, GroupParams] = {"production": SECP256K1, "toy": TOY}


def get_group(profile: str) -> GroupParams:
    try:
        return PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown group profile {profile!r}") from None
