"""Exhaustive-enumeration kernels over the toy group.

Toy elements are integers mod a ~10-bit prime, so whole-group sweeps fit in
int64 arrays.  Each kernel has a numba ``@njit`` loop and a vectorized numpy
equivalent.  ``NOINS_KERNELS=numpy`` forces the fallback; otherwise numba is
used when importable.

These kernels are deliberately independent of :mod:`noins.group`: they are
the brute-force side of the toy-profile oracles.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def _select_backend() -> str:
    want = os.environ.get("NOINS_KERNELS", "").strip().lower()
    if want == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


BACKEND = _select_backend()


# --------------------------------------------------------------------------
# numpy
# --------------------------------------------------------------------------


def _np_powmod(bases, exps, p):
    bases = np.asarray(bases, dtype=np.int64) % p
    exps = np.asarray(exps, dtype=np.int64).copy()
    bases, exps = np.broadcast_arrays(bases, exps)
    bases = bases.copy()
    exps = exps.copy()
    out = np.ones(bases.shape, dtype=np.int64)
    while np.any(exps):
        odd = (exps & 1).astype(bool)
        out[odd] = out[odd] * bases[odd] % p
        bases = bases * bases % p
        exps >>= 1
    return out


def _np_power_table(g, p, n):
    return _np_powmod(g, np.arange(n, dtype=np.int64), p)


def _np_match_matrix(table, targets):
    return np.asarray(targets)[:, None] == np.asarray(table)[None, :]


def _np_orbit_size(table, base, p):
    return np.unique(np.asarray(table) * base % p).size


# --------------------------------------------------------------------------
# numba
# --------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _nb_power_table(g, p, n):
        out = np.empty(n, dtype=np.int64)
        x = 1
        for i in range(n):
            out[i] = x
            x = x * g % p
        return out

    @njit(cache=True)
    def _nb_powmod(bases, exps, p):
        out = np.empty(bases.shape[0], dtype=np.int64)
        for i in range(bases.shape[0]):
            b = bases[i] % p
            e = exps[i]
            r = 1
            while e > 0:
                if e & 1:
                    r = r * b % p
                b = b * b % p
                e >>= 1
            out[i] = r
        return out

    @njit(cache=True)
    def _nb_match_matrix(table, targets):
        out = np.zeros((targets.shape[0], table.shape[0]), dtype=np.bool_)
        for i in range(targets.shape[0]):
            t = targets[i]
            for k in range(table.shape[0]):
                if table[k] == t:
                    out[i, k] = True
        return out

    @njit(cache=True)
    def _nb_orbit_size(table, base, p):
        seen = np.zeros(p, dtype=np.bool_)
        count = 0
        for k in range(table.shape[0]):
            v = table[k] * base % p
            if not seen[v]:
                seen[v] = True
                count += 1
        return count


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def _use_numba(backend):
    return (backend or BACKEND) == "numba" and HAVE_NUMBA


def power_table(g: int, p: int, n: int, backend: str | None = None) -> np.ndarray:
    """``[g**0, g**1, ..., g**(n-1)] mod p``."""
    if _use_numba(backend):
        return _nb_power_table(g, p, n)
    return _np_power_table(g, p, n)


def powmod(bases, exps, p: int, backend: str | None = None) -> np.ndarray:
    """Elementwise ``bases**exps mod p`` (broadcasting)."""
    b, e = np.broadcast_arrays(np.asarray(bases, np.int64), np.asarray(exps, np.int64))
    if _use_numba(backend):
        return _nb_powmod(np.ascontiguousarray(b).ravel(), np.ascontiguousarray(e).ravel(), p).reshape(b.shape)
    return _np_powmod(b, e, p)


def match_matrix(table, targets, backend: str | None = None) -> np.ndarray:
    """Boolean matrix ``M[i, k] = (table[k] == targets[i])``.

    With ``table`` the power table of ``g`` this enumerates, for every target
    element, every exponent that maps onto it.
    """
    table = np.ascontiguousarray(table, dtype=np.int64)
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    if _use_numba(backend):
        return _nb_match_matrix(table, targets)
    return _np_match_matrix(table, targets)


def discrete_logs(table, target: int, backend: str | None = None) -> np.ndarray:
    """All exponents ``k`` with ``table[k] == target``."""
    return np.flatnonzero(match_matrix(table, [target], backend)[0])


def orbit_size(table, base: int, p: int, backend: str | None = None) -> int:
    """Number of distinct values of ``base * table[k] mod p``."""
    table = np.ascontiguousarray(table, dtype=np.int64)
    if _use_numba(backend):
        return int(_nb_orbit_size(table, base, p))
    return int(_np_orbit_size(table, base, p))
