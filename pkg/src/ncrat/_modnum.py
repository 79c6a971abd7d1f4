"""Vectorized prime-field linear algebra on numpy uint64 arrays.

Two fast paths: the Mersenne prime 2^61 - 1 (the default working field),
whose products are handled with split-limb arithmetic and shift folding,
and primes below 2^31, where raw 64-bit products cannot overflow.  Other
moduli are not supported here; callers fall back to exact pure-Python
elimination.
"""

from __future__ import annotations

import numpy as np

M61 = (1 << 61) - 1

_MASK61 = np.uint64(M61)
_S61 = np.uint64(61)
_S31 = np.uint64(31)
_S30 = np.uint64(30)
_LOW31 = np.uint64((1 << 31) - 1)
_LOW30 = np.uint64((1 << 30) - 1)
_ONE = np.uint64(1)


def supported(p: int) -> bool:
    return p == M61 or p < (1 << 31)


def _mul_m61(a, b):
    # split a = a1*2^31 + a0, b likewise; 2^61 == 1 (mod p) folds the shifts
    a1 = a >> _S31
    a0 = a & _LOW31
    b1 = b >> _S31
    b0 = b & _LOW31
    mid = a1 * b0 + a0 * b1
    lo = a0 * b0
    t = ((a1 * b1) << _ONE) + (mid >> _S30) + ((mid & _LOW30) << _S31) \
        + (lo & _MASK61) + (lo >> _S61)
    t = (t & _MASK61) + (t >> _S61)
    t = (t & _MASK61) + (t >> _S61)
    return t - np.where(t >= _MASK61, _MASK61, np.uint64(0))


def mul_mod(a, b, p: int):
    if p == M61:
        return _mul_m61(a, b)
    return (a * b) % np.uint64(p)


def kron_mod(a, b, p: int):
    """Kronecker product mod p."""
    r1, c1 = a.shape
    r2, c2 = b.shape
    prod = mul_mod(a[:, None, :, None], b[None, :, None, :], p)
    return prod.reshape(r1 * r2, c1 * c2)


def eval_pencil_mod(coeffs, mats, d: int, p: int):
    """coeffs: (n+1, s, s); mats: (>=n, d, d).  Returns A0 x I_d + sum Ai x ti."""
    n = coeffs.shape[0] - 1
    out = kron_mod(coeffs[0], np.eye(d, dtype=np.uint64), p)
    pp = np.uint64(p)
    for i in range(n):
        out = out + kron_mod(coeffs[i + 1], mats[i], p)
        out -= np.where(out >= pp, pp, np.uint64(0))
    return out


def rank_mod(A, p: int) -> int:
    A = np.array(A, dtype=np.uint64, copy=True)
    n, m = A.shape
    pp = np.uint64(p)
    r = 0
    for c in range(m):
        if r == n:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = np.uint64(pow(int(A[r, c]), p - 2, p))
        row = mul_mod(A[r, c:], inv, p)
        A[r, c:] = row
        if r + 1 < n:
            sub = A[r + 1:, c:]
            upd = mul_mod(A[r + 1:, c][:, None], row[None, :], p)
            sub += pp - upd
            sub -= np.where(sub >= pp, pp, np.uint64(0))
        r += 1
    return r


def _rref_with(A, aug, p: int) -> int:
    """Full reduction of A, mirroring row ops on aug; returns rank."""
    n, m = A.shape
    pp = np.uint64(p)
    r = 0
    for c in range(m):
        if r == n:
            break
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
            aug[[r, piv]] = aug[[piv, r]]
        inv = np.uint64(pow(int(A[r, c]), p - 2, p))
        A[r, c:] = mul_mod(A[r, c:], inv, p)
        aug[r] = mul_mod(aug[r], inv, p)
        factors = A[:, c].copy()
        factors[r] = 0
        if factors.any():
            upd = mul_mod(factors[:, None], A[r, c:][None, :], p)
            blk = A[:, c:]
            blk += pp - upd
            blk -= np.where(blk >= pp, pp, np.uint64(0))
            upd2 = mul_mod(factors[:, None], aug[r][None, :], p)
            aug += pp - upd2
            aug -= np.where(aug >= pp, pp, np.uint64(0))
        r += 1
    return r


def inv_mod(A, p: int):
    """Inverse of square A mod p, or None if singular."""
    n = A.shape[0]
    A = np.array(A, dtype=np.uint64, copy=True)
    aug = np.eye(n, dtype=np.uint64)
    if _rref_with(A, aug, p) < n:
        return None
    return aug


def solve_mod(A, B, p: int):
    """Solution X of A X = B for square invertible A, or None if singular."""
    n = A.shape[0]
    A = np.array(A, dtype=np.uint64, copy=True)
    aug = np.array(B, dtype=np.uint64, copy=True)
    if aug.ndim == 1:
        aug = aug[:, None]
    if _rref_with(A, aug, p) < n:
        return None
    return aug
