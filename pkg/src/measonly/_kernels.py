"""Numba kernels over bit-packed tableaus.

A tableau is a pair of ``uint64`` arrays ``x, z`` of shape ``(L, W)`` with
``W = ceil(L / 64)``; row ``r`` is generator ``r``, bit ``j`` of the row is
site ``j``.
"""

import numba as nb
import numpy as np
from llvmlite import ir
from numba import types
from numba.extending import intrinsic

_ONE = np.uint64(1)


@intrinsic
def _popcount(typingctx, v):
    def codegen(context, builder, sig, args):
        return builder.ctpop(args[0])

    return types.uint64(types.uint64), codegen


@intrinsic
def _ctz(typingctx, v):
    def codegen(context, builder, sig, args):
        return builder.cttz(args[0], ir.Constant(ir.IntType(1), 0))

    return types.uint64(types.uint64), codegen


@nb.njit(cache=True)
def anticommute_rows(x, z, mx, mz, out):
    """out[r] = symplectic product of row r with (mx, mz)."""
    n, w = x.shape
    for r in range(n):
        acc = np.uint64(0)
        for k in range(w):
            acc += _popcount((x[r, k] & mz[k]) ^ (z[r, k] & mx[k]))
        out[r] = acc & _ONE


@nb.njit(cache=True)
def measure(x, z, mx, mz, last_pivot):
    """Project onto the Pauli (mx, mz). Returns 1 if the tableau changed."""
    n, w = x.shape
    # measurement strings are short; only their nonzero words matter
    words = np.empty(w, dtype=np.int64)
    nw = 0
    for k in range(w):
        if mx[k] | mz[k]:
            words[nw] = k
            nw += 1
    hits = np.empty(n, dtype=np.int64)
    nh = 0
    for r in range(n):
        acc = np.uint64(0)
        for i in range(nw):
            k = words[i]
            acc += _popcount((x[r, k] & mz[k]) ^ (z[r, k] & mx[k]))
        if acc & _ONE:
            hits[nh] = r
            nh += 1
    if nh == 0:
        return 0
    pivot = hits[nh - 1] if last_pivot else hits[0]
    for i in range(nh):
        r = hits[i]
        if r != pivot:
            for k in range(w):
                x[r, k] ^= x[pivot, k]
                z[r, k] ^= z[pivot, k]
    for k in range(w):
        x[pivot, k] = mx[k]
        z[pivot, k] = mz[k]
    return 1


@nb.njit(cache=True)
def measure_many(x, z, mxs, mzs):
    """Apply the rows of (mxs, mzs) in order; returns number of replacements."""
    changed = 0
    for i in range(mxs.shape[0]):
        changed += measure(x, z, mxs[i], mzs[i], False)
    return changed


@nb.njit(cache=True)
def _reduce_insert(basis, pivot, rank, v):
    """Eliminate v against the basis (keyed by lowest set bit); store if independent."""
    m = v.shape[0]
    while True:
        lead = -1
        for k in range(m):
            if v[k]:
                lead = k * 64 + np.int64(_ctz(v[k]))
                break
        if lead < 0:
            return 0
        j = pivot[lead]
        if j < 0:
            for k in range(m):
                basis[rank, k] = v[k]
            pivot[lead] = rank
            return 1
        for k in range(lead >> 6, m):
            v[k] ^= basis[j, k]


@nb.njit(cache=True)
def region_rank(x, z, sites):
    """GF(2) rank of the generator matrix restricted to the x/z columns of ``sites``.

    Fresh row elimination on a masked copy of every generator.
    """
    n, w = x.shape
    mask = np.zeros(w, dtype=np.uint64)
    for s in sites:
        mask[s >> 6] |= _ONE << np.uint64(s & 63)
    basis = np.empty((n, 2 * w), dtype=np.uint64)
    pivot = -np.ones(128 * w, dtype=np.int64)
    v = np.empty(2 * w, dtype=np.uint64)
    rank = 0
    for r in range(n):
        for k in range(w):
            v[k] = x[r, k] & mask[k]
            v[w + k] = z[r, k] & mask[k]
        rank += _reduce_insert(basis, pivot, rank, v)
    return rank


@nb.njit(cache=True)
def _column(x, site, out):
    """Pack column ``site`` of x (one bit per generator) into out."""
    n = x.shape[0]
    word = site >> 6
    bit = np.uint64(site & 63)
    for k in range(out.shape[0]):
        out[k] = 0
    for r in range(n):
        if (x[r, word] >> bit) & _ONE:
            out[r >> 6] |= _ONE << np.uint64(r & 63)


@nb.njit(cache=True)
def arc_entropies(x, z, start, max_len):
    """Entropies of the arcs ``[start, start + l)`` for l = 1..max_len (mod L).

    Columns are added one site at a time, so each prefix rank is the rank of
    the corresponding restricted matrix.
    """
    n, w = x.shape
    out = np.zeros(max_len, dtype=np.int64)
    basis = np.empty((2 * max_len, w), dtype=np.uint64)
    pivot = -np.ones(w * 64, dtype=np.int64)
    v = np.empty(w, dtype=np.uint64)
    rank = 0
    for l in range(max_len):
        s = (start + l) % n
        _column(x, s, v)
        rank += _reduce_insert(basis, pivot, rank, v)
        _column(z, s, v)
        rank += _reduce_insert(basis, pivot, rank, v)
        out[l] = rank - (l + 1)
    return out
