"""Compiled kernels for the interior-point Schur complement.

The hot operation is accumulating, for one LMI block with inverse scaling
matrix V, the matrix with entries

    H[p, q] += sum over cells (r,c) of p and (r',c') of q of
               w w' V[r, r'] V[c, c']

over all pairs of variables appearing in the block.  Cells are stored
grouped by variable (CSR-style) and sorted so that, per variable p, the
remaining cells form a contiguous suffix; only the upper triangle of H is
written.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def schur_block_accumulate(H, V, ptr, cr, cc, cw, gvar, phi):
    """Add one block's contribution to the upper triangle of H.

    For each local variable p the dense matrix
    phi = sum_{(r,c) in cells(p)} w * outer(V[r], V[c]) is built, then
    reduced at the cells of every later variable.  phi is caller-provided
    scratch of shape (block, block).
    """
    P = ptr.shape[0] - 1
    nb = V.shape[0]
    L = ptr[P]
    for p in range(P):
        ncells = ptr[p + 1] - ptr[p]
        if ncells == 0:
            continue
        phi[:, :] = 0.0
        for a in range(ptr[p], ptr[p + 1]):
            ra = cr[a]
            ca = cc[a]
            wa = cw[a]
            vr = V[ra]
            vc = V[ca]
            for i in range(nb):
                wv = wa * vr[i]
                for j in range(nb):
                    phi[i, j] += wv * vc[j]
        gp = gvar[p]
        row = H[gp]
        q = p
        nxt = ptr[q + 1]
        s = 0.0
        for b in range(ptr[p], L):
            while b >= nxt:
                row[gvar[q]] += s
                s = 0.0
                q += 1
                nxt = ptr[q + 1]
            s += cw[b] * phi[cr[b], cc[b]]
        row[gvar[q]] += s
    return


@njit(cache=True)
def mirror_upper(H):
    """Copy the strict upper triangle of H onto the lower triangle."""
    n = H.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            H[j, i] = H[i, j]
    return
