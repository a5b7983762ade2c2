"""Numba kernels for the sequential reinforcement scan.

The step recursion is inherently sequential (step m copies a uniformly chosen
earlier step), so the inner loop is compiled rather than vectorized.  Draw
layout within a path's uniform block: the parent index uses slot
stride*(m-2)+off_i and the rotation angle slot stride*(m-2)+off_t, so walk
paths (stride 2) and branching runs (stride 3, slot 0 holding the clock) share
one kernel.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def chain_angles(u, n, stride, off_i, off_t, kind, theta0, atoms, cumprobs, lo, width, out):
    """Fill out[0:n] with the step angles of a reinforcement chain.

    out[m-1] is the angle of step m; step 1 has angle 0.  kind: 0 constant,
    1 discrete (inverse cdf over cumprobs), 2 uniform interval.
    """
    out[0] = 0.0
    for m in range(2, n + 1):
        base = stride * (m - 2)
        par = 1 + int(u[base + off_i] * (m - 1))
        if par > m - 1:  # guard u == 1.0 never produced, but be safe
            par = m - 1
        if kind == 0:
            th = theta0
        elif kind == 1:
            v = u[base + off_t]
            j = np.searchsorted(cumprobs, v, side="right")
            if j >= atoms.shape[0]:
                j = atoms.shape[0] - 1
            th = atoms[j]
        else:
            th = lo + u[base + off_t] * width
        out[m - 1] = out[par - 1] + th


@njit(cache=True)
def chain_depths(u, n, stride, off_i, out):
    """Generation depth of each step of a reinforcement chain (the angle of
    step m under a constant law is theta times its depth).  The int32 output
    keeps the gather cache-resident, which is several times faster than the
    float angle chain at large n."""
    out[0] = 0
    for m in range(2, n + 1):
        base = stride * (m - 2)
        par = 1 + int(u[base + off_i] * (m - 1))
        if par > m - 1:
            par = m - 1
        out[m - 1] = out[par - 1] + 1


@njit(cache=True)
def lattice_directions(u, n, cumprobs, out):
    """Direction indices (quarter turns mod 4) of a lattice walk, consuming
    the same uniform block layout as a stride-2 discrete chain."""
    out[0] = 0
    for m in range(2, n + 1):
        base = 2 * (m - 2)
        par = 1 + int(u[base] * (m - 1))
        if par > m - 1:
            par = m - 1
        v = u[base + 1]
        k = np.searchsorted(cumprobs, v, side="right")
        if k >= 4:
            k = 3
        out[m - 1] = (out[par - 1] + k) % 4
