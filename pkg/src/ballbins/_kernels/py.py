"""Pure-numpy simulation kernels (fallback for the compiled extension).

Both backends consume the same flat stream of uniforms, two per ball:
u[2b] picks the alias-table slot, u[2b+1] picks slot vs alias.  Results are
bit-identical to the compiled kernels because every derived quantity is an
integer comparison away from the shared uniforms.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _pairs_to_bins(u1: np.ndarray, u2: np.ndarray, prob: np.ndarray,
                   alias: np.ndarray) -> np.ndarray:
    n = prob.shape[0]
    idx = (u1 * n).astype(np.int64)
    np.minimum(idx, n - 1, out=idx)
    return np.where(u2 < prob[idx], idx, alias[idx])


def max_loads(u: np.ndarray, prob: np.ndarray, alias: np.ndarray,
              out: np.ndarray) -> None:
    """Per-trial maximum load; u has shape (trials, 2 * balls)."""
    trials = u.shape[0]
    balls = u.shape[1] // 2
    n = prob.shape[0]
    if balls == 0:
        out[:] = 0
        return
    bins = _pairs_to_bins(u[:, 0::2], u[:, 1::2], prob, alias)
    if n <= 4 * balls:
        # Counting array is comparable to the draw array: bucket directly.
        offsets = np.arange(trials, dtype=np.int64)[:, None] * n
        counts = np.bincount((bins + offsets).ravel(), minlength=trials * n)
        out[:] = counts.reshape(trials, n).max(axis=1)
    else:
        # Wide bin space: the max multiplicity comes from a row sort instead.
        s = np.sort(bins, axis=1)
        best = np.ones(trials, dtype=np.int64)
        run = np.ones(trials, dtype=np.int64)
        for c in range(balls - 1):
            run = np.where(s[:, c + 1] == s[:, c], run + 1, 1)
            np.maximum(best, run, out=best)
        out[:] = best


def waiting_scan(u: np.ndarray, prob: np.ndarray, alias: np.ndarray,
                 loads: np.ndarray, k: int, start_index: int) -> int:
    """Scan one block of a waiting-time trial.

    u is a flat block of 2*B uniforms; loads carries bin counts from earlier
    blocks and is updated in place when no bin reaches k in this block (on a
    hit the trial is over and loads is left unspecified).  Returns the
    1-based index of the ball that first brings a bin to load k, or -1.
    """
    bins = _pairs_to_bins(u[0::2], u[1::2], prob, alias)
    B = bins.shape[0]
    order = np.argsort(bins, kind="stable")
    s = bins[order]
    newgrp = np.empty(B, dtype=bool)
    newgrp[0] = True
    np.not_equal(s[1:], s[:-1], out=newgrp[1:])
    run_start = np.maximum.accumulate(np.where(newgrp, np.arange(B), 0))
    occ = np.empty(B, dtype=np.int64)
    occ[order] = np.arange(B) - run_start
    reached = loads[bins] + occ + 1
    hits = np.flatnonzero(reached >= k)
    if hits.size:
        return start_index + int(hits[0]) + 1
    loads += np.bincount(bins, minlength=loads.shape[0])
    return -1
