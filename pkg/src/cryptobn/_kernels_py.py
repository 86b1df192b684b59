"""Pure-Python (numpy) versions of the compiled kernels in ``_kernels.pyx``.

Each function here must return results identical to its compiled twin,
including floating-point tie-breaking, so the two backends are
interchangeable.
"""

from __future__ import annotations

import numpy as np


def kmeans_dp(x: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    """Optimal weighted 1-D k-means over sorted distinct points ``x``.

    Returns the start index of each of the ``k`` clusters. Within-cluster
    sums of squares come from prefix sums; the argmin is leftmost.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    m = x.size
    W = np.concatenate(([0.0], np.cumsum(w)))
    S1 = np.concatenate(([0.0], np.cumsum(w * x)))
    S2 = np.concatenate(([0.0], np.cumsum(w * x * x)))

    D = np.empty((k, m))
    B = np.zeros((k, m), dtype=np.int64)
    for i in range(m):
        s1 = S1[i + 1] - S1[0]
        D[0, i] = (S2[i + 1] - S2[0]) - s1 * s1 / (W[i + 1] - W[0])
    for c in range(1, k):
        prev = D[c - 1]
        for i in range(c, m):
            js = np.arange(c, i + 1)
            s1 = S1[i + 1] - S1[js]
            cost = prev[js - 1] + ((S2[i + 1] - S2[js]) - s1 * s1 / (W[i + 1] - W[js]))
            best = int(np.argmin(cost))
            D[c, i] = cost[best]
            B[c, i] = js[best]

    starts = np.zeros(k, dtype=np.int64)
    end = m - 1
    for c in range(k - 1, 0, -1):
        starts[c] = B[c, end]
        end = starts[c] - 1
    return starts


def family_counts(data: np.ndarray, child: int, parents, cards) -> tuple[np.ndarray, int]:
    """Contingency table (parent configs x child states) over complete rows.

    ``data`` is an int matrix with -1 for missing. Parent configurations are
    row-major in the given parent order (last parent varies fastest).
    Returns the table and the number of rows used.
    """
    cols = [child, *parents]
    sub = data[:, cols]
    mask = np.all(sub >= 0, axis=1)
    sub = sub[mask]
    q = 1
    config = np.zeros(sub.shape[0], dtype=np.int64)
    for j, p in enumerate(parents):
        config = config * cards[p] + sub[:, j + 1]
        q *= cards[p]
    r = cards[child]
    flat = np.bincount(config * r + sub[:, 0], minlength=q * r)
    return flat.reshape(q, r), int(sub.shape[0])
