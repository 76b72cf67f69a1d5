"""Pure numpy implementations of the hot loops (fallback backend)."""
import numpy as np


def scatter_pairs(local, n):
    """Accumulate element-pair matrices into a dense n-by-n matrix.

    ``local[d]`` is the 4x4 interaction of elements ``a`` and ``a + d``
    over the node pattern ``(a, a+1, a+d, a+d+1)``; node ``j`` maps to
    unknown ``j - 1`` and boundary nodes 0 and n+1 are dropped.
    """
    A = np.zeros((n, n))
    for d in range(local.shape[0]):
        a = np.arange(n + 1 - d)
        if a.size == 0:
            continue
        nodes = (a, a + 1, a + d, a + d + 1)
        for k in range(4):
            rk = nodes[k] - 1
            for l in range(4):
                w = local[d, k, l]
                if w == 0.0:
                    continue
                rl = nodes[l] - 1
                ok = (rk >= 0) & (rk < n) & (rl >= 0) & (rl < n)
                np.add.at(A, (rk[ok], rl[ok]), w)
    return A


def offset_sum(values, s, band):
    """Sum over ordered pairs p != q with |p - q| > band of
    (v_p - v_q)^2 * |p - q|^(-1-2s)."""
    v = np.asarray(values, dtype=float)
    m_count = v.size
    total = 0.0
    for m in range(band + 1, m_count):
        diff = v[m:] - v[:-m]
        total += float(np.dot(diff, diff)) * m ** (-1.0 - 2.0 * s)
    return 2.0 * total
