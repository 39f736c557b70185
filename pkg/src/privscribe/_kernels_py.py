"""Pure-Python/numpy versions of the compiled kernels.

Same signatures and tie-breaking as ``_kernels_c``; selected automatically
when the extension is not built.
"""

from __future__ import annotations

import numpy as np


def edit_ops(ref: np.ndarray, hyp: np.ndarray) -> tuple[int, int, int]:
    """Return (substitutions, deletions, insertions) along one minimal alignment."""
    ref = [int(x) for x in ref]
    hyp = [int(x) for x in hyp]
    n, m = len(ref), len(hyp)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        row, prev = dp[i], dp[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            best = prev[j - 1] + (r != hyp[j - 1])
            if prev[j] + 1 < best:
                best = prev[j] + 1
            if row[j - 1] + 1 < best:
                best = row[j - 1] + 1
            row[j] = best

    sub = dele = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]):
            sub += ref[i - 1] != hyp[j - 1]
            i -= 1
            j -= 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            dele += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return sub, dele, ins


def count_inversions(seq: np.ndarray) -> int:
    work = [int(x) for x in seq]

    def _sort(a: list[int]) -> tuple[list[int], int]:
        if len(a) < 2:
            return a, 0
        mid = len(a) // 2
        left, inv_l = _sort(a[:mid])
        right, inv_r = _sort(a[mid:])
        merged: list[int] = []
        inv = inv_l + inv_r
        i = j = 0
        while i < len(left) and j < len(right):
            if left[i] <= right[j]:
                merged.append(left[i])
                i += 1
            else:
                merged.append(right[j])
                inv += len(left) - i
                j += 1
        merged.extend(left[i:])
        merged.extend(right[j:])
        return merged, inv

    return _sort(work)[1]


def linear_assignment(cost: np.ndarray) -> np.ndarray:
    """Kuhn-Munkres with row/column potentials, O(n^3). Returns row -> column."""
    n = cost.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = np.inf
            j1 = 0
            for j in range(1, n + 1):
                if not used[j]:
                    cur = cost[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    assign = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        assign[p[j] - 1] = j - 1
    return assign


def autocorr_peaks(frames: np.ndarray, min_lag: int, max_lag: int) -> np.ndarray:
    n_frames, length = frames.shape
    max_lag = min(max_lag, length - 1)
    best = np.zeros(n_frames)
    sq = frames * frames
    for lag in range(min_lag, max_lag + 1):
        stop = length - lag
        head = frames[:, :stop]
        tail = frames[:, lag:]
        num = np.einsum("ij,ij->i", head, tail)
        e0 = sq[:, :stop].sum(axis=1)
        e1 = sq[:, lag:].sum(axis=1)
        ok = (e0 > 0.0) & (e1 > 0.0)
        r = np.zeros(n_frames)
        r[ok] = num[ok] / np.sqrt(e0[ok] * e1[ok])
        np.maximum(best, r, out=best)
    return best
