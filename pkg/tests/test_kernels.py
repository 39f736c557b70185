from __future__ import annotations

import itertools

import numpy as np
import pytest

from privscribe import kernels


def brute_edit_distance(a, b) -> int:
    # plain recursion with memo, independent of the DP table used by the kernels
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(go(i + 1, j) + 1, go(i, j + 1) + 1, go(i + 1, j + 1) + (a[i] != b[j]))

    return go(0, 0)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_edit_ops_small_exhaustive(backend):
    alphabet = (0, 1)
    for n in range(4):
        for m in range(4):
            for a in itertools.product(alphabet, repeat=n):
                for b in itertools.product(alphabet, repeat=m):
                    s, d, i = backend.edit_ops(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))
                    assert s + d + i == brute_edit_distance(a, b)
                    # alignment consistency: ref = sub + del + matches, hyp = sub + ins + matches
                    assert n - d == m - i


def test_edit_ops_empty(backend):
    e = np.zeros(0, dtype=np.int64)
    assert tuple(backend.edit_ops(e, e)) == (0, 0, 0)
    assert tuple(backend.edit_ops(np.array([1, 2], dtype=np.int64), e)) == (0, 2, 0)
    assert tuple(backend.edit_ops(e, np.array([1], dtype=np.int64))) == (0, 0, 1)


def test_count_inversions_matches_pairs(backend):
    rng = np.random.default_rng(0)
    for n in (0, 1, 2, 7, 40):
        for _ in range(10):
            seq = rng.integers(0, 10, size=n).astype(np.int64)
            expect = sum(1 for i in range(n) for j in range(i + 1, n) if seq[i] > seq[j])
            assert backend.count_inversions(seq) == expect


def test_linear_assignment_optimal(backend):
    rng = np.random.default_rng(1)
    for n in range(1, 6):
        for _ in range(20):
            cost = rng.random((n, n))
            cols = np.asarray(backend.linear_assignment(cost))
            assert sorted(cols.tolist()) == list(range(n))
            best = min(sum(cost[i, p[i]] for i in range(n)) for p in itertools.permutations(range(n)))
            assert cost[np.arange(n), cols].sum() == pytest.approx(best, abs=1e-12)


def test_linear_assignment_negative_and_ties(backend):
    cost = np.array([[-1.0, -1.0], [-1.0, -1.0]])
    cols = np.asarray(backend.linear_assignment(cost))
    assert cost[np.arange(2), cols].sum() == -2.0


def test_autocorr_peaks_periodic_vs_noise(backend):
    rate = 16000
    t = np.arange(480) / rate
    periodic = np.sin(2 * np.pi * 150 * t)
    noise = np.random.default_rng(0).standard_normal(480)
    frames = np.stack([periodic, noise, np.zeros(480)])
    peaks = np.asarray(backend.autocorr_peaks(frames, 40, 267))
    assert peaks[0] > 0.9
    assert peaks[1] < 0.45
    assert peaks[2] == 0.0


def test_backends_agree():
    from privscribe import _kernels_py

    try:
        from privscribe import _kernels_c
    except ImportError:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.integers(0, 4, size=rng.integers(0, 12)).astype(np.int64)
        b = rng.integers(0, 4, size=rng.integers(0, 12)).astype(np.int64)
        assert tuple(_kernels_c.edit_ops(a, b)) == tuple(_kernels_py.edit_ops(a, b))
        assert _kernels_c.count_inversions(a) == _kernels_py.count_inversions(a)
    frames = rng.standard_normal((5, 300))
    np.testing.assert_allclose(
        _kernels_c.autocorr_peaks(frames, 20, 200), _kernels_py.autocorr_peaks(frames, 20, 200), atol=1e-12
    )
    cost = rng.random((7, 7))
    c1 = np.asarray(_kernels_c.linear_assignment(cost))
    c2 = np.asarray(_kernels_py.linear_assignment(cost))
    assert cost[np.arange(7), c1].sum() == pytest.approx(cost[np.arange(7), c2].sum())
