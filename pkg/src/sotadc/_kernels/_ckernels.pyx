# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Must stay bit-compatible with ``_pykernels``."""

import numpy as np

cimport cython


def sweep_codes(const double[:] inputs, const double[:] thresholds, const double[:] gains):
    """Quasi-static bank conversion for every input point.

    Returns ``(codes, bubbles)``; ``codes[i]`` is the number of devices whose
    mirrored current strictly exceeds their threshold, ``bubbles[i]`` is 1 when
    the per-device thermometer pattern is not a prefix of ones.
    """
    cdef Py_ssize_t n = inputs.shape[0]
    cdef Py_ssize_t m = thresholds.shape[0]
    cdef Py_ssize_t i, k
    cdef int count
    cdef bint seen_zero, bubble
    codes_arr = np.zeros(n, dtype=np.int64)
    bubbles_arr = np.zeros(n, dtype=np.uint8)
    cdef long long[:] codes = codes_arr
    cdef unsigned char[:] bubbles = bubbles_arr
    cdef double x
    for i in range(n):
        x = inputs[i]
        count = 0
        seen_zero = False
        bubble = False
        for k in range(m):
            if x * gains[k] > thresholds[k]:
                count += 1
                if seen_zero:
                    bubble = True
            else:
                seen_zero = True
        codes[i] = count
        bubbles[i] = bubble
    return codes_arr, bubbles_arr


def hysteresis_trace(const double[:] currents, double i_crit_p, double i_crit_ap,
                     double r_low, double r_high, bint start_high):
    """Two-state threshold automaton driven by a current sequence."""
    cdef Py_ssize_t n = currents.shape[0]
    cdef Py_ssize_t i
    cdef bint high = start_high
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef double x
    for i in range(n):
        x = currents[i]
        if not high and x > i_crit_p:
            high = True
        elif high and x < i_crit_ap:
            high = False
        out[i] = r_high if high else r_low
    return out_arr


def first_reach(const double[:] inputs, const long long[:] codes, int n_codes):
    """Index of the first sample whose code is >= k, for k = 1..n_codes; -1 if never."""
    cdef Py_ssize_t n = inputs.shape[0]
    cdef Py_ssize_t i
    cdef int k, c, level = 1
    idx_arr = np.full(n_codes, -1, dtype=np.int64)
    cdef long long[:] idx = idx_arr
    for i in range(n):
        c = <int>codes[i]
        while level <= n_codes and c >= level:
            idx[level - 1] = i
            level += 1
        if level > n_codes:
            break
    return idx_arr
