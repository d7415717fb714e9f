# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Viterbi search and table-walk encoder.

Mirrors ``_kernels_py`` operation for operation; see that module for the
argument contract.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def viterbi(const double complex[:, ::1] target,
            const double complex[:, :, ::1] points,
            const long long[:, ::1] next_state,
            const long long[:, ::1] out_symbol,
            const long long[:, ::1] incoming,
            long long start_state=0):
    cdef Py_ssize_t B = target.shape[0], M = target.shape[1]
    cdef Py_ssize_t N = next_state.shape[0], T = next_state.shape[1]
    cdef Py_ssize_t I = incoming.shape[1]
    cdef Py_ssize_t b, m, s, k, e, state
    cdef double tr, ti, dr, di, c, best_c
    cdef long long best_e
    cdef double complex p

    inputs_arr = np.empty((B, M), dtype=np.int64)
    symbols_arr = np.empty((B, M), dtype=np.int64)
    metric_arr = np.empty(B, dtype=np.float64)
    cdef long long[:, ::1] inputs = inputs_arr
    cdef long long[:, ::1] symbols = symbols_arr
    cdef double[::1] out_metric = metric_arr

    cdef double[::1] metric = np.empty(N)
    cdef double[::1] new_metric = np.empty(N)
    cdef double[::1] cand = np.empty(N * T)
    cdef long long[:, ::1] survivors = np.empty((M, N), dtype=np.int64)

    with nogil:
        for b in range(B):
            for s in range(N):
                metric[s] = INFINITY
            metric[start_state] = 0.0
            for m in range(M):
                tr = target[b, m].real
                ti = target[b, m].imag
                for s in range(N):
                    for k in range(T):
                        p = points[b, m, out_symbol[s, k]]
                        dr = tr - p.real
                        di = ti - p.imag
                        cand[s * T + k] = metric[s] + (dr * dr + di * di)
                for s in range(N):
                    best_e = incoming[s, 0]
                    best_c = cand[best_e]
                    for k in range(1, I):
                        e = incoming[s, k]
                        c = cand[e]
                        if c < best_c:
                            best_c = c
                            best_e = e
                    survivors[m, s] = best_e
                    new_metric[s] = best_c
                for s in range(N):
                    metric[s] = new_metric[s]

            state = 0
            best_c = metric[0]
            for s in range(1, N):
                if metric[s] < best_c:
                    best_c = metric[s]
                    state = s
            out_metric[b] = best_c
            for m in range(M - 1, -1, -1):
                e = survivors[m, state]
                inputs[b, m] = e % T
                symbols[b, m] = out_symbol[e // T, e % T]
                state = e // T

    return inputs_arr, symbols_arr, metric_arr


def encode(const long long[:, ::1] inputs,
           const long long[:, ::1] next_state,
           const long long[:, ::1] out_symbol,
           long long start_state=0):
    cdef Py_ssize_t B = inputs.shape[0], M = inputs.shape[1]
    cdef Py_ssize_t b, m
    cdef long long state, v
    symbols_arr = np.empty((B, M), dtype=np.int64)
    cdef long long[:, ::1] symbols = symbols_arr
    with nogil:
        for b in range(B):
            state = start_state
            for m in range(M):
                v = inputs[b, m]
                symbols[b, m] = out_symbol[state, v]
                state = next_state[state, v]
    return symbols_arr
