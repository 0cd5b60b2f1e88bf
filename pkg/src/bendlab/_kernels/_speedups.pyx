# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled word-ball kernel: one-letter extension of freely reduced words.

Contract and child ordering match _ref.expand_level exactly.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def expand_level(cnp.float64_t[:, :, ::1] mats, cnp.int8_t[::1] last,
                 cnp.float64_t[:, :, ::1] gens):
    cdef Py_ssize_t n = mats.shape[0]
    cdef Py_ssize_t k2 = gens.shape[0]
    cdef Py_ssize_t per = k2 - 1
    out = np.empty((n * per, 2, 2), dtype=np.float64)
    lout = np.empty(n * per, dtype=np.int8)
    cdef cnp.float64_t[:, :, ::1] om = out
    cdef cnp.int8_t[::1] ol = lout
    cdef Py_ssize_t i, j, w = 0
    cdef Py_ssize_t skip
    cdef double a, b, c, d
    with nogil:
        for i in range(n):
            skip = last[i] ^ 1
            a = mats[i, 0, 0]; b = mats[i, 0, 1]
            c = mats[i, 1, 0]; d = mats[i, 1, 1]
            for j in range(k2):
                if j == skip:
                    continue
                om[w, 0, 0] = a * gens[j, 0, 0] + b * gens[j, 1, 0]
                om[w, 0, 1] = a * gens[j, 0, 1] + b * gens[j, 1, 1]
                om[w, 1, 0] = c * gens[j, 0, 0] + d * gens[j, 1, 0]
                om[w, 1, 1] = c * gens[j, 0, 1] + d * gens[j, 1, 1]
                ol[w] = <cnp.int8_t> j
                w += 1
    return out, lout
