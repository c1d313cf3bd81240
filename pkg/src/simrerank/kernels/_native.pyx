# Native versions of the two hot kernels: one-stop path means for the graph
# distance and set-intersection counts for the neighbor-overlap distance.
# Must stay bit-identical to pyimpl: the k cheapest costs are summed in
# ascending order with a sequential reduction.

from libc.stdlib cimport free, malloc

cimport cython
cimport numpy as cnp

import numpy as np

cnp.import_array()


@cython.boundscheck(False)
@cython.wraparound(False)
def sgr_path_means(
    const cnp.float64_t[:, ::1] cross,
    const cnp.int64_t[:, ::1] nbr_idx,
    const cnp.float64_t[:, ::1] nbr_w,
    int big_k,
    cnp.float64_t[:, ::1] out,
    Py_ssize_t row0,
    Py_ssize_t row1,
):
    cdef Py_ssize_t n_gallery = nbr_idx.shape[0]
    cdef Py_ssize_t width = nbr_idx.shape[1]
    cdef Py_ssize_t i, j, a, b, best
    cdef double tmp, total
    cdef double* scratch = <double*> malloc(width * sizeof(double))
    if scratch == NULL:
        raise MemoryError()
    try:
        with nogil:
            for i in range(row0, row1):
                for j in range(n_gallery):
                    for a in range(width):
                        scratch[a] = cross[i, nbr_idx[j, a]] + nbr_w[j, a]
                    # partial selection sort: ascending k smallest up front
                    for a in range(big_k):
                        best = a
                        for b in range(a + 1, width):
                            if scratch[b] < scratch[best]:
                                best = b
                        if best != a:
                            tmp = scratch[a]
                            scratch[a] = scratch[best]
                            scratch[best] = tmp
                    total = 0.0
                    for a in range(big_k):
                        total += scratch[a]
                    out[i, j] = total / big_k
    finally:
        free(scratch)


@cython.boundscheck(False)
@cython.wraparound(False)
def overlap_counts(
    const cnp.int64_t[:, ::1] members,
    const cnp.uint8_t[:, ::1] setmat,
    cnp.int64_t[:, ::1] out,
    Py_ssize_t row0,
    Py_ssize_t row1,
):
    cdef Py_ssize_t n_sets = setmat.shape[0]
    cdef Py_ssize_t k = members.shape[1]
    cdef Py_ssize_t i, j, a
    cdef cnp.int64_t c
    with nogil:
        for i in range(row0, row1):
            for j in range(n_sets):
                c = 0
                for a in range(k):
                    c += setmat[j, members[i, a]]
                out[i, j] = c
