# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled CSR exponential-apply kernel.

This is the hot loop of the propagator: exp(M) @ v evaluated as a scaled
Taylor series, with the CSR matvec, the accumulation and the convergence
norms fused into GIL-free C loops.
"""


def expm_taylor_apply(const int[::1] indptr,
                      const int[::1] indices,
                      const double complex[::1] data,
                      const double complex[::1] v,
                      double complex[::1] out,
                      double complex[::1] term,
                      double complex[::1] work,
                      int segments,
                      double tol,
                      int max_terms):
    """Overwrite ``out`` with exp(M) @ v for the CSR matrix M.

    The exponential is split into ``segments`` factors exp(M/s); each factor
    is applied as a Taylor series truncated when the term norm drops below
    ``tol`` relative to the running result.  Returns the number of terms
    used by the last segment, or -1 when a segment failed to converge
    within ``max_terms``.
    """
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t i, p, lo, hi
    cdef int seg, m, ok, used = 0
    cdef double complex acc
    cdef double scale, term_sq, out_sq
    cdef double tol_sq = tol * tol

    with nogil:
        for i in range(n):
            out[i] = v[i]
        for seg in range(segments):
            for i in range(n):
                term[i] = out[i]
            ok = 0
            for m in range(1, max_terms + 1):
                scale = 1.0 / (<double> segments * <double> m)
                for i in range(n):
                    acc = 0
                    lo = indptr[i]
                    hi = indptr[i + 1]
                    for p in range(lo, hi):
                        acc = acc + data[p] * term[indices[p]]
                    work[i] = acc * scale
                term_sq = 0.0
                out_sq = 0.0
                for i in range(n):
                    term[i] = work[i]
                    out[i] = out[i] + work[i]
                    term_sq += work[i].real * work[i].real + work[i].imag * work[i].imag
                    out_sq += out[i].real * out[i].real + out[i].imag * out[i].imag
                if term_sq <= tol_sq * out_sq:
                    ok = 1
                    used = m
                    break
            if ok == 0:
                used = -1
                break
    return used
