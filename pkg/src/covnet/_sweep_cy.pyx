# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled cyclic block-projection sweep loop.

Drop-in replacement for covnet._sweep_py.run_sweeps (see there for the
contract).  Block eigendecompositions go straight to LAPACK's zheev, so a
sweep costs no Python-level work; this is the hot loop of the feasibility
solver.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt
from scipy.linalg.cython_lapack cimport zheev

cnp.import_array()

CONVERGED, STALLED, EXHAUSTED = 0, 1, 2


def run_sweeps(target, blocks, long max_sweeps, double feas_tol, double stall_tol):
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] tgt = np.ascontiguousarray(
        target, dtype=np.complex128
    )
    cdef int n = tgt.shape[0]
    cdef int nblocks = len(blocks)
    if nblocks == 0:
        raise ValueError("need at least one block")

    # Flatten the block index lists.
    cdef cnp.ndarray[cnp.intp_t, ndim=1] sizes = np.array(
        [len(ix) for ix in blocks], dtype=np.intp
    )
    cdef cnp.ndarray[cnp.intp_t, ndim=1] ioff = np.zeros(nblocks + 1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] toff = np.zeros(nblocks + 1, dtype=np.intp)
    cdef Py_ssize_t b
    for b in range(nblocks):
        ioff[b + 1] = ioff[b] + sizes[b]
        toff[b + 1] = toff[b] + sizes[b] * sizes[b]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] indices = np.concatenate(
        [np.asarray(ix, dtype=np.intp) for ix in blocks]
    )
    cdef int kmax = int(sizes.max())

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] resid = tgt.copy()
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] terms = np.zeros(
        toff[nblocks], dtype=np.complex128
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] history = np.empty(
        max_sweeps + 1, dtype=np.float64
    )

    # LAPACK workspace, sized once for the largest block.
    cdef int lwork = 1 + 66 * kmax
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] a_f = np.empty(
        kmax * kmax, dtype=np.complex128
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eigs = np.empty(kmax, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] work = np.empty(
        lwork, dtype=np.complex128
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rwork = np.empty(
        max(1, 3 * kmax - 2), dtype=np.float64
    )
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] eblk = np.empty(
        kmax * kmax, dtype=np.complex128
    )

    cdef double complex *rp = <double complex *> resid.data
    cdef double complex *tp = <double complex *> terms.data
    cdef double complex *ap = <double complex *> a_f.data
    cdef double complex *wp = <double complex *> work.data
    cdef double complex *ep = <double complex *> eblk.data
    cdef double *wr = <double *> eigs.data
    cdef double *rw = <double *> rwork.data
    cdef cnp.intp_t *idx = <cnp.intp_t *> indices.data

    cdef char jobz = b'V'
    cdef char uplo = b'L'
    cdef int info = 0, k = 0
    cdef Py_ssize_t s, ii, jj, q, base, tb, gi, gj
    cdef double res, prev, lam, acc
    cdef double complex scaled, delta
    cdef long sweeps = 0
    cdef int status = EXHAUSTED

    res = 0.0
    for ii in range(n):
        for jj in range(n):
            res += (rp[ii * n + jj].real * rp[ii * n + jj].real
                    + rp[ii * n + jj].imag * rp[ii * n + jj].imag)
    res = sqrt(res)
    history[0] = res
    if res <= feas_tol:
        out_terms = [
            terms[toff[b]:toff[b + 1]].reshape(sizes[b], sizes[b]).copy()
            for b in range(nblocks)
        ]
        return CONVERGED, 0, history[:1].copy(), out_terms

    prev = res
    for s in range(1, max_sweeps + 1):
        sweeps = s
        for b in range(nblocks):
            k = <int> sizes[b]
            base = ioff[b]
            tb = toff[b]
            # Column-major copy of term + residual block for LAPACK.
            for jj in range(k):
                gj = idx[base + jj]
                for ii in range(k):
                    ap[ii + jj * k] = tp[tb + ii * k + jj] + rp[idx[base + ii] * n + gj]
            zheev(&jobz, &uplo, &k, ap, &k, wr, wp, &lwork, rw, &info)
            if info != 0:
                raise RuntimeError(f"zheev failed with info={info}")
            # PSD part: accumulate the nonnegative eigenpairs.
            for ii in range(k * k):
                ep[ii] = 0
            for q in range(k):
                lam = wr[q]
                if lam <= 0.0:
                    continue
                for ii in range(k):
                    scaled = lam * ap[ii + q * k]
                    for jj in range(k):
                        ep[ii * k + jj] = ep[ii * k + jj] + scaled * ap[jj + q * k].conjugate()
            # Exact symmetrization (rounding leaves ~1e-16 skew behind).
            for ii in range(k):
                ep[ii * k + ii] = ep[ii * k + ii].real
                for jj in range(ii + 1, k):
                    scaled = 0.5 * (ep[ii * k + jj] + ep[jj * k + ii].conjugate())
                    ep[ii * k + jj] = scaled
                    ep[jj * k + ii] = scaled.conjugate()
            # Write back and update the residual.
            for ii in range(k):
                gi = idx[base + ii] * n
                for jj in range(k):
                    delta = ep[ii * k + jj] - tp[tb + ii * k + jj]
                    tp[tb + ii * k + jj] = ep[ii * k + jj]
                    rp[gi + idx[base + jj]] = rp[gi + idx[base + jj]] - delta
        res = 0.0
        for ii in range(n):
            for jj in range(n):
                res += (rp[ii * n + jj].real * rp[ii * n + jj].real
                        + rp[ii * n + jj].imag * rp[ii * n + jj].imag)
        res = sqrt(res)
        history[s] = res
        if res <= feas_tol:
            status = CONVERGED
            break
        if prev - res <= stall_tol:
            status = STALLED
            break
        prev = res

    out_terms = [
        terms[toff[b]:toff[b + 1]].reshape(sizes[b], sizes[b]).copy()
        for b in range(nblocks)
    ]
    return status, int(sweeps), history[: sweeps + 1].copy(), out_terms
