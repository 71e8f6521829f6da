"""Reference (pure numpy) cyclic block-projection sweep loop.

One sweep visits every source block in order and replaces that block's term
with the PSD projection of (term + current residual restricted to the
block); the residual target - sum(terms) is maintained incrementally.  The
residual norm never increases across sweeps.

``covnet._sweep_cy`` is the compiled drop-in replacement; both expose
``run_sweeps`` with identical semantics.
"""

from __future__ import annotations

import numpy as np

CONVERGED, STALLED, EXHAUSTED = 0, 1, 2


def run_sweeps(target, blocks, max_sweeps, feas_tol, stall_tol):
    """Run cyclic block projections starting from zero terms.

    Parameters
    ----------
    target : (n, n) complex Hermitian array
    blocks : list of intp index arrays (one per source, fixed order)
    max_sweeps : int
    feas_tol, stall_tol : absolute tolerances on the Frobenius residual and
        on its per-sweep decrease

    Returns
    -------
    (status, sweeps, history, terms): status is CONVERGED / STALLED /
    EXHAUSTED, history holds the residual norm before each sweep and after
    the last, terms is the list of block-sized PSD matrices.
    """
    target = np.ascontiguousarray(target, dtype=np.complex128)
    grids = [np.ix_(ix, ix) for ix in blocks]
    terms = [np.zeros((len(ix), len(ix)), dtype=np.complex128) for ix in blocks]
    residual = target.copy()
    history = [float(np.linalg.norm(residual))]
    if history[0] <= feas_tol:
        return CONVERGED, 0, np.asarray(history), terms
    status = EXHAUSTED
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        for b, grid in enumerate(grids):
            c = terms[b] + residual[grid]
            w, v = np.linalg.eigh(c)
            np.clip(w, 0.0, None, out=w)
            e = (v * w) @ v.conj().T
            e = 0.5 * (e + e.conj().T)
            residual[grid] -= e - terms[b]
            terms[b] = e
        res = float(np.linalg.norm(residual))
        history.append(res)
        if res <= feas_tol:
            status = CONVERGED
            break
        if history[-2] - res <= stall_tol:
            status = STALLED
            break
    return status, sweeps, np.asarray(history), terms
