"""Embezzlement-state numerics.

The staircase state mu_R has coordinates 1/sqrt(r * chi_R) for r = 1..R,
where chi_R is the R-th harmonic number.  Any unit vector phi in C^d can be
approximately extracted from mu_R by a permutation alone:

* nonnegative phi: sort the coordinates of phi (x) mu_R into decreasing
  order; the overlap of the result with the padded mu_R is at least
  chi_floor(R/d) / chi_R.
* general phi: first rotate each coordinate's phase onto the T-th roots of
  unity using the uniform-phase state theta_T and a blockwise cyclic shift,
  then apply the nonnegative construction to the moduli.  This costs at most
  an extra 2*pi/T of overlap.

Permutations are stored as 0-based index arrays (``perm[x]`` is the image of
``x``; the associated matrix P maps basis vector x to basis vector perm[x])
and applied lazily, never materialized as matrices.  The triple index
(t, j, r) in [T] x [d] x [R] is identified with the flat index
(t*d + j)*R + r, extending the pair convention (j, r) -> j*R + r.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ENTRY_CAP = 2**26

NORM_ATOL = 1e-10
BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class EmbezzleResult:
    permutation: np.ndarray
    overlap: complex
    guaranteed_bound: float


def harmonic_number(r: int) -> float:
    """chi_r = 1 + 1/2 + ... + 1/r, with chi_0 = 0."""
    if r < 0:
        raise ValueError("harmonic_number requires r >= 0")
    if r == 0:
        return 0.0
    return float(np.sum(1.0 / np.arange(1, r + 1)))


def mu_state(R: int) -> np.ndarray:
    """Unit vector with coordinates 1/sqrt(r * chi_R), r = 1..R."""
    if R < 1:
        raise ValueError("R must be >= 1")
    return 1.0 / np.sqrt(np.arange(1, R + 1) * harmonic_number(R))


def theta_state(T: int) -> np.ndarray:
    """Unit vector with coordinates w^t / sqrt(T), t = 1..T, w = exp(2 pi i / T)."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return np.exp(2j * np.pi * np.arange(1, T + 1) / T) / math.sqrt(T)


# -- permutation helpers ------------------------------------------------------


def as_permutation(perm, size: int | None = None) -> np.ndarray:
    p = np.asarray(perm, dtype=np.intp)
    if p.ndim != 1:
        raise ValueError("permutation must be a 1-d index array")
    if size is not None and len(p) != size:
        raise ValueError(f"permutation has length {len(p)}, expected {size}")
    seen = np.zeros(len(p), dtype=bool)
    if len(p) and (p.min() < 0 or p.max() >= len(p)):
        raise ValueError("permutation image out of range")
    seen[p] = True
    if not seen.all():
        raise ValueError("permutation image is not a bijection")
    return p


def apply_permutation(perm: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Return P_perm v, i.e. out[perm[x]] = v[x]."""
    out = np.empty_like(v)
    out[perm] = v
    return out


def invert_permutation(perm: np.ndarray) -> np.ndarray:
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm), dtype=perm.dtype)
    return inv


# -- nonnegative (real) construction ------------------------------------------


def _check_unit_nonnegative(phi) -> np.ndarray:
    phi = np.asarray(phi)
    if np.iscomplexobj(phi):
        if np.any(phi.imag != 0):
            raise ValueError("use complex path: coordinates are not real")
        phi = phi.real
    phi = phi.astype(np.float64)
    if phi.ndim != 1 or len(phi) < 1:
        raise ValueError("phi must be a nonempty vector")
    if np.any(phi < 0):
        raise ValueError("use complex path: coordinates are negative")
    if abs(np.linalg.norm(phi) - 1.0) > NORM_ATOL:
        raise ValueError("phi must be a unit vector")
    return phi


def _sorted_product(phi: np.ndarray, R: int):
    """Coordinates of phi (x) mu_R under (j, r) -> j*R + r, the stable
    descending order, and the sorting permutation."""
    vals = (phi[:, None] * mu_state(R)[None, :]).ravel()
    order = np.argsort(-vals, kind="stable")
    perm = np.empty(len(vals), dtype=np.intp)
    perm[order] = np.arange(len(vals), dtype=np.intp)
    return vals, order, perm


def sort_permutation(
    phi, R: int, max_entries: int = DEFAULT_ENTRY_CAP
) -> np.ndarray:
    """Permutation sorting the coordinates of phi (x) mu_R into decreasing
    order.  Ties break by ascending original index."""
    phi = _check_unit_nonnegative(phi)
    if R < 1:
        raise ValueError("R must be >= 1")
    if len(phi) * R > max_entries:
        raise ValueError(f"too large: d*R = {len(phi) * R} exceeds cap {max_entries}")
    return _sorted_product(phi, R)[2]


def _real_bound(d: int, R: int) -> float:
    chi_ratio = harmonic_number(R // d) / harmonic_number(R)
    log_ratio = (math.log(R) - math.log(d)) / (math.log(R) + 1.0)
    return max(chi_ratio, log_ratio)


def embezzle_real(phi, R: int, max_entries: int = DEFAULT_ENTRY_CAP) -> EmbezzleResult:
    """Extract a nonnegative unit vector phi from mu_R by sorting.

    The overlap <mu_R (padded) | P (phi (x) mu_R)> is real and always at
    least chi_floor(R/d) / chi_R.
    """
    phi = _check_unit_nonnegative(phi)
    if R < 1:
        raise ValueError("R must be >= 1")
    d = len(phi)
    if d * R > max_entries:
        raise ValueError(f"too large: d*R = {d * R} exceeds cap {max_entries}")
    vals, order, perm = _sorted_product(phi, R)
    overlap = float(np.dot(mu_state(R), vals[order[:R]]))
    bound = _real_bound(d, R)
    if overlap < bound - BOUND_SLACK:
        raise RuntimeError(
            f"overlap {overlap} fell below its guaranteed bound {bound}"
        )
    return EmbezzleResult(perm, complex(overlap), bound)


# -- general (complex) construction -------------------------------------------


def _phase_shifts(phi: np.ndarray, T: int) -> np.ndarray:
    """Integer shifts r_j with |theta_j - r_j/T| <= 1/(2T), where
    c_j = b_j exp(2 pi i theta_j), theta_j in [0, 1).  Zero coordinates get
    theta_j = 0."""
    theta = np.angle(phi) / (2.0 * np.pi)
    theta = np.where(np.abs(phi) == 0, 0.0, theta % 1.0)
    return np.rint(theta * T).astype(np.intp) % T


def phase_permutation(phi, T: int) -> np.ndarray:
    """Blockwise cyclic shift on [T*d] aligning each coordinate's phase with
    a T-th root of unity: (t, j) -> ((t + r_j) mod T, j) under the index map
    (t, j) -> t*d + j."""
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim != 1 or len(phi) < 1:
        raise ValueError("phi must be a nonempty vector")
    if abs(np.linalg.norm(phi) - 1.0) > NORM_ATOL:
        raise ValueError("phi must be a unit vector")
    if T < 2:
        raise ValueError("T must be >= 2")
    d = len(phi)
    shifts = _phase_shifts(phi, T)
    t = np.arange(T, dtype=np.intp)[:, None]
    return (((t + shifts[None, :]) % T) * d + np.arange(d, dtype=np.intp)[None, :]).ravel()


def embezzle_permutation(
    phi, T: int, R: int, max_entries: int = DEFAULT_ENTRY_CAP
) -> np.ndarray:
    """Composite permutation on [T*d*R] extracting an arbitrary unit phi:
    the phase shift on (t, j) followed by the sorting step on (j, r)."""
    phi = np.asarray(phi, dtype=np.complex128)
    d = len(phi)
    if T < 2:
        raise ValueError("T must be >= 2")
    if R < 1:
        raise ValueError("R must be >= 1")
    if T * d * R > max_entries:
        raise ValueError(f"too large: T*d*R = {T * d * R} exceeds cap {max_entries}")
    shifts = _phase_shifts(phi, T)
    sigma = sort_permutation(np.abs(phi), R, max_entries=max_entries)
    t_out = (np.arange(T, dtype=np.intp)[:, None] + shifts[None, :]) % T
    return (
        t_out[:, :, None] * (d * R) + sigma.reshape(d, R)[None, :, :]
    ).reshape(-1)


def embezzle_complex(
    phi, T: int, R: int, max_entries: int = DEFAULT_ENTRY_CAP
) -> EmbezzleResult:
    """Extract an arbitrary unit vector phi from theta_T (x) mu_R.

    The overlap <theta_T (x) mu_R (padded) | P (theta_T (x) phi (x) mu_R)>
    has real part at least chi_floor(R/d) / chi_R - 2*pi/T.  The overlap is
    contracted analytically, so only the permutation itself is of size T*d*R.
    """
    phi = np.asarray(phi, dtype=np.complex128)
    if phi.ndim != 1 or len(phi) < 1:
        raise ValueError("phi must be a nonempty vector")
    if abs(np.linalg.norm(phi) - 1.0) > NORM_ATOL:
        raise ValueError("phi must be a unit vector")
    d = len(phi)
    perm = embezzle_permutation(phi, T, R, max_entries=max_entries)

    # <theta (x) mu | P | theta (x) phi (x) mu>: summing the t axis first
    # leaves one w^(-r_j) factor per block, then only the (j, r) cells whose
    # sorted position lands inside the padded mu support contribute.
    shifts = _phase_shifts(phi, T)
    sigma = sort_permutation(np.abs(phi), R, max_entries=max_entries).reshape(d, R)
    mu = mu_state(R)
    coef = phi * np.exp(-2j * np.pi * shifts / T)
    cells = coef[:, None] * mu[None, :]
    mask = sigma < R
    overlap = complex(np.sum(cells[mask] * mu[sigma[mask]]))

    bound = harmonic_number(R // d) / harmonic_number(R) - 2.0 * np.pi / T
    if overlap.real < bound - BOUND_SLACK:
        raise RuntimeError(
            f"overlap {overlap.real} fell below its guaranteed bound {bound}"
        )
    return EmbezzleResult(perm, overlap, bound)
