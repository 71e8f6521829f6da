"""Dual-cone objects: sign matrices, twisted Gram matrices, and the
approximation of arbitrary dual elements by twisted Gram matrices.

The dual cone of the decomposable matrices consists of all matrices whose
source blocks (principal submatrices on the parties adjacent to one source)
are positive semidefinite.  Twisted Gram matrices

    W_ii = <psi_i | psi_i>,   W_ij = <psi_i | P_i(a)^H P_j(a) | psi_j>

(for the unique common source a of parties i and j) always lie in that cone,
and conversely any dual element can be approximated by one, using the
embezzlement construction to realize all block Gram vectors as permuted
copies of a single shared vector.

Entries on party pairs without a common source are fixed to zero, so Schur
products against these matrices ignore such entries even for invalid
covariance inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import embezzle
from .linalg import as_hermitian, is_psd
from .network import Network

SIGN_ATOL = 1e-12
DUAL_MEMBER_TOL = 1e-9


@dataclass(frozen=True)
class TwistedGramSpec:
    """Shared vectors and per-(party, source) permutations.

    ``vectors`` maps party name to a vector in C^dimension; ``perms`` maps
    (party name, source name) to a 0-based permutation image array of length
    ``dimension`` for every adjacent pair.
    """

    dimension: int
    vectors: dict[str, np.ndarray]
    perms: dict[tuple[str, str], np.ndarray]

    def to_json(self) -> dict:
        return {
            "d": int(self.dimension),
            "vectors": {
                name: {"re": v.real.tolist(), "im": v.imag.tolist()}
                for name, v in self.vectors.items()
            },
            "perms": {
                f"{party}|{source}": p.tolist()
                for (party, source), p in self.perms.items()
            },
        }


def twisted_gram_spec_from_json(obj: dict) -> TwistedGramSpec:
    d = int(obj["d"])
    vectors = {}
    for name, entry in obj["vectors"].items():
        re = np.asarray(entry["re"], dtype=np.float64)
        im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=np.float64)
        vectors[name] = re + 1j * im
    perms = {}
    for key, images in obj["perms"].items():
        party, _, source = key.partition("|")
        perms[(party, source)] = embezzle.as_permutation(images, d)
    return TwistedGramSpec(d, vectors, perms)


def build_sign_matrix(net: Network, eps: dict[str, complex]) -> np.ndarray:
    """Matrix with unit diagonal and the per-source unit-modulus value on
    each source pair (conjugated below the diagonal); zero elsewhere.

    Requires every source to be bipartite.
    """
    if not net.all_bipartite():
        raise ValueError("sign matrix undefined: network has a non-bipartite source")
    n = net.n_parties
    gamma = np.eye(n, dtype=np.complex128)
    for name, (i, j) in zip(net.source_names, net.sources):
        if name not in eps:
            raise ValueError(f"no sign value for source '{name}'")
        e = complex(eps[name])
        if abs(abs(e) - 1.0) > SIGN_ATOL:
            raise ValueError(f"sign value for source '{name}' must have modulus 1")
        gamma[i, j] = e
        gamma[j, i] = np.conj(e)
    return gamma


def _validate_spec(net: Network, spec: TwistedGramSpec):
    d = spec.dimension
    for name in net.party_names:
        if name not in spec.vectors:
            raise ValueError(f"no vector for party '{name}'")
        if len(spec.vectors[name]) != d:
            raise ValueError(f"vector for party '{name}' is not of dimension {d}")
    for a, (sname, adj) in enumerate(zip(net.source_names, net.sources)):
        for i in adj:
            key = (net.party_names[i], sname)
            if key not in spec.perms:
                raise ValueError(
                    f"no permutation for party '{key[0]}' and source '{sname}'"
                )
            embezzle.as_permutation(spec.perms[key], d)


def build_twisted_gram(net: Network, spec: TwistedGramSpec) -> np.ndarray:
    """Blockwise Gram matrix of the permuted vectors.

    Diagonal entries are the squared vector norms; the (i, j) entry for a
    common-source pair applies each party's permutation for that source
    before taking the inner product.  Requires an NDCS network.
    """
    if not net.is_ndcs().is_ndcs:
        raise ValueError("ambiguous block: network is not NDCS")
    _validate_spec(net, spec)
    n = net.n_parties
    w = np.zeros((n, n), dtype=np.complex128)
    psi = [np.asarray(spec.vectors[nm], dtype=np.complex128) for nm in net.party_names]
    for i in range(n):
        w[i, i] = np.vdot(psi[i], psi[i]).real
    for a, (sname, adj) in enumerate(zip(net.source_names, net.sources)):
        for xi in range(len(adj)):
            i = adj[xi]
            pi = spec.perms[(net.party_names[i], sname)]
            ui = embezzle.apply_permutation(pi, psi[i])
            for xj in range(xi + 1, len(adj)):
                j = adj[xj]
                pj = spec.perms[(net.party_names[j], sname)]
                uj = embezzle.apply_permutation(pj, psi[j])
                w[i, j] = np.vdot(ui, uj)
                w[j, i] = np.conj(w[i, j])
                del uj
            del ui
    return w


def is_in_dual_cone(net: Network, w, tol: float) -> bool:
    """True iff every source block of ``w`` is positive semidefinite at ``tol``."""
    w = np.asarray(w, dtype=np.complex128)
    if w.shape != (net.n_parties, net.n_parties):
        raise ValueError("matrix size does not match the network")
    for ix in net.blocks():
        if not is_psd(w[np.ix_(ix, ix)], tol):
            return False
    return True


def _gram_vectors(block: np.ndarray) -> list[np.ndarray]:
    """Vectors phi_i with <phi_i | phi_j> equal to the (PSD-clipped) block."""
    w, v = np.linalg.eigh(block)
    np.clip(w, 0.0, None, out=w)
    g = np.sqrt(w)[:, None] * v.conj().T  # column i is phi_i
    return [g[:, i].copy() for i in range(block.shape[0])]


def approximate_dual_by_twisted_gram(
    net: Network,
    w,
    T: int,
    R: int,
    max_entries: int = embezzle.DEFAULT_ENTRY_CAP,
):
    """Approximate a dual-cone element by an explicit twisted Gram matrix.

    Per source, the block of ``w`` is factored into Gram vectors; every party
    keeps the single shared vector sqrt(w_ii) * theta_T (x) mu_R (padded into
    the common dimension T * d_g * R, d_g the largest block size), and each
    (party, source) permutation is the inverse of the embezzlement
    permutation for that block's normalized Gram vector.

    Returns (TwistedGramSpec, approximate matrix, max entry error over
    common-source pairs).  Diagonal entries are reproduced exactly.
    """
    w = as_hermitian(w)
    if w.shape[0] != net.n_parties:
        raise ValueError("matrix size does not match the network")
    if T < 2 or R < 2:
        raise ValueError("T and R must be >= 2")
    if not is_in_dual_cone(net, w, DUAL_MEMBER_TOL):
        raise ValueError("not a dual element: some source block is not PSD")
    if not net.is_ndcs().is_ndcs:
        raise ValueError("ambiguous block: network is not NDCS")

    d_g = max(len(adj) for adj in net.sources)
    dim = T * d_g * R
    if dim > max_entries:
        raise ValueError(f"too large: T*d_g*R = {dim} exceeds cap {max_entries}")

    template = np.zeros((T, d_g, R), dtype=np.complex128)
    template[:, 0, :] = np.outer(embezzle.theta_state(T), embezzle.mu_state(R))
    template = template.reshape(-1)

    vectors = {
        nm: np.sqrt(max(w[i, i].real, 0.0)) * template
        for i, nm in enumerate(net.party_names)
    }

    perms: dict[tuple[str, str], np.ndarray] = {}
    for sname, adj in zip(net.source_names, net.sources):
        block = w[np.ix_(adj, adj)]
        phis = _gram_vectors(block)
        for local, i in enumerate(adj):
            phi = np.zeros(d_g, dtype=np.complex128)
            phi[: len(phis[local])] = phis[local]
            nrm = np.linalg.norm(phi)
            if nrm <= 1e-15:
                perm = np.arange(dim, dtype=np.intp)
            else:
                forward = embezzle.embezzle_permutation(
                    phi / nrm, T, R, max_entries=max_entries
                )
                perm = embezzle.invert_permutation(forward)
            perms[(net.party_names[i], sname)] = perm

    spec = TwistedGramSpec(dim, vectors, perms)
    approx = build_twisted_gram(net, spec)

    max_block_error = 0.0
    for adj in net.sources:
        for xi in range(len(adj)):
            for xj in range(xi + 1, len(adj)):
                i, j = adj[xi], adj[xj]
                max_block_error = max(max_block_error, abs(approx[i, j] - w[i, j]))
    return spec, approx, float(max_block_error)
