"""Non-fanout inflations and the compressions that extract Schur products.

An inflation of order d makes d copies of every source and party and wires
copy k of a source to copy pi_i(k)^-1 of each adjacent party i, where pi_i
is a per-(party, source) permutation.  Copies reuse the original signal
distributions, response functions and output functions, so the inflated
covariance matrix is determined by the base covariance through two rules:
copies sharing a source copy inherit the base covariance, copies without a
common source are uncorrelated.

Conjugating the inflated covariance blockwise (Hadamard, Fourier, or by
isometries built from arbitrary vectors) and taking one entry per block
yields the Schur product of the base covariance with a sign matrix or a
twisted Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import embezzle
from .linalg import as_hermitian
from .network import Network
from .simulate import OutputFunctions, ResponseModel, SourceModel

OFFBLOCK_ATOL = 1e-9
GRAM_SCHMIDT_SKIP = 1e-8


@dataclass(frozen=True)
class InflationSpec:
    """Inflation order and the wiring permutation for every adjacent
    (party, source) pair, as 0-based image arrays of length ``order``."""

    order: int
    perms: dict[tuple[str, str], np.ndarray]

    def to_json(self) -> dict:
        return {
            "d": int(self.order),
            "perms": {
                f"{party}|{source}": p.tolist()
                for (party, source), p in self.perms.items()
            },
        }


def inflation_spec_from_json(obj: dict) -> InflationSpec:
    d = int(obj["d"])
    perms = {}
    for key, images in obj.get("perms", {}).items():
        party, _, source = key.partition("|")
        perms[(party, source)] = embezzle.as_permutation(images, d)
    return InflationSpec(d, perms)


@dataclass(frozen=True)
class InflatedNetwork:
    base: Network
    spec: InflationSpec
    network: Network  # the inflated graph, n*d parties and m*d sources

    def party_copy(self, i: int, k: int) -> int:
        return i * self.spec.order + k

    def source_copy(self, a: int, k: int) -> int:
        return a * self.spec.order + k


def _copy_name(name: str, k: int) -> str:
    return f"{name}^({k + 1})"


def _spec_perm(net: Network, spec: InflationSpec, party_idx: int, source_idx: int):
    key = (net.party_names[party_idx], net.source_names[source_idx])
    if key not in spec.perms:
        raise ValueError(
            f"incomplete spec: missing permutation for party '{key[0]}' "
            f"and source '{key[1]}'"
        )
    return embezzle.as_permutation(spec.perms[key], spec.order)


def build_inflation(net: Network, spec: InflationSpec) -> InflatedNetwork:
    """Wire up the inflated network.

    Source copy (a, k) is adjacent to party copy (i, pi_i_a^-1(k)) for every
    base-adjacent pair; the result is itself a valid network.
    """
    d = spec.order
    if d < 1:
        raise ValueError("inflation order must be >= 1")
    party_names = tuple(
        _copy_name(nm, k) for nm in net.party_names for k in range(d)
    )
    source_names = []
    adjacency = []
    for a, (sname, adj) in enumerate(zip(net.source_names, net.sources)):
        invs = {i: embezzle.invert_permutation(_spec_perm(net, spec, i, a)) for i in adj}
        for k in range(d):
            source_names.append(_copy_name(sname, k))
            adjacency.append(tuple(sorted(i * d + int(invs[i][k]) for i in adj)))
    inflated = Network(party_names, tuple(source_names), tuple(adjacency))
    return InflatedNetwork(net, spec, inflated)


def sign_inflation(net: Network, eps: dict[str, int]) -> InflationSpec:
    """Order-2 spec realizing a +-1 sign per bipartite source: +1 keeps both
    endpoint copies parallel, -1 swaps the copies at the higher-indexed
    endpoint."""
    if not net.all_bipartite():
        raise ValueError("sign inflation requires bipartite sources")
    identity = np.arange(2, dtype=np.intp)
    swap = identity[::-1].copy()
    perms = {}
    for sname, (i, j) in zip(net.source_names, net.sources):
        if sname not in eps:
            raise ValueError(f"no sign value for source '{sname}'")
        e = int(eps[sname])
        if e not in (1, -1):
            raise ValueError(f"sign for source '{sname}' must be +1 or -1")
        perms[(net.party_names[i], sname)] = identity
        perms[(net.party_names[j], sname)] = identity if e == 1 else swap
    return InflationSpec(2, perms)


def shift_inflation(net: Network, shifts: dict[str, int], d: int) -> InflationSpec:
    """Order-d spec connecting copy k of each bipartite source to copy k of
    its lower-indexed party and copy k + t (mod d) of the other."""
    if not net.all_bipartite():
        raise ValueError("shift inflation requires bipartite sources")
    if d < 1:
        raise ValueError("inflation order must be >= 1")
    identity = np.arange(d, dtype=np.intp)
    perms = {}
    for sname, (i, j) in zip(net.source_names, net.sources):
        if sname not in shifts:
            raise ValueError(f"no shift for source '{sname}'")
        t = int(shifts[sname])
        if t < 0 or t >= d:
            raise ValueError(f"shift for source '{sname}' must lie in [0, {d})")
        perms[(net.party_names[i], sname)] = identity
        # pi_j(x) = x - t mod d, so that pi_j^-1(k) = k + t mod d.
        perms[(net.party_names[j], sname)] = (identity - t) % d
    return InflationSpec(d, perms)


def _perm_matrix(perm: np.ndarray) -> np.ndarray:
    d = len(perm)
    m = np.zeros((d, d))
    m[perm, np.arange(d)] = 1.0
    return m


def inflated_covariance(
    net: Network, c, spec: InflationSpec, variances
) -> np.ndarray:
    """Assemble the (n*d) x (n*d) covariance matrix of the inflated network
    from the base covariance ``c``.

    Block rules (party-major layout, d x d blocks): the (i, i) block is
    Var_i * I; the (i, j) block is zero without a common source and
    c_ij * P_i^H P_j for the unique common source's permutations.
    """
    if not net.is_ndcs().is_ndcs:
        raise ValueError("inflated covariance requires an NDCS network")
    c = as_hermitian(c)
    n = net.n_parties
    if c.shape[0] != n:
        raise ValueError("covariance size does not match the network")
    variances = np.asarray(variances, dtype=np.float64)
    if variances.shape != (n,):
        raise ValueError(f"expected {n} variances")
    for i in range(n):
        if abs(c[i, i] - variances[i]) > OFFBLOCK_ATOL:
            raise ValueError(
                f"diagonal entry ({i}, {i}) does not match the supplied variance"
            )
    for i, j in net.no_common_source_pairs():
        if abs(c[i, j]) > OFFBLOCK_ATOL:
            raise ValueError(
                f"entry ({i}, {j}) must vanish: parties share no source"
            )
    d = spec.order
    out = np.zeros((n * d, n * d), dtype=np.complex128)
    for i in range(n):
        out[i * d : (i + 1) * d, i * d : (i + 1) * d] = variances[i] * np.eye(d)
    for a, (sname, adj) in enumerate(zip(net.source_names, net.sources)):
        mats = {i: _perm_matrix(_spec_perm(net, spec, i, a)) for i in adj}
        for xi in range(len(adj)):
            for xj in range(xi + 1, len(adj)):
                i, j = adj[xi], adj[xj]
                block = c[i, j] * (mats[i].T @ mats[j])
                out[i * d : (i + 1) * d, j * d : (j + 1) * d] = block
                out[j * d : (j + 1) * d, i * d : (i + 1) * d] = block.conj().T
    return out


def inflate_models(
    net: Network,
    infl: InflatedNetwork,
    sources: SourceModel,
    responses: ResponseModel,
    functions: OutputFunctions | None = None,
):
    """Copy classical models onto an inflated network.

    Every source copy reuses its base pmf and every party copy its base
    response table and output function; slot and conditioning orders carry
    over because copies keep the base index order.
    """
    d = infl.spec.order
    pmfs = {}
    for sname in net.source_names:
        for k in range(d):
            pmfs[_copy_name(sname, k)] = sources.pmfs[sname]
    tables = {}
    for pname in net.party_names:
        for k in range(d):
            tables[_copy_name(pname, k)] = responses.tables[pname]
    fns = None
    if functions is not None:
        values = {}
        for pname in net.party_names:
            for k in range(d):
                values[_copy_name(pname, k)] = functions.values[pname]
        fns = OutputFunctions(values)
    return SourceModel(pmfs), ResponseModel(tables), fns


def hadamard_extract(infl_cov, n: int) -> np.ndarray:
    """Extract the Schur product with a +-1 sign matrix from an order-2
    inflated covariance: conjugate every party's copy pair by the 2x2
    Hadamard matrix and keep the second-copy principal submatrix."""
    infl_cov = np.asarray(infl_cov, dtype=np.complex128)
    if infl_cov.shape != (2 * n, 2 * n):
        raise ValueError(
            f"odd dimension: expected a {2 * n}x{2 * n} matrix, got {infl_cov.shape}"
        )
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
    u = np.kron(np.eye(n), h)
    x = u @ infl_cov @ u.conj().T
    idx = 2 * np.arange(n) + 1
    return as_hermitian(x[np.ix_(idx, idx)], atol=np.inf)


def fourier_extract(infl_cov, n: int, d: int, component: int) -> np.ndarray:
    """Extract the Schur product with the root-of-unity sign matrix
    eps(a) = w^(t_a * component) from an order-d shift-inflated covariance:
    conjugate every party's copy block by the d-point DFT and keep the
    ``component``-th diagonal slot per party."""
    infl_cov = np.asarray(infl_cov, dtype=np.complex128)
    if infl_cov.shape != (n * d, n * d):
        raise ValueError(
            f"dimension not divisible by d: expected {n * d}x{n * d}, "
            f"got {infl_cov.shape}"
        )
    if component < 0 or component >= d:
        raise ValueError(f"component must lie in [0, {d})")
    grid = np.arange(d)
    f = np.exp(-2j * np.pi * np.outer(grid, grid) / d) / np.sqrt(d)
    u = np.kron(np.eye(n), f)
    x = u @ infl_cov @ u.conj().T
    idx = d * np.arange(n) + component
    return as_hermitian(x[np.ix_(idx, idx)], atol=np.inf)


def extend_to_isometry(psi) -> np.ndarray:
    """A d x d matrix R with first column psi and R R^H = R^H R = |psi|^2 I.

    Zero input gives the zero matrix; otherwise the normalized psi is
    extended to an orthonormal basis by deterministic Gram-Schmidt over the
    standard basis (candidates within 1e-8 of the current span are skipped)
    and the result is scaled by |psi|.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    d = len(psi)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        return np.zeros((d, d), dtype=np.complex128)
    cols = [psi / nrm]
    for b in range(d):
        if len(cols) == d:
            break
        v = np.zeros(d, dtype=np.complex128)
        v[b] = 1.0
        for c in cols:
            v -= np.vdot(c, v) * c
        vn = np.linalg.norm(v)
        if vn > GRAM_SCHMIDT_SKIP:
            cols.append(v / vn)
    if len(cols) != d:
        raise RuntimeError("orthonormal extension failed")
    return nrm * np.column_stack(cols)


def compress_by_vectors(infl_cov, vectors) -> np.ndarray:
    """Compress an order-d inflated covariance to the Schur product with the
    twisted Gram matrix of ``vectors`` and the inflation's permutations:
    conjugate block (i, j) by the isometries of psi_i, psi_j and keep each
    block's (0, 0) entry."""
    vectors = [np.asarray(v, dtype=np.complex128) for v in vectors]
    n = len(vectors)
    if n == 0:
        raise ValueError("need at least one vector")
    d = len(vectors[0])
    if any(len(v) != d for v in vectors):
        raise ValueError("vector dimension mismatch")
    infl_cov = np.asarray(infl_cov, dtype=np.complex128)
    if infl_cov.shape != (n * d, n * d):
        raise ValueError(
            f"expected a {n * d}x{n * d} inflated covariance, got {infl_cov.shape}"
        )
    rs = [extend_to_isometry(v) for v in vectors]
    out = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            block = infl_cov[i * d : (i + 1) * d, j * d : (j + 1) * d]
            out[i, j] = (rs[i].conj().T @ block @ rs[j])[0, 0]
    return as_hermitian(out, atol=np.inf)
