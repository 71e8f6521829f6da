"""Exact classical network simulation over finite alphabets.

Each source holds a joint pmf over the signal slots it sends to its adjacent
parties (one slot per party, ordered by ascending party index).  Each party
holds a conditional pmf over its output alphabet given the received signals
(conditioning axes ordered by ascending source index).  The joint output
distribution is computed by exact dense summation over all signal tuples,
factored as a tensor contraction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_hermitian
from .network import Network

PMF_ATOL = 1e-12
MASS_ATOL = 1e-9
NEG_ATOL = 1e-15
DEFAULT_TABLE_CAP = 10_000_000


@dataclass(frozen=True)
class SourceModel:
    """Signal pmfs keyed by source name.

    ``pmfs[name]`` has one axis per adjacent party (ascending party index);
    the axis length is that slot's alphabet size.  Each pmf is nonnegative
    and sums to one within ``PMF_ATOL``.
    """

    pmfs: dict[str, np.ndarray]

    def __post_init__(self):
        for name, p in self.pmfs.items():
            p = np.asarray(p, dtype=np.float64)
            if np.any(p < 0):
                raise ValueError(f"source '{name}' pmf has negative entries")
            if abs(p.sum() - 1.0) > PMF_ATOL:
                raise ValueError(f"source '{name}' pmf does not sum to 1")
            self.pmfs[name] = p


@dataclass(frozen=True)
class ResponseModel:
    """Conditional output pmfs keyed by party name.

    ``tables[name]`` has one axis per adjacent source (ascending source
    index) and a final output axis.  Every conditional slice along the output
    axis sums to one within ``PMF_ATOL``.
    """

    tables: dict[str, np.ndarray]

    def __post_init__(self):
        for name, t in self.tables.items():
            t = np.asarray(t, dtype=np.float64)
            if t.ndim < 1:
                raise ValueError(f"party '{name}' response table has no output axis")
            if np.any(t < 0):
                raise ValueError(f"party '{name}' response table has negative entries")
            sums = t.sum(axis=-1)
            if np.any(np.abs(sums - 1.0) > PMF_ATOL):
                raise ValueError(
                    f"party '{name}' conditional pmfs do not sum to 1"
                )
            self.tables[name] = t

    def alphabet(self, name: str) -> int:
        return int(self.tables[name].shape[-1])


@dataclass(frozen=True)
class OutputFunctions:
    """One complex value per output letter, keyed by party name."""

    values: dict[str, np.ndarray]

    def __post_init__(self):
        for name, v in self.values.items():
            v = np.asarray(v, dtype=np.complex128)
            if v.ndim != 1:
                raise ValueError(f"function for party '{name}' must be a vector")
            if not np.all(np.isfinite(v.view(np.float64))):
                raise ValueError(f"function for party '{name}' has non-finite values")
            self.values[name] = v


class JointDistribution:
    """Dense probability table over the product of per-party alphabets.

    Axes follow ``parties`` order.  Entries in [-1e-15, 0) are clipped to
    zero at construction; anything more negative is rejected, and the total
    mass must be within 1e-9 of one.
    """

    def __init__(self, parties, table):
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != len(parties):
            raise ValueError("one table axis per party required")
        low = table.min() if table.size else 0.0
        if low < -NEG_ATOL:
            raise ValueError(f"probability table has entry {low:.3e} < -{NEG_ATOL:.0e}")
        table = np.where(table < 0, 0.0, table)
        mass = table.sum()
        if abs(mass - 1.0) > MASS_ATOL:
            raise ValueError(f"probability table mass {mass!r} is not 1 within {MASS_ATOL:.0e}")
        self.parties = tuple(parties)
        self.table = table

    @property
    def alphabets(self) -> tuple[int, ...]:
        return self.table.shape

    def axis_of(self, party: str) -> int:
        try:
            return self.parties.index(party)
        except ValueError:
            raise ValueError(f"party '{party}' not in this distribution") from None


def _slot_of(net: Network, source_idx: int, party_idx: int) -> int:
    """Position of a party within a source's (sorted) adjacency list."""
    return net.sources[source_idx].index(party_idx)


def _validate_models(net: Network, sources: SourceModel, responses: ResponseModel):
    for name, adj in zip(net.source_names, net.sources):
        if name not in sources.pmfs:
            raise ValueError(f"no source model for '{name}'")
        p = sources.pmfs[name]
        if p.ndim != len(adj):
            raise ValueError(
                f"source '{name}' pmf has {p.ndim} slots, network expects {len(adj)}"
            )
    for i, pname in enumerate(net.party_names):
        if pname not in responses.tables:
            raise ValueError(f"no response model for party '{pname}'")
        t = responses.tables[pname]
        adj_sources = net.sources_of_party(i)
        if t.ndim != len(adj_sources) + 1:
            raise ValueError(
                f"party '{pname}' response table has {t.ndim - 1} signal axes, "
                f"network expects {len(adj_sources)}"
            )
        for axis, a in enumerate(adj_sources):
            expected = sources.pmfs[net.source_names[a]].shape[_slot_of(net, a, i)]
            if t.shape[axis] != expected:
                raise ValueError(
                    f"party '{pname}' response axis {axis} has size {t.shape[axis]}, "
                    f"source '{net.source_names[a]}' sends alphabet {expected}"
                )


def build_joint_distribution(
    net: Network,
    sources: SourceModel,
    responses: ResponseModel,
    max_table_entries: int = DEFAULT_TABLE_CAP,
) -> JointDistribution:
    """Exact joint output distribution of the network.

    p(a_1..a_n) = sum over signal tuples of the product of source pmfs times
    the product of per-party conditional pmfs.  The sum is evaluated as a
    tensor contraction (np.einsum), which is exact dense summation with the
    factorization exploited.
    """
    _validate_models(net, sources, responses)
    out_size = 1
    for pname in net.party_names:
        out_size *= responses.alphabet(pname)
    if out_size > max_table_entries:
        raise ValueError(
            f"too large: output table would hold {out_size} entries "
            f"(cap {max_table_entries})"
        )

    # One einsum variable per (source, slot) signal plus one per party output.
    signal_var = {}
    next_var = 0
    for a, adj in enumerate(net.sources):
        for i in adj:
            signal_var[(a, i)] = next_var
            next_var += 1
    output_var = {i: next_var + i for i in range(net.n_parties)}

    operands = []
    for a, (name, adj) in enumerate(zip(net.source_names, net.sources)):
        operands.append(sources.pmfs[name])
        operands.append([signal_var[(a, i)] for i in adj])
    for i, pname in enumerate(net.party_names):
        operands.append(responses.tables[pname])
        operands.append(
            [signal_var[(a, i)] for a in net.sources_of_party(i)] + [output_var[i]]
        )
    out_vars = [output_var[i] for i in range(net.n_parties)]
    table = np.einsum(*operands, out_vars, optimize="greedy")
    return JointDistribution(net.party_names, table)


def marginal(p: JointDistribution, subset) -> JointDistribution:
    """Sum out every party not in ``subset`` (party names, order preserved
    as in ``p``)."""
    names = list(subset)
    if not names:
        raise ValueError("empty subset")
    keep = sorted(p.axis_of(nm) for nm in names)
    if len(set(keep)) != len(names):
        raise ValueError("subset contains duplicates")
    drop = tuple(ax for ax in range(len(p.parties)) if ax not in keep)
    table = p.table.sum(axis=drop) if drop else p.table
    return JointDistribution(tuple(p.parties[ax] for ax in keep), table)


def check_independence(p: JointDistribution, net: Network, tol: float):
    """Check the factorization p(a_i, a_j) = p(a_i) p(a_j) for every party
    pair without a common source.

    Returns a list of ``(party_i, party_j, deviation)`` for pairs whose max
    absolute deviation exceeds ``tol``.
    """
    if p.parties != net.party_names:
        raise ValueError("distribution parties do not match the network")
    singles = {
        nm: marginal(p, [nm]).table for nm in net.party_names
    }
    violations = []
    for i, j in net.no_common_source_pairs():
        ni, nj = net.party_names[i], net.party_names[j]
        pair = marginal(p, [ni, nj]).table
        dev = float(np.max(np.abs(pair - np.outer(singles[ni], singles[nj]))))
        if dev > tol:
            violations.append((ni, nj, dev))
    return violations


def covariance_matrix(p: JointDistribution, f: OutputFunctions) -> np.ndarray:
    """Covariance matrix C_ij = E[conj(f_i) f_j] - conj(E[f_i]) E[f_j].

    Expectations are taken under ``p``; the result is Hermitian positive
    semidefinite.
    """
    n = len(p.parties)
    for nm in p.parties:
        if nm not in f.values:
            raise ValueError(f"no output function for party '{nm}'")
        if len(f.values[nm]) != p.table.shape[p.axis_of(nm)]:
            raise ValueError(f"function for party '{nm}' does not match its alphabet")
    fv = [f.values[nm] for nm in p.parties]
    means = np.empty(n, dtype=np.complex128)
    for i, nm in enumerate(p.parties):
        means[i] = np.dot(marginal(p, [nm]).table, fv[i])
    cov = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        mi = marginal(p, [p.parties[i]]).table
        cov[i, i] = np.dot(mi, np.abs(fv[i]) ** 2) - abs(means[i]) ** 2
        for j in range(i + 1, n):
            pij = marginal(p, [p.parties[i], p.parties[j]]).table
            second = np.conj(fv[i]) @ pij @ fv[j]
            cov[i, j] = second - np.conj(means[i]) * means[j]
            cov[j, i] = np.conj(cov[i, j])
    return as_hermitian(cov, atol=np.inf)


# ---------------------------------------------------------------------------
# Model JSON:
#   {"sources": {"alpha": {"alphabets": [2, 2], "pmf": [...]}},
#    "responses": {"A1": {"alphabet": 2, "table": [...]}},
#    "functions": {"A1": {"re": [...], "im": [...]}}}
# Flat arrays are row-major over lexicographic signal tuples.


def model_from_json(obj: dict, net: Network):
    """Parse model JSON; returns (SourceModel, ResponseModel, OutputFunctions or None)."""
    if "sources" not in obj or "responses" not in obj:
        raise ValueError("model JSON must contain 'sources' and 'responses'")
    pmfs = {}
    for name, entry in obj["sources"].items():
        shape = tuple(int(k) for k in entry["alphabets"])
        flat = np.asarray(entry["pmf"], dtype=np.float64)
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"source '{name}' pmf length does not match alphabets")
        pmfs[name] = flat.reshape(shape)
    tables = {}
    for name, entry in obj["responses"].items():
        out_k = int(entry["alphabet"])
        flat = np.asarray(entry["table"], dtype=np.float64)
        i = net.party_index(name)
        sig_shape = []
        for a in net.sources_of_party(i):
            src_name = net.source_names[a]
            if src_name not in pmfs:
                raise ValueError(f"no source model for '{src_name}'")
            sig_shape.append(pmfs[src_name].shape[_slot_of(net, a, i)])
        shape = tuple(sig_shape) + (out_k,)
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"party '{name}' table length does not match its signals")
        tables[name] = flat.reshape(shape)
    functions = None
    if "functions" in obj and obj["functions"]:
        values = {}
        for name, entry in obj["functions"].items():
            re = np.asarray(entry["re"], dtype=np.float64)
            im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=np.float64)
            values[name] = re + 1j * im
        functions = OutputFunctions(values)
    return SourceModel(pmfs), ResponseModel(tables), functions
