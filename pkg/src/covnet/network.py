"""Network model: a two-layer graph of independent sources and parties.

A network is given by an ordered list of party names and an ordered list of
sources, each adjacent to a set of parties.  The party order fixes matrix
row/column order everywhere downstream, and the source order fixes block
update order in the solver.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class NdcsReport:
    """Result of the no-double-common-source check.

    ``violations`` holds one entry per offending party pair, as
    ``(party_i, party_j, source_a, source_b)`` with two distinct sources
    adjacent to both parties.
    """

    is_ndcs: bool
    violations: tuple[tuple[int, int, int, int], ...]


@dataclass(frozen=True)
class Network:
    party_names: tuple[str, ...]
    source_names: tuple[str, ...]
    sources: tuple[tuple[int, ...], ...]  # sorted party indices per source

    def __post_init__(self):
        n = len(self.party_names)
        if len(set(self.party_names)) != n:
            raise ValueError("duplicate party names")
        if len(set(self.source_names)) != len(self.source_names):
            raise ValueError("duplicate source names")
        if len(self.source_names) != len(self.sources):
            raise ValueError("source name/adjacency length mismatch")
        covered = set()
        for name, adj in zip(self.source_names, self.sources):
            if len(adj) == 0:
                raise ValueError(f"isolated source '{name}'")
            if any(i < 0 or i >= n for i in adj):
                raise ValueError(f"source '{name}' references an unknown party index")
            if len(set(adj)) != len(adj):
                raise ValueError(f"source '{name}' lists a party twice")
            if tuple(sorted(adj)) != tuple(adj):
                raise ValueError(f"source '{name}' adjacency must be sorted")
            covered.update(adj)
        if covered != set(range(n)):
            lonely = sorted(set(range(n)) - covered)
            names = ", ".join(self.party_names[i] for i in lonely)
            raise ValueError(f"isolated party: {names}")
        for a in range(len(self.sources)):
            for b in range(a + 1, len(self.sources)):
                sa, sb = set(self.sources[a]), set(self.sources[b])
                if sa <= sb or sb <= sa:
                    raise ValueError(
                        "redundant source: adjacency sets of "
                        f"'{self.source_names[a]}' and '{self.source_names[b]}' "
                        "are comparable"
                    )

    @property
    def n_parties(self) -> int:
        return len(self.party_names)

    @property
    def n_sources(self) -> int:
        return len(self.sources)

    def party_index(self, name: str) -> int:
        try:
            return self.party_names.index(name)
        except ValueError:
            raise ValueError(f"unknown party '{name}'") from None

    def source_index(self, name: str) -> int:
        try:
            return self.source_names.index(name)
        except ValueError:
            raise ValueError(f"unknown source '{name}'") from None

    @cached_property
    def _party_sources(self) -> tuple[tuple[int, ...], ...]:
        per = [[] for _ in self.party_names]
        for a, adj in enumerate(self.sources):
            for i in adj:
                per[i].append(a)
        return tuple(tuple(s) for s in per)

    def sources_of_party(self, i: int) -> tuple[int, ...]:
        """Indices of sources adjacent to party ``i``, ascending."""
        return self._party_sources[i]

    def blocks(self) -> list[np.ndarray]:
        """Party-index arrays of each source block, in source order."""
        return [np.asarray(adj, dtype=np.intp) for adj in self.sources]

    def is_ndcs(self) -> NdcsReport:
        """Check that every party pair shares at most one source."""
        violations = []
        for i in range(self.n_parties):
            for j in range(i + 1, self.n_parties):
                shared = [
                    a for a in self._party_sources[i] if j in self.sources[a]
                ]
                if len(shared) >= 2:
                    violations.append((i, j, shared[0], shared[1]))
        return NdcsReport(not violations, tuple(violations))

    def common_source(self, i: int, j: int) -> int | None:
        """The unique source adjacent to both parties, or None.

        Only meaningful on NDCS networks; raises otherwise.
        """
        if i == j:
            raise ValueError("common_source requires two distinct parties")
        if not self.is_ndcs().is_ndcs:
            raise ValueError("ambiguous common source: network is not NDCS")
        for a in self._party_sources[i]:
            if j in self.sources[a]:
                return a
        return None

    def all_bipartite(self) -> bool:
        return all(len(adj) == 2 for adj in self.sources)

    def no_common_source_pairs(self) -> tuple[tuple[int, int], ...]:
        """Party pairs (i < j) that do not share any source."""
        out = []
        for i in range(self.n_parties):
            si = set(self._party_sources[i])
            for j in range(i + 1, self.n_parties):
                if not si.intersection(self._party_sources[j]):
                    out.append((i, j))
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "parties": list(self.party_names),
            "sources": [
                {"name": nm, "parties": [self.party_names[i] for i in adj]}
                for nm, adj in zip(self.source_names, self.sources)
            ],
        }


def parse_network(spec) -> Network:
    """Build a validated :class:`Network` from JSON text or a parsed dict.

    Expected form::

        {"parties": ["A1", "A2"], "sources": [{"name": "alpha", "parties": ["A1", "A2"]}]}
    """
    obj = json.loads(spec) if isinstance(spec, str) else spec
    if not isinstance(obj, dict) or "parties" not in obj or "sources" not in obj:
        raise ValueError("network JSON must contain 'parties' and 'sources'")
    parties = [str(p) for p in obj["parties"]]
    if len(set(parties)) != len(parties):
        raise ValueError("duplicate party names")
    index = {p: i for i, p in enumerate(parties)}
    names, adjs = [], []
    for k, src in enumerate(obj["sources"]):
        name = str(src.get("name", f"s{k}"))
        members = src.get("parties", [])
        for p in members:
            if p not in index:
                raise ValueError(f"unknown party '{p}' in source '{name}'")
        adjs.append(tuple(sorted(index[p] for p in members)))
        names.append(name)
    return Network(tuple(parties), tuple(names), tuple(adjs))


def load_network(path) -> Network:
    with open(path) as fh:
        return parse_network(fh.read())
