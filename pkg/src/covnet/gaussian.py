"""Gaussian network sampler: realize a decomposable matrix as an actual
network covariance.

Each source draws a zero-mean multivariate Gaussian with its term's block
covariance and sends one coordinate to each adjacent party; every party
outputs the sum of its received coordinates.  The population covariance of
the outputs is then exactly the sum of the terms.

Randomness comes from numpy's Philox counter-based generator, keyed by the
model seed with one jumped stream per source, so batches reproduce exactly
for a fixed seed (per build; Gaussian variates go through the inverse normal
CDF, scipy.special.ndtri, on Philox uniforms).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .linalg import is_psd
from .network import Network

TERM_PSD_TOL = 1e-8
EIG_CLIP = -1e-10
SUPPORT_ATOL = 1e-12


@dataclass(frozen=True)
class GaussianNetworkModel:
    """Per-source real PSD covariance terms (full n x n arrays supported on
    each source's block) plus a 64-bit seed."""

    net: Network
    terms: dict[str, np.ndarray]
    seed: int

    def __post_init__(self):
        n = self.net.n_parties
        for name in self.net.source_names:
            if name not in self.terms:
                raise ValueError(f"no covariance term for source '{name}'")
        for name, term in self.terms.items():
            a = self.net.source_index(name)
            term = np.asarray(term, dtype=np.float64)
            if term.shape != (n, n):
                raise ValueError(f"term '{name}' must be {n}x{n}")
            if np.max(np.abs(term - term.T)) > SUPPORT_ATOL:
                raise ValueError(f"term '{name}' is not symmetric")
            supp = np.zeros((n, n), dtype=bool)
            ix = list(self.net.sources[a])
            supp[np.ix_(ix, ix)] = True
            if np.any(np.abs(term[~supp]) > SUPPORT_ATOL):
                raise ValueError(f"term '{name}' has entries outside its block")
            if not is_psd(term, TERM_PSD_TOL):
                raise ValueError(f"invalid source covariance '{name}': not PSD")
            self.terms[name] = term


@dataclass(frozen=True)
class SampleBatch:
    samples: np.ndarray  # (count, n_parties) float64

    def __post_init__(self):
        if self.samples.ndim != 2 or self.samples.shape[0] < 1:
            raise ValueError("batch must hold at least one sample")

    @property
    def count(self) -> int:
        return int(self.samples.shape[0])


def _factor(block: np.ndarray) -> np.ndarray:
    """F with F F^T equal to the block (negative eigenvalues below -1e-10
    would have been rejected as non-PSD; the rest are zeroed)."""
    w, v = np.linalg.eigh(block)
    np.clip(w, 0.0, None, out=w)
    return v * np.sqrt(w)


def sample(model: GaussianNetworkModel, count: int) -> SampleBatch:
    """Draw ``count`` joint output samples; deterministic given the seed."""
    if count < 1:
        raise ValueError("count must be >= 1")
    net = model.net
    n = net.n_parties
    out = np.zeros((count, n), dtype=np.float64)
    base = np.random.Philox(key=np.uint64(model.seed))
    for a, (name, adj) in enumerate(zip(net.source_names, net.sources)):
        ix = list(adj)
        factor = _factor(model.terms[name][np.ix_(ix, ix)])
        gen = np.random.Generator(base.jumped(a))
        u = gen.random((count, len(ix)))
        z = ndtri(np.clip(u, 1e-300, None))
        out[:, ix] += z @ factor.T
    return SampleBatch(out)


def sample_covariance(batch: SampleBatch) -> np.ndarray:
    """Empirical covariance with 1/(count - 1) normalization."""
    if batch.count < 2:
        raise ValueError("need at least two samples")
    x = batch.samples - batch.samples.mean(axis=0)
    cov = (x.T @ x) / (batch.count - 1)
    return 0.5 * (cov + cov.T)


def write_csv(path, batch: SampleBatch) -> None:
    np.savetxt(path, batch.samples, delimiter=",")
