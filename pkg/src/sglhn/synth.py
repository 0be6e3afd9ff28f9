"""Synthetic signed graphs, filtered graph signals and hidden-node sampling.

Randomness comes from numpy's ``Philox`` counter-based bit generator.  Each
operation draws from its own stream, derived from the user seed through
``SeedSequence(seed, spawn_key=(stream,))``, so e.g. the graph and the
signals of one trial never share random numbers.  Draws are laid out so that
smaller requests are prefixes of larger ones: the first ``k`` signals for a
seed do not depend on how many signals were requested in total, and the
hidden set for ``h`` nodes is contained in the hidden set for ``h + 1``.
Results are bit-reproducible within one numpy version.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import (
    LaplacianPair,
    SignedGraph,
    laplacian,
    num_pairs,
    split_signed,
)

_STREAM_GRAPH = 0
_STREAM_SIGNS = 1
_STREAM_SIGNALS = 2
_STREAM_NOISE = 3
_STREAM_HIDE = 4

RANK_RTOL = 1e-8


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SignalSet:
    """``n x k`` matrix whose columns are graph signals."""

    X: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or min(X.shape) < 1:
            raise ValueError(f"signal matrix must be 2-D and non-empty, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("signal matrix has non-finite entries")
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Partition:
    """Split of ``original_n`` nodes into observed and hidden index lists."""

    observed: tuple[int, ...]
    hidden: tuple[int, ...]
    original_n: int

    def __post_init__(self):
        obs = tuple(int(i) for i in self.observed)
        hid = tuple(int(i) for i in self.hidden)
        if sorted(obs + hid) != list(range(self.original_n)):
            raise ValueError("observed and hidden must partition range(original_n)")
        object.__setattr__(self, "observed", obs)
        object.__setattr__(self, "hidden", hid)

    @property
    def B(self) -> int:
        return len(self.observed)

    @property
    def H(self) -> int:
        return len(self.hidden)


@dataclass(frozen=True)
class ObservedData:
    partition: Partition
    XB: np.ndarray
    CB: np.ndarray

    @property
    def k(self) -> int:
        return self.XB.shape[1]


@dataclass
class GenConfig:
    """Parameters of the synthetic ER benchmark."""

    n: int = 30
    p_edge: float = 0.3
    neg_fraction: float = 0.5
    k: int = 50
    noise_sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 0.0 <= self.p_edge <= 1.0:
            raise ValueError("p_edge must lie in [0, 1]")
        if not 0.0 <= self.neg_fraction <= 1.0:
            raise ValueError("neg_fraction must lie in [0, 1]")
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")


def er_graph(n: int, p_edge: float, seed: int) -> np.ndarray:
    """Erdos-Renyi adjacency with 0/1 weights."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 <= p_edge <= 1.0:
        raise ValueError("p_edge must lie in [0, 1]")
    rng = make_rng(seed, _STREAM_GRAPH)
    present = rng.random(num_pairs(n)) < p_edge
    W = np.zeros((n, n))
    iu = np.triu_indices(n, k=1)
    W[iu] = present.astype(float)
    return W + W.T


def assign_signs(W: np.ndarray, neg_fraction: float, seed: int) -> SignedGraph:
    """Flip ``round(neg_fraction * |E|)`` uniformly chosen edges to weight -1.

    Rounding is half-up.  Remaining edges get weight +1.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    iu = np.triu_indices(n, k=1)
    edges = np.flatnonzero(W[iu] != 0)
    n_neg = int(np.floor(neg_fraction * len(edges) + 0.5))
    rng = make_rng(seed, _STREAM_SIGNS)
    neg = rng.choice(edges, size=n_neg, replace=False) if n_neg else np.array([], int)
    vals = np.zeros(len(iu[0]))
    vals[edges] = 1.0
    vals[neg] = -1.0
    S = np.zeros((n, n))
    S[iu] = vals
    return SignedGraph(S + S.T)


def signed_er_graph(cfg: GenConfig) -> SignedGraph:
    return assign_signs(er_graph(cfg.n, cfg.p_edge, cfg.seed), cfg.neg_fraction, cfg.seed)


def sym_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.abs(M).max())) if M.size else 1.0
    if np.any(np.abs(M - M.T) > 1e-10 * scale):
        raise ValueError("matrix is not symmetric")
    return np.linalg.eigh(0.5 * (M + M.T))


def _pinv_spectrum(lam: np.ndarray) -> np.ndarray:
    thr = RANK_RTOL * np.abs(lam).max() if lam.size else 0.0
    out = np.zeros_like(lam)
    keep = np.abs(lam) > thr
    out[keep] = 1.0 / lam[keep]
    return out


def spectral_filter(lp: LaplacianPair) -> np.ndarray:
    """``U h1(Lambda) U^T + V h2(Sigma) V^T``: low-pass on ``L+``, high-pass on ``L-``.

    ``h1`` is the normalized pseudo-inverse spectrum of ``L+`` and ``h2`` the
    normalized spectrum of ``L-``.  An all-zero ``L-`` contributes nothing.
    """
    lam, U = sym_eig(lp.Lplus)
    h1 = _pinv_spectrum(lam)
    nrm = np.linalg.norm(h1)
    if nrm == 0:
        raise ValueError("positive Laplacian is zero; low-pass filter undefined")
    h1 /= nrm
    F = (U * h1) @ U.T
    sig, V = sym_eig(lp.Lminus)
    nrm = np.linalg.norm(sig)
    if nrm > 0:
        F += (V * (sig / nrm)) @ V.T
    return F


def gen_signals(lp: LaplacianPair, k: int, noise_sigma: float, seed: int) -> SignalSet:
    """Draw ``k`` filtered Gaussian signals plus white noise of std ``noise_sigma``."""
    if k < 1:
        raise ValueError("k must be positive")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    F = spectral_filter(lp)
    n = lp.n
    # (k, n) draws transposed keep the first k columns a prefix of any longer run.
    X0 = make_rng(seed, _STREAM_SIGNALS).standard_normal((k, n)).T
    X = F @ X0
    if noise_sigma > 0:
        X = X + noise_sigma * make_rng(seed, _STREAM_NOISE).standard_normal((k, n)).T
    return SignalSet(X)


def sample_covariance(X: np.ndarray) -> np.ndarray:
    """Uncentered sample second moment ``X X^T / k``."""
    X = np.asarray(X, dtype=float)
    C = X @ X.T / X.shape[1]
    return 0.5 * (C + C.T)


def partition_nodes(n: int, h_count: int, seed: int) -> Partition:
    if not 0 <= h_count < n:
        raise ValueError(f"hidden count must satisfy 0 <= h < n, got h={h_count}, n={n}")
    perm = make_rng(seed, _STREAM_HIDE).permutation(n)
    hidden = np.sort(perm[:h_count])
    observed = np.sort(perm[h_count:])
    return Partition(tuple(observed), tuple(hidden), n)


def observe(x: SignalSet, part: Partition) -> ObservedData:
    XB = x.X[list(part.observed), :]
    return ObservedData(part, XB, sample_covariance(XB))


def hide_nodes(x: SignalSet, h_count: int, seed: int) -> ObservedData:
    """Hide ``h_count`` uniformly chosen nodes and keep the rest in ascending order."""
    return observe(x, partition_nodes(x.n, h_count, seed))


def observed_groundtruth(g: SignedGraph, part: Partition) -> LaplacianPair:
    """Laplacians of the signed graph restricted to the observed nodes."""
    parts = split_signed(g)
    idx = np.ix_(part.observed, part.observed)
    return LaplacianPair(laplacian(parts.Wplus[idx]), laplacian(parts.Wminus[idx]))
