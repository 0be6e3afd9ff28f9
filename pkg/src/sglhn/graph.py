"""Signed graph data model and edge-vector algebra.

Every solver in the package works on the strictly upper-triangular part of a
Laplacian, ordered lexicographically by ``(i, j)`` with ``i < j``.  For a
vector ``ell`` of off-diagonal Laplacian entries the full Laplacian is

    L = from_upper_vec(ell) + diag(-S @ ell)

where ``S`` is the node/edge-slot incidence matrix of the complete graph
(``S[i, e] = 1`` iff node ``i`` is an endpoint of slot ``e``).  ``S`` is
never materialized in the solvers; :class:`PairIncidence` applies it through
its endpoint table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

SYM_TOL = 1e-10


def num_pairs(b: int) -> int:
    """Number of unordered node pairs ``b(b-1)/2``."""
    return b * (b - 1) // 2


def nodes_from_pairs(p: int) -> int:
    """Inverse of :func:`num_pairs`; raises if ``p`` is not triangular."""
    b = int(round((1 + np.sqrt(1 + 8 * p)) / 2))
    if num_pairs(b) != p:
        raise ValueError(f"{p} is not a valid edge-vector length b(b-1)/2")
    return b


def _check_square(A: np.ndarray, name: str = "matrix") -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    return A


def _is_symmetric(A: np.ndarray, tol: float = SYM_TOL) -> bool:
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    return bool(np.all(np.abs(A - A.T) <= tol * scale))


def _check_adjacency(W: np.ndarray, name: str) -> np.ndarray:
    W = _check_square(W, name)
    if not _is_symmetric(W):
        raise ValueError(f"{name} must be symmetric")
    if np.any(np.diag(W) != 0):
        raise ValueError(f"{name} must have a zero diagonal")
    return W


@dataclass(frozen=True)
class SignedGraph:
    """Undirected signed graph given by its symmetric weight matrix.

    Positive entries are friendly/trust edges, negative entries antagonistic
    ones, zeros mean no edge.
    """

    W: np.ndarray

    def __post_init__(self):
        W = _check_adjacency(self.W, "W")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]


@dataclass(frozen=True)
class UnsignedGraphPair:
    """Positive and negative parts of a signed graph, both nonnegative."""

    Wplus: np.ndarray
    Wminus: np.ndarray

    def __post_init__(self):
        for name in ("Wplus", "Wminus"):
            W = _check_adjacency(getattr(self, name), name)
            if np.any(W < 0):
                raise ValueError(f"{name} must be entrywise nonnegative")
            W.setflags(write=False)
            object.__setattr__(self, name, W)
        if self.Wplus.shape != self.Wminus.shape:
            raise ValueError("Wplus and Wminus differ in shape")
        if np.any(self.Wplus * self.Wminus != 0):
            raise ValueError("Wplus and Wminus must have disjoint supports")

    @property
    def n(self) -> int:
        return self.Wplus.shape[0]


@dataclass(frozen=True)
class LaplacianPair:
    """Combinatorial Laplacians of the positive and negative sub-graphs.

    Only light validation (shape and symmetry) happens on construction,
    because solver iterates are rescaled copies that match the combinatorial
    structure up to rounding.  Use :meth:`violations` for a full audit.
    """

    Lplus: np.ndarray
    Lminus: np.ndarray

    def __post_init__(self):
        Lp = _check_square(self.Lplus, "Lplus")
        Lm = _check_square(self.Lminus, "Lminus")
        if Lp.shape != Lm.shape:
            raise ValueError("Lplus and Lminus differ in shape")
        object.__setattr__(self, "Lplus", Lp)
        object.__setattr__(self, "Lminus", Lm)

    @property
    def n(self) -> int:
        return self.Lplus.shape[0]

    def violations(self, tol: float = 1e-9) -> list[str]:
        """List the Laplacian-pair invariants that fail at tolerance ``tol``."""
        out = []
        off = ~np.eye(self.n, dtype=bool)
        for name, L in (("Lplus", self.Lplus), ("Lminus", self.Lminus)):
            if not _is_symmetric(L, tol):
                out.append(f"{name} not symmetric")
            if np.any(L[off] > tol):
                out.append(f"{name} has positive off-diagonal entries")
            if np.any(np.abs(L.sum(axis=1)) > tol * max(1.0, np.abs(L).max())):
                out.append(f"{name} rows do not sum to zero")
        if np.any((self.Lplus[off] != 0) & (self.Lminus[off] != 0)):
            out.append("off-diagonal supports overlap")
        return out


@dataclass(frozen=True)
class PairIncidence:
    """Incidence operator ``S`` between ``b`` nodes and the ``b(b-1)/2`` pair slots.

    ``S @ upper_vec(A) == A @ 1`` for every symmetric zero-diagonal ``A``.
    """

    b: int
    rows: np.ndarray = field(init=False, repr=False)
    cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("node count must be positive")
        i, j = np.triu_indices(self.b, k=1)
        i.setflags(write=False)
        j.setflags(write=False)
        object.__setattr__(self, "rows", i)
        object.__setattr__(self, "cols", j)

    @property
    def p(self) -> int:
        return len(self.rows)

    @property
    def endpoints(self) -> np.ndarray:
        """``(p, 2)`` table mapping slot ``e`` to its node pair ``(i, j)``."""
        return np.column_stack([self.rows, self.cols])

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``S @ v``: node-wise sum of incident slot values."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.p,):
            raise ValueError(f"expected edge vector of length {self.p}, got {v.shape}")
        return (np.bincount(self.rows, weights=v, minlength=self.b)
                + np.bincount(self.cols, weights=v, minlength=self.b))

    def adjoint(self, x: np.ndarray) -> np.ndarray:
        """``S.T @ x``: slot ``(i, j)`` receives ``x[i] + x[j]``."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.b,):
            raise ValueError(f"expected node vector of length {self.b}, got {x.shape}")
        return x[self.rows] + x[self.cols]

    def gram(self, v: np.ndarray) -> np.ndarray:
        """``(2I + S.T S) @ v``."""
        return 2.0 * v + self.adjoint(self.apply(v))

    def dense(self) -> np.ndarray:
        """Materialize ``S`` as a dense ``b x p`` 0/1 matrix (tests and debugging only)."""
        S = np.zeros((self.b, self.p))
        e = np.arange(self.p)
        S[self.rows, e] = 1.0
        S[self.cols, e] = 1.0
        return S


@lru_cache(maxsize=64)
def incidence(b: int) -> PairIncidence:
    """Cached :class:`PairIncidence` for ``b`` nodes."""
    return PairIncidence(b)


def split_signed(g: SignedGraph) -> UnsignedGraphPair:
    """Decompose a signed graph into its positive and negative unsigned parts."""
    if not isinstance(g, SignedGraph):
        g = SignedGraph(np.asarray(g, dtype=float))
    W = g.W
    return UnsignedGraphPair(np.where(W > 0, W, 0.0), np.where(W < 0, -W, 0.0))


def laplacian(W: np.ndarray) -> np.ndarray:
    """Combinatorial Laplacian ``diag(W 1) - W`` of a nonnegative adjacency."""
    W = _check_adjacency(W, "W")
    if np.any(W < 0):
        raise ValueError("adjacency entries must be nonnegative")
    return np.diag(W.sum(axis=1)) - W


def laplacian_pair(g: SignedGraph) -> LaplacianPair:
    """Laplacians of the positive and negative parts of ``g``."""
    parts = split_signed(g)
    return LaplacianPair(laplacian(parts.Wplus), laplacian(parts.Wminus))


def adjacency_from_laplacian(L: np.ndarray) -> np.ndarray:
    """Recover edge weights ``-L[i, j]`` (diagonal ignored)."""
    L = _check_square(L, "L")
    W = -L.copy()
    np.fill_diagonal(W, 0.0)
    return W


def upper_vec(A: np.ndarray) -> np.ndarray:
    """Strictly upper-triangular entries of ``A`` in row-major ``(i < j)`` order."""
    A = _check_square(A, "A")
    return A[np.triu_indices(A.shape[0], k=1)]


def from_upper_vec(v: np.ndarray, b: int | None = None) -> np.ndarray:
    """Symmetric zero-diagonal matrix whose upper triangle is ``v``."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("edge vector must be one-dimensional")
    if b is None:
        b = nodes_from_pairs(len(v))
    elif len(v) != num_pairs(b):
        raise ValueError(f"length {len(v)} does not match b={b}")
    A = np.zeros((b, b))
    iu = np.triu_indices(b, k=1)
    A[iu] = v
    return A + A.T


def laplacian_from_edges(ell: np.ndarray, b: int | None = None) -> np.ndarray:
    """Laplacian whose off-diagonal upper triangle is ``ell`` and rows sum to zero."""
    A = from_upper_vec(ell, b)
    return A - np.diag(A.sum(axis=1))


def trace_form_coeffs(C: np.ndarray) -> np.ndarray:
    """Coefficients ``q = 2 upper(C) - S.T diag(C)`` with ``tr(C L) = <q, ell>``.

    ``-q[e]`` is the expected squared difference of the signal across pair
    ``e`` when ``C`` is a second-moment matrix.
    """
    C = _check_square(C, "C")
    if not _is_symmetric(C):
        raise ValueError("C must be symmetric")
    S = incidence(C.shape[0])
    return 2.0 * upper_vec(C) - S.adjoint(np.diag(C).copy())


def frobenius_quad(ell: np.ndarray, s: PairIncidence) -> float:
    """``<(2I + S.T S) ell, ell>``, the squared Frobenius norm of the Laplacian of ``ell``."""
    ell = np.asarray(ell, dtype=float)
    return float(ell @ s.gram(ell))


# --- matrix I/O --------------------------------------------------------------

def save_matrix(path: str | Path, M: np.ndarray, header: dict | None = None) -> None:
    """Write a dense matrix as whitespace-delimited text.

    ``header`` entries become leading ``# key: value`` lines, which
    :func:`load_matrix` skips.  Values are written with 17 significant digits
    so a load/save cycle is lossless.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    lines = [f"{k}: {v}" for k, v in (header or {}).items()]
    np.savetxt(path, M, fmt="%.17g", header="\n".join(lines), comments="# ")


def load_matrix(path: str | Path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, dtype=float, comments="#", ndmin=2))


def read_header(path: str | Path) -> dict[str, str]:
    """Parse the ``# key: value`` lines written by :func:`save_matrix`."""
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            if _:
                out[key.strip()] = value.strip()
    return out


def save_matrix_binary(path: str | Path, M: np.ndarray) -> None:
    """Binary round-trip format: numpy ``.npy`` (little-endian float64)."""
    np.save(path, np.asarray(M, dtype="<f8"), allow_pickle=False)


def load_matrix_binary(path: str | Path) -> np.ndarray:
    return np.load(path, allow_pickle=False)
