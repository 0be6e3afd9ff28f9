"""Independent reference implementations used only by the tests.

Each oracle avoids the package's vectorized shortcuts (incidence operator,
Woodbury solves, closed-form updates) and works on dense matrices or by
brute-force iteration instead.
"""

import numpy as np

from sglhn.graph import LaplacianPair, SignedGraph, laplacian_pair


def dense_incidence(b):
    """S[i, e] = 1 iff node i is an endpoint of pair e (row-major i < j)."""
    pairs = [(i, j) for i in range(b) for j in range(i + 1, b)]
    S = np.zeros((b, len(pairs)))
    for e, (i, j) in enumerate(pairs):
        S[i, e] = S[j, e] = 1.0
    return S


def dense_laplacian(ell, b):
    A = np.zeros((b, b))
    k = 0
    for i in range(b):
        for j in range(i + 1, b):
            A[i, j] = A[j, i] = ell[k]
            k += 1
    return A - np.diag(A.sum(axis=1))


def dense_subproblem(ell_p, ell_m, C, aux, cfg):
    """Smooth L-subproblem value built from dense Laplacians and traces."""
    b = C.shape[0]
    val = 0.0
    for sign, ell, alpha, eta, p, r in ((1, ell_p, cfg.alpha_plus, cfg.eta_plus, aux.p_plus, aux.r_plus),
                                        (-1, ell_m, cfg.alpha_minus, cfg.eta_minus, aux.p_minus, aux.r_minus)):
        L = dense_laplacian(ell, b)
        tr = np.trace(C @ L)
        val += sign * tr + alpha * np.trace(L @ L)
        if np.isfinite(eta):
            val -= np.log(tr + 2 * np.sum(p) + r) / eta
    return val


def dense_objective(lp, P_plus, P_minus, r_plus, r_minus, C, cfg):
    """Full hidden-node objective with dense P matrices and the column-norm penalty."""
    def col21(P):
        return float(np.sum(np.linalg.norm(P, axis=0)))
    return (np.trace(C @ lp.Lplus) + 2 * np.trace(P_plus) + r_plus
            - np.trace(C @ lp.Lminus) - 2 * np.trace(P_minus) - r_minus
            + cfg.alpha_plus * np.linalg.norm(lp.Lplus, "fro") ** 2
            + cfg.alpha_minus * np.linalg.norm(lp.Lminus, "fro") ** 2
            + cfg.sigma_plus * col21(P_plus) + cfg.sigma_minus * col21(P_minus))


def central_difference(f, x, h=1e-6):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def subgradient_reference(c, sigma, t, B, iters=50_000):
    """Projected subgradient on ``min c 1^T p + sigma ||p||_1  s.t.  1^T p >= t``.

    Vectorized over instances (rows); ``B`` may differ per instance, shorter
    rows are zero-padded and masked.  Geometrically decaying steps, from 1
    down to 1e-12, suit this polyhedral (sharp) objective.  Returns the best
    objective value seen per instance.
    """
    c, sigma, t, B = (np.asarray(a, dtype=float) for a in (c, sigma, t, B))
    mask = np.arange(int(B.max()))[None, :] < B[:, None]
    gamma = np.exp(np.log(1e-12) / iters)

    def proj(p):
        p = p * mask
        return (p + (np.maximum(t - p.sum(1), 0.0) / B)[:, None]) * mask

    def value(p):
        return c * p.sum(1) + sigma * np.abs(p).sum(1)

    p = proj(np.zeros(mask.shape))
    best = value(p)
    step = 1.0
    for _ in range(iters):
        p = proj(p - step * (c[:, None] + sigma[:, None] * np.sign(p)))
        best = np.minimum(best, value(p))
        step *= gamma
    return best


def signed_pair(pos, neg, n):
    W = np.zeros((n, n))
    for a, b in pos:
        W[a, b] = W[b, a] = 1.0
    for a, b in neg:
        W[a, b] = W[b, a] = -1.0
    return laplacian_pair(SignedGraph(W))


def tikhonov_signals(lp: LaplacianPair, k, seed, strength):
    """Noiseless low-pass signals ``(I + strength L+)^{-1} z``, z standard normal."""
    Z = np.random.default_rng(seed).standard_normal((lp.n, k))
    return np.linalg.solve(np.eye(lp.n) + strength * lp.Lplus, Z)


def spearman(x, y):
    """Spearman rank correlation for tie-free data."""
    rx = np.argsort(np.argsort(x))
    ry = np.argsort(np.argsort(y))
    return float(np.corrcoef(rx, ry)[0, 1])
