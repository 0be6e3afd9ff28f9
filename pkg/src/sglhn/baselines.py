"""Fully observed baselines: unsigned smooth-signal learning (GL) and scSGL."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import (
    LaplacianPair,
    frobenius_quad,
    incidence,
    laplacian_from_edges,
    nodes_from_pairs,
    trace_form_coeffs,
)
from .solver import AdmmConfig, BcdConfig, HiddenAux, admm_L_update, initial_state
from .synth import SignalSet, sample_covariance


class ConvergenceError(RuntimeError):
    def __init__(self, msg, residual):
        super().__init__(msg)
        self.residual = residual


@dataclass
class GlConfig:
    alpha: float = 0.1
    iters: int = 20000
    tol: float = 1e-8

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.iters < 1:
            raise ValueError("iters must be at least 1")


def project_capped_simplex(x: np.ndarray, total: float) -> np.ndarray:
    """Projection onto ``{ell <= 0, sum(ell) = -total}`` (a scaled simplex, negated)."""
    w = -np.asarray(x, dtype=float)
    u = np.sort(w)[::-1]
    css = np.cumsum(u) - total
    ks = np.arange(1, len(u) + 1)
    k = ks[u - css / ks > 0][-1]
    theta = css[k - 1] / k
    return -np.maximum(w - theta, 0.0)


def _signals(X) -> np.ndarray:
    return X.X if isinstance(X, SignalSet) else np.asarray(X, dtype=float)


def gl_objective(ell: np.ndarray, q: np.ndarray, alpha: float) -> float:
    S = incidence(nodes_from_pairs(len(q)))
    return float(q @ ell) + alpha * frobenius_quad(ell, S)


def gl_learn(X, cfg: GlConfig | None = None, return_info: bool = False):
    """Learn one unsigned Laplacian minimizing ``tr(X^T L X)/K + alpha ||L||_F^2``, ``tr(L) = N``.

    See :func:`gl_from_covariance`.
    """
    Xm = _signals(X)
    if Xm.shape[0] < 2:
        raise ValueError("need at least two nodes")
    if not np.all(np.isfinite(Xm)):
        raise ValueError("signals must be finite")
    return gl_from_covariance(sample_covariance(Xm), cfg, return_info)


def gl_from_covariance(C, cfg: GlConfig | None = None, return_info: bool = False):
    """GL on a precomputed second-moment matrix.

    Projected gradient with step ``1 / Lipschitz`` on the edge vector; the
    feasible set ``{ell <= 0, 1^T ell = -N/2}`` is a scaled simplex and is
    projected onto exactly.  Stops when the gradient-mapping norm drops below
    ``cfg.tol``; raises :class:`ConvergenceError` otherwise.
    """
    cfg = cfg or GlConfig()
    C = np.asarray(C, dtype=float)
    N = C.shape[0]
    q = trace_form_coeffs(C)
    S = incidence(N)
    # largest eigenvalue of 2I + S^T S is 2 + 2(N - 1)
    step = 1.0 / (2.0 * cfg.alpha * 2.0 * N)
    ell = np.full(S.p, -0.5 * N / S.p)
    history = [gl_objective(ell, q, cfg.alpha)]
    residual = math.inf
    for it in range(1, cfg.iters + 1):
        grad = q + 2.0 * cfg.alpha * S.gram(ell)
        new = project_capped_simplex(ell - step * grad, 0.5 * N)
        residual = float(np.linalg.norm(new - ell)) / step
        ell = new
        history.append(gl_objective(ell, q, cfg.alpha))
        if residual < cfg.tol:
            break
    else:
        raise ConvergenceError(
            f"GL did not reach tol {cfg.tol:g} in {cfg.iters} iterations "
            f"(residual {residual:.3e})", residual)
    L = laplacian_from_edges(ell, N)
    if return_info:
        return L, {"iterations": it, "residual": residual, "objective": history}
    return L


def scsgl_learn(X, alpha_plus: float = 0.1, alpha_minus: float = 0.1,
                admm: AdmmConfig | None = None, return_state: bool = False):
    """Signed graph learning without hidden-node terms.

    This is the Laplacian-block ADMM of :func:`sglhn.solver.sgl_hncs` on the
    full covariance with ``p = r = 0`` and the log barriers switched off.
    """
    Xm = _signals(X)
    if Xm.shape[0] < 2:
        raise ValueError("need at least two nodes")
    if not np.all(np.isfinite(Xm)):
        raise ValueError("signals must be finite")
    C = sample_covariance(Xm)
    return scsgl_from_covariance(C, alpha_plus, alpha_minus, admm, return_state)


def scsgl_config(alpha_plus: float, alpha_minus: float) -> BcdConfig:
    """Degenerate BCD configuration equivalent to scSGL (one Laplacian update)."""
    return BcdConfig(alpha_plus=alpha_plus, alpha_minus=alpha_minus,
                     eta_plus=math.inf, eta_minus=math.inf,
                     outer_iters=1, pin_hidden=True)


def scsgl_from_covariance(C, alpha_plus=0.1, alpha_minus=0.1, admm=None, return_state=False):
    admm = admm or AdmmConfig()
    C = np.asarray(C, dtype=float)
    B = C.shape[0]
    lp, state = admm_L_update(C, HiddenAux.zeros(B), initial_state(B),
                              scsgl_config(alpha_plus, alpha_minus), admm)
    return (lp, state) if return_state else lp


def gl_as_pair(L: np.ndarray) -> LaplacianPair:
    """Report an unsigned estimate as a signed pair with an empty negative part."""
    return LaplacianPair(L, np.zeros_like(L))
