"""Signed graph learning with hidden nodes (column-sparsity regularized).

The estimator alternates three blocks:

1. the observed-node Laplacians ``(L+, L-)``, updated by an ADMM whose
   ``v``-step projects onto the complementarity set (both parts nonpositive
   off the diagonal, disjoint supports) and whose ``ell``-step is one
   Newton-type step on the smooth part followed by projection onto the trace
   hyperplane ``1^T ell = -B/2``;
2. the hidden-node nuisance terms ``P~+``, ``P~-``, represented by their
   diagonals ``p+``, ``p-`` (closed form);
3. the residual traces ``r+ = tr(R+)``, ``r- = tr(R-)`` (closed form).

All edge-indexed vectors follow the ordering of :mod:`sglhn.graph`.

Why a diagonal ``P~`` and a scalar ``R`` suffice: the objective touches
``P~`` only through ``tr(P~)`` and ``||P~||_{2,1}``.  Zeroing the
off-diagonal part of any column keeps the trace and does not increase that
column's norm, so some minimizer is diagonal, and for a diagonal matrix
``||P~||_{2,1} = sum_i |p_i|`` (which is also its nuclear norm, so the
low-rank variant of the penalty gives the same estimator here).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .graph import (
    LaplacianPair,
    PairIncidence,
    incidence,
    laplacian_from_edges,
    nodes_from_pairs,
    num_pairs,
    trace_form_coeffs,
)


class SolverError(RuntimeError):
    """Raised when an iterate cannot be kept inside the log-barrier domain.

    ``trace`` holds the :class:`SolveTrace` accumulated before the failure,
    when one exists.
    """

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class BarrierDomainError(ValueError):
    pass


@dataclass
class BcdConfig:
    alpha_plus: float = 0.1
    alpha_minus: float = 0.1
    sigma_plus: float = 2.5
    sigma_minus: float = 2.5
    eta_plus: float = 10.0
    eta_minus: float = 10.0
    outer_iters: int = 50
    outer_tol: float = 1e-4
    # keep p, r at zero (scSGL-style run); skips the sigma_minus guard
    pin_hidden: bool = False

    def __post_init__(self):
        for name in ("alpha_plus", "alpha_minus", "sigma_plus", "sigma_minus",
                     "eta_plus", "eta_minus"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.pin_hidden and not self.sigma_minus > 2:
            # -2 tr(P-) + sigma_- ||P-||_{2,1} is unbounded below along P- = beta*I
            # unless sigma_- > 2.
            raise ValueError("sigma_minus must exceed 2 for the P- update to be bounded")
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be at least 1")
        if self.outer_tol < 0:
            raise ValueError("outer_tol must be nonnegative")


@dataclass
class AdmmConfig:
    rho: float = 1.0
    inner_iters: int = 500
    primal_tol: float = 1e-6
    domain_eps: float = 1e-10
    backtrack_max: int = 50

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.inner_iters < 1:
            raise ValueError("inner_iters must be at least 1")
        if not self.domain_eps > 0:
            raise ValueError("domain_eps must be positive")
        if self.backtrack_max < 0:
            raise ValueError("backtrack_max must be nonnegative")


@dataclass
class HiddenAux:
    """Diagonals of ``P~+``, ``P~-`` and traces of ``R+``, ``R-``."""

    p_plus: np.ndarray
    p_minus: np.ndarray
    r_plus: float = 0.0
    r_minus: float = 0.0

    def __post_init__(self):
        if self.r_plus < 0 or self.r_minus < 0:
            raise ValueError("traces of R must be nonnegative")

    @classmethod
    def zeros(cls, b: int) -> "HiddenAux":
        return cls(np.zeros(b), np.zeros(b), 0.0, 0.0)

    def offset(self, sign: int) -> float:
        """``2 * 1^T p + r`` for ``sign`` = +1 or -1."""
        if sign > 0:
            return 2.0 * float(np.sum(self.p_plus)) + self.r_plus
        return 2.0 * float(np.sum(self.p_minus)) + self.r_minus


@dataclass
class AdmmState:
    ell_plus: np.ndarray
    ell_minus: np.ndarray
    v_plus: np.ndarray
    v_minus: np.ndarray
    lam1: np.ndarray
    lam2: np.ndarray
    iterations: int = 0
    residual: float = math.inf

    def copy(self) -> "AdmmState":
        return AdmmState(self.ell_plus.copy(), self.ell_minus.copy(),
                         self.v_plus.copy(), self.v_minus.copy(),
                         self.lam1.copy(), self.lam2.copy(),
                         self.iterations, self.residual)


@dataclass
class SolveTrace:
    """Per-outer-iteration diagnostics.

    ``objective[0]`` is the value at initialization, so ``error[m - 1]`` is
    the relative change between outer iterations ``m - 1`` and ``m``.
    """

    objective: list[float] = field(default_factory=list)
    error: list[float] = field(default_factory=list)
    primal_residual: list[float] = field(default_factory=list)
    inner_iterations: list[int] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def outer_iters_used(self) -> int:
        return len(self.error)

    def to_dict(self) -> dict:
        return {
            "objective": [float(x) for x in self.objective],
            "error": [float(x) for x in self.error],
            "primal_residual": [float(x) for x in self.primal_residual],
            "inner_iterations": [int(x) for x in self.inner_iterations],
            "wall_time": float(self.wall_time),
        }


# --- projections ---------------------------------------------------------------

def project_complementarity(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean projection of ``(a, b)`` onto ``{v+ <= 0, v- <= 0, v+ * v- = 0}``.

    Per coordinate the two candidates are ``(min(a, 0), 0)`` and
    ``(0, min(b, 0))``; the cheaper one wins, ties go to the first.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("length mismatch")
    ca = np.minimum(a, 0.0)
    cb = np.minimum(b, 0.0)
    cost1 = (ca - a) ** 2 + b**2
    cost2 = a**2 + (cb - b) ** 2
    first = cost1 <= cost2
    return np.where(first, ca, 0.0), np.where(first, 0.0, cb)


def project_hyperplane(x: np.ndarray, B: int) -> np.ndarray:
    """Projection onto ``{ell : 1^T ell = -B/2}``."""
    x = np.asarray(x, dtype=float)
    return x - (x.sum() + 0.5 * B) / x.size


# --- smooth part of the L-subproblem -----------------------------------------------

def barrier_arg(q: np.ndarray, ell: np.ndarray, aux: HiddenAux, sign: int) -> float:
    """Total-variation slack ``<q, ell> + 2 * 1^T p + r`` of one sign."""
    return float(q @ ell) + aux.offset(sign)


def subproblem_value(ell_plus, ell_minus, q, aux: HiddenAux, cfg: BcdConfig) -> float:
    """Smooth objective ``f`` of the vectorized L-subproblem (barriers included)."""
    S = incidence(len(aux.p_plus))
    val = 0.0
    for sign, ell, alpha, eta in ((1, ell_plus, cfg.alpha_plus, cfg.eta_plus),
                                  (-1, ell_minus, cfg.alpha_minus, cfg.eta_minus)):
        val += sign * float(q @ ell) + alpha * float(ell @ S.gram(ell))
        if not math.isinf(eta):
            g = barrier_arg(q, ell, aux, sign)
            if g <= 0:
                raise BarrierDomainError(f"barrier argument {g:.3e} <= 0 for sign {sign:+d}")
            val -= math.log(g) / eta
    return val


def _grad_one(sign, ell, q, alpha, eta, aux, S: PairIncidence):
    grad = sign * q + 2.0 * alpha * S.gram(ell)
    g = None
    if not math.isinf(eta):
        g = barrier_arg(q, ell, aux, sign)
        if g <= 0:
            raise BarrierDomainError(f"barrier argument {g:.3e} <= 0 for sign {sign:+d}")
        grad = grad - q / (eta * g)
    return grad, g


def grad_f(ell_plus, ell_minus, q, aux: HiddenAux, cfg: BcdConfig):
    """Partial gradients of :func:`subproblem_value` with respect to ``ell+`` and ``ell-``."""
    S = incidence(len(aux.p_plus))
    gp, _ = _grad_one(1, ell_plus, q, cfg.alpha_plus, cfg.eta_plus, aux, S)
    gm, _ = _grad_one(-1, ell_minus, q, cfg.alpha_minus, cfg.eta_minus, aux, S)
    return gp, gm


class GramSolver:
    """Solves ``(2 alpha (2I + S^T S) + rho I) x = y`` in O(p) per call.

    For the complete-graph incidence ``S S^T = (b - 2) I + 1 1^T``, so the
    Woodbury identity reduces the p x p system to a b x b one that inverts in
    closed form::

        A^{-1} = (1/c0) [I - S^T ((c0/c1 + b - 2) I + 1 1^T)^{-1} S]

    with ``c0 = 4 alpha + rho`` and ``c1 = 2 alpha``.
    """

    def __init__(self, b: int, alpha: float, rho: float):
        if not (alpha > 0 or rho > 0):
            raise ValueError("system is singular for alpha = rho = 0")
        self.S = incidence(b)
        self.b = b
        self.c0 = 4.0 * alpha + rho
        self.c1 = 2.0 * alpha
        self._m = self.c0 / self.c1 + b - 2 if self.c1 > 0 else math.inf

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.c0 * x + self.c1 * self.S.adjoint(self.S.apply(x))

    def solve(self, y: np.ndarray) -> np.ndarray:
        if math.isinf(self._m):
            return y / self.c0
        z = self.S.apply(y)
        # ((m I + 1 1^T)^{-1} z = (z - 1 * sum(z) / (m + b)) / m
        z = (z - z.sum() / (self._m + self.b)) / self._m
        return (y - self.S.adjoint(z)) / self.c0


def newton_system_solve(q, g_val, alpha, rho, eta, rhs, gram: GramSolver | None = None,
                        q_solved: np.ndarray | None = None) -> np.ndarray:
    """Solve ``(2 alpha (2I + S^T S) + rho I + beta q q^T) x = rhs``, ``beta = 1/(eta g^2)``.

    The rank-one barrier curvature is handled with Sherman-Morrison on top of
    :class:`GramSolver`.  ``gram`` and ``q_solved`` (``A^{-1} q``) may be
    passed in to reuse work across calls.
    """
    q = np.asarray(q, dtype=float)
    if gram is None:
        gram = GramSolver(nodes_from_pairs(len(q)), alpha, rho)
    x = gram.solve(rhs)
    if math.isinf(eta):
        return x
    if not g_val > 0:
        raise BarrierDomainError("barrier argument must be positive")
    beta = 1.0 / (eta * g_val**2)
    if q_solved is None:
        q_solved = gram.solve(q)
    return x - q_solved * (beta * float(q @ x) / (1.0 + beta * float(q @ q_solved)))


# --- ADMM for the Laplacian block ----------------------------------------------------

def initial_state(B: int) -> AdmmState:
    """Uniform point of the trace hyperplane for both signs, ``v`` from one projection."""
    p = num_pairs(B)
    ell = np.full(p, -0.5 * B / p)
    vp, vm = project_complementarity(ell, ell)
    return AdmmState(ell.copy(), ell.copy(), vp, vm, np.zeros(p), np.zeros(p))


def laplacian_from_v(v: np.ndarray, B: int) -> np.ndarray:
    """Laplacian from a nonpositive edge vector, rescaled to trace ``B``.

    An all-zero ``v`` gives the zero matrix.
    """
    L = laplacian_from_edges(v, B)
    tr = float(np.trace(L))
    if tr > 0:
        L *= B / tr
    return L


def admm_L_update(CB: np.ndarray, aux: HiddenAux, init: AdmmState, bcd: BcdConfig,
                  admm: AdmmConfig, q: np.ndarray | None = None):
    """Run the complementarity-constrained ADMM for the Laplacian block.

    Returns the Laplacian pair read out from the final ``v`` iterates (exact
    sign and disjoint-support constraints, each rescaled to trace ``B``) and
    the final :class:`AdmmState` (which can warm-start the next call).
    """
    CB = np.asarray(CB, dtype=float)
    B = CB.shape[0]
    if B < 2:
        raise ValueError("need at least two observed nodes")
    if q is None:
        q = trace_form_coeffs(CB)
    S = incidence(B)
    rho = admm.rho
    st = init.copy()

    blocks = []
    for sign, alpha, eta in ((1, bcd.alpha_plus, bcd.eta_plus),
                             (-1, bcd.alpha_minus, bcd.eta_minus)):
        gram = GramSolver(B, alpha, rho)
        qs = None if math.isinf(eta) else gram.solve(q)
        blocks.append((sign, alpha, eta, gram, qs))

    for sign, ell in ((1, st.ell_plus), (-1, st.ell_minus)):
        eta = bcd.eta_plus if sign > 0 else bcd.eta_minus
        if not math.isinf(eta) and barrier_arg(q, ell, aux, sign) <= admm.domain_eps:
            raise SolverError(
                f"initial ell{'+' if sign > 0 else '-'} outside the barrier domain "
                f"(slack {barrier_arg(q, ell, aux, sign):.3e})")

    residual = math.inf
    it = 0
    for it in range(1, admm.inner_iters + 1):
        st.v_plus, st.v_minus = project_complementarity(st.ell_plus - st.lam1 / rho,
                                                        st.ell_minus - st.lam2 / rho)
        new_ell = []
        for (sign, alpha, eta, gram, qs), ell, v, lam in zip(
                blocks, (st.ell_plus, st.ell_minus), (st.v_plus, st.v_minus),
                (st.lam1, st.lam2)):
            grad, g = _grad_one(sign, ell, q, alpha, eta, aux, S)
            rhs = grad - rho * v + rho * ell - lam
            step = newton_system_solve(q, g, alpha, rho, eta, rhs, gram=gram, q_solved=qs)
            cand = project_hyperplane(ell - step, B)
            if not math.isinf(eta):
                cand = _backtrack(cand, ell, q, aux, sign, admm, it)
            new_ell.append(cand)
        st.ell_plus, st.ell_minus = new_ell
        st.lam1 = st.lam1 + rho * (st.v_plus - st.ell_plus)
        st.lam2 = st.lam2 + rho * (st.v_minus - st.ell_minus)
        residual = max(float(np.max(np.abs(st.v_plus - st.ell_plus))),
                       float(np.max(np.abs(st.v_minus - st.ell_minus))))
        if residual < admm.primal_tol:
            break

    st.iterations = it
    st.residual = residual
    lp = LaplacianPair(laplacian_from_v(st.v_plus, B), laplacian_from_v(st.v_minus, B))
    return lp, st


def _backtrack(cand, prev, q, aux, sign, admm: AdmmConfig, it: int):
    # cand and prev both lie on the trace hyperplane, so every point between them does too
    for _ in range(admm.backtrack_max + 1):
        if barrier_arg(q, cand, aux, sign) > admm.domain_eps:
            return cand
        cand = 0.5 * (cand + prev)
    raise SolverError(
        f"ADMM iteration {it}: ell{'+' if sign > 0 else '-'} left the barrier domain "
        f"after {admm.backtrack_max} halvings (slack {barrier_arg(q, cand, aux, sign):.3e})")


# --- closed-form P~ and R updates ------------------------------------------------------

def p_update(trace_plus: float, trace_minus: float, aux: HiddenAux,
             cfg: BcdConfig) -> tuple[np.ndarray, np.ndarray]:
    """Minimize ``2 tr(P+) - 2 tr(P-) + sum_s sigma_s ||P^s||_{2,1}`` for diagonal ``P``.

    Subject to ``trace_s + 2 * 1^T p^s + r^s >= 0``.  With
    ``t = -(trace_s + r^s) / 2`` the constraint is ``1^T p^s >= t`` and the
    optimal sum is ``0`` or ``t``; a nonzero sum is spread uniformly.
    """
    B = len(aux.p_plus)
    t_plus = -0.5 * (trace_plus + aux.r_plus)
    t_minus = -0.5 * (trace_minus + aux.r_minus)

    if t_plus > 0 or cfg.sigma_plus < 2:
        s_plus = t_plus
    else:
        s_plus = 0.0
    if cfg.sigma_minus <= 2:
        raise ValueError("sigma_minus must exceed 2")
    s_minus = t_minus if t_minus > 0 else 0.0
    return np.full(B, s_plus / B), np.full(B, s_minus / B)


def r_update(tv_plus: float, tv_minus: float) -> tuple[float, float]:
    """Smallest nonnegative ``r`` with ``tv + r >= 0``, per sign.

    ``tv_s = tr(C_B L~^s) + 2 tr(P~^s)``.
    """
    return max(0.0, -float(tv_plus)), max(0.0, -float(tv_minus))


def p_objective(p_plus, p_minus, cfg: BcdConfig) -> float:
    return float(2 * np.sum(p_plus) - 2 * np.sum(p_minus)
                 + cfg.sigma_plus * np.sum(np.abs(p_plus))
                 + cfg.sigma_minus * np.sum(np.abs(p_minus)))


def objective_eval(lp: LaplacianPair, aux: HiddenAux, CB: np.ndarray, cfg: BcdConfig) -> float:
    """Value of the full (barrier-free) hidden-node objective."""
    CB = np.asarray(CB, dtype=float)
    tp = float(np.sum(CB * lp.Lplus))
    tm = float(np.sum(CB * lp.Lminus))
    return (tp + 2 * float(np.sum(aux.p_plus)) + aux.r_plus
            - tm - 2 * float(np.sum(aux.p_minus)) - aux.r_minus
            + cfg.alpha_plus * float(np.sum(lp.Lplus**2))
            + cfg.alpha_minus * float(np.sum(lp.Lminus**2))
            + cfg.sigma_plus * float(np.sum(np.abs(aux.p_plus)))
            + cfg.sigma_minus * float(np.sum(np.abs(aux.p_minus))))


def total_variation(lp: LaplacianPair, aux: HiddenAux, CB: np.ndarray) -> tuple[float, float]:
    """``tr(C_B L~^s) + 2 tr(P~^s) + tr(R^s)`` for both signs; feasible when >= 0."""
    CB = np.asarray(CB, dtype=float)
    return (float(np.sum(CB * lp.Lplus)) + aux.offset(1),
            float(np.sum(CB * lp.Lminus)) + aux.offset(-1))


def relative_change(new: float, old: float) -> float:
    if old == 0:
        return 0.0 if new == 0 else math.inf
    return abs(new - old) / abs(old)


def sgl_hncs(CB: np.ndarray, cfg: BcdConfig | None = None, admm: AdmmConfig | None = None):
    """Block coordinate descent over ``(L~, P~, R)``.

    Returns ``(LaplacianPair, HiddenAux, SolveTrace)``.  Iteration stops after
    ``cfg.outer_iters`` rounds or as soon as the relative objective change
    drops below ``cfg.outer_tol``.
    """
    cfg = cfg or BcdConfig()
    admm = admm or AdmmConfig()
    CB = np.asarray(CB, dtype=float)
    if CB.ndim != 2 or CB.shape[0] != CB.shape[1] or CB.shape[0] < 2:
        raise ValueError("CB must be a square matrix of size at least 2")
    B = CB.shape[0]
    t0 = time.perf_counter()
    q = trace_form_coeffs(CB)

    state = initial_state(B)
    L0 = laplacian_from_edges(state.ell_plus, B)
    lp = LaplacianPair(L0, L0.copy())
    aux = HiddenAux.zeros(B)
    if not cfg.pin_hidden:
        r0 = max(0.0, -float(np.sum(CB * L0)))
        aux = replace(aux, r_plus=r0, r_minus=r0)

    trace = SolveTrace()
    trace.objective.append(objective_eval(lp, aux, CB, cfg))
    for _ in range(cfg.outer_iters):
        try:
            lp, state = admm_L_update(CB, aux, state, cfg, admm, q=q)
        except SolverError as exc:
            trace.wall_time = time.perf_counter() - t0
            raise SolverError(str(exc), trace) from exc
        trace.primal_residual.append(state.residual)
        trace.inner_iterations.append(state.iterations)
        if not cfg.pin_hidden:
            tp = float(np.sum(CB * lp.Lplus))
            tm = float(np.sum(CB * lp.Lminus))
            pp, pm = p_update(tp, tm, aux, cfg)
            rp, rm = r_update(tp + 2 * pp.sum(), tm + 2 * pm.sum())
            aux = HiddenAux(pp, pm, rp, rm)
        trace.objective.append(objective_eval(lp, aux, CB, cfg))
        trace.error.append(relative_change(trace.objective[-1], trace.objective[-2]))
        if trace.error[-1] < cfg.outer_tol:
            break
    trace.wall_time = time.perf_counter() - t0
    return lp, aux, trace
