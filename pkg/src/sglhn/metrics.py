"""Edge-recovery metrics for signed Laplacian estimates."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .graph import LaplacianPair, adjacency_from_laplacian, upper_vec

NONE, POSITIVE, NEGATIVE = 0, 1, 2
TAU_GRID = (0.01, 0.05, 0.1, 0.2, 0.3)
DEFAULT_TAU = 0.1


@dataclass(frozen=True)
class EdgeLabels:
    """One label in {NONE, POSITIVE, NEGATIVE} per node pair (row-major ``i < j``)."""

    b: int
    labels: np.ndarray

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int8)
        if lab.shape != (self.b * (self.b - 1) // 2,):
            raise ValueError("label vector length must be b(b-1)/2")
        if np.any((lab < 0) | (lab > 2)):
            raise ValueError("labels must be 0 (none), 1 (positive) or 2 (negative)")
        object.__setattr__(self, "labels", lab)

    @classmethod
    def from_signed(cls, W: np.ndarray) -> "EdgeLabels":
        w = upper_vec(W)
        lab = np.where(w > 0, POSITIVE, np.where(w < 0, NEGATIVE, NONE))
        return cls(W.shape[0], lab)

    def to_matrix(self) -> np.ndarray:
        """Dense ``b x b`` matrix with entries +1 / -1 / 0."""
        A = np.zeros((self.b, self.b))
        iu = np.triu_indices(self.b, k=1)
        A[iu] = np.select([self.labels == POSITIVE, self.labels == NEGATIVE], [1.0, -1.0])
        return A + A.T


@dataclass
class MetricReport:
    relerr: float
    relerr_plus: float
    relerr_minus: float
    fscore: float
    fscore_plus: float
    fscore_minus: float
    precision: float
    recall: float
    nmi: float

    def as_dict(self) -> dict:
        return asdict(self)


def _trace_normalize(L: np.ndarray) -> np.ndarray:
    tr = np.trace(L)
    return L * (L.shape[0] / tr) if tr > 0 else L


def rel_err(est: LaplacianPair, truth: LaplacianPair, norm: str = "spectral"):
    """Per-sign ``||L_hat - L*||^2 / ||L*||_F^2`` after rescaling both to trace ``B``.

    ``norm`` picks the numerator norm: ``"spectral"`` (default) or
    ``"frobenius"``.  A sign whose ground truth is empty is reported as NaN
    and left out of the mean.
    """
    if est.n != truth.n:
        raise ValueError("size mismatch")
    if norm not in ("spectral", "frobenius"):
        raise ValueError(f"unknown norm {norm!r}")
    parts = []
    for Lh, Ls in ((est.Lplus, truth.Lplus), (est.Lminus, truth.Lminus)):
        if not np.any(Ls):
            parts.append(np.nan)
            continue
        Lh, Ls = _trace_normalize(Lh), _trace_normalize(Ls)
        D = Lh - Ls
        num = np.linalg.norm(D, 2) ** 2 if norm == "spectral" else np.sum(D**2)
        parts.append(float(num / np.sum(Ls**2)))
    defined = [x for x in parts if not np.isnan(x)]
    mean = float(np.mean(defined)) if defined else np.nan
    return mean, parts[0], parts[1]


def threshold_edges(lp: LaplacianPair, tau_rel: float = DEFAULT_TAU) -> EdgeLabels:
    """Label pairs whose weight exceeds ``tau_rel`` times the largest weight of that sign."""
    if not 0 <= tau_rel < 1:
        raise ValueError("tau_rel must lie in [0, 1)")
    lab = np.full(lp.n * (lp.n - 1) // 2, NONE, dtype=np.int8)
    for L, code in ((lp.Lplus, POSITIVE), (lp.Lminus, NEGATIVE)):
        w = upper_vec(adjacency_from_laplacian(L))
        top = w.max() if w.size else 0.0
        if top > 0:
            lab[w > tau_rel * top] = code
    return EdgeLabels(lp.n, lab)


def _prf_one(est, truth, code):
    e = est == code
    t = truth == code
    hit = int(np.sum(e & t))
    prec = hit / int(e.sum()) if e.any() else 0.0
    rec = hit / int(t.sum()) if t.any() else 0.0
    f = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    return prec, rec, f, bool(t.any())


def prf(est: EdgeLabels, truth: EdgeLabels):
    """Sign-averaged precision, recall and F-score.

    Returns ``(precision, recall, fscore, fscore_plus, fscore_minus)``.  A sign
    with no ground-truth edges is excluded from the averages (and its
    F-score is reported as NaN); otherwise empty denominators score 0.
    """
    if est.b != truth.b:
        raise ValueError("size mismatch")
    per = [_prf_one(est.labels, truth.labels, c) for c in (POSITIVE, NEGATIVE)]
    used = [x for x in per if x[3]]
    if not used:
        return 0.0, 0.0, 0.0, np.nan, np.nan
    prec = float(np.mean([x[0] for x in used]))
    rec = float(np.mean([x[1] for x in used]))
    f = float(np.mean([x[2] for x in used]))
    fp = float(per[0][2]) if per[0][3] else np.nan
    fm = float(per[1][2]) if per[1][3] else np.nan
    return prec, rec, f, fp, fm


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(est: EdgeLabels, truth: EdgeLabels) -> float:
    """Mutual information of the pair labels over ``sqrt(H(est) H(truth))`` (natural log).

    Zero when either labeling is constant.
    """
    if est.b != truth.b:
        raise ValueError("size mismatch")
    joint = np.zeros((3, 3))
    np.add.at(joint, (est.labels, truth.labels), 1.0)
    if joint.sum() == 0:
        return 0.0
    h_e = _entropy(joint.sum(axis=1))
    h_t = _entropy(joint.sum(axis=0))
    if h_e == 0 or h_t == 0:
        return 0.0
    mi = h_e + h_t - _entropy(joint.ravel())
    return float(np.clip(mi / np.sqrt(h_e * h_t), 0.0, 1.0))


def evaluate(est: LaplacianPair, truth: LaplacianPair, tau_rel: float = DEFAULT_TAU,
             norm: str = "spectral") -> MetricReport:
    """All metrics for one estimate at one detection threshold."""
    re, rp, rm = rel_err(est, truth, norm)
    e_lab = threshold_edges(est, tau_rel)
    t_lab = threshold_edges(truth, 0.0)
    prec, rec, f, fp, fm = prf(e_lab, t_lab)
    return MetricReport(re, rp, rm, f, fp, fm, prec, rec, nmi(e_lab, t_lab))


def best_fscore(est: LaplacianPair, truth: LaplacianPair, taus=TAU_GRID):
    """Report with the highest F-score over the threshold grid, and its threshold."""
    reports = [(evaluate(est, truth, t), t) for t in taus]
    return max(reports, key=lambda rt: rt[0].fscore)
