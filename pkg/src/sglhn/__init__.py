"""Signed graph Laplacian learning from smooth signals with hidden nodes."""

from .baselines import GlConfig, gl_learn, scsgl_learn
from .graph import (
    LaplacianPair,
    SignedGraph,
    UnsignedGraphPair,
    incidence,
    laplacian,
    laplacian_pair,
    split_signed,
)
from .metrics import MetricReport, best_fscore, evaluate, nmi, prf, rel_err, threshold_edges
from .solver import AdmmConfig, BcdConfig, SolverError, SolveTrace, sgl_hncs
from .synth import GenConfig, gen_signals, hide_nodes, observed_groundtruth, signed_er_graph

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "BcdConfig", "GenConfig", "GlConfig", "LaplacianPair", "MetricReport",
    "SignedGraph", "SolveTrace", "SolverError", "UnsignedGraphPair", "best_fscore",
    "evaluate", "gen_signals", "gl_learn", "hide_nodes", "incidence", "laplacian",
    "laplacian_pair", "nmi", "observed_groundtruth", "prf", "rel_err", "scsgl_learn",
    "sgl_hncs", "signed_er_graph", "split_signed", "threshold_edges",
]
