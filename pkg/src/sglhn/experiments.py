"""Config-driven experiment harness: dataset files, single runs, sweeps, real data.

Config files are flat ``key = value`` text (``#`` starts a comment, lists are
comma-separated).  Every key is optional; see :data:`CONFIG_KEYS` for the
full list and :class:`ExperimentConfig` for defaults.
"""

from __future__ import annotations

import configparser
import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .baselines import ConvergenceError, GlConfig, gl_as_pair, gl_from_covariance, scsgl_from_covariance
from .graph import (
    LaplacianPair,
    SignedGraph,
    laplacian_pair,
    load_matrix,
    read_header,
    save_matrix,
)
from .metrics import (
    TAU_GRID,
    EdgeLabels,
    evaluate,
    prf,
    threshold_edges,
)
from .solver import AdmmConfig, BcdConfig, SolverError, sgl_hncs
from .synth import (
    GenConfig,
    Partition,
    SignalSet,
    gen_signals,
    make_rng,
    observe,
    observed_groundtruth,
    partition_nodes,
    sample_covariance,
    signed_er_graph,
)

log = logging.getLogger(__name__)

METHODS = ("sgl-hncs", "scsgl", "gl")
SWEEP_AXES = ("none", "hidden_count", "signal_count")
CSV_HEADER = ("method,seed,N,B,H,K,noise_sigma,tau,relerr,relerr_plus,relerr_minus,"
              "fscore,fscore_plus,fscore_minus,precision,recall,nmi,"
              "outer_iters_used,wall_ms,status").split(",")
METRIC_COLUMNS = ("relerr", "relerr_plus", "relerr_minus", "fscore", "fscore_plus",
                  "fscore_minus", "precision", "recall", "nmi")
DATASET_FILES = ("graph.txt", "signals.txt", "partition.txt", "covariance.txt")
_CHANCE_DRAWS = 200
_CHANCE_STREAM = 100


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


class DataError(ValueError):
    """Missing or malformed input data."""


# --- configuration -------------------------------------------------------------

@dataclass
class ExperimentConfig:
    methods: tuple[str, ...] = ("sgl-hncs", "scsgl")
    # data generation
    n: int = 30
    p_edge: float = 0.3
    neg_fraction: float = 0.5
    k: int = 50
    noise_sigma: float = 0.1
    seed: int = 0
    hidden_count: int = 2
    # SGL-HNCS outer loop
    alpha_plus: float = 0.1
    alpha_minus: float = 0.1
    sigma_plus: float = 2.5
    sigma_minus: float = 2.5
    eta_plus: float = 10.0
    eta_minus: float = 10.0
    outer_iters: int = 50
    outer_tol: float = 1e-4
    # ADMM
    rho: float = 1.0
    inner_iters: int = 500
    primal_tol: float = 1e-6
    domain_eps: float = 1e-10
    backtrack_max: int = 50
    # GL baseline
    gl_alpha: float = 0.1
    gl_iters: int = 20000
    gl_tol: float = 1e-8
    # harness
    sweep: str = "none"
    sweep_values: tuple[int, ...] = ()
    trials: int = 1
    taus: tuple[float, ...] = TAU_GRID
    relerr_norm: str = "spectral"
    out: str = "results.csv"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        errors = []
        if not self.methods:
            errors.append("methods: list is empty")
        for m in self.methods:
            if m not in METHODS:
                errors.append(f"methods: unknown method {m!r} (choose from {', '.join(METHODS)})")
        if self.sweep not in SWEEP_AXES:
            errors.append(f"sweep: must be one of {', '.join(SWEEP_AXES)}")
        elif self.sweep != "none":
            if not self.sweep_values:
                errors.append("sweep_values: list is empty")
            elif self.sweep == "hidden_count" and any(v < 0 or v >= self.n for v in self.sweep_values):
                errors.append("sweep_values: hidden counts must lie in [0, n)")
            elif self.sweep == "signal_count" and any(v < 1 for v in self.sweep_values):
                errors.append("sweep_values: signal counts must be positive")
        if self.trials < 1:
            errors.append("trials: must be at least 1")
        if not self.taus:
            errors.append("taus: list is empty")
        elif any(not 0 <= t < 1 for t in self.taus):
            errors.append("taus: thresholds must lie in [0, 1)")
        if self.relerr_norm not in ("spectral", "frobenius"):
            errors.append("relerr_norm: must be spectral or frobenius")
        if self.workers < 1:
            errors.append("workers: must be at least 1")
        if not 0 <= self.hidden_count < self.n:
            errors.append("hidden_count: must lie in [0, n)")
        for name, build in (("gen", self.gen_config), ("bcd", self.bcd_config),
                            ("admm", self.admm_config), ("gl", self.gl_config)):
            try:
                build()
            except ValueError as exc:
                errors.append(str(exc))
        if errors:
            raise ConfigError("; ".join(errors))

    def gen_config(self, seed: int | None = None, k: int | None = None) -> GenConfig:
        return GenConfig(n=self.n, p_edge=self.p_edge, neg_fraction=self.neg_fraction,
                         k=self.k if k is None else k, noise_sigma=self.noise_sigma,
                         seed=self.seed if seed is None else seed)

    def bcd_config(self) -> BcdConfig:
        return BcdConfig(alpha_plus=self.alpha_plus, alpha_minus=self.alpha_minus,
                         sigma_plus=self.sigma_plus, sigma_minus=self.sigma_minus,
                         eta_plus=self.eta_plus, eta_minus=self.eta_minus,
                         outer_iters=self.outer_iters, outer_tol=self.outer_tol)

    def admm_config(self) -> AdmmConfig:
        return AdmmConfig(rho=self.rho, inner_iters=self.inner_iters,
                          primal_tol=self.primal_tol, domain_eps=self.domain_eps,
                          backtrack_max=self.backtrack_max)

    def gl_config(self) -> GlConfig:
        return GlConfig(alpha=self.gl_alpha, iters=self.gl_iters, tol=self.gl_tol)

    def sweep_points(self) -> list[tuple[int, int]]:
        """``(hidden_count, signal_count)`` for every sweep point."""
        if self.sweep == "hidden_count":
            return [(int(h), self.k) for h in self.sweep_values]
        if self.sweep == "signal_count":
            return [(self.hidden_count, int(k)) for k in self.sweep_values]
        return [(self.hidden_count, self.k)]

    def seeds(self) -> list[int]:
        return [self.seed + t for t in range(self.trials)]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
CONFIG_KEYS = tuple(_FIELD_TYPES)


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    items = [s.strip() for s in raw.split(",") if s.strip()]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "str":
            return raw.strip()
        if kind == "tuple[str, ...]":
            return tuple(items)
        if kind == "tuple[int, ...]":
            return tuple(int(s) for s in items)
        if kind == "tuple[float, ...]":
            return tuple(float(s) for s in items)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    raise AssertionError(kind)


def parse_config(text: str, defaults: dict | None = None, **overrides) -> ExperimentConfig:
    """Parse flat ``key = value`` text.

    Precedence, lowest first: dataclass defaults, ``defaults``, file values,
    non-None ``overrides``.
    """
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax: {exc}") from None
    values = dict(defaults or {})
    for key, raw in parser["experiment"].items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{key}: unknown config key")
        values[key] = _convert(key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path: str | Path | None, defaults: dict | None = None,
                **overrides) -> ExperimentConfig:
    if path is None:
        return parse_config("", defaults, **overrides)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, defaults, **overrides)


def dump_config(cfg: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config`."""
    out = []
    for key, value in asdict(cfg).items():
        if isinstance(value, (tuple, list)):
            value = ", ".join(str(v) for v in value)
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


# --- dataset files ---------------------------------------------------------------

@dataclass(frozen=True)
class Dataset:
    graph: SignedGraph
    signals: SignalSet
    partition: Partition
    covariance: np.ndarray
    seed: int


def make_dataset(cfg: ExperimentConfig, seed: int, hidden_count: int, k: int) -> Dataset:
    """Synthetic dataset; the graph, signals and hidden set each use their own stream."""
    g = signed_er_graph(cfg.gen_config(seed=seed, k=k))
    x = gen_signals(laplacian_pair(g), k, cfg.noise_sigma, seed)
    part = partition_nodes(g.n, hidden_count, seed)
    return Dataset(g, x, part, observe(x, part).CB, seed)


def write_dataset(ds: Dataset, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = {"n": ds.graph.n, "k": ds.signals.k, "seed": ds.seed}
        save_matrix(out / "graph.txt", ds.graph.W, meta)
        save_matrix(out / "signals.txt", ds.signals.X, meta)
        with open(out / "partition.txt", "w") as fh:
            fh.write(f"# n: {ds.partition.original_n}\n# seed: {ds.seed}\n")
            fh.write("observed " + " ".join(map(str, ds.partition.observed)) + "\n")
            fh.write("hidden " + " ".join(map(str, ds.partition.hidden)) + "\n")
        save_matrix(out / "covariance.txt", ds.covariance,
                    {**meta, "observed": " ".join(map(str, ds.partition.observed))})
    except OSError as exc:
        raise DataError(f"cannot write dataset to {out}: {exc}") from None
    return out


def read_partition(path: str | Path) -> Partition:
    obs = hid = None
    n = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if line.startswith("# n:"):
                n = int(line.split(":", 1)[1])
                continue
            if not line or line.startswith("#"):
                continue
            tag, *rest = line.split()
            try:
                idx = tuple(int(t) for t in rest)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer node index") from None
            if tag == "observed":
                obs = idx
            elif tag == "hidden":
                hid = idx
            else:
                raise DataError(f"{path}:{lineno}: unknown tag {tag!r}")
    if obs is None or hid is None:
        raise DataError(f"{path}: needs 'observed' and 'hidden' lines")
    try:
        return Partition(obs, hid, n if n is not None else len(obs) + len(hid))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def read_dataset(path: str | Path) -> Dataset:
    d = Path(path)
    missing = [f for f in DATASET_FILES if not (d / f).is_file()]
    if missing:
        raise DataError(f"{d}: missing {', '.join(missing)}")
    try:
        g = SignedGraph(load_matrix(d / "graph.txt"))
        x = SignalSet(load_matrix(d / "signals.txt"))
        part = read_partition(d / "partition.txt")
        C = load_matrix(d / "covariance.txt")
        seed = int(read_header(d / "graph.txt").get("seed", 0))
    except (ValueError, OSError) as exc:
        raise DataError(f"{d}: {exc}") from None
    if x.n != g.n or part.original_n != g.n or C.shape != (part.B, part.B):
        raise DataError(f"{d}: inconsistent dataset shapes")
    return Dataset(g, x, part, C, seed)


# --- running one method ----------------------------------------------------------------

@dataclass
class RunOutcome:
    estimate: LaplacianPair | None
    outer_iters_used: int
    wall_ms: float
    status: str = "ok"
    trace: dict = field(default_factory=dict)


def run_method(method: str, C: np.ndarray, cfg: ExperimentConfig) -> RunOutcome:
    """Run one learner on a second-moment matrix; failures become a status string."""
    t0 = time.perf_counter()
    try:
        if method == "sgl-hncs":
            lp, _, tr = sgl_hncs(C, cfg.bcd_config(), cfg.admm_config())
            return RunOutcome(lp, tr.outer_iters_used, _ms(t0), trace=tr.to_dict())
        if method == "scsgl":
            lp = scsgl_from_covariance(C, cfg.alpha_plus, cfg.alpha_minus, cfg.admm_config())
            return RunOutcome(lp, 1, _ms(t0))
        if method == "gl":
            return RunOutcome(gl_as_pair(gl_from_covariance(C, cfg.gl_config())), 1, _ms(t0))
    except SolverError as exc:
        trace = exc.trace.to_dict() if exc.trace is not None else {}
        return RunOutcome(None, len(trace.get("error", [])), _ms(t0),
                          f"solver_error: {exc}", trace)
    except ConvergenceError as exc:
        return RunOutcome(None, 1, _ms(t0), f"not_converged: {exc}")
    raise ConfigError(f"unknown method {method!r}")


def _ms(t0: float) -> float:
    return 1e3 * (time.perf_counter() - t0)


def result_rows(method: str, seed: int, N: int, H: int, K: int, cfg: ExperimentConfig,
                outcome: RunOutcome, truth: LaplacianPair) -> list[dict]:
    """One row per tau; failed runs get NaN metrics."""
    base = {"method": method, "seed": seed, "N": N, "B": truth.n, "H": H, "K": K,
            "noise_sigma": cfg.noise_sigma, "outer_iters_used": outcome.outer_iters_used,
            "wall_ms": round(outcome.wall_ms, 3), "status": outcome.status}
    rows = []
    for tau in cfg.taus:
        if outcome.estimate is None:
            metrics = dict.fromkeys(METRIC_COLUMNS, math.nan)
        else:
            metrics = evaluate(outcome.estimate, truth, tau, cfg.relerr_norm).as_dict()
        rows.append({**base, "tau": tau, **metrics})
    return rows


def run_cell(args) -> list[dict]:
    """One (method, seed, sweep point) cell of a sweep; picklable for worker pools."""
    cfg, method, seed, H, K = args
    ds = make_dataset(cfg, seed, H, K)
    truth = observed_groundtruth(ds.graph, ds.partition)
    outcome = run_method(method, ds.covariance, cfg)
    return result_rows(method, seed, ds.graph.n, H, K, cfg, outcome, truth)


# --- CSV output ----------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


class RowWriter:
    """Ordered CSV writer; every row is flushed as soon as it is written."""

    def __init__(self, path: str | Path, header=CSV_HEADER):
        self.path = Path(path)
        self.header = list(header)
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(self.path, "w", newline="")
        except OSError as exc:
            raise DataError(f"cannot open {self.path}: {exc}") from None
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.header)
        self.count = 0

    def write(self, rows) -> None:
        for row in rows:
            self._w.writerow([_fmt(row[k]) for k in self.header])
            self.count += 1
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_rows(path: str | Path) -> list[dict]:
    """Read a results CSV; numeric columns come back as ``int``/``float``."""
    ints = {"seed", "N", "B", "H", "K", "outer_iters_used"}
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            conv = {}
            for k, v in row.items():
                if k in ints:
                    conv[k] = int(v)
                elif k in ("method", "status"):
                    conv[k] = v
                else:
                    conv[k] = float(v)
            out.append(conv)
    return out


AGGREGATE_KEYS = ("method", "N", "H", "K", "tau")


def aggregate(rows: list[dict]) -> list[dict]:
    """Per (method, N, H, K, tau) mean and standard error over successful trials.

    NaN metric values (undefined for a trial) are left out of that metric only.
    """
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        groups.setdefault(tuple(row[k] for k in AGGREGATE_KEYS), []).append(row)
    out = []
    for key, grp in groups.items():
        rec = dict(zip(AGGREGATE_KEYS, key))
        rec["trials"] = len(grp)
        for m in METRIC_COLUMNS:
            vals = np.array([r[m] for r in grp], dtype=float)
            vals = vals[~np.isnan(vals)]
            rec[f"{m}_mean"] = float(np.mean(vals)) if vals.size else math.nan
            rec[f"{m}_se"] = (float(np.std(vals, ddof=1) / np.sqrt(vals.size))
                              if vals.size > 1 else math.nan)
        out.append(rec)
    return out


def aggregate_header() -> list[str]:
    cols = list(AGGREGATE_KEYS) + ["trials"]
    for m in METRIC_COLUMNS:
        cols += [f"{m}_mean", f"{m}_se"]
    return cols


def aggregate_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.stem + ".aggregate.csv")


def write_aggregate(rows: list[dict], path: str | Path) -> Path:
    with RowWriter(path, aggregate_header()) as w:
        w.write(aggregate(rows))
    return Path(path)


# --- commands ----------------------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    """Write one synthetic dataset (seed, hidden count and K from ``cfg``)."""
    return write_dataset(make_dataset(cfg, cfg.seed, cfg.hidden_count, cfg.k), out_dir)


def cmd_learn(dataset_dir: str | Path, method: str, cfg: ExperimentConfig,
              out: str | Path) -> tuple[list[dict], Path]:
    """Learn on a dataset directory; writes the rows CSV and ``<out>.trace.json``."""
    ds = read_dataset(dataset_dir)
    truth = observed_groundtruth(ds.graph, ds.partition)
    outcome = run_method(method, ds.covariance, cfg)
    rows = result_rows(method, ds.seed, ds.graph.n, ds.partition.H, ds.signals.k,
                       cfg, outcome, truth)
    with RowWriter(out) as w:
        w.write(rows)
    trace_path = Path(out).with_suffix(".trace.json")
    trace = {key: outcome.trace.get(key, []) for key in ("objective", "error", "primal_residual")}
    trace["status"] = outcome.status
    trace_path.write_text(json.dumps(trace, indent=1) + "\n")
    return rows, trace_path


def sweep_cells(cfg: ExperimentConfig) -> list[tuple]:
    """Full factorial over sweep points, seeds and methods, in output order.

    All methods at one (point, seed) see the same dataset (paired design).
    """
    return [(cfg, m, seed, H, K)
            for H, K in cfg.sweep_points()
            for seed in cfg.seeds()
            for m in cfg.methods]


def cmd_sweep(cfg: ExperimentConfig, out: str | Path | None = None) -> list[dict]:
    """Run every sweep cell; rows stream to ``out`` in cell order, then the aggregate."""
    out = Path(out or cfg.out)
    cells = sweep_cells(cfg)
    rows: list[dict] = []
    with RowWriter(out) as w:
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for cell_rows in pool.map(run_cell, cells):
                    w.write(cell_rows)
                    rows += cell_rows
        else:
            for cell in cells:
                cell_rows = run_cell(cell)
                w.write(cell_rows)
                rows += cell_rows
    write_aggregate(rows, aggregate_path(out))
    return rows


# --- real signed networks ------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeList:
    graph: SignedGraph
    ids: tuple[str, ...]
    self_loops: int


def load_edge_list(path: str | Path) -> EdgeList:
    """Read ``src dst weight`` lines into a signed graph.

    Node tokens get dense indices in first-appearance order.  Weights of
    repeated pairs (either orientation) are summed and a pair summing to zero
    is dropped.  Self-loops are dropped and counted.  Blank lines and lines
    starting with ``#`` are skipped.
    """
    index: dict[str, int] = {}
    acc: dict[tuple[int, int], float] = {}
    loops = 0
    try:
        fh = open(path)
    except OSError as exc:
        raise DataError(f"cannot read edge list {path}: {exc}") from None
    with fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 'src dst weight', got {s!r}")
            try:
                w = float(parts[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: weight {parts[2]!r} is not a number") from None
            if not math.isfinite(w):
                raise DataError(f"{path}:{lineno}: weight must be finite")
            if w == 0:
                raise DataError(f"{path}:{lineno}: zero-weight edge")
            a, b = (index.setdefault(t, len(index)) for t in parts[:2])
            if a == b:
                loops += 1
                continue
            key = (min(a, b), max(a, b))
            acc[key] = acc.get(key, 0.0) + w
    if len(index) < 2:
        raise DataError(f"{path}: need at least two nodes")
    if loops:
        log.warning("%s: dropped %d self-loop(s)", path, loops)
    W = np.zeros((len(index), len(index)))
    for (a, b), w in acc.items():
        W[a, b] = W[b, a] = w
    return EdgeList(SignedGraph(W), tuple(index), loops)


def write_id_map(ids, path: str | Path) -> Path:
    Path(path).write_text("".join(f"{i}\t{t}\n" for i, t in enumerate(ids)))
    return Path(path)


def read_id_map(path: str | Path) -> tuple[str, ...]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        idx, _, tok = line.partition("\t")
        if int(idx) != lineno - 1:
            raise DataError(f"{path}:{lineno}: indices must be consecutive")
        out.append(tok)
    return tuple(out)


def chance_fscore(est: LaplacianPair, truth: LaplacianPair, tau: float, seed: int,
                  draws: int = _CHANCE_DRAWS) -> float:
    """Mean F-score of the estimate's pair labels after random permutation.

    Keeps the number of predicted positive and negative edges, so it is the
    F-score of a guesser with the same edge budget.
    """
    e_lab = threshold_edges(est, tau)
    t_lab = threshold_edges(truth, 0.0)
    rng = make_rng(seed, _CHANCE_STREAM)
    scores = [prf(EdgeLabels(est.n, rng.permutation(e_lab.labels)), t_lab)[2]
              for _ in range(draws)]
    return float(np.mean(scores))


REALDATA_DEFAULTS = {"hidden_count": 5, "sweep": "signal_count",
                     "sweep_values": (50, 100, 200, 500)}

REALDATA_RECIPE = ("signals = spectral_filter(L+, L-) @ N(0, I) + noise_sigma * N(0, I); "
                   "low-pass normalized pseudo-inverse spectrum of L+ plus "
                   "normalized spectrum of L-")


def cmd_realdata(path: str | Path, cfg: ExperimentConfig,
                 out: str | Path | None = None) -> list[dict]:
    """Ground truth from an edge list, synthetic signals, sample-count sweep.

    Alongside the CSV, writes ``<out>.nodes.tsv`` (index to id) and
    ``<out>.meta.json`` (signal recipe and run settings).  Each (K, seed)
    also gets a ``chance`` row holding the permuted-label F-score of the
    first method's estimate.
    """
    if cfg.sweep == "hidden_count":
        raise ConfigError("sweep: real-data runs sweep signal_count or nothing")
    el = load_edge_list(path)
    g = el.graph
    if not 0 <= cfg.hidden_count < g.n:
        raise ConfigError(f"hidden_count: must lie in [0, {g.n})")
    out = Path(out or cfg.out)
    lp = laplacian_pair(g)
    rows: list[dict] = []
    with RowWriter(out) as w:
        for _, K in cfg.sweep_points():
            for seed in cfg.seeds():
                x = gen_signals(lp, K, cfg.noise_sigma, seed)
                part = partition_nodes(g.n, cfg.hidden_count, seed)
                C = sample_covariance(x.X[list(part.observed)])
                truth = observed_groundtruth(g, part)
                first = None
                for m in cfg.methods:
                    res = run_method(m, C, cfg)
                    first = first or res
                    cell = result_rows(m, seed, g.n, part.H, K, cfg, res, truth)
                    w.write(cell)
                    rows += cell
                chance = _chance_rows(first, truth, seed, g.n, part.H, K, cfg)
                w.write(chance)
                rows += chance
    write_aggregate(rows, aggregate_path(out))
    write_id_map(el.ids, out.with_suffix(".nodes.tsv"))
    meta = {"source": str(path), "nodes": g.n, "self_loops_dropped": el.self_loops,
            "signal_recipe": REALDATA_RECIPE, "noise_sigma": cfg.noise_sigma,
            "hidden_count": cfg.hidden_count, "signal_counts": [k for _, k in cfg.sweep_points()],
            "seeds": cfg.seeds(), "chance_draws": _CHANCE_DRAWS}
    out.with_suffix(".meta.json").write_text(json.dumps(meta, indent=1) + "\n")
    return rows


def _chance_rows(first: RunOutcome, truth, seed, N, H, K, cfg) -> list[dict]:
    rows = []
    for tau in cfg.taus:
        f = (chance_fscore(first.estimate, truth, tau, seed)
             if first.estimate is not None else math.nan)
        metrics = dict.fromkeys(METRIC_COLUMNS, math.nan)
        metrics["fscore"] = f
        rows.append({"method": "chance", "seed": seed, "N": N, "B": truth.n, "H": H,
                     "K": K, "noise_sigma": cfg.noise_sigma, "tau": tau, **metrics,
                     "outer_iters_used": 0, "wall_ms": 0.0, "status": first.status})
    return rows
