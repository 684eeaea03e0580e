"""Experiment runner: methods x coreset sizes x repetitions, with persistence."""

import csv
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ._rng import derive_seed, stream
from .basis import DEFAULT_DEGREE, expand, fit_bounds
from .coreset import DEFAULT_ALPHA, DEFAULT_EPSILON, METHODS, build_coreset
from .data import Dataset
from .dgp import PROCESSES, DgpSpec, generate, resolve_id
from .exceptions import DataLoadError, InvalidComparisonError, InvalidConfigError, MCTMError
from .fit import FitConfig, fit
from .model import _forward, nll, normalization_shift

logger = logging.getLogger(__name__)

ROW_FIELDS = (
    "dataset", "method", "k", "rep", "loglik_ratio", "param_l2", "param_l2_sq",
    "lambda_err", "sample_time_s", "fit_time_s", "total_time_s",
)
METRICS = ROW_FIELDS[4:]


# --- metrics -------------------------------------------------------------

def _check_same(full, other, what):
    if full.shape != other.shape:
        raise InvalidComparisonError(f"{what} shapes differ: {full.shape} vs {other.shape}")


def param_l2(full_params, coreset_params, squared=False):
    """Euclidean distance between the concatenated marginal coefficients."""
    _check_same(full_params.theta, coreset_params.theta, "theta")
    sq = float(np.sum((full_params.theta - coreset_params.theta) ** 2))
    return sq if squared else math.sqrt(sq)


def lambda_err(full_params, coreset_params):
    """Euclidean norm of the differences of the strictly lower Lambda entries."""
    _check_same(full_params.lambda_strict, coreset_params.lambda_strict, "lambda")
    return float(np.linalg.norm(full_params.lambda_strict - coreset_params.lambda_strict))


def likelihood_ratio(full_params, coreset_params, expansion):
    """Full-data loss at the coreset fit over full-data loss at the full fit.

    Both terms use unit weights on the full expansion. When the denominator
    is not positive (densities above one make the loss negative), both terms
    get the same constant ``n J (ln c + 1)`` with ``c >= 1`` bounding every
    log argument under the full-fit parameters.
    """
    num = nll(expansion, coreset_params).total
    den = nll(expansion, full_params).total
    if den <= 0:
        _, G, _, _, _, _ = _forward(
            expansion.A, expansion.Aprime, full_params.theta, full_params.lambda_strict, full_params.eta
        )
        c = max(1.0, float(np.max(G)))
        shift = normalization_shift(expansion.n, expansion.J, c)
        num, den = num + shift, den + shift
    return num / den


# --- records -------------------------------------------------------------

@dataclass(frozen=True)
class MetricRow:
    dataset: str
    method: str
    k: int
    rep: int
    loglik_ratio: float
    param_l2: float
    param_l2_sq: float
    lambda_err: float
    sample_time_s: float
    fit_time_s: float
    total_time_s: float
    status: str = "ok"

    @property
    def failed(self):
        return self.status != "ok"

    def csv_fields(self):
        out = []
        for name in ROW_FIELDS:
            v = getattr(self, name)
            out.append(repr(float(v)) if isinstance(v, float) else str(v))
        return out


@dataclass(frozen=True)
class ExperimentConfig:
    """What to run. ``datasets`` holds process ids (ignored for supplied data)."""

    datasets: tuple = tuple(PROCESSES)
    n: int = 10_000
    ks: tuple = (30, 100)
    methods: tuple = METHODS
    reps: int = 10
    seed: int = 0
    degree: int = DEFAULT_DEGREE
    alpha: float = DEFAULT_ALPHA
    epsilon: float = DEFAULT_EPSILON
    eta: float = None
    max_iters: int = 500
    tol: float = 1e-6
    parametrization: str = "monotone"
    score_method: str = "auto"
    threads: int = 1
    record_timings: bool = True

    def __post_init__(self):
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "ks", tuple(int(k) for k in self.ks))
        object.__setattr__(self, "methods", tuple(self.methods))
        for m in self.methods:
            if m not in METHODS:
                raise InvalidConfigError(f"unknown method {m!r}; expected one of {METHODS}")
        if not self.ks or min(self.ks) < 1:
            raise InvalidConfigError("coreset sizes must be positive")
        if self.reps < 1:
            raise InvalidConfigError("reps must be >= 1")
        if self.threads < 1:
            raise InvalidConfigError("threads must be >= 1")
        if not 0 < self.alpha <= 1:
            raise InvalidConfigError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 < self.epsilon < 1:
            raise InvalidConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.eta is None:
            # log-argument floor tied to the hull tolerance
            object.__setattr__(self, "eta", 2.0 * self.epsilon)
        if not self.eta >= 0:
            raise InvalidConfigError(f"eta must be nonnegative, got {self.eta}")

    @property
    def fit_config(self):
        return FitConfig(max_iters=self.max_iters, tol=self.tol, parametrization=self.parametrization, eta=self.eta)

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentReport:
    rows: list
    config: dict
    aggregates: list = field(default_factory=list)
    full_fits: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = aggregate(self.rows)

    def write(self, out_dir, prefix="bench"):
        """Write ``<prefix>_rows.csv``, ``<prefix>_aggregates.json`` and ``<prefix>_config.json``."""
        os.makedirs(out_dir, exist_ok=True)
        paths = {
            "rows": os.path.join(out_dir, f"{prefix}_rows.csv"),
            "aggregates": os.path.join(out_dir, f"{prefix}_aggregates.json"),
            "config": os.path.join(out_dir, f"{prefix}_config.json"),
        }
        write_rows(paths["rows"], self.rows)
        _dump_json(paths["aggregates"], self.aggregates)
        _dump_json(paths["config"], self.config)
        return paths


def write_rows(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ROW_FIELDS)
        for r in rows:
            w.writerow(r.csv_fields())


def _dump_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _stats(values):
    v = np.asarray([x for x in values if np.isfinite(x)], dtype=np.float64)
    if v.size == 0:
        return {"mean": None, "std": None, "count": 0}
    std = float(np.std(v, ddof=1)) if v.size > 1 else None
    return {"mean": float(v.mean()), "std": std, "count": int(v.size)}


def aggregate(rows):
    """Mean, sample standard deviation and count per (dataset, method, k)."""
    groups = {}
    for r in rows:
        groups.setdefault((r.dataset, r.method, r.k), []).append(r)
    out = []
    for (ds, method, k), rs in groups.items():
        entry = {"dataset": ds, "method": method, "k": k, "failed": sum(r.failed for r in rs)}
        for m in METRICS:
            entry[m] = _stats([getattr(r, m) for r in rs])
        out.append(entry)
    return out


# --- runner --------------------------------------------------------------

def _dataset_name(key):
    return f"dgp{key:02d}" if isinstance(key, int) else str(key)


def _one_run(task, expansion, full_params, cfg):
    name, method, k, rep = task
    seed = derive_seed(cfg.seed, name, method, k, rep)
    t0 = time.perf_counter()
    try:
        sample = build_coreset(
            expansion, method, min(k, expansion.n), seed=seed, alpha=cfg.alpha,
            epsilon=cfg.epsilon, score_method=cfg.score_method,
        )
        res = fit(expansion.subset(sample.indices), sample.weights, cfg.fit_config)
        ratio = likelihood_ratio(full_params, res.params, expansion)
        if not np.isfinite(ratio) or ratio <= 0:
            raise FloatingPointError(f"likelihood ratio {ratio}")
        times = (sample.sample_time_s, res.fit_time_s, time.perf_counter() - t0)
        if not cfg.record_timings:
            times = (0.0, 0.0, 0.0)
        return MetricRow(
            name, method, k, rep, float(ratio), param_l2(full_params, res.params),
            param_l2(full_params, res.params, squared=True), lambda_err(full_params, res.params), *times,
        )
    except (MCTMError, FloatingPointError, np.linalg.LinAlgError) as exc:
        logger.warning("%s %s k=%d rep=%d failed: %s", name, method, k, rep, exc)
        nan = float("nan")
        return MetricRow(name, method, k, rep, nan, nan, nan, nan, nan, nan, nan, status=f"failed: {exc}")


def run_experiment(config, datasets=None):
    """Full fit per dataset, then every (method, k, rep) coreset fit.

    Parameters
    ----------
    config : ExperimentConfig
    datasets : mapping of name -> Dataset, optional
        Supplied data (e.g. from :func:`load_csv`); defaults to the
        simulation processes in ``config.datasets`` drawn with ``config.n``
        rows and seeds derived from ``config.seed``.

    Returns
    -------
    ExperimentReport
        Rows ordered by dataset, repetition, method and k regardless of
        ``config.threads``.
    """
    if datasets is None:
        datasets = {}
        for key in config.datasets:
            i = resolve_id(key)
            datasets[_dataset_name(i)] = generate(DgpSpec(i, config.n, derive_seed(config.seed, "data", i)))
    rows, full_fits = [], {}
    for name, data in datasets.items():
        values = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
        basis = fit_bounds(values, config.degree)
        expansion = expand(values, basis)
        full = fit(expansion, None, config.fit_config)
        logger.info("%s: full fit loss %.6g in %d iterations (%s)", name, full.loss.total, full.iterations, full.status)
        full_fits[name] = {
            "loss": full.loss.total, "iterations": full.iterations, "status": full.status,
            "fit_time_s": full.fit_time_s if config.record_timings else 0.0, "n": expansion.n, "J": expansion.J,
        }
        tasks = [(name, m, k, rep) for rep in range(config.reps) for m in config.methods for k in config.ks]
        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                rows.extend(pool.map(lambda t: _one_run(t, expansion, full.params, config), tasks))
        else:
            rows.extend(_one_run(t, expansion, full.params, config) for t in tasks)
    return ExperimentReport(rows, config.to_dict(), full_fits=full_fits)


# --- real data -----------------------------------------------------------

def parse_columns(spec, header):
    """Resolve a column spec against ``header``.

    Accepts a list or a comma-separated string of names, zero-based indices
    and inclusive ranges such as ``"0-9"``.
    """
    if spec is None:
        return list(range(len(header)))
    items = spec.split(",") if isinstance(spec, str) else list(spec)
    out = []
    for item in items:
        if isinstance(item, (int, np.integer)):
            out.append(int(item))
            continue
        item = str(item).strip()
        if item in header:
            out.append(header.index(item))
        elif item.isdigit():
            out.append(int(item))
        elif "-" in item and all(p.strip().isdigit() for p in item.split("-", 1)):
            a, b = (int(p) for p in item.split("-", 1))
            out.extend(range(a, b + 1))
        else:
            raise DataLoadError(f"unknown column {item!r}; header has {header}")
    for c in out:
        if not 0 <= c < len(header):
            raise DataLoadError(f"column index {c} out of range for {len(header)} columns")
    return out


_MISSING = {"", "na", "nan", "null", "none", "inf", "-inf", "+inf", "infinity", "-infinity"}


def load_csv(path, columns=None, max_rows=None, seed=0):
    """Read numeric columns from a headed CSV file.

    Rows with missing or non-finite cells in the selected columns are
    dropped and counted in ``meta["dropped_rows"]``; any other unparsable
    cell raises :class:`DataLoadError` naming the line. With ``max_rows``
    a uniform subsample (without replacement, original order kept) is
    drawn from the named stream ``seed``.
    """
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataLoadError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataLoadError(f"{path} is empty") from None
        cols = parse_columns(columns, header)
        values, dropped = [], 0
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < len(header):
                raise DataLoadError(f"{path}:{line}: expected {len(header)} fields, found {len(row)}")
            rec = []
            for c in cols:
                cell = row[c].strip()
                try:
                    v = float(cell)
                except ValueError:
                    if cell.lower() in _MISSING:
                        v = float("nan")
                    else:
                        raise DataLoadError(
                            f"{path}:{line}: column {header[c]!r}: cannot parse {cell!r} as a number"
                        ) from None
                rec.append(v)
            if all(math.isfinite(v) for v in rec):
                values.append(rec)
            else:
                dropped += 1
    if dropped:
        logger.warning("%s: dropped %d rows with missing or non-finite values", path, dropped)
    arr = np.asarray(values, dtype=np.float64).reshape(-1, len(cols))
    if arr.shape[0] == 0:
        raise DataLoadError(f"{path}: no complete rows in the selected columns")
    total = arr.shape[0]
    if max_rows is not None and total > max_rows:
        rng = stream(seed, "load_csv")
        arr = arr[np.sort(rng.choice(total, size=int(max_rows), replace=False))]
    meta = {"source": str(path), "rows_read": total, "dropped_rows": dropped, "seed": seed}
    return Dataset(arr, tuple(header[c] for c in cols), meta)


def row_from_fields(values):
    """Inverse of :meth:`MetricRow.csv_fields` (used by tests and tooling)."""
    kw = {}
    for f, v in zip(fields(MetricRow), values):
        kw[f.name] = f.type(v) if f.type in (int, float) else v
    return MetricRow(**kw)
