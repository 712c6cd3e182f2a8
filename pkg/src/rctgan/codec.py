"""Encoding mixed continuous/discrete tables for the GAN.

Continuous columns get mode-specific normalization: a 1-D Gaussian mixture
is fitted per column and a value ``c`` is stored as a scalar
``alpha = (c - mean_k) / (4 * std_k)`` (clipped to [-1, 1]) next to a one-hot
indicator of its mode ``k``. Discrete columns are one-hot. The conditional
vector is a one-hot over every category of every discrete column, and
training-by-sampling picks conditions with log-count weights so rare
categories (the failure class) show up during training.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

log = logging.getLogger(__name__)

MAX_MODES = 10
MIN_MODE_WEIGHT = 0.005
EM_MAX_ITER = 100
EM_TOL = 1e-6
EM_REG_VAR = 1e-6
EM_SUBSAMPLE = 2000
STD_FLOOR = 1e-6
ALPHA_SCALE = 4.0
MISSING_CATEGORY = "<NA>"
SCHEMA_HEADER = "# rctgan schema v1"


class SchemaError(ValueError):
    pass


# --------------------------------------------------------------------------- types


@dataclass
class ColumnMeta:
    name: str
    kind: str
    categories: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    means: np.ndarray = field(default_factory=lambda: np.zeros(0))
    stds: np.ndarray = field(default_factory=lambda: np.zeros(0))
    median: float = 0.0

    def __post_init__(self):
        if self.kind not in ("continuous", "discrete"):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.asarray(self.means, dtype=np.float64)
        self.stds = np.asarray(self.stds, dtype=np.float64)
        if self.kind == "discrete":
            if len(set(map(_category_key, self.categories))) != len(self.categories):
                raise SchemaError(f"column {self.name!r}: duplicate categories")
            if not self.categories:
                raise SchemaError(f"column {self.name!r}: no categories")
        else:
            if len(self.weights) == 0:
                raise SchemaError(f"column {self.name!r}: no retained modes")
            if abs(self.weights.sum() - 1.0) > 1e-9:
                raise SchemaError(f"column {self.name!r}: mode weights sum to {self.weights.sum()}")
            if np.any(self.stds <= 0):
                raise SchemaError(f"column {self.name!r}: non-positive mode stddev")

    @property
    def width(self) -> int:
        return 1 + len(self.weights) if self.kind == "continuous" else len(self.categories)

    @property
    def frequencies(self) -> list[float]:
        total = sum(self.counts)
        return [c / total for c in self.counts] if total else []

    def category_index(self, value) -> int:
        """Index of ``value``; ``"1"`` also matches ``1`` or ``1.0``."""
        key = _category_key(value)
        for i, cat in enumerate(self.categories):
            if _category_key(cat) == key:
                return i
        raise SchemaError(f"column {self.name!r}: unknown category {value!r}")


@dataclass(frozen=True)
class Span:
    column: str
    offset: int
    width: int
    role: str  # "alpha" | "mode" | "category"


@dataclass
class TableSchema:
    columns: list[ColumnMeta]
    target: str

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        if self.target not in names:
            raise SchemaError(f"target column {self.target!r} not in schema")
        if self.column(self.target).kind != "discrete":
            raise SchemaError("target column must be discrete")

    def column(self, name: str) -> ColumnMeta:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def encoded_width(self) -> int:
        return sum(c.width for c in self.columns)

    @property
    def discrete_columns(self) -> list[ColumnMeta]:
        return [c for c in self.columns if c.kind == "discrete"]

    @property
    def cond_width(self) -> int:
        return sum(len(c.categories) for c in self.discrete_columns)

    @property
    def target_meta(self) -> ColumnMeta:
        return self.column(self.target)

    @property
    def n_classes(self) -> int:
        return len(self.target_meta.categories)

    def spans(self) -> list[Span]:
        out, off = [], 0
        for c in self.columns:
            if c.kind == "continuous":
                out.append(Span(c.name, off, 1, "alpha"))
                out.append(Span(c.name, off + 1, len(c.weights), "mode"))
            else:
                out.append(Span(c.name, off, len(c.categories), "category"))
            off += c.width
        return out

    def category_span(self, name: str) -> Span:
        for s in self.spans():
            if s.column == name and s.role == "category":
                return s
        raise KeyError(name)

    def cond_offsets(self) -> dict[str, int]:
        """Offset of each discrete column's block inside the conditional vector."""
        out, off = {}, 0
        for c in self.discrete_columns:
            out[c.name] = off
            off += len(c.categories)
        return out

    def log_frequency_weights(self, name: str) -> np.ndarray:
        """Training-by-sampling category probabilities, proportional to log(1 + count)."""
        counts = np.asarray(self.column(name).counts, dtype=np.float64)
        w = np.log1p(counts)
        if w.sum() == 0:
            return np.full(len(counts), 1.0 / len(counts))
        return w / w.sum()

    def to_text(self) -> str:
        return schema_to_text(self)

    @classmethod
    def from_text(cls, text: str) -> "TableSchema":
        return schema_from_text(text)


@dataclass
class EncodedMatrix:
    data: np.ndarray
    spans: list[Span]

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]


@dataclass
class CondVector:
    column: str
    column_id: int
    category_id: int
    vector: np.ndarray


def _category_key(value):
    if isinstance(value, (bool, np.bool_)):
        return ("n", float(value))
    if isinstance(value, (int, float, np.integer, np.floating)):
        return ("n", float(value))
    try:
        return ("n", float(str(value)))
    except ValueError:
        return ("s", str(value))


def _native(v):
    return v.item() if isinstance(v, np.generic) else v


def _sorted_categories(values) -> list:
    uniq = {}
    for v in values:
        uniq.setdefault(_category_key(v), _native(v))
    return [uniq[k] for k in sorted(uniq)]


# --------------------------------------------------------------------------- GMM


def _normal_logpdf(x: np.ndarray, mean: np.ndarray, var: np.ndarray) -> np.ndarray:
    return -0.5 * (np.log(2 * np.pi * var) + (x[:, None] - mean) ** 2 / var)


def _logsumexp(a: np.ndarray) -> np.ndarray:
    m = a.max(axis=1, keepdims=True)
    return (m + np.log(np.exp(a - m).sum(axis=1, keepdims=True)))[:, 0]


def em_gmm_1d(x: np.ndarray, k: int, max_iter: int = EM_MAX_ITER, tol: float = EM_TOL):
    """Fit a k-component 1-D Gaussian mixture by EM.

    Means start at evenly spaced quantiles, so the fit is deterministic.
    Returns ``(weights, means, variances, mean_loglik, converged)``.
    """
    n = len(x)
    means = np.quantile(x, (np.arange(k) + 0.5) / k)
    var = np.full(k, max(x.var(), EM_REG_VAR) / k ** 2 + EM_REG_VAR)
    weights = np.full(k, 1.0 / k)
    prev = -np.inf
    converged = False
    ll = -np.inf
    for _ in range(max_iter):
        logp = _normal_logpdf(x, means, var) + np.log(weights)
        norm = _logsumexp(logp)
        ll = norm.mean()
        resp = np.exp(logp - norm[:, None])
        nk = resp.sum(axis=0) + 1e-12
        weights = nk / n
        means = (resp * x[:, None]).sum(axis=0) / nk
        var = (resp * (x[:, None] - means) ** 2).sum(axis=0) / nk + EM_REG_VAR
        if abs(ll - prev) < tol:
            converged = True
            break
        prev = ll
    return weights, means, var, ll, converged


def fit_modes(values: np.ndarray, max_modes: int = MAX_MODES, name: str = "?"):
    """Choose the mixture size by BIC over 1..max_modes, prune light modes.

    Works on standardized values and maps the parameters back. Large columns
    are thinned to evenly spaced order statistics before EM. The search stops
    once BIC has worsened twice in a row.
    Returns ``(weights, means, stds)`` in the column's own units.
    """
    x = np.asarray(values, dtype=np.float64)
    center, scale = x.mean(), x.std()
    if scale == 0 or len(np.unique(x)) == 1:
        return np.ones(1), np.array([center]), np.array([STD_FLOOR])
    z = (x - center) / scale
    if len(z) > EM_SUBSAMPLE:
        z = np.sort(z)[np.linspace(0, len(z) - 1, EM_SUBSAMPLE).round().astype(int)]
    n = len(z)
    best = None
    worse = 0
    skipped = []
    for k in range(1, max(1, min(max_modes, len(np.unique(z)))) + 1):
        w, m, v, ll, ok = em_gmm_1d(z, k)
        if not ok and k > 1:
            skipped.append(k)
            continue
        bic = -2 * ll * n + (3 * k - 1) * math.log(n)
        if best is None or bic < best[0]:
            best = (bic, w, m, v)
            worse = 0
        else:
            worse += 1
            if worse >= 2:
                break
    if skipped:
        log.info("column %s: EM did not converge for mode counts %s; those fits were skipped", name, skipped)
    _, w, m, v = best
    keep = w >= MIN_MODE_WEIGHT
    if not keep.any():
        keep[np.argmax(w)] = True
    w = w[keep] / w[keep].sum()
    means = center + scale * m[keep]
    stds = np.maximum(scale * np.sqrt(v[keep]), STD_FLOOR)
    order = np.argsort(means, kind="stable")
    w, means, stds = w[order], means[order], stds[order]
    return w, means, _cover(x, w, means, stds)


def _cover(x, weights, means, stds):
    """Widen modes so every fitted value lies within ``4 * std`` of some mode.

    Each uncovered value stretches its highest-responsibility mode just far
    enough, which keeps encode/decode lossless on the data the schema saw.
    """
    stds = stds.copy()
    dist = np.abs(x[:, None] - means)
    uncovered = ~(dist <= ALPHA_SCALE * stds).any(axis=1)
    if uncovered.any():
        xs = x[uncovered]
        logp = _normal_logpdf(xs, means, stds ** 2) + np.log(weights)
        k = np.argmax(logp, axis=1)
        for j in np.unique(k):
            need = np.abs(xs[k == j] - means[j]).max() / ALPHA_SCALE
            stds[j] = max(stds[j], need * (1 + 1e-12))
    return stds


# --------------------------------------------------------------------------- schema


def fit_schema(rows: pd.DataFrame, kinds: dict[str, str] | None, target: str,
               max_modes: int = MAX_MODES) -> TableSchema:
    """Fit per-column metadata.

    ``kinds`` maps column name to ``"continuous"``/``"discrete"``; missing
    entries are inferred (numeric dtype -> continuous). The target is always
    discrete.
    """
    if len(rows) < 2:
        raise SchemaError("need at least 2 rows to fit a schema")
    if target not in rows.columns:
        raise SchemaError(f"target column {target!r} missing")
    kinds = dict(kinds or {})
    kinds[target] = "discrete"
    cols = []
    for name in rows.columns:
        kind = kinds.get(name) or infer_kind(rows[name])
        series = rows[name]
        if kind == "continuous":
            vals = pd.to_numeric(series, errors="raise").to_numpy(dtype=np.float64)
            finite = vals[np.isfinite(vals)]
            median = float(np.median(finite)) if len(finite) else 0.0
            vals = np.where(np.isfinite(vals), vals, median)
            w, m, s = fit_modes(vals, max_modes, name)
            cols.append(ColumnMeta(name, kind, weights=w, means=m, stds=s, median=median))
        else:
            vals = _discrete_values(series)
            cats = _sorted_categories(vals)
            keys = [_category_key(v) for v in vals]
            counts = [int(sum(1 for k in keys if k == _category_key(c))) for c in cats]
            cols.append(ColumnMeta(name, kind, categories=cats, counts=counts))
    schema = TableSchema(cols, target)
    if len(schema.target_meta.categories) < 2:
        raise SchemaError(f"target column {target!r} is constant")
    return schema


def infer_kind(series: pd.Series) -> str:
    return "continuous" if pd.api.types.is_numeric_dtype(series) and not pd.api.types.is_bool_dtype(series) else "discrete"


def _discrete_values(series: pd.Series) -> list:
    return [MISSING_CATEGORY if (v is None or (isinstance(v, float) and math.isnan(v))) else _native(v)
            for v in series.tolist()]


# --------------------------------------------------------------------------- encode / decode


def _posterior(c: np.ndarray, meta: ColumnMeta) -> np.ndarray:
    logp = _normal_logpdf(c, meta.means, meta.stds ** 2) + np.log(meta.weights)
    return np.exp(logp - _logsumexp(logp)[:, None])


def encode(rows: pd.DataFrame, schema: TableSchema, rng: np.random.Generator) -> EncodedMatrix:
    """Encode rows; each continuous value's mode is sampled from its posterior.

    Sampling is restricted to modes within ``4 * std`` of the value when one
    exists, so ``alpha`` is not clipped and the value decodes exactly.
    """
    n = len(rows)
    out = np.zeros((n, schema.encoded_width))
    off = 0
    for meta in schema.columns:
        if meta.name not in rows.columns:
            raise SchemaError(f"column {meta.name!r} missing from rows")
        series = rows[meta.name]
        if meta.kind == "continuous":
            try:
                c = pd.to_numeric(series, errors="raise").to_numpy(dtype=np.float64)
            except (ValueError, TypeError) as exc:
                raise SchemaError(f"column {meta.name!r}: non-numeric value") from exc
            c = np.where(np.isfinite(c), c, meta.median)
            k = assign_modes(c, meta, rng)
            alpha = (c - meta.means[k]) / (ALPHA_SCALE * meta.stds[k])
            out[:, off] = np.clip(alpha, -1.0, 1.0)
            out[np.arange(n), off + 1 + k] = 1.0
        else:
            idx = _category_indices(meta, _discrete_values(series))
            out[np.arange(n), off + idx] = 1.0
        off += meta.width
    return EncodedMatrix(out, schema.spans())


def assign_modes(c: np.ndarray, meta: ColumnMeta, rng: np.random.Generator) -> np.ndarray:
    resp = _posterior(c, meta)
    inside = np.abs(c[:, None] - meta.means) <= ALPHA_SCALE * meta.stds
    p = resp * inside
    total = p.sum(axis=1)
    fallback = total <= 0
    p[fallback] = resp[fallback]
    p /= p.sum(axis=1, keepdims=True)
    u = rng.random(len(c))
    k = (p.cumsum(axis=1) < u[:, None]).sum(axis=1)
    return np.minimum(k, len(meta.weights) - 1)


def _category_indices(meta: ColumnMeta, values: list) -> np.ndarray:
    lookup = {_category_key(c): i for i, c in enumerate(meta.categories)}
    out = np.empty(len(values), dtype=np.int64)
    for r, v in enumerate(values):
        key = _category_key(v)
        if key not in lookup:
            raise SchemaError(f"column {meta.name!r}: unknown category {v!r}")
        out[r] = lookup[key]
    return out


def decode(m: EncodedMatrix | np.ndarray, schema: TableSchema) -> pd.DataFrame:
    data = m.data if isinstance(m, EncodedMatrix) else np.asarray(m, dtype=np.float64)
    if data.ndim != 2 or data.shape[1] != schema.encoded_width:
        raise SchemaError(f"encoded width {data.shape[-1]} does not match schema width {schema.encoded_width}")
    cols = {}
    off = 0
    for meta in schema.columns:
        if meta.kind == "continuous":
            alpha = np.clip(data[:, off], -1.0, 1.0)
            k = np.argmax(data[:, off + 1: off + meta.width], axis=1)
            cols[meta.name] = alpha * ALPHA_SCALE * meta.stds[k] + meta.means[k]
        else:
            k = np.argmax(data[:, off: off + meta.width], axis=1)
            cats = np.empty(len(meta.categories), dtype=object)
            cats[:] = meta.categories
            cols[meta.name] = pd.Series(cats[k], dtype=object).infer_objects()
        off += meta.width
    return pd.DataFrame(cols, columns=schema.names)


# --------------------------------------------------------------------------- conditions


def sample_condition(schema: TableSchema, rng: np.random.Generator) -> CondVector:
    cols, cats, mat = sample_conditions(schema, 1, rng)
    dcols = schema.discrete_columns
    return CondVector(dcols[cols[0]].name, int(cols[0]), int(cats[0]), mat[0])


def sample_conditions(schema: TableSchema, n: int, rng: np.random.Generator):
    """Batch training-by-sampling.

    Returns ``(column_ids, category_ids, cond_matrix)``; column ids index
    :attr:`TableSchema.discrete_columns`.
    """
    dcols = schema.discrete_columns
    if not dcols:
        raise SchemaError("training-by-sampling needs at least one discrete column")
    col_ids = rng.integers(0, len(dcols), size=n)
    cat_ids = np.zeros(n, dtype=np.int64)
    u = rng.random(n)
    offsets = schema.cond_offsets()
    mat = np.zeros((n, schema.cond_width))
    for j, meta in enumerate(dcols):
        sel = col_ids == j
        if not sel.any():
            continue
        cdf = np.cumsum(schema.log_frequency_weights(meta.name))
        ids = np.minimum(np.searchsorted(cdf, u[sel], side="right"), len(cdf) - 1)
        cat_ids[sel] = ids
        mat[np.flatnonzero(sel), offsets[meta.name] + ids] = 1.0
    return col_ids, cat_ids, mat


def condition_for(schema: TableSchema, column: str, category) -> CondVector:
    """The fixed condition ``column == category``."""
    dcols = schema.discrete_columns
    names = [c.name for c in dcols]
    j = names.index(column)
    k = dcols[j].category_index(category)
    vec = np.zeros(schema.cond_width)
    vec[schema.cond_offsets()[column] + k] = 1.0
    return CondVector(column, j, k, vec)


class ConditionalSampler:
    """Row indices grouped by (discrete column, category) for fast matched draws."""

    def __init__(self, encoded: EncodedMatrix | np.ndarray, schema: TableSchema):
        data = encoded.data if isinstance(encoded, EncodedMatrix) else encoded
        self.groups: list[list[np.ndarray]] = []
        for meta in schema.discrete_columns:
            span = schema.category_span(meta.name)
            which = np.argmax(data[:, span.offset: span.offset + span.width], axis=1)
            self.groups.append([np.flatnonzero(which == k) for k in range(span.width)])

    def draw(self, col_ids: np.ndarray, cat_ids: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        out = np.empty(len(col_ids), dtype=np.int64)
        for r, (j, k) in enumerate(zip(col_ids, cat_ids)):
            pool = self.groups[j][k]
            if len(pool) == 0:
                raise SchemaError(f"no real rows match condition (column {j}, category {k})")
            out[r] = pool[rng.integers(len(pool))]
        return out


def draw_matching_rows(rows: pd.DataFrame, cond: CondVector, batch: int,
                       rng: np.random.Generator, schema: TableSchema | None = None) -> pd.DataFrame:
    """Uniform draw, with replacement, of rows whose conditioned column equals its category."""
    if schema is not None:
        value = schema.column(cond.column).categories[cond.category_id]
    else:
        value = _sorted_categories(_discrete_values(rows[cond.column]))[cond.category_id]
    key = _category_key(value)
    matches = np.flatnonzero([_category_key(v) == key for v in _discrete_values(rows[cond.column])])
    if len(matches) == 0:
        raise SchemaError(f"no rows with {cond.column} == {value!r}")
    return rows.iloc[matches[rng.integers(len(matches), size=batch)]].reset_index(drop=True)


# --------------------------------------------------------------------------- schema text


def schema_to_text(schema: TableSchema) -> str:
    """Line-oriented ``key=value`` descriptor; values are JSON.

    ::

        # rctgan schema v1
        target="failure"
        [column]
        name="smart_5_raw"
        kind="continuous"
        median=0.0
        weights=[...]
        means=[...]
        stds=[...]
        [column]
        name="failure"
        kind="discrete"
        categories=[0, 1]
        counts=[17400, 174]
    """
    lines = [SCHEMA_HEADER, f"target={json.dumps(schema.target)}"]
    for c in schema.columns:
        lines += ["[column]", f"name={json.dumps(c.name)}", f"kind={json.dumps(c.kind)}"]
        if c.kind == "continuous":
            lines += [f"median={json.dumps(c.median)}",
                      f"weights={json.dumps(c.weights.tolist())}",
                      f"means={json.dumps(c.means.tolist())}",
                      f"stds={json.dumps(c.stds.tolist())}"]
        else:
            lines += [f"categories={json.dumps(c.categories)}",
                      f"counts={json.dumps(c.counts)}"]
    return "\n".join(lines) + "\n"


def schema_from_text(text: str) -> TableSchema:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != SCHEMA_HEADER:
        raise SchemaError("not a schema descriptor")
    target = None
    blocks: list[dict] = []
    for ln in lines[1:]:
        if ln.startswith("#"):
            continue
        if ln.strip() == "[column]":
            blocks.append({})
            continue
        key, _, value = ln.partition("=")
        if not _:
            raise SchemaError(f"malformed schema line: {ln!r}")
        value = json.loads(value)
        if blocks:
            blocks[-1][key.strip()] = value
        elif key.strip() == "target":
            target = value
    cols = [ColumnMeta(**b) for b in blocks]
    return TableSchema(cols, target)


# --------------------------------------------------------------------------- CSV


BACKBLAZE_TARGET = "failure"
BACKBLAZE_MODEL = "ST4000DM000"
BACKBLAZE_ID_COLUMNS = ("date", "serial_number", "model", "capacity_bytes")


@dataclass
class LoadedTable:
    frame: pd.DataFrame
    kinds: dict[str, str]
    target: str | None
    skipped_rows: int = 0
    ids: pd.DataFrame | None = None


def _parse_float(s: str):
    try:
        return float(s)
    except ValueError:
        return None


def load_csv(path, layout: str = "generic", target: str | None = None,
             model: str | None = BACKBLAZE_MODEL) -> LoadedTable:
    """Read a CSV with a header row.

    ``generic``: a column is continuous when most of its non-empty cells are
    numbers; rows with an unparsable cell in such a column are dropped and
    counted. ``backblaze``: keeps rows of one drive ``model``, uses
    ``failure`` as target, treats ``smart_*`` columns as continuous and drops
    SMART columns that are entirely empty.
    """
    if layout not in ("generic", "backblaze"):
        raise ValueError(f"unknown layout {layout!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or not any(h.strip() for h in header):
            raise SchemaError(f"{path}: missing header")
        header = [h.strip() for h in header]
        body = [r for r in reader if r]
    for i, r in enumerate(body):
        if len(r) != len(header):
            raise SchemaError(f"{path}: row {i + 2} has {len(r)} fields, header has {len(header)}")
    columns = {h: [r[j].strip() for r in body] for j, h in enumerate(header)}

    ids = None
    if layout == "backblaze":
        target = target or BACKBLAZE_TARGET
        if model is not None and "model" in columns:
            keep = [i for i, m in enumerate(columns["model"]) if m == model]
            columns = {h: [v[i] for i in keep] for h, v in columns.items()}
        ids = pd.DataFrame({h: columns[h] for h in BACKBLAZE_ID_COLUMNS if h in columns})
        kinds = {}
        for h in header:
            if h.startswith("smart_"):
                if all(v == "" for v in columns[h]):
                    del columns[h]
                else:
                    kinds[h] = "continuous"
            elif h in BACKBLAZE_ID_COLUMNS:
                del columns[h]
        kinds[target] = "discrete"
    else:
        kinds = {}
        for h, vals in columns.items():
            filled = [v for v in vals if v != ""]
            parsed = sum(_parse_float(v) is not None for v in filled)
            kinds[h] = "continuous" if filled and parsed * 2 > len(filled) else "discrete"
        if target is not None:
            kinds[target] = "discrete"
    if target is not None and target not in columns:
        raise SchemaError(f"{path}: target column {target!r} not found")

    n = len(next(iter(columns.values()))) if columns else 0
    bad = np.zeros(n, dtype=bool)
    parsed_cols = {}
    for h, vals in columns.items():
        if kinds.get(h) == "continuous":
            arr = np.full(n, np.nan)
            for i, v in enumerate(vals):
                if v == "":
                    continue
                f = _parse_float(v)
                if f is None:
                    bad[i] = True
                else:
                    arr[i] = f
            parsed_cols[h] = arr
        else:
            parsed_cols[h] = vals
    skipped = int(bad.sum())
    if skipped:
        log.warning("%s: skipped %d row(s) with unparsable numeric cells", path, skipped)
    keep = ~bad
    frame = {}
    for h, vals in parsed_cols.items():
        if kinds.get(h) == "continuous":
            arr = vals[keep]
            if np.all(np.isfinite(arr)) and np.all(arr == np.round(arr)) and np.all(np.abs(arr) < 2 ** 53):
                frame[h] = arr.astype(np.int64)
            else:
                frame[h] = arr
        else:
            col = [v for v, k in zip(vals, keep) if k]
            frame[h] = _coerce_discrete(col)
    if ids is not None:
        ids = ids.loc[keep].reset_index(drop=True)
    return LoadedTable(pd.DataFrame(frame), kinds, target, skipped, ids)


def _coerce_discrete(values: list) -> list:
    """Integer-looking discrete cells (e.g. a 0/1 failure flag) become ints."""
    try:
        ints = [int(v) for v in values]
    except ValueError:
        return values
    if all(str(i) == v for i, v in zip(ints, values)):
        return ints
    return values
