"""Datasets, file loaders and feature streams.

A :class:`Dataset` is an immutable instance-by-feature matrix with discrete
class labels.  Discrete columns are stored as dense 0-based integer codes
(held in the float matrix) together with the map from original values to
codes.  A :class:`FeatureStream` reveals features, or groups of features, one
arrival at a time and refuses access to columns that have not arrived yet.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .exceptions import (
    ConfigurationError,
    ParseError,
    StreamingViolation,
    UnsupportedFormatError,
    ValidationError,
)

DISCRETE = "discrete"
CONTINUOUS = "continuous"
KIND_INFERENCE = ("auto", "all_discrete", "all_continuous")


class Group(NamedTuple):
    name: str
    features: tuple[int, ...]


def discrete_bound(n_instances: int) -> int:
    """Largest number of distinct integral values still inferred as discrete."""
    return max(10, math.ceil(math.sqrt(n_instances)))


def _is_integral(values: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(values)) and np.all(values == np.round(values)))


def _as_key(value):
    # Map keys use int for integral numbers so JSON/CSV output reads naturally.
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return int(value) if value.is_integer() else value
    if isinstance(value, (np.integer,)):
        return int(value)
    return value


def _recode(values) -> tuple[np.ndarray, dict]:
    uniques, codes = np.unique(np.asarray(values), return_inverse=True)
    return codes.astype(np.int64), {_as_key(u): i for i, u in enumerate(uniques)}


def _parse_labels(tokens: Sequence[str]):
    """Recode class tokens; numeric labels sort numerically, others lexically."""
    try:
        numeric = [float(t) for t in tokens]
    except ValueError:
        return _recode(list(tokens))
    return _recode(numeric)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Fixed set of instances with per-feature kinds and discrete class labels.

    ``X`` has shape ``(n_instances, n_features)``.  Discrete columns contain
    integer codes in ``[0, cardinality)``; ``code_maps[j]`` maps the original
    value to its code (``None`` for continuous columns).  ``y`` holds class
    codes and ``class_map`` maps original labels to them.
    """

    X: np.ndarray
    y: np.ndarray
    feature_kinds: tuple[str, ...]
    cardinalities: tuple[int | None, ...]
    feature_names: tuple[str, ...]
    code_maps: tuple[dict | None, ...]
    class_map: dict
    groups: tuple[Group, ...] | None = None
    class_name: str = "class"
    name: str = ""

    def __post_init__(self):
        X = np.array(self.X, dtype=np.float64)
        y = np.array(self.y, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] == 0:
            raise ValidationError("dataset has zero instances")
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValidationError(
                f"feature matrix has shape {X.shape}, expected ({y.shape[0]}, d)"
            )
        d = X.shape[1]
        for attr in ("feature_kinds", "cardinalities", "feature_names", "code_maps"):
            if len(getattr(self, attr)) != d:
                raise ValidationError(f"{attr} has length {len(getattr(self, attr))}, expected {d}")
        if not np.all(np.isfinite(X)):
            i, j = np.argwhere(~np.isfinite(X))[0]
            raise ValidationError(f"missing or non-finite value at row {i + 1}, feature {self.feature_names[j]!r}")
        for j, (kind, card) in enumerate(zip(self.feature_kinds, self.cardinalities)):
            if kind == DISCRETE:
                col = X[:, j]
                if card is None or card < 1 or not _is_integral(col) or col.min() < 0 or col.max() >= card:
                    raise ValidationError(f"discrete feature {self.feature_names[j]!r} has codes outside [0, {card})")
            elif kind != CONTINUOUS:
                raise ValidationError(f"unknown feature kind {kind!r}")
        n_classes = len(self.class_map)
        if n_classes < 2 or len(np.unique(y)) < 2:
            raise ValidationError("class labels must take at least two distinct values")
        if y.min() < 0 or y.max() >= n_classes:
            raise ValidationError("class codes outside [0, n_classes)")
        if self.groups is not None:
            groups = tuple(Group(str(name), tuple(int(f) for f in feats)) for name, feats in self.groups)
            _check_partition(groups, d)
            object.__setattr__(self, "groups", groups)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_instances(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_map)

    def column(self, j: int) -> np.ndarray:
        return self.X[:, j]

    def is_discrete(self, j: int) -> bool:
        return self.feature_kinds[j] == DISCRETE

    def index_of(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            if not 0 <= name < self.n_features:
                raise ValidationError(f"feature index {name} out of range")
            return int(name)
        try:
            return self.feature_names.index(name)
        except ValueError:
            raise ValidationError(f"unknown feature {name!r}") from None

    def with_groups(self, groups) -> "Dataset":
        return replace(self, groups=None if groups is None else tuple(groups))

    def subset(self, rows) -> "Dataset":
        """Dataset restricted to ``rows``; codes and maps are kept as they are."""
        rows = np.asarray(rows)
        return replace(self, X=self.X[rows], y=self.y[rows])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
            and self.feature_kinds == other.feature_kinds
            and self.cardinalities == other.cardinalities
            and self.feature_names == other.feature_names
            and self.code_maps == other.code_maps
            and self.class_map == other.class_map
            and self.groups == other.groups
        )

    __hash__ = None

    @classmethod
    def from_arrays(cls, X, y, feature_kinds="auto", feature_names=None, groups=None, name=""):
        """Build a dataset from a numeric matrix and a label vector.

        ``feature_kinds`` is one of the inference policies (``"auto"``,
        ``"all_discrete"``, ``"all_continuous"``) or an explicit per-column
        sequence of ``"discrete"``/``"continuous"``.  Discrete columns and the
        labels are re-coded to dense 0-based codes.
        """
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if X.size else X.reshape(len(y), 0)
        n, d = X.shape
        if isinstance(feature_kinds, str):
            kinds = [_infer_kind(X[:, j], n, feature_kinds) for j in range(d)]
        else:
            kinds = list(feature_kinds)
            if len(kinds) != d:
                raise ConfigurationError(f"got {len(kinds)} feature kinds for {d} features")
        if feature_names is None:
            feature_names = [f"f{j + 1}" for j in range(d)]
        Xc, cards, maps = _encode_features([X[:, j] for j in range(d)], kinds, n)
        y_codes, class_map = _recode(np.asarray(y))
        return cls(
            X=Xc,
            y=y_codes,
            feature_kinds=tuple(kinds),
            cardinalities=tuple(cards),
            feature_names=tuple(str(f) for f in feature_names),
            code_maps=tuple(maps),
            class_map=class_map,
            groups=groups,
            name=name,
        )


def _encode_features(columns, kinds, n):
    """Re-code discrete columns; a column may also arrive as ``(codes, map)``."""
    out, cards, maps = [], [], []
    for col, kind in zip(columns, kinds):
        if isinstance(col, tuple):
            codes, cmap = col
        elif kind == DISCRETE:
            codes, cmap = _recode(col)
        else:
            out.append(np.asarray(col, dtype=np.float64))
            cards.append(None)
            maps.append(None)
            continue
        out.append(codes.astype(np.float64))
        cards.append(len(cmap))
        maps.append(cmap)
    X = np.column_stack(out) if out else np.empty((n, 0))
    return X, cards, maps


def _check_partition(groups: Sequence[Group], n_features: int) -> None:
    seen: dict[int, str] = {}
    names = set()
    for g in groups:
        if g.name in names:
            raise ValidationError(f"duplicate group name {g.name!r}")
        names.add(g.name)
        if not g.features:
            raise ValidationError(f"group {g.name!r} is empty")
        for f in g.features:
            if not 0 <= f < n_features:
                raise ValidationError(f"group {g.name!r} references unknown feature {f}")
            if f in seen:
                raise ValidationError(f"feature {f} appears in groups {seen[f]!r} and {g.name!r}")
            seen[f] = g.name
    if len(seen) != n_features:
        missing = sorted(set(range(n_features)) - set(seen))
        raise ValidationError(f"groups do not cover features {missing}")


def _infer_kind(values: np.ndarray, n: int, policy: str) -> str:
    if policy == "all_discrete":
        return DISCRETE
    if policy == "all_continuous":
        return CONTINUOUS
    if policy != "auto":
        raise ConfigurationError(f"kind_inference must be one of {KIND_INFERENCE}, got {policy!r}")
    if _is_integral(values) and len(np.unique(values)) <= discrete_bound(n):
        return DISCRETE
    return CONTINUOUS


# ---------------------------------------------------------------------------
# CSV


def load_csv(path, has_header=True, class_column=-1, kind_inference="auto", groups=None) -> Dataset:
    """Load a comma-delimited file.  The class is the last column by default.

    ``class_column`` is a 0-based index (negative values count from the end)
    or a header name.  ``groups`` optionally names a group sidecar JSON file.
    """
    if kind_inference not in KIND_INFERENCE:
        raise ConfigurationError(f"kind_inference must be one of {KIND_INFERENCE}, got {kind_inference!r}")
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [(i, r) for i, r in enumerate(csv.reader(fh), start=1) if r and any(c.strip() for c in r)]
    header = None
    if has_header:
        if not rows:
            raise ValidationError("dataset has zero instances")
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise ValidationError("dataset has zero instances")
    width = len(header) if header is not None else len(rows[0][1])
    for lineno, r in rows:
        if len(r) != width:
            raise ParseError(f"expected {width} fields, found {len(r)}", row=lineno)
    if header is None:
        header = [f"f{j + 1}" for j in range(width - 1)] + ["class"]
    cls_idx = _resolve_column(class_column, header)
    feat_idx = [j for j in range(width) if j != cls_idx]
    n = len(rows)

    labels = [r[cls_idx].strip() for _, r in rows]
    y, class_map = _parse_labels(labels)

    columns, kinds = [], []
    for j in feat_idx:
        tokens = [r[j].strip() for _, r in rows]
        values = _numeric_column(tokens, rows, header[j], allow_text=kind_inference == "all_discrete")
        if values is None:
            columns.append(_recode(tokens))
            kinds.append(DISCRETE)
            continue
        columns.append(values)
        kinds.append(_infer_kind(values, n, kind_inference))
    X, cards, maps = _encode_features(columns, kinds, n)
    ds = Dataset(
        X=X,
        y=y,
        feature_kinds=tuple(kinds),
        cardinalities=tuple(cards),
        feature_names=tuple(header[j] for j in feat_idx),
        code_maps=tuple(maps),
        class_map=class_map,
        class_name=header[cls_idx],
        name=path.stem,
    )
    if groups is not None:
        ds = ds.with_groups(load_groups(groups, ds.feature_names))
    return ds


def _resolve_column(column, header: Sequence[str]) -> int:
    if isinstance(column, str) and not re.fullmatch(r"-?\d+", column):
        if column not in header:
            raise ConfigurationError(f"class column {column!r} not found in header")
        return header.index(column)
    idx = int(column)
    if not -len(header) <= idx < len(header):
        raise ConfigurationError(f"class column {idx} out of range for {len(header)} columns")
    return idx % len(header)


def _numeric_column(tokens, rows, name, allow_text=False):
    out = np.empty(len(tokens))
    for i, tok in enumerate(tokens):
        if tok in ("", "?", "NA", "nan", "NaN"):
            raise ValidationError(f"row {rows[i][0]}: missing value in column {name!r}")
        try:
            out[i] = float(tok)
        except ValueError:
            if allow_text:
                return None
            raise ParseError(f"non-numeric value {tok!r} in column {name!r}", row=rows[i][0]) from None
    return out


def write_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` with original (decoded) values and a header row."""
    inverse = [None if m is None else {c: v for v, c in m.items()} for m in dataset.code_maps]
    class_inverse = {c: v for v, c in dataset.class_map.items()}
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(dataset.feature_names) + [dataset.class_name])
        for i in range(dataset.n_instances):
            row = []
            for j in range(dataset.n_features):
                v = dataset.X[i, j]
                row.append(inverse[j][int(v)] if inverse[j] is not None else repr(float(v)))
            row.append(class_inverse[int(dataset.y[i])])
            w.writerow(row)


# ---------------------------------------------------------------------------
# LIBSVM


def load_libsvm(path, groups=None) -> Dataset:
    """Load a sparse ``label idx:val ...`` file with 1-based indices.

    Absent entries are zero.  All features are discrete when every stored
    value is integral and the number of distinct stored values is within the
    auto-inference bound; otherwise all are continuous.
    """
    path = Path(path)
    labels, entries = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            labels.append(parts[0])
            row, last = {}, 0
            for tok in parts[1:]:
                idx_s, sep, val_s = tok.partition(":")
                if not sep:
                    raise ParseError(f"malformed entry {tok!r}", row=lineno)
                try:
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise ParseError(f"malformed entry {tok!r}", row=lineno) from None
                if idx == 0:
                    raise ParseError("feature index 0 is invalid (indices are 1-based)", row=lineno)
                if idx <= last:
                    raise ParseError(f"feature indices must increase, got {idx} after {last}", row=lineno)
                if not math.isfinite(val):
                    raise ValidationError(f"row {lineno}: non-finite value at index {idx}")
                row[idx] = val
                last = idx
            entries.append(row)
    if not labels:
        raise ValidationError("dataset has zero instances")
    n = len(labels)
    d = max((max(r) for r in entries if r), default=0)
    X = np.zeros((n, d))
    stored = []
    for i, row in enumerate(entries):
        for idx, val in row.items():
            X[i, idx - 1] = val
            stored.append(val)
    stored = np.asarray(stored)
    discrete = stored.size > 0 and _is_integral(stored) and len(np.unique(stored)) <= discrete_bound(n)
    kinds = [DISCRETE if discrete else CONTINUOUS] * d
    Xc, cards, maps = _encode_features([X[:, j] for j in range(d)], kinds, n)
    y, class_map = _parse_labels(labels)
    ds = Dataset(
        X=Xc,
        y=y,
        feature_kinds=tuple(kinds),
        cardinalities=tuple(cards),
        feature_names=tuple(f"f{j + 1}" for j in range(d)),
        code_maps=tuple(maps),
        class_map=class_map,
        name=path.stem,
    )
    if groups is not None:
        ds = ds.with_groups(load_groups(groups, ds.feature_names))
    return ds


# ---------------------------------------------------------------------------
# ARFF


_GROUP_COMMENT = re.compile(r"^%\s*@group\s+(\S+)\s+(.+)$", re.IGNORECASE)


def _split_arff(text: str) -> list[str]:
    """Split on commas outside single or double quotes, stripping quotes."""
    out, buf, quote = [], [], None
    for ch in text:
        if quote:
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
        elif ch == ",":
            out.append("".join(buf).strip())
            buf = []
        else:
            buf.append(ch)
    out.append("".join(buf).strip())
    return out


def _parse_attribute(rest: str, lineno: int):
    rest = rest.strip()
    if rest[:1] in "'\"":
        q = rest[0]
        end = rest.find(q, 1)
        if end < 0:
            raise ParseError("unterminated attribute name", row=lineno)
        name, typ = rest[1:end], rest[end + 1:].strip()
    else:
        name, _, typ = rest.partition(" ")
        if not typ:
            name, _, typ = rest.partition("\t")
        typ = typ.strip()
    if typ.startswith("{"):
        if not typ.endswith("}"):
            raise ParseError(f"malformed nominal declaration for {name!r}", row=lineno)
        return name, [v for v in _split_arff(typ[1:-1])]
    low = typ.lower()
    if low in ("numeric", "real", "integer"):
        return name, None
    raise UnsupportedFormatError(f"attribute {name!r} has unsupported type {typ.split()[0] if typ else '?'!r}")


def load_arff(path, groups=None) -> Dataset:
    """Load a dense ARFF file with numeric and nominal attributes.

    The attribute named ``class`` (case-insensitive) is the class, else the
    last attribute.  Nominal codes follow declaration order.  Groups may be
    declared inline with header comments of the form
    ``% @group <name> <attr>,<attr>,...``.
    """
    path = Path(path)
    attrs: list[tuple[str, list | None]] = []
    inline_groups: list[tuple[str, list[str]]] = []
    rows: list[tuple[int, list[str]]] = []
    in_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("%"):
                m = _GROUP_COMMENT.match(line)
                if m and not in_data:
                    inline_groups.append((m.group(1), [s for s in _split_arff(m.group(2)) if s]))
                continue
            if in_data:
                if line.startswith("{"):
                    raise UnsupportedFormatError("sparse @data rows are not supported")
                rows.append((len(rows) + 1, _split_arff(line)))
                continue
            key, _, rest = line.partition(" ")
            key = key.lower()
            if key == "@relation":
                continue
            if key == "@attribute":
                attrs.append(_parse_attribute(rest, lineno))
            elif key == "@data":
                in_data = True
            else:
                raise ParseError(f"unexpected header line {line!r}", row=lineno)
    if not attrs:
        raise ParseError("no @attribute declarations")
    if not rows:
        raise ValidationError("dataset has zero instances")
    names = [a[0] for a in attrs]
    lowered = [a.lower() for a in names]
    cls_idx = lowered.index("class") if "class" in lowered else len(attrs) - 1
    for rowno, values in rows:
        if len(values) != len(attrs):
            raise ParseError(f"expected {len(attrs)} values, found {len(values)}", row=rowno)
        for j, v in enumerate(values):
            if v == "?":
                raise ValidationError(f"row {rowno}: missing value for attribute {names[j]!r}")

    n = len(rows)
    columns, kinds, cards, maps, feat_names = [], [], [], [], []
    y = cmap_y = None
    for j, (name, nominal) in enumerate(attrs):
        tokens = [r[1][j] for r in rows]
        if nominal is not None:
            cmap = {v: c for c, v in enumerate(nominal)}
            try:
                codes = np.array([cmap[t] for t in tokens], dtype=np.int64)
            except KeyError as exc:
                rowno = tokens.index(exc.args[0]) + 1
                raise ParseError(f"value {exc.args[0]!r} not declared for attribute {name!r}", row=rowno) from None
        else:
            try:
                values = np.array([float(t) for t in tokens])
            except ValueError:
                bad = next(i for i, t in enumerate(tokens) if not _is_float(t))
                raise ParseError(f"non-numeric value {tokens[bad]!r} for attribute {name!r}", row=bad + 1) from None
        if j == cls_idx:
            if nominal is not None:
                y, cmap_y = codes, cmap
            else:
                y, cmap_y = _recode(values)
            continue
        feat_names.append(name)
        if nominal is not None:
            columns.append(codes.astype(np.float64))
            kinds.append(DISCRETE)
            cards.append(len(nominal))
            maps.append(cmap)
        else:
            columns.append(values)
            kinds.append(CONTINUOUS)
            cards.append(None)
            maps.append(None)
    X = np.column_stack(columns) if columns else np.empty((n, 0))
    ds = Dataset(
        X=X,
        y=y,
        feature_kinds=tuple(kinds),
        cardinalities=tuple(cards),
        feature_names=tuple(feat_names),
        code_maps=tuple(maps),
        class_map=cmap_y,
        class_name=names[cls_idx],
        name=path.stem,
    )
    if groups is not None:
        ds = ds.with_groups(load_groups(groups, ds.feature_names))
    elif inline_groups:
        ds = ds.with_groups(
            [Group(gname, tuple(ds.index_of(_maybe_index(f)) for f in feats)) for gname, feats in inline_groups]
        )
    return ds


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _maybe_index(token):
    return int(token) if isinstance(token, str) and token.isdigit() else token


def load_groups(path, feature_names: Sequence[str]) -> tuple[Group, ...]:
    """Read a group sidecar ``{"groups": [{"name": ..., "features": [...]}]}``.

    Features are given as names or 0-based indices; the result must be a
    partition of all features.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid group JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("groups"), list):
        raise ValidationError('group file must be an object with a "groups" list')
    names = list(feature_names)
    out = []
    for entry in doc["groups"]:
        try:
            gname, feats = entry["name"], entry["features"]
        except (TypeError, KeyError):
            raise ValidationError('each group needs "name" and "features"') from None
        idx = []
        for f in feats:
            if isinstance(f, int):
                idx.append(f)
            elif f in names:
                idx.append(names.index(f))
            else:
                raise ValidationError(f"group {gname!r} references unknown feature {f!r}")
        out.append(Group(str(gname), tuple(idx)))
    _check_partition(out, len(names))
    return tuple(out)


def infer_format(path) -> str:
    """File format implied by the suffix; anything unrecognised is CSV."""
    suffix = Path(path).suffix.lower()
    return {".arff": "arff", ".libsvm": "libsvm", ".svm": "libsvm", ".txt": "libsvm"}.get(suffix, "csv")


def load_dataset(path, fmt=None, **options) -> Dataset:
    """Dispatch on ``fmt`` (``csv``, ``libsvm``, ``arff``) or the file suffix."""
    path = Path(path)
    if fmt is None:
        fmt = infer_format(path)
    if fmt == "csv":
        return load_csv(path, **options)
    groups = options.pop("groups", None)
    if options:
        raise ConfigurationError(f"options {sorted(options)} only apply to CSV input")
    if fmt == "libsvm":
        return load_libsvm(path, groups=groups)
    if fmt == "arff":
        return load_arff(path, groups=groups)
    raise ConfigurationError(f"unknown data format {fmt!r}")


# ---------------------------------------------------------------------------
# Streams


@dataclass(frozen=True)
class Arrival:
    """One stream step.  Individual arrivals have ``feature`` set; group
    arrivals carry the group ``name`` and its member ``features``."""

    step: int
    features: tuple[int, ...]
    feature: int | None = None
    group: str | None = None


class _EndOfStream:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __bool__(self):
        return False

    def __repr__(self):
        return "END_OF_STREAM"


END_OF_STREAM = _EndOfStream()


@dataclass(eq=False)
class FeatureStream:
    """Arrival order over a dataset's features (or groups) with a cursor.

    The stream is also the data accessor given to selectors: :meth:`column`
    raises :class:`StreamingViolation` for any feature not yet revealed.
    """

    dataset: Dataset
    mode: str
    order: tuple
    seed: int | None = None
    cursor: int = 0
    _revealed: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self.order = tuple(int(o) for o in self.order)
        expected = len(self.dataset.groups or ()) if self.mode == "group" else self.dataset.n_features
        if sorted(self.order) != list(range(expected)):
            raise ConfigurationError(f"stream order must be a permutation of range({expected})")

    def __len__(self):
        return len(self.order)

    def reveal_next(self):
        """Reveal the next arrival, or return ``END_OF_STREAM`` when exhausted."""
        if self.cursor >= len(self.order):
            return END_OF_STREAM
        item = self.order[self.cursor]
        self.cursor += 1
        if self.mode == "group":
            g = self.dataset.groups[item]
            self._revealed.update(g.features)
            return Arrival(step=self.cursor, features=g.features, group=g.name)
        self._revealed.add(item)
        return Arrival(step=self.cursor, features=(item,), feature=item)

    def __iter__(self) -> Iterator[Arrival]:
        while True:
            arrival = self.reveal_next()
            if arrival is END_OF_STREAM:
                return
            yield arrival

    @property
    def revealed(self) -> frozenset:
        return frozenset(self._revealed)

    def column(self, j: int) -> np.ndarray:
        if j not in self._revealed:
            raise StreamingViolation(j)
        return self.dataset.X[:, j]

    # Read-only pass-throughs so a stream can stand in for its dataset.
    @property
    def y(self):
        return self.dataset.y

    @property
    def feature_kinds(self):
        return self.dataset.feature_kinds

    @property
    def cardinalities(self):
        return self.dataset.cardinalities

    @property
    def n_instances(self):
        return self.dataset.n_instances

    @property
    def n_classes(self):
        return self.dataset.n_classes


def make_stream(dataset: Dataset, mode="individual", order="natural", seed=None) -> FeatureStream:
    """Create a stream over features (``mode="individual"``) or groups.

    ``order`` is ``"natural"`` (column or group declaration order),
    ``"shuffled"`` (seeded permutation) or an explicit permutation.
    """
    if mode not in ("individual", "group"):
        raise ConfigurationError(f"mode must be 'individual' or 'group', got {mode!r}")
    if mode == "group" and dataset.groups is None:
        raise ConfigurationError("group mode requires a dataset with groups")
    size = len(dataset.groups) if mode == "group" else dataset.n_features
    if isinstance(order, str):
        if order == "natural":
            perm = tuple(range(size))
        elif order == "shuffled":
            perm = tuple(int(i) for i in np.random.default_rng(seed).permutation(size))
        else:
            raise ConfigurationError(f"order must be 'natural', 'shuffled' or a permutation, got {order!r}")
    else:
        perm = tuple(order)
    return FeatureStream(dataset=dataset, mode=mode, order=perm, seed=seed)
