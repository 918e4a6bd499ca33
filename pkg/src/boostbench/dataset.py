"""Weighted instance tables, ARFF/CSV ingestion and stratified partitioning.

A :class:`Dataset` stores its cells in a float matrix: numeric cells hold the
value, nominal cells hold the index of the value in the attribute's declared
list, and ``MISSING`` (NaN) marks an unknown cell.  Datasets are immutable;
every transformation returns a new object sharing no writable state.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from ._rng import make_rng

MISSING = float("nan")

NOMINAL = "nominal"
NUMERIC = "numeric"


class DatasetError(ValueError):
    """Invalid dataset content.  ``lineno`` is set for parse errors."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str
    values: tuple[str, ...] = ()
    position: int = 0

    def __post_init__(self):
        if self.kind not in (NOMINAL, NUMERIC):
            raise DatasetError(f"unknown attribute kind {self.kind!r}")
        if self.kind == NOMINAL:
            if not self.values:
                raise DatasetError(f"nominal attribute {self.name!r} has no values")
            if len(set(self.values)) != len(self.values):
                raise DatasetError(f"nominal attribute {self.name!r} has duplicate values")
        elif self.values:
            raise DatasetError(f"numeric attribute {self.name!r} cannot declare values")

    @property
    def is_nominal(self) -> bool:
        return self.kind == NOMINAL

    @property
    def n_values(self) -> int:
        return len(self.values)

    def index_of(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise DatasetError(
                f"value {value!r} not declared for attribute {self.name!r}"
            ) from None


@dataclass(frozen=True)
class Instance:
    values: tuple[float, ...]
    weight: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise DatasetError(f"instance weight must be finite and > 0, got {self.weight}")


class Dataset:
    """An immutable table of weighted instances over a fixed schema.

    Parameters
    ----------
    attributes : sequence of Attribute
        Schema in column order.  Positions are renumbered to match.
    X : array-like, shape (n, n_attributes)
        Cell matrix (see module docstring for the encoding).
    weights : array-like, shape (n,), optional
        Strictly positive instance weights, default 1.0.
    class_index : int
        Column of the class attribute; negative values count from the end.
    allow_missing_class : bool
        Permit unknown class cells (for unlabeled prediction inputs only).
    """

    def __init__(
        self,
        attributes: Sequence[Attribute],
        X,
        weights=None,
        class_index: int = -1,
        relation: str = "data",
        allow_missing_class: bool = False,
    ):
        attrs = tuple(
            a if a.position == i else Attribute(a.name, a.kind, a.values, i)
            for i, a in enumerate(attributes)
        )
        if not attrs:
            raise DatasetError("dataset needs at least one attribute")
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise DatasetError(f"duplicate attribute name {dup!r}")
        if class_index < 0:
            class_index += len(attrs)
        if not 0 <= class_index < len(attrs):
            raise DatasetError(f"class index {class_index} out of range")
        if not attrs[class_index].is_nominal:
            raise DatasetError(f"class attribute {attrs[class_index].name!r} must be nominal")

        X = np.array(X, dtype=np.float64, copy=True)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, len(attrs))
        if X.ndim != 2 or X.shape[1] != len(attrs):
            raise DatasetError(f"cell matrix must have shape (n, {len(attrs)}), got {X.shape}")
        n = X.shape[0]
        if weights is None:
            w = np.ones(n)
        else:
            w = np.array(weights, dtype=np.float64, copy=True).reshape(-1)
            if w.shape[0] != n:
                raise DatasetError("weights length does not match number of instances")
            if n and not (np.all(np.isfinite(w)) and np.all(w > 0)):
                raise DatasetError("instance weights must be finite and > 0")
        for a in attrs:
            col = X[:, a.position]
            known = col[~np.isnan(col)]
            if a.is_nominal:
                if np.any((known < 0) | (known >= a.n_values) | (known != np.floor(known))):
                    raise DatasetError(f"nominal cell out of range for attribute {a.name!r}")
            elif np.any(np.isinf(known)):
                raise DatasetError(f"infinite numeric cell in attribute {a.name!r}")
        if not allow_missing_class and np.any(np.isnan(X[:, class_index])):
            raise DatasetError("class value is missing for some instances")

        X.setflags(write=False)
        w.setflags(write=False)
        self.attributes = attrs
        self.class_index = class_index
        self.relation = relation
        self.X = X
        self.weights = w
        ycol = X[:, class_index]
        y = np.where(np.isnan(ycol), -1, ycol).astype(np.intp)
        y.setflags(write=False)
        self.y = y

    # -- schema helpers --------------------------------------------------
    @property
    def class_attribute(self) -> Attribute:
        return self.attributes[self.class_index]

    @property
    def n_classes(self) -> int:
        return self.class_attribute.n_values

    @property
    def class_names(self) -> tuple[str, ...]:
        return self.class_attribute.values

    @property
    def feature_indices(self) -> list[int]:
        return [i for i in range(len(self.attributes)) if i != self.class_index]

    @property
    def n_features(self) -> int:
        return len(self.attributes) - 1

    def same_schema(self, other: "Dataset") -> bool:
        return self.attributes == other.attributes and self.class_index == other.class_index

    # -- instance access -------------------------------------------------
    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> Instance:
        return Instance(tuple(self.X[i].tolist()), float(self.weights[i]))

    def __iter__(self) -> Iterator[Instance]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.same_schema(other)
            and self.X.shape == other.X.shape
            and np.array_equal(self.X, other.X, equal_nan=True)
            and np.array_equal(self.weights, other.weights)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"Dataset({self.relation!r}, n={len(self)}, attributes={len(self.attributes)}, "
            f"class={self.class_attribute.name!r})"
        )

    # -- derived datasets ------------------------------------------------
    def _derive(self, X, weights, allow_missing_class=None) -> "Dataset":
        if allow_missing_class is None:
            allow_missing_class = bool(np.any(self.y < 0))
        return Dataset(
            self.attributes, X, weights, self.class_index, self.relation, allow_missing_class
        )

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return self._derive(self.X[idx], self.weights[idx])

    def with_weights(self, weights) -> "Dataset":
        return self._derive(self.X, weights)

    def class_weights(self) -> np.ndarray:
        known = self.y >= 0
        return np.bincount(self.y[known], weights=self.weights[known], minlength=self.n_classes)

    def select_attributes(self, order: Sequence[int]) -> "Dataset":
        """Reorder (or drop) columns; the class column must be kept."""
        order = list(order)
        if self.class_index not in order:
            raise DatasetError("attribute selection must keep the class column")
        attrs = [self.attributes[i] for i in order]
        return Dataset(
            attrs, self.X[:, order], self.weights, order.index(self.class_index),
            self.relation, bool(np.any(self.y < 0)),
        )

    @classmethod
    def from_instances(
        cls, attributes: Sequence[Attribute], instances: Iterable[Instance], class_index: int = -1,
        relation: str = "data",
    ) -> "Dataset":
        insts = list(instances)
        X = np.array([inst.values for inst in insts], dtype=np.float64).reshape(len(insts), len(attributes))
        w = np.array([inst.weight for inst in insts], dtype=np.float64)
        return cls(attributes, X, w, class_index, relation)


def total_weight(ds: Dataset) -> float:
    """Sum of instance weights; 0.0 for an empty dataset."""
    return float(ds.weights.sum()) if len(ds) else 0.0


def concat(datasets: Sequence[Dataset]) -> Dataset:
    first = datasets[0]
    for d in datasets[1:]:
        if not first.same_schema(d):
            raise DatasetError("cannot concatenate datasets with different schemas")
    X = np.vstack([d.X for d in datasets])
    w = np.concatenate([d.weights for d in datasets])
    return first._derive(X, w, any(bool(np.any(d.y < 0)) for d in datasets))


def as_matrix(data, n_attributes: int) -> np.ndarray:
    """Cell matrix of a Dataset, an Instance, or raw rows, checked for arity."""
    if isinstance(data, Dataset):
        X = data.X
    elif isinstance(data, Instance):
        X = np.asarray([data.values], dtype=np.float64)
    else:
        X = np.asarray(data, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_attributes:
        raise ValueError(f"expected {n_attributes} cells per instance, got shape {X.shape}")
    return X


# ---------------------------------------------------------------------------
# ARFF
# ---------------------------------------------------------------------------

_NUMERIC_TYPES = {"numeric", "real", "integer"}
_UNSUPPORTED_TYPES = {"string", "date", "relational"}


def _split_quoted(text: str, lineno: int, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside single/double quotes; quotes are removed."""
    return [tok for tok, _ in _split_quoted_flags(text, lineno, sep)]


def _split_quoted_flags(text: str, lineno: int, sep: str = ",") -> list[tuple[str, bool]]:
    """Like :func:`_split_quoted`, also telling whether each token was quoted."""
    tokens: list[tuple[str, bool]] = []
    buf: list[str] = []
    quote = None
    quoted = False
    i = 0
    while i < len(text):
        ch = text[i]
        if quote:
            if ch == "\\" and i + 1 < len(text):
                buf.append(text[i + 1])
                i += 2
                continue
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            if "".join(buf).strip():
                raise DatasetError("quote in the middle of a value", lineno)
            buf = []
            quote = ch
            quoted = True
        elif ch == sep:
            tokens.append((_finish_token(buf, quoted), quoted))
            buf, quoted = [], False
        else:
            if quoted and not ch.isspace():
                raise DatasetError("text after closing quote", lineno)
            buf.append(ch)
        i += 1
    if quote:
        raise DatasetError("unterminated quoted value", lineno)
    tokens.append((_finish_token(buf, quoted), quoted))
    return tokens


def _finish_token(buf: list[str], quoted: bool) -> str:
    s = "".join(buf)
    return s if quoted else s.strip()


def _parse_attribute_line(rest: str, lineno: int) -> tuple[str, str, tuple[str, ...]]:
    rest = rest.strip()
    if not rest:
        raise DatasetError("@attribute needs a name and a type", lineno)
    if rest[0] in "'\"":
        q, i, buf = rest[0], 1, []
        while i < len(rest) and rest[i] != q:
            if rest[i] == "\\" and i + 1 < len(rest):
                i += 1
            buf.append(rest[i])
            i += 1
        if i >= len(rest):
            raise DatasetError("unterminated quoted attribute name", lineno)
        name, tail = "".join(buf), rest[i + 1:]
    else:
        parts = rest.split(None, 1)
        name = parts[0]
        tail = parts[1] if len(parts) > 1 else ""
        if "{" in name:
            name, brace = name.split("{", 1)
            tail = "{" + brace + " " + tail
    tail = tail.strip()
    if not tail:
        raise DatasetError(f"attribute {name!r} has no type", lineno)
    if tail.startswith("{"):
        if not tail.endswith("}"):
            raise DatasetError(f"nominal specification of {name!r} is not closed", lineno)
        body = tail[1:-1]
        values = [v for v in _split_quoted(body, lineno)]
        if not body.strip() or any(v == "" for v in values):
            raise DatasetError(f"empty nominal value in attribute {name!r}", lineno)
        if len(set(values)) != len(values):
            raise DatasetError(f"duplicate nominal value in attribute {name!r}", lineno)
        return name, NOMINAL, tuple(values)
    kind = tail.split()[0].lower()
    if kind in _NUMERIC_TYPES:
        return name, NUMERIC, ()
    if kind in _UNSUPPORTED_TYPES:
        raise DatasetError(f"unsupported attribute type {kind!r} for {name!r}", lineno)
    raise DatasetError(f"unknown attribute type {tail!r} for {name!r}", lineno)


def _parse_cell(token: str, attr: Attribute, lineno: int, quoted: bool = False) -> float:
    if token == "?" and not quoted:
        return MISSING
    if attr.is_nominal:
        try:
            return float(attr.values.index(token))
        except ValueError:
            raise DatasetError(
                f"undeclared value {token!r} for nominal attribute {attr.name!r}", lineno
            ) from None
    try:
        value = float(token)
    except ValueError:
        raise DatasetError(f"bad numeric value {token!r} for attribute {attr.name!r}", lineno) from None
    if not math.isfinite(value):
        raise DatasetError(f"non-finite numeric value {token!r} for attribute {attr.name!r}", lineno)
    return value


def parse_arff(
    text: str | io.TextIOBase, class_index: int = -1, allow_missing_class: bool = False
) -> Dataset:
    """Parse the ARFF subset: nominal/numeric attributes, dense rows, ``?`` missing.

    Raises
    ------
    DatasetError
        With the offending line number for malformed headers, undeclared
        nominal values, ragged rows, duplicate attribute names, unsupported
        attribute types, sparse rows and unknown class values.
    """
    if not isinstance(text, str):
        text = text.read()
    relation = None
    attributes: list[Attribute] = []
    rows: list[list[float]] = []
    in_data = False
    class_pos = None
    seen_names: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            if not line.startswith("@"):
                raise DatasetError(f"expected a header declaration, got {line[:40]!r}", lineno)
            parts = line.split(None, 1)
            keyword = parts[0].lower()
            rest = parts[1] if len(parts) > 1 else ""
            if keyword == "@relation":
                if relation is not None:
                    raise DatasetError("duplicate @relation", lineno)
                if attributes:
                    raise DatasetError("@relation must precede @attribute", lineno)
                relation = rest.strip().strip("'\"") or "data"
            elif keyword == "@attribute":
                name, kind, values = _parse_attribute_line(rest, lineno)
                if name in seen_names:
                    raise DatasetError(
                        f"duplicate attribute name {name!r} (first declared on line "
                        f"{seen_names[name]})", lineno,
                    )
                seen_names[name] = lineno
                attributes.append(Attribute(name, kind, values, len(attributes)))
            elif keyword == "@data":
                if not attributes:
                    raise DatasetError("@data before any @attribute", lineno)
                if rest.strip():
                    raise DatasetError("unexpected text after @data", lineno)
                in_data = True
                class_pos = class_index + len(attributes) if class_index < 0 else class_index
                if not 0 <= class_pos < len(attributes):
                    raise DatasetError(f"class index {class_index} out of range", lineno)
                if not attributes[class_pos].is_nominal:
                    raise DatasetError(
                        f"class attribute {attributes[class_pos].name!r} must be nominal", lineno
                    )
            else:
                raise DatasetError(f"unknown header keyword {keyword!r}", lineno)
            continue

        if line.startswith("{"):
            raise DatasetError("sparse ARFF rows are not supported", lineno)
        if line.startswith("@"):
            raise DatasetError("header declaration inside @data section", lineno)
        tokens = _split_quoted_flags(line, lineno)
        if len(tokens) != len(attributes):
            raise DatasetError(
                f"row has {len(tokens)} values, expected {len(attributes)}", lineno
            )
        row = [_parse_cell(tok, attr, lineno, q) for (tok, q), attr in zip(tokens, attributes)]
        if math.isnan(row[class_pos]) and not allow_missing_class:
            raise DatasetError("missing class value", lineno)
        rows.append(row)

    if not in_data:
        raise DatasetError("no @data section found", max(1, len(text.splitlines())))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(attributes))
    return Dataset(attributes, X, None, class_pos, relation or "data", allow_missing_class)


def _quote(token: str) -> str:
    if token == "" or any(c in token for c in " ,'\"%{}?\t\\"):
        return "'" + token.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return token


def to_arff(ds: Dataset) -> str:
    """Serialize to ARFF text that :func:`parse_arff` reads back identically.

    Numbers use ``repr`` so every double survives the round trip.  Instance
    weights are not part of the format and are dropped.
    """
    out = [f"@relation {_quote(ds.relation)}", ""]
    for a in ds.attributes:
        spec = "{" + ",".join(_quote(v) for v in a.values) + "}" if a.is_nominal else "numeric"
        out.append(f"@attribute {_quote(a.name)} {spec}")
    out += ["", "@data"]
    for row in ds.X:
        cells = []
        for a, v in zip(ds.attributes, row):
            if math.isnan(v):
                cells.append("?")
            elif a.is_nominal:
                cells.append(_quote(a.values[int(v)]))
            else:
                cells.append(repr(float(v)))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

LAST = -1


def _is_real(s: str) -> bool:
    try:
        return math.isfinite(float(s))
    except ValueError:
        return False


def parse_csv(
    text: str | io.TextIOBase, header: bool = True, class_column: int = LAST,
    relation: str = "data",
) -> Dataset:
    """Parse RFC-4180 CSV, inferring attribute kinds column by column.

    A column is numeric when every non-missing cell parses as a real; the
    class column is always nominal.  Nominal values are listed in order of
    first appearance.  Blank rows are skipped.
    """
    if not isinstance(text, str):
        text = text.read()
    reader = csv.reader(io.StringIO(text))
    rows: list[tuple[int, list[str]]] = []
    names = None
    for row in reader:
        if not row or all(c.strip() == "" for c in row):
            continue
        cells = [c.strip() for c in row]
        if header and names is None:
            names = cells
            continue
        rows.append((reader.line_num, cells))
    if not rows:
        raise DatasetError("CSV has no data rows")
    width = len(names) if names is not None else len(rows[0][1])
    for lineno, cells in rows:
        if len(cells) != width:
            raise DatasetError(f"row has {len(cells)} fields, expected {width}", lineno)
    if names is None:
        names = [f"a{i}" for i in range(width)]
    cpos = class_column + width if class_column < 0 else class_column
    if not 0 <= cpos < width:
        raise DatasetError(f"class column {class_column} out of range")

    def missing(c: str) -> bool:
        return c == "" or c == "?"

    attributes = []
    columns = []
    for j in range(width):
        col = [cells[j] for _, cells in rows]
        known = [c for c in col if not missing(c)]
        if j == cpos and not known:
            raise DatasetError(f"class column {names[j]!r} has no values")
        if j != cpos and known and all(_is_real(c) for c in known):
            attributes.append(Attribute(names[j], NUMERIC, (), j))
            columns.append([MISSING if missing(c) else float(c) for c in col])
        else:
            values = list(dict.fromkeys(known)) or ["?"]
            attributes.append(Attribute(names[j], NOMINAL, tuple(values), j))
            lookup = {v: float(i) for i, v in enumerate(values)}
            columns.append([MISSING if missing(c) else lookup[c] for c in col])
    for (lineno, cells) in rows:
        if missing(cells[cpos]):
            raise DatasetError("missing class value", lineno)
    X = np.array(columns, dtype=np.float64).T
    return Dataset(attributes, X, None, cpos, relation)


def load(path, class_index: int = -1, allow_missing_class: bool = False) -> Dataset:
    """Load an ``.arff`` or ``.csv`` file (CSV is read with a header row)."""
    from pathlib import Path

    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix.lower() == ".csv":
        ds = parse_csv(text, header=True, class_column=class_index, relation=p.stem)
    else:
        ds = parse_arff(text, class_index=class_index, allow_missing_class=allow_missing_class)
    return ds


# ---------------------------------------------------------------------------
# Partitioning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FoldPartition:
    k: int
    fold_assignment: np.ndarray = field(repr=False)

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_assignment != fold)

    def splits(self) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        for f in range(self.k):
            yield self.train_indices(f), self.test_indices(f)


def _shuffled_by_class(ds: Dataset, rng: np.random.Generator) -> list[np.ndarray]:
    return [rng.permutation(np.flatnonzero(ds.y == c)) for c in range(ds.n_classes)]


def stratified_split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Seeded per-class holdout split.

    Each class contributes ``floor(fraction * count + 0.5)`` instances to
    the training part, chosen by a seeded shuffle.  Both parts keep the
    input order.
    """
    if len(ds) == 0:
        raise DatasetError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    rng = make_rng(seed, "split")
    train_parts = []
    for members in _shuffled_by_class(ds, rng):
        n_train = int(math.floor(train_fraction * len(members) + 0.5))
        train_parts.append(members[:n_train])
    train_idx = np.sort(np.concatenate(train_parts)) if train_parts else np.array([], dtype=np.intp)
    mask = np.zeros(len(ds), dtype=bool)
    mask[train_idx] = True
    return ds.subset(np.flatnonzero(mask)), ds.subset(np.flatnonzero(~mask))


def stratified_folds(ds: Dataset, k: int, seed: int) -> FoldPartition:
    """Seeded stratified k-fold assignment.

    Instances are grouped by class (each group shuffled) and dealt to folds
    round-robin, the deal continuing across class boundaries.  Per-class fold
    counts therefore differ by at most one, a single class fills the lowest
    folds first, and no fold is empty while ``k <= len(ds)``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > len(ds):
        raise DatasetError(f"k={k} exceeds the number of instances ({len(ds)}); a fold would be empty")
    rng = make_rng(seed, "folds")
    order = np.concatenate(_shuffled_by_class(ds, rng))
    assignment = np.empty(len(ds), dtype=np.intp)
    assignment[order] = np.arange(len(order)) % k
    assignment.setflags(write=False)
    return FoldPartition(k, assignment)
