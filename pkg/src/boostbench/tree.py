"""C4.5-style decision trees and decision stumps on weighted instances.

Growth follows C4.5: multiway splits on nominal attributes, binary
threshold splits on numeric attributes, gain-ratio selection restricted to
tests whose information gain reaches the mean gain, and fractional
descent of instances whose split value is unknown.  Pruning is subtree
replacement, either by the pessimistic (upper confidence bound) error
estimate or by error on a held-out pruning fold.

Numeric tests send ``value <= threshold`` to branch 0 and larger values to
branch 1.  All weight comparisons use an absolute tolerance of ``TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from statistics import NormalDist
from typing import Sequence, Union

import numpy as np
from scipy.special import xlogy

from .dataset import Attribute, Dataset, DatasetError, as_matrix, stratified_folds

TOL = 1e-9
SPLIT_INFO_MIN = 1e-9
_LN2 = math.log(2.0)

PRUNE_CONFIDENCE = "confidence"
PRUNE_REDUCED_ERROR = "reduced-error"
PRUNE_NONE = "none"


@dataclass(frozen=True)
class TreeParams:
    """Settings for :func:`train_tree`.

    ``confidence`` and ``min_instances`` are C4.5's C and M; ``folds`` is N,
    the number of folds used by reduced-error pruning (one fold prunes).
    """

    confidence: float = 0.25
    min_instances: int = 2
    pruning: str = PRUNE_CONFIDENCE
    folds: int = 3
    numeric_penalty: bool = True
    mean_gain_filter: bool = True
    slack: float = 0.1
    seed: int = 1

    def __post_init__(self):
        if not 0.0 < self.confidence <= 0.5:
            raise ValueError("confidence C must be in (0, 0.5]")
        if self.min_instances < 1:
            raise ValueError("min_instances M must be >= 1")
        if self.pruning not in (PRUNE_CONFIDENCE, PRUNE_REDUCED_ERROR, PRUNE_NONE):
            raise ValueError(f"unknown pruning mode {self.pruning!r}")
        if self.pruning == PRUNE_REDUCED_ERROR and self.folds < 2:
            raise ValueError("reduced-error pruning needs folds N >= 2")
        if self.slack < 0:
            raise ValueError("slack must be >= 0")


# ---------------------------------------------------------------------------
# Tree structure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitTest:
    attribute: int
    n_branches: int
    threshold: float | None = None

    @property
    def is_numeric(self) -> bool:
        return self.threshold is not None

    def branches(self, column: np.ndarray) -> np.ndarray:
        """Branch index per value; -1 for missing."""
        out = np.full(column.shape, -1, dtype=np.intp)
        known = ~np.isnan(column)
        if self.is_numeric:
            out[known] = (column[known] > self.threshold).astype(np.intp)
        else:
            out[known] = column[known].astype(np.intp)
        return out


def _normalize(weights: np.ndarray, fallback: np.ndarray | None = None) -> np.ndarray:
    s = weights.sum()
    if s > 0:
        return weights / s
    if fallback is not None:
        return fallback.copy()
    return np.full(weights.shape, 1.0 / len(weights))


@dataclass(eq=False)
class Leaf:
    class_weights: np.ndarray
    distribution: np.ndarray

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.distribution))

    @property
    def weight(self) -> float:
        return float(self.class_weights.sum())


@dataclass(eq=False)
class Internal:
    test: SplitTest
    children: list
    branch_fractions: np.ndarray
    class_weights: np.ndarray
    distribution: np.ndarray
    missing_child: Leaf | None = None

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.distribution))

    @property
    def weight(self) -> float:
        return float(self.class_weights.sum())


TreeNode = Union[Leaf, Internal]


def make_leaf(class_weights: np.ndarray, fallback: np.ndarray | None = None) -> Leaf:
    cw = np.asarray(class_weights, dtype=np.float64)
    return Leaf(cw, _normalize(cw, fallback))


def count_nodes(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    extra = 1 if node.missing_child is not None else 0
    return 1 + extra + sum(count_nodes(c) for c in node.children)


def count_leaves(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 1
    extra = 1 if node.missing_child is not None else 0
    return extra + sum(count_leaves(c) for c in node.children)


def tree_depth(node: TreeNode) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(tree_depth(c) for c in node.children)


# ---------------------------------------------------------------------------
# Split statistics
# ---------------------------------------------------------------------------


def _xlog2x(a):
    return xlogy(a, a) / _LN2


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy in bits along the last axis; 0 where the row total is 0."""
    total = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (_xlog2x(total) - _xlog2x(counts).sum(axis=-1)) / total
    return np.where(total > 0, np.maximum(h, 0.0), 0.0)


def entropy(class_weights: Sequence[float]) -> float:
    """Shannon entropy (bits) of a class weight vector."""
    w = np.asarray(class_weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("class weights must be nonnegative")
    if w.sum() <= 0:
        raise ValueError("entropy of an all-zero weight vector is undefined")
    p = w / w.sum()
    return float(max(0.0, -_xlog2x(p).sum()))


@dataclass(frozen=True)
class SplitStats:
    gain: float
    split_info: float
    known_weight: float
    total_weight: float

    @property
    def eligible(self) -> bool:
        return self.split_info > SPLIT_INFO_MIN

    @property
    def ratio(self) -> float | None:
        return self.gain / self.split_info if self.eligible else None


def _branch_class_weights(
    column: np.ndarray, y: np.ndarray, w: np.ndarray, test: SplitTest, n_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    """(per-branch class weights over known values, class weights of missing)."""
    br = test.branches(column)
    known = br >= 0
    flat = br[known] * n_classes + y[known]
    table = np.bincount(flat, weights=w[known], minlength=test.n_branches * n_classes)
    table = table.reshape(test.n_branches, n_classes)
    missing = np.bincount(y[~known], weights=w[~known], minlength=n_classes)
    return table, missing


def _stats_from_table(table: np.ndarray, missing_weight: float) -> SplitStats:
    branch_w = table.sum(axis=1)
    known = float(branch_w.sum())
    total = known + missing_weight
    if known <= 0:
        return SplitStats(0.0, 0.0, 0.0, total)
    parent_h = float(_entropy_rows(table.sum(axis=0)))
    after = float(np.dot(branch_w, _entropy_rows(table)) / known)
    gain = (known / total) * (parent_h - after)
    props = np.append(branch_w, missing_weight) / total
    split_info = float(-_xlog2x(props).sum())
    return SplitStats(gain, split_info, known, total)


def _check_test(ds: Dataset, test: SplitTest):
    if test.attribute == ds.class_index:
        raise ValueError("cannot split on the class attribute")
    attr = ds.attributes[test.attribute]
    if attr.is_nominal == test.is_numeric:
        raise ValueError(f"test kind does not match attribute {attr.name!r}")
    if attr.is_nominal and test.n_branches != attr.n_values:
        raise ValueError("nominal test needs one branch per declared value")


def split_stats(ds: Dataset, test: SplitTest) -> SplitStats:
    if len(ds) == 0:
        raise DatasetError("empty dataset")
    _check_test(ds, test)
    table, missing = _branch_class_weights(ds.X[:, test.attribute], ds.y, ds.weights, test, ds.n_classes)
    return _stats_from_table(table, float(missing.sum()))


def info_gain(ds: Dataset, test: SplitTest) -> float:
    """Information gain (bits) over known values, scaled by the known-weight fraction."""
    return split_stats(ds, test).gain


def split_info(ds: Dataset, test: SplitTest) -> float:
    """Entropy of the branch proportions; unknown values count as one more branch."""
    return split_stats(ds, test).split_info


def gain_ratio(ds: Dataset, test: SplitTest) -> float | None:
    """``info_gain / split_info``, or ``None`` when split info is degenerate."""
    return split_stats(ds, test).ratio


def nominal_test(ds: Dataset, attribute: int) -> SplitTest:
    return SplitTest(attribute, ds.attributes[attribute].n_values)


def numeric_test(attribute: int, threshold: float) -> SplitTest:
    return SplitTest(attribute, 2, float(threshold))


# -- vectorized numeric search ------------------------------------------------


def _numeric_candidates(
    Xn: np.ndarray, y: np.ndarray, w: np.ndarray, n_classes: int, min_weight: float,
    penalty: bool,
):
    """Best threshold of every numeric column at once.

    Returns arrays (threshold, gain, split_info, found) of length
    ``Xn.shape[1]``.  ``gain`` is penalized when ``penalty`` is set.
    """
    n, n_cols = Xn.shape
    order = np.argsort(Xn, axis=0, kind="stable")
    S = np.take_along_axis(Xn, order, axis=0)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = w
    cum = np.cumsum(onehot[order], axis=0)  # (n, cols, K)
    known_mask = ~np.isnan(S)
    n_known = known_mask.sum(axis=0)
    total_w = float(w.sum())

    thresholds = np.full(n_cols, np.nan)
    gains = np.full(n_cols, -np.inf)
    sinfo = np.zeros(n_cols)
    found = np.zeros(n_cols, dtype=bool)
    if n < 2:
        return thresholds, gains, sinfo, found

    last = np.maximum(n_known - 1, 0)
    known_tot = cum[last, np.arange(n_cols)]  # (cols, K)
    known_w = known_tot.sum(axis=1)
    miss_w = np.where(np.isnan(Xn), w[:, None], 0.0).sum(axis=0)  # not total - known: cancellation

    left = cum[:-1]  # split after sorted position i
    right = known_tot[None, :, :] - left
    wl = left.sum(axis=2)
    wr = right.sum(axis=2)
    pos = np.arange(n - 1)[:, None]
    with np.errstate(invalid="ignore"):
        distinct = (pos < (n_known - 1)[None, :]) & (S[1:] > S[:-1])
    valid = distinct & (wl >= min_weight - TOL) & (wr >= min_weight - TOL)

    parent_h = _entropy_rows(known_tot)  # (cols,)
    with np.errstate(divide="ignore", invalid="ignore"):
        after = (wl * _entropy_rows(left) + wr * _entropy_rows(right)) / known_w[None, :]
        g = (known_w / total_w)[None, :] * (parent_h[None, :] - after)
    g = np.where(valid, g, -np.inf)

    n_distinct = 1 + distinct.sum(axis=0)
    for j in np.flatnonzero(valid.any(axis=0)):
        col = g[:, j]
        best = col.max()
        i = int(np.flatnonzero(col >= best - TOL)[0])
        gain = float(col[i])
        if penalty:
            gain -= math.log2(n_distinct[j]) / known_w[j]
            if gain <= TOL:
                continue
        lo, hi = S[i, j], S[i + 1, j]
        t = (lo + hi) / 2.0
        if not lo <= t < hi:
            t = lo
        props = np.array([wl[i, j], wr[i, j], miss_w[j]]) / total_w
        thresholds[j] = t
        gains[j] = gain
        sinfo[j] = float(-_xlog2x(props).sum())
        found[j] = True
    return thresholds, gains, sinfo, found


def best_numeric_threshold(
    ds: Dataset, attribute: int, min_instances: float = 1.0, numeric_penalty: bool = False
) -> tuple[float, float] | None:
    """Midpoint threshold with maximal information gain, or ``None``.

    Candidates lie halfway between adjacent distinct known values and must
    leave at least ``min_instances`` known weight on each side.  With
    ``numeric_penalty`` the returned gain is reduced by ``log2(d) / W``
    (d distinct known values, W known weight) and non-positive results are
    rejected.
    """
    if ds.attributes[attribute].is_nominal:
        raise ValueError("attribute is not numeric")
    t, g, _, found = _numeric_candidates(
        ds.X[:, [attribute]], ds.y, ds.weights, ds.n_classes, min_instances, numeric_penalty
    )
    if not found[0]:
        return None
    return float(t[0]), float(g[0])


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------


@dataclass
class _Candidate:
    test: SplitTest
    gain: float
    split_info: float

    @property
    def ratio(self) -> float:
        return self.gain / self.split_info


def _node_candidates(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, attributes: Sequence[Attribute],
    features: Sequence[int], numeric_cols: np.ndarray, n_classes: int, params: TreeParams,
) -> list[_Candidate]:
    M = params.min_instances
    cands: list[_Candidate] = []
    numeric_found = {}
    if len(numeric_cols):
        t, g, si, found = _numeric_candidates(
            X[:, numeric_cols], y, w, n_classes, M, params.numeric_penalty
        )
        for k, col in enumerate(numeric_cols):
            if found[k] and si[k] > SPLIT_INFO_MIN:
                numeric_found[int(col)] = _Candidate(numeric_test(int(col), t[k]), float(g[k]), float(si[k]))
    for a in features:
        attr = attributes[a]
        if not attr.is_nominal:
            if a in numeric_found:
                cands.append(numeric_found[a])
            continue
        test = SplitTest(a, attr.n_values)
        table, missing = _branch_class_weights(X[:, a], y, w, test, n_classes)
        if np.count_nonzero(table.sum(axis=1) >= M - TOL) < 2:
            continue
        st = _stats_from_table(table, float(missing.sum()))
        if st.split_info > SPLIT_INFO_MIN:
            cands.append(_Candidate(test, st.gain, st.split_info))
    return cands


def select_test(cands: list[_Candidate], mean_gain_filter: bool) -> _Candidate | None:
    """C4.5 choice: best gain ratio among tests whose gain reaches the mean.

    Ties (within ``TOL``) go to the earliest candidate, i.e. lowest attribute.
    """
    if not cands:
        return None
    pool = cands
    if mean_gain_filter:
        mean_gain = sum(c.gain for c in cands) / len(cands)
        pool = [c for c in cands if c.gain >= mean_gain - TOL]
    best = max(c.ratio for c in pool)
    return next(c for c in pool if c.ratio >= best - TOL)


def _partition(X, y, w, test: SplitTest, fractions: np.ndarray):
    br = test.branches(X[:, test.attribute])
    miss = br < 0
    parts = []
    for b in range(test.n_branches):
        sel = br == b
        if miss.any() and fractions[b] > 0:
            rows = np.flatnonzero(sel | miss)
            wb = w[rows].copy()
            wb[miss[rows]] *= fractions[b]
        else:
            rows = np.flatnonzero(sel)
            wb = w[rows]
        parts.append((X[rows], y[rows], wb))
    return parts


def _grow(X, y, w, attributes, features, numeric_cols, n_classes, params, fallback) -> TreeNode:
    cw = np.bincount(y, weights=w, minlength=n_classes)
    total = cw.sum()
    dist = _normalize(cw, fallback)
    if total <= 0:
        return Leaf(cw, dist)
    if total - cw.max() <= TOL or total < 2 * params.min_instances - TOL:
        return Leaf(cw, dist)
    best = select_test(
        _node_candidates(X, y, w, attributes, features, numeric_cols, n_classes, params),
        params.mean_gain_filter,
    )
    if best is None:
        return Leaf(cw, dist)
    test = best.test
    br = test.branches(X[:, test.attribute])
    known = br >= 0
    branch_w = np.bincount(br[known], weights=w[known], minlength=test.n_branches)
    fractions = branch_w / branch_w.sum()
    children = [
        _grow(Xb, yb, wb, attributes, features, numeric_cols, n_classes, params, dist)
        if len(yb) else Leaf(np.zeros(n_classes), dist.copy())
        for Xb, yb, wb in _partition(X, y, w, test, fractions)
    ]
    return Internal(test, children, fractions, cw, dist)


def grow_tree(ds: Dataset, params: TreeParams = TreeParams()) -> TreeNode:
    """Grow an unpruned C4.5 tree.

    Returns a leaf when the node is (near) pure, when no test gives at least
    two branches with ``min_instances`` known weight, or when no test has
    positive split information.
    """
    if len(ds) == 0:
        raise DatasetError("cannot grow a tree on an empty dataset")
    if np.any(ds.y < 0):
        raise DatasetError("training data has missing class values")
    features = ds.feature_indices
    numeric_cols = np.array([a for a in features if not ds.attributes[a].is_nominal], dtype=np.intp)
    return _grow(
        ds.X, ds.y, ds.weights, ds.attributes, features, numeric_cols, ds.n_classes, params, None
    )


# ---------------------------------------------------------------------------
# Pruning
# ---------------------------------------------------------------------------


def _z_score(confidence: float) -> float:
    if confidence >= 0.5:
        return 0.0
    return NormalDist().inv_cdf(1.0 - confidence)


def pessimistic_error(n: float, e: float, confidence: float) -> float:
    """Upper confidence bound on a leaf's error rate (normal approximation).

    ``n`` is the leaf weight and ``e`` its misclassified weight; the bound is
    taken at the upper-tail standard-normal quantile of ``confidence`` and
    capped at 1.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if not 0.0 < confidence <= 0.5:
        raise ValueError("confidence must be in (0, 0.5]")
    e = min(max(e, 0.0), n)
    f = e / n
    z = _z_score(confidence)
    if z == 0.0:
        return f
    z2 = z * z
    num = f + z2 / (2 * n) + z * math.sqrt(max(f / n - f * f / n + z2 / (4 * n * n), 0.0))
    return min(1.0, num / (1 + z2 / n))


def _leaf_error_count(class_weights: np.ndarray, predicted: int, confidence: float) -> float:
    n = float(class_weights.sum())
    if n <= 0:
        return 0.0
    e = n - float(class_weights[predicted])
    return n * pessimistic_error(n, e, confidence)


def prune_confidence(root: TreeNode, params: TreeParams = TreeParams()) -> TreeNode:
    """Bottom-up subtree replacement by pessimistic error.

    A node becomes a leaf when its estimated error count as a leaf is at
    most the summed estimate of its (already pruned) subtree plus
    ``params.slack``.  Returns a new tree; ``root`` is left untouched.
    """
    C = params.confidence

    def walk(node: TreeNode) -> tuple[TreeNode, float]:
        if isinstance(node, Leaf):
            return node, _leaf_error_count(node.class_weights, node.predicted, C)
        pruned = [walk(c) for c in node.children]
        subtree = sum(est for _, est in pruned)
        if node.missing_child is not None:
            subtree += _leaf_error_count(node.missing_child.class_weights, node.missing_child.predicted, C)
        as_leaf = _leaf_error_count(node.class_weights, node.predicted, C)
        if as_leaf <= subtree + params.slack + TOL:
            return Leaf(node.class_weights, node.distribution), as_leaf
        return replace(node, children=[c for c, _ in pruned]), subtree

    return walk(root)[0]


def _route(node: Internal, X, y, w):
    """Split (X, y, w) among the node's children with fractional missing weights."""
    if node.missing_child is not None:
        raise ValueError("reduced-error pruning does not apply to stumps")
    return _partition(X, y, w, node.test, node.branch_fractions)


def prune_reduced_error(root: TreeNode, grow_set: Dataset, prune_set: Dataset) -> TreeNode:
    """Bottom-up subtree replacement judged on a held-out pruning set.

    Leaf labels come from the growing data routed through the tree.  A node
    is replaced by a leaf whenever that does not increase the misclassified
    weight of the pruning data reaching it (ties collapse).
    """
    if len(prune_set) == 0:
        raise DatasetError("pruning set is empty")
    if not grow_set.same_schema(prune_set):
        raise DatasetError("growing and pruning sets have different schemas")
    K = grow_set.n_classes

    def walk(node, Xg, yg, wg, Xp, yp, wp, fallback) -> tuple[TreeNode, float]:
        gcw = np.bincount(yg, weights=wg, minlength=K)
        pcw = np.bincount(yp, weights=wp, minlength=K)
        dist = _normalize(gcw, node.distribution if fallback is None else fallback)
        label = int(np.argmax(dist))
        leaf_err = float(pcw.sum() - pcw[label])
        if isinstance(node, Leaf):
            return Leaf(gcw, dist), leaf_err
        gparts = _route(node, Xg, yg, wg)
        pparts = _route(node, Xp, yp, wp)
        kids = [walk(c, *g, *p, dist) for c, g, p in zip(node.children, gparts, pparts)]
        subtree_err = sum(e for _, e in kids)
        if leaf_err <= subtree_err + TOL:
            return Leaf(gcw, dist), leaf_err
        return replace(node, children=[c for c, _ in kids], class_weights=gcw, distribution=dist), subtree_err

    return walk(
        root, grow_set.X, grow_set.y, grow_set.weights, prune_set.X, prune_set.y,
        prune_set.weights, None,
    )[0]


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


def _predict_into(node: TreeNode, X: np.ndarray, rows: np.ndarray, mult: np.ndarray, out: np.ndarray):
    if isinstance(node, Leaf):
        out[rows] += mult[:, None] * node.distribution[None, :]
        return
    br = node.test.branches(X[rows, node.test.attribute])
    miss = br < 0
    if miss.any():
        if node.missing_child is not None:
            _predict_into(node.missing_child, X, rows[miss], mult[miss], out)
        else:
            for b, child in enumerate(node.children):
                frac = node.branch_fractions[b]
                if frac > 0:
                    _predict_into(child, X, rows[miss], mult[miss] * frac, out)
    for b, child in enumerate(node.children):
        sel = br == b
        if sel.any():
            _predict_into(child, X, rows[sel], mult[sel], out)


@dataclass(eq=False)
class DecisionTreeModel:
    root: TreeNode
    attributes: tuple[Attribute, ...]
    class_index: int
    params: TreeParams | None = None
    kind: str = "j48"

    @property
    def n_classes(self) -> int:
        return self.attributes[self.class_index].n_values

    def predict_proba(self, data) -> np.ndarray:
        X = as_matrix(data, len(self.attributes))
        out = np.zeros((X.shape[0], self.n_classes))
        if X.shape[0]:
            _predict_into(self.root, X, np.arange(X.shape[0]), np.ones(X.shape[0]), out)
        return out

    def predict(self, data) -> np.ndarray:
        return np.argmax(self.predict_proba(data), axis=1)

    @property
    def n_nodes(self) -> int:
        return count_nodes(self.root)

    def dump(self) -> str:
        return dump_tree(self)


def classify(model: DecisionTreeModel, x) -> np.ndarray:
    """Class distribution for one instance (its class cell is ignored)."""
    return model.predict_proba(x)[0]


def train_tree(ds: Dataset, params: TreeParams = TreeParams()) -> DecisionTreeModel:
    """Grow and prune a tree according to ``params.pruning``."""
    if params.pruning == PRUNE_REDUCED_ERROR:
        try:
            folds = stratified_folds(ds, params.folds, params.seed)
        except DatasetError:
            root = grow_tree(ds, params)
        else:
            hold = folds.test_indices(params.folds - 1)
            grow_set = ds.subset(folds.train_indices(params.folds - 1))
            prune_set = ds.subset(hold)
            root = prune_reduced_error(grow_tree(grow_set, params), grow_set, prune_set)
    else:
        root = grow_tree(ds, params)
        if params.pruning == PRUNE_CONFIDENCE:
            root = prune_confidence(root, params)
    return DecisionTreeModel(root, ds.attributes, ds.class_index, params, "j48")


# ---------------------------------------------------------------------------
# Decision stump
# ---------------------------------------------------------------------------


def _branch_error(table: np.ndarray) -> float:
    return float((table.sum(axis=-1) - table.max(axis=-1)).sum()) if table.size else 0.0


def train_stump(ds: Dataset) -> DecisionTreeModel:
    """Depth-1 tree with minimal weighted training error.

    Nominal attributes branch on every declared value, numeric attributes on
    the best midpoint threshold; unknown values get their own leaf.  Ties go
    to the lowest attribute index, then the lowest threshold.  When no test
    beats the majority-class leaf the stump is that leaf.
    """
    if len(ds) == 0:
        raise DatasetError("cannot train a stump on an empty dataset")
    if np.any(ds.y < 0):
        raise DatasetError("training data has missing class values")
    K = ds.n_classes
    X, y, w = ds.X, ds.y, ds.weights
    cw = np.bincount(y, weights=w, minlength=K)
    dist = _normalize(cw)
    base_err = float(cw.sum() - cw.max())
    best_err, best_test = base_err - TOL, None

    for a in ds.feature_indices:
        col = X[:, a]
        miss = np.isnan(col)
        miss_err = _branch_error(np.bincount(y[miss], weights=w[miss], minlength=K))
        if ds.attributes[a].is_nominal:
            test = SplitTest(a, ds.attributes[a].n_values)
            table, _ = _branch_class_weights(col, y, w, test, K)
            err = _branch_error(table) + miss_err
            if err < best_err - TOL:
                best_err, best_test = err, test
            continue
        known = np.flatnonzero(~miss)
        if len(known) < 2:
            continue
        order = known[np.argsort(col[known], kind="stable")]
        vals = col[order]
        onehot = np.zeros((len(order), K))
        onehot[np.arange(len(order)), y[order]] = w[order]
        cum = np.cumsum(onehot, axis=0)
        left, right = cum[:-1], cum[-1][None, :] - cum[:-1]
        errs = (left.sum(1) - left.max(1)) + (right.sum(1) - right.max(1)) + miss_err
        errs = np.where(vals[1:] > vals[:-1], errs, np.inf)
        i = int(np.argmin(errs))
        if errs[i] < best_err - TOL:
            t = (vals[i] + vals[i + 1]) / 2.0
            if not vals[i] <= t < vals[i + 1]:
                t = vals[i]
            best_err, best_test = float(errs[i]), numeric_test(a, t)

    if best_test is None:
        root: TreeNode = Leaf(cw, dist)
    else:
        col = X[:, best_test.attribute]
        table, missing = _branch_class_weights(col, y, w, best_test, K)
        branch_w = table.sum(axis=1)
        fractions = branch_w / branch_w.sum()
        children = [make_leaf(table[b], dist) for b in range(best_test.n_branches)]
        root = Internal(best_test, children, fractions, cw, dist, make_leaf(missing, dist))
    return DecisionTreeModel(root, ds.attributes, ds.class_index, None, "stump")


# ---------------------------------------------------------------------------
# Text rendering
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _leaf_text(leaf: Leaf, classes: Sequence[str]) -> str:
    counts = ", ".join(f"{c}={_fmt(x)}" for c, x in zip(classes, leaf.class_weights))
    return f"{classes[leaf.predicted]} [{counts}]"


def dump_tree(model: DecisionTreeModel) -> str:
    """Indented rendering: one line per branch, leaves show their class weights."""
    attrs = model.attributes
    classes = attrs[model.class_index].values
    lines: list[str] = []

    def branch_label(test: SplitTest, b: int) -> str:
        a = attrs[test.attribute]
        if test.is_numeric:
            op = "<=" if b == 0 else ">"
            return f"{a.name} {op} {test.threshold!r}"
        return f"{a.name} = {a.values[b]}"

    def walk(node: TreeNode, depth: int):
        prefix = "|   " * depth
        if isinstance(node, Leaf):
            lines.append(f"{prefix}: {_leaf_text(node, classes)}")
            return
        branches = [(branch_label(node.test, b), c) for b, c in enumerate(node.children)]
        if node.missing_child is not None:
            branches.append((f"{attrs[node.test.attribute].name} = ?", node.missing_child))
        for label, child in branches:
            if isinstance(child, Leaf):
                lines.append(f"{prefix}{label}: {_leaf_text(child, classes)}")
            else:
                lines.append(f"{prefix}{label}")
                walk(child, depth + 1)

    walk(model.root, 0)
    return "\n".join(lines) + "\n"
