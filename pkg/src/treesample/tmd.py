"""Tree mover's distance between attributed graphs.

The distance matches the multisets of depth-L computation trees of two
graphs, using a recursive tree distance as the ground cost.  Mismatched
multiset sizes are padded with blank trees (a single node with an all-zero
feature vector), so graphs of different sizes compare directly.

Two routes are provided: ``tmd`` runs a bottom-up dynamic program over node
pairs (no trees are materialized), while ``tmd_naive`` unrolls the trees and
recurses on them literally.  The naive route is the correctness oracle and is
deliberately restricted to small inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .config import TmdConfig
from .errors import ConfigError, DatasetError, ScaleLimitError
from .graphs import Dataset, Graph, RootedTree, computation_tree, empty_graph
from .matching import matching_value
from .treenorm import feature_norms, tree_norm

_NAIVE_NODE_LIMIT = 12
_NAIVE_DEPTH_LIMIT = 4


def _cross_distances(fa: np.ndarray, fb: np.ndarray, norm: str) -> np.ndarray:
    if fa.shape[1] != fb.shape[1]:
        raise DatasetError(
            f"feature dimensions differ: {fa.shape[1]} vs {fb.shape[1]}")
    metric = "cityblock" if norm == "l1" else "euclidean"
    return cdist(fa, fb, metric=metric)


def _pair_distance(x: np.ndarray, y: np.ndarray, norm: str) -> float:
    d = x - y
    if norm == "l1":
        return float(np.abs(d).sum())
    return float(np.sqrt((d * d).sum()))


def _padded_matching(block: np.ndarray, row_blanks: np.ndarray,
                     col_blanks: np.ndarray) -> float:
    """Min-cost matching of two multisets after padding the smaller with blanks.

    ``block[x, y]`` is the cost of matching row-item x to column-item y;
    ``row_blanks[x]`` / ``col_blanks[y]`` are the costs against a blank.
    """
    ra, cb = block.shape
    if ra == 0 and cb == 0:
        return 0.0
    if ra == 0:
        return math.fsum(col_blanks)
    if cb == 0:
        return math.fsum(row_blanks)
    q = max(ra, cb)
    c = np.zeros((q, q))
    c[:ra, :cb] = block
    if cb < q:
        c[:ra, cb:] = row_blanks[:, None]
    if ra < q:
        c[ra:, :cb] = col_blanks[None, :]
    return matching_value(c)


def _tmd_tables(ga: Graph, gb: Graph, cfg: TmdConfig):
    """Depth-L tables: td[u, v] = TD of the two computation trees, plus the
    distances of each tree to a blank."""
    na, nb = ga.node_count, gb.node_count
    base = _cross_distances(ga.features, gb.features, cfg.feature_norm)
    xa = feature_norms(ga.features, cfg.feature_norm)
    xb = feature_norms(gb.features, cfg.feature_norm)
    nbrs_a = [ga.neighbors(u) for u in range(na)]
    nbrs_b = [gb.neighbors(v) for v in range(nb)]

    td, bl_a, bl_b = base, xa, xb
    for d in range(2, cfg.depth + 1):
        w = cfg.level_weight(d - 1)
        new_td = base.copy()
        for u in range(na):
            nu = nbrs_a[u]
            row_blanks = bl_a[nu]
            for v in range(nb):
                nv = nbrs_b[v]
                if nu.size == 0 and nv.size == 0:
                    continue
                new_td[u, v] += w * _padded_matching(
                    td[np.ix_(nu, nv)], row_blanks, bl_b[nv])
        new_bl_a = xa + w * np.array([math.fsum(bl_a[nu]) for nu in nbrs_a])
        new_bl_b = xb + w * np.array([math.fsum(bl_b[nv]) for nv in nbrs_b])
        td, bl_a, bl_b = new_td, new_bl_a, new_bl_b
    return td, bl_a, bl_b


def tmd_cost_matrix(ga: Graph, gb: Graph, cfg: TmdConfig) -> np.ndarray:
    """Padded top-level cost matrix over depth-L computation trees.

    Rows 0..na-1 are ga's trees, columns 0..nb-1 are gb's; the remaining
    rows/columns (if any) are blank padding.  The tree mover's distance is
    the min-cost matching value of this matrix.
    """
    na, nb = ga.node_count, gb.node_count
    td, bl_a, bl_b = _tmd_tables(ga, gb, cfg)
    q = max(na, nb)
    c = np.zeros((q, q))
    c[:na, :nb] = td
    if nb < q:
        c[:na, nb:] = bl_a[:, None]
    if na < q:
        c[na:, :nb] = bl_b[None, :]
    return c


def tmd(ga: Graph, gb: Graph, cfg: TmdConfig) -> float:
    """Tree mover's distance at depth ``cfg.depth``.

    Symmetric and non-negative; zero for identical graphs.  Values are exact
    matching sums (no normalization by multiset size).
    """
    if ga.node_count == 0 and gb.node_count == 0:
        return 0.0
    if ga.node_count == 0:
        return tree_norm(gb, cfg)
    if gb.node_count == 0:
        return tree_norm(ga, cfg)
    return matching_value(tmd_cost_matrix(ga, gb, cfg))


# ---------------------------------------------------------------------------
# naive oracle route: literal trees, literal recursion
# ---------------------------------------------------------------------------

def _subtree_blank_cost(t: RootedTree, i: int, cfg: TmdConfig,
                        memo: dict[int, float]) -> float:
    """TD between the subtree rooted at ``i`` and a blank tree."""
    if i in memo:
        return memo[i]
    depth = int(t.subtree_depths()[i])
    val = _pair_distance(t.features[i], np.zeros_like(t.features[i]), cfg.feature_norm)
    kids = t.children()[i]
    if depth > 1 and kids:
        val += cfg.level_weight(depth - 1) * math.fsum(
            _subtree_blank_cost(t, k, cfg, memo) for k in kids)
    memo[i] = val
    return val


def _subtree_distance(ta: RootedTree, i: int, tb: RootedTree, j: int,
                      cfg: TmdConfig, memo_a: dict, memo_b: dict) -> float:
    da = int(ta.subtree_depths()[i])
    db = int(tb.subtree_depths()[j])
    base = _pair_distance(ta.features[i], tb.features[j], cfg.feature_norm)
    d = max(da, db)
    if d <= 1:
        return base
    ca = ta.children()[i]
    cb = tb.children()[j]
    block = np.zeros((len(ca), len(cb)))
    for x, a in enumerate(ca):
        for y, b in enumerate(cb):
            block[x, y] = _subtree_distance(ta, a, tb, b, cfg, memo_a, memo_b)
    row_blanks = np.array([_subtree_blank_cost(ta, a, cfg, memo_a) for a in ca])
    col_blanks = np.array([_subtree_blank_cost(tb, b, cfg, memo_b) for b in cb])
    return base + cfg.level_weight(d - 1) * _padded_matching(block, row_blanks, col_blanks)


def tree_distance(ta: RootedTree, tb: RootedTree, cfg: TmdConfig) -> float:
    """Recursive distance between two rooted trees.

    Root feature distance plus, when the deeper tree has depth d > 1,
    ``w(d - 1)`` times the min-cost matching between the child subtree
    multisets after blank padding.
    """
    if max(ta.depth, tb.depth) > cfg.depth:
        raise ConfigError(
            f"tree depth {max(ta.depth, tb.depth)} exceeds configured depth {cfg.depth}")
    if ta.features.shape[1] != tb.features.shape[1]:
        raise DatasetError(
            f"feature dimensions differ: {ta.features.shape[1]} vs {tb.features.shape[1]}")
    return _subtree_distance(ta, 0, tb, 0, cfg, {}, {})


def tree_blank_distance(t: RootedTree, cfg: TmdConfig) -> float:
    """Distance between a rooted tree and the blank single-node tree."""
    if t.depth > cfg.depth:
        raise ConfigError(f"tree depth {t.depth} exceeds configured depth {cfg.depth}")
    return _subtree_blank_cost(t, 0, cfg, {})


def tmd_naive(ga: Graph, gb: Graph, cfg: TmdConfig) -> float:
    """Oracle tree mover's distance via materialized computation trees.

    Restricted to graphs of at most 12 nodes and depth at most 4.
    """
    if max(ga.node_count, gb.node_count) > _NAIVE_NODE_LIMIT:
        raise ScaleLimitError(
            f"tmd_naive supports at most {_NAIVE_NODE_LIMIT} nodes per graph")
    if cfg.depth > _NAIVE_DEPTH_LIMIT:
        raise ScaleLimitError(f"tmd_naive supports depth <= {_NAIVE_DEPTH_LIMIT}")
    na, nb = ga.node_count, gb.node_count
    if na == 0 and nb == 0:
        return 0.0
    if na and nb and ga.feature_dim != gb.feature_dim:
        raise DatasetError(
            f"feature dimensions differ: {ga.feature_dim} vs {gb.feature_dim}")
    trees_a = [computation_tree(ga, v, cfg.depth) for v in range(na)]
    trees_b = [computation_tree(gb, v, cfg.depth) for v in range(nb)]
    memos_a = [{} for _ in trees_a]
    memos_b = [{} for _ in trees_b]
    block = np.zeros((na, nb))
    for i, ta in enumerate(trees_a):
        for j, tb in enumerate(trees_b):
            block[i, j] = _subtree_distance(ta, 0, tb, 0, cfg, memos_a[i], memos_b[j])
    row_blanks = np.array([_subtree_blank_cost(t, 0, cfg, m)
                           for t, m in zip(trees_a, memos_a)])
    col_blanks = np.array([_subtree_blank_cost(t, 0, cfg, m)
                           for t, m in zip(trees_b, memos_b)])
    return _padded_matching(block, row_blanks, col_blanks)


def tree_norm_naive(g: Graph, cfg: TmdConfig) -> float:
    """Oracle tree norm: naive distance to the empty graph."""
    return tmd_naive(g, empty_graph(max(1, g.feature_dim)), cfg)


# ---------------------------------------------------------------------------
# subgraph shortcut and pairwise matrices
# ---------------------------------------------------------------------------

def tmd_subgraph(g: Graph, nodes, cfg: TmdConfig) -> float:
    """Distance from ``g`` to its induced subgraph on ``nodes``.

    Computed as the tree-norm difference (the identity transport plan is
    optimal for subgraph deletions), which costs two fast norm passes instead
    of a full matching.
    """
    from .graphs import induced_subgraph

    return tree_norm(g, cfg) - tree_norm(induced_subgraph(g, nodes), cfg)


@dataclass
class DistanceMatrix:
    """Condensed pairwise distance matrix over a dataset.

    ``values`` holds the strict upper triangle row-major: entry (i, j) with
    i < j lives at index ``i*n - i*(i+1)//2 + (j - i - 1)``.
    """

    n: int
    metric: str
    depth: int
    weight_preset: str
    values: np.ndarray

    def __post_init__(self):
        expected = self.n * (self.n - 1) // 2
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (expected,):
            raise ValueError(
                f"expected {expected} condensed entries for n={self.n}, "
                f"got shape {self.values.shape}")

    def index(self, i: int, j: int) -> int:
        if i == j or not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"bad pair ({i},{j}) for n={self.n}")
        if i > j:
            i, j = j, i
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def value(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        return float(self.values[self.index(i, j)])

    def full(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        k = 0
        for i in range(self.n):
            for j in range(i + 1, self.n):
                out[i, j] = out[j, i] = self.values[k]
                k += 1
        return out


def pairwise_matrix(ds: Dataset, cfg: TmdConfig) -> DistanceMatrix:
    """All-pairs tree mover's distances over a dataset.

    Pairs are evaluated independently, so the result does not depend on
    evaluation order.
    """
    n = len(ds)
    vals = np.zeros(n * (n - 1) // 2)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            vals[k] = tmd(ds[i], ds[j], cfg)
            k += 1
    return DistanceMatrix(n, "tmd", cfg.depth, cfg.weights.spec_string(), vals)
