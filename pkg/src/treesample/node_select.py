"""Node subset selection inside a single graph.

Finding the k-node induced subgraph closest to the parent graph is the same
problem as finding the k-node subgraph with the largest tree norm, so the
selector evaluates cheap tree norms over a candidate pool instead of running
any matching.  Candidates come from three heuristics: per-node BFS balls,
a restarting random walk, and a k-core peel.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .config import TmdConfig
from .errors import ConfigError, ScaleLimitError
from .graphs import Dataset, Graph, induced_subgraph
from .treenorm import tree_norm

_BRUTE_SUBSET_LIMIT = 100_000


@dataclass
class CandidateSet:
    """Deduplicated candidate subsets with the heuristic that produced each."""

    subsets: list[tuple[int, ...]]
    tags: list[str]

    def add(self, subset, tag: str) -> None:
        canon = tuple(sorted(int(v) for v in subset))
        if canon not in self._seen:
            self._seen.add(canon)
            self.subsets.append(canon)
            self.tags.append(tag)

    def __post_init__(self):
        self._seen = set(self.subsets)

    def __len__(self):
        return len(self.subsets)


def new_candidate_set() -> CandidateSet:
    return CandidateSet([], [])


@dataclass
class NodeSubsample:
    """Result of subsampling one graph: kept nodes and the cost of the cut."""

    graph_id: int
    kept: tuple[int, ...]
    tree_norm_full: float
    tree_norm_sub: float
    tmd_to_full: float
    provenance: str

    def to_json(self) -> str:
        return json.dumps({
            "id": self.graph_id, "kept": list(self.kept),
            "tree_norm_full": self.tree_norm_full,
            "tree_norm_sub": self.tree_norm_sub,
            "tmd": self.tmd_to_full, "provenance": self.provenance,
        }, sort_keys=True)


def save_subsamples(subs, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in subs:
            fh.write(s.to_json() + "\n")


def load_subsamples(path) -> list[NodeSubsample]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            out.append(NodeSubsample(rec["id"], tuple(rec["kept"]),
                                     rec["tree_norm_full"], rec["tree_norm_sub"],
                                     rec["tmd"], rec["provenance"]))
    return out


def _bfs_distances(g: Graph, start: int) -> np.ndarray:
    dist = np.full(g.node_count, -1, dtype=np.int64)
    dist[start] = 0
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in g.neighbors(v):
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(int(u))
    return dist


def k_bfs_candidates(g: Graph, k: int) -> CandidateSet:
    """One BFS ball per node: the deepest ball that still holds <= k nodes.

    Balls never cross connected components.  Identical balls from different
    roots are deduplicated, keeping the first root's tag.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    cands = new_candidate_set()
    for v in range(g.node_count):
        dist = _bfs_distances(g, v)
        reached = dist[dist >= 0]
        radii = np.sort(np.unique(reached))
        counts = np.array([(reached <= r).sum() for r in radii])
        ok = radii[counts <= k]
        radius = int(ok[-1]) if ok.size else 0
        ball = tuple(int(u) for u in np.flatnonzero((dist >= 0) & (dist <= radius)))
        cands.add(ball, f"bfs:{v}")
    return cands


def rw_candidate(g: Graph, k: int, seed: int) -> tuple[int, ...]:
    """Distinct nodes visited by a restarting random walk.

    Starts at the highest-degree node (ties: smallest index), restarts with
    probability 0.15, and stops after ``min(k, n)`` distinct nodes or
    ``50 * k`` steps; any shortfall is padded with the smallest unvisited
    indices.
    """
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    n = g.node_count
    if n == 0:
        return ()
    target = min(k, n)
    start = int(np.argmax(g.degrees()))
    rng = np.random.default_rng(seed)
    visited = {start}
    cur = start
    steps = 0
    while len(visited) < target and steps < 50 * k:
        steps += 1
        nbrs = g.neighbors(cur)
        if rng.random() < 0.15 or nbrs.size == 0:
            cur = start
        else:
            cur = int(nbrs[rng.integers(nbrs.size)])
        visited.add(cur)
    for u in range(n):
        if len(visited) >= target:
            break
        visited.add(u)
    return tuple(sorted(visited))


def core_numbers(g: Graph) -> np.ndarray:
    """Core number of each node via min-degree peeling."""
    n = g.node_count
    core = np.zeros(n, dtype=np.int64)
    degc = g.degrees().astype(np.int64)
    alive = np.ones(n, dtype=bool)
    peeled = 0
    level = 0
    while peeled < n:
        candidates = np.flatnonzero(alive)
        v = int(candidates[np.argmin(degc[candidates])])
        level = max(level, int(degc[v]))
        core[v] = level
        alive[v] = False
        peeled += 1
        for u in g.neighbors(v):
            if alive[u]:
                degc[u] -= 1
    return core


def kcore_candidate(g: Graph, k: int) -> tuple[int, ...]:
    """Top ``min(k, n)`` nodes by (core number desc, degree desc, index asc)."""
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    n = g.node_count
    if n == 0:
        return ()
    core = core_numbers(g)
    deg = g.degrees()
    order = sorted(range(n), key=lambda v: (-int(core[v]), -int(deg[v]), v))
    return tuple(sorted(order[:min(k, n)]))


def select_subset(g: Graph, candidates: CandidateSet, cfg: TmdConfig,
                  graph_id: int = 0) -> NodeSubsample:
    """Pick the candidate whose induced subgraph has the largest tree norm.

    Maximizing the subgraph tree norm minimizes the distance to the parent
    graph.  Exact ties resolve to the lexicographically smallest sorted
    subset.
    """
    if len(candidates) == 0:
        raise ConfigError("candidate set is empty")
    full = tree_norm(g, cfg)
    best = None
    for subset, tag in zip(candidates.subsets, candidates.tags):
        val = tree_norm(induced_subgraph(g, subset), cfg)
        if best is None or val > best[0] or (val == best[0] and subset < best[1]):
            best = (val, subset, tag)
    val, subset, tag = best
    return NodeSubsample(graph_id, subset, full, val, full - val, tag)


def brute_force_select(g: Graph, k: int, cfg: TmdConfig,
                       graph_id: int = 0) -> NodeSubsample:
    """Exact best k-subset by enumeration (C(n, k) <= 1e5).

    Ties resolve to the lexicographically smallest subset, matching
    :func:`select_subset`.
    """
    n = g.node_count
    if not (1 <= k <= n):
        raise ConfigError(f"k must be in 1..{n}, got {k}")
    if math.comb(n, k) > _BRUTE_SUBSET_LIMIT:
        raise ScaleLimitError(f"C({n},{k}) exceeds the enumeration limit")
    full = tree_norm(g, cfg)
    best_val, best_set = -np.inf, None
    for combo in itertools.combinations(range(n), k):
        val = tree_norm(induced_subgraph(g, combo), cfg)
        if val > best_val:
            best_val, best_set = val, combo
    return NodeSubsample(graph_id, best_set, full, best_val, full - best_val,
                         "brute")


def tree_norm_decision(g: Graph, k: int, tau: float, cfg: TmdConfig) -> bool:
    """Does some k-node induced subgraph reach tree norm >= tau?  (Oracle.)"""
    return brute_force_select(g, k, cfg).tree_norm_sub >= tau


def build_candidates(g: Graph, k: int, seed: int,
                     heuristics=("bfs", "rw", "kcore")) -> CandidateSet:
    """Union of candidate subsets from the enabled heuristics."""
    known = {"bfs", "rw", "kcore"}
    bad = set(heuristics) - known
    if bad:
        raise ConfigError(f"unknown heuristics {sorted(bad)}; choose from {sorted(known)}")
    if not heuristics:
        raise ConfigError("at least one heuristic must be enabled")
    cands = new_candidate_set()
    if "bfs" in heuristics:
        bfs = k_bfs_candidates(g, k)
        for subset, tag in zip(bfs.subsets, bfs.tags):
            cands.add(subset, tag)
    if "rw" in heuristics:
        cands.add(rw_candidate(g, k, seed), "rw")
    if "kcore" in heuristics:
        cands.add(kcore_candidate(g, k), "kcore")
    return cands


def subsample_dataset(ds: Dataset, frac: float, cfg: TmdConfig,
                      heuristics=("bfs", "rw", "kcore"),
                      seed: int = 0) -> list[NodeSubsample]:
    """Subsample every graph to roughly ``frac`` of its nodes.

    Per graph, ``k = max(1, round(frac * n))`` (half-up rounding, capped at
    n); the walk seed is derived per graph so results are independent of
    dataset order.
    """
    if not (0.0 < frac <= 1.0):
        raise ConfigError(f"frac must be in (0, 1], got {frac}")
    out = []
    for i, g in enumerate(ds):
        n = g.node_count
        if n == 0:
            out.append(NodeSubsample(i, (), 0.0, 0.0, 0.0, "empty"))
            continue
        k = min(n, max(1, int(math.floor(frac * n + 0.5))))
        cands = build_candidates(g, k, seed + i, heuristics)
        out.append(select_subset(g, cands, cfg, graph_id=i))
    return out
