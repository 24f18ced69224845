"""Seeded synthetic graph generators for tests, demos, and `verify` runs.

The clustered generator produces a fixed number of families whose graphs
share a per-family backbone (node count, wiring, feature direction and
magnitude) and differ only by small absolute feature noise; labels equal the
family id.  Distances within a family therefore stay far below distances
across families, so k-medoid selection with k = families lands one medoid
per family and every graph's nearest medoid shares its label.  That purity
is what makes the weighted-subsample loss guarantees checkable: the loss gap
bound is a Lipschitz argument in the predictions and needs matching labels
on both sides.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .graphs import Dataset, Graph, make_dataset


def random_graph(rng: np.random.Generator, n: int, p: float,
                 feature_dim: int = 2, scale: float = 1.0,
                 shift: float = 0.0, label=None) -> Graph:
    """One G(n, p) draw with Gaussian features ``shift + scale * N(0, 1)``."""
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    feats = shift + scale * rng.standard_normal((n, feature_dim))
    return Graph(n, edges, feats, label=label)


def _family_backbone(f: int) -> tuple[int, list[tuple[int, int]]]:
    """Fixed wiring for family ``f``: a ring of ``6 + f`` nodes plus ``f``
    chords at stride ``2 + f``."""
    n = 6 + f
    edges = {(i, (i + 1) % n) for i in range(n)}
    edges = {(min(a, b), max(a, b)) for a, b in edges}
    for j in range(f):
        a = (2 * j) % n
        b = (a + 2 + f) % n
        edges.add((min(a, b), max(a, b)))
    return n, sorted(edges)


def _family_direction(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Unit feature direction with at least one sign flip (for dim >= 2), so
    relu layers see varied support across families instead of one cone."""
    u = rng.standard_normal(dim)
    u[np.abs(u) < 1e-3] = 1e-3
    if dim >= 2 and (np.all(u > 0) or np.all(u < 0)):
        u[int(np.argmin(np.abs(u)))] *= -1.0
    return u / np.linalg.norm(u)


def clustered_dataset(n_graphs: int = 40, families: int = 5, seed: int = 0,
                      feature_dim: int = 3) -> Dataset:
    """Well-separated families; each graph's label is its family id.

    Family f fixes a backbone (ring of ``6 + f`` nodes plus ``f`` chords), a
    unit feature direction, and a feature magnitude ``2 (f + 1)``.  Members
    differ only by absolute noise of scale 0.03 on the node features, so the
    largest within-family distance sits well below the smallest cross-family
    distance at any positive depth weights.
    """
    if n_graphs < families or families < 1:
        raise ConfigError(f"need n_graphs >= families >= 1, got {n_graphs}, {families}")
    rng = np.random.default_rng(seed)
    backbones = [_family_backbone(f) for f in range(families)]
    directions = [_family_direction(rng, feature_dim) for _ in range(families)]
    graphs = []
    for i in range(n_graphs):
        f = i % families
        n, edges = backbones[f]
        center = 2.0 * (f + 1) * directions[f]
        feats = center + 0.03 * rng.standard_normal((n, feature_dim))
        graphs.append(Graph(n, edges, feats, label=f))
    return make_dataset(graphs, name=f"clustered-{n_graphs}-{families}-{seed}")


def synthetic_dataset(n_graphs: int, seed: int) -> Dataset:
    """Default generator behind ``verify --synthetic``."""
    return clustered_dataset(n_graphs=n_graphs, families=min(5, n_graphs), seed=seed)


def random_pairs(ds: Dataset, count: int, seed: int) -> list[tuple[Graph, Graph]]:
    """Seeded random graph pairs (with replacement, distinct indices)."""
    if len(ds) < 2:
        raise ConfigError("need at least two graphs to form pairs")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(count):
        i, j = rng.choice(len(ds), size=2, replace=False)
        pairs.append((ds[int(i)], ds[int(j)]))
    return pairs


def wl_counterexample_pair(n: int = 5) -> tuple[Graph, Graph]:
    """Two path graphs telling structural refinement apart from feature-aware
    distances: identical edges, features ``i`` versus ``10 i``.

    Label refinement sees the same structure (distance 0); any feature-aware
    readout separates them.
    """
    if n < 2:
        raise ConfigError(f"need n >= 2, got {n}")
    edges = [(i, i + 1) for i in range(n - 1)]
    f1 = [[float(i + 1)] for i in range(n)]
    f2 = [[10.0 * (i + 1)] for i in range(n)]
    return Graph(n, edges, f1), Graph(n, edges, f2)


def random_regular_edges(n: int, degree: int, seed: int) -> list[tuple[int, int]]:
    """Random ``degree``-regular simple graph via the pairing model.

    Draws stub matchings until one is simple (no loops, no parallel edges);
    for small constant degree this needs only a handful of attempts.
    """
    if n * degree % 2 != 0:
        raise ConfigError("n * degree must be even")
    if degree >= n:
        raise ConfigError(f"degree {degree} needs more than {n} nodes")
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        stubs = np.repeat(np.arange(n), degree)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        if (pairs[:, 0] == pairs[:, 1]).any():
            continue
        canon = {(min(int(a), int(b)), max(int(a), int(b))) for a, b in pairs}
        if len(canon) == pairs.shape[0]:
            return sorted(canon)
    raise RuntimeError("pairing model failed to produce a simple graph")


def random_regular_graph(n: int, degree: int, seed: int,
                         feature_dim: int = 1) -> Graph:
    """Regular graph with unit features (used for runtime scaling checks)."""
    edges = random_regular_edges(n, degree, seed)
    return Graph(n, edges, np.ones((n, feature_dim)))
