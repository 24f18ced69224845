import itertools
import json
import math

import numpy as np
import pytest

from treesample import (ConfigError, Graph, brute_force_select, build_candidates,
                        core_numbers, induced_subgraph, k_bfs_candidates,
                        kcore_candidate, load_subsamples, make_dataset,
                        new_candidate_set, rw_candidate, save_subsamples,
                        select_subset, subsample_dataset, tree_norm,
                        tree_norm_decision)

from helpers import cfg, random_graph

STAR = Graph(4, [(0, 1), (0, 2), (0, 3)], np.ones((4, 1)))
PATH5 = Graph(5, [(i, i + 1) for i in range(4)], np.ones((5, 1)))


def test_candidate_set_deduplicates():
    cands = new_candidate_set()
    cands.add((2, 0), "a")
    cands.add((0, 2), "b")  # same set, different order
    cands.add((0, 1), "c")
    assert len(cands) == 2
    assert cands.subsets[0] == (0, 2)
    assert cands.tags == ["a", "c"]


def test_bfs_balls_on_star():
    cands = k_bfs_candidates(STAR, 1)
    assert cands.subsets == [(0,), (1,), (2,), (3,)]
    # k = 4 admits the full 1-ball around the hub and 2-balls around leaves
    full = k_bfs_candidates(STAR, 4)
    assert (0, 1, 2, 3) in full.subsets


def test_bfs_ball_respects_budget():
    for k in range(1, 6):
        for subset in k_bfs_candidates(PATH5, k).subsets:
            assert 1 <= len(subset) <= k


def test_core_numbers_known_graphs():
    k4 = Graph(4, list(itertools.combinations(range(4), 2)), np.ones((4, 1)))
    assert list(core_numbers(k4)) == [3, 3, 3, 3]
    assert list(core_numbers(PATH5)) == [1, 1, 1, 1, 1]
    tri_pendant = Graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)], np.ones((4, 1)))
    assert list(core_numbers(tri_pendant)) == [2, 2, 2, 1]


def test_kcore_candidate_prefers_dense_part():
    tri_pendant = Graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)], np.ones((4, 1)))
    assert kcore_candidate(tri_pendant, 3) == (0, 1, 2)
    assert kcore_candidate(tri_pendant, 1) == (2,)  # top core, highest degree


def test_rw_candidate_is_seeded_and_sized():
    g = Graph(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)], np.ones((6, 1)))
    a = rw_candidate(g, 3, seed=7)
    assert a == rw_candidate(g, 3, seed=7)
    assert len(a) == 3
    assert all(0 <= v < 6 for v in a)


def test_rw_candidate_pads_disconnected_graph():
    g = Graph(4, [(0, 1)], np.ones((4, 1)))
    assert len(rw_candidate(g, 4, seed=0)) == 4


def test_build_candidates_validates_heuristics():
    with pytest.raises(ConfigError):
        build_candidates(STAR, 2, 0, heuristics=("bfs", "magic"))
    with pytest.raises(ConfigError):
        build_candidates(STAR, 2, 0, heuristics=())


def test_select_subset_takes_largest_norm():
    c = cfg(2)
    g = Graph(3, [(0, 1)], np.array([[5.0], [1.0], [1.0]]))
    cands = new_candidate_set()
    cands.add((1, 2), "small")
    cands.add((0, 1), "large")
    pick = select_subset(g, cands, c, graph_id=3)
    assert pick.kept == (0, 1)
    assert pick.provenance == "large"
    assert pick.graph_id == 3
    assert pick.tree_norm_full == tree_norm(g, c)
    assert pick.tmd_to_full == pick.tree_norm_full - pick.tree_norm_sub


def test_select_subset_tie_is_lexicographic():
    g = Graph(3, [], np.ones((3, 1)))  # no edges: every pair has norm 2
    cands = new_candidate_set()
    cands.add((1, 2), "x")
    cands.add((0, 2), "y")
    assert select_subset(g, cands, cfg(2)).kept == (0, 2)


def test_brute_force_select_matches_exhaustive_max():
    rng = np.random.default_rng(15)
    c = cfg(3)
    for _ in range(10):
        g = random_graph(rng, n_max=6, n_min=2)
        k = int(rng.integers(1, g.node_count + 1))
        best = brute_force_select(g, k, c)
        norms = {s: tree_norm(induced_subgraph(g, s), c)
                 for s in itertools.combinations(range(g.node_count), k)}
        assert best.tree_norm_sub == max(norms.values())
        assert best.kept == min(s for s, v in norms.items()
                                if v == max(norms.values()))


def test_heuristic_selection_never_beats_brute_force():
    rng = np.random.default_rng(16)
    c = cfg(2)
    for _ in range(10):
        g = random_graph(rng, n_max=7, n_min=2)
        k = int(rng.integers(1, g.node_count + 1))
        cands = build_candidates(g, k, seed=1)
        pick = select_subset(g, cands, c)
        assert pick.tree_norm_sub <= brute_force_select(g, k, c).tree_norm_sub + 1e-12


def test_tree_norm_decision_threshold():
    c = cfg(2)
    best = brute_force_select(STAR, 2, c).tree_norm_sub
    assert tree_norm_decision(STAR, 2, best, c)
    assert not tree_norm_decision(STAR, 2, best + 1e-6, c)


def test_subsample_dataset_fraction_rounding():
    rng = np.random.default_rng(8)
    ds = make_dataset([random_graph(rng, n_max=7, n_min=1) for _ in range(8)])
    c = cfg(2)
    subs = subsample_dataset(ds, 0.5, c, seed=0)
    for g, sub in zip(ds, subs):
        expected = min(g.node_count, max(1, int(math.floor(0.5 * g.node_count + 0.5))))
        assert len(sub.kept) == expected
    full = subsample_dataset(ds, 1.0, c, seed=0)
    assert all(s.tmd_to_full == 0.0 for s in full)
    with pytest.raises(ConfigError):
        subsample_dataset(ds, 0.0, c)


def test_subsample_dataset_handles_empty_graph():
    from treesample import empty_graph
    ds = make_dataset([empty_graph(1)])
    sub = subsample_dataset(ds, 0.5, cfg(2))[0]
    assert sub.kept == ()
    assert sub.provenance == "empty"
    assert sub.tmd_to_full == 0.0


def test_subsample_jsonl_round_trip(tmp_path):
    rng = np.random.default_rng(10)
    ds = make_dataset([random_graph(rng, n_max=6, n_min=2) for _ in range(4)])
    subs = subsample_dataset(ds, 0.6, cfg(2), seed=3)
    path = tmp_path / "subs.jsonl"
    save_subsamples(subs, path)
    back = load_subsamples(path)
    assert back == subs
    rec = json.loads(subs[0].to_json())
    assert set(rec) == {"id", "kept", "tree_norm_full", "tree_norm_sub",
                        "tmd", "provenance"}
