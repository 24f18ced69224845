"""Acceptance gate: every stability, equivalence, and runtime claim the
package makes, checked end to end at its stated tolerance.

Each test prints one ``criterion NN [PASS|FAIL]`` line so a plain pytest run
doubles as a checklist.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy.spatial.distance import pdist

from treesample import (DistanceMatrix, Graph, TmdConfig, brute_force_matching,
                        brute_force_medoids, clustered_dataset, const_weights,
                        computation_tree, feature_distance_matrix, feature_norms,
                        finite_erm_check, gin_forward, identity_gin,
                        induced_subgraph, kmedoids, load_or_compute,
                        make_dataset, matching_value, min_cost_matching,
                        nearest_medoid, pairwise_matrix, random_gin,
                        random_regular_graph, save_jsonl, tmd, tree_blank_distance,
                        tree_distance, tree_norm, tree_norm_naive,
                        wl_counterexample_pair, wl_distance)
from treesample.cli import main as cli_main

from helpers import cfg, random_graph, random_table_cfg


def _line(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {num:02d} [{status}] {name}{suffix}")


# ---------------------------------------------------------------------------
# 1. fast tree norm equals the exhaustive oracle
# ---------------------------------------------------------------------------

def test_c01_tree_norm_matches_naive_oracle():
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(200):
        g = random_graph(rng, n_max=8, feature_dim=int(rng.integers(1, 4)))
        c = random_table_cfg(rng, int(rng.integers(1, 5)),
                             norm=("l1", "l2")[int(rng.integers(2))])
        fast, slow = tree_norm(g, c), tree_norm_naive(g, c)
        worst = max(worst, abs(fast - slow) / max(abs(slow), 1e-12))
    ok = worst <= 1e-9
    _line(1, "linear-time tree norm vs naive oracle", ok,
          f"200 graphs, max rel err {worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 2. tree norm runtime scales linearly in |E|
# ---------------------------------------------------------------------------

def test_c02_tree_norm_runtime_scaling():
    c = cfg(4)
    sizes = [10_000, 20_000, 40_000]
    graphs = [random_regular_graph(m // 2, 4, seed=i + 1)
              for i, m in enumerate(sizes)]
    medians = []
    for g in graphs:
        tree_norm(g, c)  # warm up caches (edge arrays, allocator)
        reps = []
        for _ in range(5):
            t0 = time.perf_counter()
            tree_norm(g, c)
            reps.append(time.perf_counter() - t0)
        medians.append(sorted(reps)[2])
    r1 = medians[1] / medians[0]
    r2 = medians[2] / medians[1]
    ok = r1 <= 2.5 and r2 <= 2.5
    _line(2, "tree norm runtime per |E| doubling", ok,
          f"medians {[f'{t*1e3:.2f}ms' for t in medians]}, ratios {r1:.2f}, {r2:.2f}")
    assert ok


# ---------------------------------------------------------------------------
# 3. subset with max tree norm is the subset with min distance
# ---------------------------------------------------------------------------

def test_c03_norm_argmax_equals_distance_argmin():
    rng = np.random.default_rng(103)
    tol = 1e-9
    conservation_worst = 0.0
    for _ in range(50):
        g = random_graph(rng, n_max=9, n_min=2)
        c = random_table_cfg(rng, int(rng.integers(1, 4)))
        k = int(rng.integers(1, g.node_count))
        full_norm = tree_norm(g, c)
        norms, dists = {}, {}
        for s in itertools.combinations(range(g.node_count), k):
            sub = induced_subgraph(g, s)
            norms[s] = tree_norm(sub, c)
            dists[s] = tmd(g, sub, c)  # full solver, not the norm shortcut
            conservation_worst = max(
                conservation_worst, abs(full_norm - dists[s] - norms[s]))
        best_norm, best_dist = max(norms.values()), min(dists.values())
        argmax = {s for s, v in norms.items() if v >= best_norm - tol}
        argmin = {s for s, v in dists.items() if v <= best_dist + tol}
        assert argmax == argmin
        assert min(argmax) == min(argmin)  # shared lexicographic tie-break
    ok = conservation_worst <= tol
    _line(3, "norm-argmax / distance-argmin equivalence and conservation", ok,
          f"50 graphs, all k-subsets, max |‖G‖ - d - ‖G[S]‖| = {conservation_worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 4. identity plan = solver optimum = three-term decomposition
# ---------------------------------------------------------------------------

def _identity_plan_cost(g, s, c):
    sub = induced_subgraph(g, s)
    pos = {v: i for i, v in enumerate(s)}
    deleted = [v for v in range(g.node_count) if v not in pos]
    terms = [tree_distance(computation_tree(g, v, c.depth),
                           computation_tree(sub, pos[v], c.depth), c)
             for v in s]
    terms += [tree_blank_distance(computation_tree(g, v, c.depth), c)
              for v in deleted]
    return math.fsum(terms)


def _three_term_cost(g, s, c):
    sub = induced_subgraph(g, s)
    pos = {v: i for i, v in enumerate(s)}
    deleted = [v for v in range(g.node_count) if v not in pos]
    term1 = math.fsum(feature_norms(g.features, c.feature_norm)[deleted])
    if c.depth == 1:
        return term1  # depth-1 trees have no child multisets
    w = c.level_weight(c.depth - 1)
    d = c.depth - 1
    term2 = math.fsum(tree_blank_distance(computation_tree(g, int(u), d), c)
                      for v in deleted for u in g.neighbors(v))
    matchings = []
    for v in s:
        ta = [computation_tree(g, int(u), d) for u in g.neighbors(v)]
        tb = [computation_tree(sub, int(u), d) for u in sub.neighbors(pos[v])]
        q = max(len(ta), len(tb))
        if q == 0:
            continue
        block = np.zeros((q, q))
        for i in range(q):
            for j in range(q):
                if i < len(ta) and j < len(tb):
                    block[i, j] = tree_distance(ta[i], tb[j], c)
                elif i < len(ta):
                    block[i, j] = tree_blank_distance(ta[i], c)
                elif j < len(tb):
                    block[i, j] = tree_blank_distance(tb[j], c)
        matchings.append(matching_value(block))
    return math.fsum([term1, w * term2, w * math.fsum(matchings)])


def test_c04_identity_plan_solver_and_decomposition_agree():
    rng = np.random.default_rng(104)
    worst = 0.0
    for _ in range(100):
        g = random_graph(rng, n_max=8, n_min=1)
        c = random_table_cfg(rng, int(rng.integers(1, 4)))
        k = int(rng.integers(0, g.node_count + 1))
        s = tuple(sorted(rng.choice(g.node_count, size=k, replace=False).tolist()))
        solver = tmd(g, induced_subgraph(g, s), c)
        ident = _identity_plan_cost(g, s, c)
        decomp = _three_term_cost(g, s, c)
        worst = max(worst, abs(solver - ident), abs(solver - decomp))
    ok = worst <= 1e-9
    _line(4, "identity plan = solver = three-term decomposition", ok,
          f"100 (G,S) pairs, max abs gap {worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 5. nested deletions accumulate additively
# ---------------------------------------------------------------------------

def test_c05_nested_deletion_additivity():
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(100):
        g = random_graph(rng, n_max=8, n_min=3)
        c = random_table_cfg(rng, int(rng.integers(1, 4)))
        n = g.node_count
        s = sorted(rng.choice(n, size=int(rng.integers(2, n)), replace=False).tolist())
        t = sorted(rng.choice(s, size=int(rng.integers(1, len(s))), replace=False).tolist())
        rest = sorted(set(s) - set(t))
        whole = tmd(g, induced_subgraph(g, rest), c)
        via = (tmd(g, induced_subgraph(g, s), c)
               + tmd(induced_subgraph(g, s), induced_subgraph(g, rest), c))
        worst = max(worst, abs(whole - via))
    ok = worst <= 1e-9
    _line(5, "nested-deletion additivity", ok,
          f"100 chains, max abs gap {worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 6. pseudometric behaviour
# ---------------------------------------------------------------------------

def test_c06_pseudometric_suite():
    rng = np.random.default_rng(106)
    sym_exact = True
    tri_worst = -math.inf
    for _ in range(100):
        c = random_table_cfg(rng, int(rng.integers(1, 4)))
        a, b, z = (random_graph(rng, n_max=7) for _ in range(3))
        dab, dba = tmd(a, b, c), tmd(b, a, c)
        sym_exact &= dab == dba
        tri_worst = max(tri_worst,
                        tmd(a, z, c) - (dab + tmd(b, z, c)))
        assert tmd(a, a, c) == 0.0
    ok = sym_exact and tri_worst <= 1e-9
    _line(6, "pseudometric suite (symmetry, triangle, identity)", ok,
          f"100 triples, symmetry exact={sym_exact}, max triangle excess {tri_worst:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 7. matching solver equals the brute-force oracle
# ---------------------------------------------------------------------------

def test_c07_matching_solver_oracle():
    rng = np.random.default_rng(107)
    mismatches = 0
    for trial in range(500):
        q = int(rng.integers(1, 9))
        if trial % 5 < 3:
            c = rng.uniform(0.0, 10.0, size=(q, q))
        else:  # integer entries: exact sums, plenty of genuine ties
            c = rng.integers(0, 6, size=(q, q)).astype(float)
        if min_cost_matching(c).total_cost != brute_force_matching(c).total_cost:
            mismatches += 1
    ok = mismatches == 0
    _line(7, "matching solver vs exhaustive oracle", ok,
          f"500 matrices up to 8x8, {mismatches} cost mismatches")
    assert ok


# ---------------------------------------------------------------------------
# 8. k-medoids quality
# ---------------------------------------------------------------------------

def _random_distance_matrix(rng):
    """Distance matrices of every flavor the package actually clusters:
    tree distances and feature baselines on random graphs, plus euclidean
    point clouds with and without planted cluster structure."""
    n = int(rng.integers(3, 11))
    style = rng.random()
    if style < 0.40:
        graphs = [random_graph(rng, n_max=6, feature_dim=2) for _ in range(n)]
        ds = make_dataset(graphs, name="acc8")
        c = cfg(int(rng.integers(1, 4)))
        return (pairwise_matrix(ds, c) if style < 0.25
                else feature_distance_matrix(ds, c))
    dim = int(rng.integers(1, 5))
    pts = rng.standard_normal((n, dim))
    if style >= 0.70:
        centers = 2.0 * rng.standard_normal((int(rng.integers(1, 4)), dim))
        pts = (centers[rng.integers(0, len(centers), size=n)]
               + 0.4 * rng.standard_normal((n, dim)))
    return DistanceMatrix(n, "euclid", 1, "const:1.0", pdist(pts))


def test_c08_kmedoids_quality():
    rng = np.random.default_rng(108)
    exact = 0
    worst = 0.0
    for _ in range(100):
        d = _random_distance_matrix(rng)
        k = int(rng.integers(1, 4))
        trace = []
        pam = kmedoids(d, k, trace=trace)
        opt = brute_force_medoids(d, k)
        assert pam.objective <= opt.objective * 1.05 + 1e-12
        assert all(b <= a + 1e-12 for a, b in zip(trace, trace[1:]))
        exact += pam.objective == opt.objective
        if opt.objective > 0:
            worst = max(worst, pam.objective / opt.objective - 1.0)
    ok = exact >= 95
    _line(8, "k-medoids matches brute force", ok,
          f"{exact}/100 exactly optimal, worst excess {worst:.2%}, "
          "objective monotone in all runs")
    assert ok


# ---------------------------------------------------------------------------
# 9. label refinement misses what the network sees
# ---------------------------------------------------------------------------

def test_c09_refinement_counterexample():
    g1, g2 = wl_counterexample_pair(5)
    dist = wl_distance(g1, g2, iterations=3)
    probe = identity_gin(feature_dim=1)
    gap = abs(float(gin_forward(probe, g1)[0]) - float(gin_forward(probe, g2)[0]))
    ok = dist == 0.0 and gap > 1e-6
    _line(9, "refinement distance 0 but readout gap positive", ok,
          f"wl distance {dist!r}, readout gap {gap:g}")
    assert ok


# ---------------------------------------------------------------------------
# 10. weighted-subsample loss gap is bounded by the prediction drift
# ---------------------------------------------------------------------------

def test_c10_subsample_loss_chain():
    ds = clustered_dataset(40, 5, seed=0)
    labels = [float(g.label) for g in ds.graphs]
    c = TmdConfig(depth=3, weights=const_weights(1.0))
    dm = pairwise_matrix(ds, c)
    sel = kmedoids(dm, 5)
    kappa = nearest_medoid(dm, sel.indices)
    hyps = [random_gin(s, feature_dim=3, hidden=8, depth=3, eta=1.0)
            for s in range(20)]

    n = len(ds)
    passes = 0
    worst = -math.inf
    for h in hyps:  # direct re-derivation, independent of finite_erm_check
        preds = np.array([float(gin_forward(h, g)[0]) for g in ds])
        losses = np.minimum(np.abs(preds - np.asarray(labels)), 10.0)
        gap = abs(math.fsum(losses[kappa]) / n - math.fsum(losses) / n)
        rhs = math.fsum(abs(preds[kappa[i]] - preds[i]) for i in range(n)) / n
        worst = max(worst, gap - rhs)
        passes += gap <= rhs + 1e-9

    report = finite_erm_check(ds, labels, hyps, selection=sel, distances=dm)
    ok = passes == 20 and report.chain_ok
    _line(10, "weighted-vs-full loss gap within prediction drift", ok,
          f"{passes}/20 models, max excess {worst:.2e}, "
          f"report excess {report.chain_max_excess:.2e}")
    assert ok


# ---------------------------------------------------------------------------
# 11. preset-conditional stability and finite-sample bound sweep
# ---------------------------------------------------------------------------

def test_c11_preset_conditional_sweep(tmp_path, capsys):
    outputs = {}
    codes = {}
    for mode, extra in (("stability", ["--pairs", "100"]),
                        ("erm-graphs", ["--hypotheses", "20", "--k", "5"]),
                        ("erm-nodes", ["--hypotheses", "20", "--frac", "0.5"])):
        out = tmp_path / f"{mode}.json"
        code = cli_main(["verify", "--mode", mode, "--synthetic", "40",
                         "--depth", "3", "--hidden", "8", "--eta", "1.0",
                         "--seed", "0", "--json", "--out", str(out)] + extra)
        capsys.readouterr()
        codes[mode] = code
        assert code in (0, 4), f"{mode} must exit 0 or the preset-caveat code"
        assert out.exists(), f"{mode} must emit its report even on failure"
        outputs[mode] = json.loads(out.read_text())
        assert len(outputs[mode]["reports"]) == 4  # full sweep ran

    stab = outputs["stability"]["reports"]
    ratio_ok = any(r["violations"] == 0 and r["max_ratio"] <= 1.0 for r in stab)
    erm_ok = all(any(r["satisfied"] for r in outputs[m]["reports"])
                 for m in ("erm-graphs", "erm-nodes"))
    chain_ok = all(outputs[m]["chain_ok"] for m in ("erm-graphs", "erm-nodes"))
    ok = ratio_ok and erm_ok and chain_ok and all(c == 0 for c in codes.values())
    best = min(r["max_ratio"] for r in stab)
    _line(11, "stability and finite-sample sweep", ok,
          f"exit codes {codes}, best max ratio {best:.4f}, "
          f"bound satisfied in both modes={erm_ok}")
    assert ok


# ---------------------------------------------------------------------------
# 12. cache and CLI contract
# ---------------------------------------------------------------------------

def test_c12_cache_and_cli_contract(tmp_path, capsys):
    ds = clustered_dataset(10, 5, seed=0)
    ds_path = tmp_path / "ds.jsonl"
    save_jsonl(ds, ds_path)
    cache = str(tmp_path / "d.tmdc")
    c = cfg(2)

    calls = []

    def compute():
        calls.append(1)
        return pairwise_matrix(ds, c)

    dm1, _ = load_or_compute(cache, ds, "tmd", c, compute)
    dm2, recomputed = load_or_compute(cache, ds, "tmd", c, compute)
    bit_exact = dm1.values.tobytes() == dm2.values.tobytes()
    hit_count = len(calls)

    run = lambda argv: cli_main(argv)
    code_ok = run(["dist", "--dataset", str(ds_path), "--cache",
                   str(tmp_path / "cli.tmdc"), "--depth", "2"]) == 0
    code_config = run(["dist", "--dataset", str(ds_path), "--cache", cache,
                       "--weights", "pascal"]) == 1
    code_io = run(["treenorm", "--dataset", str(tmp_path / "missing.jsonl")]) == 2
    code_cache = run(["dist", "--dataset", str(ds_path), "--cache", cache,
                      "--depth", "4"]) == 3
    capsys.readouterr()

    ok = (bit_exact and not recomputed and hit_count == 1
          and code_ok and code_config and code_io and code_cache)
    _line(12, "cache round trip and CLI exit codes", ok,
          f"bit-exact={bit_exact}, recompute count on hit={hit_count - 1}, "
          "codes 0/1/2/3 exercised (4 and 70 wiring covered in test_cache_cli)")
    assert ok
