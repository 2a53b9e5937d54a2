import numpy as np
import pytest

from videocutout import (
    PyramidClassifier,
    build_interframe_graph,
    build_pyramid_model,
    coarse_mask,
    combine_confidence,
    dynamic_confidence,
    geodesic_distance_field,
    rasterize_confidence,
    slic_segment,
    static_confidence,
)
from videocutout.confidence import InterframeGraph, PyramidModel, quantize_colors
from videocutout.superpixel import SuperpixelMap


# --------------------------------------------------------------------------
# pyramid model construction
# --------------------------------------------------------------------------

def test_build_all_foreground_level0():
    frame = np.full((2, 2, 3), 10, np.uint8)
    mask = np.ones((2, 2), np.uint8)
    model = build_pyramid_model([frame], [mask], levels=0, bins_per_channel=32)
    assert model.fg[0].sum() == 4
    assert model.bg[0].sum() == 0


def test_build_level1_one_pixel_per_cell():
    frame = np.full((2, 2, 3), 10, np.uint8)
    mask = np.ones((2, 2), np.uint8)
    model = build_pyramid_model([frame], [mask], levels=1, bins_per_channel=32)
    per_cell = model.fg[1].sum(axis=2)
    assert per_cell.shape == (2, 2)
    assert (per_cell == 1).all()


def test_build_mixed_counts():
    frame = np.full((2, 2, 3), 10, np.uint8)
    mask = np.ones((2, 2), np.uint8)
    mask[1, 1] = 0
    model = build_pyramid_model([frame], [mask], levels=0, bins_per_channel=32)
    assert model.fg[0].sum() == 3
    assert model.bg[0].sum() == 1


def test_total_counts_per_level(rng):
    frame = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
    mask = rng.integers(0, 2, (8, 8)).astype(np.uint8)
    model = build_pyramid_model([frame], [mask], levels=2, bins_per_channel=8)
    for l in range(3):
        assert model.fg[l].sum() + model.bg[l].sum() == 64


# --------------------------------------------------------------------------
# static confidence
# --------------------------------------------------------------------------

def _one_superpixel_map(frame):
    return SuperpixelMap.from_ids(frame, np.zeros(frame.shape[:2], np.int32))


def test_static_pure_foreground_bin():
    frame = np.full((4, 4, 3), 10, np.uint8)
    model = build_pyramid_model([frame], [np.ones((4, 4), np.uint8)], 2, 32)
    conf = static_confidence(model, _one_superpixel_map(frame))
    assert conf[0] == 1.0


def test_static_unseen_bin_is_half():
    frame = np.full((4, 4, 3), 10, np.uint8)
    model = build_pyramid_model([frame], [np.ones((4, 4), np.uint8)], 2, 32)
    other = np.full((4, 4, 3), 200, np.uint8)
    conf = static_confidence(model, _one_superpixel_map(other))
    assert conf[0] == 0.5


def test_static_hand_built_ratio():
    # single superpixel, centroid in cell (0,0) of the level-1 grid;
    # hand-evaluated term 3/(3+1) = 0.75
    frame = np.full((4, 4, 3), 10, np.uint8)
    spmap = _one_superpixel_map(frame)
    bins = 32
    n_bins = bins ** 3
    b = int(quantize_colors(np.array([[10.0, 10.0, 10.0]]), bins)[0])
    fg = {0: np.zeros((1, 1, n_bins), np.int64), 1: np.zeros((2, 2, n_bins), np.int64)}
    bg = {0: np.zeros((1, 1, n_bins), np.int64), 1: np.zeros((2, 2, n_bins), np.int64)}
    fg[1][0, 0, b] = 3
    bg[1][0, 0, b] = 1
    model = PyramidModel(1, bins, 4, 4, fg, bg)
    assert static_confidence(model, spmap)[0] == pytest.approx(0.75)


def test_static_in_unit_interval(rng):
    frame = rng.integers(0, 256, (16, 16, 3)).astype(np.uint8)
    mask = rng.integers(0, 2, (16, 16)).astype(np.uint8)
    model = build_pyramid_model([frame], [mask], 3, 16)
    spmap = slic_segment(rng.integers(0, 256, (16, 16, 3)).astype(np.uint8), 6)
    conf = static_confidence(model, spmap)
    assert ((conf >= 0) & (conf <= 1)).all()


def test_single_level_single_cell_reduces_to_global_histogram(rng):
    # independent oracle: plain global color-histogram ratio per bin
    frame = rng.integers(0, 256, (20, 20, 3)).astype(np.uint8)
    mask = rng.integers(0, 2, (20, 20)).astype(np.uint8)
    model = build_pyramid_model([frame], [mask], levels=0, bins_per_channel=8)

    fg_hist, bg_hist = {}, {}
    for (r, g, b), lab in zip(frame.reshape(-1, 3).tolist(), mask.ravel().tolist()):
        key = (r // 32, g // 32, b // 32)
        (fg_hist if lab else bg_hist)[key] = (fg_hist if lab else bg_hist).get(key, 0) + 1

    spmap = slic_segment(rng.integers(0, 256, (20, 20, 3)).astype(np.uint8), 8)
    conf = static_confidence(model, spmap)
    for i in range(spmap.count):
        mc = spmap.mean_colors[i]
        key = tuple(int(c // 32) for c in mc)
        f = fg_hist.get(key, 0)
        b = bg_hist.get(key, 0)
        expect = 0.5 if f + b == 0 else f / (f + b)
        assert conf[i] == pytest.approx(expect)


def test_sparse_levels_match_dense(rng, monkeypatch):
    # deep pyramid levels switch to sparse storage; scores must not change
    import videocutout.confidence as cf

    frame = rng.integers(0, 256, (20, 20, 3)).astype(np.uint8)
    mask = rng.integers(0, 2, (20, 20)).astype(np.uint8)
    dense = build_pyramid_model([frame], [mask], 2, 16)
    monkeypatch.setattr(cf, "_DENSE_LEVEL_LIMIT", 1)
    sparse = cf.build_pyramid_model([frame], [mask], 2, 16)
    assert isinstance(sparse.fg[0], dict)
    spmap = slic_segment(rng.integers(0, 256, (20, 20, 3)).astype(np.uint8), 8)
    assert np.array_equal(static_confidence(dense, spmap),
                          static_confidence(sparse, spmap))


def test_pyramid_classifier_estimator(rng):
    frame = rng.integers(0, 256, (12, 12, 3)).astype(np.uint8)
    mask = rng.integers(0, 2, (12, 12)).astype(np.uint8)
    clf = PyramidClassifier(levels=1, bins_per_channel=16)
    assert clf.get_params() == {"levels": 1, "bins_per_channel": 16}
    with pytest.raises(RuntimeError):
        clf.predict_proba(_one_superpixel_map(frame))
    clf.fit([frame], [mask])
    probs = clf.predict_proba(_one_superpixel_map(frame))
    assert probs.shape == (1,)


# --------------------------------------------------------------------------
# interframe graph
# --------------------------------------------------------------------------

def _two_half_map(left_color, right_color, h=6, w=8):
    frame = np.zeros((h, w, 3), np.uint8)
    frame[:, :w // 2] = left_color
    frame[:, w // 2:] = right_color
    ids = np.zeros((h, w), np.int32)
    ids[:, w // 2:] = 1
    return SuperpixelMap.from_ids(frame, ids)


def test_graph_identical_frames_zero_temporal_edges():
    m = _two_half_map((10, 10, 10), (200, 200, 200))
    graph = build_interframe_graph(m, m)
    # each previous superpixel connects to its own footprint twin at weight 0
    for sp in range(2):
        weights = dict(graph.adjacency[sp])
        assert weights.get(graph.cur_node(sp)) == 0.0


def test_graph_345_weight():
    a = _two_half_map((0, 0, 0), (0, 0, 0))
    b = _two_half_map((30, 40, 0), (30, 40, 0))
    graph = build_interframe_graph(a, b)
    assert dict(graph.adjacency[0])[graph.cur_node(0)] == pytest.approx(50.0)


def test_graph_no_edge_between_disjoint():
    frame = np.zeros((6, 9, 3), np.uint8)
    ids = np.zeros((6, 9), np.int32)
    ids[:, 3:6] = 1
    ids[:, 6:] = 2
    m = SuperpixelMap.from_ids(frame, ids)
    graph = build_interframe_graph(m, m)
    neighbors0 = {v for v, _ in graph.adjacency[0]}
    assert 2 not in neighbors0  # 0 and 2 are not spatially adjacent


# --------------------------------------------------------------------------
# geodesic distances
# --------------------------------------------------------------------------

def bellman_ford(adjacency, sources):
    n = len(adjacency)
    dist = [float("inf")] * n
    for s in sources:
        dist[s] = 0.0
    for _ in range(n):
        changed = False
        for u in range(n):
            for v, w in adjacency[u]:
                if dist[u] + w < dist[v]:
                    dist[v] = dist[u] + w
                    changed = True
        if not changed:
            break
    return dist


def random_graph(rng, n):
    adjacency = [[] for _ in range(n)]
    for _ in range(rng.integers(n, 3 * n)):
        a, b = rng.integers(0, n, 2)
        if a == b:
            continue
        w = float(rng.uniform(0, 10))
        adjacency[a].append((int(b), w))
        adjacency[b].append((int(a), w))
    return adjacency


def test_geodesic_source_zero_and_path():
    adjacency = [[(1, 1.0)], [(0, 1.0), (2, 2.0)], [(1, 2.0)]]
    d = geodesic_distance_field(adjacency, [0])
    assert d[0] == 0.0
    assert d[2] == pytest.approx(3.0)


def test_geodesic_empty_sources():
    with pytest.raises(ValueError):
        geodesic_distance_field([[]], [])


def test_geodesic_matches_bellman_ford(rng):
    for _ in range(30):
        n = int(rng.integers(2, 13))
        adjacency = random_graph(rng, n)
        k = int(rng.integers(1, n))
        sources = rng.choice(n, size=k, replace=False).tolist()
        ours = geodesic_distance_field(adjacency, sources)
        oracle = bellman_ford(adjacency, sources)
        assert np.allclose(ours, oracle)


def test_geodesic_edge_lipschitz(rng):
    adjacency = random_graph(rng, 10)
    d = geodesic_distance_field(adjacency, [0])
    for u in range(10):
        for v, w in adjacency[u]:
            if np.isfinite(d[u]) and np.isfinite(d[v]):
                assert abs(d[u] - d[v]) <= w + 1e-9


# --------------------------------------------------------------------------
# dynamic confidence
# --------------------------------------------------------------------------

def _chain_graph(w_f, w_b):
    # prev nodes: 0 (foreground), 1 (background); cur node: 2
    adjacency = [[(2, w_f)], [(2, w_b)], [(0, w_f), (1, w_b)]]
    return InterframeGraph(2, 1, adjacency)


def test_dynamic_chain_hand_evaluated():
    graph = _chain_graph(1.0, 3.0)
    conf = dynamic_confidence(graph, np.array([1, 0]))
    assert conf[0] == pytest.approx(3.0 / 4.0)


def test_dynamic_zero_distance_and_symmetry():
    g0 = _chain_graph(0.0, 5.0)
    assert dynamic_confidence(g0, np.array([1, 0]))[0] == 1.0
    sym = _chain_graph(2.0, 2.0)
    assert dynamic_confidence(sym, np.array([1, 0]))[0] == 0.5


def test_dynamic_degenerate_label_sets():
    graph = _chain_graph(1.0, 1.0)
    assert (dynamic_confidence(graph, np.array([0, 0])) == 0).all()
    assert (dynamic_confidence(graph, np.array([1, 1])) == 1).all()


def test_dynamic_complement_symmetry(rng):
    for _ in range(20):
        w1, w2 = rng.uniform(0.1, 5, 2)
        graph = _chain_graph(float(w1), float(w2))
        a = dynamic_confidence(graph, np.array([1, 0]))[0]
        b = dynamic_confidence(graph, np.array([0, 1]))[0]
        assert a + b == pytest.approx(1.0)


# --------------------------------------------------------------------------
# combination and coarse mask
# --------------------------------------------------------------------------

def test_combine_examples():
    assert combine_confidence([1.0], [1.0])[0] == 1.0
    assert combine_confidence([0.7], [0.0])[0] == 0.0
    assert combine_confidence([0.8], [0.5])[0] == pytest.approx(0.4)
    with pytest.raises(ValueError):
        combine_confidence([0.5, 0.5], [0.5])


def test_combine_commutative_monotone(rng):
    a = rng.uniform(0, 1, 10)
    b = rng.uniform(0, 1, 10)
    assert np.allclose(combine_confidence(a, b), combine_confidence(b, a))
    b2 = np.minimum(1, b + 0.1)
    assert (combine_confidence(a, b2) >= combine_confidence(a, b)).all()


def test_coarse_mask_cases():
    assert coarse_mask(np.full((4, 4), 0.7)).sum() == 0  # strict inequality
    half = np.zeros((4, 4))
    half[:2] = 1.0
    assert np.array_equal(coarse_mask(half), (half == 1).astype(np.uint8))
    vals = np.zeros((3, 3))
    vals[0] = 0.2
    vals[1] = 0.4
    vals[2] = 0.9  # mean 0.5
    assert np.array_equal(coarse_mask(vals)[2], np.ones(3, np.uint8))
    assert coarse_mask(vals)[:2].sum() == 0


def test_coarse_mask_affine_invariance(rng):
    vals = rng.uniform(0, 1, (6, 6))
    a = coarse_mask(vals)
    b = coarse_mask(2.5 * vals + 3.0)
    assert np.array_equal(a, b)


def test_rasterize(rng):
    frame = rng.integers(0, 256, (10, 10, 3)).astype(np.uint8)
    spmap = slic_segment(frame, 4)
    vals = rng.uniform(0, 1, spmap.count)
    img = rasterize_confidence(spmap, vals)
    for i in range(spmap.count):
        assert (img[spmap.ids == i] == vals[i]).all()
