import itertools
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nmd.clustering import (ClusterConfig, FrequencyPoint, ModeCluster, assemble_imfs, band_of,
                            circle_similarity, division_points, frequency_points,
                            merge_clusters, select_primary)
from nmd.errors import ClusteringError
from nmd.fnn import init_model, load_dft_oracle, predict
from nmd.signal import synthesize


def pts(*pairs):
    return [FrequencyPoint(i, float(f), float(e)) for i, (f, e) in enumerate(pairs)]


# ── brute-force oracle ───────────────────────────────────
# Written from the textual rules with exact rational arithmetic and no
# shared helpers with the implementation.


def oracle_primary(points, p):
    def beats(a, b):
        if a.energy != b.energy:
            return a.energy > b.energy
        if a.frequency != b.frequency:
            return a.frequency < b.frequency
        return a.unit_index < b.unit_index

    rank = {a.unit_index: sum(beats(b, a) for b in points) for a in points}
    ordered = sorted(points, key=lambda a: rank[a.unit_index])
    total = sum(Fraction(a.energy) for a in points)
    for m in range(1, len(points) + 1):
        head = ordered[:m]
        if sum(Fraction(a.energy) for a in head) > Fraction(p) * total:
            return sorted(head, key=lambda a: (a.frequency, a.unit_index))
    return sorted(ordered, key=lambda a: (a.frequency, a.unit_index))


def oracle_circle(members, primaries, r):
    intervals = [(m.frequency - r, m.frequency + r) for m in members]
    return {q.unit_index for q in primaries if any(lo <= q.frequency <= hi for lo, hi in intervals)}


def oracle_merge(primaries, r, threshold):
    energy = {q.unit_index: Fraction(q.energy) for q in primaries}
    groups = [[primaries[0]]]
    for q in primaries[1:]:
        a = oracle_circle(groups[-1], primaries, r)
        b = oracle_circle([q], primaries, r)
        both = sum(energy[i] for i in a & b)
        s_ab = both / sum(energy[i] for i in a)
        s_ba = both / sum(energy[i] for i in b)
        if s_ab > threshold or s_ba > threshold:
            groups[-1].append(q)
        else:
            groups.append([q])
    return groups


def oracle_edges(groups, nyquist):
    edges = [0.0]
    for left, right in zip(groups, groups[1:]):
        edges.append((left[-1].frequency + right[0].frequency) / 2)
    edges.append(nyquist)
    return edges


def random_configuration(rng):
    m = int(rng.integers(1, 13))
    freqs = rng.integers(1, 41, m) / 2
    energies = rng.integers(0, 9, m) / 8
    if energies.sum() == 0:
        energies[rng.integers(m)] = 1.0
    points = [FrequencyPoint(i, float(f), float(e)) for i, (f, e) in enumerate(zip(freqs, energies))]
    p = float(rng.integers(1, 16)) / 16
    config = ClusterConfig(p, float(rng.choice([0.25, 0.5, 1.0, 2.5, 4.0])),
                           float(rng.choice([0.5, 0.75, 0.8, 1.0])))
    return points, config


def test_clustering_matches_brute_force_oracle():
    rng = np.random.default_rng(2024)
    checked = 0
    for _ in range(1500):
        points, cfg = random_configuration(rng)
        expected = oracle_primary(points, cfg.energy_threshold)
        primaries = select_primary(points, cfg.energy_threshold)
        assert [q.unit_index for q in primaries] == [q.unit_index for q in expected]

        groups = oracle_merge(expected, cfg.radius, Fraction(cfg.merge_threshold))
        clusters = merge_clusters(primaries, cfg)
        assert [[q.unit_index for q in c.members] for c in clusters] == \
            [[q.unit_index for q in g] for g in groups]

        edges = oracle_edges(groups, 64.0)
        if all(a < b for a, b in zip(edges, edges[1:])):
            assert division_points(clusters, 64.0).tolist() == edges
        else:
            with pytest.raises(ClusteringError):
                division_points(clusters, 64.0)
        checked += 1
    assert checked >= 1000


# ── select_primary ───────────────────────────────────────


def test_select_primary_examples():
    chosen = select_primary(pts((1, 0.5), (2, 0.3), (3, 0.2)), 0.7)
    assert [q.energy for q in chosen] == [0.5, 0.3]
    assert len(select_primary(pts((5, 1.0)), 0.99)) == 1
    chosen = select_primary(pts((1, 0.5), (2, 0.3), (3, 0.1), (4, 0.06), (5, 0.04)), 0.9)
    assert len(chosen) == 4


def test_select_primary_tie_breaks():
    chosen = select_primary(pts((9, 1.0), (3, 1.0), (3, 1.0), (1, 0.5)), 0.25)
    assert [(q.unit_index, q.frequency) for q in chosen] == [(1, 3.0)]
    chosen = select_primary(pts((9, 1.0), (3, 1.0), (3, 1.0), (1, 0.5)), 0.5)
    assert [q.unit_index for q in chosen] == [1, 2]


def test_select_primary_all_zero():
    with pytest.raises(ClusteringError):
        select_primary(pts((1, 0.0), (2, 0.0)), 0.5)


energy_lists = st.lists(st.tuples(st.integers(1, 60), st.integers(0, 64)), min_size=1, max_size=12) \
    .filter(lambda xs: any(e > 0 for _, e in xs))


@settings(max_examples=100, deadline=None)
@given(energy_lists, st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_primary_sets_are_nested_in_p(pairs, p1, p2):
    points = pts(*pairs)
    lo, hi = sorted((p1, p2))
    small = {q.unit_index for q in select_primary(points, lo)}
    large = {q.unit_index for q in select_primary(points, hi)}
    assert small <= large


@settings(max_examples=100, deadline=None)
@given(energy_lists, st.sampled_from([0.5, 0.8, 0.95]), st.sampled_from([2.0, 0.25, 1024.0]))
def test_scale_invariance(pairs, p, scale):
    points = pts(*pairs)
    scaled = [FrequencyPoint(q.unit_index, q.frequency, q.energy * scale) for q in points]
    cfg = ClusterConfig(p)
    a = select_primary(points, p)
    b = select_primary(scaled, p)
    assert [q.unit_index for q in a] == [q.unit_index for q in b]
    ca, cb = merge_clusters(a, cfg), merge_clusters(b, cfg)
    assert [[q.unit_index for q in c.members] for c in ca] == [[q.unit_index for q in c.members] for c in cb]


# ── circle similarity and merging ────────────────────────


def test_similarity_examples():
    prim = pts((10, 1.0), (11, 3.0))
    s = circle_similarity(ModeCluster((prim[0],)), ModeCluster((prim[1],)), prim, 2.0)
    assert s == (1.0, 1.0)
    prim = pts((10, 1.0), (20, 3.0))
    s = circle_similarity(ModeCluster((prim[0],)), ModeCluster((prim[1],)), prim, 2.0)
    assert s == (0.0, 0.0)
    c = ModeCluster((prim[0],))
    assert circle_similarity(c, c, prim, 2.0) == (1.0, 1.0)


def test_similarity_partial_overlap():
    prim = pts((10, 1.0), (12, 1.0), (14, 2.0))
    s_ij, s_ji = circle_similarity(ModeCluster((prim[0],)), ModeCluster((prim[2],)), prim, 2.5)
    # C_10 holds {10, 12}; C_14 holds {12, 14}; overlap is {12}
    assert (s_ij, s_ji) == (0.5, pytest.approx(1 / 3))


def test_zero_weight_circle():
    prim = pts((10, 0.0), (30, 1.0))
    with pytest.raises(ClusteringError):
        circle_similarity(ModeCluster((prim[0],)), ModeCluster((prim[1],)), prim, 1.0)


def test_merge_examples():
    assert len(merge_clusters(pts((10, 1), (11, 1)), ClusterConfig(radius=2.5))) == 1
    clusters = merge_clusters(pts((2, 1), (24, 0.25), (100, 0.06)), ClusterConfig())
    assert [c.lo for c in clusters] == [2, 24, 100]
    assert len(merge_clusters(pts((7, 1)), ClusterConfig())) == 1
    with pytest.raises(ClusteringError):
        merge_clusters([], ClusterConfig())


def test_merge_weight_and_interval():
    clusters = merge_clusters(pts((10, 1), (11, 2), (12, 0.5)), ClusterConfig(radius=1.5))
    assert len(clusters) == 1
    assert clusters[0].weight == 3.5
    assert (clusters[0].lo, clusters[0].hi) == (10, 12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 500), min_size=1, max_size=12, unique=True))
def test_tiny_radius_gives_one_cluster_per_primary(freqs):
    prim = sorted(pts(*[(f, 1.0) for f in freqs]), key=lambda q: q.frequency)
    clusters = merge_clusters(prim, ClusterConfig(radius=1e-6))
    assert len(clusters) == len(prim)


@settings(max_examples=60, deadline=None)
@given(energy_lists, st.sampled_from([0.5, 2.5, 6.0]))
def test_clusters_cover_primaries_in_order(pairs, r):
    prim = select_primary(pts(*pairs), 0.9)
    clusters = merge_clusters(prim, ClusterConfig(radius=r))
    flat = [q for c in clusters for q in c.members]
    assert flat == prim


def test_config_validation():
    for kwargs in ({"energy_threshold": 1.5}, {"energy_threshold": 0.0}, {"radius": 0},
                   {"merge_threshold": 0}, {"merge_threshold": 1.2}):
        with pytest.raises(ValueError):
            ClusterConfig(**kwargs)


# ── division points and bands ────────────────────────────


def test_division_point_examples():
    a = ModeCluster(tuple(pts((10, 1), (12, 1))))
    b = ModeCluster((FrequencyPoint(5, 20.0, 1.0),))
    assert division_points([a, b], 64).tolist() == [0, 16, 64]
    assert division_points([a], 64).tolist() == [0, 64]
    singles = [ModeCluster((FrequencyPoint(i, f, 1.0),)) for i, f in enumerate([2, 24, 100])]
    assert division_points(singles, 512).tolist() == [0, 13, 62, 512]


def test_band_of_half_open():
    edges = [0, 13, 62, 512]
    np.testing.assert_array_equal(band_of([0, 12.9, 13, 61.99, 62, 511, 512, 600], edges),
                                  [0, 0, 1, 1, 2, 2, 2, 2])


# ── assembly ─────────────────────────────────────────────


def test_oracle_xp_bands_give_the_three_tones():
    sig = synthesize("xp", 1024)
    model = load_dft_oracle(init_model(1024, unit_cap=1024), sig)
    result = assemble_imfs(model, sig.times, [0, 13, 62, 512])
    t = sig.times
    expected = [np.cos(200 * np.pi * t) / 16, 0.25 * np.cos(48 * np.pi * t), np.cos(4 * np.pi * t)]
    assert result.imfs.shape == (3, 1024)
    for imf, ref in zip(result.imfs, expected):
        assert np.max(np.abs(imf - ref)) <= 1e-6
    np.testing.assert_allclose(result.dominant_frequencies, [100, 24, 2])
    assert result.bands == [(62.0, 512.0), (13.0, 62.0), (0.0, 13.0)]


def test_single_band_is_whole_periodic_part():
    model = init_model(64, (4, 3), unit_cap=16, seed=3)
    t = np.arange(64) / 64
    result = assemble_imfs(model, t, [0, 32])
    assert result.imfs.shape[0] == 1
    np.testing.assert_allclose(result.imfs[0] + result.residual, predict(model, t), atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.lists(st.floats(0.5, 31.5), min_size=0, max_size=4, unique=True))
def test_partition_identity(seed, cuts):
    rng = np.random.default_rng(seed)
    model = init_model(64, (4, 3), unit_cap=32, seed=seed)
    params = {k: rng.normal(0, 0.3, np.shape(v)) for k, v in model.parameters().items()}
    params["bank.omega"] = 2 * np.pi * rng.uniform(0, 40, 32)
    model = model.with_parameters(params)
    edges = [0.0] + sorted(cuts) + [32.0]
    t = np.linspace(0, 1, 64)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = assemble_imfs(model, t, edges)
    assert np.max(np.abs(result.reconstruction - predict(model, t))) <= 1e-9
    members = np.sort(np.concatenate(result.unit_bands)) if result.unit_bands else np.array([])
    np.testing.assert_array_equal(members, np.arange(32))


def test_empty_band_warns_and_is_dropped():
    model = init_model(64, (4, 3), unit_cap=4, seed=0)  # units at 1, 1, 2, 2 cycles
    with pytest.warns(UserWarning, match="holds no units"):
        result = assemble_imfs(model, np.arange(64) / 64, [0, 1.5, 10, 32])
    assert result.imfs.shape[0] == 2


def test_frequency_points_follow_model():
    model = init_model(32, (4, 3), unit_cap=6, seed=0)
    points = frequency_points(model, np.arange(32) / 32)
    assert [p.frequency for p in points] == [1, 1, 2, 2, 3, 3]
    assert all(p.energy >= 0 for p in points)


def test_negative_energy_rejected():
    with pytest.raises(ClusteringError):
        FrequencyPoint(0, 1.0, -1e-3)


def test_oracle_is_exhaustive_for_prefixes():
    # the oracle's prefix rule agrees with a search over every subset size
    points = pts((1, 0.25), (2, 0.5), (3, 0.125), (4, 0.125))
    for p in (0.1, 0.5, 0.75, 0.8, 0.99):
        best = min((c for m in range(1, 5) for c in itertools.combinations(points, m)
                    if sum(q.energy for q in c) > p), key=len)
        assert len(oracle_primary(points, p)) == len(best)
