import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.metrics import adjusted_rand_score

from civicrank.cluster import (AssignmentPlan, ClusterModel, KMeansClusterer,
                               assign_to_respondents, kmeans,
                               largest_remainder_allocation, select_k,
                               standardize, stratified_sample)
from civicrank.errors import ValidationError


def _pad(points, width=12):
    arr = np.zeros((len(points), width))
    arr[:, :len(points[0])] = points
    return arr


def make_blobs(centers, per_blob, std, seed, width=12):
    rng = np.random.RandomState(seed)
    rows, labels = [], []
    for label, center in enumerate(centers):
        for _ in range(per_blob):
            point = np.zeros(width)
            point[:len(center)] = center + rng.randn(len(center)) * std
            rows.append(point)
            labels.append(label)
    ids = [f"a{i:03d}" for i in range(len(rows))]
    return ids, np.array(rows), np.array(labels)


# ------------------------------------------------------------- standardize

def test_standardize_hand_example():
    std = standardize(["a", "b"], [[1.0], [3.0]])
    assert std.values[:, 0].tolist() == [-1.0, 1.0]


def test_standardize_constant_column():
    std = standardize(["a", "b", "c"], [[5.0], [5.0], [5.0]])
    assert std.values[:, 0].tolist() == [0.0, 0.0, 0.0]
    assert std.stds[0] == 0.0


def test_standardize_idempotent():
    rng = np.random.RandomState(0)
    X = rng.randn(20, 3)
    once = standardize(list("abcdefghijklmnopqrst"), X)
    twice = standardize(once.rows, once.values)
    assert np.allclose(once.values, twice.values, atol=1e-9)


def test_standardize_too_few_rows():
    with pytest.raises(ValidationError, match="too_few_rows"):
        standardize(["a"], [[1.0]])


# ------------------------------------------------------------------ kmeans

def test_kmeans_well_separated():
    points = _pad([[0, 0], [0, 1], [10, 10], [10, 11]], width=2)
    std = standardize(list("abcd"), points)
    model = kmeans(std, 2, seed=0)
    a = model.assignments
    assert a["a"] == a["b"] and a["c"] == a["d"] and a["a"] != a["c"]


def test_kmeans_k_equals_n():
    points = _pad([[0, 0], [5, 0], [0, 5]], width=2)
    std = standardize(list("abc"), points)
    model = kmeans(std, 3, seed=1)
    assert sorted(model.assignments.values()) == [0, 1, 2]
    assert model.inertia == pytest.approx(0.0)


def test_kmeans_k_too_large():
    std = standardize(list("ab"), [[0.0], [1.0]])
    with pytest.raises(ValidationError, match="k_too_large"):
        kmeans(std, 3, seed=0)


def test_kmeans_blobs_ari():
    ids, X, truth = make_blobs([[0, 0], [20, 0], [0, 20]], 30, 0.1, seed=3)
    std = standardize(ids, X)
    model = kmeans(std, 3, seed=0)
    labels = [model.assignments[i] for i in ids]
    assert adjusted_rand_score(truth, labels) >= 0.99


def test_kmeans_deterministic():
    ids, X, _ = make_blobs([[0, 0], [8, 8]], 15, 0.5, seed=5)
    std = standardize(ids, X)
    m1 = kmeans(std, 2, seed=42)
    m2 = kmeans(std, 2, seed=42)
    assert m1.assignments == m2.assignments
    assert np.array_equal(m1.centroids, m2.centroids)


def test_kmeans_inertia_monotone():
    rng = np.random.RandomState(11)
    X = rng.randn(60, 4)
    std = standardize([f"a{i}" for i in range(60)], X)
    trace = []
    kmeans(std, 5, seed=7, inertia_trace=trace)
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))
    assert len(trace) >= 1


def test_estimator_api():
    ids, X, _ = make_blobs([[0, 0], [10, 10]], 10, 0.2, seed=1)
    est = KMeansClusterer(k=2, seed=0)
    assert est.get_params()["k"] == 2
    est.set_params(k=2).fit(ids, X)
    preds = est.predict(X[:5])
    labels = [est.model_.assignments[i] for i in ids[:5]]
    assert preds.tolist() == labels


# ---------------------------------------------------------------- select_k

def test_select_k_three_blobs():
    ids, X, _ = make_blobs([[0, 0], [20, 0], [0, 20]], 30, 0.1, seed=3)
    std = standardize(ids, X)
    assert select_k(std, 2, 6, seed=0) == 3


def test_select_k_two_blobs():
    ids, X, _ = make_blobs([[0, 0], [15, 15]], 20, 0.1, seed=2)
    std = standardize(ids, X)
    assert select_k(std, 2, 4, seed=0) == 2


def test_select_k_singleton_range():
    ids, X, _ = make_blobs([[0, 0], [15, 15]], 20, 0.5, seed=2)
    std = standardize(ids, X)
    assert select_k(std, 4, 4, seed=0) == 4


def test_select_k_bad_range():
    ids, X, _ = make_blobs([[0, 0]], 5, 0.5, seed=2)
    std = standardize(ids, X)
    with pytest.raises(ValidationError):
        select_k(std, 1, 3, seed=0)


# ---------------------------------------------------------------- sampling

def _model_with_sizes(sizes):
    assignments = {}
    idx = 0
    for c, size in enumerate(sizes):
        for _ in range(size):
            assignments[f"a{idx:04d}"] = c
            idx += 1
    return ClusterModel(k=len(sizes), centroids=np.zeros((len(sizes), 12)),
                        assignments=assignments, inertia=0.0, seed=0)


def test_allocation_hand_example():
    assert largest_remainder_allocation([50, 30, 20], 10, 2) == [5, 3, 2]


def test_allocation_minimum_rule():
    assert largest_remainder_allocation([90, 5, 5], 10, 2) == [6, 2, 2]


def test_sample_full_corpus():
    model = _model_with_sizes([4, 3, 3])
    sample = stratified_sample(model, 10, 1, seed=0)
    assert sorted(sample.all_ids()) == sorted(model.assignments)


def test_sample_infeasible_minimum():
    model = _model_with_sizes([5, 5, 5])
    with pytest.raises(ValidationError, match="infeasible_minimum"):
        stratified_sample(model, 5, 2, seed=0)


def test_sample_members_belong_to_cluster():
    model = _model_with_sizes([20, 10, 5])
    sample = stratified_sample(model, 12, 2, seed=3)
    for c, ids in sample.per_cluster.items():
        for article_id in ids:
            assert model.assignments[article_id] == c
    assert len(sample.all_ids()) == len(set(sample.all_ids())) == 12


@given(st.lists(st.integers(1, 40), min_size=1, max_size=6),
       st.integers(0, 100), st.integers(1, 4))
@settings(max_examples=200, deadline=None)
def test_allocation_property(sizes, n_raw, m_min):
    total = sum(sizes)
    k = len(sizes)
    n = min(total, max(k * m_min, n_raw))
    feasible = n >= k * m_min and n <= total
    if not feasible:
        with pytest.raises(ValidationError):
            largest_remainder_allocation(sizes, n, m_min)
        return
    alloc = largest_remainder_allocation(sizes, n, m_min)
    assert sum(alloc) == n
    for a, size in zip(alloc, sizes):
        assert a <= size
        assert a >= min(m_min, size)


# -------------------------------------------------------------- assignment

def _sample_of(n):
    model = _model_with_sizes([n])
    return stratified_sample(model, n, 1, seed=0)


def test_assignment_balanced_exact():
    plan = assign_to_respondents(_sample_of(10), 5, 4, seed=0)
    counts = plan.article_counts
    assert sum(counts.values()) == 20
    assert set(counts.values()) == {2}
    for ids in plan.respondents.values():
        assert len(ids) == len(set(ids)) == 4


def test_assignment_single_respondent():
    sample = _sample_of(6)
    plan = assign_to_respondents(sample, 1, 6, seed=1)
    (ids,) = plan.respondents.values()
    assert sorted(ids) == sorted(sample.all_ids())


def test_assignment_infeasible():
    with pytest.raises(ValidationError, match="infeasible_plan"):
        assign_to_respondents(_sample_of(5), 2, 6, seed=0)
    with pytest.raises(ValidationError, match="infeasible_plan"):
        assign_to_respondents(_sample_of(10), 2, 3, seed=0)  # 6 < 10 ratings


@given(st.integers(2, 40), st.integers(1, 20), st.integers(1, 30),
       st.integers(0, 99))
@settings(max_examples=200, deadline=None)
def test_assignment_balance_property(size, n_respondents, m, seed):
    feasible = m <= size and n_respondents * m >= size
    sample = _sample_of(size)
    if not feasible:
        with pytest.raises(ValidationError):
            assign_to_respondents(sample, n_respondents, m, seed)
        return
    plan = assign_to_respondents(sample, n_respondents, m, seed)
    counts = plan.article_counts
    assert len(counts) == size  # every article rated at least once
    assert max(counts.values()) - min(counts.values()) <= 1
    for ids in plan.respondents.values():
        assert len(ids) == m
        assert len(set(ids)) == m


def test_roundtrip_json(tmp_path):
    model = _model_with_sizes([6, 4])
    sample = stratified_sample(model, 6, 2, seed=9)
    plan = assign_to_respondents(sample, 3, 4, seed=9)
    from civicrank.cluster import (load_cluster_model, load_plan, load_sample,
                                   save_json)
    save_json(model, tmp_path / "clusters.json")
    save_json(sample, tmp_path / "sample.json")
    save_json(plan, tmp_path / "plan.json")
    assert load_cluster_model(tmp_path / "clusters.json").assignments == model.assignments
    assert load_sample(tmp_path / "sample.json").per_cluster == sample.per_cluster
    assert load_plan(tmp_path / "plan.json").respondents == plan.respondents
