"""Feature standardization, seeded k-means with silhouette k selection,
largest-remainder stratified sampling, and respondent assignment planning.

Everything here is a pure function of its inputs plus an explicit seed.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from sklearn.metrics import silhouette_score

from .errors import ValidationError


@dataclass
class StandardizedMatrix:
    rows: list                  # article ids, row order
    values: np.ndarray          # n x d, z-scored
    means: np.ndarray
    stds: np.ndarray            # population std; constant columns keep std 0


@dataclass
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: dict           # article id -> cluster index
    inertia: float
    seed: int

    def cluster_members(self):
        members = [[] for _ in range(self.k)]
        for article_id, c in self.assignments.items():
            members[c].append(article_id)
        for m in members:
            m.sort()
        return members

    def to_dict(self):
        return {
            "k": self.k,
            "seed": self.seed,
            "inertia": self.inertia,
            "centroids": self.centroids.tolist(),
            "assignments": dict(sorted(self.assignments.items())),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(k=d["k"], centroids=np.asarray(d["centroids"], dtype=float),
                   assignments=dict(d["assignments"]), inertia=d["inertia"],
                   seed=d["seed"])


@dataclass
class SampleSet:
    per_cluster: dict           # cluster index -> sorted list of article ids
    n: int
    seed: int

    def all_ids(self):
        out = []
        for c in sorted(self.per_cluster):
            out.extend(self.per_cluster[c])
        return out

    def to_dict(self):
        return {"n": self.n, "seed": self.seed,
                "per_cluster": {str(c): ids for c, ids in sorted(self.per_cluster.items())}}

    @classmethod
    def from_dict(cls, d):
        return cls(per_cluster={int(c): list(ids) for c, ids in d["per_cluster"].items()},
                   n=d["n"], seed=d["seed"])


@dataclass
class AssignmentPlan:
    respondents: dict           # respondent id -> ordered article ids
    seed: int
    article_counts: dict = field(init=False)

    def __post_init__(self):
        counts = {}
        for ids in self.respondents.values():
            for article_id in ids:
                counts[article_id] = counts.get(article_id, 0) + 1
        self.article_counts = counts

    def to_dict(self):
        return {"seed": self.seed,
                "respondents": dict(sorted(self.respondents.items()))}

    @classmethod
    def from_dict(cls, d):
        return cls(respondents=dict(d["respondents"]), seed=d["seed"])


def standardize(ids, matrix):
    """Z-score each column with the population std; near-constant columns
    (std < 1e-12) become all zeros."""
    values = np.asarray(matrix, dtype=float)
    if values.ndim != 2 or values.shape[0] < 2:
        raise ValidationError("too_few_rows", "need at least 2 rows")
    means = values.mean(axis=0)
    stds = values.std(axis=0)
    constant = stds < 1e-12
    safe = np.where(constant, 1.0, stds)
    z = (values - means) / safe
    z[:, constant] = 0.0
    return StandardizedMatrix(rows=list(ids), values=z, means=means,
                              stds=np.where(constant, 0.0, stds))


def _kmeanspp_init(X, k, rng):
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    first = rng.randint(n)
    centroids[0] = X[first]
    d2 = ((X - centroids[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.randint(n)
        else:
            probs = d2 / total
            idx = rng.choice(n, p=probs)
        centroids[i] = X[idx]
        d2 = np.minimum(d2, ((X - centroids[i]) ** 2).sum(axis=1))
    return centroids


def kmeans(std_matrix, k, seed, max_iter=300, inertia_trace=None):
    """Lloyd's algorithm with k-means++ init, run to assignment fixpoint.

    Empty clusters are reseeded to the point farthest from its centroid.
    `inertia_trace`, if given, collects per-iteration inertia values.
    """
    X = std_matrix.values
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValidationError("k_too_large", f"k={k}, n={n}")
    rng = np.random.RandomState(seed)
    centroids = _kmeanspp_init(X, k, rng)
    labels = None
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        new_labels = d2.argmin(axis=1)
        # repair empty clusters before the centroid update
        for c in range(k):
            if not (new_labels == c).any():
                within = d2[np.arange(n), new_labels]
                far = int(within.argmax())
                new_labels[far] = c
                d2[far] = 0  # keep it from being grabbed again this pass
        if labels is not None and (new_labels == labels).all():
            break
        labels = new_labels
        for c in range(k):
            centroids[c] = X[labels == c].mean(axis=0)
        if inertia_trace is not None:
            d2_now = ((X - centroids[labels]) ** 2).sum()
            inertia_trace.append(float(d2_now))
    inertia = float(((X - centroids[labels]) ** 2).sum())
    assignments = {article_id: int(c) for article_id, c in zip(std_matrix.rows, labels)}
    return ClusterModel(k=k, centroids=centroids, assignments=assignments,
                        inertia=inertia, seed=seed)


class KMeansClusterer:
    """Estimator-style wrapper: fit(ids, X) then .model_ holds the result."""

    def __init__(self, k=3, seed=0, max_iter=300):
        self.k = k
        self.seed = seed
        self.max_iter = max_iter

    def get_params(self, deep=True):
        return {"k": self.k, "seed": self.seed, "max_iter": self.max_iter}

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def fit(self, ids, matrix):
        self.scaler_ = standardize(ids, matrix)
        self.model_ = kmeans(self.scaler_, self.k, self.seed, self.max_iter)
        return self

    def predict(self, matrix):
        values = np.asarray(matrix, dtype=float)
        safe = np.where(self.scaler_.stds < 1e-12, 1.0, self.scaler_.stds)
        z = (values - self.scaler_.means) / safe
        z[:, self.scaler_.stds < 1e-12] = 0.0
        d2 = ((z[:, None, :] - self.model_.centroids[None, :, :]) ** 2).sum(axis=2)
        return d2.argmin(axis=1)


def select_k(std_matrix, k_min, k_max, seed):
    """Pick the k in [k_min, k_max] maximizing mean silhouette; ties -> smaller k."""
    n = std_matrix.values.shape[0]
    if not 2 <= k_min <= k_max <= n - 1:
        raise ValidationError("bad_k_range", f"range [{k_min},{k_max}] for n={n}")
    best_k, best_score = None, -np.inf
    for k in range(k_min, k_max + 1):
        model = kmeans(std_matrix, k, seed)
        labels = np.array([model.assignments[i] for i in std_matrix.rows])
        if len(set(labels.tolist())) < 2:
            continue
        score = silhouette_score(std_matrix.values, labels)
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    return best_k


def largest_remainder_allocation(sizes, n, m_min):
    """Proportional allocation by largest remainder, then enforce per-cluster
    minimums by trimming the largest allocations one unit at a time."""
    sizes = list(sizes)
    k = len(sizes)
    total = sum(sizes)
    if n < k * m_min:
        raise ValidationError("infeasible_minimum", f"n={n} < k*m_min={k * m_min}")
    if n > total:
        raise ValidationError("infeasible_minimum", f"n={n} > corpus size {total}")
    quotas = [n * s / total for s in sizes]
    alloc = [min(int(q), sizes[i]) for i, q in enumerate(quotas)]
    remaining = n - sum(alloc)
    order = sorted(range(k), key=lambda i: (-(quotas[i] - int(quotas[i])), i))
    pos = 0
    while remaining > 0:
        i = order[pos % k]
        if alloc[i] < sizes[i]:
            alloc[i] += 1
            remaining -= 1
        pos += 1
    # raise clusters below the minimum (capped at cluster size)
    floors = [min(m_min, s) for s in sizes]
    for i in range(k):
        if alloc[i] < floors[i]:
            alloc[i] = floors[i]
    excess = sum(alloc) - n
    while excess > 0:
        candidates = [i for i in range(k) if alloc[i] > floors[i]]
        if not candidates:
            raise ValidationError("infeasible_minimum", "cannot satisfy minimums")
        i = max(candidates, key=lambda j: (alloc[j], -j))
        alloc[i] -= 1
        excess -= 1
    return alloc


def stratified_sample(model, n, m_min, seed):
    """Draw a per-cluster sample: largest-remainder allocation, uniform
    without-replacement selection inside each cluster."""
    members = model.cluster_members()
    sizes = [len(m) for m in members]
    alloc = largest_remainder_allocation(sizes, n, m_min)
    rng = np.random.RandomState(seed)
    per_cluster = {}
    for c, ids in enumerate(members):
        take = alloc[c]
        chosen = rng.choice(len(ids), size=take, replace=False) if take else []
        per_cluster[c] = sorted(ids[i] for i in chosen)
    return SampleSet(per_cluster=per_cluster, n=n, seed=seed)


def assign_to_respondents(sample, n_respondents, m, seed):
    """Deal the shuffled sample round-robin: respondent r takes m consecutive
    articles of the cycled order starting at offset r*m. Per-article rating
    counts then differ by at most one and no respondent sees duplicates."""
    ids = sample.all_ids()
    size = len(ids)
    if m > size or n_respondents * m < size or m < 1 or n_respondents < 1:
        raise ValidationError("infeasible_plan",
                              f"|sample|={size}, respondents={n_respondents}, m={m}")
    rng = np.random.RandomState(seed)
    shuffled = list(ids)
    rng.shuffle(shuffled)
    respondents = {}
    for r in range(n_respondents):
        start = r * m
        respondents[f"r{r:04d}"] = [shuffled[(start + j) % size] for j in range(m)]
    return AssignmentPlan(respondents=respondents, seed=seed)


def save_json(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_cluster_model(path):
    with open(path, encoding="utf-8") as fh:
        return ClusterModel.from_dict(json.load(fh))


def load_sample(path):
    with open(path, encoding="utf-8") as fh:
        return SampleSet.from_dict(json.load(fh))


def load_plan(path):
    with open(path, encoding="utf-8") as fh:
        return AssignmentPlan.from_dict(json.load(fh))
