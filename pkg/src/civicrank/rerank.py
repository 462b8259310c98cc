"""Civic re-ranking: blend min-max normalized relevance with predicted civic
value under a per-profile weight, plus ranking-shift diagnostics."""

import json
from dataclasses import dataclass, field

from .errors import ValidationError

# Placeholder blend weights per civic profile; config data, not sourced from
# any empirical calibration. Override via a profiles.json file.
DEFAULT_PROFILE_WEIGHTS = {
    "disengaged": 0.2,
    "issue_specific": 0.4,
    "engaged": 0.6,
}


@dataclass
class Candidate:
    article_id: str
    relevance: float
    civic: float
    sub_scores: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.civic <= 1.0:
            raise ValidationError("bad_civic", f"civic={self.civic} outside [0,1]")


@dataclass
class ProfileWeights:
    profile: str
    lam: float
    sub_weights: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValidationError("bad_lambda", f"lambda={self.lam}")
        if self.sub_weights:
            total = sum(self.sub_weights.values())
            if any(w < 0 for w in self.sub_weights.values()) or abs(total - 1.0) > 1e-9:
                raise ValidationError("bad_sub_weights",
                                      "weights must be non-negative and sum to 1")


@dataclass
class RankedList:
    ids: list
    scores: list
    weights: ProfileWeights


@dataclass
class RankShift:
    kendall_tau: float
    civic_at_k: float
    k: int


def civic_score(candidate, weights):
    """Sub-dimension weighted score when weights are present, else the
    candidate's scalar civic value."""
    if not weights.sub_weights:
        return candidate.civic
    total = 0.0
    for dim, w in weights.sub_weights.items():
        if dim not in candidate.sub_scores:
            raise ValidationError("missing_sub_dimension", dim)
        total += w * candidate.sub_scores[dim]
    return total


def rerank(candidates, weights):
    """Sort by (1-lambda)*relevance_norm + lambda*civic, descending; ties
    break by article id ascending."""
    if not candidates:
        raise ValidationError("empty_candidates", "need at least one candidate")
    rels = [c.relevance for c in candidates]
    lo, hi = min(rels), max(rels)
    if hi - lo < 1e-15:
        norms = [0.5] * len(candidates)
    else:
        norms = [(r - lo) / (hi - lo) for r in rels]
    lam = weights.lam
    blended = [(1 - lam) * n + lam * civic_score(c, weights)
               for c, n in zip(candidates, norms)]
    order = sorted(range(len(candidates)),
                   key=lambda i: (-blended[i], candidates[i].article_id))
    return RankedList(ids=[candidates[i].article_id for i in order],
                      scores=[blended[i] for i in order],
                      weights=weights)


def compare_rankings(base, reranked, civic_by_id, k):
    """Kendall tau over all pairs plus mean-civic uplift in the top k."""
    if set(base) != set(reranked):
        raise ValidationError("id_set_mismatch", "rankings cover different ids")
    n = len(base)
    if n < 2:
        return RankShift(kendall_tau=1.0, civic_at_k=0.0, k=k)
    pos = {article_id: i for i, article_id in enumerate(reranked)}
    concordant = discordant = 0
    for i in range(n):
        for j in range(i + 1, n):
            if pos[base[i]] < pos[base[j]]:
                concordant += 1
            else:
                discordant += 1
    tau = (concordant - discordant) / (n * (n - 1) / 2)
    k = min(k, n)
    base_civic = sum(civic_by_id[i] for i in base[:k]) / k
    new_civic = sum(civic_by_id[i] for i in reranked[:k]) / k
    return RankShift(kendall_tau=tau, civic_at_k=new_civic - base_civic, k=k)


def load_profile_weights(path=None):
    """profiles.json: {profile: {"lambda": x, "sub_weights": {...}}} or
    {profile: lambda}."""
    if path is None:
        return {name: ProfileWeights(profile=name, lam=lam)
                for name, lam in DEFAULT_PROFILE_WEIGHTS.items()}
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    out = {}
    for name, val in raw.items():
        if isinstance(val, dict):
            out[name] = ProfileWeights(profile=name, lam=val["lambda"],
                                       sub_weights=val.get("sub_weights") or {})
        else:
            out[name] = ProfileWeights(profile=name, lam=float(val))
    return out
