"""Rating instrument definition, response ingestion/validation, per-article
label aggregation, and respondent civic-profile scoring.

Responses travel as long-format CSV rows:
    respondent_id,article_id,item_key,score,submitted_at
Civic battery answers use the reserved article id BATTERY_ARTICLE_ID.
"""

import csv
from dataclasses import dataclass, field

from .errors import ValidationError

BATTERY_ARTICLE_ID = "_battery_"

GUIDANCE_PREAMBLE = (
    "You will see a series of news article cards. For each one, tell us how "
    "interesting it is to you personally, and how important you think it is "
    "for the public to know about, regardless of whether it interests you. "
    "News is in the public interest when it helps people understand issues "
    "that affect their community, holds powerful institutions to account, or "
    "informs decisions citizens make in civic life."
)

DEFAULT_SUB_DIMENSIONS = [
    "informs_civic_decisions",
    "holds_power_to_account",
    "community_relevance",
]

DEFAULT_BATTERY = [
    ("follows_news_daily", False),
    ("discusses_politics", False),
    ("votes_in_elections", False),
    ("news_is_waste_of_time", True),
    ("avoids_news", True),
    ("contacts_representatives", False),
]

PROFILE_CUTPOINTS = [(2.33, "disengaged"), (3.67, "issue_specific")]
ENGAGED = "engaged"

DEMOGRAPHIC_FIELDS = ["age_band", "gender", "region", "education"]


@dataclass
class InstrumentSpec:
    sub_dimensions: list = field(default_factory=lambda: list(DEFAULT_SUB_DIMENSIONS))
    battery: list = field(default_factory=lambda: list(DEFAULT_BATTERY))
    scale_min: int = 1
    scale_max: int = 5

    def __post_init__(self):
        if not self.battery:
            raise ValueError("battery needs at least one item")
        keys = self.rating_keys() + [k for k, _ in self.battery]
        if len(keys) != len(set(keys)):
            raise ValueError("instrument item keys must be unique")

    def rating_keys(self):
        return ["personal_interest", "public_importance"] + list(self.sub_dimensions)

    def battery_keys(self):
        return [k for k, _ in self.battery]

    def reverse_coded(self):
        return {k for k, rev in self.battery if rev}

    def valid_score(self, score):
        return isinstance(score, int) and self.scale_min <= score <= self.scale_max

    def to_dict(self):
        return {
            "guidance": GUIDANCE_PREAMBLE,
            "scale": {"min": self.scale_min, "max": self.scale_max},
            "rating_items": self.rating_keys(),
            "battery_items": [{"key": k, "reverse_coded": rev} for k, rev in self.battery],
            "demographics": DEMOGRAPHIC_FIELDS,
        }


@dataclass
class RatingResponse:
    respondent_id: str
    article_id: str
    scores: dict                # item key -> int score
    submitted_at: str           # ISO timestamp, lexicographically ordered


@dataclass
class ArticleLabel:
    article_id: str
    public_value: float
    personal_interest: float
    sub_dimensions: dict
    n_ratings: int
    rating_variance: float


@dataclass
class CivicProfile:
    respondent_id: str
    civic_score: float
    profile: str


def rescale(x):
    """Map a 1..5 rating onto [0,1]."""
    return (x - 1) / 4


def export_instrument(sample, plan, spec, articles_by_id):
    """Build the instrument document handed to respondents (or the UI)."""
    sample_ids = set(sample.all_ids())
    blocks = []
    for respondent_id in sorted(plan.respondents):
        cards = []
        for article_id in plan.respondents[respondent_id]:
            if article_id not in sample_ids:
                raise ValidationError("plan_sample_mismatch", article_id)
            a = articles_by_id[article_id]
            cards.append({
                "article_id": a.id,
                "headline": a.headline,
                "byline": list(a.byline),
                "published_date": a.published_date.isoformat(),
                "image_url": a.image_url,
            })
        blocks.append({"respondent_id": respondent_id, "articles": cards})
    doc = spec.to_dict()
    doc["respondents"] = blocks
    return doc


def read_responses_csv(path):
    """Group long-format rows into one RatingResponse per (respondent, article,
    submitted_at)."""
    grouped = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            key = (row["respondent_id"], row["article_id"], row["submitted_at"])
            grouped.setdefault(key, {})[row["item_key"]] = row["score"]
    out = []
    for (respondent_id, article_id, submitted_at), scores in grouped.items():
        parsed = {}
        for item, score in scores.items():
            try:
                parsed[item] = int(score)
            except ValueError:
                parsed[item] = score  # left invalid; rejected downstream
        out.append(RatingResponse(respondent_id, article_id, parsed, submitted_at))
    out.sort(key=lambda r: (r.submitted_at, r.respondent_id, r.article_id))
    return out


def write_responses_csv(path, responses):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "article_id", "item_key", "score",
                         "submitted_at"])
        for r in responses:
            for item in sorted(r.scores):
                writer.writerow([r.respondent_id, r.article_id, item,
                                 r.scores[item], r.submitted_at])


def ingest_responses(responses, plan, spec):
    """Validate responses against the plan and instrument.

    Returns (accepted, rejects); duplicates keep the earliest submitted_at.
    Battery responses bypass the plan check (they are not tied to an article).
    """
    accepted = {}
    rejects = []
    rating_keys = set(spec.rating_keys())
    battery_keys = set(spec.battery_keys())
    for resp in sorted(responses, key=lambda r: r.submitted_at):
        is_battery = resp.article_id == BATTERY_ARTICLE_ID
        allowed = battery_keys if is_battery else rating_keys
        if not is_battery:
            plan_ids = plan.respondents.get(resp.respondent_id)
            if plan_ids is None or resp.article_id not in plan_ids:
                rejects.append((resp, "not_in_plan"))
                continue
        bad = [k for k in resp.scores if k not in allowed]
        if bad:
            rejects.append((resp, "unknown_item"))
            continue
        if not all(spec.valid_score(s) for s in resp.scores.values()):
            rejects.append((resp, "out_of_range"))
            continue
        key = (resp.respondent_id, resp.article_id)
        if key in accepted:
            rejects.append((resp, "duplicate"))
            continue
        accepted[key] = resp
    return list(accepted.values()), rejects


def aggregate_labels(responses, spec, r_min=1):
    """Aggregate per-article labels from valid rating responses.

    Articles with fewer than r_min responses are omitted; the second return
    value counts them.
    """
    if r_min < 1:
        raise ValidationError("bad_r_min", "r_min must be >= 1")
    by_article = {}
    for resp in responses:
        if resp.article_id == BATTERY_ARTICLE_ID:
            continue
        by_article.setdefault(resp.article_id, []).append(resp)
    labels = []
    n_below_min = 0
    for article_id in sorted(by_article):
        # fixed summation order keeps labels invariant to response order
        group = sorted(by_article[article_id],
                       key=lambda r: (r.respondent_id, r.submitted_at))
        if len(group) < r_min:
            n_below_min += 1
            continue

        def mean_of(key):
            vals = [rescale(r.scores[key]) for r in group if key in r.scores]
            return sum(vals) / len(vals) if vals else 0.0

        pv_vals = [rescale(r.scores["public_importance"]) for r in group
                   if "public_importance" in r.scores]
        public_value = sum(pv_vals) / len(pv_vals) if pv_vals else 0.0
        variance = (sum((v - public_value) ** 2 for v in pv_vals) / len(pv_vals)
                    if pv_vals else 0.0)
        labels.append(ArticleLabel(
            article_id=article_id,
            public_value=public_value,
            personal_interest=mean_of("personal_interest"),
            sub_dimensions={d: mean_of(d) for d in spec.sub_dimensions},
            n_ratings=len(group),
            rating_variance=variance,
        ))
    return labels, n_below_min


def score_civic_profile(respondent_id, battery_scores, spec):
    """Mean of the civic battery (reverse-coded items flipped), binned into
    a profile by fixed cutpoints."""
    missing = [k for k in spec.battery_keys() if k not in battery_scores]
    if missing:
        raise ValidationError("incomplete_battery", ",".join(missing))
    reverse = spec.reverse_coded()
    vals = []
    for key in spec.battery_keys():
        x = battery_scores[key]
        vals.append(6 - x if key in reverse else x)
    score = sum(vals) / len(vals)
    profile = ENGAGED
    for cut, name in PROFILE_CUTPOINTS:
        if score <= cut:
            profile = name
            break
    return CivicProfile(respondent_id=respondent_id, civic_score=score,
                        profile=profile)


def write_labels_csv(path, labels, spec):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["article_id", "public_value", "personal_interest",
                         *spec.sub_dimensions, "n_ratings", "rating_variance"])
        for lab in labels:
            writer.writerow([
                lab.article_id, repr(lab.public_value), repr(lab.personal_interest),
                *[repr(lab.sub_dimensions[d]) for d in spec.sub_dimensions],
                lab.n_ratings, repr(lab.rating_variance),
            ])


def read_labels_csv(path):
    """Returns article_id -> public_value plus the full row dicts."""
    values = {}
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            values[row["article_id"]] = float(row["public_value"])
            rows.append(row)
    return values, rows


def write_profiles_csv(path, profiles):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["respondent_id", "civic_score", "profile"])
        for p in sorted(profiles, key=lambda p: p.respondent_id):
            writer.writerow([p.respondent_id, repr(p.civic_score), p.profile])
