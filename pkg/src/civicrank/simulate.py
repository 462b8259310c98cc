"""Synthetic respondents for end-to-end testing: answer the instrument from
a configurable latent value function over the enriched features."""

from datetime import datetime, timedelta, timezone

import numpy as np

from .enrich import FEATURE_NAMES
from .survey import BATTERY_ARTICLE_ID, RatingResponse


def latent_value(feature_row, weights, intercept):
    """clip(intercept + sum_i w_i * feature_i) to [0,1]."""
    idx = {name: i for i, name in enumerate(FEATURE_NAMES)}
    raw = intercept + sum(w * feature_row[idx[name]] for name, w in weights.items())
    return min(1.0, max(0.0, raw))


def value_to_rating(v):
    return 1 + int(round(4 * v))


def simulate_responses(plan, features_by_id, spec, weights, intercept,
                       noise_p=0.2, seed=0):
    """One RatingResponse per (respondent, planned article) plus one battery
    response per respondent.

    Ratings are 1 + round(4*v); with probability noise_p the rating moves one
    step up or down (clamped to the scale). Battery answers are drawn so the
    respondent pool spans all three civic profiles.
    """
    rng = np.random.RandomState(seed)
    responses = []
    clock = datetime(2026, 1, 1, tzinfo=timezone.utc)
    tick = 0
    for respondent_id in sorted(plan.respondents):
        for article_id in plan.respondents[respondent_id]:
            v = latent_value(features_by_id[article_id], weights, intercept)
            scores = {}
            for item in spec.rating_keys():
                rating = value_to_rating(v)
                if rng.rand() < noise_p:
                    rating += rng.choice([-1, 1])
                scores[item] = int(min(spec.scale_max, max(spec.scale_min, rating)))
            responses.append(RatingResponse(
                respondent_id=respondent_id,
                article_id=article_id,
                scores=scores,
                submitted_at=(clock + timedelta(seconds=tick)).isoformat(),
            ))
            tick += 1
        reverse = spec.reverse_coded()
        base = rng.randint(1, 6)
        battery = {}
        for key in spec.battery_keys():
            x = int(min(5, max(1, base + rng.randint(-1, 2))))
            battery[key] = 6 - x if key in reverse else x
        responses.append(RatingResponse(
            respondent_id=respondent_id,
            article_id=BATTERY_ARTICLE_ID,
            scores=battery,
            submitted_at=(clock + timedelta(seconds=tick)).isoformat(),
        ))
        tick += 1
    return responses
