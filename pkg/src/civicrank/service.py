"""HTTP service backing the rating UI: next-assignment, rating submission,
and progress, persisted through an append-only JSON Lines log.

The log is the source of truth; the in-memory index is rebuilt from it on
boot, so an acknowledged rating survives a crash or restart.
"""

import json
import os
import threading

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .survey import BATTERY_ARTICLE_ID, GUIDANCE_PREAMBLE


class RatingStore:
    """Append-only ratings log with first-write-wins duplicate handling.

    Writes serialize through one lock and are flushed+fsynced before the
    submission is acknowledged.
    """

    def __init__(self, log_path):
        self.log_path = log_path
        self._lock = threading.Lock()
        self._by_pair = {}
        self._replay()

    def _replay(self):
        if not os.path.exists(self.log_path):
            return
        with open(self.log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                key = (rec["respondent_id"], rec["article_id"])
                self._by_pair.setdefault(key, rec)

    def submit(self, respondent_id, article_id, scores, submitted_at):
        """Persist one rating; returns "accepted" or "duplicate"."""
        rec = {
            "respondent_id": respondent_id,
            "article_id": article_id,
            "scores": dict(scores),
            "submitted_at": submitted_at,
        }
        with self._lock:
            key = (respondent_id, article_id)
            if key in self._by_pair:
                return "duplicate"
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._by_pair[key] = rec
        return "accepted"

    def get(self, respondent_id, article_id):
        return self._by_pair.get((respondent_id, article_id))

    def rated_articles(self, respondent_id):
        return {a for (r, a) in self._by_pair if r == respondent_id
                and a != BATTERY_ARTICLE_ID}

    def count(self):
        return len(self._by_pair)

    def all_records(self):
        return list(self._by_pair.values())


class RatingBody(BaseModel):
    respondent_id: str
    article_id: str
    scores: dict
    submitted_at: str = ""


def _error(status, code, detail=""):
    return JSONResponse(status_code=status,
                        content={"error": code, "detail": detail})


def _validate_scores(scores, allowed, spec):
    for key, value in scores.items():
        if key not in allowed:
            return f"unknown item '{key}'"
        if not isinstance(value, int) or isinstance(value, bool) \
                or not spec.scale_min <= value <= spec.scale_max:
            return (f"item '{key}': score must be an integer in "
                    f"[{spec.scale_min},{spec.scale_max}]")
    missing = [k for k in allowed if k not in scores]
    if missing:
        return "missing items: " + ", ".join(missing)
    return None


def create_app(plan, instrument, articles_by_id, store, static_dir=None):
    """Wire the JSON API over a plan, instrument spec, article map, and store."""
    app = FastAPI(title="civicrank rating service")
    rating_keys = instrument.rating_keys()
    battery_keys = instrument.battery_keys()

    def article_card(article_id):
        a = articles_by_id[article_id]
        return {
            "article_id": a.id,
            "headline": a.headline,
            "byline": list(a.byline),
            "published_date": a.published_date.isoformat(),
            "image_url": a.image_url,
        }

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "ratings": store.count()}

    @app.get("/api/instrument")
    def get_instrument():
        doc = instrument.to_dict()
        doc["battery_article_id"] = BATTERY_ARTICLE_ID
        doc["guidance"] = GUIDANCE_PREAMBLE
        return doc

    @app.get("/api/articles/{article_id}")
    def get_article(article_id: str):
        if article_id not in articles_by_id:
            return _error(404, "unknown_article", article_id)
        return article_card(article_id)

    @app.get("/api/assignment")
    def next_assignment(respondent_id: str):
        plan_ids = plan.respondents.get(respondent_id)
        if plan_ids is None:
            return _error(404, "unknown_respondent", respondent_id)
        rated = store.rated_articles(respondent_id)
        for article_id in plan_ids:
            if article_id not in rated:
                return {"status": "article", "article": article_card(article_id),
                        "items": rating_keys}
        if store.get(respondent_id, BATTERY_ARTICLE_ID) is None:
            return {"status": "battery", "items": battery_keys}
        return {"status": "done"}

    @app.post("/api/ratings")
    def submit_rating(body: RatingBody):
        plan_ids = plan.respondents.get(body.respondent_id)
        if plan_ids is None:
            return _error(404, "unknown_respondent", body.respondent_id)
        is_battery = body.article_id == BATTERY_ARTICLE_ID
        if not is_battery and body.article_id not in plan_ids:
            return _error(422, "not_in_plan", body.article_id)
        allowed = battery_keys if is_battery else rating_keys
        problem = _validate_scores(body.scores, allowed, instrument)
        if problem:
            return _error(422, "invalid_scores", problem)
        status = store.submit(body.respondent_id, body.article_id, body.scores,
                              body.submitted_at)
        return {"status": status}

    @app.get("/api/progress")
    def progress(respondent_id: str):
        plan_ids = plan.respondents.get(respondent_id)
        if plan_ids is None:
            return _error(404, "unknown_respondent", respondent_id)
        rated = len(store.rated_articles(respondent_id))
        total = len(plan_ids)
        return {"respondent_id": respondent_id, "rated": rated, "total": total,
                "fraction": rated / total if total else 1.0}

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
