"""Pipeline CLI: ingest -> enrich -> cluster -> sample -> plan -> export ->
(serve | simulate-responses) -> ingest-responses -> aggregate -> fit ->
score -> rerank.

Every command reads a single config.json, writes its stage outputs, and
prints a one-line JSON summary. Exit codes: 0 success, 2 validation error,
3 missing fixture / offline error.
"""

import json
import os
import sys

import click
import numpy as np

from . import cluster as cl
from . import corpus as co
from . import enrich as en
from . import extrapolate as ex
from . import rerank as rr
from . import survey as sv
from .errors import FixtureMissingError, ValidationError
from .simulate import simulate_responses
from .wikiclient import WikiClient


class PipelineConfig:
    def __init__(self, raw, base_dir="."):
        self.raw = raw
        self.base_dir = base_dir

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh), base_dir=os.path.dirname(os.path.abspath(path)))

    def path(self, key, default=None):
        value = self.raw.get("paths", {}).get(key, default)
        if value is None:
            raise ValidationError("missing_path", f"config paths.{key}")
        return value if os.path.isabs(value) else os.path.join(self.base_dir, value)

    def section(self, name):
        return self.raw.get(name, {})


def _emit(summary):
    click.echo(json.dumps(summary, sort_keys=True))


def _instrument(cfg):
    sec = cfg.section("survey")
    kwargs = {}
    if "sub_dimensions" in sec:
        kwargs["sub_dimensions"] = sec["sub_dimensions"]
    if "battery" in sec:
        kwargs["battery"] = [(item["key"], item.get("reverse_coded", False))
                             for item in sec["battery"]]
    return sv.InstrumentSpec(**kwargs)


def _wiki_client(cfg, offline, fixtures):
    sec = cfg.section("enrich")
    cache_dir = sec.get("cache_dir")
    if cache_dir and not os.path.isabs(cache_dir):
        cache_dir = os.path.join(cfg.base_dir, cache_dir)
    fixtures_dir = fixtures or sec.get("fixtures_dir")
    if fixtures_dir and not os.path.isabs(fixtures_dir):
        fixtures_dir = os.path.join(cfg.base_dir, fixtures_dir)
    return WikiClient(cache_dir=cache_dir, fixtures_dir=fixtures_dir,
                      offline=offline or None,
                      requests_per_second=sec.get("requests_per_second", 10.0))


def _enrich_config(cfg):
    sec = cfg.section("enrich")
    def respath(key):
        val = sec.get(key)
        if val and not os.path.isabs(val):
            return os.path.join(cfg.base_dir, val)
        return val
    return en.EnrichConfig(
        short_window_days=sec.get("short_window_days", 7),
        long_window_days=sec.get("long_window_days", 365),
        burst_factor=sec.get("burst_factor", 3.0),
        pmi_floor=sec.get("pmi_floor", -10.0),
        lexicon_path=respath("lexicon"),
        stopwords_path=respath("stopwords"),
        unigrams_path=respath("unigrams"),
        bigrams_path=respath("bigrams"),
    )


@click.group()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--offline", is_flag=True, default=False,
              help="Fixture-only mode; never touch the network.")
@click.option("--fixtures", "fixtures_dir", type=click.Path(), default=None)
@click.pass_context
def main(ctx, config_path, offline, fixtures_dir):
    ctx.obj = {
        "cfg": PipelineConfig.load(config_path),
        "offline": offline,
        "fixtures": fixtures_dir,
    }


def command(name):
    def deco(fn):
        @main.command(name=name)
        @click.pass_context
        def wrapper(ctx, **kwargs):
            try:
                fn(ctx.obj["cfg"], ctx.obj, **kwargs)
            except FixtureMissingError as exc:
                _emit({"error": "fixture_missing", "detail": exc.detail})
                sys.exit(3)
            except ValidationError as exc:
                _emit({"error": exc.code, "detail": exc.detail})
                sys.exit(2)
        wrapper.__name__ = fn.__name__
        return wrapper
    return deco


@command("ingest")
def ingest(cfg, ctx):
    raws = co.read_jsonl(cfg.path("raw"))
    corpus, report = co.ingest_articles(raws, cfg.raw.get("source_label", ""))
    co.write_corpus(corpus, cfg.path("corpus", "corpus.jsonl"))
    with open(cfg.path("report", "ingest_report.json"), "w") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    _emit({"command": "ingest", **report.to_dict()})


@command("enrich")
def enrich(cfg, ctx):
    corpus = co.read_corpus(cfg.path("corpus", "corpus.jsonl"))
    ecfg = _enrich_config(cfg)
    client = _wiki_client(cfg, ctx["offline"], ctx["fixtures"])
    model = None
    if not (ecfg.unigrams_path and ecfg.bigrams_path):
        # default background model: the corpus's own headlines
        stop = en.load_stopwords(ecfg.stopwords_path)
        model = en.build_background_model((a.headline for a in corpus.articles), stop)
    res = en.EnrichResources(ecfg, client, bigram_model=model)
    rows = [(a.id, en.enrich_article(a, res)) for a in corpus.articles]
    en.write_features_csv(cfg.path("features", "features.csv"), rows)
    _emit({"command": "enrich", "n_articles": len(rows)})


@command("cluster")
def cluster(cfg, ctx):
    ids, rows = en.read_features_csv(cfg.path("features", "features.csv"))
    sec = cfg.section("cluster")
    seed = int(sec.get("seed", 0))
    std = cl.standardize(ids, rows)
    if "k" in sec:
        k = int(sec["k"])
    else:
        k = cl.select_k(std, int(sec.get("k_min", 2)),
                        int(sec.get("k_max", 6)), seed)
    model = cl.kmeans(std, k, seed)
    cl.save_json(model, cfg.path("clusters", "clusters.json"))
    _emit({"command": "cluster", "k": k, "inertia": model.inertia, "seed": seed})


@command("sample")
def sample(cfg, ctx):
    model = cl.load_cluster_model(cfg.path("clusters", "clusters.json"))
    sec = cfg.section("sample")
    sample_set = cl.stratified_sample(model, int(sec["n"]),
                                      int(sec.get("m_min", 1)),
                                      int(sec.get("seed", 0)))
    cl.save_json(sample_set, cfg.path("sample", "sample.json"))
    _emit({"command": "sample", "n": sample_set.n,
           "per_cluster": {str(c): len(v) for c, v in sample_set.per_cluster.items()}})


@command("plan")
def plan(cfg, ctx):
    sample_set = cl.load_sample(cfg.path("sample", "sample.json"))
    sec = cfg.section("plan")
    plan_obj = cl.assign_to_respondents(sample_set, int(sec["n_respondents"]),
                                        int(sec["m"]), int(sec.get("seed", 0)))
    cl.save_json(plan_obj, cfg.path("plan", "plan.json"))
    _emit({"command": "plan", "n_respondents": len(plan_obj.respondents),
           "m": int(sec["m"])})


@command("export")
def export(cfg, ctx):
    corpus = co.read_corpus(cfg.path("corpus", "corpus.jsonl"))
    sample_set = cl.load_sample(cfg.path("sample", "sample.json"))
    plan_obj = cl.load_plan(cfg.path("plan", "plan.json"))
    spec = _instrument(cfg)
    by_id = {a.id: a for a in corpus.articles}
    doc = sv.export_instrument(sample_set, plan_obj, spec, by_id)
    with open(cfg.path("instrument", "instrument.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
    _emit({"command": "export", "n_respondents": len(doc["respondents"])})


@command("simulate-responses")
def simulate(cfg, ctx):
    plan_obj = cl.load_plan(cfg.path("plan", "plan.json"))
    ids, rows = en.read_features_csv(cfg.path("features", "features.csv"))
    features_by_id = dict(zip(ids, rows))
    sec = cfg.section("simulate")
    spec = _instrument(cfg)
    responses = simulate_responses(
        plan_obj, features_by_id, spec,
        weights=sec.get("weights", {"clickbait": 0.5, "sent_emotionality": 0.3,
                                    "burst01": 0.05}),
        intercept=sec.get("intercept", 0.15),
        noise_p=sec.get("noise_p", 0.2),
        seed=int(sec.get("seed", 0)),
    )
    sv.write_responses_csv(cfg.path("responses", "responses.csv"), responses)
    _emit({"command": "simulate-responses", "n_responses": len(responses)})


@command("ingest-responses")
def ingest_responses_cmd(cfg, ctx):
    plan_obj = cl.load_plan(cfg.path("plan", "plan.json"))
    spec = _instrument(cfg)
    responses = sv.read_responses_csv(cfg.path("responses", "responses.csv"))
    accepted, rejects = sv.ingest_responses(responses, plan_obj, spec)
    sv.write_responses_csv(cfg.path("responses_clean", "responses_clean.csv"),
                           accepted)
    _emit({"command": "ingest-responses", "n_accepted": len(accepted),
           "n_rejected": len(rejects)})


@command("aggregate")
def aggregate(cfg, ctx):
    plan_obj = cl.load_plan(cfg.path("plan", "plan.json"))
    spec = _instrument(cfg)
    responses = sv.read_responses_csv(cfg.path("responses", "responses.csv"))
    accepted, _ = sv.ingest_responses(responses, plan_obj, spec)
    r_min = int(cfg.section("survey").get("r_min", 1))
    labels, n_omitted = sv.aggregate_labels(accepted, spec, r_min)
    sv.write_labels_csv(cfg.path("labels", "labels.csv"), labels, spec)
    profiles = []
    for resp in accepted:
        if resp.article_id == sv.BATTERY_ARTICLE_ID:
            profiles.append(sv.score_civic_profile(resp.respondent_id,
                                                   resp.scores, spec))
    sv.write_profiles_csv(cfg.path("profiles", "profiles.csv"), profiles)
    _emit({"command": "aggregate", "n_labels": len(labels),
           "n_below_r_min": n_omitted, "n_profiles": len(profiles)})


@command("fit")
def fit(cfg, ctx):
    ids, rows = en.read_features_csv(cfg.path("features", "features.csv"))
    values, _ = sv.read_labels_csv(cfg.path("labels", "labels.csv"))
    feature_by_id = dict(zip(ids, rows))
    labeled_ids = sorted(set(values) & set(feature_by_id))
    if len(labeled_ids) < 4:
        raise ValidationError("too_few_labels", f"{len(labeled_ids)} labeled articles")
    sec = cfg.section("fit")
    method = sec.get("method", "ridge")
    seed = int(sec.get("seed", 0))
    test_fraction = float(sec.get("test_fraction", 0.2))
    rng = np.random.RandomState(seed)
    order = list(labeled_ids)
    rng.shuffle(order)
    n_test = max(2, int(len(order) * test_fraction))
    test_ids, train_ids = order[:n_test], order[n_test:]
    X_train = [feature_by_id[i] for i in train_ids]
    y_train = [values[i] for i in train_ids]
    X_test = [feature_by_id[i] for i in test_ids]
    y_test = [values[i] for i in test_ids]
    if method == "ridge":
        model = ex.RidgeExtrapolator(alpha=float(sec.get("alpha", 1.0))).fit(
            X_train, y_train)
    elif method == "knn":
        model = ex.KNNPropagator(k=int(sec.get("k", 5)),
                                 eps=float(sec.get("eps", 1e-9))).fit(
            X_train, y_train)
    else:
        raise ValidationError("unknown_method", method)
    metrics = ex.evaluate(model.predict(X_test), y_test)
    ex.save_model(model, cfg.path("model", "model.json"),
                  extra={"holdout": metrics.to_dict(), "seed": seed})
    _emit({"command": "fit", "method": method, **metrics.to_dict()})


@command("score")
def score(cfg, ctx):
    ids, rows = en.read_features_csv(cfg.path("features", "features.csv"))
    model = ex.load_model(cfg.path("model", "model.json"))
    preds = model.predict(rows)
    method = model.to_dict()["method"]
    with open(cfg.path("predictions", "predictions.csv"), "w", newline="") as fh:
        fh.write("article_id,score,method\n")
        for article_id, p in zip(ids, preds):
            fh.write(f"{article_id},{float(p)!r},{method}\n")
    _emit({"command": "score", "n_predictions": len(ids), "method": method})


@command("rerank")
def rerank_cmd(cfg, ctx):
    sec = cfg.section("rerank")
    with open(cfg.path("rerank_in"), encoding="utf-8") as fh:
        raw = json.load(fh)
    candidates = [rr.Candidate(article_id=c["article_id"],
                               relevance=float(c["relevance"]),
                               civic=float(c["civic"]),
                               sub_scores=c.get("sub_scores") or {})
                  for c in raw]
    weights_path = cfg.raw.get("paths", {}).get("profile_weights")
    if weights_path and not os.path.isabs(weights_path):
        weights_path = os.path.join(cfg.base_dir, weights_path)
    profiles = rr.load_profile_weights(weights_path)
    profile = sec.get("profile", "engaged")
    if profile not in profiles:
        raise ValidationError("unknown_profile", profile)
    ranked = rr.rerank(candidates, profiles[profile])
    base_order = [c.article_id for c in sorted(
        candidates, key=lambda c: (-c.relevance, c.article_id))]
    shift = rr.compare_rankings(base_order, ranked.ids,
                                {c.article_id: c.civic for c in candidates},
                                int(sec.get("k", 10)))
    out = {
        "profile": profile,
        "lambda": profiles[profile].lam,
        "ranking": [{"article_id": i, "score": s}
                    for i, s in zip(ranked.ids, ranked.scores)],
        "diagnostics": {"kendall_tau": shift.kendall_tau,
                        "civic_at_k": shift.civic_at_k, "k": shift.k},
    }
    with open(cfg.path("rerank_out", "rerank.json"), "w") as fh:
        json.dump(out, fh, indent=2)
    _emit({"command": "rerank", "profile": profile,
           "kendall_tau": shift.kendall_tau, "civic_at_k": shift.civic_at_k})


@command("serve")
def serve(cfg, ctx):
    import uvicorn

    from .service import RatingStore, create_app

    corpus = co.read_corpus(cfg.path("corpus", "corpus.jsonl"))
    plan_obj = cl.load_plan(cfg.path("plan", "plan.json"))
    spec = _instrument(cfg)
    store = RatingStore(cfg.path("ratings_log", "ratings.jsonl"))
    sec = cfg.section("serve")
    static_dir = sec.get("static_dir")
    if static_dir and not os.path.isabs(static_dir):
        static_dir = os.path.join(cfg.base_dir, static_dir)
    app = create_app(plan_obj, spec, {a.id: a for a in corpus.articles}, store,
                     static_dir=static_dir)
    uvicorn.run(app, host=sec.get("host", "127.0.0.1"),
                port=int(sec.get("port", 8000)))


if __name__ == "__main__":
    main()
