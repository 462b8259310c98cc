"""civicrank: civic value scoring for news recommendation.

Pipeline: corpus ingestion -> headline news-value enrichment -> k-means
stratified sampling -> survey label aggregation -> label extrapolation ->
profile-weighted civic re-ranking.
"""

__version__ = "0.1.0"
