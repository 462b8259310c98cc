import pytest

from civicrank.wikiclient import (WikiClient, write_pageview_fixture,
                                  write_search_fixture)


@pytest.fixture
def fixtures_dir(tmp_path):
    d = tmp_path / "fixtures"
    d.mkdir()
    write_search_fixture(str(d), "Barack Obama", ["Barack Obama", "Barack Obama Sr."])
    write_search_fixture(str(d), "Albanese", ["Anthony Albanese"])
    write_search_fixture(str(d), "Perth", ["Perth"])
    write_search_fixture(str(d), "The End", [])
    write_search_fixture(str(d), "zzzqqqxx", [])
    return str(d)


@pytest.fixture
def offline_client(fixtures_dir):
    return WikiClient(fixtures_dir=fixtures_dir, offline=True)


class FakePageviewSource:
    """Deterministic in-memory pageview source for prominence tests."""

    def __init__(self, series_by_title):
        # title -> {iso date: views}; missing days read as 0
        self.series = series_by_title

    def fetch_daily_pageviews(self, title, start, end):
        from datetime import timedelta

        from civicrank.wikiclient import PageviewSeries
        by_day = self.series.get(title, {})
        days = (end - start).days + 1
        views = [int(by_day.get((start + timedelta(days=i)).isoformat(), 0))
                 for i in range(days)]
        return PageviewSeries(title=title, start_date=start, end_date=end,
                              daily_views=views)


@pytest.fixture
def fake_pageviews():
    return FakePageviewSource
