import numpy as np
import pytest

from hydroclim.ingest import MonthlySeries, StationRecord
from hydroclim.series import QuarterlySeries, SERIES_LENGTH


FIXTURE_DIR = None  # set lazily below to keep conftest importable anywhere


@pytest.fixture(scope="session")
def fixtures_path():
    from pathlib import Path
    return Path(__file__).parent / "fixtures"


def make_station(sid="S1", lat=45.0, lon=10.0, kind="temperature"):
    return StationRecord(sid, lat, lon, kind)


def make_monthly(values, first_year=1970, station=None):
    return MonthlySeries(station or make_station(), first_year,
                         np.asarray(values, dtype=float))


def make_quarterly(values, station=None, first_winter_year=1971):
    values = np.asarray(values, dtype=float)
    assert values.size == SERIES_LENGTH
    return QuarterlySeries(station or make_station(), first_winter_year, values)


@pytest.fixture
def station():
    return make_station()
