import functools

import pytest

from juliats.boettcher import phi_series
from juliats.polymap import make_param
from juliats.transseries import build_model


@functools.lru_cache(maxsize=None)
def _series(lam, K):
    return phi_series(make_param(lam), K)


@functools.lru_cache(maxsize=None)
def _model(lam, angle, K=2**14, n_max=64, k_max=8):
    return build_model(make_param(lam), angle, n_max=n_max, k_max=k_max, series=_series(lam, K))


@pytest.fixture(scope="session")
def series_for():
    """``series_for(lam, K)``: cached Böttcher series."""
    return _series


@pytest.fixture(scope="session")
def model_for():
    """``model_for(lam, angle)``: cached transseries model built on a K = 2**14 series."""
    return _model
