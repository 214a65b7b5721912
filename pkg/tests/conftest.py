from __future__ import annotations

import logging

import pytest


@pytest.fixture(autouse=True)
def _quiet_hall_warnings(caplog):
    # hypothesis-violation warnings are expected noise in perturbed runs
    logging.getLogger("hfactor.hall").setLevel(logging.ERROR)
    yield
