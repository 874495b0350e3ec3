"""Access to the frozen calibration constants shipped with the package."""

from __future__ import annotations

import functools
import json
from importlib import resources

__all__ = ["load_fixtures", "FIXTURE_FILE"]

FIXTURE_FILE = "fixtures.json"


@functools.lru_cache(maxsize=1)
def load_fixtures() -> dict:
    text = resources.files("bousspec").joinpath("data").joinpath(FIXTURE_FILE).read_text()
    return json.loads(text)
