"""Shared fixtures: the calcium-40 reference configuration."""

from __future__ import annotations

import copy
import json
from pathlib import Path

import pytest

from ioncoupler.config import CouplerConfig, validate_config


EXAMPLE_DOCUMENT = {
    "ion1": {"mass_kg": 6.64e-26, "charge_multiple": 1},
    "ion2": {"mass_kg": 6.64e-26, "charge_multiple": 1},
    "trap1": {"frequency_hz": 1.0e6},
    "trap2": {"frequency_hz": 1.0e6},
    "geometry": {
        "r1_m": 2.5e-4,
        "r2_m": 2.5e-4,
        "d_eq1_m": 5.0e-5,
        "d_eq2_m": 5.0e-5,
        "wire_length_m": 1.0e-2,
        "wire_radius_m": 2.5e-5,
    },
}


@pytest.fixture
def example_document() -> dict:
    return copy.deepcopy(EXAMPLE_DOCUMENT)


@pytest.fixture
def example_config(example_document) -> CouplerConfig:
    return validate_config(example_document, source="example")


@pytest.fixture
def write_config(tmp_path):
    """Write a document as JSON and return the path."""

    def _write(document: dict, name: str = "config.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def config_file(write_config, example_document) -> Path:
    return write_config(example_document)
