"""Shared fixtures.

The bundled benchmark grid is expensive enough (900 replications with EM
refits) that the tests computing against it share one run.
"""

import json
from importlib import resources

import pytest

from mapthresh import ExperimentConfig, monte_carlo_amse


def bundled_config(**overrides) -> ExperimentConfig:
    raw = json.loads(
        resources.files("mapthresh.configs").joinpath("table1.json").read_text()
    )
    raw.update(overrides)
    return ExperimentConfig(
        n=raw["n"],
        sigma=raw["sigma"],
        xi_grid=tuple(raw["xi_grid"]),
        tau_grid=tuple(raw["tau_grid"]),
        replications=raw["replications"],
        methods=tuple(raw["methods"]),
        use_em=raw["use_em"],
        master_seed=raw["master_seed"],
        jobs=raw.get("jobs", 1),
    )


@pytest.fixture(scope="session")
def table1_report():
    return monte_carlo_amse(bundled_config(jobs=2))
