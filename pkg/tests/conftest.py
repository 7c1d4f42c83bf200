"""Shared fixtures: the processed standard suite is expensive, so it is
generated once per session and reused by the acceptance tests."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import pytest

from junctionscan.config import PipelineConfig
from junctionscan.models import GroundTruth
from junctionscan.pipeline import PipelineOutput, run_pipeline
from junctionscan.synth import GeneratedCase, Scenario, generate, standard_catalog


@dataclass
class SuiteRecord:
    scenario: Scenario
    truth: GroundTruth
    output: PipelineOutput
    construction_log: dict


@dataclass
class SuiteRun:
    records: list[SuiteRecord]
    clean_seconds: float
    noise_seconds: float

    def group(self, name: str) -> list[SuiteRecord]:
        return [r for r in self.records if r.scenario.group == name]


@pytest.fixture(scope="session")
def suite_run() -> SuiteRun:
    """Generate and process the full standard catalog (bundles are large,
    so they are dropped as soon as each one is processed)."""
    records: list[SuiteRecord] = []
    timing = {"clean": 0.0, "noise": 0.0}
    config = PipelineConfig()
    for scenario in standard_catalog():
        t0 = time.perf_counter()
        case: GeneratedCase = generate(scenario)
        output = run_pipeline(case.bundle, config)
        timing[scenario.group] += time.perf_counter() - t0
        records.append(SuiteRecord(scenario, case.truth, output, case.construction_log))
    return SuiteRun(records, timing["clean"], timing["noise"])


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(20250810))
