import os
import time

import pytest
from hypothesis import HealthCheck, settings

from egosign.datagen import GenConfig, default_workers, write_dataset

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CORPUS_N = 10_000
CORPUS_SEED = 2024


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """A 10k-sample dataset written once per session, with its generation time."""
    out = tmp_path_factory.mktemp("corpus")
    start = time.perf_counter()
    manifest = write_dataset(out, CORPUS_N, CORPUS_SEED, GenConfig(), workers=default_workers())
    return {"path": out, "manifest": manifest, "gen_seconds": time.perf_counter() - start}


def pytest_terminal_summary(terminalreporter):
    from . import acceptance_log

    if acceptance_log.LINES:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_log.LINES:
            terminalreporter.write_line(line)
