import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fedft import LearnerSpec, generate_synthetic

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic(num_clients=12, num_classes=4, feature_dim=10,
                              classes_per_client=2, samples_range=(10, 30),
                              class_separation=3.0, seed=3)


@pytest.fixture(scope="session")
def small_spec(small_dataset):
    return LearnerSpec(input_dim=small_dataset.feature_dim,
                       num_classes=small_dataset.num_classes,
                       learning_rate=0.05, local_epochs=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance_log(request):
    """Collects one PASS/FAIL line per acceptance criterion for the summary."""
    return request.config.stash[_ACCEPTANCE]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
