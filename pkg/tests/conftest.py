import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def pytest_configure(config):
    config.addinivalue_line("markers", "derived: expected value computed by an independent oracle")
    config.addinivalue_line("markers", "published: expected value taken from the published text")
    config.addinivalue_line("markers", "trivial: expected value asserted directly")
    config.addinivalue_line("markers", "acceptance: acceptance criterion")


@pytest.fixture
def rng():
    import random
    return random.Random(20261018)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
