import pytest

from fuzzyvault.harness import SynthConfig, synthesize_dataset

# acceptance criterion lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def small_dataset(tmp_path_factory):
    """5 fingers x 3 impressions, mild noise, random pose, 31-bit descriptors."""
    root = tmp_path_factory.mktemp("ds")
    cfg = SynthConfig(fingers=5, impressions=3, max_rotation=15, max_shift=25,
                      descriptor_bits=31, descriptor_ber=0.02)
    return synthesize_dataset(root, cfg, seed=3)
