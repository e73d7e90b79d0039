import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from divedit.backends import build_reference_backend

MICRO_CORPUS = [
    "the cat sat on the mat",
    "the dog sat on the rug",
    "the cat ran in the park",
    "a dog ran in the park",
    "the bird flew over the park",
    "a cat slept on the mat",
]


@pytest.fixture(scope="session")
def micro_backend():
    return build_reference_backend(MICRO_CORPUS, alpha=0.1, top_k=16)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" in nodeid:
                name = nodeid.split("::")[-1]
                lines.append((name, outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, outcome in sorted(lines):
            terminalreporter.write_line(f"{outcome:6s} {name}")
