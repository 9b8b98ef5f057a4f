import pytest

from realm_tta.config import RunConfig


@pytest.fixture
def small_cfg(tmp_path):
    """A quick configuration for CLI and harness tests."""
    return RunConfig(n_source=300, n_target=400, n_heldout=200, out_dir=str(tmp_path / "out"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
