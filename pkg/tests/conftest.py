import pytest

from augforget.config import RunConfig

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE = {}

SMALL = dict(synthetic=True, pool_size=300, heldout_size=100, test_size=100,
             layer_sizes=(784, 32, 10), epochs=1, epochs_second=1, batch_size=32,
             angles=(45.0, 0.0, -45.0), sd_batches=2, sd_reference_size=100, merge_k=5,
             probe_size=50, taylor_samples=2000, merge_grid=(50.0, 100.0),
             methods=("vanilla", "merge"), cka_methods=("vanilla", "merge"))


def small_config(**changes):
    """A seconds-scale configuration for driver plumbing tests."""
    return RunConfig(**{**SMALL, **changes})


@pytest.fixture
def small_cfg():
    return small_config()


@pytest.fixture
def criterion():
    def record(key, passed, detail=""):
        ACCEPTANCE[key] = (bool(passed), detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (len(k), k)):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {key}: {detail}")
