import numpy as np
import pytest

from croppat.dataset import SplitSpec, SyntheticSpec, fit_normalizer, generate_synthetic, stratified_split

_acceptance = []


@pytest.fixture(scope="session")
def crops():
    """The reference synthetic set: 8 classes x 50, 136 steps, noise 0.02, seed 7."""
    return generate_synthetic(SyntheticSpec(8, 136, 50, 0.02, seed=7))


@pytest.fixture(scope="session")
def crops_split(crops):
    train, test = stratified_split(crops, SplitSpec(0.70, seed=7))
    norm = fit_normalizer(train)
    return norm.apply(train), norm.apply(test)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
