import pytest

from algorand_lab.bench import BenchConfig, default_class_table, run_benchmark
from algorand_lab.complexity import CtmEstimator
from algorand_lab.turing import TmSpace, build_ctm_table, complement_completed

_acceptance: list[tuple[str, str, str]] = []


@pytest.fixture(scope="session")
def table22():
    return build_ctm_table(TmSpace(2, 7))


@pytest.fixture(scope="session")
def table32():
    return build_ctm_table(TmSpace(3, 22))


@pytest.fixture(scope="session")
def est22(table22):
    return CtmEstimator(table22)


@pytest.fixture(scope="session")
def est32(table32):
    """Complement-completed (3,2) table, the estimator used for grids and the benchmark."""
    return CtmEstimator(complement_completed(table32))


@pytest.fixture(scope="session")
def bench_rows(est32):
    return run_benchmark(BenchConfig(), est32, default_class_table())


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        lines = report.longreprtext.strip().splitlines() if report.failed else []
        errors = [ln[1:].strip() for ln in lines if ln.startswith("E ")]
        detail = errors[0] if errors else (lines[-1] if lines else "")
        _acceptance.append((name, "PASS" if report.passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _acceptance:
        line = f"{outcome}  {name}"
        if outcome == "FAIL" and detail:
            line += f"  -- {detail.strip()[:160]}"
        terminalreporter.write_line(line)
