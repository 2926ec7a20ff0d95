import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ecomplex.matrix import BipartiteMatrix  # noqa: E402
from oracles import random_rows  # noqa: E402


@pytest.fixture
def hand_matrix():
    """Edges {(A,p1), (A,p2), (B,p1)}."""
    return BipartiteMatrix.from_labeled_edges([("A", "p1"), ("A", "p2"), ("B", "p1")])


def rows_to_matrix(rows):
    n_c, n_p = len(rows), len(rows[0])
    return BipartiteMatrix(
        [f"c{i}" for i in range(n_c)], [f"p{j}" for j in range(n_p)], np.array(rows, dtype=bool)
    )


def random_matrix_suite(n, seed=0, min_dims=(3, 3), max_dims=(15, 20)):
    """``n`` random (rows, matrix) pairs, sizes and densities drawn uniformly."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        n_c = rng.randint(min_dims[0], max_dims[0])
        n_p = rng.randint(min_dims[1], max_dims[1])
        rows = random_rows(rng, n_c, n_p, rng.uniform(0.1, 0.9))
        out.append((rows, rows_to_matrix(rows)))
    return out


_criteria: dict = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, text = mark.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _criteria[number] = (text, status, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        text, status, duration = _criteria[number]
        terminalreporter.write_line(f"[{status}] {number:>2}. {text} ({duration:.2f}s)")
