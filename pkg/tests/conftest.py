from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from simplexsearch.lattice import LatticeSpec, build_lattice

FIXTURES = Path(__file__).parent / "fixtures"

ACCEPTANCE_LINES: list[str] = []


def table1_matrix(m: int) -> np.ndarray:
    """Published 20-class quotient with M_l = M - l and s_l = sqrt(M - l)."""
    env = {f"s{l}": math.sqrt(m - l) for l in (1, 2, 3)}
    env.update({f"M{l}": float(m - l) for l in (1, 2, 3)})
    rows = (FIXTURES / "table1_rows.txt").read_text().split("\n")
    return np.array([[env[t] if t in env else float(t) for t in row.split()] for row in rows if row.strip()])


def table1_relabel() -> dict[str, str]:
    return json.loads((FIXTURES / "table1_relabel.json").read_text())["labels"]


def table1_letters() -> list[str]:
    return json.loads((FIXTURES / "table1_relabel.json").read_text())["letters"]


def letter_index(partition) -> dict[str, int]:
    """Class index of each row letter of the published 20-class table."""
    labels = table1_relabel()
    return {letter: partition.labels.index(label) for letter, label in labels.items()}


@pytest.fixture(scope="session")
def lattice_r2m5():
    return build_lattice(LatticeSpec(2, 5))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
