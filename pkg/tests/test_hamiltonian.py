from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexsearch.errors import InvalidOracle, NonPositiveGamma
from simplexsearch.hamiltonian import build, make_oracle, matrix_to_csv, no_oracle, spectrum
from simplexsearch.lattice import LatticeSpec, build_lattice
from simplexsearch.partition import lift, quotient, reduced_partition
from simplexsearch.scenarios import get_scenario

from conftest import letter_index, table1_letters, table1_matrix


def single_mark(m):
    part = reduced_partition(LatticeSpec(2, m), [(0, 1, 0)])
    return part, quotient(None, part)


def test_entries_at_first_critical_rate():
    part, q = single_mark(5)
    h = build(q, 0.6, make_oracle(part)).matrix
    ix = letter_index(part)
    assert h[ix["a"], ix["a"]] == pytest.approx(-1.0, abs=1e-12)
    assert h[ix["a"], ix["b"]] == pytest.approx(-1.2, abs=1e-12)


def test_no_oracle_adjacency_is_minus_gamma_q():
    part, q = single_mark(5)
    assert np.array_equal(build(q, 0.37, no_oracle()).matrix, -0.37 * q.entries)


@pytest.mark.parametrize("gamma", [0.01, 0.6, 3.0])
def test_laplacian_shift(gamma):
    part, q = single_mark(7)
    for oracle in (no_oracle(), make_oracle(part)):
        ea = spectrum(build(q, gamma, oracle, "adjacency"))[0]
        el = spectrum(build(q, gamma, oracle, "laplacian"))[0]
        assert np.allclose(el - ea, gamma * 7, atol=1e-10)


def test_marked_class_diagonal():
    m, gamma = 5, 0.8
    part = get_scenario("marked_class_e_scheme1").partition(m)
    h = build(quotient(None, part), gamma, make_oracle(part)).matrix
    e = part.marked_classes[0]
    assert part.labels[e] == "0.n1.n2"
    assert h[e, e] == pytest.approx(-(gamma * (m - 2) + 1), abs=1e-12)


@pytest.mark.parametrize("name,m", [("single_mark_r2", 5), ("marked_class_e_scheme1", 5), ("marked_class_o_scheme1", 5), ("table5_a", 5)])
def test_oracle_forms_agree(name, m):
    sc = get_scenario(name)
    lat = build_lattice(sc.spec(m))
    part = sc.explicit_partition(lat)
    q = quotient(lat, part)
    a = build(q, 0.4, make_oracle(part, kind="class_state")).matrix
    b = build(q, 0.4, make_oracle(part, kind="vertex_sum")).matrix
    assert np.max(np.abs(a - b)) <= 1e-12
    # independent route: marked-vertex projector sandwiched between lifted class states
    basis = np.stack([lift(part, np.eye(part.dim)[i]) for i in range(part.dim)], axis=1)
    flag = np.zeros(lat.num_vertices)
    for c in part.marked_classes:
        flag[part.members[c]] = 1.0
    restricted = basis.T @ np.diag(flag) @ basis
    assert np.max(np.abs(-0.4 * q.entries - restricted - a)) <= 1e-12


def test_invalid_inputs():
    part, q = single_mark(5)
    with pytest.raises(NonPositiveGamma):
        build(q, 0.0, make_oracle(part))
    with pytest.raises(NonPositiveGamma):
        build(q, -1.0, make_oracle(part))
    with pytest.raises(InvalidOracle):
        make_oracle(part, [1])
    with pytest.raises(InvalidOracle):
        make_oracle(part, kind="other")


def test_one_by_one_spectrum():
    w, v = spectrum(np.array([[-0.3 * 7]]))
    assert w[0] == pytest.approx(-2.1) and abs(v[0, 0]) == 1.0


@pytest.mark.parametrize("m", [100, 1000])
def test_two_by_two_with_perturbation(m):
    gamma = 1 / m
    h = np.array([[-1.0, -gamma * math.sqrt(m)], [-gamma * math.sqrt(m), -gamma * m]])
    w, _ = spectrum(h)
    assert np.allclose(w, [-1 - math.sqrt(1 / m), -1 + math.sqrt(1 / m)], atol=1e-12)


def test_near_degenerate_ground_pair_at_first_rate():
    h = -0.03 * table1_matrix(100)
    a = table1_letters().index("a")
    h[a, a] -= 1.0
    w, v = spectrum(h)
    assert w[1] - w[0] < 0.01 * abs(w[0])
    assert np.allclose(v.T @ v, np.eye(20), atol=1e-10)
    assert np.allclose(h @ v, v * w, atol=1e-9 * np.abs(w).max())


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 1e2), st.sampled_from(["adjacency", "laplacian"]))
def test_hermitian_for_any_gamma(gamma, kind):
    part, q = single_mark(9)
    h = build(q, gamma, make_oracle(part), kind).matrix
    assert np.max(np.abs(h - h.T)) <= 1e-12 * max(1.0, np.abs(h).max())


def test_matrix_csv():
    text = matrix_to_csv(np.array([[1 / 3, 0.0], [0.0, 2.0]]), ["x", "y"], ["generated-by test"])
    lines = text.splitlines()
    assert lines[0] == "# generated-by test" and lines[1] == "x,y"
    assert float(lines[2].split(",")[0]) == 1 / 3
