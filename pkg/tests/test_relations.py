import json
import math
from importlib import resources

import jsonschema
import numpy as np
import pytest

from complementarity.fixtures import get_fixture
from complementarity.geometry import contains_point
from complementarity.quantum import Degenerate, fourier_basis, random_unitary
from complementarity.relations import (
    ICP_THRESHOLD_2DP,
    NotSharp,
    NotSymmetric,
    RelationReport,
    binary_entropy,
    binary_entropy_inverse,
    centered_square_fits,
    check_chsh,
    check_exclusion_pur,
    check_rescaling_pur,
    check_reverse_pur,
    chsh_exact,
    chsh_optimize,
    chsh_symmetric,
    corner_distance,
    icp_lhs,
    icp_report,
    icp_threshold,
    is_diagonal_symmetric,
    is_sharp,
)
from complementarity.theory import StatisticsSet

H2 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
SQUARE = StatisticsSet.from_binary_coords([(0, 0), (1, 0), (0, 1), (1, 1)])
CBIT = StatisticsSet.from_binary_coords([(0, 0), (1, 1)])
DIAMOND = StatisticsSet.from_binary_coords([(0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)])
SCHEMA = json.loads(resources.files("complementarity").joinpath("schemas/relation_report.schema.json").read_text())


def test_report_hold_threshold():
    assert RelationReport.inequality("r", 1.0, 1.0 + 5e-8).holds
    assert not RelationReport.inequality("r", 1.0, 1.0 + 5e-7).holds
    rep = RelationReport.equality("r", 1.0, 1.002, 5e-3)
    assert rep.holds and rep.slack == pytest.approx(3e-3)


def test_exclusion_pur_examples():
    rep = check_exclusion_pur(np.eye(3), np.eye(3))
    assert rep.lhs == pytest.approx(0) and rep.rhs == pytest.approx(0) and rep.holds
    rep = check_exclusion_pur(np.eye(2), H2)
    assert rep.lhs == pytest.approx(0.14645, abs=1e-5)
    assert rep.rhs == pytest.approx(0.02145, abs=1e-5)
    assert rep.holds
    assert check_exclusion_pur(np.eye(5), fourier_basis(5)).holds


def test_exclusion_pur_random(rng):
    for d in (2, 3, 4):
        for _ in range(30):
            assert check_exclusion_pur(np.eye(d), random_unitary(d, rng)).holds


@pytest.mark.parametrize("n_z, c2, u2", [(0.0, 0.5, 0.5), (0.6, 0.2, 0.8), (-0.6, 0.2, 0.8)])
def test_rescaling_pur_examples(n_z, c2, u2):
    rep = check_rescaling_pur(n_z)
    assert rep.witnesses["C_r"] ** 2 == pytest.approx(c2)
    assert (1 - rep.witnesses["U"]) ** 2 == pytest.approx(u2)
    assert abs(rep.lhs - 1) <= 1e-6 and rep.holds


def test_rescaling_pur_geometric():
    for n_z in (-0.7, 0.0, 0.35):
        rep = check_rescaling_pur(n_z, geometric=True)
        assert abs(rep.lhs - 1) <= 5e-3 and rep.holds


def test_rescaling_pur_degenerate():
    with pytest.raises(Degenerate):
        check_rescaling_pur(1.0)


def test_reverse_pur_examples():
    rep = check_reverse_pur(SQUARE)
    assert rep.lhs == pytest.approx(2) and rep.rhs == pytest.approx(0)
    rep = check_reverse_pur(get_fixture("qubit", n_z=0.0).statistics_set)
    assert rep.lhs == pytest.approx(math.sqrt(2), abs=1e-3)
    assert rep.rhs == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-3)
    rep = check_reverse_pur(DIAMOND)
    assert rep.lhs == pytest.approx(1.0) and rep.holds
    assert rep.witnesses["corner_distance"] == pytest.approx(0.5)
    assert rep.witnesses["centered_square_fits"]


def test_reverse_pur_needs_sharp_set():
    inner = StatisticsSet.from_binary_coords([(0.2, 0.2), (0.8, 0.3), (0.5, 0.9)])
    assert not is_sharp(inner)
    with pytest.raises(NotSharp):
        check_reverse_pur(inner)


def test_corner_distance_and_square():
    S = StatisticsSet.from_binary_coords([(0.3, 0), (1, 0.2), (0.6, 1), (0, 0.9)])
    assert is_sharp(S)
    assert corner_distance(S) == pytest.approx(0.1)
    assert centered_square_fits(S, 0.1)
    assert not centered_square_fits(CBIT, 0.1)


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(0.5) == 1.0
    nats = -(0.11 * math.log(0.11) + 0.89 * math.log(0.89))
    assert binary_entropy(0.11) == pytest.approx(nats / math.log(2), abs=1e-14)
    assert binary_entropy(0.11) == pytest.approx(0.49993, abs=1e-4)
    with pytest.raises(ValueError):
        binary_entropy(1.2)


def test_binary_entropy_inverse():
    p = binary_entropy_inverse(0.5)
    assert p == pytest.approx(0.11003, abs=1e-5)
    assert binary_entropy(p) == pytest.approx(0.5, abs=1e-10)
    # independent oracle: Newton iteration on the same branch
    x = 0.1
    for _ in range(50):
        x -= (binary_entropy(x) - 0.5) / math.log2((1 - x) / x)
    assert p == pytest.approx(x, abs=1e-10)


def test_icp():
    assert icp_lhs(0.5, 0.5, 0.5, 0.5) == pytest.approx(2.0)
    h = binary_entropy_inverse(0.5)
    assert icp_lhs(h, h, h, h) == pytest.approx(1.0, abs=1e-9)
    assert icp_threshold() == pytest.approx(0.4402, abs=1e-4)
    assert round(icp_threshold(), 2) == ICP_THRESHOLD_2DP
    rep = icp_report()
    assert rep.holds and rep.witnesses["bound_Cr_minus_U"] == pytest.approx(0.56, abs=1e-3)
    with pytest.raises(ValueError):
        icp_lhs(-0.1, 0, 0, 0)


def test_icp_on_circle_boundary(rng):
    th = rng.uniform(0, 2 * np.pi, size=(200, 2))
    q = 0.5 * (1 - np.stack([np.cos(th), np.sin(th)], axis=-1))  # second-outcome probabilities
    for (x1, y1), (x2, y2) in q:
        assert icp_lhs(x1, y1, x2, 1 - y2) >= 1 - 1e-9


def test_chsh_symmetric_examples():
    assert chsh_symmetric(CBIT).value == pytest.approx(2.0)
    assert chsh_symmetric(SQUARE).value == pytest.approx(4.0)
    circle = get_fixture("qubit", n_z=0.0).statistics_set
    assert chsh_symmetric(circle).value == pytest.approx(2 * math.sqrt(2), abs=2e-3)


def test_chsh_symmetric_requires_symmetry():
    S = StatisticsSet.from_binary_coords([(0, 0), (1, 0), (0.2, 0.9)])
    assert not is_diagonal_symmetric(S)
    with pytest.raises(NotSymmetric):
        chsh_symmetric(S)


@pytest.mark.parametrize("S, value", [(SQUARE, 4.0), (CBIT, 2.0), (DIAMOND, 2.0)])
def test_chsh_exact_vs_grid(S, value):
    exact, _ = chsh_exact(S)
    grid, a = chsh_optimize(S, grid=11)
    assert exact == pytest.approx(value, abs=1e-6)
    assert grid == pytest.approx(value, abs=1e-3)
    assert a.value() == pytest.approx(grid, abs=1e-9)
    assert a.no_signaling_residual() <= 1e-7


def test_chsh_qubit_grid_and_assignment():
    S = get_fixture("qubit", n_z=0.0, resolution=128).statistics_set
    value, a = chsh_optimize(S, grid=21)
    assert value == pytest.approx(2 * math.sqrt(2), abs=5e-3)
    assert abs(a.t1 - 0.5) <= 0.05 and abs(a.t2 - 0.5) <= 0.05
    assert value <= chsh_symmetric(S).value + 1e-3
    for p in a.points:
        assert contains_point(S.geometry, 1 - p, tol=1e-7)
    assert set(a.variables) >= {"r1", "r2", "s1", "s2", "r1p", "s2p"}


def test_chsh_drops_when_corner_removed():
    cut = StatisticsSet.from_binary_coords([(0, 0), (1, 0), (0, 1), (1, 0.9), (0.9, 1)])
    assert chsh_exact(cut)[0] < chsh_exact(SQUARE)[0] - 1e-3


def test_chsh_random_sets_bounded_and_consistent(rng):
    for _ in range(10):
        S = StatisticsSet.from_binary_coords(rng.random((7, 2)))
        exact, _ = chsh_exact(S)
        grid, _ = chsh_optimize(S, grid=6, refine=False)
        assert grid <= exact + 1e-7 and exact <= 4 + 1e-9


def test_reports_match_schema():
    reports = [check_exclusion_pur(np.eye(2), H2), check_rescaling_pur(0.3), check_reverse_pur(DIAMOND),
               icp_report(), check_chsh(CBIT, grid=5)]
    for rep in reports:
        doc = json.loads(json.dumps(rep.to_json()))
        jsonschema.validate(doc, SCHEMA)
