"""Acceptance criteria, one test per criterion; conftest prints a PASS/FAIL line for each."""

import math
import time

import numpy as np
import pytest

import postulate_suites as ps
from complementarity.assignment import brute_force_assignment, max_assignment
from complementarity.fixtures import APPENDIX_B_STATE, appendix_b_bases, get_fixture
from complementarity.geometry import LinearProgram, contains_point_lp, enumerate_vertices_lp, solve_lp
from complementarity.measures import (
    complementarity_from_independence,
    rac_uncertainty_set,
    rescaling_independence,
    simulation_independence,
)
from complementarity.quantum import (
    ProjectiveMeasurement,
    born_stats,
    commuting_coarse_pairs,
    corner_states,
    projective_jointly_measurable,
    quantum_fully_complementary,
    quantum_single_outcome_complementary,
    quantum_statistics_set,
    rac_optimal_ps,
    rac_ps_eigen_oracle,
    random_unitary,
)
from complementarity.relations import (
    ICP_THRESHOLD_2DP,
    binary_entropy,
    centered_square_fits,
    check_exclusion_pur,
    check_rescaling_pur,
    check_reverse_pur,
    chsh_optimize,
    corner_distance,
    icp_lhs,
    icp_threshold,
)
from complementarity.theory import (
    StatisticsSet,
    find_stochastic_map,
    has_exclusion,
    has_strong_uncertainty,
    has_uncertainty,
    simulates,
)

SEED = 20240611
H2 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
SQUARE = StatisticsSet.from_binary_coords([(0, 0), (1, 0), (0, 1), (1, 1)])
CBIT = StatisticsSet.from_binary_coords([(0, 0), (1, 1)])
DIAMOND = StatisticsSet.from_binary_coords([(0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)])


def test_criterion_01_rescaling_pur_equality():
    start = time.perf_counter()
    grid = np.linspace(-0.99, 0.99, 103)[1:-1]  # 101 values strictly inside the interval
    assert len(grid) == 101
    for n_z in grid:
        analytic = check_rescaling_pur(float(n_z))
        geometric = check_rescaling_pur(float(n_z), geometric=True, resolution=256)
        assert abs(analytic.lhs - 1) <= 1e-6, n_z
        assert abs(geometric.lhs - 1) <= 5e-3, n_z
    assert time.perf_counter() - start < 5.0


def test_criterion_02_tsirelson_bound():
    start = time.perf_counter()
    circle = get_fixture("qubit", n_z=0.0, resolution=256).statistics_set
    value, a = chsh_optimize(circle, grid=101)
    assert value == pytest.approx(2 * math.sqrt(2), abs=5e-3)
    assert abs(a.t1 - 0.5) <= 0.02 and abs(a.t2 - 0.5) <= 0.02
    assert chsh_optimize(SQUARE, grid=101)[0] == pytest.approx(4.0, abs=1e-6)
    assert chsh_optimize(CBIT, grid=101)[0] == pytest.approx(2.0, abs=1e-3)
    assert time.perf_counter() - start < 60.0


def test_criterion_03_rac_values():
    assert rac_optimal_ps(np.eye(2), np.eye(2)) == pytest.approx(0.75, abs=1e-12)
    # 0.85355 is the rounded form of (1 + 1/sqrt(2)) / 2
    assert abs(rac_optimal_ps(np.eye(2), H2) - 0.5 * (1 + 1 / math.sqrt(2))) <= 1e-9
    assert round(rac_optimal_ps(np.eye(2), H2), 5) == 0.85355
    rng = np.random.default_rng(SEED)
    for d in (2, 3, 4):
        for _ in range(100):
            A, B = random_unitary(d, rng), random_unitary(d, rng)
            assert abs(rac_optimal_ps(A, B) - rac_ps_eigen_oracle(A, B)) <= 1e-9


def test_criterion_04_exclusion_pur():
    start = time.perf_counter()
    rng = np.random.default_rng(SEED)
    for d in range(2, 7):
        for _ in range(100):
            rep = check_exclusion_pur(random_unitary(d, rng), random_unitary(d, rng))
            assert rep.holds and rep.slack >= -1e-9, (d, rep.lhs, rep.rhs)
    mub = check_exclusion_pur(np.eye(2), H2)
    assert mub.witnesses["E"] == pytest.approx(0.14645, abs=1e-5)
    assert mub.witnesses["Ind"] == pytest.approx(0.41421, abs=1e-5)
    assert mub.rhs == pytest.approx(0.02145, abs=1e-5)
    assert time.perf_counter() - start < 30.0


def _random_sharp_polytope(rng):
    """One touch point per edge of the unit square plus a few interior points."""
    a, b, c, d = rng.random(4)
    pts = [(0.0, a), (1.0, b), (c, 0.0), (d, 1.0)]
    pts += [tuple(p) for p in rng.uniform(0.05, 0.95, size=(int(rng.integers(0, 5)), 2))]
    return StatisticsSet.from_binary_coords(pts), float(min(a, 1 - a, b, 1 - b, c, 1 - c, d, 1 - d))


def test_criterion_05_reverse_pur():
    for n_z in np.linspace(-0.95, 0.95, 21):
        assert check_reverse_pur(get_fixture("qubit", n_z=float(n_z)).statistics_set).holds, n_z
    assert check_reverse_pur(DIAMOND).holds
    assert check_reverse_pur(SQUARE).holds
    rng = np.random.default_rng(SEED)
    for k in range(200):
        S, t = _random_sharp_polytope(rng)
        assert corner_distance(S) == pytest.approx(t, abs=1e-12), k
        assert centered_square_fits(S, t), k
        # the square of side t bounds C_r from below, the touch point bounds U from above
        assert rescaling_independence(S).value >= t - 1e-9, k
        assert rac_uncertainty_set(S) <= t + 1e-9, k
        assert check_reverse_pur(S).holds, k


def test_criterion_06_icp_threshold():
    thr = icp_threshold()
    assert thr == pytest.approx(0.4402, abs=1e-4)
    assert round(thr, 2) == ICP_THRESHOLD_2DP
    assert binary_entropy(thr / 4) == pytest.approx(0.5, abs=1e-10)
    rng = np.random.default_rng(SEED)
    th = rng.uniform(0, 2 * np.pi, size=(1000, 2))
    q = 0.5 * (1 - np.stack([np.cos(th), np.sin(th)], axis=-1))
    for (x1, y1), (x2, y2) in q:
        assert icp_lhs(x1, y1, x2, 1 - y2) >= 1 - 1e-9


def _random_projective_pair(rng, d):
    """Generic pairs, and pairs that rotate only a subset of a shared basis."""
    A = random_unitary(d, rng)
    kind = rng.integers(3)
    if kind == 0:
        B = random_unitary(d, rng)
    elif kind == 1:
        idx = np.sort(rng.choice(d, size=int(rng.integers(2, d + 1)), replace=False))
        B = A.copy()
        B[:, idx] = A[:, idx] @ random_unitary(len(idx), rng)
    else:
        B = A[:, rng.permutation(d)]
    return ProjectiveMeasurement.from_basis(A), ProjectiveMeasurement.from_basis(B)


def test_criterion_07_lemma_suite():
    rng = np.random.default_rng(SEED)
    tally = {"noncommuting": 0, "so_complementary": 0}
    for d in (2, 3, 4):
        for _ in range(50):
            A, B = _random_projective_pair(rng, d)
            S = quantum_statistics_set(A, B)
            if not projective_jointly_measurable(A, B):
                tally["noncommuting"] += 1
                assert has_exclusion(S)
            if quantum_single_outcome_complementary(A, B):
                tally["so_complementary"] += 1
                assert has_uncertainty(S)
    assert min(tally.values()) > 0


def test_criterion_08_counterexample_fixtures():
    # ex1: non-commuting yet |2> is a corner
    F = get_fixture("ex1")
    A, B = F.measurements
    assert not projective_jointly_measurable(A, B)
    assert not has_uncertainty(F.statistics_set)
    found = [s for s in corner_states(A, B) if abs(abs(s[2]) - 1) <= 1e-9]
    assert found and max(born_stats(A, found[0])) >= 1 - 1e-9 and max(born_stats(B, found[0])) >= 1 - 1e-9

    # weird: not jointly measurable, statistics set is the whole square
    F = get_fixture("weird")
    assert not projective_jointly_measurable(*F.measurements)
    assert all(contains_point_lp(F.statistics_set.geometry, c) for c in [(0, 0), (1, 0), (0, 1), (1, 1)])

    # appendix-c: X is a non-extremal mixture of X1 and X2
    F = get_fixture("appendix-c")
    th = F.theory
    for src in ("X1", "X2"):
        L = find_stochastic_map(th.table(src), th.table("Y"))
        assert L is not None and np.allclose(th.table(src) @ L.matrix.T, th.table("Y"), atol=1e-9)
    assert simulates(th, "X", "Y") is None and simulates(th, "Y", "X") is None
    assert simulation_independence(F.statistics_set).value > 1e-9
    assert complementarity_from_independence(th, "X", "Y", decompositions=F.decompositions).value == \
        pytest.approx(0.0, abs=1e-9)

    # appendix-b: the state defeats strong uncertainty ...
    A, B = appendix_b_bases()
    assert not has_strong_uncertainty(get_fixture("appendix-b").statistics_set)
    rho = np.outer(APPENDIX_B_STATE, APPENDIX_B_STATE.conj())
    for M in (A, B):
        assert np.real(np.trace(sum(M.projectors[:3]) @ rho)) == pytest.approx(1.0, abs=1e-12)
    # ... and every pair of nontrivial coarse-grainings must fail to commute
    commuting, total = commuting_coarse_pairs(A, B, pairing="independent")
    assert quantum_fully_complementary(A, B, pairing="matched")
    assert quantum_fully_complementary(A, B), (
        f"{commuting} of {total} coarse-grained pairs commute, e.g. {{psi4, psi5}} | rest against {{phi4}} | rest")


def test_criterion_09_postulate_suites():
    rng = np.random.default_rng(SEED)
    n = 500
    found = {"uncertainty": ps.codes(ps.uncertainty_suite(rng, n))}
    for m in ("rac", "simulation", "rescaling"):
        found[f"independence/{m}"] = ps.codes(ps.independence_suite(rng, n, m))
    for m in ("noise", "simulation"):
        found[f"complementarity/{m}"] = ps.codes(ps.complementarity_suite(rng, n, m))
    for suite, counts in found.items():
        print(f"{suite}: {counts or 'no violations'}")
    assert all(not c for c in found.values()), {k: v for k, v in found.items() if v}


def _random_bounded_lp(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, 5))
    A = rng.normal(size=(m, n))
    b = rng.uniform(-0.3, 2.0, size=m)
    A_eq = rng.normal(size=(1, n)) if rng.random() < 0.3 else None
    b_eq = [float(rng.uniform(-0.2, 0.2))] if A_eq is not None else None
    return LinearProgram.from_arrays(rng.normal(size=n), A, b, A_eq, b_eq,
                                     [(0.0, float(u)) for u in rng.uniform(0.5, 3.0, size=n)])


def test_criterion_10_oracle_equivalence():
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        lp = _random_bounded_lp(rng)
        res, oracle = solve_lp(lp), enumerate_vertices_lp(lp)
        if oracle is None:
            assert res.status == "infeasible"
        else:
            assert res.optimal and abs(res.value - oracle) <= 1e-7
    for k in range(100):
        n = 1 + k % 6
        W = rng.normal(size=(n, n))
        if k % 3 == 0:
            W = np.round(W)  # ties
        (_, value), (_, brute) = max_assignment(W), brute_force_assignment(W)
        assert value == pytest.approx(brute, abs=1e-9)
