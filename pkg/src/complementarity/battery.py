"""Reproduction battery: every worked example checked against its stated value."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .fixtures import (
    APPENDIX_B_STATE,
    APPENDIX_C_LAMBDA1,
    APPENDIX_C_LAMBDA2,
    appendix_b_bases,
    get_fixture,
)
from .measures import (
    complementarity_from_independence,
    preimage_measure_examples,
    qubit_rescaling,
    qubit_uncertainty,
    rac_exclusion,
    rac_independence,
    rac_independence_set,
    rac_uncertainty_set,
    rescaling_independence,
    simulation_independence,
    variation_of_information,
    volume_independence,
)
from .quantum import (
    QubitPair,
    born_stats,
    commuting_coarse_pairs,
    fourier_basis,
    overlap_matrix,
    projective_jointly_measurable,
    quantum_fully_complementary,
    rac_optimal_ps,
)
from .relations import chsh_optimize, check_exclusion_pur, check_rescaling_pur, check_reverse_pur, icp_threshold
from .theory import (
    StatisticsSet,
    find_stochastic_map,
    has_strong_uncertainty,
    has_uncertainty,
    jointly_measurable,
    simulates,
)
from .geometry import contains_point


@dataclass
class Item:
    group: str
    name: str
    expected: object
    computed: object
    tol: float | None = None

    @property
    def passed(self) -> bool:
        if self.tol is None:
            return self.expected == self.computed
        return abs(float(self.computed) - float(self.expected)) <= self.tol

    def row(self) -> dict:
        return {"group": self.group, "item": self.name, "expected": self.expected,
                "computed": self.computed, "tol": self.tol, "pass": self.passed}


MUB2 = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def _ex1() -> Iterator[Item]:
    F = get_fixture("ex1")
    A, B = F.measurements
    yield Item("ex1", "jointly measurable", False, projective_jointly_measurable(A, B))
    yield Item("ex1", "uncertainty", False, has_uncertainty(F.statistics_set))
    e2 = np.array([0, 0, 1], complex)
    yield Item("ex1", "|2> deterministic for both", True,
               bool(max(born_stats(A, e2)) > 1 - 1e-9 and max(born_stats(B, e2)) > 1 - 1e-9))


def _ex2() -> Iterator[Item]:
    F = get_fixture("ex2")
    A, B = F.measurements
    yield Item("ex2", "fully complementary", False, quantum_fully_complementary(A, B))
    yield Item("ex2", "uncertainty", True, has_uncertainty(F.statistics_set))


def _weird() -> Iterator[Item]:
    F = get_fixture("weird")
    A, B = F.measurements
    S = F.statistics_set
    yield Item("weird", "jointly measurable", False, projective_jointly_measurable(A, B))
    corners = [bool(contains_point(S.geometry, c)) for c in [(0, 0), (1, 0), (0, 1), (1, 1)]]
    yield Item("weird", "corners in statistics set", 4, sum(corners))
    yield Item("weird", "uncertainty", False, has_uncertainty(S))


def _appendix_b() -> Iterator[Item]:
    A, B = appendix_b_bases()
    F = get_fixture("appendix-b")
    yield Item("appendix-b", "|<psi1|phi1>|", 1 / math.sqrt(2), float(overlap_matrix(A.basis, B.basis)[0, 0]), 1e-12)
    yield Item("appendix-b", "fully complementary (matched coarse-grainings)", True,
               quantum_fully_complementary(A, B, pairing="matched"))
    c, n = commuting_coarse_pairs(A, B, pairing="independent")
    yield Item("appendix-b", "commuting independent coarse-graining pairs", 55, c)
    P1 = sum(A.projectors[:3])
    Q1 = sum(B.projectors[:3])
    rho = np.outer(APPENDIX_B_STATE, APPENDIX_B_STATE.conj())
    yield Item("appendix-b", "Tr(P1 rho)", 1.0, float(np.real(np.trace(P1 @ rho))), 1e-12)
    yield Item("appendix-b", "Tr(Q1 rho)", 1.0, float(np.real(np.trace(Q1 @ rho))), 1e-12)
    yield Item("appendix-b", "strong uncertainty", False, has_strong_uncertainty(F.statistics_set))


def _appendix_c() -> Iterator[Item]:
    F = get_fixture("appendix-c")
    th = F.theory
    yield Item("appendix-c", "q_X(P1)", "(0.625, 0, 0.375)", "(%g, %g, %g)" % tuple(th.q("X", "P1")))
    L1 = find_stochastic_map(th.table("X1"), th.table("Y"))
    L2 = find_stochastic_map(th.table("X2"), th.table("Y"))
    yield Item("appendix-c", "X1 -> Y map found", True, L1 is not None)
    yield Item("appendix-c", "X2 -> Y map found", True, L2 is not None)
    yield Item("appendix-c", "Lambda1 reproduces Y", True,
               bool(np.allclose(th.table("X1") @ APPENDIX_C_LAMBDA1.T, th.table("Y"))))
    yield Item("appendix-c", "Lambda2 reproduces Y", True,
               bool(np.allclose(th.table("X2") @ APPENDIX_C_LAMBDA2.T, th.table("Y"))))
    yield Item("appendix-c", "X -> Y infeasible", True, simulates(th, "X", "Y") is None)
    yield Item("appendix-c", "Y -> X infeasible", True, simulates(th, "Y", "X") is None)
    ind = simulation_independence(F.statistics_set).value
    yield Item("appendix-c", "Ind(S_XY) > 0", True, ind > 1e-9)
    C = complementarity_from_independence(th, "X", "Y", decompositions=F.decompositions).value
    yield Item("appendix-c", "complementarity", 0.0, C, 1e-9)


def _two_bit() -> Iterator[Item]:
    F = get_fixture("two-bit")
    w = jointly_measurable(F.theory, "X", "Y")
    yield Item("two-bit", "mother observable", "Z", None if w is None else w.mother)
    yield Item("two-bit", "complementarity", 0.0, complementarity_from_independence(F.theory, "X", "Y").value, 1e-9)


def _rac() -> Iterator[Item]:
    I2 = np.eye(2)
    yield Item("rac", "p_s identical bases d=2", 0.75, rac_optimal_ps(I2, I2), 1e-12)
    yield Item("rac", "p_s MUB d=2", 0.5 + 1 / (2 * math.sqrt(2)), rac_optimal_ps(I2, MUB2), 1e-9)
    yield Item("rac", "Ind MUB d=2", math.sqrt(2) - 1, rac_independence(I2, MUB2), 1e-9)
    yield Item("rac", "Ind Fourier d=3", (math.sqrt(3) - 1) / 2, rac_independence(np.eye(3), fourier_basis(3)), 1e-9)
    yield Item("rac", "E MUB d=2", 0.5 * (1 - 1 / math.sqrt(2)), rac_exclusion(I2, MUB2).value, 1e-9)
    yield Item("rac", "Ind identical", 0.0, rac_independence(I2, I2), 1e-12)
    yield Item("rac", "Ind diamond (set path)", 0.0, rac_independence_set(get_fixture("diamond").statistics_set).value,
               1e-9)


def _geometry() -> Iterator[Item]:
    sq = get_fixture("square-bit").statistics_set
    cb = get_fixture("c-bit").statistics_set
    dm = get_fixture("diamond").statistics_set
    yield Item("geometry", "Ind_r square", 1.0, rescaling_independence(sq).value, 1e-9)
    yield Item("geometry", "Ind_r c-bit", 0.0, rescaling_independence(cb).value, 1e-9)
    yield Item("geometry", "Ind_r diamond", 0.5, rescaling_independence(dm).value, 1e-9)
    yield Item("geometry", "U square", 0.0, rac_uncertainty_set(sq), 1e-12)
    for nz, ind_r, u in [(0.0, 1 / math.sqrt(2), 1 - 1 / math.sqrt(2)), (0.6, 0.8 / math.sqrt(3.2), 1 - 0.8 / math.sqrt(0.8))]:
        S = get_fixture("qubit", n_z=nz).statistics_set
        yield Item("geometry", f"Ind_r qubit n_z={nz}", ind_r, qubit_rescaling(nz), 1e-9)
        yield Item("geometry", f"Ind_r qubit n_z={nz} (256-gon)", ind_r, rescaling_independence(S).value, 1e-3)
        yield Item("geometry", f"U qubit n_z={nz}", u, qubit_uncertainty(nz), 1e-9)
        yield Item("geometry", f"U qubit n_z={nz} (256-gon)", u, rac_uncertainty_set(S), 1e-3)
        yield Item("geometry", f"volume qubit n_z={nz} (256-gon)", math.pi * QubitPair(nz).n_x,
                   volume_independence(S).value, 1e-3 * math.pi)


def _vi() -> Iterator[Item]:
    ex = preimage_measure_examples()
    yield Item("vi", "preimage c-bit", 0.0, ex["c-bit"].value, 1e-9)
    yield Item("vi", "preimage diamond", 1.0, ex["diamond"].value, 1e-9)
    yield Item("vi", "VI uniform product", 2.0, variation_of_information(np.full((2, 2), 0.25))[0], 1e-12)
    yield Item("vi", "VI [[.5,0],[.25,.25]]", 1.188722, variation_of_information([[0.5, 0], [0.25, 0.25]])[0], 1e-6)


def _relations() -> Iterator[Item]:
    r = check_exclusion_pur(np.eye(2), MUB2)
    yield Item("relations", "exclusion rhs MUB d=2", (math.sqrt(2) - 1) ** 2 / 8, r.rhs, 1e-9)
    yield Item("relations", "exclusion holds MUB d=2", True, r.holds)
    for nz in (-0.6, 0.0, 0.6):
        yield Item("relations", f"rescaling PUR n_z={nz}", 1.0, check_rescaling_pur(nz).lhs, 1e-6)
    for fid in ("square-bit", "diamond"):
        yield Item("relations", f"reverse PUR {fid}", True, check_reverse_pur(get_fixture(fid).statistics_set).holds)
    yield Item("relations", "ICP threshold", 0.44, icp_threshold(), 5e-3)


def _chsh() -> Iterator[Item]:
    for fid, expected, tol in [("qubit", 2 * math.sqrt(2), 5e-3), ("square-bit", 4.0, 1e-6), ("c-bit", 2.0, 1e-3)]:
        value, _ = chsh_optimize(get_fixture(fid).statistics_set)
        yield Item("chsh", f"I* {fid}", expected, value, tol)


GROUPS: dict[str, Callable[[], Iterator[Item]]] = {
    "ex1": _ex1, "ex2": _ex2, "weird": _weird, "appendix-b": _appendix_b, "appendix-c": _appendix_c,
    "two-bit": _two_bit, "rac": _rac, "geometry": _geometry, "vi": _vi, "relations": _relations, "chsh": _chsh,
}


def run_battery(only: str | None = None) -> list[Item]:
    if only is not None and only not in GROUPS:
        raise KeyError(f"unknown group {only!r}; available: {', '.join(GROUPS)}")
    names = [only] if only else list(GROUPS)
    return [item for name in names for item in GROUPS[name]()]
