"""Named example theories used by the CLI and the verification battery."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quantum import ProjectiveMeasurement, QubitPair, qubit_statistics_ellipse, quantum_theory
from .theory import StatisticsSet, Theory, mix_observables


class UnknownFixture(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown fixture {self.name!r}; available: {', '.join(FIXTURE_IDS)}"


@dataclass(frozen=True)
class Fixture:
    id: str
    description: str
    theory: Theory
    pair: tuple[str, str]
    measurements: tuple[ProjectiveMeasurement, ProjectiveMeasurement] | None = None
    decompositions: tuple = ()
    extra: dict = field(default_factory=dict)

    @property
    def statistics_set(self) -> StatisticsSet:
        X, Y = self.pair
        return StatisticsSet.from_points(self.theory.table(X), self.theory.table(Y), X, Y)


def _binary_theory(points, name: str, x: str = "X", y: str = "Y") -> Theory:
    stats = {f"P{i + 1}": {x: [1 - px, px], y: [1 - py, py]} for i, (px, py) in enumerate(points)}
    return Theory.from_stats(stats, name=name)


def _projectors_from(vectors_by_outcome, d: int) -> ProjectiveMeasurement:
    projs = []
    for vecs in vectors_by_outcome:
        P = np.zeros((d, d), dtype=complex)
        for v in vecs:
            v = np.asarray(v, dtype=complex)
            v = v / np.linalg.norm(v)
            P += np.outer(v, v.conj())
        projs.append(P)
    return ProjectiveMeasurement(tuple(projs))


def ket(d: int, *amps) -> np.ndarray:
    """Vector from (index, amplitude) pairs."""
    v = np.zeros(d, dtype=complex)
    for i, a in amps:
        v[i] += a
    return v


def ex1_measurements():
    """sigma_x (+) 1 and sigma_z (+) 1 on C^3, outcomes ordered by eigenvalue +1, -1."""
    s = 1 / math.sqrt(2)
    X = _projectors_from([[ket(3, (0, s), (1, s)), ket(3, (2, 1))], [ket(3, (0, s), (1, -s))]], 3)
    Z = _projectors_from([[ket(3, (0, 1)), ket(3, (2, 1))], [ket(3, (1, 1))]], 3)
    return X, Z


def ex2_measurements():
    """sigma_x (+) sigma_x and sigma_z (+) sigma_z on C^4, one outcome per block eigenvector."""
    s = 1 / math.sqrt(2)
    X = ProjectiveMeasurement.from_basis(np.array([[s, s, 0, 0], [s, -s, 0, 0], [0, 0, s, s], [0, 0, s, -s]]).T)
    return X, ProjectiveMeasurement.computational(4)


def weird_measurements():
    """Dichotomic M, N on C^6; basis |1>..|6> stored at indices 0..5, |+-> built on |1>, |2>."""
    s = 1 / math.sqrt(2)
    e = lambda i: ket(6, (i - 1, 1))  # noqa: E731
    plus, minus = ket(6, (0, s), (1, s)), ket(6, (0, s), (1, -s))
    M = _projectors_from([[e(1), e(3), e(4)], [e(2), e(5), e(6)]], 6)
    N = _projectors_from([[plus, e(3), e(5)], [minus, e(4), e(6)]], 6)
    return M, N


def appendix_b_bases():
    d = 5
    chi = ket(d, (0, 1), (1, -1), (2, -2)) / math.sqrt(6)
    e3, e4 = ket(d, (3, 1)), ket(d, (4, 1))
    psi = [ket(d, (0, 1)), ket(d, (1, 1)), ket(d, (2, 1)), ket(d, (3, 1), (4, 1)), ket(d, (3, 1), (4, -1))]
    phi = [ket(d, (0, 1), (1, 1)), ket(d, (0, 1), (1, -1), (2, 1)), e3 + chi, e4, e3 - chi]
    return ProjectiveMeasurement.from_basis(np.array(psi).T), ProjectiveMeasurement.from_basis(np.array(phi).T)


APPENDIX_B_STATE = ket(5, (0, 2), (2, 1)) / math.sqrt(5)


def appendix_c_theory() -> Theory:
    q = 0.25
    stats = {
        "P1": {"X1": [1, 0, 0], "X2": [q, 0, 1 - q], "Y": [q, 1 - q, 0]},
        "P2": {"X1": [0, 1, 0], "X2": [1 - q, 0, q], "Y": [1 - q, q, 0]},
        "P3": {"X1": [0, 0, 1], "X2": [0, 1, 0], "Y": [0, 0, 1]},
    }
    th = Theory.from_stats(stats, name="appendix-c")
    X = mix_observables(th, "X1", "X2", 0.5, "X")
    return th.with_observable("X", X.table, {"extremal": False})


APPENDIX_C_LAMBDA1 = np.array([[0.25, 0.75, 0], [0.75, 0.25, 0], [0, 0, 1]])
APPENDIX_C_LAMBDA2 = np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]])


def two_bit_theory() -> Theory:
    stats = {}
    for k, (b1, b2) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        z = [0.0] * 4
        z[k] = 1.0
        stats[f"P{b1}{b2}"] = {"X": [1 - b1, b1], "Y": [1 - b2, b2], "Z": z}
    return Theory.from_stats(stats, name="two-bit")


def _quantum(fid: str, desc: str, A, B, extra_states=(), coarse="binary", **extra) -> Fixture:
    return Fixture(fid, desc, quantum_theory(A, B, extra_states, coarse=coarse), ("X", "Y"), (A, B), extra=extra)


def qubit_fixture(n_z: float = 0.0, resolution: int = 256) -> Fixture:
    q = QubitPair(float(n_z))
    S = qubit_statistics_ellipse(q, resolution).statistics_set()
    stats = {f"theta{i}": {"Z": list(S.qx[i]), "X": list(S.qy[i])} for i in range(len(S.qx))}
    th = Theory.from_stats(stats, name=f"qubit(n_z={n_z:g})")
    return Fixture("qubit", f"qubit pair Z and n.sigma with n_z={n_z:g}, {resolution}-gon",
                   th, ("Z", "X"), q.measurements(), extra={"n_z": float(n_z), "resolution": resolution})


_BUILDERS: dict[str, Callable[..., Fixture]] = {
    "ex1": lambda **_: _quantum("ex1", "block sigma_x, sigma_z plus a shared +1 eigenvector", *ex1_measurements()),
    "ex2": lambda **_: _quantum("ex2", "two sigma_x, sigma_z blocks, fine-grained", *ex2_measurements(),
                                coarse="all_nontrivial"),
    "weird": lambda **_: _quantum("weird", "dichotomic measurements on C^6 with a full square", *weird_measurements()),
    "appendix-b": lambda **_: _quantum("appendix-b", "two bases of C^5, fully complementary", *appendix_b_bases(),
                                       extra_states=[APPENDIX_B_STATE], coarse=None),
    "appendix-c": lambda **_: Fixture("appendix-c", "non-extremal X = (X1 + X2)/2 against Y", appendix_c_theory(),
                                      ("X", "Y"), decompositions=(([(0.5, "X1"), (0.5, "X2")], [(1.0, "Y")]),)),
    "qubit": lambda n_z=0.0, resolution=256, **_: qubit_fixture(n_z, resolution),
    "square-bit": lambda **_: Fixture("square-bit", "full square of two bits",
                                      _binary_theory([(0, 0), (1, 0), (0, 1), (1, 1)], "square-bit"), ("X", "Y")),
    "c-bit": lambda **_: Fixture("c-bit", "classical bit measured twice",
                                 _binary_theory([(0, 0), (1, 1)], "c-bit"), ("X", "Y")),
    "diamond": lambda **_: Fixture("diamond", "square rotated by 45 degrees inside the unit square",
                                   _binary_theory([(0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5)], "diamond"), ("X", "Y")),
    "two-bit": lambda **_: Fixture("two-bit", "two bits read by X, Y and jointly by Z", two_bit_theory(), ("X", "Y")),
}

FIXTURE_IDS = tuple(_BUILDERS)


def get_fixture(fid: str, **params) -> Fixture:
    try:
        builder = _BUILDERS[fid]
    except KeyError:
        raise UnknownFixture(fid) from None
    return builder(**params)
