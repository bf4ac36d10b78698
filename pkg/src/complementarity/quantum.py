"""Quantum instantiation: Born statistics, commutation, qubit ellipses, RAC overlaps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import unitary_group

from .geometry import Polytope
from .theory import StatisticsSet, StochasticMap, Theory, enumerate_coarse_grainings, paired_maps

HERM_TOL = 1e-10
COMM_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class QuantumError(ValueError):
    pass


class Degenerate(QuantumError):
    """The qubit pair collapses to a classical segment."""


@dataclass(frozen=True)
class HermitianOperator:
    entries: np.ndarray

    def __post_init__(self) -> None:
        H = np.array(self.entries, dtype=complex, copy=True)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise QuantumError("operator must be square")
        if np.max(np.abs(H - H.conj().T), initial=0.0) > HERM_TOL:
            raise QuantumError("operator is not Hermitian")
        H.setflags(write=False)
        object.__setattr__(self, "entries", H)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def pure(cls, vec) -> "HermitianOperator":
        v = np.asarray(vec, dtype=complex).ravel()
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))


def density(state) -> np.ndarray:
    """Density matrix from a state vector, a matrix or a HermitianOperator."""
    if isinstance(state, HermitianOperator):
        return state.entries
    a = np.asarray(state, dtype=complex)
    if a.ndim == 1:
        a = a / np.linalg.norm(a)
        return np.outer(a, a.conj())
    return a


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Orthogonal projectors summing to the identity; ``basis`` kept for rank-one measurements."""

    projectors: tuple
    basis: np.ndarray | None = None

    def __post_init__(self) -> None:
        projs = tuple(np.array(p, dtype=complex) for p in self.projectors)
        if not projs:
            raise QuantumError("a measurement needs at least one projector")
        d = projs[0].shape[0]
        for p in projs:
            if p.shape != (d, d):
                raise QuantumError("projectors must share one dimension")
            if np.max(np.abs(p - p.conj().T)) > HERM_TOL or np.max(np.abs(p @ p - p)) > HERM_TOL:
                raise QuantumError("not an orthogonal projector")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if np.max(np.abs(projs[i] @ projs[j])) > HERM_TOL:
                    raise QuantumError("projectors are not mutually orthogonal")
        if np.max(np.abs(sum(projs) - np.eye(d))) > HERM_TOL:
            raise QuantumError("projectors do not sum to the identity")
        object.__setattr__(self, "projectors", projs)

    @classmethod
    def from_basis(cls, vectors) -> "ProjectiveMeasurement":
        """Rank-one measurement; the columns of ``vectors`` are the (possibly unnormalized) basis vectors."""
        B = np.array(vectors, dtype=complex)
        B = B / np.linalg.norm(B, axis=0, keepdims=True)
        if np.max(np.abs(B.conj().T @ B - np.eye(B.shape[1]))) > HERM_TOL or B.shape[0] != B.shape[1]:
            raise QuantumError("basis vectors are not orthonormal and complete")
        return cls(tuple(np.outer(B[:, k], B[:, k].conj()) for k in range(B.shape[1])), B)

    @classmethod
    def computational(cls, d: int) -> "ProjectiveMeasurement":
        return cls.from_basis(np.eye(d))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)

    @property
    def is_rank_one(self) -> bool:
        return self.basis is not None

    def coarse_grain(self, L: StochasticMap) -> "ProjectiveMeasurement":
        if not L.is_deterministic:
            raise QuantumError("projective coarse-graining needs a deterministic map")
        M = L.matrix
        if M.shape[1] != self.n_outcomes:
            raise QuantumError("map width differs from outcome count")
        return ProjectiveMeasurement(tuple(sum(self.projectors[k] for k in range(M.shape[1]) if M[b, k] > 0.5)
                                           for b in range(M.shape[0])))


def born_stats(meas: ProjectiveMeasurement, rho) -> np.ndarray:
    R = density(rho)
    if R.shape != (meas.dim, meas.dim):
        raise QuantumError("state and measurement dimensions differ")
    if np.max(np.abs(R - R.conj().T)) > HERM_TOL:
        raise QuantumError("state is not Hermitian")
    if abs(np.trace(R).real - 1.0) > 1e-9:
        raise QuantumError("state is not normalized")
    if np.linalg.eigvalsh(R).min() < -1e-9:
        raise QuantumError("state is not positive semidefinite")
    p = np.array([np.trace(P @ R).real for P in meas.projectors])
    return np.clip(p, 0.0, None)


def commutator_norm(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.linalg.norm(P @ Q - Q @ P))


def projective_jointly_measurable(A: ProjectiveMeasurement, B: ProjectiveMeasurement) -> bool:
    if A.dim != B.dim:
        raise QuantumError("dimension mismatch")
    return all(commutator_norm(P, Q) <= COMM_TOL for P in A.projectors for Q in B.projectors)


def _coarse_pairs(A: ProjectiveMeasurement, B: ProjectiveMeasurement, mode: str, pairing: str = "independent"):
    if mode == "single_outcome":
        mx = enumerate_coarse_grainings(A.n_outcomes, "single_outcome")
        my = enumerate_coarse_grainings(B.n_outcomes, "single_outcome")
    else:
        mx = [StochasticMap.identity(A.n_outcomes)] + enumerate_coarse_grainings(A.n_outcomes, mode)
        my = [StochasticMap.identity(B.n_outcomes)] + enumerate_coarse_grainings(B.n_outcomes, mode)
    return [(A.coarse_grain(L1), B.coarse_grain(L2)) for L1, L2 in paired_maps(mx, my, pairing)]


def commuting_coarse_pairs(A: ProjectiveMeasurement, B: ProjectiveMeasurement, mode: str = "all_nontrivial",
                           pairing: str = "independent") -> tuple[int, int]:
    """``(commuting, total)`` over the coarse-grained pairs of the given mode."""
    pairs = _coarse_pairs(A, B, mode, pairing)
    return sum(projective_jointly_measurable(a, b) for a, b in pairs), len(pairs)


def quantum_fully_complementary(A: ProjectiveMeasurement, B: ProjectiveMeasurement,
                                pairing: str = "independent") -> bool:
    return not any(projective_jointly_measurable(a, b) for a, b in _coarse_pairs(A, B, "all_nontrivial", pairing))


def quantum_single_outcome_complementary(A: ProjectiveMeasurement, B: ProjectiveMeasurement,
                                         pairing: str = "independent") -> bool:
    return not any(projective_jointly_measurable(a, b) for a, b in _coarse_pairs(A, B, "single_outcome", pairing))


def common_eigenvectors(P: np.ndarray, Q: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Orthonormal basis (columns) of range(P) ∩ range(Q)."""
    d = P.shape[0]
    I = np.eye(d)
    K = np.vstack([I - P, I - Q])
    _, s, vh = np.linalg.svd(K)
    null = vh[np.sum(s > tol):].conj().T
    return null


# ---------------------------------------------------------------------------
# Theories generated by quantum states
# ---------------------------------------------------------------------------


def theory_from_states(measurements: Mapping[str, ProjectiveMeasurement], states: Sequence,
                       names: Sequence[str] | None = None, name: str = "quantum") -> Theory:
    """Finite theory whose generating preparations are the given states."""
    names = list(names) if names is not None else [f"psi{i}" for i in range(len(states))]
    stats = {n: {m: born_stats(M, s) for m, M in measurements.items()} for n, s in zip(names, states)}
    flags = {m: {"sharp": True, "clean": M.is_rank_one, "extremal": M.is_rank_one} for m, M in measurements.items()}
    return Theory.from_stats(stats, name=name, flags=flags)


def corner_states(A: ProjectiveMeasurement, B: ProjectiveMeasurement, mode: str = "binary") -> list[np.ndarray]:
    """Eigenvectors of both measurements plus every common eigenvector of coarse-grained projector pairs.

    Quantum corners (both outcomes certain) occur exactly on such common
    eigenvectors, so a theory built from these states reproduces every
    corner of the quantum statistics set and all of its coarse-grainings.
    """
    states = []
    for M in (A, B):
        if M.basis is not None:
            states += [M.basis[:, k] for k in range(M.n_outcomes)]
        else:
            for P in M.projectors:
                w, v = np.linalg.eigh(P)
                states += [v[:, k] for k in range(len(w)) if w[k] > 0.5]
    pairs = _coarse_pairs(A, B, mode) if mode else [(A, B)]
    seen = set()
    for a, b in pairs:
        for P in a.projectors:
            for Q in b.projectors:
                V = common_eigenvectors(P, Q)
                for k in range(V.shape[1]):
                    key = tuple(np.round(np.abs(V[:, k]), 9))
                    if key not in seen:
                        seen.add(key)
                        states.append(V[:, k])
    return states


def quantum_theory(A: ProjectiveMeasurement, B: ProjectiveMeasurement, extra_states: Iterable = (),
                   names=("X", "Y"), coarse: str = "binary") -> Theory:
    states = corner_states(A, B, coarse) + [np.asarray(s, complex) for s in extra_states]
    return theory_from_states({names[0]: A, names[1]: B}, states, name="quantum")


def quantum_statistics_set(A: ProjectiveMeasurement, B: ProjectiveMeasurement, extra_states: Iterable = (),
                           coarse: str = "binary") -> StatisticsSet:
    states = corner_states(A, B, coarse) + [np.asarray(s, complex) for s in extra_states]
    qx = np.array([born_stats(A, s) for s in states])
    qy = np.array([born_stats(B, s) for s in states])
    return StatisticsSet.from_points(qx, qy)


# ---------------------------------------------------------------------------
# Qubit family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QubitPair:
    """Z = sigma_z together with X = n . sigma, n = (n_x, 0, n_z), n_x >= 0."""

    n_z: float

    def __post_init__(self) -> None:
        if not -1.0 <= self.n_z <= 1.0:
            raise QuantumError("n_z must lie in [-1, 1]")

    @property
    def n_x(self) -> float:
        return math.sqrt(max(0.0, 1.0 - self.n_z ** 2))

    @property
    def a(self) -> float:
        """Semi-axis along the (1, 1) diagonal of the average square."""
        return math.sqrt(1.0 + self.n_z)

    @property
    def b(self) -> float:
        """Semi-axis along the (1, -1) diagonal."""
        return math.sqrt(1.0 - self.n_z)

    def operators(self) -> tuple[np.ndarray, np.ndarray]:
        return SIGMA_Z, self.n_x * SIGMA_X + self.n_z * SIGMA_Z

    def measurements(self) -> tuple[ProjectiveMeasurement, ProjectiveMeasurement]:
        out = []
        for op in self.operators():
            w, v = np.linalg.eigh(op)
            out.append(ProjectiveMeasurement.from_basis(v[:, ::-1]))  # outcome 1 <-> eigenvalue +1
        return tuple(out)


@dataclass(frozen=True)
class QubitEllipse:
    pair: QubitPair
    resolution: int = 256

    @property
    def a(self) -> float:
        return self.pair.a

    @property
    def b(self) -> float:
        return self.pair.b

    def sample(self, theta) -> np.ndarray:
        """Boundary points ``(<Z>, <X>)`` at angles ``theta``."""
        theta = np.asarray(theta, dtype=float)
        u = self.a * np.cos(theta)
        v = self.b * np.sin(theta)
        z = (u - v) / math.sqrt(2)
        x = (u + v) / math.sqrt(2)
        return np.stack([z, x], axis=-1)

    def residual(self, points) -> np.ndarray:
        """Implicit ellipse equation, zero on the boundary."""
        p = np.atleast_2d(points)
        u = (p[:, 0] + p[:, 1]) / math.sqrt(2)
        v = (p[:, 1] - p[:, 0]) / math.sqrt(2)
        return (u / self.a) ** 2 + (v / self.b) ** 2 - 1.0

    def boundary_points(self) -> np.ndarray:
        """Uniform angle samples plus the four eigenstate points, where the set meets the square."""
        pts = self.sample(2 * np.pi * np.arange(self.resolution) / self.resolution)
        nz = self.pair.n_z
        eig = np.array([[1.0, nz], [-1.0, -nz], [nz, 1.0], [-nz, -1.0]])
        return np.vstack([pts, eig])

    def polygon(self) -> Polytope:
        """Inscribed polygon in average coordinates."""
        return Polytope.from_points(self.boundary_points())

    def statistics_set(self) -> StatisticsSet:
        """The polygon in probability coordinates ``(q_Z(2), q_X(2))``."""
        return StatisticsSet.from_binary_coords((1.0 - self.boundary_points()) / 2.0, x="Z", y="X")


def qubit_statistics_ellipse(q: QubitPair | float, resolution: int = 256) -> QubitEllipse:
    if not isinstance(q, QubitPair):
        q = QubitPair(float(q))
    if q.n_x < 1e-12 or abs(q.n_z) >= 1.0:
        raise Degenerate("n_x = 0: the statistics set is a classical segment")
    return QubitEllipse(q, resolution)


def bloch_state(s) -> np.ndarray:
    sx, sy, sz = s
    return 0.5 * (np.eye(2) + sx * SIGMA_X + sy * SIGMA_Y + sz * SIGMA_Z)


# ---------------------------------------------------------------------------
# Overlaps and random access codes
# ---------------------------------------------------------------------------


def _basis_matrix(b) -> np.ndarray:
    if isinstance(b, ProjectiveMeasurement):
        if b.basis is None:
            raise QuantumError("rank-one measurement required")
        return b.basis
    B = np.array(b, dtype=complex)
    return B / np.linalg.norm(B, axis=0, keepdims=True)


def overlap_matrix(basisA, basisB) -> np.ndarray:
    A, B = _basis_matrix(basisA), _basis_matrix(basisB)
    if A.shape != B.shape:
        raise QuantumError("dimension mismatch")
    return np.abs(A.conj().T @ B)


def rac_optimal_ps(basisA, basisB) -> float:
    U = overlap_matrix(basisA, basisB)
    d = U.shape[0]
    return 0.5 + U.sum() / (2 * d * d)


def jacobi_eigvalsh(H: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    The complex matrix is embedded as the real symmetric ``[[Re, -Im], [Im, Re]]``
    whose spectrum is that of ``H`` with every eigenvalue doubled; one copy
    of each is returned.
    """
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    A = np.block([[H.real, -H.imag], [H.imag, H.real]]).astype(float)
    m = 2 * n
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < tol:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                if abs(A[p, q]) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * A[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                Ap, Aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap, Aq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
    w = np.sort(np.diag(A))
    return w[::2]


def rac_ps_eigen_oracle(basisA, basisB) -> float:
    """Average over inputs of the top eigenvalue of ``|a><a| + |psi><psi|``, halved."""
    A, B = _basis_matrix(basisA), _basis_matrix(basisB)
    d = A.shape[0]
    total = 0.0
    for i in range(d):
        for j in range(d):
            M = np.outer(A[:, i], A[:, i].conj()) + np.outer(B[:, j], B[:, j].conj())
            total += jacobi_eigvalsh(M)[-1]
    return total / (2 * d * d)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.ones((1, 1), complex)


def fourier_basis(d: int) -> np.ndarray:
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / math.sqrt(d)
