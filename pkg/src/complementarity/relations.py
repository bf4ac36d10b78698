"""Uncertainty relations and the CHSH bound under no-signaling."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import LinearProgram, Polytope, contains_point, solve_lp
from .measures import (
    MeasureReport,
    _jsonable,
    qubit_rescaling,
    qubit_uncertainty,
    rac_exclusion,
    rac_independence,
    rac_uncertainty_set,
    rescaling_independence,
)
from .quantum import QubitPair, qubit_statistics_ellipse
from .theory import StatisticsSet

HOLD_TOL = 1e-7


class NotSharp(ValueError):
    """The statistics set misses an edge of the square."""


class NotSymmetric(ValueError):
    """The statistics set is not symmetric about the diagonal."""


@dataclass
class RelationReport:
    relation: str
    lhs: float
    rhs: float
    slack: float
    holds: bool
    parameter: float | str | None = None
    witnesses: dict = field(default_factory=dict)

    @classmethod
    def inequality(cls, relation: str, lhs: float, rhs: float, **kw) -> "RelationReport":
        slack = float(lhs) - float(rhs)
        return cls(relation, float(lhs), float(rhs), slack, slack >= -HOLD_TOL, **kw)

    @classmethod
    def equality(cls, relation: str, lhs: float, rhs: float, tol: float, **kw) -> "RelationReport":
        slack = tol - abs(float(lhs) - float(rhs))
        return cls(relation, float(lhs), float(rhs), slack, slack >= -HOLD_TOL, **kw)

    def to_json(self) -> dict:
        out = {"relation": self.relation, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
               "holds": bool(self.holds), "witnesses": _jsonable(self.witnesses)}
        if self.parameter is not None:
            out["parameter"] = self.parameter
        return out


# ---------------------------------------------------------------------------
# Exclusion and rescaling relations
# ---------------------------------------------------------------------------


def check_exclusion_pur(basisA, basisB) -> RelationReport:
    """E >= Ind^2 / (4d) for two rank-one bases."""
    exc = rac_exclusion(basisA, basisB)
    ind = rac_independence(basisA, basisB)
    d = np.asarray(basisA.basis if hasattr(basisA, "basis") else basisA).shape[0]
    return RelationReport.inequality("exclusion-pur", exc.value, ind ** 2 / (4 * d),
                                     witnesses={"E": exc.value, "Ind": ind, "d": d})


def check_rescaling_pur(q: QubitPair | float, geometric: bool = False, resolution: int = 256) -> RelationReport:
    """C_r^2 + (1 - U)^2 = 1 for the qubit family, analytically or from the polygon."""
    q = q if isinstance(q, QubitPair) else QubitPair(float(q))
    if geometric:
        S = qubit_statistics_ellipse(q, resolution).statistics_set()
        c, u, tol = rescaling_independence(S).value, rac_uncertainty_set(S), 5e-3
    else:
        qubit_statistics_ellipse(q)  # rejects the degenerate pair
        c, u, tol = qubit_rescaling(q), qubit_uncertainty(q), 1e-6
    return RelationReport.equality("rescaling-pur", c * c + (1 - u) ** 2, 1.0, tol, parameter=q.n_z,
                                   witnesses={"C_r": c, "U": u, "geometric": geometric})


def edge_touch_points(S: StatisticsSet, tol: float = 1e-9) -> dict[str, np.ndarray]:
    """Boundary points of the hull lying on each edge of the unit square."""
    V = S.geometry.vertices
    return {
        "x=0": V[np.abs(V[:, 0]) <= tol],
        "x=1": V[np.abs(V[:, 0] - 1) <= tol],
        "y=0": V[np.abs(V[:, 1]) <= tol],
        "y=1": V[np.abs(V[:, 1] - 1) <= tol],
    }


def is_sharp(S: StatisticsSet, tol: float = 1e-9) -> bool:
    return S.is_binary and all(len(v) for v in edge_touch_points(S, tol).values())


def corner_distance(S: StatisticsSet, tol: float = 1e-9) -> float:
    """Smallest distance along an edge from a boundary touch point to a square corner."""
    t = math.inf
    for key, pts in edge_touch_points(S, tol).items():
        coord = pts[:, 1] if key.startswith("x") else pts[:, 0]
        if len(coord):
            t = min(t, float(np.min(np.minimum(coord, 1 - coord))))
    return max(t, 0.0)


def centered_square_fits(S: StatisticsSet, side: float, tol: float = 1e-9) -> bool:
    h = side / 2
    return all(contains_point(S.geometry, (0.5 + sx * h, 0.5 + sy * h), tol) for sx in (-1, 1) for sy in (-1, 1))


def check_reverse_pur(S: StatisticsSet) -> RelationReport:
    """2 C_r >= U for a sharp binary pair."""
    if not S.is_binary:
        raise ValueError("the reverse relation is stated for binary observables")
    if not is_sharp(S):
        raise NotSharp("the statistics set does not touch all four edges of the square")
    c = rescaling_independence(S).value
    u = rac_uncertainty_set(S)
    t = corner_distance(S)
    return RelationReport.inequality("reverse-pur", 2 * c, u, witnesses={
        "C_r": c, "U": u, "corner_distance": t, "centered_square_fits": centered_square_fits(S, t)})


# ---------------------------------------------------------------------------
# Information content principle
# ---------------------------------------------------------------------------


def binary_entropy(p: float) -> float:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def binary_entropy_inverse(y: float, tol: float = 1e-12) -> float:
    """The p in [0, 1/2] with h(p) = y, by bisection."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"entropy {y} outside [0, 1]")
    lo, hi = 0.0, 0.5
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def icp_lhs(r1: float, r2: float, s1: float, s2: float) -> float:
    for v in (r1, r2, s1, s2):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"parameter {v} outside [0, 1]")
    return binary_entropy((r1 + s1) / 2) + binary_entropy((r2 + s2) / 2)


ICP_THRESHOLD_2DP = 0.44


def icp_threshold() -> float:
    """Smallest r1 + r2 + s1 + s2 compatible with the symmetric relation: 4 h^{-1}(1/2)."""
    return 4 * binary_entropy_inverse(0.5)


def icp_report() -> RelationReport:
    th = icp_threshold()
    return RelationReport.equality("icp", th, ICP_THRESHOLD_2DP, 5e-3, witnesses={
        "threshold": th, "rounded_2dp": ICP_THRESHOLD_2DP, "h_inverse_half": th / 4,
        "bound_Cr_minus_U": 1 - th, "rounded_bound_Cr_minus_U": 1 - ICP_THRESHOLD_2DP})


# ---------------------------------------------------------------------------
# CHSH under no-signaling
# ---------------------------------------------------------------------------


def _plus_coords(S: StatisticsSet) -> np.ndarray:
    """Hull vertices as (q_B1(+), q_B2(+)) with + the first outcome."""
    return 1.0 - S.geometry.vertices


def _objective_terms(P: np.ndarray) -> np.ndarray:
    """Per-vertex CHSH contributions for the four steered preparations, shape (4, V)."""
    u, v = P[:, 0], P[:, 1]
    return np.vstack([2 * u + 2 * v - 2, 2 - 2 * u - 2 * v, 2 * u - 2 * v, 2 * v - 2 * u])


def is_diagonal_symmetric(S: StatisticsSet, tol: float = 1e-7) -> bool:
    V = S.geometry.vertices
    images = np.vstack([V[:, ::-1], 1 - V])
    return all(contains_point(S.geometry, p, tol) for p in images)


def chsh_symmetric(S: StatisticsSet) -> MeasureReport:
    """I = 2 + 2 (C_r - U) for sets symmetric about the diagonal."""
    if not S.is_binary:
        raise ValueError("CHSH needs binary observables")
    if not is_diagonal_symmetric(S):
        raise NotSymmetric("statistics set is not closed under coordinate swap and complement")
    c = rescaling_independence(S).value
    u = rac_uncertainty_set(S)
    return MeasureReport("chsh-symmetric", 2 + 2 * (c - u), {"C_r": c, "U": u})


@dataclass(frozen=True)
class SteeringAssignment:
    """Alice's marginals t1, t2 and Bob's four steered points in (q_B1(+), q_B2(+))."""

    t1: float
    t2: float
    points: np.ndarray  # rows: A1+, A1-, A2+, A2-

    @property
    def variables(self) -> dict[str, float]:
        (u1, v1), (u2, v2), (u3, v3), (u4, v4) = self.points
        return {"t1": self.t1, "t2": self.t2,
                "r1": 1 - u1, "r2": 1 - v1, "r1p": u2, "r2p": v2,
                "s1": 1 - u3, "s2": v3, "s1p": u4, "s2p": 1 - v4}

    def value(self) -> float:
        w = np.array([self.t1, 1 - self.t1, self.t2, 1 - self.t2])
        terms = np.array([_objective_terms(p[None, :])[k, 0] for k, p in enumerate(self.points)])
        return float(w @ terms)

    def no_signaling_residual(self) -> float:
        w1 = np.array([self.t1, 1 - self.t1])
        w2 = np.array([self.t2, 1 - self.t2])
        lhs = w1 @ self.points[:2]
        rhs = w2 @ self.points[2:]
        return float(np.max(np.abs(lhs - rhs)))


def _inner_lp(P: np.ndarray, G: np.ndarray, t1: float, t2: float):
    """Best steered points for fixed (t1, t2): convex weights over vertices for each of four points."""
    V = P.shape[0]
    w = np.array([t1, 1 - t1, t2, 1 - t2])
    c = (w[:, None] * G).ravel()
    A = np.zeros((6, 4 * V))
    b = np.zeros(6)
    for k in range(4):
        A[k, k * V:(k + 1) * V] = 1.0
        b[k] = 1.0
    for coord in range(2):
        A[4 + coord, 0:V] = t1 * P[:, coord]
        A[4 + coord, V:2 * V] = (1 - t1) * P[:, coord]
        A[4 + coord, 2 * V:3 * V] = -t2 * P[:, coord]
        A[4 + coord, 3 * V:4 * V] = -(1 - t2) * P[:, coord]
    lp = LinearProgram(c, [(A[i], "=", b[i]) for i in range(6)])
    return solve_lp(lp)


def chsh_optimize(S: StatisticsSet, grid: int = 101, refine: bool = True) -> tuple[float, SteeringAssignment]:
    """Maximize the CHSH expression over no-signaling steering into S.

    For each (t1, t2) on a uniform grid the remaining problem is linear in
    the steered points. The best cell is refined once on a finer local grid.
    Ties keep the lexicographically smallest (t1, t2).
    """
    if not S.is_binary:
        raise ValueError("CHSH needs binary observables")
    P = _plus_coords(S)
    G = _objective_terms(P)
    V = P.shape[0]
    best = (-math.inf, None, None)

    def visit(t1: float, t2: float):
        nonlocal best
        res = _inner_lp(P, G, t1, t2)
        if res.optimal and res.value > best[0] + 1e-12:
            best = (res.value, (t1, t2), res.x)

    ts = np.linspace(0.0, 1.0, grid)
    for t1 in ts:
        for t2 in ts:
            visit(float(t1), float(t2))
    if refine and grid > 1:
        step = 1.0 / (grid - 1)
        c1, c2 = best[1]
        fine = np.linspace(-step, step, 11)
        for d1 in fine:
            for d2 in fine:
                t1, t2 = c1 + d1, c2 + d2
                if 0.0 <= t1 <= 1.0 and 0.0 <= t2 <= 1.0:
                    visit(float(t1), float(t2))
    value, (t1, t2), lam = best
    points = np.array([lam[k * V:(k + 1) * V] @ P for k in range(4)])
    return float(value), SteeringAssignment(t1, t2, points)


def chsh_exact(S: StatisticsSet) -> tuple[float, SteeringAssignment]:
    """Global optimum from one LP in the products mu = t * lambda."""
    P = _plus_coords(S)
    G = _objective_terms(P)
    V = P.shape[0]
    c = G.ravel()
    A = np.zeros((4, 4 * V))
    b = np.array([1.0, 1.0, 0.0, 0.0])
    A[0, :2 * V] = 1.0
    A[1, 2 * V:] = 1.0
    for coord in range(2):
        A[2 + coord, :2 * V] = np.tile(P[:, coord], 2)
        A[2 + coord, 2 * V:] = -np.tile(P[:, coord], 2)
    res = solve_lp(LinearProgram(c, [(A[i], "=", b[i]) for i in range(4)]))
    mu = res.x.reshape(4, V)
    mass = mu.sum(axis=1)
    points = np.array([(mu[k] @ P) / mass[k] if mass[k] > 1e-12 else P[0] for k in range(4)])
    return float(res.value), SteeringAssignment(float(mass[0]), float(mass[2]), points)


def check_chsh(S: StatisticsSet, grid: int = 101) -> RelationReport:
    """Grid optimum never exceeds 4 and agrees with the exact LP."""
    value, assignment = chsh_optimize(S, grid)
    exact, _ = chsh_exact(S)
    return RelationReport.inequality("chsh", exact, value, witnesses={
        "I_grid": value, "I_exact": exact, **assignment.variables,
        "no_signaling_residual": assignment.no_signaling_residual()})
