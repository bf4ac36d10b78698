"""Quantitative uncertainty, independence, exclusion and complementarity measures.

Set-level measures are evaluated on the generating points of a statistics
set. That suffices because every measure below is either a minimum of a
concave function or a maximum of a convex one over the set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .assignment import max_assignment
from .geometry import LinearProgram, Polytope, max_inscribed_scaled_copy, polygon_area, solve_lp
from .quantum import QubitPair, overlap_matrix, rac_optimal_ps
from .theory import (
    StatisticsSet,
    StochasticMap,
    Theory,
    TheoryError,
    find_stochastic_map,
    simulates,
    statistics_set,
)

AVERAGE_SQUARE = Polytope.box((-1.0, -1.0), (1.0, 1.0))


@dataclass
class MeasureReport:
    name: str
    value: float
    witnesses: dict = field(default_factory=dict)
    source: str = ""

    def to_json(self) -> dict:
        out = {"name": self.name, "value": float(self.value), "witnesses": _jsonable(self.witnesses)}
        if self.source:
            out["source"] = self.source
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, StochasticMap):
        return obj.to_list()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def joint_distribution(p) -> np.ndarray:
    P = np.asarray(p, dtype=float)
    if P.ndim != 2 or np.any(P < -1e-12) or abs(P.sum() - 1.0) > 1e-9:
        raise ValueError("a joint distribution is a nonnegative matrix summing to 1")
    return np.clip(P, 0.0, None)


# ---------------------------------------------------------------------------
# Random access code measures
# ---------------------------------------------------------------------------


def rac_uncertainty_point(qx, qy) -> float:
    """1 - (max q_X + max q_Y) / 2 for one pair of distributions."""
    return 1.0 - 0.5 * (float(np.max(qx)) + float(np.max(qy)))


def rac_uncertainty_set(S: StatisticsSet, normalized: bool = True) -> float:
    """Minimum point uncertainty over the set.

    With ``normalized`` the value is divided by its largest possible value
    ``1 - 1/d`` so that it ranges over [0, 1]; for binary observables this
    is the convention in which the qubit circle scores ``1 - 1/sqrt(2)``.
    """
    qx, qy = S.vertex_points()
    u = float(np.min(1.0 - 0.5 * (qx.max(axis=1) + qy.max(axis=1))))
    if normalized:
        d = max(S.nx, S.ny)
        u /= 1.0 - 1.0 / d
    return max(u, 0.0)


def _deterministic_maps(n: int, d: int) -> np.ndarray:
    """Every 0/1 map from n outcomes to d guesses, as (count, d, n) matrices."""
    out = np.zeros((d ** n, d, n))
    for idx, f in enumerate(product(range(d), repeat=n)):
        out[idx, list(f), range(n)] = 1.0
    return out


def rac_success_probability(tables: Sequence[np.ndarray], d: int | None = None) -> tuple[float, dict]:
    """Optimal two-dit RAC success probability with Bob restricted to the given observables.

    ``tables`` holds one (points x outcomes) array per accessible observable.
    For each input ``b`` Bob picks one accessible observable and a
    deterministic relabeling; Alice picks the best point for each ``(a1, a2)``.
    """
    tables = [np.asarray(t, dtype=float) for t in tables]
    if d is None:
        d = max(t.shape[1] for t in tables)
    guesses = []  # (observable index, map index, points x d)
    for i, T in enumerate(tables):
        maps = _deterministic_maps(T.shape[1], d)
        G = np.einsum("kdn,pn->kpd", maps, T)
        guesses.append((i, G))
    best, arg = -1.0, None
    for (i1, G1), (i2, G2) in product(guesses, repeat=2):
        # total[k1, k2] = sum_{a1,a2} max_p (G1[k1,p,a1] + G2[k2,p,a2])
        tot = (G1[:, None, :, :, None] + G2[None, :, :, None, :]).max(axis=2).sum(axis=(2, 3))
        k1, k2 = np.unravel_index(int(np.argmax(tot)), tot.shape)
        if tot[k1, k2] > best + 1e-12:
            best, arg = float(tot[k1, k2]), (i1, int(k1), i2, int(k2))
    ps = best / (2 * d * d)
    return ps, {"observables": [arg[0], arg[2]]}


def rac_independence_set(S: StatisticsSet) -> MeasureReport:
    """RAC independence of a statistics set, computed from its points."""
    qx, qy = S.qx, S.qy
    d = max(S.nx, S.ny)
    p_xy, wit = rac_success_probability([qx, qy], d)
    p_x, _ = rac_success_probability([qx], d)
    p_y, _ = rac_success_probability([qy], d)
    base = max(p_x, p_y)
    value = 0.0 if base >= 1 - 1e-12 else (p_xy - base) / (1 - base)
    return MeasureReport("rac-ind", max(0.0, value), {"p_s_xy": p_xy, "p_s_x": p_x, "p_s_y": p_y, **wit})


def rac_independence(basisA, basisB) -> float:
    """Quantum closed form (sum|U|/d - 1)/(d - 1) for rank-one bases."""
    U = overlap_matrix(basisA, basisB)
    d = U.shape[0]
    if d == 1:
        return 0.0
    return (U.sum() / d - 1.0) / (d - 1)


def rac_independence_from_ps(basisA, basisB) -> float:
    """Same quantity routed through the success probabilities (classical value 1/2 + 1/2d)."""
    d = overlap_matrix(basisA, basisB).shape[0]
    p1 = 0.5 + 0.5 / d
    return (rac_optimal_ps(basisA, basisB) - p1) / (1 - p1)


def rac_uncertainty_quantum(basisA, basisB) -> float:
    return 0.5 * (1.0 - float(overlap_matrix(basisA, basisB).max()))


def rac_exclusion(basisA, basisB) -> MeasureReport:
    """Quantum exclusion (1 - max_pi sum_i |U_{i pi(i)}| / d) / 2."""
    U = overlap_matrix(basisA, basisB)
    d = U.shape[0]
    perm, value = max_assignment(U)
    return MeasureReport("rac-exc", 0.5 * (1.0 - value / d), {"permutation": list(perm), "assignment": value})


def rac_exclusion_set(S: StatisticsSet) -> MeasureReport:
    """1 - (1/2d) max_pi sum_k max_P [q_X(k|P) + q_Y(pi(k)|P)]."""
    if S.nx != S.ny:
        raise TheoryError("exclusion compares observables with equal outcome counts")
    d = S.nx
    W = (S.qx[:, :, None] + S.qy[:, None, :]).max(axis=0)
    perm, value = max_assignment(W)
    return MeasureReport("rac-exc", 1.0 - value / (2 * d), {"permutation": list(perm)})


# ---------------------------------------------------------------------------
# Simulation distance
# ---------------------------------------------------------------------------


def simulation_distance(source: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """min over stochastic L of max over points of the total-variation gap TV(L q_src, q_tgt)."""
    n, m = source.shape[1], target.shape[1]
    P = source.shape[0]
    nL = m * n
    ne = P * m
    nv = nL + ne + 1
    t = nv - 1
    obj = np.zeros(nv)
    obj[t] = -1.0
    lp = LinearProgram(obj)
    for k in range(n):
        row = np.zeros(nv)
        row[k:nL:n] = 1.0
        lp.add(row, "=", 1.0)
    for p in range(P):
        for a in range(m):
            e = nL + p * m + a
            for sign in (1.0, -1.0):
                row = np.zeros(nv)
                row[a * n:(a + 1) * n] = sign * source[p]
                row[e] = -1.0
                lp.add(row, "<=", sign * target[p, a])
        row = np.zeros(nv)
        row[nL + p * m: nL + (p + 1) * m] = 0.5
        row[t] = -1.0
        lp.add(row, "<=", 0.0)
    res = solve_lp(lp)
    if not res.optimal:
        raise RuntimeError(f"simulation-distance LP ended with status {res.status}")
    return max(0.0, float(res.x[t])), res.x[:nL].reshape(m, n)


def simulation_independence(S: StatisticsSet) -> MeasureReport:
    """Worst-case total-variation error of the best simulation, minimized over both directions.

    Zero exactly when one observable simulates the other on the set.
    """
    dxy, Lxy = simulation_distance(S.qx, S.qy)
    dyx, Lyx = simulation_distance(S.qy, S.qx)
    if dxy <= dyx:
        return MeasureReport("sim-ind", dxy, {"direction": "X->Y", "map": Lxy})
    return MeasureReport("sim-ind", dyx, {"direction": "Y->X", "map": Lyx})


# ---------------------------------------------------------------------------
# Rescaling and volume
# ---------------------------------------------------------------------------


def to_average_coords(S: StatisticsSet) -> Polytope:
    if not S.is_binary:
        raise TheoryError("rescaling and volume measures need binary observables")
    return Polytope.from_points(1.0 - 2.0 * S.geometry.vertices)


def rescaling_independence(S: StatisticsSet) -> MeasureReport:
    """Largest r with r*[-1,1]^2 + x inside the set (average coordinates)."""
    body = to_average_coords(S)
    r, x = max_inscribed_scaled_copy(body, AVERAGE_SQUARE)
    return MeasureReport("rescaling", r, {"shift": x, "scale": r})


def volume_independence(S: StatisticsSet) -> MeasureReport:
    """Area in average coordinates: 4 for the full square."""
    return MeasureReport("volume", polygon_area(to_average_coords(S)))


def qubit_rescaling(q: QubitPair | float) -> float:
    q = q if isinstance(q, QubitPair) else QubitPair(float(q))
    return min(q.a, q.b) / math.sqrt(2)


def qubit_uncertainty(q: QubitPair | float) -> float:
    q = q if isinstance(q, QubitPair) else QubitPair(float(q))
    return 1.0 - max(q.a, q.b) / math.sqrt(2)


def qubit_volume(q: QubitPair | float) -> float:
    q = q if isinstance(q, QubitPair) else QubitPair(float(q))
    return math.pi * q.a * q.b


# ---------------------------------------------------------------------------
# Variation of information
# ---------------------------------------------------------------------------


def _entropy_bits(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def variation_of_information(p) -> tuple[float, float]:
    """``(VI, VI / (2 log2 n))`` with VI = H(X|Y) + H(Y|X) in bits."""
    P = joint_distribution(p)
    hxy = _entropy_bits(P.ravel())
    hx = _entropy_bits(P.sum(axis=1))
    hy = _entropy_bits(P.sum(axis=0))
    vi = max(0.0, 2 * hxy - hx - hy)
    n = max(P.shape)
    return vi, (vi / (2 * math.log2(n)) if n > 1 else 0.0)


_BIT_CHANNELS = {
    "id": np.eye(2),
    "flip": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "const0": np.array([[1.0, 1.0], [0.0, 0.0]]),
    "const1": np.array([[0.0, 0.0], [1.0, 1.0]]),
}


def _vertex_preimages(qx: np.ndarray, qy: np.ndarray, L1: np.ndarray, L2: np.ndarray) -> list[np.ndarray] | None:
    """Joint preimage of each vertex under L1 x L2, or None if some vertex has none.

    Only the case met in the worked examples is handled: invertible channels
    and at least one pure marginal per vertex, which forces a unique product.
    """
    if abs(np.linalg.det(L1)) < 1e-12 or abs(np.linalg.det(L2)) < 1e-12:
        return None
    out = []
    for x, y in zip(qx, qy):
        mx, my = np.linalg.solve(L1, x), np.linalg.solve(L2, y)
        if np.any(mx < -1e-12) or np.any(my < -1e-12):
            return None
        if not (np.isclose(mx.max(), 1.0) or np.isclose(my.max(), 1.0)):
            raise NotImplementedError("vertex preimage is not unique")
        out.append(np.outer(mx, my))
    return out


def _max_vi_over_hull(joints: list[np.ndarray], resolution: int = 12) -> tuple[float, np.ndarray]:
    k = len(joints)
    best, arg = -1.0, None
    for c in product(range(resolution + 1), repeat=k - 1):
        if sum(c) > resolution:
            continue
        w = np.array(list(c) + [resolution - sum(c)], dtype=float) / resolution
        J = sum(wi * Ji for wi, Ji in zip(w, joints))
        v = variation_of_information(J)[0]
        if v > best:
            best, arg = v, J
    return best, arg


def preimage_measure(S: StatisticsSet) -> MeasureReport:
    """min over deterministic bit-channel pairs of the largest VI on the preimage hull."""
    if not S.is_binary:
        raise TheoryError("the preimage measure is only built for binary pairs")
    qx, qy = S.vertex_points()
    best = None
    for (n1, L1), (n2, L2) in product(_BIT_CHANNELS.items(), repeat=2):
        joints = _vertex_preimages(qx, qy, L1, L2)
        if joints is None:
            continue
        vi, J = _max_vi_over_hull(joints)
        if best is None or vi < best[0] - 1e-12:
            best = (vi, (n1, n2), J)
    if best is None:
        raise RuntimeError("no admissible channel pair")
    vi, chans, J = best
    return MeasureReport("vi", vi / 2.0, {"vi_bits": vi, "channels": list(chans), "maximizer": J})


def preimage_measure_examples() -> dict[str, MeasureReport]:
    cbit = StatisticsSet.from_binary_coords([(0.0, 0.0), (1.0, 1.0)])
    diamond = StatisticsSet.from_binary_coords([(0.5, 0.0), (1.0, 0.5), (0.5, 1.0), (0.0, 0.5)])
    return {"c-bit": preimage_measure(cbit), "diamond": preimage_measure(diamond)}


# ---------------------------------------------------------------------------
# Complementarity from independence
# ---------------------------------------------------------------------------

IndependenceFn = Callable[[StatisticsSet], float]


def _ind_value(ind, S: StatisticsSet) -> float:
    v = ind(S)
    return float(v.value if isinstance(v, MeasureReport) else v)


def complementarity_extremal(theory: Theory, X, Y, ind: IndependenceFn) -> tuple[float, dict]:
    """min of Ind(S_{X',Y'}) over listed simulators X' of X and Y' of Y (X, Y included)."""
    A, B = theory.resolve(X), theory.resolve(Y)
    xs = [("X" if not isinstance(X, str) else X, A)]
    ys = [("Y" if not isinstance(Y, str) else Y, B)]
    for o in theory.observables:
        T = theory.tables[o]
        if (not isinstance(X, str) or o != X) and find_stochastic_map(T, A) is not None:
            xs.append((o, T))
        if (not isinstance(Y, str) or o != Y) and find_stochastic_map(T, B) is not None:
            ys.append((o, T))
    best = (math.inf, None)
    for (nx, Tx), (ny, Ty) in product(xs, ys):
        v = _ind_value(ind, StatisticsSet.from_points(Tx, Ty, nx, ny))
        if v < best[0] - 1e-12:
            best = (v, (nx, ny))
    return best[0], {"simulators": list(best[1]), "only_self": len(xs) == 1 and len(ys) == 1}


def complementarity_from_independence(theory: Theory, X, Y, ind: IndependenceFn = simulation_independence,
                                      decompositions: Sequence | None = None) -> MeasureReport:
    """Complementarity built from an independence measure.

    ``decompositions`` lists candidate convex decompositions of the pair as
    ``(x_parts, y_parts)`` with ``x_parts = [(weight, observable), ...]``;
    the pair itself is always a candidate. The smallest weighted average of
    extremal-pair values wins.
    """
    A, B = theory.resolve(X), theory.resolve(Y)
    candidates = [([(1.0, X)], [(1.0, Y)])] + list(decompositions or [])
    best = None
    tried = []
    for x_parts, y_parts in candidates:
        _check_decomposition(theory, A, x_parts)
        _check_decomposition(theory, B, y_parts)
        total = 0.0
        parts = []
        for (a, Xi), (b, Yj) in product(x_parts, y_parts):
            v, wit = complementarity_extremal(theory, Xi, Yj, ind)
            total += a * b * v
            parts.append({"x": Xi if isinstance(Xi, str) else "X", "y": Yj if isinstance(Yj, str) else "Y",
                          "weight": a * b, "value": v, **wit})
        tried.append({"x_parts": [[a, Xi if isinstance(Xi, str) else "X"] for a, Xi in x_parts],
                      "y_parts": [[b, Yj if isinstance(Yj, str) else "Y"] for b, Yj in y_parts],
                      "value": total})
        if best is None or total < best[0] - 1e-12:
            best = (total, parts)
    value, parts = best
    return MeasureReport("complementarity", max(0.0, value), {"decomposition": parts, "candidates": tried})


def _check_decomposition(theory: Theory, target: np.ndarray, parts) -> None:
    w = sum(a for a, _ in parts)
    if abs(w - 1.0) > 1e-9:
        raise TheoryError("decomposition weights must sum to 1")
    mix = sum(a * theory.resolve(o) for a, o in parts)
    if np.max(np.abs(mix - target)) > 1e-9:
        raise TheoryError("decomposition does not reproduce the observable")


def noise_complementarity(theory: Theory, X, Y) -> MeasureReport:
    from .theory import noise_robustness

    return MeasureReport("noise-robustness", noise_robustness(theory, X, Y))
