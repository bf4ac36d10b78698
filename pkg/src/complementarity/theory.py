"""Finite operational theories and their qualitative properties.

A :class:`Theory` lists observables and generating preparations together
with the outcome statistics ``q_M(k|P)``. Everything else (mixtures,
simulation, joint measurability, statistics sets and the uncertainty /
exclusion / complementarity predicates) is computed from that table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .assignment import max_assignment
from .geometry import FEAS_TOL, LinearProgram, Polytope, contains_point, solve_lp

PROB_TOL = 1e-9


class TheoryError(ValueError):
    """Malformed theory data."""


# ---------------------------------------------------------------------------
# Distributions and maps
# ---------------------------------------------------------------------------


def as_distribution(probs, tol: float = PROB_TOL) -> np.ndarray:
    q = np.asarray(probs, dtype=float).ravel()
    if q.size == 0:
        raise TheoryError("empty distribution")
    if np.any(q < -1e-12):
        raise TheoryError(f"negative probability in {q.tolist()}")
    if abs(q.sum() - 1.0) > tol:
        raise TheoryError(f"probabilities sum to {q.sum():.12g}, not 1")
    return np.clip(q, 0.0, None)


@dataclass(frozen=True)
class StochasticMap:
    """Column-stochastic ``m x n`` matrix acting on probability columns."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        M = np.array(self.matrix, dtype=float, copy=True)
        if M.ndim != 2:
            raise TheoryError("stochastic map must be a matrix")
        if np.any(M < -1e-9):
            raise TheoryError("stochastic map has negative entries")
        if np.any(np.abs(M.sum(axis=0) - 1.0) > 1e-9):
            raise TheoryError("stochastic map columns must sum to 1")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @classmethod
    def identity(cls, n: int) -> "StochasticMap":
        return cls(np.eye(n))

    @classmethod
    def from_partition(cls, blocks: Sequence[Sequence[int]], n: int) -> "StochasticMap":
        M = np.zeros((len(blocks), n))
        for b, block in enumerate(blocks):
            M[b, list(block)] = 1.0
        return cls(M)

    @classmethod
    def from_permutation(cls, perm: Sequence[int]) -> "StochasticMap":
        n = len(perm)
        M = np.zeros((n, n))
        M[list(perm), range(n)] = 1.0
        return cls(M)

    @property
    def is_deterministic(self) -> bool:
        return bool(np.all((np.abs(self.matrix) < 1e-12) | (np.abs(self.matrix - 1) < 1e-12)))

    def apply(self, stats: np.ndarray) -> np.ndarray:
        """Apply to a single distribution or to rows of a (preparations x n) table."""
        stats = np.asarray(stats, dtype=float)
        return stats @ self.matrix.T

    def compose(self, after: "StochasticMap") -> "StochasticMap":
        """``after`` applied following ``self``."""
        return StochasticMap(after.matrix @ self.matrix)

    def to_list(self) -> list:
        return self.matrix.tolist()


def enumerate_coarse_grainings(n: int, mode: str = "all_nontrivial") -> list[StochasticMap]:
    """Deterministic outcome merges of an ``n``-outcome observable.

    ``all_nontrivial`` lists every set partition into ``m`` blocks with
    ``2 <= m < n``; relabelings are not counted. ``single_outcome`` keeps one
    outcome and merges the rest (one map when ``n == 2``). ``binary`` lists
    every unordered bipartition.
    """
    if n < 2:
        raise ValueError("coarse-grainings need n >= 2")
    if mode == "all_nontrivial":
        parts = [p for p in _set_partitions(list(range(n))) if 2 <= len(p) < n]
    elif mode == "single_outcome":
        parts = []
        seen = set()
        for k in range(n):
            p = _canonical([[k], [j for j in range(n) if j != k]])
            if p not in seen:
                seen.add(p)
                parts.append(p)
    elif mode == "binary":
        parts = []
        for mask in range(1, 2 ** (n - 1)):
            # outcome n-1 always sits in the second block
            first = [j for j in range(n - 1) if mask >> j & 1]
            parts.append(_canonical([first, [j for j in range(n) if j not in first]]))
        parts.sort()
    else:
        raise ValueError(f"unknown coarse-graining mode {mode!r}")
    return [StochasticMap.from_partition(p, n) for p in parts]


def _canonical(blocks) -> tuple:
    return tuple(sorted(tuple(sorted(b)) for b in blocks if b))


def _set_partitions(items: list) -> list[tuple]:
    if not items:
        return [()]
    head, rest = items[0], items[1:]
    out = []
    for part in _set_partitions(rest):
        out.append(_canonical([[head], *part]))
        for i in range(len(part)):
            blocks = [list(b) for b in part]
            blocks[i].append(head)
            out.append(_canonical(blocks))
    return sorted(set(out), key=lambda p: (len(p), p))


# ---------------------------------------------------------------------------
# Theory
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Preparation:
    name: str
    stats: Mapping[str, np.ndarray]


@dataclass(frozen=True)
class Observable:
    name: str
    table: np.ndarray  # preparations x outcomes


@dataclass(frozen=True)
class Theory:
    """A finite catalog of observables and generating preparations.

    ``tables[name]`` is a (preparations x outcomes) array whose row ``i``
    is ``q_name(P_i)``. Mixtures of the generating preparations make up the
    rest of the preparation space.
    """

    observables: tuple[str, ...]
    preparations: tuple[str, ...]
    tables: Mapping[str, np.ndarray]
    flags: Mapping[str, Mapping[str, bool]] = field(default_factory=dict)
    name: str = "theory"

    def __post_init__(self) -> None:
        if len(set(self.observables)) != len(self.observables):
            raise TheoryError("duplicate observable names")
        if len(set(self.preparations)) != len(self.preparations):
            raise TheoryError("duplicate preparation names")
        if not self.preparations:
            raise TheoryError("a theory needs at least one preparation")
        frozen = {}
        for obs in self.observables:
            if obs not in self.tables:
                raise TheoryError(f"no statistics for observable {obs!r}")
            T = np.array(self.tables[obs], dtype=float, copy=True)
            if T.ndim != 2 or T.shape[0] != len(self.preparations):
                raise TheoryError(f"observable {obs!r} needs one row per preparation")
            for row, prep in zip(T, self.preparations):
                try:
                    as_distribution(row)
                except TheoryError as exc:
                    raise TheoryError(f"{prep}/{obs}: {exc}") from None
            T = np.clip(T, 0.0, None)
            T.setflags(write=False)
            frozen[obs] = T
        object.__setattr__(self, "tables", MappingProxyType(frozen))
        object.__setattr__(self, "flags", MappingProxyType({k: dict(v) for k, v in self.flags.items()}))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_stats(cls, stats: Mapping[str, Mapping[str, Sequence[float]]], *, name: str = "theory",
                   flags=None) -> "Theory":
        """Build from ``{preparation: {observable: probs}}``."""
        preps = tuple(stats)
        if not preps:
            raise TheoryError("a theory needs at least one preparation")
        observables = tuple(stats[preps[0]])
        tables = {}
        for obs in observables:
            rows = []
            for p in preps:
                if obs not in stats[p]:
                    raise TheoryError(f"preparation {p!r} has no statistics for {obs!r}")
                rows.append(np.asarray(stats[p][obs], dtype=float))
            widths = {r.size for r in rows}
            if len(widths) != 1:
                raise TheoryError(f"observable {obs!r} has inconsistent outcome counts")
            tables[obs] = np.vstack(rows)
        return cls(observables, preps, tables, flags or {}, name)

    @classmethod
    def from_json(cls, document: Union[str, Mapping]) -> "Theory":
        """Parse and validate a theory document (text or already-decoded mapping)."""
        data = json.loads(document) if isinstance(document, str) else document
        validate_theory_document(data)
        outcomes = {o["name"]: int(o["outcomes"]) for o in data["observables"]}
        flags = {o["name"]: dict(o.get("flags", {})) for o in data["observables"] if o.get("flags")}
        stats = {}
        for prep in data["preparations"]:
            missing = set(outcomes) - set(prep["stats"])
            if missing:
                raise TheoryError(f"preparation {prep['name']!r} lacks {sorted(missing)}")
            for obs, probs in prep["stats"].items():
                if obs not in outcomes:
                    raise TheoryError(f"preparation {prep['name']!r} names unknown observable {obs!r}")
                if len(probs) != outcomes[obs]:
                    raise TheoryError(
                        f"preparations/{prep['name']}/stats/{obs}: expected {outcomes[obs]} entries, got {len(probs)}")
            stats[prep["name"]] = {o: prep["stats"][o] for o in outcomes}
        return cls.from_stats(stats, name=data.get("name", "theory"), flags=flags)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "observables": [
                {"name": o, "outcomes": self.n_outcomes(o), **({"flags": dict(self.flags[o])} if o in self.flags else {})}
                for o in self.observables
            ],
            "preparations": [
                {"name": p, "stats": {o: self.tables[o][i].tolist() for o in self.observables}}
                for i, p in enumerate(self.preparations)
            ],
        }

    # -- access --------------------------------------------------------------

    def n_outcomes(self, obs: str) -> int:
        return int(self.table(obs).shape[1])

    def table(self, obs: str) -> np.ndarray:
        try:
            return self.tables[obs]
        except KeyError:
            raise KeyError(f"unknown observable {obs!r}; known: {list(self.observables)}") from None

    def prep_index(self, prep: str) -> int:
        try:
            return self.preparations.index(prep)
        except ValueError:
            raise KeyError(f"unknown preparation {prep!r}") from None

    def q(self, obs: str, prep: str) -> np.ndarray:
        return self.table(obs)[self.prep_index(prep)]

    def with_observable(self, name: str, table, flags=None) -> "Theory":
        if name in self.tables:
            raise TheoryError(f"observable {name!r} already present")
        tables = dict(self.tables)
        tables[name] = np.asarray(table, dtype=float)
        fl = dict(self.flags)
        if flags:
            fl[name] = flags
        return Theory(self.observables + (name,), self.preparations, tables, fl, self.name)

    def with_preparation(self, name: str, stats: Mapping[str, Sequence[float]]) -> "Theory":
        tables = {o: np.vstack([self.tables[o], np.asarray(stats[o], dtype=float)]) for o in self.observables}
        return Theory(self.observables, self.preparations + (name,), tables, self.flags, self.name)

    def resolve(self, obs) -> np.ndarray:
        """Statistics table of a named observable, or a table passed through."""
        if isinstance(obs, str):
            return self.table(obs)
        if isinstance(obs, Observable):
            return np.asarray(obs.table, dtype=float)
        T = np.asarray(obs, dtype=float)
        if T.ndim != 2 or T.shape[0] != len(self.preparations):
            raise TheoryError("observable tables need one row per preparation")
        return T


def _load_schema(name: str) -> dict:
    return json.loads(resources.files("complementarity").joinpath("schemas", name).read_text())


def validate_theory_document(data) -> None:
    import jsonschema

    schema = _load_schema("theory.schema.json")
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/".join(str(p) for p in err.path) or "<root>"
        raise TheoryError(f"schema error at {where}: {err.message}")


# ---------------------------------------------------------------------------
# Mixtures
# ---------------------------------------------------------------------------


def _check_weight(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise TheoryError(f"mixing weight {alpha} outside [0, 1]")
    return alpha


def mix_preparations(theory: Theory, P1: str, P2: str, alpha: float, name: str | None = None) -> Preparation:
    alpha = _check_weight(alpha)
    i, j = theory.prep_index(P1), theory.prep_index(P2)
    stats = {o: alpha * theory.tables[o][i] + (1 - alpha) * theory.tables[o][j] for o in theory.observables}
    return Preparation(name or f"{alpha:g}*{P1}+{1 - alpha:g}*{P2}", MappingProxyType(stats))


def mix_observables(theory: Theory, X1, X2, alpha: float, name: str | None = None) -> Observable:
    alpha = _check_weight(alpha)
    A, B = theory.resolve(X1), theory.resolve(X2)
    if A.shape != B.shape:
        raise TheoryError("mixed observables need equal outcome counts")
    label = name or f"{alpha:g}*{X1 if isinstance(X1, str) else 'X1'}+{1 - alpha:g}*{X2 if isinstance(X2, str) else 'X2'}"
    return Observable(label, alpha * A + (1 - alpha) * B)


def white_noise(table: np.ndarray, lam: float) -> np.ndarray:
    d = table.shape[-1]
    return (1 - lam) * table + lam / d


# ---------------------------------------------------------------------------
# Simulation and joint measurability
# ---------------------------------------------------------------------------


def find_stochastic_map(source: np.ndarray, target: np.ndarray, tol: float = FEAS_TOL) -> StochasticMap | None:
    """Column-stochastic ``L`` with ``L @ source[i] == target[i]`` for every row ``i``."""
    source = np.asarray(source, float)
    target = np.asarray(target, float)
    n, m = source.shape[1], target.shape[1]
    if np.array_equal(source, target):
        return StochasticMap.identity(n)
    # variable L[a, k] at index a * n + k
    lp = LinearProgram(np.zeros(m * n))
    for k in range(n):
        row = np.zeros(m * n)
        row[k::n] = 1.0
        lp.add(row, "=", 1.0)
    for q_src, q_tgt in zip(source, target):
        for a in range(m):
            row = np.zeros(m * n)
            row[a * n:(a + 1) * n] = q_src
            lp.add(row, "=", q_tgt[a])
    res = solve_lp(lp, tol=tol)
    if not res.optimal:
        return None
    L = np.clip(res.x.reshape(m, n), 0.0, None)
    L /= L.sum(axis=0, keepdims=True)
    return StochasticMap(L)


def simulates(theory: Theory, X, Y) -> StochasticMap | None:
    """A map ``L`` with ``L q_X(P) = q_Y(P)`` on every generator, or ``None``."""
    return find_stochastic_map(theory.resolve(X), theory.resolve(Y))


@dataclass(frozen=True)
class JointWitness:
    mother: str
    to_x: StochasticMap
    to_y: StochasticMap


def _mother_candidates(theory: Theory, X, Y) -> list[tuple[str, np.ndarray]]:
    out = []
    for label, obs in (("X", X), ("Y", Y)):
        if not isinstance(obs, str):
            out.append((label if not isinstance(obs, Observable) else obs.name, theory.resolve(obs)))
    out += [(o, theory.tables[o]) for o in theory.observables]
    # the pair itself goes first
    names = [X if isinstance(X, str) else None, Y if isinstance(Y, str) else None]
    out.sort(key=lambda item: 0 if item[0] in names or item[0] in ("X", "Y") else 1)
    return out


def jointly_measurable(theory: Theory, X, Y) -> JointWitness | None:
    """Search the listed observables (and the pair itself) for a common simulator."""
    A, B = theory.resolve(X), theory.resolve(Y)
    for name, Z in _mother_candidates(theory, X, Y):
        L1 = find_stochastic_map(Z, A)
        if L1 is None:
            continue
        L2 = find_stochastic_map(Z, B)
        if L2 is not None:
            return JointWitness(name, L1, L2)
    return None


def noise_robustness(theory: Theory, X, Y, *, method: str = "bisection", iterations: int = 40) -> float:
    """Smallest white-noise weight making the pair jointly measurable.

    ``method="bisection"`` bisects on the feasibility question; ``"lp"``
    minimizes the weight directly, one LP per candidate mother.
    """
    A, B = theory.resolve(X), theory.resolve(Y)
    mothers = [Z for _, Z in _mother_candidates(theory, X, Y)]
    if method == "lp":
        return min(_min_noise_lp(Z, A, B) for Z in mothers)
    if method != "bisection":
        raise ValueError(f"unknown method {method!r}")

    def feasible(lam: float) -> bool:
        An, Bn = white_noise(A, lam), white_noise(B, lam)
        return any(find_stochastic_map(Z, An) is not None and find_stochastic_map(Z, Bn) is not None
                   for Z in mothers)

    if feasible(0.0):
        return 0.0
    if not feasible(1.0):
        raise RuntimeError("noisy pair is not jointly measurable even at full noise")
    if not feasible(1.0 - 1e-6):
        return 1.0
    lo, hi = 0.0, 1.0 - 1e-6
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    # near lam = 1 the noisy tables differ from uniform by O(1 - lam), so an
    # absolute feasibility tolerance brackets loosely; polish on the mothers
    # feasible at ``hi`` with the exact minimization
    An, Bn = white_noise(A, hi), white_noise(B, hi)
    live = [Z for Z in mothers
            if find_stochastic_map(Z, An) is not None and find_stochastic_map(Z, Bn) is not None]
    return min(_min_noise_lp(Z, A, B) for Z in live) if live else hi


def _min_noise_lp(Z: np.ndarray, A: np.ndarray, B: np.ndarray) -> float:
    n = Z.shape[1]
    ma, mb = A.shape[1], B.shape[1]
    nv = ma * n + mb * n + 1
    lam = nv - 1
    obj = np.zeros(nv)
    obj[lam] = -1.0
    bounds = [(0.0, math.inf)] * (nv - 1) + [(0.0, 1.0)]
    lp = LinearProgram(obj, bounds=bounds)
    for off, m in ((0, ma), (ma * n, mb)):
        for k in range(n):
            row = np.zeros(nv)
            row[off + k: off + m * n: n] = 1.0
            lp.add(row, "=", 1.0)
    for off, T in ((0, A), (ma * n, B)):
        m = T.shape[1]
        for z, t in zip(Z, T):
            for a in range(m):
                # L z - lam * (1/m - t_a) = t_a
                row = np.zeros(nv)
                row[off + a * n: off + (a + 1) * n] = z
                row[lam] = -(1.0 / m - t[a])
                lp.add(row, "=", t[a])
    res = solve_lp(lp)
    return float(res.x[lam]) if res.optimal else 1.0


# ---------------------------------------------------------------------------
# Statistics sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatisticsSet:
    """Hull of the points ``(q_X(P_i), q_Y(P_i))``.

    ``qx`` and ``qy`` hold one distribution per generating point. The
    geometry uses the coordinates ``(q_X(2), q_Y(2))`` for binary pairs and
    ``(q_X[1:], q_Y[1:])`` otherwise.
    """

    x: str
    y: str
    qx: np.ndarray
    qy: np.ndarray
    geometry: Polytope

    @classmethod
    def from_points(cls, qx, qy, x: str = "X", y: str = "Y") -> "StatisticsSet":
        qx = np.atleast_2d(np.asarray(qx, dtype=float))
        qy = np.atleast_2d(np.asarray(qy, dtype=float))
        if qx.shape[0] != qy.shape[0]:
            raise TheoryError("need equally many X and Y distributions")
        coords = np.hstack([qx[:, 1:], qy[:, 1:]])
        if coords.shape[1] == 2:
            geometry = Polytope.from_points(coords)
        else:
            geometry = Polytope(np.unique(np.round(coords, 13), axis=0))
        return cls(x, y, qx, qy, geometry)

    @classmethod
    def from_binary_coords(cls, points, x: str = "X", y: str = "Y") -> "StatisticsSet":
        """Binary pair given by ``(q_X(2), q_Y(2))`` points in the unit square."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return cls.from_points(np.column_stack([1 - p[:, 0], p[:, 0]]),
                               np.column_stack([1 - p[:, 1], p[:, 1]]), x, y)

    @property
    def nx(self) -> int:
        return self.qx.shape[1]

    @property
    def ny(self) -> int:
        return self.qy.shape[1]

    @property
    def is_binary(self) -> bool:
        return self.nx == 2 and self.ny == 2

    def vertex_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Distributions at the hull vertices (binary) or at the generators."""
        if self.is_binary:
            v = self.geometry.vertices
            return np.column_stack([1 - v[:, 0], v[:, 0]]), np.column_stack([1 - v[:, 1], v[:, 1]])
        return self.qx, self.qy

    def coarse_grained(self, L1: StochasticMap, L2: StochasticMap) -> "StatisticsSet":
        return StatisticsSet.from_points(L1.apply(self.qx), L2.apply(self.qy), self.x, self.y)

    def corner_coords(self, i: int, j: int) -> np.ndarray:
        ex = np.zeros(self.nx)
        ey = np.zeros(self.ny)
        ex[i] = ey[j] = 1.0
        return np.concatenate([ex[1:], ey[1:]])

    def contains_corner(self, i: int, j: int) -> bool:
        return contains_point(self.geometry, self.corner_coords(i, j))

    def corner_matrix(self) -> np.ndarray:
        return np.array([[self.contains_corner(i, j) for j in range(self.ny)] for i in range(self.nx)])


def statistics_set(theory: Theory, X, Y) -> StatisticsSet:
    xn = X if isinstance(X, str) else getattr(X, "name", "X")
    yn = Y if isinstance(Y, str) else getattr(Y, "name", "Y")
    return StatisticsSet.from_points(theory.resolve(X), theory.resolve(Y), xn, yn)


# ---------------------------------------------------------------------------
# Qualitative predicates
# ---------------------------------------------------------------------------


def has_uncertainty(S: StatisticsSet) -> bool:
    """No corner ``(e_i, e_j)`` of the ambient product of simplices lies in S."""
    return not S.corner_matrix().any()


def has_exclusion(S: StatisticsSet) -> bool:
    """No perfect matching of corners ``(e_k, e_pi(k))`` inside S."""
    if S.nx != S.ny:
        raise TheoryError("exclusion compares observables with equal outcome counts")
    C = S.corner_matrix().astype(float)
    _, value = max_assignment(C)
    return value < S.nx - 0.5


def has_strong_uncertainty(S: StatisticsSet) -> bool:
    """Uncertainty survives every pair of binary coarse-grainings."""
    for L1 in enumerate_coarse_grainings(S.nx, "binary"):
        for L2 in enumerate_coarse_grainings(S.ny, "binary"):
            if not has_uncertainty(S.coarse_grained(L1, L2)):
                return False
    return True


def paired_maps(maps_x, maps_y, pairing: str = "independent"):
    """Pairs of coarse-grainings: all combinations, or the same partition on both sides."""
    if pairing == "independent":
        return list(product(maps_x, maps_y))
    if pairing == "matched":
        return [(a, b) for a, b in zip(maps_x, maps_y) if a.shape == b.shape]
    raise ValueError(f"unknown pairing {pairing!r}")


def _complementary_after(theory: Theory, X, Y, maps_x, maps_y, pairing: str) -> bool:
    A, B = theory.resolve(X), theory.resolve(Y)
    for L1, L2 in paired_maps(maps_x, maps_y, pairing):
        if jointly_measurable(theory, L1.apply(A), L2.apply(B)) is not None:
            return False
    return True


def is_fully_complementary(theory: Theory, X, Y, pairing: str = "independent") -> bool:
    """Joint non-measurability of every pair of non-trivial coarse-grainings (identity included).

    ``pairing="matched"`` applies the same partition to both observables
    instead of ranging over all combinations.
    """
    nx, ny = theory.resolve(X).shape[1], theory.resolve(Y).shape[1]
    mx = [StochasticMap.identity(nx)] + enumerate_coarse_grainings(nx, "all_nontrivial")
    my = [StochasticMap.identity(ny)] + enumerate_coarse_grainings(ny, "all_nontrivial")
    return _complementary_after(theory, X, Y, mx, my, pairing)


def is_single_outcome_complementary(theory: Theory, X, Y, pairing: str = "independent") -> bool:
    nx, ny = theory.resolve(X).shape[1], theory.resolve(Y).shape[1]
    return _complementary_after(theory, X, Y,
                                enumerate_coarse_grainings(nx, "single_outcome"),
                                enumerate_coarse_grainings(ny, "single_outcome"), pairing)


def is_complementary(theory: Theory, X, Y) -> bool:
    return jointly_measurable(theory, X, Y) is None
