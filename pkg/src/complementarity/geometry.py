"""Linear programming and convex-polytope primitives.

Every feasibility question in the package (stochastic-map existence, hull
membership, inscribed copies, steering assignments) is phrased as a small
dense linear program and handed to :func:`solve_lp`, a two-phase tableau
simplex method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

FEAS_TOL = 1e-9
REPORT_TOL = 1e-7


class DimensionError(ValueError):
    """Raised when array shapes do not agree."""


class DegenerateError(ValueError):
    """Raised when a body has no 2D interior where one is required."""


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


@dataclass
class LinearProgram:
    """maximize ``objective @ x`` subject to row constraints and variable bounds.

    ``constraints`` holds ``(coefficients, relation, bound)`` triples with
    ``relation`` one of ``"<="``, ``"="`` or ``">="``. ``bounds`` holds one
    ``(lower, upper)`` pair per variable; ``None`` means ``(0, inf)``.
    """

    objective: np.ndarray
    constraints: list = field(default_factory=list)
    bounds: list | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float).ravel()
        n = self.objective.size
        for coeffs, rel, _ in self.constraints:
            if np.asarray(coeffs).size != n:
                raise DimensionError("constraint row width differs from objective width")
            if rel not in ("<=", "=", ">="):
                raise ValueError(f"unknown relation {rel!r}")
        if self.bounds is not None and len(self.bounds) != n:
            raise DimensionError("need one (lower, upper) bound per variable")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def add(self, coeffs, rel: str, bound: float) -> None:
        coeffs = np.asarray(coeffs, dtype=float).ravel()
        if coeffs.size != self.n_vars:
            raise DimensionError("constraint row width differs from objective width")
        if rel not in ("<=", "=", ">="):
            raise ValueError(f"unknown relation {rel!r}")
        self.constraints.append((coeffs, rel, float(bound)))

    @classmethod
    def from_arrays(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=None) -> "LinearProgram":
        lp = cls(np.asarray(c, dtype=float), [], bounds)
        if A_ub is not None:
            for row, b in zip(np.atleast_2d(A_ub), np.ravel(b_ub)):
                lp.constraints.append((np.asarray(row, float), "<=", float(b)))
        if A_eq is not None:
            for row, b in zip(np.atleast_2d(A_eq), np.ravel(b_eq)):
                lp.constraints.append((np.asarray(row, float), "=", float(b)))
        return lp


@dataclass(frozen=True)
class LpResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    value: float | None = None
    x: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _simplex_loop(T, basis, cost_row, n_cols, tol, rule, max_iter):
    """Run pivots on ``T`` until the cost row has no negative reduced cost.

    Returns ``("optimal" | "unbounded", iterations)``. Dantzig pricing is used
    until a run of degenerate pivots appears, after which Bland's rule takes
    over for the remainder of the phase and guarantees termination.
    """
    m = len(basis)
    use_bland = rule == "bland"
    degenerate_run = 0
    for it in range(max_iter):
        rc = T[cost_row, :n_cols]
        if use_bland:
            entering = np.flatnonzero(rc < -tol)
            if entering.size == 0:
                return "optimal", it
            col = int(entering[0])
        else:
            col = int(np.argmin(rc))
            if rc[col] >= -tol:
                return "optimal", it
        column = T[:m, col]
        positive = column > tol
        if not positive.any():
            return "unbounded", it
        rhs = T[:m, -1]
        ratios = np.full(m, np.inf)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol)
        if use_bland:
            row = int(ties[np.argmin(basis[ties])])
        else:
            # largest pivot among ties keeps the tableau well conditioned
            row = int(ties[np.argmax(column[ties])])
        if best <= tol:
            degenerate_run += 1
            if degenerate_run > 25 and rule == "auto":
                use_bland = True
        else:
            degenerate_run = 0
        _pivot(T, row, col)
        basis[row] = col
        rhs = T[:m, -1]
        rhs[(rhs < 0) & (rhs > -tol)] = 0.0
    raise RuntimeError("simplex iteration limit reached")


def solve_lp(lp: LinearProgram, *, tol: float = FEAS_TOL, rule: str = "auto", max_iter: int | None = None) -> LpResult:
    """Solve ``lp`` with a dense two-phase simplex method.

    ``rule="bland"`` uses Bland's smallest-index rule throughout; the default
    ``"auto"`` starts with largest-coefficient pricing and falls back to
    Bland's rule when degenerate pivots accumulate.
    """
    if rule not in ("auto", "bland", "dantzig"):
        raise ValueError(f"unknown pivot rule {rule!r}")
    n = lp.n_vars
    if lp.bounds is None:
        A = np.array([c for c, _, _ in lp.constraints], dtype=float).reshape(-1, n)
        rels = [r for _, r, _ in lp.constraints]
        b = np.array([v for _, _, v in lp.constraints], dtype=float)
        return _solve_standard(A, rels, b, lp.objective, np.zeros(n), None, lp.objective, tol, rule, max_iter)
    bounds = lp.bounds

    # x_j = offset_j + sum_k M[j, k] * y_k with y >= 0
    columns: list[tuple[int, float]] = []
    offset = np.zeros(n)
    extra_rows: list[tuple[int, float]] = []  # (y index, upper bound) rows y <= u
    for j, (lo, hi) in enumerate(bounds):
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if lo > hi:
            return LpResult("infeasible")
        if math.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            if math.isfinite(hi):
                extra_rows.append((len(columns) - 1, hi - lo))
        elif math.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
        else:
            columns.append((j, 1.0))
            columns.append((j, -1.0))
    ny = len(columns)
    M = np.zeros((n, ny))
    for k, (j, s) in enumerate(columns):
        M[j, k] = s

    rows, rels, rhs = [], [], []
    for coeffs, rel, b in lp.constraints:
        coeffs = np.asarray(coeffs, dtype=float)
        rows.append(coeffs @ M)
        rels.append(rel)
        rhs.append(b - coeffs @ offset)
    for k, ub in extra_rows:
        row = np.zeros(ny)
        row[k] = 1.0
        rows.append(row)
        rels.append("<=")
        rhs.append(ub)
    A = np.array(rows, dtype=float).reshape(len(rows), ny)
    return _solve_standard(A, rels, np.array(rhs, dtype=float), lp.objective @ M, offset, M, lp.objective,
                           tol, rule, max_iter)


def _solve_standard(A, rels, b, c_y, offset, M, objective, tol, rule, max_iter) -> LpResult:
    """maximize c_y @ y over y >= 0 with row relations, then map back to x = offset + M y."""
    m, ny = A.shape
    A = A.copy()
    b = b.copy()

    def recover(y):
        return offset + (y if M is None else M @ y)

    if m == 0:
        if np.any(c_y > tol):
            return LpResult("unbounded")
        x = recover(np.zeros(ny))
        return LpResult("optimal", float(objective @ x), x, 0)

    n_slack = sum(1 for r in rels if r != "=")
    slack_sign = np.zeros(m)
    slack_col = np.full(m, -1)
    s = 0
    for i, r in enumerate(rels):
        if r == "<=":
            slack_sign[i], slack_col[i] = 1.0, ny + s
            s += 1
        elif r == ">=":
            slack_sign[i], slack_col[i] = -1.0, ny + s
            s += 1
    flip = b < 0
    A[flip] *= -1
    b[flip] *= -1
    slack_sign[flip] *= -1

    needs_art = ~(slack_sign > 0)
    n_art = int(needs_art.sum())
    N = ny + n_slack + n_art
    T = np.zeros((m + 2, N + 1))
    T[:m, :ny] = A
    for i in range(m):
        if slack_col[i] >= 0:
            T[i, slack_col[i]] = slack_sign[i]
    T[:m, -1] = b
    basis = np.zeros(m, dtype=int)
    a = ny + n_slack
    for i in range(m):
        if needs_art[i]:
            T[i, a] = 1.0
            basis[i] = a
            a += 1
        else:
            basis[i] = slack_col[i]
    obj = m       # phase-2 row: reduced costs of "maximize c_y @ y"
    aux = m + 1   # phase-1 row: maximize -sum(artificials)
    T[obj, :ny] = -c_y
    if max_iter is None:
        max_iter = 50 * (m + N) + 1000
    scale = max(1.0, float(np.abs(b).max()))
    iters = 0

    if n_art:
        for i in np.flatnonzero(needs_art):
            T[aux] -= T[i]
        T[aux, ny + n_slack:N] = 0.0
        status, it = _simplex_loop(T, basis, aux, N, tol, rule, max_iter)
        iters += it
        art_values = T[:m, -1][basis >= ny + n_slack]
        if T[aux, -1] < -tol * scale * 10 or np.any(np.abs(art_values) > tol * scale * 10):
            return LpResult("infeasible", iterations=iters)
        # drive remaining artificials out of the basis
        keep = np.ones(m, dtype=bool)
        for i in range(m):
            if basis[i] >= ny + n_slack:
                candidates = np.flatnonzero(np.abs(T[i, : ny + n_slack]) > tol)
                if candidates.size:
                    _pivot(T, i, int(candidates[0]))
                    basis[i] = int(candidates[0])
                else:
                    keep[i] = False
        T = np.vstack([T[:m][keep], T[obj : obj + 1]])
        T = np.hstack([T[:, : ny + n_slack], T[:, -1:]])
        basis = basis[keep]
        m = len(basis)
        obj = m
        N = ny + n_slack
    else:
        T = T[: m + 1]

    status, it = _simplex_loop(T, basis, obj, N, tol, rule, max_iter)
    iters += it
    if status == "unbounded":
        return LpResult("unbounded", iterations=iters)
    y = np.zeros(N)
    y[basis] = T[:m, -1]
    y = np.maximum(y[:ny], 0.0)
    x = recover(y)
    return LpResult("optimal", float(objective @ x), x, iters)


def lp_residual(lp: LinearProgram, x: np.ndarray) -> float:
    """Largest constraint or bound violation of ``x`` (0 when feasible)."""
    worst = 0.0
    for coeffs, rel, b in lp.constraints:
        v = float(np.dot(coeffs, x))
        if rel == "<=":
            worst = max(worst, v - b)
        elif rel == ">=":
            worst = max(worst, b - v)
        else:
            worst = max(worst, abs(v - b))
    if lp.bounds is not None:
        for xi, (lo, hi) in zip(x, lp.bounds):
            if lo is not None and math.isfinite(lo):
                worst = max(worst, lo - xi)
            if hi is not None and math.isfinite(hi):
                worst = max(worst, xi - hi)
    else:
        worst = max(worst, float(-np.min(x)) if len(x) else 0.0)
    return worst


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


def convex_hull_2d(points) -> np.ndarray:
    """Monotone-chain hull, counter-clockwise, collinear points dropped."""
    pts = np.unique(np.round(np.asarray(points, dtype=float).reshape(-1, 2), 12), axis=0)
    if len(pts) <= 2:
        return pts
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-14:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-14:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


@dataclass(frozen=True)
class Polytope:
    """A convex body given by its vertices.

    In dimension 2 the vertices are reduced to the hull (counter-clockwise)
    and an outward facet list ``(normals, offsets)`` with
    ``normals @ p <= offsets`` is kept alongside.
    """

    vertices: np.ndarray
    normals: np.ndarray | None = None
    offsets: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def has_facets(self) -> bool:
        return self.normals is not None

    @classmethod
    def from_points(cls, points) -> "Polytope":
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != 2:
            return cls(pts.copy())
        hull = convex_hull_2d(pts)
        if len(hull) < 3:
            return cls(hull)
        nxt = np.roll(hull, -1, axis=0)
        edge = nxt - hull
        normals = np.column_stack([edge[:, 1], -edge[:, 0]])
        normals /= np.linalg.norm(normals, axis=1, keepdims=True)
        offsets = np.einsum("ij,ij->i", normals, hull)
        return cls(hull, normals, offsets)

    @classmethod
    def box(cls, lower, upper) -> "Polytope":
        lower, upper = np.asarray(lower, float), np.asarray(upper, float)
        corners = [np.where(mask, upper, lower) for mask in product((False, True), repeat=len(lower))]
        return cls.from_points(corners)

    def support(self, direction) -> float:
        """max over the body of ``direction @ p``."""
        return float(np.max(self.vertices @ np.asarray(direction, dtype=float)))


UNIT_SQUARE = Polytope.box((0.0, 0.0), (1.0, 1.0))


def contains_point(body: Polytope, p, tol: float = FEAS_TOL) -> bool:
    """True iff ``p`` is a convex combination of the body's vertices.

    Decided by LP feasibility: find weights ``w >= 0`` with ``sum(w) = 1``
    and ``V.T @ w = p``.
    """
    p = np.asarray(p, dtype=float).ravel()
    V = body.vertices
    if p.size != V.shape[1]:
        raise DimensionError(f"point has dimension {p.size}, body has {V.shape[1]}")
    if np.any(np.max(np.abs(V - p), axis=1) <= tol):
        return True
    if body.has_facets:
        return bool(np.all(body.normals @ p <= body.offsets + tol))
    k = V.shape[0]
    lp = LinearProgram(np.zeros(k))
    lp.add(np.ones(k), "=", 1.0)
    for coord in range(V.shape[1]):
        lp.add(V[:, coord], "=", p[coord])
    return solve_lp(lp, tol=tol).optimal


def contains_point_lp(body: Polytope, p, tol: float = FEAS_TOL) -> bool:
    """Membership by the weight LP only, ignoring any facet list."""
    return contains_point(Polytope(body.vertices), p, tol)


def polygon_area(body: Polytope) -> float:
    """Shoelace area of a 2D body's hull."""
    if body.dimension != 2:
        raise DimensionError("polygon_area needs a 2D body")
    hull = convex_hull_2d(body.vertices)
    if len(hull) < 3:
        return 0.0
    x, y = hull[:, 0], hull[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def max_inscribed_scaled_copy(container: Polytope, template: Polytope) -> tuple[float, np.ndarray]:
    """Largest ``r`` in [0, 1] and shift ``x`` with ``r * template + x`` inside ``container``.

    One LP over ``(r, x)``: every container facet ``(a, b)`` contributes
    ``a @ x + r * h(a) <= b`` with ``h`` the template support function.
    Copies are translated and scaled, never rotated.
    """
    if container.dimension != 2 or template.dimension != 2:
        raise DimensionError("inscribed copies are only computed for 2D bodies")
    if not container.has_facets or polygon_area(container) <= 1e-14:
        return 0.0, np.zeros(2)
    normals, offsets = container.normals, container.offsets
    lp = LinearProgram(np.array([1.0, 0.0, 0.0]),
                       bounds=[(0.0, 1.0), (-math.inf, math.inf), (-math.inf, math.inf)])
    for a, b in zip(normals, offsets):
        lp.add([template.support(a), a[0], a[1]], "<=", b)
    res = solve_lp(lp)
    if not res.optimal:
        raise RuntimeError(f"inscribed-copy LP ended with status {res.status}")
    r, sx, sy = res.x
    return float(r), np.array([sx, sy])


def scaled_copy(template: Polytope, r: float, shift) -> Polytope:
    return Polytope.from_points(r * template.vertices + np.asarray(shift, dtype=float))


def regular_polygon(n: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> Polytope:
    theta = phase + 2 * np.pi * np.arange(n) / n
    pts = np.column_stack([np.cos(theta), np.sin(theta)]) * radius + np.asarray(center, float)
    return Polytope.from_points(pts)


def enumerate_vertices_lp(lp: LinearProgram, tol: float = 1e-9) -> float | None:
    """Brute-force optimum of a bounded LP over all basic feasible solutions.

    Intended for tiny programs (a handful of variables) as an independent
    check on :func:`solve_lp`. Variable bounds are folded into the row list
    and every square subsystem of active constraints is solved directly.
    Returns ``None`` when no vertex is feasible.
    """
    from itertools import combinations

    n = lp.n_vars
    rows, rhs, is_eq = [], [], []
    for coeffs, rel, b in lp.constraints:
        sign = -1.0 if rel == ">=" else 1.0
        rows.append(sign * np.asarray(coeffs, float))
        rhs.append(sign * b)
        is_eq.append(rel == "=")
    bounds = lp.bounds if lp.bounds is not None else [(0.0, math.inf)] * n
    for j, (lo, hi) in enumerate(bounds):
        e = np.zeros(n)
        e[j] = 1.0
        if lo is not None and math.isfinite(lo):
            rows.append(-e)
            rhs.append(-lo)
            is_eq.append(False)
        if hi is not None and math.isfinite(hi):
            rows.append(e.copy())
            rhs.append(hi)
            is_eq.append(False)
    A = np.array(rows).reshape(-1, n)
    b = np.array(rhs)
    eq_idx = [i for i, e in enumerate(is_eq) if e]
    ineq_idx = [i for i, e in enumerate(is_eq) if not e]
    best = None
    need = n - len(eq_idx)
    if need < 0:
        need = 0
    for subset in combinations(ineq_idx, need):
        idx = eq_idx + list(subset)
        sub = A[idx]
        if np.linalg.matrix_rank(sub) < n:
            continue
        x = np.linalg.lstsq(sub, b[idx], rcond=None)[0]
        if np.any(A @ x > b + tol * 10):
            continue
        if any(abs(A[i] @ x - b[i]) > tol * 10 for i in eq_idx):
            continue
        v = float(lp.objective @ x)
        if best is None or v > best:
            best = v
    return best
