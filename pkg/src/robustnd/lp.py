"""Sparse linear programs and a bounded-variable revised simplex solver.

The solver handles general bounds (including free variables via +/-inf
sentinels) natively, runs a two-phase method with artificial variables, and
falls back to Bland's rule once a degeneracy counter trips, which guarantees
termination.  Row duals follow the convention of a minimization problem:
binding ``<=`` rows carry non-positive duals, binding ``>=`` rows
non-negative ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tolerances import DEFAULT, Tolerances

INF = float("inf")

LE, EQ, GE = "<=", "=", ">="
_SENSES = (LE, EQ, GE)

# variable statuses inside the simplex kernel
_BASIC, _AT_LOWER, _AT_UPPER, _FREE = 0, 1, 2, 3

_REFACTOR_EVERY = 64
# Consecutive zero-step pivots before Bland's rule kicks in.  Long degenerate
# runs are common in the path-assignment models, so the trigger is generous;
# it exists to guarantee termination, not to fire early.
_DEGEN_LIMIT = 2000


class LpError(Exception):
    """Malformed linear program (bad index, NaN coefficient, bad sense)."""


@dataclass
class LinearProgram:
    """Minimization LP with sparse rows and per-variable bounds.

    Rows are stored as parallel (column indices, coefficients) arrays plus a
    comparator and right-hand side.  Bounds default to [0, +inf); use
    ``-inf``/``+inf`` sentinels for free or one-sided variables.
    """

    num_vars: int
    objective: np.ndarray = field(default=None)  # type: ignore[assignment]
    row_cols: list[np.ndarray] = field(default_factory=list)
    row_vals: list[np.ndarray] = field(default_factory=list)
    row_senses: list[str] = field(default_factory=list)
    row_rhs: list[float] = field(default_factory=list)
    lower: np.ndarray = field(default=None)  # type: ignore[assignment]
    upper: np.ndarray = field(default=None)  # type: ignore[assignment]
    names: list[str] | None = None

    def __post_init__(self) -> None:
        n = self.num_vars
        if self.objective is None:
            self.objective = np.zeros(n)
        else:
            self.objective = np.asarray(self.objective, dtype=float)
        if self.lower is None:
            self.lower = np.zeros(n)
        else:
            self.lower = np.asarray(self.lower, dtype=float)
        if self.upper is None:
            self.upper = np.full(n, INF)
        else:
            self.upper = np.asarray(self.upper, dtype=float)

    @property
    def num_rows(self) -> int:
        return len(self.row_rhs)

    def set_objective(self, col: int, coef: float) -> None:
        self.objective[col] = coef

    def add_row(self, cols, vals, sense: str, rhs: float) -> int:
        """Append a sparse row; returns its index."""
        if sense not in _SENSES:
            raise LpError(f"unknown row sense {sense!r}")
        cols = np.asarray(cols, dtype=np.intp)
        vals = np.asarray(vals, dtype=float)
        if cols.shape != vals.shape:
            raise LpError("row columns and values differ in length")
        if cols.size and (cols.min() < 0 or cols.max() >= self.num_vars):
            raise LpError(f"row {len(self.row_rhs)}: column index out of range")
        if np.any(~np.isfinite(vals)):
            raise LpError(f"row {len(self.row_rhs)}: non-finite coefficient")
        if not np.isfinite(rhs):
            raise LpError(f"row {len(self.row_rhs)}: non-finite rhs")
        self.row_cols.append(cols)
        self.row_vals.append(vals)
        self.row_senses.append(sense)
        self.row_rhs.append(float(rhs))
        return len(self.row_rhs) - 1

    def set_bounds(self, col: int, lower: float, upper: float) -> None:
        self.lower[col] = lower
        self.upper[col] = upper

    def validate(self) -> None:
        if np.any(np.isnan(self.objective)):
            raise LpError("NaN in objective")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise LpError("NaN in bounds")
        if np.any(self.lower > self.upper):
            bad = int(np.argmax(self.lower > self.upper))
            raise LpError(f"variable {bad}: lower bound exceeds upper bound")
        for i, (cols, vals) in enumerate(zip(self.row_cols, self.row_vals)):
            if cols.size and (cols.min() < 0 or cols.max() >= self.num_vars):
                raise LpError(f"row {i}: column index out of range")
            if np.any(np.isnan(vals)):
                raise LpError(f"row {i}: NaN coefficient")

    def copy(self) -> "LinearProgram":
        return LinearProgram(
            num_vars=self.num_vars,
            objective=self.objective.copy(),
            row_cols=[c.copy() for c in self.row_cols],
            row_vals=[v.copy() for v in self.row_vals],
            row_senses=list(self.row_senses),
            row_rhs=list(self.row_rhs),
            lower=self.lower.copy(),
            upper=self.upper.copy(),
            names=list(self.names) if self.names is not None else None,
        )

    def dense_matrix(self) -> np.ndarray:
        a = np.zeros((self.num_rows, self.num_vars))
        for i, (cols, vals) in enumerate(zip(self.row_cols, self.row_vals)):
            np.add.at(a[i], cols, vals)
        return a


@dataclass
class Basis:
    """Simplex basis snapshot usable to warm-start a later solve."""

    basic: np.ndarray  # row -> column index in the extended (vars+slacks) space
    status: np.ndarray  # per extended column: _AT_LOWER/_AT_UPPER/_FREE/_BASIC


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | numerical-failure
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    reduced_costs: np.ndarray | None = None
    objective: float | None = None
    dual_objective: float | None = None
    iterations: int = 0
    basis: Basis | None = None


class _Kernel:
    """Bounded-variable revised simplex over the equality form  A x = b."""

    def __init__(self, lp: LinearProgram, tol: Tolerances):
        lp.validate()
        self.tol = tol
        self.n = lp.num_vars
        self.m = lp.num_rows
        n, m = self.n, self.m
        self.ncols = n + m  # structural + one slack per row
        self.A = np.zeros((m, self.ncols))
        for i, (cols, vals) in enumerate(zip(lp.row_cols, lp.row_vals)):
            np.add.at(self.A[i], cols, vals)
        self.b = np.asarray(lp.row_rhs, dtype=float)
        self.lower = np.empty(self.ncols)
        self.upper = np.empty(self.ncols)
        self.lower[:n] = lp.lower
        self.upper[:n] = lp.upper
        for i, sense in enumerate(lp.row_senses):
            j = n + i
            self.A[i, j] = 1.0
            if sense == LE:
                self.lower[j], self.upper[j] = 0.0, INF
            elif sense == GE:
                self.lower[j], self.upper[j] = -INF, 0.0
            else:
                self.lower[j], self.upper[j] = 0.0, 0.0
        self.cost = np.zeros(self.ncols)
        self.cost[:n] = lp.objective
        # row scale used for feasibility checks
        self.row_scale = np.maximum(1.0, np.abs(self.A).max(axis=1, initial=1.0))

        self.status = np.empty(self.ncols, dtype=np.int8)
        self.basic: np.ndarray | None = None
        self.binv: np.ndarray | None = None
        self.xb: np.ndarray | None = None
        self.iterations = 0
        self.bland = False
        self._degen_run = 0
        self.failure = False

    # -- initial points -------------------------------------------------

    def nonbasic_value(self, j: int) -> float:
        s = self.status[j]
        if s == _AT_LOWER:
            return self.lower[j]
        if s == _AT_UPPER:
            return self.upper[j]
        return 0.0

    def default_status(self, j: int) -> int:
        if self.lower[j] > -INF:
            return _AT_LOWER
        if self.upper[j] < INF:
            return _AT_UPPER
        return _FREE

    def nonbasic_vector(self) -> np.ndarray:
        v = np.zeros(self.ncols)
        at_l = self.status == _AT_LOWER
        at_u = self.status == _AT_UPPER
        v[at_l] = self.lower[at_l]
        v[at_u] = self.upper[at_u]
        return v

    def refactorize(self) -> bool:
        """Rebuild the basis inverse and basic values from scratch."""
        assert self.basic is not None
        bmat = self.A[:, self.basic]
        try:
            self.binv = np.linalg.inv(bmat)
        except np.linalg.LinAlgError:
            return False
        if not np.all(np.isfinite(self.binv)):
            return False
        v = self.nonbasic_vector()
        v[self.basic] = 0.0
        self.xb = self.binv @ (self.b - self.A @ v)
        return True

    # -- core iteration --------------------------------------------------

    def iterate(self, cost: np.ndarray, max_iters: int) -> str:
        """Run simplex iterations until optimal/unbounded for ``cost``."""
        tol = self.tol
        since_refactor = 0
        while True:
            if self.iterations >= max_iters:
                self.failure = True
                return "iteration-limit"
            self.iterations += 1
            y = cost[self.basic] @ self.binv
            d = cost - y @ self.A
            d[self.basic] = 0.0

            # entering-candidate violations by status
            viol = np.zeros(self.ncols)
            at_l = self.status == _AT_LOWER
            at_u = self.status == _AT_UPPER
            fr = self.status == _FREE
            fixed = self.lower == self.upper
            viol[at_l] = np.maximum(0.0, -d[at_l])
            viol[at_u] = np.maximum(0.0, d[at_u])
            viol[fr] = np.abs(d[fr])
            viol[fixed] = 0.0  # fixed columns never enter
            dual_tol = tol.gap_rel * max(1.0, float(np.abs(cost).max()))
            if not self.bland:
                q = int(np.argmax(viol))
                if viol[q] <= dual_tol:
                    return "optimal"
            else:
                elig = np.nonzero(viol > dual_tol)[0]
                if elig.size == 0:
                    return "optimal"
                q = int(elig[0])

            sigma = 1.0
            if self.status[q] == _AT_UPPER or (self.status[q] == _FREE and d[q] > 0):
                sigma = -1.0

            alpha = self.binv @ self.A[:, q]
            step_col = sigma * alpha
            # ratio test against basic-variable bounds
            lb = self.lower[self.basic]
            ub = self.upper[self.basic]
            t_best = INF
            if self.upper[q] < INF and self.lower[q] > -INF:
                t_best = self.upper[q] - self.lower[q]
            leave = -1
            pos = step_col > tol.pivot
            neg = step_col < -tol.pivot
            with np.errstate(invalid="ignore"):
                t_rows = np.full(self.m, INF)
                t_rows[pos] = (self.xb[pos] - lb[pos]) / step_col[pos]
                t_rows[neg] = (self.xb[neg] - ub[neg]) / step_col[neg]
            t_rows[~np.isfinite(t_rows)] = INF
            np.maximum(t_rows, 0.0, out=t_rows)
            r_min = float(t_rows.min(initial=INF))
            if r_min < t_best:
                t_best = r_min
                ties = np.nonzero(t_rows <= r_min + tol.pivot)[0]
                if self.bland:
                    # anti-cycling index rule, but never through a pivot that
                    # is orders of magnitude below the best available one
                    mags = np.abs(step_col[ties])
                    stable = ties[mags >= 0.01 * mags.max()]
                    leave = int(stable[np.argmin(self.basic[stable])])
                else:
                    leave = int(ties[np.argmax(np.abs(step_col[ties]))])
            if t_best == INF:
                return "unbounded"

            if t_best <= tol.pivot:
                self._degen_run += 1
                if self._degen_run > _DEGEN_LIMIT:
                    self.bland = True
            else:
                self._degen_run = 0

            if leave < 0:
                # bound flip: entering moves to its opposite bound
                self.xb -= t_best * step_col
                self.status[q] = _AT_UPPER if sigma > 0 else _AT_LOWER
                continue

            enter_val = self.nonbasic_value(q) + sigma * t_best
            out = self.basic[leave]
            self.status[out] = _AT_LOWER if step_col[leave] > 0 else _AT_UPPER
            if self.lower[out] == -INF and self.upper[out] == INF:
                self.status[out] = _FREE
            self.xb -= t_best * step_col
            self.xb[leave] = enter_val
            self.basic[leave] = q
            self.status[q] = _BASIC

            piv = alpha[leave]
            if abs(piv) < tol.pivot:
                if not self.refactorize():
                    self.failure = True
                    return "numerical-failure"
                continue
            row = self.binv[leave] / piv
            self.binv -= np.outer(alpha, row)
            self.binv[leave] = row
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                since_refactor = 0
                if not self.refactorize():
                    self.failure = True
                    return "numerical-failure"

    # -- phase management --------------------------------------------------

    def start_cold(self) -> str:
        """Phase 1 from the slack basis, with artificials where needed."""
        n, m = self.n, self.m
        for j in range(self.ncols):
            self.status[j] = self.default_status(j)
        v = self.nonbasic_vector()
        resid = self.b - self.A @ v
        # slack of row i can absorb resid within its own bounds
        need_art = []
        for i in range(m):
            j = n + i
            lo, hi = self.lower[j], self.upper[j]
            if lo - 1e-12 <= resid[i] <= hi + 1e-12:
                continue
            need_art.append(i)
        if not need_art:
            # slack basis is feasible outright
            self.basic = np.arange(n, n + m, dtype=np.intp)
            self.status[self.basic] = _BASIC
            if not self.refactorize():
                return "numerical-failure"
            return "feasible"

        # extend with artificial columns for the violated rows
        k = len(need_art)
        ext = np.zeros((m, k))
        art_cols = np.arange(self.ncols, self.ncols + k, dtype=np.intp)
        self.A = np.hstack([self.A, ext])
        self.lower = np.concatenate([self.lower, np.zeros(k)])
        self.upper = np.concatenate([self.upper, np.full(k, INF)])
        self.cost = np.concatenate([self.cost, np.zeros(k)])
        self.status = np.concatenate(
            [self.status, np.full(k, _AT_LOWER, dtype=np.int8)]
        )
        self.ncols += k

        basic = np.arange(n, n + m, dtype=np.intp)
        for idx, i in enumerate(need_art):
            j = n + i
            lo, hi = self.lower[j], self.upper[j]
            anchor = 0.0
            if lo > -INF:
                anchor = lo
            elif hi < INF:
                anchor = hi
            self.status[j] = self.default_status(j)
            gap = resid[i] - anchor
            self.A[i, art_cols[idx]] = 1.0 if gap >= 0 else -1.0
            basic[i] = art_cols[idx]
        self.basic = basic
        self.status[self.basic] = _BASIC
        if not self.refactorize():
            return "numerical-failure"

        phase1 = np.zeros(self.ncols)
        phase1[art_cols] = 1.0
        outcome = self.iterate(phase1, max_iters=self._iter_cap())
        if outcome in ("numerical-failure", "iteration-limit"):
            return "numerical-failure"
        art_level = float(phase1[self.basic] @ np.maximum(self.xb, 0.0))
        if art_level > self.tol.feas * max(1.0, float(np.abs(self.b).max(initial=1.0))):
            return "infeasible"
        self._expel_artificials(art_cols)
        # freeze artificials at zero so phase 2 cannot reuse them
        self.lower[art_cols] = 0.0
        self.upper[art_cols] = 0.0
        for j in art_cols:
            if self.status[j] != _BASIC:
                self.status[j] = _AT_LOWER
        return "feasible"

    def _expel_artificials(self, art_cols: np.ndarray) -> None:
        art_set = set(int(j) for j in art_cols)
        for i in range(self.m):
            j = int(self.basic[i])
            if j not in art_set:
                continue
            row = self.binv[i] @ self.A
            cand = np.nonzero(np.abs(row) > 1e-7)[0]
            cand = [int(c) for c in cand if int(c) not in art_set and self.status[int(c)] != _BASIC]
            if not cand:
                continue  # dependent row: artificial stays basic at 0
            q = cand[0]
            alpha = self.binv @ self.A[:, q]
            piv = alpha[i]
            if abs(piv) < self.tol.pivot:
                continue
            self.status[j] = _AT_LOWER
            self.xb[i] = self.nonbasic_value(q)
            self.basic[i] = q
            self.status[q] = _BASIC
            rowv = self.binv[i] / piv
            self.binv -= np.outer(alpha, rowv)
            self.binv[i] = rowv
            self.refactorize()

    def start_warm(self, basis: Basis) -> bool:
        """Adopt a previous basis if it is still primal feasible."""
        if basis.basic.shape != (self.m,) or basis.status.shape[0] < self.n + self.m:
            return False
        if np.any(basis.basic >= self.ncols):
            return False
        self.basic = basis.basic.astype(np.intp).copy()
        self.status[:] = basis.status[: self.ncols]
        basic_set = set(int(t) for t in self.basic)
        # re-anchor nonbasic statuses that no longer match finite bounds
        for j in range(self.ncols):
            if self.status[j] == _BASIC and j not in basic_set:
                self.status[j] = self.default_status(j)
            elif self.status[j] == _AT_LOWER and self.lower[j] == -INF:
                self.status[j] = self.default_status(j)
            elif self.status[j] == _AT_UPPER and self.upper[j] == INF:
                self.status[j] = self.default_status(j)
        self.status[self.basic] = _BASIC
        if not self.refactorize():
            return False
        slack = self.tol.feas * 10.0
        if np.any(self.xb < self.lower[self.basic] - slack):
            return False
        if np.any(self.xb > self.upper[self.basic] + slack):
            return False
        np.clip(self.xb, self.lower[self.basic], self.upper[self.basic], out=self.xb)
        return True

    def _iter_cap(self) -> int:
        return 200 * (self.m + self.ncols) + 2000

    # -- reporting ---------------------------------------------------------

    def full_point(self) -> np.ndarray:
        v = self.nonbasic_vector()
        v[self.basic] = self.xb
        return v

    def primal_feasible(self, v: np.ndarray) -> bool:
        resid = self.A @ v - self.b
        if np.any(np.abs(resid) > self.tol.feas * self.row_scale * 10.0):
            return False
        slack = self.tol.feas * 10.0
        lo = np.where(self.lower == -INF, -INF, self.lower - slack)
        hi = np.where(self.upper == INF, INF, self.upper + slack)
        return bool(np.all(v >= lo) and np.all(v <= hi))


def _attempt(
    lp: LinearProgram,
    tol: Tolerances,
    warm_basis: Basis | None,
    bland_from_start: bool,
) -> tuple[str, _Kernel]:
    kern = _Kernel(lp, tol)
    kern.bland = bland_from_start
    warm_ok = warm_basis is not None and kern.start_warm(warm_basis)
    if not warm_ok:
        state = kern.start_cold()
        if state != "feasible":
            return state, kern
    outcome = kern.iterate(kern.cost, max_iters=kern._iter_cap())
    if outcome == "unbounded":
        return "unbounded", kern
    if outcome != "optimal":
        return "numerical-failure", kern
    if not kern.refactorize():
        return "numerical-failure", kern
    if not kern.primal_feasible(kern.full_point()):
        return "numerical-failure", kern
    return "optimal", kern


def solve_lp(
    lp: LinearProgram,
    tolerances: Tolerances | None = None,
    warm_basis: Basis | None = None,
) -> LpSolution:
    """Solve a minimization LP; statuses are exact within the tolerances.

    A warm-start basis is adopted only when it is still primal feasible for
    the (possibly re-bounded) program; otherwise the solve starts cold.  On
    numerical trouble the solve restarts once from scratch under the
    anti-cycling rule before reporting a failure, so a wrong "optimal" is
    never returned.
    """
    tol = tolerances or DEFAULT
    status, kern = _attempt(lp, tol, warm_basis, bland_from_start=False)
    if status == "numerical-failure":
        status, kern = _attempt(lp, tol, None, bland_from_start=True)
    if status in ("infeasible", "unbounded", "numerical-failure"):
        return LpSolution(status=status, iterations=kern.iterations)

    point = kern.full_point()
    y = kern.cost[kern.basic] @ kern.binv
    d = kern.cost - y @ kern.A
    objective = float(kern.cost @ point)
    # dual objective: y'b plus reduced-cost terms at finite active bounds
    lam = np.maximum(d, 0.0)
    mu = np.maximum(-d, 0.0)
    finite_l = kern.lower > -INF
    finite_u = kern.upper < INF
    dual_obj = float(y @ kern.b)
    dual_obj += float(lam[finite_l] @ kern.lower[finite_l])
    dual_obj -= float(mu[finite_u] @ kern.upper[finite_u])

    nvars = lp.num_vars
    basis = Basis(
        basic=kern.basic.copy(),
        status=kern.status[: nvars + lp.num_rows].copy(),
    )
    return LpSolution(
        status="optimal",
        x=point[:nvars].copy(),
        duals=np.asarray(y[: lp.num_rows], dtype=float).copy(),
        reduced_costs=np.asarray(d[:nvars], dtype=float).copy(),
        objective=objective,
        dual_objective=dual_obj,
        iterations=kern.iterations,
        basis=basis,
    )


def solve_lp_with_fixings(
    lp: LinearProgram,
    fixings: dict[int, float],
    tolerances: Tolerances | None = None,
    warm_basis: Basis | None = None,
) -> LpSolution:
    """Solve ``lp`` with selected variables pinned to values.

    Equivalent to tightening both bounds; a fixing outside the variable's
    bounds yields an immediate infeasible status.
    """
    tol = tolerances or DEFAULT
    for col, val in fixings.items():
        if not 0 <= col < lp.num_vars:
            raise LpError(f"fixing for unknown column {col}")
        if val < lp.lower[col] - tol.feas or val > lp.upper[col] + tol.feas:
            return LpSolution(status="infeasible")
    if not fixings:
        return solve_lp(lp, tolerances=tol, warm_basis=warm_basis)
    fixed = lp.copy()
    for col, val in fixings.items():
        fixed.set_bounds(col, val, val)
    return solve_lp(fixed, tolerances=tol, warm_basis=warm_basis)


def write_fixed_mps(lp: LinearProgram, name: str = "ROBUSTND") -> str:
    """Render the LP in fixed-column MPS interchange format for external checks."""
    pad = lambda s, w: s[:w].ljust(w)
    var_names = lp.names or [f"X{j}" for j in range(lp.num_vars)]
    var_names = [n.replace(" ", "_")[:8] for n in var_names]
    row_names = [f"R{i}" for i in range(lp.num_rows)]
    lines = [f"NAME          {name}", "ROWS", " N  COST"]
    sense_code = {LE: "L", EQ: "E", GE: "G"}
    for i, sense in enumerate(lp.row_senses):
        lines.append(f" {sense_code[sense]}  {row_names[i]}")
    lines.append("COLUMNS")

    entries: dict[int, list[tuple[str, float]]] = {j: [] for j in range(lp.num_vars)}
    for j in range(lp.num_vars):
        if lp.objective[j] != 0.0:
            entries[j].append(("COST", float(lp.objective[j])))
    for i, (cols, vals) in enumerate(zip(lp.row_cols, lp.row_vals)):
        for c, v in zip(cols, vals):
            entries[int(c)].append((row_names[i], float(v)))
    for j in range(lp.num_vars):
        pair: list[tuple[str, float]] = []
        for rname, coef in entries[j]:
            pair.append((rname, coef))
            if len(pair) == 2:
                lines.append(
                    "    "
                    + pad(var_names[j], 8)
                    + "  "
                    + pad(pair[0][0], 8)
                    + f"{pair[0][1]:>12.6g}   "
                    + pad(pair[1][0], 8)
                    + f"{pair[1][1]:>12.6g}"
                )
                pair = []
        if pair:
            lines.append(
                "    " + pad(var_names[j], 8) + "  " + pad(pair[0][0], 8) + f"{pair[0][1]:>12.6g}"
            )
    lines.append("RHS")
    for i, rhs in enumerate(lp.row_rhs):
        if rhs != 0.0:
            lines.append("    " + pad("RHS", 8) + "  " + pad(row_names[i], 8) + f"{rhs:>12.6g}")
    lines.append("BOUNDS")
    for j in range(lp.num_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if lo == 0.0 and hi == INF:
            continue
        if lo == -INF and hi == INF:
            lines.append(" FR " + pad("BND", 8) + "  " + pad(var_names[j], 8))
            continue
        if lo == hi:
            lines.append(" FX " + pad("BND", 8) + "  " + pad(var_names[j], 8) + f"{lo:>12.6g}")
            continue
        if lo != 0.0:
            if lo == -INF:
                lines.append(" MI " + pad("BND", 8) + "  " + pad(var_names[j], 8))
            else:
                lines.append(" LO " + pad("BND", 8) + "  " + pad(var_names[j], 8) + f"{lo:>12.6g}")
        if hi < INF:
            lines.append(" UP " + pad("BND", 8) + "  " + pad(var_names[j], 8) + f"{hi:>12.6g}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"
