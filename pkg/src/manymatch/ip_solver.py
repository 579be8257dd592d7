"""Exact solver for small bounded covering integer programs.

Programs have the form ``min c.x  s.t.  A x >= b,  lower <= x <= upper``,
``x`` integer, with non-negative constraint coefficients. Because ``A >= 0``
a box is feasible iff ``A @ upper >= b``, which makes feasibility checks exact.

:func:`solve_ip` splits the program into independent blocks (variables linked
through shared rows). Blocks with a small search space are enumerated
exhaustively; larger blocks go through best-first branch and bound with
linear-relaxation bounds, and very large ones through the HiGHS
mixed-integer solver. The LP is solved in floating point by HiGHS, but the
bound used for pruning is the Lagrangian value of the returned duals, which is
a valid lower bound for *any* non-negative multipliers, so LP inaccuracy can
only weaken pruning, never cut off an optimum.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp
from scipy.sparse.csgraph import connected_components

from .errors import InfeasibleProgramError, InvalidInputError

ENUMERATION_CAP = 10**7
_BLOCK_ENUM_LIMIT = 4096
_EXACT_VAR_LIMIT = 400
_FLOAT_TIE = 1e-10
_CHUNK = 1 << 18


@dataclass(frozen=True)
class IntegerProgram:
    objective: np.ndarray
    A: sp.csr_matrix
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        n = len(self.objective)
        if self.A.shape[1] != n or len(self.lower) != n or len(self.upper) != n:
            raise InvalidInputError("inconsistent program dimensions")
        if self.A.shape[0] != len(self.rhs):
            raise InvalidInputError("one right-hand side per row required")
        if self.A.nnz and self.A.data.min() < 0:
            raise InvalidInputError("constraint coefficients must be non-negative")
        if np.any(self.lower > self.upper):
            raise InvalidInputError("lower bound above upper bound")

    @classmethod
    def build(cls, objective, rows, rhs, lower, upper) -> "IntegerProgram":
        """``rows`` is a list of ``{var: coeff}`` dicts or a dense matrix."""
        obj = np.asarray(objective)
        obj = obj.astype(np.int64) if np.issubdtype(obj.dtype, np.integer) else obj.astype(np.float64)
        n = len(obj)
        if isinstance(rows, (list, tuple)) and rows and isinstance(rows[0], dict):
            r, cidx, vals = [], [], []
            for i, row in enumerate(rows):
                for j, a in row.items():
                    r.append(i)
                    cidx.append(j)
                    vals.append(a)
            A = sp.csr_matrix((np.asarray(vals, dtype=np.int64), (r, cidx)), shape=(len(rows), n))
        else:
            dense = np.asarray(rows, dtype=np.int64).reshape(-1, n) if n else np.zeros((len(rhs), 0), np.int64)
            A = sp.csr_matrix(dense)
        A.sum_duplicates()
        return cls(obj, A, np.asarray(rhs, dtype=np.int64).reshape(-1),
                   np.asarray(lower, dtype=np.int64).reshape(-1),
                   np.asarray(upper, dtype=np.int64).reshape(-1))

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    @property
    def integral(self) -> bool:
        return np.issubdtype(self.objective.dtype, np.integer)

    def is_feasible(self, x) -> bool:
        x = np.asarray(x, dtype=np.int64)
        if np.any(x < self.lower) or np.any(x > self.upper):
            return False
        return bool(np.all(self.A @ x >= self.rhs))

    def value(self, x):
        return _objective_value(self.objective, x)


@dataclass(frozen=True)
class IpSolution:
    values: np.ndarray
    objective: float
    nodes: int = field(default=0, compare=False)
    proven: bool = field(default=True, compare=False)


def _objective_value(c, x):
    if np.issubdtype(np.asarray(c).dtype, np.integer):
        x = np.asarray(x, dtype=np.int64)
        nz = np.flatnonzero(x)
        return sum(int(a) * int(v) for a, v in zip(c[nz].tolist(), x[nz].tolist()))
    return float(np.dot(np.asarray(c, dtype=np.float64), np.asarray(x, dtype=np.float64)))


def _check_box_feasible(prog: IntegerProgram):
    if prog.n_rows and np.any(prog.A @ prog.upper < prog.rhs):
        bad = int(np.flatnonzero(prog.A @ prog.upper < prog.rhs)[0])
        raise InfeasibleProgramError(f"row {bad} cannot be satisfied within the variable bounds")


def enumerate_ip(prog: IntegerProgram, cap: int = ENUMERATION_CAP) -> IpSolution:
    """Optimum by full enumeration; ties go to the lexicographically smallest vector."""
    n = prog.n_vars
    if n == 0:
        _check_box_feasible(prog)
        return IpSolution(np.zeros(0, dtype=np.int64), 0, 1)
    span = (prog.upper - prog.lower + 1).astype(np.int64)
    total = 1
    for s in span:
        total *= int(s)
    if total > cap:
        raise InvalidInputError(f"search space {total} exceeds enumeration cap {cap}")
    Ad = prog.A.toarray()
    best_val, best_x = None, None
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK))
        X = np.stack(np.unravel_index(idx, tuple(int(s) for s in span)), axis=1) + prog.lower
        ok = np.all(X @ Ad.T >= prog.rhs, axis=1) if prog.n_rows else np.ones(len(X), bool)
        if not ok.any():
            continue
        Xf = X[ok]
        vals = Xf @ prog.objective
        k = int(np.argmin(vals))
        if best_val is None or vals[k] < best_val:
            best_val, best_x = vals[k], Xf[k]
    if best_x is None:
        raise InfeasibleProgramError("no feasible assignment")
    return IpSolution(best_x.astype(np.int64), prog.value(best_x), total)


def _enumerate_block(c, Ad, b, span):
    shape = tuple(int(s) for s in span)
    X = np.indices(shape).reshape(len(shape), -1).T
    ok = np.all(X @ Ad.T >= b, axis=1)
    vals = X[ok] @ c
    k = int(np.argmin(vals))
    return X[ok][k], int(np.prod(shape))


class _BlockSearch:
    """Best-first branch and bound on one block, variables shifted to ``[0, ub]``.

    Nodes are kept in a heap keyed by their relaxation bound; on equal bounds
    the node created first (the lower branch) is expanded first.
    """

    def __init__(self, c, A, b, ub, integral):
        self.c = c
        self.cf = c.astype(np.float64)
        self.A = A.astype(np.float64).tocsr()
        self.Ai = A
        self.At = self.A.T.tocsr()
        self.b = b
        self.bf = b.astype(np.float64)
        self.ub = ub
        self.integral = integral
        self.nodes = 0
        self.best_val = math.inf
        self.best_x = None
        self._seq = 0
        # branch preference: biggest objective coefficient, then smallest index
        self.rank = np.empty(len(c), dtype=np.int64)
        self.rank[np.lexsort((np.arange(len(c)), -self.cf))] = np.arange(len(c))

    def _feasible(self, x):
        return bool(np.all(self.Ai @ x >= self.b))

    def _offer(self, x):
        val = _objective_value(self.c, x)
        if val < self.best_val:
            self.best_val, self.best_x = val, x.copy()

    def _repair(self, x, lo, hi):
        """Greedy completion of a rounded-down point inside ``[lo, hi]``, then redundancy removal."""
        x = np.clip(x, lo, hi)
        short = self.b - self.Ai @ x
        A = self.A
        while np.any(short > 0):
            need = np.maximum(short, 0).astype(np.float64)
            gain = self.At @ np.minimum(need, 1.0)
            room = hi - x
            ok = (room > 0) & (gain > 0)
            if not ok.any():
                return None
            ratio = np.where(ok, self.cf / np.where(gain > 0, gain, 1.0), np.inf)
            j = int(np.argmin(ratio))
            x[j] += 1
            short = short - A[:, j].toarray().ravel()
        # drop units that are no longer needed, most expensive first
        for j in np.argsort(-self.cf, kind="stable"):
            while x[j] > lo[j] and self.cf[j] > 0:
                col = A[:, j].toarray().ravel()
                if np.any(short + col > 0):
                    break
                x[j] -= 1
                short = short + col
        return x

    def _bound(self, res, lo, hi):
        y = np.maximum(0.0, -np.asarray(res.ineqlin.marginals, dtype=np.float64))
        rc = self.cf - self.At @ y
        terms = np.where(rc > 0, rc * lo, rc * hi)
        yb = y * self.bf
        L = float(yb.sum() + terms.sum())
        slack = 1e-11 * (float(np.abs(yb).sum()) + float(np.abs(terms).sum()) + 1.0)
        L -= slack
        return math.ceil(L) if self.integral else L

    def _prunable(self, bound):
        if self.integral:
            return bound >= self.best_val
        # float objectives: the bound already carries a 1e-11 rounding slack, so
        # ties within 1e-10 relative count as no improvement
        return bound >= self.best_val - _FLOAT_TIE * abs(self.best_val)

    def _split(self, lo, hi, x):
        """Branch variable and split value; ``x`` is the relaxation point or None."""
        if x is not None:
            frac = np.abs(x - np.rint(x)) > 1e-7
            cand = np.flatnonzero(frac & (hi > lo))
            if cand.size:
                j = int(cand[np.argmin(self.rank[cand])])
                return j, math.floor(x[j])
        cand = np.flatnonzero(hi > lo)
        if cand.size == 0:
            return None
        j = int(cand[np.argmin(self.rank[cand])])
        return j, int(lo[j] + (hi[j] - lo[j]) // 2)

    def _evaluate(self, lo, hi, heap):
        """Solve the relaxation of a box, update the incumbent, queue it if still open."""
        if not self._feasible(hi):
            return
        self.nodes += 1
        res = linprog(self.cf, A_ub=-self.A, b_ub=-self.bf,
                      bounds=np.stack([lo, hi], axis=1), method="highs-ds")
        if res.status == 0:
            bound = self._bound(res, lo, hi)
            if self._prunable(bound):
                return
            x = np.clip(res.x, lo, hi)
            xr = np.rint(x).astype(np.int64)
            if np.all(np.abs(x - xr) <= 1e-7) and self._feasible(xr):
                self._offer(xr)
                if self._prunable(bound):
                    return
            xg = self._repair(np.floor(x + 1e-9).astype(np.int64), lo, hi)
            if xg is not None:
                self._offer(xg)
                if self._prunable(bound):
                    return
        else:
            bound, x = -math.inf, None
        if np.array_equal(lo, hi):
            if self._feasible(lo):
                self._offer(lo.copy())
            return
        self._seq += 1
        heapq.heappush(heap, (bound, self._seq, lo, hi, x))

    def run(self):
        self._offer(self.ub.copy())
        heap: list = []
        self._evaluate(np.zeros_like(self.ub), self.ub.copy(), heap)
        while heap:
            bound, _, lo, hi, x = heapq.heappop(heap)
            if self._prunable(bound):
                break
            split = self._split(lo, hi, x)
            if split is None:
                continue
            j, v = split
            down_hi = hi.copy()
            down_hi[j] = v
            up_lo = lo.copy()
            up_lo[j] = v + 1
            self._evaluate(lo, down_hi, heap)
            self._evaluate(up_lo, hi, heap)
        return self.best_x, self.nodes


def _milp_block(c, A, b, ub):
    """Exact block optimum through the HiGHS mixed-integer solver."""
    res = milp(c.astype(np.float64), constraints=LinearConstraint(A.astype(np.float64), lb=b.astype(np.float64)),
               bounds=Bounds(np.zeros(len(ub)), ub.astype(np.float64)), integrality=np.ones(len(ub)),
               options={"mip_rel_gap": 0.0, "presolve": True})
    if res.status != 0 or res.x is None:
        raise InfeasibleProgramError(f"mixed-integer solver failed: {res.message}")
    x = np.clip(np.rint(res.x).astype(np.int64), 0, ub)
    if np.any(A @ x < b):
        raise AssertionError("mixed-integer solver returned an infeasible point")
    return x, int(getattr(res, "mip_node_count", 0) or 0) + 1


def _blocks(A: sp.csr_matrix):
    """Split a matrix into independent blocks (rows and columns linked by nonzeros).

    Yields ``(rows, cols, sub)`` per block with at least one row; ``sub`` is the
    block's CSR submatrix in local indices.
    """
    nr, nv = A.shape
    C = A.tocoo()
    adj = sp.coo_matrix((np.ones(C.nnz), (C.row, nr + C.col)), shape=(nr + nv, nr + nv)).tocsr()
    ncomp, labels = connected_components(adj, directed=False)
    row_lab, var_lab = labels[:nr], labels[nr:]
    row_order = np.argsort(row_lab, kind="stable")
    var_order = np.argsort(var_lab, kind="stable")
    rsplit = np.searchsorted(row_lab[row_order], np.arange(ncomp + 1))
    vsplit = np.searchsorted(var_lab[var_order], np.arange(ncomp + 1))
    loc_r = np.empty(nr, dtype=np.int64)
    loc_r[row_order] = np.arange(nr) - rsplit[row_lab[row_order]]
    loc_v = np.empty(nv, dtype=np.int64)
    loc_v[var_order] = np.arange(nv) - vsplit[var_lab[var_order]]
    nz_order = np.argsort(row_lab[C.row], kind="stable")
    nz_lab = row_lab[C.row][nz_order]
    nsplit = np.searchsorted(nz_lab, np.arange(ncomp + 1))
    nz_r, nz_c, nz_v = loc_r[C.row][nz_order], loc_v[C.col][nz_order], C.data[nz_order]
    for k in range(ncomp):
        rows = row_order[rsplit[k]:rsplit[k + 1]]
        if rows.size == 0:
            continue
        cols = var_order[vsplit[k]:vsplit[k + 1]]
        sl = slice(nsplit[k], nsplit[k + 1])
        sub = sp.csr_matrix((nz_v[sl], (nz_r[sl], nz_c[sl])), shape=(rows.size, cols.size))
        yield rows, cols, sub


def _search_space(ub, limit):
    space = 1
    for s in ub.tolist():
        space *= s + 1
        if space > limit:
            break
    return space


def _reduced(prog: IntegerProgram):
    """Residual demands, active rows and free columns after fixing trivial variables."""
    x = prog.lower.copy()
    c = prog.objective
    # variables outside every active row sit at their cheapest bound
    x[c < 0] = prog.upper[c < 0]
    resid = prog.rhs - prog.A @ prog.lower
    active = np.flatnonzero(resid > 0)
    free = np.flatnonzero(prog.upper > prog.lower)
    return x, resid[active], prog.A[active][:, free].tocsr(), free


def solve_ip(prog: IntegerProgram, block_enum_limit: int = _BLOCK_ENUM_LIMIT, exact: bool = True,
             exact_var_limit: int = _EXACT_VAR_LIMIT) -> IpSolution:
    """Optimal assignment for ``prog``, block by block.

    Blocks small enough to enumerate return their lexicographically smallest
    optimum. Larger blocks with at most ``exact_var_limit`` variables go
    through the branch and bound above; bigger ones through the HiGHS
    mixed-integer solver. Both return a deterministic optimum that need not be
    lexicographically smallest.

    With ``exact=False`` the linear relaxation of the whole program is solved
    once. If it is integral it is returned (and is optimal); otherwise the
    integral part is kept and the fractional remainder is solved exactly
    against the residual demands. ``proven`` tells the two cases apart.
    """
    n = prog.n_vars
    _check_box_feasible(prog)
    if n == 0:
        return IpSolution(prog.lower.copy(), 0 if prog.integral else 0.0, 0)
    if not exact:
        return _solve_relaxed(prog, block_enum_limit, exact_var_limit)
    x, b_all, A, cols = _reduced(prog)
    c = prog.objective
    nodes = 0
    if len(b_all):
        for rows, vars_k, sub in _blocks(A):
            gvars = cols[vars_k]
            b = b_all[rows]
            ub = (prog.upper[gvars] - prog.lower[gvars]).astype(np.int64)
            ck = c[gvars]
            if _search_space(ub, block_enum_limit) <= block_enum_limit:
                xs, cnt = _enumerate_block(ck, sub.toarray(), b, ub + 1)
            elif len(ub) <= exact_var_limit:
                xs, cnt = _BlockSearch(ck, sub, b, ub, prog.integral).run()
            else:
                xs, cnt = _milp_block(ck, sub, b, ub)
            nodes += cnt
            x[gvars] = prog.lower[gvars] + xs
    if not prog.is_feasible(x):
        raise AssertionError("solver produced an infeasible assignment")
    return IpSolution(x, prog.value(x), nodes)


def _solve_relaxed(prog: IntegerProgram, block_enum_limit: int, exact_var_limit: int) -> IpSolution:
    res = linprog(prog.objective.astype(np.float64), A_ub=-prog.A.astype(np.float64),
                  b_ub=-prog.rhs.astype(np.float64), bounds=np.stack([prog.lower, prog.upper], axis=1),
                  method="highs-ds")
    if res.status != 0:
        return solve_ip(prog, block_enum_limit, True, exact_var_limit)
    xf = np.clip(res.x, prog.lower, prog.upper)
    xr = np.rint(xf).astype(np.int64)
    frac = np.abs(xf - xr) > 1e-7
    if not frac.any() and prog.is_feasible(xr):
        return IpSolution(xr, prog.value(xr), 1, True)
    F = np.flatnonzero(frac)
    x = xr.copy()
    x[F] = prog.lower[F]
    resid = np.maximum(prog.rhs - prog.A @ x, 0)
    sub = IntegerProgram(prog.objective[F], prog.A.tocsc()[:, F].tocsr(), resid,
                         prog.lower[F], prog.upper[F])
    if np.all(sub.A @ sub.upper >= sub.rhs):
        part = solve_ip(sub, block_enum_limit, True, exact_var_limit)
        x[F] = part.values
        nodes = 1 + part.nodes
    else:
        x = np.clip(np.ceil(xf - 1e-9).astype(np.int64), prog.lower, prog.upper)
        nodes = 1
    if not prog.is_feasible(x):
        raise AssertionError("solver produced an infeasible assignment")
    return IpSolution(x, prog.value(x), nodes, False)
