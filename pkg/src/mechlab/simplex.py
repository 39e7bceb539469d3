"""Dense two-phase simplex with variable bounds and anti-cycling fallback.

Solves   max/min  c.x   s.t.  A x {<=,>=,=} b,   lower <= x <= upper.

Design constraints, in order:

1. Determinism.  Same inputs give bitwise-identical output on a machine:
   pricing is Dantzig's rule with first-index tie-breaking, degenerate
   stalls switch to Bland's smallest-index rule (which cannot cycle)
   until progress resumes, all floating-point reductions run in fixed
   order, and periodic refreshes happen on a fixed iteration schedule.
2. Honest certificates.  Every optimal solve reports row duals, reduced
   costs, a weak-duality gap, and the worst primal residual, so callers
   can assert optimality instead of trusting a status flag.
3. Termination over speed.  Finitely many bases, strictly fewer after
   every nondegenerate step, and Bland inside degenerate streaks give a
   finite bound.  The tableau is dense; problem sizes are expected to
   stay in the low thousands of rows.

Inequalities get slack columns; equality rows get a zero-fixed marker
column (the phase-1 artificial, frozen at 0 afterwards) so row duals can
be read off the objective row for every row, not just slack rows.

Variables must have at least one finite bound.  Free variables do not
occur in the intended formulations: payments are a priori bounded by
total surplus and everything else lives in a box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
DUAL_ZERO_TOL = 1e-11
FEAS_TOL = 1e-9
REFRESH_EVERY = 64
REFACTOR_EVERY = 512
BLAND_AFTER = 512
PRICE_WINDOW = 64
RATIO_SLACK = 1e-11
HEAL_ROUNDS = 8

_LO, _UP, _BASIC = 0, 1, 2

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


class SimplexError(RuntimeError):
    """Numerical failure or iteration-limit breach inside the solver."""


@dataclass
class SimplexResult:
    status: str
    x: np.ndarray | None
    objective: float | None
    y: np.ndarray | None
    reduced_costs: np.ndarray | None
    duality_gap: float | None
    max_infeasibility: float
    iterations: int


class _Tableau:
    """Mutable solver state; one instance per solve call.

    Internally always minimizes.  Column layout:
    structural | slacks (one per '<=') | markers (one per '=') | phase-1
    artificials for initially violated inequality rows.
    """

    def __init__(self, c_min, A, b, senses, lower, upper):
        c_min = np.asarray(c_min, dtype=float)
        lower = np.asarray(lower, dtype=float).copy()
        upper = np.asarray(upper, dtype=float).copy()
        n = c_min.shape[0]
        m = len(b)
        if np.any(lower > upper):
            raise ValueError("crossed variable bounds")
        if np.any(~np.isfinite(lower) & ~np.isfinite(upper)):
            raise ValueError("every variable needs at least one finite bound")

        A = np.array(A, dtype=float, copy=True).reshape(m, n)
        b = np.array(b, dtype=float, copy=True)
        senses = list(senses)
        for i, s in enumerate(senses):
            if s in (">=", ">"):
                A[i] *= -1.0
                b[i] *= -1.0
                senses[i] = "<="
            elif s in ("<=", "<"):
                senses[i] = "<="
            elif s in ("=", "=="):
                senses[i] = "="
            else:
                raise ValueError(f"unknown sense {s!r}")

        self.c_min = c_min
        self.n_struct = n
        self.m = m
        self.senses = senses
        self.b = b

        slack_of_row = {}
        marker_of_row = {}
        blocks = [A]
        lo_blocks = [lower]
        up_blocks = [upper]
        next_col = n

        ineq_rows = [i for i, s in enumerate(senses) if s == "<="]
        if ineq_rows:
            S = np.zeros((m, len(ineq_rows)))
            for k, i in enumerate(ineq_rows):
                S[i, k] = 1.0
                slack_of_row[i] = next_col + k
            blocks.append(S)
            lo_blocks.append(np.zeros(len(ineq_rows)))
            up_blocks.append(np.full(len(ineq_rows), np.inf))
            next_col += len(ineq_rows)

        eq_rows = [i for i, s in enumerate(senses) if s == "="]
        if eq_rows:
            # sign entries are filled in start_basis once residuals are known
            Mk = np.zeros((m, len(eq_rows)))
            for k, i in enumerate(eq_rows):
                marker_of_row[i] = next_col + k
            blocks.append(Mk)
            lo_blocks.append(np.zeros(len(eq_rows)))
            up_blocks.append(np.full(len(eq_rows), np.inf))
            next_col += len(eq_rows)

        self.Aext = np.concatenate(blocks, axis=1) if len(blocks) > 1 else A
        self.lower = np.concatenate(lo_blocks)
        self.upper = np.concatenate(up_blocks)
        self.slack_of_row = slack_of_row
        self.slack_cols = set(slack_of_row.values())
        self.marker_of_row = marker_of_row
        self.row_alive = np.ones(m, dtype=bool)
        self.iterations = 0

    # -- state helpers ----------------------------------------------------

    def nb_value(self, j):
        return self.lower[j] if self.status[j] == _LO else self.upper[j]

    def _nonbasic_values(self):
        vals = np.where(self.status == _UP, self.upper, self.lower)
        vals[self.status == _BASIC] = 0.0
        return vals

    def refresh(self, cost):
        """Recompute the objective row and basic values from scratch."""
        self.d = cost - cost[self.basis] @ self.T
        vals = self._nonbasic_values()
        nz = np.nonzero(vals)[0]
        self.xB = self.rb - (self.T[:, nz] @ vals[nz] if nz.size else 0.0)

    def refactor(self):
        """Rebuild the tableau exactly from the current basis.

        Rank-one pivot updates drift; solving against the basis matrix
        resets T = B^-1 Aext and rb = B^-1 b to working precision.  The
        dense solve is deterministic for fixed inputs."""
        B = self.Aext[:, self.basis]
        try:
            self.T = np.linalg.solve(B, self.Aext)
            self.rb = np.linalg.solve(B, self.b)
        except np.linalg.LinAlgError as exc:
            raise SimplexError("singular basis during refactorization") from exc

    # -- phase setup -------------------------------------------------------

    def start_basis(self):
        """Initial basis: slack where the start point already satisfies the
        row, a signed artificial elsewhere.  Equality rows reuse their
        marker column as the artificial."""
        m = self.m
        ncols = self.Aext.shape[1]
        self.status = np.full(ncols, _LO, dtype=np.int8)
        for j in range(ncols):
            if not np.isfinite(self.lower[j]):
                self.status[j] = _UP
        vals = self._nonbasic_values()
        nz = np.nonzero(vals)[0]
        r = self.b - (self.Aext[:, nz] @ vals[nz] if nz.size else np.zeros(m))

        self.basis = np.full(m, -1, dtype=int)
        art_cols = []
        scale = np.ones(m)
        extra_cols = []
        for i in range(m):
            j_s = self.slack_of_row.get(i)
            if j_s is not None and r[i] >= 0.0:
                self.basis[i] = j_s
                continue
            sign = 1.0 if r[i] >= 0.0 else -1.0
            j_m = self.marker_of_row.get(i)
            if j_m is not None:
                self.Aext[i, j_m] = sign
                col_idx = j_m
            else:
                col = np.zeros(m)
                col[i] = sign
                extra_cols.append(col)
                col_idx = ncols + len(extra_cols) - 1
            self.basis[i] = col_idx
            art_cols.append(col_idx)
            scale[i] = sign
        if extra_cols:
            self.Aext = np.concatenate([self.Aext, np.stack(extra_cols, axis=1)], axis=1)
            k = len(extra_cols)
            self.lower = np.concatenate([self.lower, np.zeros(k)])
            self.upper = np.concatenate([self.upper, np.full(k, np.inf)])
            self.status = np.concatenate([self.status, np.full(k, _LO, dtype=np.int8)])
        self.n_total = self.Aext.shape[1]
        for i in range(m):
            self.status[self.basis[i]] = _BASIC
        # B0 is diagonal +-1, so the initial tableau is a row rescale of Aext.
        self.T = self.Aext * scale[:, None]
        self.rb = self.b * scale
        self.xB = np.where(scale < 0, -r, r)
        self.art_cols = art_cols

    # -- core iteration ----------------------------------------------------

    def run(self, cost, enterable, max_iters):
        """Minimize cost over the current basis.

        Pricing scores a shortlist of the most attractive reduced costs
        by steepest-edge ratio (reduced cost squared over tableau column
        norm), first index on ties, while steps make progress; a streak
        of BLAND_AFTER degenerate pivots switches to Bland's
        smallest-index rule, which cannot cycle, until a positive step
        resets the streak.  Both rules are deterministic, so reruns stay
        bitwise identical."""
        self.refresh(cost)
        since_refresh = 0
        since_refactor = 0
        degen_streak = 0
        while True:
            if self.iterations >= max_iters:
                raise SimplexError(f"iteration limit {max_iters} reached")
            movable = (self.upper - self.lower) > 0.0
            elig = (
                enterable
                & movable
                & (self.status != _BASIC)
                & (
                    ((self.status == _LO) & (self.d < -PIVOT_TOL))
                    | ((self.status == _UP) & (self.d > PIVOT_TOL))
                )
            )
            if not elig.any():
                return OPTIMAL
            bland = degen_streak >= BLAND_AFTER
            if bland:
                j = int(np.argmax(elig))  # smallest eligible index
            else:
                gain = np.where(self.status == _UP, self.d, -self.d)
                gain = np.where(elig, gain, -np.inf)
                k = min(PRICE_WINDOW, int(elig.sum()))
                order = np.lexsort((np.arange(gain.shape[0]), -gain))
                cand = order[:k]
                cols = self.T[:, cand]
                norms = 1.0 + np.einsum("ij,ij->j", cols, cols)
                j = int(cand[int(np.argmax(gain[cand] ** 2 / norms))])
            delta = 1.0 if self.status[j] == _LO else -1.0
            w = self.T[:, j]
            coef = delta * w
            lim = np.full(self.m, np.inf)
            dec = coef > PIVOT_TOL
            inc = coef < -PIVOT_TOL
            lo_B = self.lower[self.basis]
            up_B = self.upper[self.basis]
            lim[dec] = (self.xB[dec] - lo_B[dec]) / coef[dec]
            with np.errstate(invalid="ignore"):
                up_gap = np.where(np.isfinite(up_B), up_B - self.xB, np.inf)
            lim[inc] = up_gap[inc] / (-coef[inc])
            lim[~self.row_alive] = np.inf
            np.maximum(lim, 0.0, out=lim)
            row_min = float(lim.min()) if self.m else np.inf
            own = self.upper[j] - self.lower[j]
            step = min(row_min, own)
            if not np.isfinite(step):
                return UNBOUNDED
            self.iterations += 1
            since_refresh += 1
            since_refactor += 1
            degen_streak = 0 if step > PIVOT_TOL else degen_streak + 1
            if bland:
                # Bland tie-break across blockers: smallest blocking-variable
                # index; the entering variable's own far bound counts as a
                # blocker indexed by the entering variable itself.
                best_var = j if own <= step else None
                best_row = -1
                for i in np.nonzero(lim <= step)[0]:
                    bi = int(self.basis[i])
                    if best_var is None or bi < best_var:
                        best_var, best_row = bi, int(i)
            elif own <= step:
                best_row = -1  # bound flip: exact arithmetic, no pivot
            else:
                # among (near-)tied blockers take the largest pivot
                # magnitude, then the smallest basis index
                best_row = -1
                best_key = None
                for i in np.nonzero(lim <= step + RATIO_SLACK)[0]:
                    key = (-abs(float(coef[i])), int(self.basis[i]))
                    if best_key is None or key < best_key:
                        best_key, best_row = key, int(i)
            if best_row == -1:
                self.status[j] = _UP if self.status[j] == _LO else _LO
                self.xB -= delta * step * w
            else:
                r = best_row
                enter_val = self.nb_value(j) + delta * step
                leave = int(self.basis[r])
                self.xB -= delta * step * w
                self.status[leave] = _LO if coef[r] > 0 else _UP
                if self.status[leave] == _LO and not np.isfinite(self.lower[leave]):
                    self.status[leave] = _UP
                piv = self.T[r, j]
                if abs(piv) <= PIVOT_TOL:
                    raise SimplexError("near-zero pivot")
                self.T[r, :] /= piv
                self.rb[r] /= piv
                colj = self.T[:, j].copy()
                colj[r] = 0.0
                self.T -= np.outer(colj, self.T[r, :])
                self.rb -= colj * self.rb[r]
                self.d = self.d - self.d[j] * self.T[r, :]
                self.basis[r] = j
                self.status[j] = _BASIC
                self.xB[r] = enter_val
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                self.refresh(cost)
                since_refactor = 0
                since_refresh = 0
            elif since_refresh >= REFRESH_EVERY:
                self.refresh(cost)
                since_refresh = 0

    def drive_out_artificials(self, enterable):
        """Pivot leftover basic artificials onto real columns; rows that
        admit no pivot are redundant and get retired."""
        art_set = set(self.art_cols)
        for i in range(self.m):
            if not self.row_alive[i]:
                continue
            bi = int(self.basis[i])
            if bi not in art_set:
                continue
            row = self.T[i, :]
            cand = np.nonzero(enterable & (np.abs(row) > PIVOT_TOL) & (self.status != _BASIC))[0]
            if cand.size == 0:
                self.row_alive[i] = False
                continue
            j = int(cand[0])
            piv = self.T[i, j]
            enter_val = self.nb_value(j)
            self.T[i, :] /= piv
            self.rb[i] /= piv
            colj = self.T[:, j].copy()
            colj[i] = 0.0
            self.T -= np.outer(colj, self.T[i, :])
            self.rb -= colj * self.rb[i]
            self.status[bi] = _LO
            self.basis[i] = j
            self.status[j] = _BASIC
            self.xB[i] = enter_val


def _solve_boxed(c, lower, upper, maximize):
    """Row-free LP: optimize each variable at a bound independently."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    want_up = (c > 0) if maximize else (c < 0)
    x = np.where(want_up, upper, lower)
    pushed_to_inf = ~np.isfinite(x) & (c != 0)
    if pushed_to_inf.any():
        return SimplexResult(UNBOUNDED, None, None, None, None, None, 0.0, 0)
    x = np.where(np.isfinite(x), x, np.where(np.isfinite(lower), lower, upper))
    obj = float(c @ x)
    return SimplexResult(OPTIMAL, x, obj, np.zeros(0), c.copy(), 0.0, 0.0, 0)


def solve_simplex(c, A, b, senses, lower, upper, maximize=True, max_iters=None) -> SimplexResult:
    """Solve the bounded LP; see module docstring for conventions.

    Returns duals `y` (one per input row, zero for retired redundant
    rows) and structural reduced costs, both in the caller's
    optimization sense.  duality_gap is |primal - weak-dual bound|
    recomputed from the returned certificate, not an internal solver
    quantity, so a small gap genuinely certifies optimality.
    """
    c = np.asarray(c, dtype=float)
    m = len(b)
    n = c.shape[0]
    if max_iters is None:
        max_iters = 200 * (m + n) + 20000

    if m == 0:
        return _solve_boxed(c, lower, upper, maximize)

    tab = _Tableau(-c if maximize else c, A, b, senses, lower, upper)
    tab.start_basis()

    enter_real = np.ones(tab.n_total, dtype=bool)
    for jc in tab.art_cols:
        enter_real[jc] = False

    if tab.art_cols:
        cost1 = np.zeros(tab.n_total)
        for jc in tab.art_cols:
            cost1[jc] = 1.0
        status = tab.run(cost1, np.ones(tab.n_total, dtype=bool), max_iters)
        if status != OPTIMAL:
            raise SimplexError("phase 1 cannot be unbounded")
        art_set = set(tab.art_cols)
        art_val = float(
            sum(tab.xB[i] for i in range(tab.m) if int(tab.basis[i]) in art_set)
        )
        if art_val > FEAS_TOL * max(1.0, float(np.max(np.abs(tab.b)))):
            return SimplexResult(
                INFEASIBLE, None, None, None, None, None, art_val, tab.iterations
            )
        tab.drive_out_artificials(enter_real)
        for jc in tab.art_cols:
            tab.lower[jc] = 0.0
            tab.upper[jc] = 0.0
            if tab.status[jc] == _UP:
                tab.status[jc] = _LO

    cost2 = np.zeros(tab.n_total)
    cost2[:n] = tab.c_min
    status = tab.run(cost2, enter_real, max_iters)
    if status == UNBOUNDED:
        return SimplexResult(UNBOUNDED, None, None, None, None, None, 0.0, tab.iterations)

    # Certify-or-heal: a rebuilt tableau can expose drift as new eligible
    # pivots; iterate until a freshly refactored basis is already optimal.
    for _ in range(HEAL_ROUNDS):
        before = tab.iterations
        tab.refactor()
        status = tab.run(cost2, enter_real, max_iters)
        if status == UNBOUNDED:
            return SimplexResult(
                UNBOUNDED, None, None, None, None, None, 0.0, tab.iterations
            )
        if tab.iterations == before:
            break
    else:
        raise SimplexError("tableau failed to stabilize under refactorization")

    tab.refresh(cost2)
    x_all = tab._nonbasic_values()
    for i in range(tab.m):
        x_all[int(tab.basis[i])] = tab.xB[i]
    x = x_all[:n]

    # row duals off the objective row at slack/marker columns
    y_int = np.zeros(m)
    for i in range(m):
        if not tab.row_alive[i]:
            continue
        if i in tab.slack_of_row:
            y_int[i] = -tab.d[tab.slack_of_row[i]]
        else:
            j_m = tab.marker_of_row[i]
            y_int[i] = -tab.d[j_m] * tab.Aext[i, j_m]

    # weak-duality bound, internal minimize convention:
    #   z_d = y.b + sum_j min over [lo_j, up_j] of d_j x_j
    # valid whenever y <= 0 on '<=' rows; clamp to enforce validity.
    y_cert = y_int.copy()
    for i in range(m):
        if tab.senses[i] == "<=" and y_cert[i] > 0.0:
            y_cert[i] = 0.0
    n_real = tab.n_struct + len(tab.slack_cols)
    d_cert = cost2[:n_real] - y_cert @ tab.Aext[:, :n_real]
    zd = float(y_cert @ tab.b)
    for j in range(n_real):
        dj = float(d_cert[j])
        if dj > DUAL_ZERO_TOL:
            zd += dj * tab.lower[j] if np.isfinite(tab.lower[j]) else -np.inf
        elif dj < -DUAL_ZERO_TOL:
            zd += dj * tab.upper[j] if np.isfinite(tab.upper[j]) else -np.inf
    z_int = float(tab.c_min @ x)
    gap = abs(z_int - zd) if np.isfinite(zd) else float("inf")

    # primal residual over original rows plus box breaches
    Astruct = tab.Aext[:, :n]
    res = Astruct @ x - tab.b
    max_infeas = 0.0
    for i in range(m):
        if not tab.row_alive[i]:
            continue
        if tab.senses[i] == "=":
            max_infeas = max(max_infeas, abs(float(res[i])))
        else:
            max_infeas = max(max_infeas, float(res[i]))
    lo_in = np.asarray(lower, dtype=float)
    up_in = np.asarray(upper, dtype=float)
    lo_breach = np.where(np.isfinite(lo_in), lo_in - x, -np.inf)
    up_breach = np.where(np.isfinite(up_in), x - up_in, -np.inf)
    max_infeas = max(max_infeas, float(np.max(lo_breach, initial=0.0)))
    max_infeas = max(max_infeas, float(np.max(up_breach, initial=0.0)))
    max_infeas = max(max_infeas, 0.0)

    sense_mult = -1.0 if maximize else 1.0
    obj_ext = sense_mult * z_int
    y_ext = sense_mult * y_int
    d_full = cost2[: tab.n_total] - y_int @ tab.Aext
    d_ext = sense_mult * d_full[:n]
    return SimplexResult(
        OPTIMAL, x, obj_ext, y_ext, d_ext, float(gap), float(max_infeas), tab.iterations
    )
