"""Manipulability witnesses, invisible-attack construction, and the E1/E2
conditional mutual-information diagnostic.

An observation channel is a pair (P_obs, P_out): the law of what the relay
receives given one node's input, and the law of what that node sees of the
relay's output (identity in the simulated model).  The channel is
manipulable when a nonzero matrix Upsilon exists whose columns are balanced
(sum to zero) and polarized at their own index (diagonal entry nonnegative,
off-diagonal entries nonpositive) with P_out @ (Upsilon @ P_obs) = 0.  Those
column conditions are exactly what makes Upsilon = I - T for a substitution
kernel T, so a witness is the same thing as a nontrivial substitution the
node cannot see through its own observation statistics.

The balanced / polarized reading above is adopted from the matrix-algebraic
framing this check descends from; it is isolated here so a different reading
would touch only this module.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import ConditionalPmf, MacChannel, MemorylessSubstitution, observation_channel
from .errors import InputError
from .simplex import feasible_point, solve_lp
from .typicality import empirical_pmf

WITNESS_TOL = 1e-9


@dataclass(frozen=True)
class UpsilonWitness:
    """A manipulability certificate, normalized to unit trace."""

    matrix: np.ndarray
    trace_norm: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError("witness matrix must be square")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.trace_norm <= 0:
            raise InputError("witness trace must be positive")


def _obs_table(p_obs) -> np.ndarray:
    if isinstance(p_obs, ConditionalPmf):
        return np.asarray(p_obs.matrix, dtype=float)
    return np.atleast_2d(np.asarray(p_obs, dtype=float))


def verify_witness(matrix: np.ndarray, p_obs, p_out=None, tol: float = WITNESS_TOL) -> bool:
    """Independent re-check of every witness constraint."""
    m = np.asarray(matrix, dtype=float)
    u = m.shape[0]
    obs = _obs_table(p_obs)
    out = np.eye(u) if p_out is None else _obs_table(p_out)
    if np.max(np.abs(m.sum(axis=0))) > tol:
        return False
    for j in range(u):
        if m[j, j] < -tol:
            return False
        off = np.delete(m[:, j], j)
        if np.any(off > tol):
            return False
    if abs(np.trace(m) - 1.0) > 1e-6 or np.trace(m) <= 0:
        return False
    return bool(np.max(np.abs(out @ m @ obs)) <= tol)


def find_witness(p_obs, p_out=None) -> UpsilonWitness | None:
    """Search for a manipulability witness; None means non-manipulable.

    Feasibility LP: the diagonal entries a_j >= 0 and negated off-diagonal
    entries b_ij >= 0 are the variables; per-column balance and the null
    space condition are equalities, and trace(Upsilon) = 1 normalizes away
    the nonzero requirement (balance plus polarization force the trace of
    any nonzero candidate to be positive, so every witness scales to unit
    trace).  Solved by the package's own Bland-rule simplex, and any found
    witness is re-verified against all constraints before being returned.
    """
    obs = _obs_table(p_obs)
    u, nx = obs.shape
    out = np.eye(u) if p_out is None else _obs_table(p_out)
    if out.shape[1] != u:
        raise InputError(f"P_out input alphabet {out.shape[1]} != |U| = {u}")

    def var(i, j):
        return i * u + j

    nvar = u * u
    rows = []
    rhs = []
    for j in range(u):                          # balance per column
        row = np.zeros(nvar)
        row[var(j, j)] = 1.0
        for i in range(u):
            if i != j:
                row[var(i, j)] = -1.0
        rows.append(row)
        rhs.append(0.0)
    ny = out.shape[0]
    for y in range(ny):                         # null-space condition
        for x in range(nx):
            row = np.zeros(nvar)
            for j in range(u):
                for k in range(u):
                    sign = 1.0 if j == k else -1.0
                    row[var(j, k)] += sign * out[y, j] * obs[k, x]
            rows.append(row)
            rhs.append(0.0)
    trace_row = np.zeros(nvar)                  # normalization
    for j in range(u):
        trace_row[var(j, j)] = 1.0
    rows.append(trace_row)
    rhs.append(1.0)

    x = feasible_point(a_eq=np.array(rows), b_eq=np.array(rhs))
    if x is None:
        return None
    matrix = np.zeros((u, u))
    for i in range(u):
        for j in range(u):
            v = x[var(i, j)]
            matrix[i, j] = max(v, 0.0) if i == j else -max(v, 0.0)
    if not verify_witness(matrix, obs, None if p_out is None else out):
        raise RuntimeError("simplex returned a point violating witness constraints")
    return UpsilonWitness(matrix=matrix, trace_norm=float(np.trace(matrix)))


def theorem_condition_holds(channel: MacChannel, p_x1, p_x2) -> bool:
    """Both observation channels non-manipulable against the identity output."""
    side1 = observation_channel(channel, p_x2, side=1)
    side2 = observation_channel(channel, p_x1, side=2)
    return find_witness(side1) is None and find_witness(side2) is None


def witness_to_attack(witness: UpsilonWitness, p_obs) -> MemorylessSubstitution:
    """Turn a witness into a substitution kernel invisible through p_obs.

    T = I - c * Upsilon with c = 1 / max_j Upsilon_jj; the witness column
    structure makes T column-stochastic automatically, and the null-space
    property gives T @ P_obs = P_obs, i.e. the per-input output statistics
    are untouched by the attack.
    """
    obs = _obs_table(p_obs)
    m = witness.matrix
    c = 1.0 / float(np.max(np.diag(m)))
    t = np.eye(m.shape[0]) - c * m
    t = np.clip(t, 0.0, 1.0)
    t = t / t.sum(axis=0, keepdims=True)
    if np.max(np.abs(t @ obs - obs)) > WITNESS_TOL:
        raise RuntimeError("constructed attack is not invisible through the observation channel")
    if np.max(np.abs(t - np.eye(m.shape[0]))) <= WITNESS_TOL:
        raise RuntimeError("constructed attack degenerated to the identity")
    if isinstance(p_obs, ConditionalPmf):
        u_alpha = p_obs.output_alphabet
    else:
        from .channel import Alphabet
        u_alpha = Alphabet.of_size(m.shape[0])
    return MemorylessSubstitution(ConditionalPmf(u_alpha, (u_alpha,), t))


# ---------------------------------------------------------------------------
# E1 / E2 diagnostic: constrained minimum of I(X~; V~ | U~)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinMiDiagnostic:
    """Result of the constrained mutual-information minimization, in bits.

    `value` is +inf when the constraint set is empty (vacuous minimum), in
    which case `argmin_joint` is None and the window classifies as E1.
    `start_values` records the objective at each descent start, so the
    descent property value <= min(start_values) can be asserted per run.
    """

    value: float
    argmin_joint: np.ndarray | None
    mu_tilde: float
    feasible: bool
    start_values: tuple = ()

    def classify(self, lambda_n: float) -> str:
        return "E2" if self.value <= lambda_n + 1e-12 else "E1"


class _MinMiProblem:
    """Constraint polytope and objective for one (u^n, v^n) pair."""

    def __init__(self, u_seq, v_seq, p_x1_given_u, mu_tilde: float):
        cond = _obs_table(p_x1_given_u)          # (|X1|, |U|)
        self.nx, self.nu = cond.shape
        self.cond = cond
        self.mu_tilde = min(mu_tilde, 1.0)
        u_arr = np.asarray(u_seq, dtype=np.int64)
        v_arr = np.asarray(v_seq, dtype=np.int64)
        if u_arr.max() >= self.nu or v_arr.max() >= self.nu:
            raise InputError("sequence symbol outside the model alphabet")
        joint = empirical_pmf((u_arr, v_arr), (self.nu, self.nu)).freqs
        self.joint_uv = joint
        cells = np.argwhere(joint > 0)
        self.cells = [tuple(c) for c in cells]
        self.ncell = len(self.cells)
        self.w = np.array([joint[c] for c in self.cells])
        self.pu = joint.sum(axis=1)
        self.pv = joint.sum(axis=0)
        self.nvar = self.nx * self.ncell

    def qvar(self, x, c):
        return x * self.ncell + c

    def constraints(self):
        """(A_eq, b_eq, A_ub, b_ub) over the flattened conditional Q."""
        a_eq = np.zeros((self.ncell, self.nvar))
        for c in range(self.ncell):
            for x in range(self.nx):
                a_eq[c, self.qvar(x, c)] = 1.0
        b_eq = np.ones(self.ncell)

        rows_ub = []
        rhs_ub = []

        def add_box(weights_per_cell, target):
            for x in range(self.nx):
                row = np.zeros(self.nvar)
                for c, wgt in weights_per_cell:
                    row[self.qvar(x, c)] = wgt
                rows_ub.append(row.copy())
                rhs_ub.append(target[x] + self.mu_tilde)
                rows_ub.append(-row)
                rhs_ub.append(self.mu_tilde - target[x])

        for u in range(self.nu):
            if self.pu[u] <= 0:
                continue
            weights = [(c, self.w[c] / self.pu[u])
                       for c, (cu, _) in enumerate(self.cells) if cu == u]
            add_box(weights, self.cond[:, u])
        for v in range(self.nu):
            if self.pv[v] <= 0:
                continue
            weights = [(c, self.w[c] / self.pv[v])
                       for c, (_, cv) in enumerate(self.cells) if cv == v]
            add_box(weights, self.cond[:, v])
        return a_eq, b_eq, np.array(rows_ub), np.array(rhs_ub)

    def qbar(self, q: np.ndarray) -> np.ndarray:
        """P(x|u) induced by the candidate conditional, per u with mass."""
        out = np.zeros((self.nx, self.nu))
        for c, (u, _) in enumerate(self.cells):
            out[:, u] += self.w[c] * q[:, c]
        nz = self.pu > 0
        out[:, nz] /= self.pu[nz]
        return out

    def objective(self, qflat: np.ndarray) -> float:
        q = qflat.reshape(self.nx, self.ncell)
        bar = self.qbar(q)
        total = 0.0
        for c, (u, _) in enumerate(self.cells):
            qc = q[:, c]
            nz = qc > 0
            total += self.w[c] * float(
                np.sum(qc[nz] * (np.log2(qc[nz]) - np.log2(np.maximum(bar[nz, u], 1e-300))))
            )
        return max(total, 0.0)

    def gradient(self, qflat: np.ndarray) -> np.ndarray:
        q = qflat.reshape(self.nx, self.ncell)
        bar = self.qbar(q)
        eps = 1e-12
        grad = np.zeros_like(q)
        for c, (u, _) in enumerate(self.cells):
            grad[:, c] = self.w[c] * (
                np.log2(np.maximum(q[:, c], eps)) - np.log2(np.maximum(bar[:, u], eps))
            )
        return grad.reshape(-1)


def min_conditional_mi(u_seq, v_seq, p_x1_given_u, mu_tilde: float,
                       n_starts: int = 20, max_iter: int = 300,
                       gap_tol: float = 1e-8, seed: int = 7,
                       cross_check: bool = False) -> MinMiDiagnostic:
    """Minimize I(X~; V~ | U~) over conditionals pinned to the empirical
    (u^n, v^n) joint and box-constrained to the model P(X1|U).

    The joint of (U~, V~) is fixed to the empirical type of the sequence
    pair; the free variable is the conditional P(X~1 | U~, V~), over which
    the objective is convex, so conditional-gradient descent with an LP
    linear-minimization step converges to the constrained minimum.  Multiple
    random vertex starts guard against slow boundary progress.  An empty
    constraint set is reported as an infeasible diagnostic with value +inf.
    """
    prob = _MinMiProblem(u_seq, v_seq, p_x1_given_u, mu_tilde)
    a_eq, b_eq, a_ub, b_ub = prob.constraints()

    start = feasible_point(a_eq, b_eq, a_ub, b_ub)
    if start is None:
        return MinMiDiagnostic(value=math.inf, argmin_joint=None,
                               mu_tilde=prob.mu_tilde, feasible=False)

    rng = np.random.default_rng(seed)
    starts = [start]
    for _ in range(max(0, n_starts - 1)):
        c = rng.normal(size=prob.nvar)
        res = solve_lp(c, a_eq, b_eq, a_ub, b_ub)
        if res.status == "optimal":
            starts.append(res.x)

    best_val = math.inf
    best_q = None
    start_vals = []
    for q0 in starts:
        q = np.clip(q0, 0.0, 1.0)
        start_vals.append(prob.objective(q))
        val, q = _frank_wolfe(prob, q, a_eq, b_eq, a_ub, b_ub, max_iter, gap_tol)
        if val < best_val:
            best_val, best_q = val, q

    qmat = best_q.reshape(prob.nx, prob.ncell)
    argmin = np.zeros((prob.nx, prob.nu, prob.nu))
    for c, (u, v) in enumerate(prob.cells):
        argmin[:, u, v] = prob.w[c] * qmat[:, c]
    diag = MinMiDiagnostic(value=best_val, argmin_joint=argmin,
                           mu_tilde=prob.mu_tilde, feasible=True,
                           start_values=tuple(start_vals))
    if cross_check and prob.nx <= 2 and prob.ncell <= 4:
        ref = min_conditional_mi_grid(u_seq, v_seq, p_x1_given_u, mu_tilde)
        if not math.isclose(ref, best_val, abs_tol=5e-3):
            raise RuntimeError(f"descent value {best_val:.6f} disagrees with grid {ref:.6f}")
    return diag


def _frank_wolfe(prob, q0, a_eq, b_eq, a_ub, b_ub, max_iter, gap_tol):
    q = q0.copy()
    val = prob.objective(q)
    for k in range(max_iter):
        g = prob.gradient(q)
        res = solve_lp(g, a_eq, b_eq, a_ub, b_ub)
        if res.status != "optimal":
            break
        s = res.x
        gap = float(g @ (q - s))
        if gap <= gap_tol:
            break
        # Exact-ish line search on the segment keeps progress monotone.
        gamma = 2.0 / (k + 2.0)
        candidate = q + gamma * (s - q)
        cval = prob.objective(candidate)
        for _ in range(30):
            if cval <= val:
                break
            gamma *= 0.5
            candidate = q + gamma * (s - q)
            cval = prob.objective(candidate)
        if cval > val - 1e-15 and gap <= 1e-6:
            break
        q, val = candidate, cval
    return val, q


def _grid_feasible_mask(prob: "_MinMiProblem", q1: np.ndarray) -> np.ndarray:
    tol = prob.mu_tilde + 1e-12
    feasible = np.ones(len(q1), dtype=bool)
    for group_axis, masses in ((0, prob.pu), (1, prob.pv)):
        for sym in range(prob.nu):
            if masses[sym] <= 0:
                continue
            w = np.array([prob.w[c] / masses[sym]
                          if prob.cells[c][group_axis] == sym else 0.0
                          for c in range(prob.ncell)])
            mix = q1 @ w
            feasible &= np.abs(mix - prob.cond[1, sym]) <= tol
            feasible &= np.abs((w.sum() - mix) - prob.cond[0, sym]) <= tol
    return feasible


def _grid_objective(prob: "_MinMiProblem", q1: np.ndarray) -> np.ndarray:
    """Vectorized I(X~; V~ | U~) for many binary conditionals at once."""
    tiny = 1e-300
    group = np.zeros((prob.nu, prob.ncell))
    for c, (u, _) in enumerate(prob.cells):
        if prob.pu[u] > 0:
            group[u, c] = prob.w[c] / prob.pu[u]
    qbar1 = q1 @ group.T                                   # (N, nu)
    qbar0 = (1.0 - q1) @ group.T
    total = np.zeros(len(q1))
    for c, (u, _) in enumerate(prob.cells):
        for q, qbar in ((q1[:, c], qbar1[:, u]), (1.0 - q1[:, c], qbar0[:, u])):
            term = np.where(q > 0, q * (np.log2(np.maximum(q, tiny))
                                        - np.log2(np.maximum(qbar, tiny))), 0.0)
            total += prob.w[c] * term
    return np.maximum(total, 0.0)


def min_conditional_mi_grid(u_seq, v_seq, p_x1_given_u, mu_tilde: float,
                            grid: int = 41, refine: bool = True) -> float:
    """Dense grid-search reference for binary X1 and few support cells.

    Enumerates Q(x=1 | u, v) on a uniform grid per support cell, filters by
    the box constraints, evaluates the objective exactly, and once refines
    the grid locally around the coarse minimizer.  Returns +inf when no grid
    point is feasible (the constraint set is empty or thinner than the
    grid).  Deliberately independent of the descent path.
    """
    prob = _MinMiProblem(u_seq, v_seq, p_x1_given_u, mu_tilde)
    if prob.nx != 2:
        raise InputError("grid oracle supports binary X1 only")
    if prob.ncell > 5:
        raise InputError("grid oracle limited to at most 5 support cells")

    def evaluate(axes):
        mesh = np.meshgrid(*axes, indexing="ij")
        q1 = np.stack([m.ravel() for m in mesh], axis=1)
        mask = _grid_feasible_mask(prob, q1)
        if not mask.any():
            return math.inf, None
        vals = _grid_objective(prob, q1[mask])
        k = int(np.argmin(vals))
        return float(vals[k]), q1[mask][k]

    axes = [np.linspace(0.0, 1.0, grid)] * prob.ncell
    best, argbest = evaluate(axes)
    if argbest is None:
        return math.inf
    if refine:
        step = 1.0 / (grid - 1)
        local = [np.linspace(max(0.0, v - step), min(1.0, v + step), grid)
                 for v in argbest]
        refined, arg2 = evaluate(local)
        if arg2 is not None:
            best = min(best, refined)
    return best


def classify_window(u_seq, v_seq, p_x1_given_u, schedule, mu_tilde: float | None = None,
                    **kwargs) -> tuple[str, MinMiDiagnostic]:
    """E1 when the constrained minimum exceeds lambda_n, E2 otherwise.

    The boundary value min I = lambda_n classifies as E2 (closed
    inequality).  `mu_tilde` defaults to the schedule's mu_tilde(n).
    """
    n = np.asarray(u_seq).size
    mt = schedule.mu_tilde(n) if mu_tilde is None else mu_tilde
    diag = min_conditional_mi(u_seq, v_seq, p_x1_given_u, mt, **kwargs)
    return diag.classify(schedule.lam(n)), diag
