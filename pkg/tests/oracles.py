"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive (dict counting, explicit loops,
projection onto explicit equality systems) and shares no code with the
package paths it verifies.
"""

import itertools
import math

import numpy as np


# ---------------------------------------------------------------------------
# Entropy / mutual information by direct definition
# ---------------------------------------------------------------------------


def entropy_bits(p) -> float:
    total = 0.0
    for v in np.asarray(p, dtype=float).ravel():
        if v > 0:
            total -= v * math.log2(v)
    return total


def mutual_informations_direct(table: np.ndarray) -> dict:
    """The five quantities from sums over the raw joint (x1, x2, u)."""
    p = np.asarray(table, dtype=float)
    px1 = p.sum(axis=(1, 2))
    px2 = p.sum(axis=(0, 2))
    pu = p.sum(axis=(0, 1))

    def mi2(joint, pa, pb):
        total = 0.0
        for a in range(joint.shape[0]):
            for b in range(joint.shape[1]):
                if joint[a, b] > 0:
                    total += joint[a, b] * math.log2(joint[a, b] / (pa[a] * pb[b]))
        return total

    i_x1_u = mi2(p.sum(axis=1), px1, pu)
    i_x2_u = mi2(p.sum(axis=0), px2, pu)

    def cond_mi(first_axis):
        # I(X_first; U | X_other) = sum_z P(z) I(X; U | X_other = z)
        total = 0.0
        other_axis = 1 - first_axis
        p_other = px2 if first_axis == 0 else px1
        for z in range(p.shape[other_axis]):
            if p_other[z] <= 0:
                continue
            slice_ = np.take(p, z, axis=other_axis) / p_other[z]   # (x_first, u)
            total += p_other[z] * mi2(slice_, slice_.sum(axis=1), slice_.sum(axis=0))
        return total

    joint_12_u = p.reshape(-1, p.shape[2])
    i_x1x2_u = mi2(joint_12_u, joint_12_u.sum(axis=1), pu)
    return {
        "I(X1;U)": i_x1_u,
        "I(X2;U)": i_x2_u,
        "I(X1;U|X2)": cond_mi(0),
        "I(X2;U|X1)": cond_mi(1),
        "I(X1,X2;U)": i_x1x2_u,
    }


# ---------------------------------------------------------------------------
# Literal typicality decoder
# ---------------------------------------------------------------------------


def bf_typical(v, own, cand, ref, tol) -> bool:
    n = len(v)
    counts: dict = {}
    for i in range(n):
        key = (int(v[i]), int(own[i]), int(cand[i]))
        counts[key] = counts.get(key, 0) + 1
    worst = 0.0
    for u in range(ref.shape[0]):
        for a in range(ref.shape[1]):
            for b in range(ref.shape[2]):
                c = counts.get((u, a, b), 0)
                worst = max(worst, abs(c / n - ref[u, a, b]))
    return worst <= min(tol, 1.0) + 1e-9


def bf_decode(v, own, others, ref, two_mu, two_nu):
    """The decoder definition, quantifiers and all; returns index or None.

    Decoded(w) iff (v, own, others[w]) is typical at two_mu and no w' != w
    is typical at two_nu.  Candidate order cannot matter.
    """
    m = len(others)
    winners = []
    for w in range(m):
        if not bf_typical(v, own, others[w], ref, two_mu):
            continue
        blocked = any(
            w2 != w and bf_typical(v, own, others[w2], ref, two_nu) for w2 in range(m)
        )
        if not blocked:
            winners.append(w)
    assert len(winners) <= 1, "two winners would each block the other"
    return winners[0] + 1 if winners else None


# ---------------------------------------------------------------------------
# Sign-pattern grid search for manipulability witnesses
# ---------------------------------------------------------------------------


def bf_witness_search(p_obs, p_out=None, step: float = 0.25, tol: float = 1e-9):
    """Grid the sign orthant, project onto the equality set, check validity.

    Returns a valid witness matrix or None.  Candidates put diagonal entries
    in [0, 1] and off-diagonal entries in [-1, 0] on a `step` grid; each is
    projected onto {balance, null space, trace = 1} and accepted if the
    projection keeps the sign pattern and satisfies the equalities.
    """
    obs = np.atleast_2d(np.asarray(p_obs, dtype=float))
    u, nx = obs.shape
    out = np.eye(u) if p_out is None else np.atleast_2d(np.asarray(p_out, dtype=float))
    ny = out.shape[0]

    rows = []
    rhs = []
    for j in range(u):                                    # balance
        row = np.zeros((u, u))
        row[:, j] = 1.0
        rows.append(row.ravel())
        rhs.append(0.0)
    for y in range(ny):                                   # null space
        for x in range(nx):
            row = np.zeros((u, u))
            for j in range(u):
                for k in range(u):
                    row[j, k] = out[y, j] * obs[k, x]
            rows.append(row.ravel())
            rhs.append(0.0)
    trace = np.eye(u).ravel()                             # normalization
    rows.append(trace)
    rhs.append(1.0)
    a = np.array(rows)
    b = np.array(rhs)
    pinv = np.linalg.pinv(a)

    levels = np.arange(0.0, 1.0 + 1e-12, step)
    per_entry = [levels if i == j else -levels
                 for i in range(u) for j in range(u)]
    cands = np.array(list(itertools.product(*per_entry)))    # (N, u*u)
    proj = cands - (a @ cands.T - b[:, None]).T @ pinv.T
    residual = np.max(np.abs(a @ proj.T - b[:, None]), axis=0)
    mats = proj.reshape(-1, u, u)
    diag_ok = np.all(np.diagonal(mats, axis1=1, axis2=2) >= -tol, axis=1)
    off = mats.copy()
    idx = np.arange(u)
    off[:, idx, idx] = -1.0       # ignore diagonals in the off-sign check
    off_ok = np.all(off <= tol, axis=(1, 2))
    valid = (residual <= tol) & diag_ok & off_ok
    hits = np.flatnonzero(valid)
    return mats[hits[0]] if hits.size else None


# ---------------------------------------------------------------------------
# Typical-set enumeration (binary alphabets)
# ---------------------------------------------------------------------------


def binary_typical_count(p1: float, n: int, delta: float) -> int:
    """|T^n_delta| for a Bernoulli(p1) source, via the type-class identity."""
    total = 0
    for k in range(n + 1):
        if abs(k / n - p1) <= delta + 1e-12 and abs((n - k) / n - (1 - p1)) <= delta + 1e-12:
            total += math.comb(n, k)
    return total


def binary_typical_enumerate(p1: float, n: int, delta: float) -> list:
    """All member sequences, by exhaustive enumeration (n <= ~14)."""
    members = []
    for bits in itertools.product((0, 1), repeat=n):
        k = sum(bits)
        if abs(k / n - p1) <= delta + 1e-12 and abs((n - k) / n - (1 - p1)) <= delta + 1e-12:
            members.append(bits)
    return members
