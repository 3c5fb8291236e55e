"""Shannon quantities and the guaranteed-integrity inner-bound rate region.

All entropies and mutual informations are in bits (log base 2) with the
convention 0 * log 0 = 0.  Rates are bits per MAC use; the half-duplex
factor 0.5 for counting the broadcast phase is left to the caller.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channel import Alphabet, MacChannel, observation_channel, validate_pmf
from .errors import InputError
from .manipulability import find_witness

SUM_ATOL = 1e-12


def _entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float).ravel()
    nz = p > 0
    return float(-(p[nz] * np.log2(p[nz])).sum())


@dataclass(frozen=True)
class JointPmf:
    """Product-form joint P(x1, x2, u) = law(u|x1,x2) P_X1(x1) P_X2(x2)."""

    x1: Alphabet
    x2: Alphabet
    u: Alphabet
    table: np.ndarray   # axes (x1, x2, u)

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        expected = (self.x1.size, self.x2.size, self.u.size)
        if table.shape != expected:
            raise InputError(f"joint table shape {table.shape} != {expected}")
        if np.any(table < -SUM_ATOL):
            raise InputError("joint pmf has negative entries")
        if abs(table.sum() - 1.0) > SUM_ATOL:
            raise InputError("joint pmf must sum to 1 within 1e-12")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def marginal(self, axes) -> np.ndarray:
        keep = (axes,) if isinstance(axes, int) else tuple(axes)
        drop = tuple(i for i in range(3) if i not in keep)
        return self.table.sum(axis=drop)


def joint_from(channel: MacChannel, p_x1, p_x2) -> JointPmf:
    """Build the product-form joint and verify it reconstructs its factors."""
    p1 = validate_pmf(p_x1, channel.x1.size, "p_x1")
    p2 = validate_pmf(p_x2, channel.x2.size, "p_x2")
    table = np.einsum("uab,a,b->abu", channel.law.table, p1, p2)
    joint = JointPmf(channel.x1, channel.x2, channel.u, table)
    if (np.max(np.abs(joint.marginal(0) - p1)) > 1e-12
            or np.max(np.abs(joint.marginal(1) - p2)) > 1e-12):
        raise InputError("joint does not reproduce its input marginals")
    return joint


def input_posterior(joint: JointPmf, side: int = 1) -> np.ndarray:
    """P(x_side | u) as a (|X|, |U|) matrix; uniform on zero-mass u columns."""
    axis = 0 if side == 1 else 1
    pxu = joint.marginal((axis, 2))       # (|X|, |U|)
    pu = pxu.sum(axis=0)
    out = np.full_like(pxu, 1.0 / pxu.shape[0])
    nz = pu > 0
    out[:, nz] = pxu[:, nz] / pu[nz]
    return out


@dataclass(frozen=True)
class MutualInformations:
    """The five Shannon quantities governing the rate window, in bits."""

    i_x1_u: float
    i_x2_u: float
    i_x1_u_given_x2: float
    i_x2_u_given_x1: float
    i_x1x2_u: float

    def as_dict(self) -> dict:
        return {
            "I(X1;U)": self.i_x1_u,
            "I(X2;U)": self.i_x2_u,
            "I(X1;U|X2)": self.i_x1_u_given_x2,
            "I(X2;U|X1)": self.i_x2_u_given_x1,
            "I(X1,X2;U)": self.i_x1x2_u,
        }


def mutual_informations(joint: JointPmf) -> MutualInformations:
    h1 = _entropy(joint.marginal(0))
    h2 = _entropy(joint.marginal(1))
    hu = _entropy(joint.marginal(2))
    h12 = _entropy(joint.marginal((0, 1)))
    h1u = _entropy(joint.marginal((0, 2)))
    h2u = _entropy(joint.marginal((1, 2)))
    h12u = _entropy(joint.table)
    mi = MutualInformations(
        i_x1_u=max(0.0, h1 + hu - h1u),
        i_x2_u=max(0.0, h2 + hu - h2u),
        i_x1_u_given_x2=max(0.0, h12 + h2u - h12u - h2),
        i_x2_u_given_x1=max(0.0, h12 + h1u - h12u - h1),
        i_x1x2_u=max(0.0, h12 + hu - h12u),
    )
    return mi


# ---------------------------------------------------------------------------
# Inner-bound region
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateRegion:
    """Convex polygon of rate pairs, as hull vertices in CCW order."""

    vertices: np.ndarray          # (k, 2)
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def is_degenerate(self) -> bool:
        return len(self.vertices) < 3

    def contains(self, other: "RateRegion", atol: float = 1e-9) -> bool:
        """True when every vertex of `other` lies inside this polygon."""
        return all(_point_in_hull(p, self.vertices, atol) for p in other.vertices)


def _convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull, CCW from the lexicographically smallest vertex."""
    pts = np.unique(np.round(np.asarray(points, dtype=float), 12), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-15:
            lower.pop()
        lower.append(p)
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-15:
            upper.pop()
        upper.append(p)
    hull = np.array(lower[:-1] + upper[:-1])
    return hull


def _point_in_hull(p, hull: np.ndarray, atol: float) -> bool:
    if len(hull) == 0:
        return False
    if len(hull) == 1:
        return bool(np.max(np.abs(hull[0] - p)) <= atol)
    if len(hull) == 2:
        d = hull[1] - hull[0]
        t = np.dot(p - hull[0], d) / max(np.dot(d, d), 1e-30)
        proj = hull[0] + np.clip(t, 0, 1) * d
        return bool(np.max(np.abs(proj - p)) <= atol)
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if cross < -atol:
            return False
    return True


def _simplex_lattice(size: int, steps: int):
    """All pmfs on `size` symbols with entries i / (steps - 1)."""
    if steps < 2:
        raise InputError("grid_steps must be at least 2")
    denom = steps - 1
    for comp in itertools.combinations_with_replacement(range(size), denom):
        counts = np.bincount(comp, minlength=size)
        yield counts / denom


def sweep_grid(channel: MacChannel, grid_steps: int):
    """Per grid point diagnostics for the product input-distribution sweep.

    Yields dicts with the two input pmfs, the five mutual informations, the
    two per-side non-manipulability verdicts, and the rectangle corner.
    """
    for p1 in _simplex_lattice(channel.x1.size, grid_steps):
        for p2 in _simplex_lattice(channel.x2.size, grid_steps):
            joint = joint_from(channel, p1, p2)
            mi = mutual_informations(joint)
            ok1 = find_witness(observation_channel(channel, p2, side=1)) is None
            ok2 = find_witness(observation_channel(channel, p1, side=2)) is None
            yield {
                "p_x1": p1,
                "p_x2": p2,
                "mi": mi,
                "non_manipulable_1": ok1,
                "non_manipulable_2": ok2,
                "passing": ok1 and ok2,
            }


def inner_bound_region(channel: MacChannel, grid_steps: int = 33,
                       constrained: bool = True) -> RateRegion:
    """Hull of the rate rectangles certified by the non-manipulability filter.

    Sweeps product input distributions over a uniform simplex lattice, keeps
    the grid points whose observation channels both pass the witness test
    (unless `constrained` is False), and returns the closed convex hull of
    the rectangles [0, I(X1;U|X2)] x [0, I(X2;U|X1)] plus the origin.
    """
    points = [(0.0, 0.0)]
    total = 0
    passing = 0
    for rec in sweep_grid(channel, grid_steps):
        total += 1
        if constrained and not rec["passing"]:
            continue
        passing += 1
        c1 = rec["mi"].i_x1_u_given_x2
        c2 = rec["mi"].i_x2_u_given_x1
        points.extend([(c1, 0.0), (0.0, c2), (c1, c2)])
    hull = _convex_hull(np.array(points))
    meta = {
        "grid_steps": grid_steps,
        "grid_points": total,
        "points_passing": passing,
        "constrained": constrained,
        "empty": passing == 0,
    }
    return RateRegion(hull, meta)
