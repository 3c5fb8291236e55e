"""Empirical types, typical-set membership and sampling, tolerance schedules.

Typicality is the per-entry (L-infinity) kind: a tuple of aligned sequences
is delta-typical for a reference pmf P when every cell of the joint empirical
pmf deviates from P by at most delta.  Tolerances larger than 1 are clamped
to 1 at the point of use, since no deviation can exceed 1.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, SamplingError

_ATOL = 1e-9


def _as_seq_tuple(seqs) -> tuple[np.ndarray, ...]:
    # A bare list of symbols is one sequence; a list of sequences is a tuple.
    if isinstance(seqs, (tuple, list)) and len(seqs) and not np.isscalar(seqs[0]):
        arrs = tuple(np.asarray(s, dtype=np.int64) for s in seqs)
    else:
        arrs = (np.asarray(seqs, dtype=np.int64),)
    if any(a.ndim != 1 for a in arrs):
        raise InputError("sequences must be 1-D arrays of symbol indices")
    n = arrs[0].size
    if n < 1:
        raise InputError("sequences must be non-empty")
    if any(a.size != n for a in arrs):
        raise InputError(f"sequence length mismatch: {[a.size for a in arrs]}")
    return arrs


@dataclass(frozen=True)
class EmpiricalPmf:
    """Joint symbol-tuple counts of one or more aligned sequences."""

    counts: np.ndarray   # integer counts, one axis per sequence
    n: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.sum() != self.n:
            raise InputError("counts must sum to the sequence length")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def freqs(self) -> np.ndarray:
        return self.counts / self.n

    def marginal(self, axes) -> "EmpiricalPmf":
        """Marginal over the given (kept) axes."""
        keep = (axes,) if isinstance(axes, int) else tuple(axes)
        drop = tuple(i for i in range(self.counts.ndim) if i not in keep)
        counts = self.counts.sum(axis=drop) if drop else self.counts
        counts = np.moveaxis(counts, range(len(keep)), np.argsort(np.argsort(keep)))
        return EmpiricalPmf(counts, self.n)

    def conditional(self, target_axis: int, given_axis: int) -> np.ndarray:
        """Matrix Pt(target | given); columns with zero marginal are zeroed."""
        joint = self.marginal((target_axis, given_axis)).counts.astype(float)
        col = joint.sum(axis=0)
        out = np.zeros_like(joint)
        nz = col > 0
        out[:, nz] = joint[:, nz] / col[nz]
        return out


def empirical_pmf(seqs, alphabet_sizes) -> EmpiricalPmf:
    """Tally joint symbol tuples of one or more aligned sequences."""
    arrs = _as_seq_tuple(seqs)
    sizes = (alphabet_sizes,) if isinstance(alphabet_sizes, int) else tuple(alphabet_sizes)
    if len(sizes) != len(arrs):
        raise InputError("one alphabet size per sequence required")
    for a, k in zip(arrs, sizes):
        if a.min() < 0 or a.max() >= k:
            raise InputError(f"symbol out of range for alphabet of size {k}")
    flat = np.zeros(arrs[0].size, dtype=np.int64)
    for a, k in zip(arrs, sizes):
        flat = flat * k + a
    counts = np.bincount(flat, minlength=int(np.prod(sizes))).reshape(sizes)
    return EmpiricalPmf(counts, arrs[0].size)


def max_deviation(seqs, ref) -> float:
    """Largest per-cell gap between the joint empirical pmf and `ref`."""
    ref = np.asarray(ref, dtype=float)
    emp = empirical_pmf(seqs, ref.shape)
    return float(np.max(np.abs(emp.counts - emp.n * ref))) / emp.n


def is_typical(seqs, ref, delta: float) -> bool:
    """Per-entry typicality check: every cell within `delta` of `ref`.

    The inequality is closed, and joint typicality of pairs/triples is the
    same check applied to the joint empirical pmf.
    """
    ref = np.asarray(ref, dtype=float)
    emp = empirical_pmf(seqs, ref.shape)
    bound = emp.n * min(delta, 1.0) + _ATOL * emp.n
    return bool(np.max(np.abs(emp.counts - emp.n * ref)) <= bound)


def sample_typical(p, n: int, delta: float, rng: np.random.Generator,
                   max_attempts: int = 10_000) -> np.ndarray:
    """Draw a sequence uniformly from the delta-typical set of `p`.

    Uses i.i.d. rejection sampling (uniform over the typical set when it
    accepts) capped at `max_attempts` draws, then falls back to quantizing
    n*p to an integer composition and permuting it uniformly, which is
    approximately uniform over the set and always terminates when the
    quantized type fits within delta.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
        raise InputError("p must be a 1-D probability vector")
    if n < 1:
        raise InputError("n must be positive")
    k = p.size
    dclamp = min(delta, 1.0)
    bound = n * dclamp + _ATOL * n
    target = n * p

    attempts = 0
    while attempts < max_attempts:
        batch = min(256, max_attempts - attempts)
        draws = rng.choice(k, size=(batch, n), p=p)
        counts = np.stack([(draws == s).sum(axis=1) for s in range(k)], axis=1)
        ok = np.flatnonzero(np.max(np.abs(counts - target[None, :]), axis=1) <= bound)
        if ok.size:
            return draws[ok[0]].astype(np.int64)
        attempts += batch

    comp = _quantized_composition(p, n)
    if np.max(np.abs(comp - target)) > bound:
        raise SamplingError(
            f"typical set empty at n={n}, delta={delta}: nearest type deviates by "
            f"{np.max(np.abs(comp - target)) / n:.4g}"
        )
    seq = np.repeat(np.arange(k, dtype=np.int64), comp)
    return rng.permutation(seq)


def _quantized_composition(p: np.ndarray, n: int) -> np.ndarray:
    """Largest-remainder rounding of n*p to a composition of n."""
    raw = n * p
    base = np.floor(raw).astype(np.int64)
    short = n - base.sum()
    order = np.argsort(-(raw - base))
    base[order[:short]] += 1
    return base


def block_max_deviations(prefix_cls: np.ndarray, cand_block: np.ndarray, cand_size: int,
                         ref_flat: np.ndarray, n: int) -> np.ndarray:
    """Max joint-type deviation for many candidate sequences at once.

    `prefix_cls` encodes the fixed sequences position-wise as a single class
    index; each candidate row extends the class by its own symbol, so the
    joint cell of position i for candidate row b is
    prefix_cls[i] * cand_size + cand_block[b, i].  Returns, per candidate,
    max_cell |count/n - ref_flat|.
    """
    block = np.atleast_2d(np.asarray(cand_block, dtype=np.int64))
    b, n_pos = block.shape
    if n_pos != n or prefix_cls.size != n:
        raise InputError("candidate block length mismatch")
    n_cells = ref_flat.size
    cells = prefix_cls[None, :] * cand_size + block
    cells += (np.arange(b, dtype=np.int64) * n_cells)[:, None]
    counts = np.bincount(cells.ravel(), minlength=b * n_cells).reshape(b, n_cells)
    return np.max(np.abs(counts / n - ref_flat[None, :]), axis=1)


# ---------------------------------------------------------------------------
# Tolerance schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToleranceSchedule:
    """Block-length dependent tolerances used by the encoder and decoder.

    delta(n) = n**(-delta_exponent) drives everything else:
    mu = mu_multiplier * delta, lambda = n**(-lambda_exponent),
    nu = max(mu, ktilde * sqrt(lambda)), and the auxiliary tolerances are
    fixed multiples of mu.  The defaults satisfy the delta convention
    (delta -> 0 while sqrt(n) * delta -> infinity); values above 1 are
    clamped to 1 where they are applied.
    """

    mu_multiplier: float
    delta_exponent: float = 1.0 / 3.0
    lambda_exponent: float = 1.0 / 4.0
    ktilde: float = 1.0
    mu_prime_mult: float = 2.0
    mu_double_prime_mult: float = 3.0
    mu_tilde_mult: float = 2.0
    mu_hat_mult: float = 2.0

    def __post_init__(self):
        if self.mu_multiplier <= 0 or self.delta_exponent <= 0 or self.lambda_exponent <= 0:
            raise InputError("schedule parameters must be positive")
        if not 0 < self.delta_exponent < 0.5:
            raise InputError("delta exponent must lie in (0, 1/2) for the delta convention")
        if self.ktilde < 0:
            raise InputError("ktilde must be nonnegative")

    def delta(self, n: int) -> float:
        return float(n) ** (-self.delta_exponent)

    def mu(self, n: int) -> float:
        return self.mu_multiplier * self.delta(n)

    def lam(self, n: int) -> float:
        return float(n) ** (-self.lambda_exponent)

    def nu(self, n: int) -> float:
        return max(self.mu(n), self.ktilde * math.sqrt(self.lam(n)))

    def mu_prime(self, n: int) -> float:
        return self.mu_prime_mult * self.mu(n)

    def mu_double_prime(self, n: int) -> float:
        return self.mu_double_prime_mult * self.mu(n)

    def mu_tilde(self, n: int) -> float:
        return self.mu_tilde_mult * self.mu(n)

    def mu_hat(self, n: int) -> float:
        return self.mu_hat_mult * self.mu(n)

    def describe(self) -> dict:
        """Echo of the schedule parameters for result metadata."""
        return {
            "mu_multiplier": self.mu_multiplier,
            "delta_exponent": self.delta_exponent,
            "lambda_exponent": self.lambda_exponent,
            "ktilde": self.ktilde,
            "mu_prime_mult": self.mu_prime_mult,
            "mu_double_prime_mult": self.mu_double_prime_mult,
            "mu_tilde_mult": self.mu_tilde_mult,
            "mu_hat_mult": self.mu_hat_mult,
        }


def default_schedule(u_size: int, x1_size: int, x2_size: int, **overrides) -> ToleranceSchedule:
    """The schedule with mu_multiplier = |U| * |X1| * |X2| unless overridden."""
    params = {"mu_multiplier": float(u_size * x1_size * x2_size)}
    params.update(overrides)
    return ToleranceSchedule(**params)


def clamp_tolerance(t: float) -> float:
    return min(t, 1.0)
