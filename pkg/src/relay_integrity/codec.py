"""Codebook generation, rate planning, the rate-splitting encoder, and the
integrity-aware typicality decoder.

Message sets are integer-sized: a rate R at block length n yields
ceil(n * R) message bits, and rates are reported back as bits / n.  Message
and codeword indices are 1-based at the public API, matching the index
arithmetic of the encoding map w -> (w - 1) * 2^s + w'.
"""

import math
from dataclasses import dataclass

import numpy as np

from .channel import MacChannel
from .errors import InputError, RateError, InfeasibleError, ResourceError
from .manipulability import theorem_condition_holds
from .region import MutualInformations, joint_from, mutual_informations
from .typicality import ToleranceSchedule, block_max_deviations, clamp_tolerance

DEFAULT_MAX_CODEWORDS = 2**20
_ATOL = 1e-9


def rate_bits(n: int, rate: float) -> int:
    """ceil(n * rate) with guard against float fuzz just above an integer."""
    if rate < 0:
        raise InputError("rates must be nonnegative")
    return max(0, math.ceil(n * rate - 1e-9))


@dataclass(frozen=True)
class Verdict:
    """Decoder output: a decoded index or the untrusted mark."""

    index: int | None

    @staticmethod
    def decoded(index: int) -> "Verdict":
        if index < 1:
            raise InputError("decoded indices are 1-based")
        return Verdict(index)

    @staticmethod
    def untrusted() -> "Verdict":
        return Verdict(None)

    @property
    def is_untrusted(self) -> bool:
        return self.index is None

    def __str__(self):
        return "!" if self.index is None else f"Decoded({self.index})"


@dataclass(frozen=True)
class Codebook:
    """2^bits codewords of length n drawn from the delta-typical set of `source`."""

    n: int
    bits: int
    codewords: np.ndarray     # (2^bits, n) int64
    source: np.ndarray        # generating pmf
    delta: float
    seed: int | None = None

    def __post_init__(self):
        cw = np.asarray(self.codewords, dtype=np.int64)
        if cw.shape != (2**self.bits, self.n):
            raise InputError(f"codebook shape {cw.shape} != {(2**self.bits, self.n)}")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)
        src = np.asarray(self.source, dtype=float)
        src.setflags(write=False)
        object.__setattr__(self, "source", src)

    @property
    def rate(self) -> float:
        return self.bits / self.n

    def __len__(self):
        return len(self.codewords)


def build_codebook(p, n: int, rate: float, delta: float, rng: np.random.Generator,
                   max_codewords: int = DEFAULT_MAX_CODEWORDS, seed: int | None = None,
                   bits: int | None = None) -> Codebook:
    """Draw 2^ceil(n*rate) codewords independently from the typical set.

    Duplicates are permitted (random coding).  `bits` overrides the rate
    rounding when the caller already works in whole message bits.
    """
    p = np.asarray(p, dtype=float)
    b = rate_bits(n, rate) if bits is None else int(bits)
    m = 2**b
    if m > max_codewords:
        raise ResourceError(f"codebook of 2^{b} codewords exceeds cap {max_codewords}")
    k = p.size
    dclamp = min(delta, 1.0)
    bound = n * dclamp + 1e-9 * n
    target = n * p

    rows = np.empty((m, n), dtype=np.int64)
    filled = 0
    attempts = 0
    # Batched rejection; falls back to quantized types only if acceptance is
    # pathologically rare for the requested delta.
    while filled < m and attempts < 200:
        want = m - filled
        batch = min(max(4 * want, 1024), 1 << 22)
        draws = rng.choice(k, size=(batch, n), p=p)
        counts = np.stack([(draws == s).sum(axis=1) for s in range(k)], axis=1)
        ok = np.flatnonzero(np.max(np.abs(counts - target[None, :]), axis=1) <= bound)
        take = min(want, ok.size)
        if take:
            rows[filled:filled + take] = draws[ok[:take]]
            filled += take
        attempts += 1
    if filled < m:
        from .typicality import sample_typical
        for i in range(filled, m):
            rows[i] = sample_typical(p, n, delta, rng)
    return Codebook(n=n, bits=b, codewords=rows, source=p, delta=delta, seed=seed)


# ---------------------------------------------------------------------------
# Rate planning
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatePlan:
    """Target rates, operating rates, and the governing mutual informations.

    Operating rates must sit strictly inside the randomization window
    I(X;U) < R' < I(X;U|other) with R1' + R2' > I(X1,X2;U); the window is
    what denies the relay a unique decoding while keeping the nodes able to
    decode each other.
    """

    r1: float
    r2: float
    r1_op: float
    r2_op: float
    mi: MutualInformations

    def __post_init__(self):
        mi = self.mi
        checks = [
            (self.r1_op > mi.i_x1_u + 1e-12, "R1' must exceed I(X1;U)"),
            (self.r1_op < mi.i_x1_u_given_x2 - 1e-12, "R1' must stay below I(X1;U|X2)"),
            (self.r2_op > mi.i_x2_u + 1e-12, "R2' must exceed I(X2;U)"),
            (self.r2_op < mi.i_x2_u_given_x1 - 1e-12, "R2' must stay below I(X2;U|X1)"),
            (self.r1_op + self.r2_op > mi.i_x1x2_u + 1e-12, "R1'+R2' must exceed I(X1,X2;U)"),
            (self.r1_op >= self.r1 - 1e-12, "R1' must not undercut R1"),
            (self.r2_op >= self.r2 - 1e-12, "R2' must not undercut R2"),
        ]
        for ok, msg in checks:
            if not ok:
                raise RateError(msg)

    def target(self, side: int) -> float:
        return self.r1 if side == 1 else self.r2

    def operating(self, side: int) -> float:
        return self.r1_op if side == 1 else self.r2_op


def message_bits(plan: RatePlan, n: int, side: int) -> int:
    return rate_bits(n, plan.target(side))


def split_bits(plan: RatePlan, n: int, side: int) -> int:
    return rate_bits(n, plan.operating(side) - plan.target(side))


def plan_rates(channel: MacChannel, p_x1, p_x2, targets: tuple[float, float]) -> RatePlan:
    """Choose operating rates inside the randomization window.

    Targets already inside the window are kept; otherwise each operating
    rate starts at max(target, window midpoint) and, when the sum constraint
    is not strictly met, both are pushed up by the remaining deficit plus
    20% of the leftover headroom, which keeps them strictly interior.
    """
    r1, r2 = targets
    if r1 < 0 or r2 < 0:
        raise RateError("target rates must be nonnegative")
    joint = joint_from(channel, p_x1, p_x2)
    mi = mutual_informations(joint)
    if not theorem_condition_holds(channel, p_x1, p_x2):
        raise InfeasibleError(
            "input distributions give a manipulable observation channel; "
            "the integrity guarantee does not apply"
        )
    if r1 >= mi.i_x1_u_given_x2 - 1e-12:
        raise RateError(f"R1 = {r1} reaches I(X1;U|X2) = {mi.i_x1_u_given_x2:.6f}")
    if r2 >= mi.i_x2_u_given_x1 - 1e-12:
        raise RateError(f"R2 = {r2} reaches I(X2;U|X1) = {mi.i_x2_u_given_x1:.6f}")

    in_window = (r1 > mi.i_x1_u and r2 > mi.i_x2_u and r1 + r2 > mi.i_x1x2_u)
    if in_window:
        return RatePlan(r1, r2, r1, r2, mi)

    lo = (mi.i_x1_u, mi.i_x2_u)
    hi = (mi.i_x1_u_given_x2, mi.i_x2_u_given_x1)
    if lo[0] >= hi[0] - 1e-12 or lo[1] >= hi[1] - 1e-12:
        raise InfeasibleError("empty randomization window")
    base = [max(r1, (lo[0] + hi[0]) / 2.0), max(r2, (lo[1] + hi[1]) / 2.0)]
    # The two window midpoints sum to exactly I(X1,X2;U) by the chain rule,
    # so the sum constraint always needs a strict push when both targets sat
    # below their midpoints.
    deficit = max(0.0, mi.i_x1x2_u - (base[0] + base[1]))
    if base[0] + base[1] <= mi.i_x1x2_u + 1e-9:
        for i in range(2):
            head = hi[i] - base[i] - deficit / 2.0
            if head <= 0:
                raise InfeasibleError("sum constraint cannot be met inside the window")
            base[i] += deficit / 2.0 + 0.2 * head
    return RatePlan(r1, r2, base[0], base[1], mi)


# ---------------------------------------------------------------------------
# Encoding / decoding
# ---------------------------------------------------------------------------


def encode_split(codebook: Codebook, msg_bits: int, spl_bits: int, w: int,
                 rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Map message w to codeword index (w-1)*2^s + w' with w' uniform."""
    if msg_bits + spl_bits != codebook.bits:
        raise InputError(
            f"message+split bits {msg_bits}+{spl_bits} != codebook bits {codebook.bits}")
    if not 1 <= w <= 2**msg_bits:
        raise InputError(f"message {w} outside 1..{2**msg_bits}")
    w_prime = int(rng.integers(1, 2**spl_bits + 1))
    index = (w - 1) * 2**spl_bits + w_prime
    return codebook.codewords[index - 1], w_prime


def encode(codebook: Codebook, plan: RatePlan, w: int, rng: np.random.Generator,
           side: int = 1) -> tuple[np.ndarray, int]:
    """Rate-splitting randomized encoder for one side of the plan."""
    m = message_bits(plan, codebook.n, side)
    s = split_bits(plan, codebook.n, side)
    return encode_split(codebook, m, s, w, rng)


def recover_from_split(index: int, spl_bits: int) -> int:
    """Invert the split map: w = ceil(index / 2^s)."""
    if index < 1:
        raise InputError("indices are 1-based")
    return (index + 2**spl_bits - 1) // 2**spl_bits


def recover_message(index: int, plan: RatePlan, n: int, side: int = 1) -> int:
    if not 1 <= index <= 2**(message_bits(plan, n, side) + split_bits(plan, n, side)):
        raise InputError(f"index {index} outside the codebook")
    return recover_from_split(index, split_bits(plan, n, side))


def encoder_index(w: int, w_prime: int, spl_bits: int) -> int:
    """The codeword index selected by (w, w')."""
    return (w - 1) * 2**spl_bits + w_prime


def decode(v_seq, own_index: int, own_codebook: Codebook, other_codebook: Codebook,
           channel: MacChannel, schedule: ToleranceSchedule, own_side: int = 1,
           max_candidate_evals: int | None = None) -> Verdict:
    """Typicality decoder with the untrusted fallback.

    Returns Decoded(w_hat) iff (v, own codeword, other codeword w_hat) is
    jointly typical at tolerance 2*mu_n and no other candidate is jointly
    typical at the looser 2*nu_n; otherwise Untrusted.  Acceptance and
    uniqueness deliberately use different tolerances: the looser screen is
    what protects integrity under attack.  Candidates are scanned in blocks
    with an early stop once two screen hits exist, which cannot change the
    verdict because the screen quantifies over all candidates.
    """
    v = np.asarray(v_seq, dtype=np.int64)
    n = v.size
    if n != own_codebook.n or n != other_codebook.n:
        raise InputError("sequence/codebook length mismatch")
    if not 1 <= own_index <= len(own_codebook):
        raise InputError(f"own index {own_index} outside the codebook")
    if max_candidate_evals is not None and len(other_codebook) > max_candidate_evals:
        raise ResourceError(
            f"decoder scan of {len(other_codebook)} candidates exceeds cap {max_candidate_evals}")

    own = own_codebook.codewords[own_index - 1]
    if own_side == 1:
        law = channel.law.table                                   # (U, X1, X2)
        k_own, k_other = channel.x1.size, channel.x2.size
        joint = law * own_codebook.source[None, :, None] * other_codebook.source[None, None, :]
    elif own_side == 2:
        law = np.swapaxes(channel.law.table, 1, 2)                # (U, X2, X1)
        k_own, k_other = channel.x2.size, channel.x1.size
        joint = law * own_codebook.source[None, :, None] * other_codebook.source[None, None, :]
    else:
        raise InputError("own_side must be 1 or 2")
    if v.max() >= channel.u.size:
        raise InputError("broadcast symbol outside the MAC output alphabet")

    two_mu = clamp_tolerance(2.0 * schedule.mu(n))
    two_nu = clamp_tolerance(2.0 * schedule.nu(n))
    cls = v * k_own + own
    ref_flat = joint.reshape(-1)

    m = len(other_codebook)
    block = min(8192, m)
    hit_index = -1
    hit_dev = np.inf
    hits = 0
    for start in range(0, m, block):
        cand = other_codebook.codewords[start:start + block]
        dev = block_max_deviations(cls, cand, k_other, ref_flat, n)
        for off in np.flatnonzero(dev <= two_nu + _ATOL):
            hits += 1
            if hits >= 2:
                return Verdict.untrusted()
            hit_index = start + int(off)
            hit_dev = float(dev[off])
    if hits == 1 and hit_dev <= two_mu + _ATOL:
        return Verdict.decoded(hit_index + 1)
    return Verdict.untrusted()


# ---------------------------------------------------------------------------
# Codebook export format (one codeword per line, versioned header)
# ---------------------------------------------------------------------------

_EXPORT_MAGIC = "# relay-integrity codebook v1"


def export_codebook(codebook: Codebook, alphabet_size: int) -> str:
    seed = "none" if codebook.seed is None else str(codebook.seed)
    lines = [
        _EXPORT_MAGIC,
        f"n={codebook.n} bits={codebook.bits} alphabet={alphabet_size} seed={seed} "
        f"delta={codebook.delta!r}",
        "source " + " ".join(format(v, ".17g") for v in codebook.source),
    ]
    for row in codebook.codewords:
        lines.append(" ".join(str(int(s)) for s in row))
    return "\n".join(lines) + "\n"


def load_codebook(text: str) -> Codebook:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _EXPORT_MAGIC:
        raise InputError("not a relay-integrity codebook file (bad magic line)")
    fields = dict(part.split("=", 1) for part in lines[1].split())
    n = int(fields["n"])
    bits = int(fields["bits"])
    k = int(fields["alphabet"])
    seed = None if fields["seed"] == "none" else int(fields["seed"])
    delta = float(fields["delta"])
    if not lines[2].startswith("source "):
        raise InputError("missing source pmf line")
    source = np.array([float(v) for v in lines[2].split()[1:]])
    rows = []
    for lineno, ln in enumerate(lines[3:], start=4):
        row = np.array([int(v) for v in ln.split()], dtype=np.int64)
        if row.size != n:
            raise InputError(f"line {lineno}: codeword length {row.size} != n = {n}")
        if row.min() < 0 or row.max() >= k:
            raise InputError(f"line {lineno}: symbol outside alphabet of size {k}")
        rows.append(row)
    if len(rows) != 2**bits:
        raise InputError(f"expected {2**bits} codewords, found {len(rows)}")
    return Codebook(n=n, bits=bits, codewords=np.stack(rows), source=source,
                    delta=delta, seed=seed)
