"""Discrete memoryless MAC, perfect broadcast, and relay forwarding behaviors.

Conventions used throughout the package:

* Symbols are small integer indices; alphabet labels exist only at the I/O
  boundary (channel spec files, CSV reports).
* A conditional pmf is stored as an ndarray whose axis 0 indexes the output
  symbol and whose remaining axes index the input symbols, so every column
  (a fixed input tuple) sums to 1.  This matches the usual matrix view of
  P_{U|X} with rows = outputs, columns = inputs.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, ResourceError
from .typicality import ToleranceSchedule, block_max_deviations

STOCHASTIC_ATOL = 1e-12
SPEC_FILE_ATOL = 1e-9


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def validate_pmf(p, size: int, name: str = "pmf") -> np.ndarray:
    """Check that `p` is a probability vector of the given length."""
    arr = np.asarray(p, dtype=float)
    if arr.shape != (size,):
        raise InputError(f"{name}: expected {size} entries, got shape {arr.shape}")
    if np.any(arr < -STOCHASTIC_ATOL):
        raise InputError(f"{name}: negative entries")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise InputError(f"{name}: entries sum to {arr.sum():.12g}, not 1")
    return np.clip(arr, 0.0, None)


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite symbol set; symbols are referred to by index."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if len(self.labels) < 1:
            raise InputError("alphabet needs at least one symbol")
        if len(set(self.labels)) != len(self.labels):
            raise InputError(f"alphabet labels not distinct: {self.labels}")

    @property
    def size(self) -> int:
        return len(self.labels)

    @staticmethod
    def of_size(size: int, prefix: str = "") -> "Alphabet":
        return Alphabet(tuple(f"{prefix}{i}" for i in range(size)))


@dataclass(frozen=True)
class ConditionalPmf:
    """Probability table p(output | inputs), axis 0 = output symbol."""

    output_alphabet: Alphabet
    input_alphabets: tuple[Alphabet, ...]
    table: np.ndarray

    def __post_init__(self):
        expected = (self.output_alphabet.size,) + tuple(a.size for a in self.input_alphabets)
        table = np.asarray(self.table, dtype=float)
        if table.shape != expected:
            raise InputError(f"conditional pmf table shape {table.shape} != {expected}")
        if np.any(table < -STOCHASTIC_ATOL):
            raise InputError("conditional pmf has negative entries")
        sums = table.sum(axis=0)
        if np.max(np.abs(sums - 1.0)) > STOCHASTIC_ATOL:
            raise InputError("conditional pmf columns must sum to 1 within 1e-12")
        object.__setattr__(self, "table", _frozen_array(table))

    @property
    def matrix(self) -> np.ndarray:
        """The table as a 2-D (output x flattened-input) matrix."""
        return self.table.reshape(self.output_alphabet.size, -1)


@dataclass(frozen=True)
class MacChannel:
    """Memoryless multiple-access channel p(u | x1, x2)."""

    x1: Alphabet
    x2: Alphabet
    u: Alphabet
    law: ConditionalPmf

    def __post_init__(self):
        if self.law.output_alphabet != self.u or self.law.input_alphabets != (self.x1, self.x2):
            raise InputError("channel law alphabets do not match the channel")

    @property
    def deterministic(self) -> bool:
        return bool(np.all((self.law.table == 0.0) | (self.law.table == 1.0)))


def binary_erasure_mac() -> MacChannel:
    """The additive binary MAC U = X1 + X2 over {0,1,2}."""
    x = Alphabet(("0", "1"))
    u = Alphabet(("0", "1", "2"))
    table = np.zeros((3, 2, 2))
    for a in range(2):
        for b in range(2):
            table[a + b, a, b] = 1.0
    law = ConditionalPmf(u, (x, x), table)
    return MacChannel(x, x, u, law)


def uniform_noise_mac(u_size: int = 2, x_size: int = 2) -> MacChannel:
    """A MAC whose output is uniform and independent of both inputs."""
    x = Alphabet.of_size(x_size)
    u = Alphabet.of_size(u_size)
    table = np.full((u_size, x_size, x_size), 1.0 / u_size)
    return MacChannel(x, x, u, ConditionalPmf(u, (x, x), table))


# ---------------------------------------------------------------------------
# Relay behaviors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Honest:
    """Identity forwarding: v^n = u^n."""


@dataclass(frozen=True)
class DeterministicMap:
    """Per-symbol substitution v_i = mapping[u_i]."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if m.ndim != 1 or np.any(m < 0):
            raise InputError("mapping must be a 1-D array of symbol indices")
        object.__setattr__(self, "mapping", _frozen_array(m, dtype=np.int64))


@dataclass(frozen=True)
class MemorylessSubstitution:
    """Per-symbol random substitution through a kernel T(v|u)."""

    kernel: ConditionalPmf

    def __post_init__(self):
        if len(self.kernel.input_alphabets) != 1:
            raise InputError("substitution kernel must condition on a single symbol")
        if self.kernel.output_alphabet.size != self.kernel.input_alphabets[0].size:
            raise InputError("substitution kernel must map U to U")


@dataclass(frozen=True)
class PartialBlockSubstitution:
    """Applies `inner` to the first ceil(fraction * n) positions only."""

    fraction: float
    inner: "RelayBehavior"

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise InputError("fraction must be in [0, 1]")


@dataclass(frozen=True)
class DecodeAndReforge:
    """Relay that decodes both messages and re-forges the block if it can.

    The relay runs the nodes' joint-typicality search over codeword pairs
    against u^n.  If exactly one pair is typical within its evaluation
    budget, it re-synthesizes v^n by passing the codewords indexed by
    (w1_hat + shift[0], w2_hat + shift[1]) (mod codebook sizes) through a
    fresh simulated MAC; otherwise it forwards honestly.  The shift default
    keeps node 1's codeword so the forged block stays consistent with what
    node 1 already knows, which is what makes the forgery stick.
    """

    channel: MacChannel
    schedule: ToleranceSchedule
    shift: tuple[int, int] = (0, 1)
    pair_budget: int = 2**24


RelayBehavior = Honest | DeterministicMap | MemorylessSubstitution | PartialBlockSubstitution | DecodeAndReforge


def is_honest(behavior: RelayBehavior) -> bool:
    return isinstance(behavior, Honest)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def _check_sequence(seq, alphabet: Alphabet, name: str) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.int64)
    if arr.ndim != 1 or arr.size < 1:
        raise InputError(f"{name}: expected a non-empty 1-D symbol sequence")
    if arr.min() < 0 or arr.max() >= alphabet.size:
        raise InputError(f"{name}: symbol out of alphabet of size {alphabet.size}")
    return arr


def transmit_mac(channel: MacChannel, x1_seq, x2_seq, rng: np.random.Generator) -> np.ndarray:
    """Sample u^n i.i.d. per position from law(. | x1_i, x2_i)."""
    x1 = _check_sequence(x1_seq, channel.x1, "x1_seq")
    x2 = _check_sequence(x2_seq, channel.x2, "x2_seq")
    if x1.size != x2.size:
        raise InputError(f"input length mismatch: {x1.size} vs {x2.size}")
    cols = channel.law.table[:, x1, x2]          # (|U|, n)
    cdf = np.cumsum(cols, axis=0)
    r = rng.random(x1.size)
    # r == 0 would select zero-probability cells below; nudge into (0, 1).
    r[r == 0.0] = 0.5
    return (cdf < r[None, :]).sum(axis=0).astype(np.int64)


def _substitute_memoryless(kernel: ConditionalPmf, u: np.ndarray, rng) -> np.ndarray:
    cols = kernel.table[:, u]
    cdf = np.cumsum(cols, axis=0)
    r = rng.random(u.size)
    r[r == 0.0] = 0.5
    return (cdf < r[None, :]).sum(axis=0).astype(np.int64)


def relay_forward(behavior: RelayBehavior, u_seq, codebooks, rng: np.random.Generator) -> np.ndarray:
    """Produce the broadcast sequence v^n from the relay's observation u^n.

    `codebooks` is the (node-1, node-2) codebook pair the relay is assumed
    to know; only DecodeAndReforge uses it.  The output depends on nothing
    but (u^n, codebooks, rng), per the relay Markov restriction.
    """
    u = np.asarray(u_seq, dtype=np.int64)
    if isinstance(behavior, Honest):
        return u.copy()
    if isinstance(behavior, DeterministicMap):
        if behavior.mapping.size <= u.max():
            raise InputError("mapping smaller than observed alphabet")
        return behavior.mapping[u]
    if isinstance(behavior, MemorylessSubstitution):
        return _substitute_memoryless(behavior.kernel, u, rng)
    if isinstance(behavior, PartialBlockSubstitution):
        k = int(np.ceil(behavior.fraction * u.size))
        v = u.copy()
        if k > 0:
            v[:k] = relay_forward(behavior.inner, u[:k], codebooks, rng)
        return v
    if isinstance(behavior, DecodeAndReforge):
        return forward_with_action(behavior, u, codebooks, rng)[0]
    raise InputError(f"unknown relay behavior {behavior!r}")


def forward_with_action(behavior: RelayBehavior, u_seq, codebooks, rng) -> tuple[np.ndarray, str]:
    """Like relay_forward, but also report what the relay did.

    Actions: 'forwarded' for every behavior other than DecodeAndReforge;
    for DecodeAndReforge one of 'reforged', 'honest_undecodable' (no typical
    pair), 'honest_ambiguous' (more than one), 'honest_budget' (pair space
    exceeds the evaluation budget, so the relay does not even try).
    """
    if not isinstance(behavior, DecodeAndReforge):
        return relay_forward(behavior, u_seq, codebooks, rng), "forwarded"
    u = np.asarray(u_seq, dtype=np.int64)
    cb1, cb2 = codebooks
    n = u.size
    ch = behavior.channel
    tol = min(2.0 * behavior.schedule.mu(n), 1.0)
    joint = ch.law.table * cb1.source[None, :, None] * cb2.source[None, None, :]

    m1, m2 = len(cb1.codewords), len(cb2.codewords)
    if m1 * m2 > behavior.pair_budget:
        return u.copy(), "honest_budget"
    pair, multiple = _typical_pair_search(u, cb1.codewords, cb2.codewords, joint, tol,
                                          ch.x1.size, ch.x2.size)
    if pair is None:
        return u.copy(), "honest_ambiguous" if multiple else "honest_undecodable"
    w1 = (pair[0] + behavior.shift[0]) % m1
    w2 = (pair[1] + behavior.shift[1]) % m2
    return transmit_mac(ch, cb1.codewords[w1], cb2.codewords[w2], rng), "reforged"


def _typical_pair_search(u, cw1, cw2, joint, tol, k1, k2):
    """Find codeword pairs jointly typical with u; stop at the second hit.

    Returns (pair_or_None, saw_multiple).  Candidate w1 values are pruned by
    the marginal bound first: a typical triple forces the (u, x1) pair type
    within |X2| * tol of its marginal, so pruning at that radius cannot drop
    a true hit.
    """
    n = u.size
    pair_ref = joint.sum(axis=2).reshape(-1)
    dev1 = block_max_deviations(u, np.asarray(cw1), k1, pair_ref, n)
    survivors = np.flatnonzero(dev1 <= k2 * tol + 1e-12)
    found = None
    joint_flat = joint.reshape(-1)
    for w1 in survivors:
        cls = u * k1 + cw1[w1]
        dev = block_max_deviations(cls, np.asarray(cw2), k2, joint_flat, n)
        hits = np.flatnonzero(dev <= tol + 1e-12)
        for w2 in hits:
            if found is not None:
                return None, True
            found = (int(w1), int(w2))
    return found, False


def observation_channel(channel: MacChannel, other_input_dist, side: int = 1) -> ConditionalPmf:
    """Marginalize the MAC law against the other node's input distribution.

    For side=1 this is P(u|x1) = sum_x2 law(u|x1,x2) q(x2); side=2 swaps roles.
    """
    if side not in (1, 2):
        raise InputError("side must be 1 or 2")
    if side == 1:
        q = validate_pmf(other_input_dist, channel.x2.size, "other_input_dist")
        table = np.einsum("uab,b->ua", channel.law.table, q)
        return ConditionalPmf(channel.u, (channel.x1,), table)
    q = validate_pmf(other_input_dist, channel.x1.size, "other_input_dist")
    table = np.einsum("uab,a->ub", channel.law.table, q)
    return ConditionalPmf(channel.u, (channel.x2,), table)


# ---------------------------------------------------------------------------
# Channel spec files
# ---------------------------------------------------------------------------
#
# Line-oriented text format ('#' starts a comment):
#
#   alphabet x1 <label> <label> ...
#   alphabet x2 <label> ...
#   alphabet u  <label> ...
#   law <p> <p> ...          one line per (x1, x2) pair, x1-major order,
#                            |U| probabilities per line
#
# Rows whose probabilities do not sum to 1 within 1e-9 are rejected with the
# offending line number.


def parse_channel_spec(text: str, source: str = "<string>") -> MacChannel:
    alphabets: dict[str, Alphabet] = {}
    law_rows: list[tuple[int, list[float]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "alphabet":
            if len(parts) < 3 or parts[1] not in ("x1", "x2", "u"):
                raise InputError(f"{source}:{lineno}: expected 'alphabet x1|x2|u <labels...>'")
            if parts[1] in alphabets:
                raise InputError(f"{source}:{lineno}: duplicate alphabet '{parts[1]}'")
            alphabets[parts[1]] = Alphabet(tuple(parts[2:]))
        elif parts[0] == "law":
            try:
                row = [float(v) for v in parts[1:]]
            except ValueError as exc:
                raise InputError(f"{source}:{lineno}: non-numeric probability: {exc}") from None
            law_rows.append((lineno, row))
        else:
            raise InputError(f"{source}:{lineno}: unknown directive '{parts[0]}'")

    for name in ("x1", "x2", "u"):
        if name not in alphabets:
            raise InputError(f"{source}: missing 'alphabet {name}' line")
    x1, x2, u = alphabets["x1"], alphabets["x2"], alphabets["u"]
    if len(law_rows) != x1.size * x2.size:
        raise InputError(
            f"{source}: expected {x1.size * x2.size} law rows (x1-major), got {len(law_rows)}"
        )
    table = np.zeros((u.size, x1.size, x2.size))
    for k, (lineno, row) in enumerate(law_rows):
        if len(row) != u.size:
            raise InputError(f"{source}:{lineno}: law row needs {u.size} entries, got {len(row)}")
        if any(v < 0 or v > 1 for v in row):
            raise InputError(f"{source}:{lineno}: probabilities must lie in [0, 1]")
        if abs(sum(row) - 1.0) > SPEC_FILE_ATOL:
            raise InputError(f"{source}:{lineno}: law row sums to {sum(row):.12g}, not 1")
        a, b = divmod(k, x2.size)
        table[:, a, b] = row
    law = ConditionalPmf(u, (x1, x2), table)
    return MacChannel(x1, x2, u, law)


def load_channel_spec(path) -> MacChannel:
    p = Path(path)
    if not p.exists():
        raise InputError(f"channel spec file not found: {p}")
    return parse_channel_spec(p.read_text(), source=str(p))


def format_channel_spec(channel: MacChannel, comment: str = "") -> str:
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append("alphabet x1 " + " ".join(channel.x1.labels))
    lines.append("alphabet x2 " + " ".join(channel.x2.labels))
    lines.append("alphabet u " + " ".join(channel.u.labels))
    for a in range(channel.x1.size):
        for b in range(channel.x2.size):
            row = " ".join(format(v, ".17g") for v in channel.law.table[:, a, b])
            lines.append(f"law {row}")
    return "\n".join(lines) + "\n"
