"""Monte Carlo orchestration: end-to-end trials under H0/H1 and aggregation.

A trial samples the full factorization of the model: uniform messages,
rate-splitting encoders, the memoryless MAC, the relay behavior applied to
u^n alone, and both nodes decoding the same broadcast block.  H0/H1
accounting follows the achievability events exactly: under H0 any verdict
other than the correct message is an error, while under H1 only a decoded
wrong message is (the untrusted mark and a corrected decode are both fine).

Per-trial randomness derives from the master seed through
SeedSequence(master_seed, spawn_key=(cell_index, k)) with k = 0 reserved
for codebook generation and k = 1 + trial for the trial stream, so serial
and parallel execution agree bit for bit.
"""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import channel as channel_mod
from .channel import (DecodeAndReforge, DeterministicMap, Honest, MacChannel,
                      MemorylessSubstitution, PartialBlockSubstitution, ConditionalPmf,
                      forward_with_action, load_channel_spec, parse_channel_spec,
                      transmit_mac, validate_pmf)
from .codec import (Codebook, RatePlan, Verdict, build_codebook, decode, encode_split,
                    message_bits, plan_rates, rate_bits, recover_from_split, split_bits)
from .errors import InputError, ResourceError
from .manipulability import classify_window
from .region import input_posterior, joint_from
from .typicality import ToleranceSchedule, default_schedule

DEFAULT_MAX_CODEWORDS = 2**20
DEFAULT_MAX_CANDIDATE_EVALS = 2**24


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce a campaign, JSON round-trippable.

    `rates` is one of
      {"mode": "plan",  "targets": [R1, R2]}                 window-checked
      {"mode": "rates", "targets": [R1, R2],
                        "operating": [R1', R2']}             as given, unchecked
      {"mode": "bits",  "message_bits": [m1, m2],
                        "split_bits": [s1, s2]}              fixed across n
    and each behavior descriptor is a dict with a "kind" key, e.g.
      {"kind": "honest"}
      {"kind": "deterministic_map", "mapping": [2, 1, 0]}
      {"kind": "memoryless_substitution", "kernel": [[...], ...]}
      {"kind": "partial_block", "fraction": 0.25, "inner": {...}}
      {"kind": "decode_and_reforge", "shift": [0, 1], "pair_budget": 16777216}
    """

    channel: str
    p_x1: tuple
    p_x2: tuple
    rates: dict
    block_lengths: tuple
    trials: int
    behaviors: tuple
    master_seed: int = 0
    schedule: dict = field(default_factory=dict)
    max_codewords: int = DEFAULT_MAX_CODEWORDS
    max_candidate_evals: int = DEFAULT_MAX_CANDIDATE_EVALS
    classify_windows: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if not self.block_lengths or any(n < 1 for n in self.block_lengths):
            raise InputError("block lengths must be positive")
        if not self.behaviors:
            raise InputError("at least one relay behavior is required")
        mode = self.rates.get("mode")
        if mode not in ("plan", "rates", "bits"):
            raise InputError("rates.mode must be one of plan|rates|bits")
        object.__setattr__(self, "p_x1", tuple(float(v) for v in self.p_x1))
        object.__setattr__(self, "p_x2", tuple(float(v) for v in self.p_x2))
        object.__setattr__(self, "block_lengths", tuple(int(n) for n in self.block_lengths))
        object.__setattr__(self, "behaviors", tuple(dict(b) for b in self.behaviors))

    def to_json(self) -> str:
        payload = {
            "channel": self.channel,
            "p_x1": list(self.p_x1),
            "p_x2": list(self.p_x2),
            "rates": self.rates,
            "block_lengths": list(self.block_lengths),
            "trials": self.trials,
            "behaviors": [dict(b) for b in self.behaviors],
            "master_seed": self.master_seed,
            "schedule": self.schedule,
            "max_codewords": self.max_codewords,
            "max_candidate_evals": self.max_candidate_evals,
            "classify_windows": self.classify_windows,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from None
        known = {"channel", "p_x1", "p_x2", "rates", "block_lengths", "trials",
                 "behaviors", "master_seed", "schedule", "max_codewords",
                 "max_candidate_evals", "classify_windows"}
        unknown = set(payload) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        missing = {"channel", "p_x1", "p_x2", "rates", "block_lengths", "trials",
                   "behaviors"} - set(payload)
        if missing:
            raise InputError(f"missing config fields: {sorted(missing)}")
        return ExperimentConfig(**payload)


def resolve_channel(name: str) -> MacChannel:
    """Resolve 'builtin:<name>' or a channel spec file path."""
    if name.startswith("builtin:"):
        key = name.split(":", 1)[1]
        if key == "binary_erasure_mac":
            return channel_mod.binary_erasure_mac()
        if key == "uniform_noise_mac":
            return channel_mod.uniform_noise_mac()
        data = resources.files("relay_integrity").joinpath(f"data/{key}.channel")
        if data.is_file():
            return parse_channel_spec(data.read_text(), source=name)
        raise InputError(f"unknown builtin channel '{key}'")
    return load_channel_spec(name)


def build_behavior(desc: dict, channel: MacChannel, schedule: ToleranceSchedule):
    kind = desc.get("kind")
    if kind == "honest":
        return Honest()
    if kind == "deterministic_map":
        return DeterministicMap(np.asarray(desc["mapping"], dtype=np.int64))
    if kind == "memoryless_substitution":
        table = np.asarray(desc["kernel"], dtype=float)
        return MemorylessSubstitution(ConditionalPmf(channel.u, (channel.u,), table))
    if kind == "partial_block":
        inner = build_behavior(desc["inner"], channel, schedule)
        return PartialBlockSubstitution(float(desc["fraction"]), inner)
    if kind == "decode_and_reforge":
        shift = tuple(desc.get("shift", (0, 1)))
        budget = int(desc.get("pair_budget", DEFAULT_MAX_CANDIDATE_EVALS))
        return DecodeAndReforge(channel=channel, schedule=schedule, shift=shift,
                                pair_budget=budget)
    raise InputError(f"unknown behavior kind '{kind}'")


def behavior_label(desc: dict) -> str:
    return desc.get("label", desc.get("kind", "behavior"))


# ---------------------------------------------------------------------------
# Cells and trials
# ---------------------------------------------------------------------------


@dataclass
class CellContext:
    config: ExperimentConfig
    cell_index: int
    n: int
    behavior_desc: dict
    channel: MacChannel
    schedule: ToleranceSchedule
    behavior: object
    codebooks: tuple[Codebook, Codebook]
    bits: tuple[tuple[int, int], tuple[int, int]]   # ((m1, s1), (m2, s2))
    plan: RatePlan | None
    posterior1: np.ndarray


def cell_list(config: ExperimentConfig) -> list[tuple[int, int]]:
    return [(i, j) for i in range(len(config.block_lengths))
            for j in range(len(config.behaviors))]


def cell_index_of(config: ExperimentConfig, cell: tuple[int, int]) -> int:
    return cell[0] * len(config.behaviors) + cell[1]


def _cell_bits(config: ExperimentConfig, ch: MacChannel, n: int):
    mode = config.rates["mode"]
    if mode == "bits":
        m = config.rates["message_bits"]
        s = config.rates["split_bits"]
        return (int(m[0]), int(s[0])), (int(m[1]), int(s[1])), None
    if mode == "rates":
        r = config.rates["targets"]
        op = config.rates["operating"]
        pairs = []
        for i in range(2):
            mb = rate_bits(n, float(r[i]))
            sb = rate_bits(n, float(op[i]) - float(r[i]))
            pairs.append((mb, sb))
        return pairs[0], pairs[1], None
    plan = plan_rates(ch, config.p_x1, config.p_x2, tuple(config.rates["targets"]))
    return ((message_bits(plan, n, 1), split_bits(plan, n, 1)),
            (message_bits(plan, n, 2), split_bits(plan, n, 2)), plan)


def build_cell(config: ExperimentConfig, cell: tuple[int, int]) -> CellContext:
    ch = resolve_channel(config.channel)
    p1 = validate_pmf(config.p_x1, ch.x1.size, "p_x1")
    p2 = validate_pmf(config.p_x2, ch.x2.size, "p_x2")
    schedule = default_schedule(ch.u.size, ch.x1.size, ch.x2.size, **config.schedule)
    n = config.block_lengths[cell[0]]
    desc = config.behaviors[cell[1]]
    behavior = build_behavior(desc, ch, schedule)
    (m1, s1), (m2, s2), plan = _cell_bits(config, ch, n)

    idx = cell_index_of(config, cell)
    rng_cb = np.random.default_rng(np.random.SeedSequence(config.master_seed, spawn_key=(idx, 0)))
    delta = schedule.delta(n)
    cb1 = build_codebook(p1, n, 0.0, delta, rng_cb, max_codewords=config.max_codewords,
                         bits=m1 + s1)
    cb2 = build_codebook(p2, n, 0.0, delta, rng_cb, max_codewords=config.max_codewords,
                         bits=m2 + s2)
    posterior1 = input_posterior(joint_from(ch, p1, p2), side=1)
    return CellContext(config=config, cell_index=idx, n=n, behavior_desc=desc,
                       channel=ch, schedule=schedule, behavior=behavior,
                       codebooks=(cb1, cb2), bits=((m1, s1), (m2, s2)), plan=plan,
                       posterior1=posterior1)


@dataclass(frozen=True)
class TrialResult:
    n: int
    behavior: str
    hypothesis: str              # "H0" | "H1"
    w1: int
    w2: int
    verdict1: Verdict            # node 1's verdict about w2
    verdict2: Verdict            # node 2's verdict about w1
    correct1: bool
    correct2: bool
    wrong1: bool
    wrong2: bool
    untrusted1: bool
    untrusted2: bool
    relay_action: str
    window_class: str | None
    cell_index: int
    trial_index: int

    @property
    def h0_error(self) -> bool:
        """Under H0 any verdict other than the correct message is an error."""
        return not (self.correct1 and self.correct2)

    @property
    def h1_error(self) -> bool:
        """Under H1 only a decoded wrong message is an error."""
        return self.wrong1 or self.wrong2


def run_trial_in_context(ctx: CellContext, trial: int) -> TrialResult:
    cfg = ctx.config
    rng = np.random.default_rng(
        np.random.SeedSequence(cfg.master_seed, spawn_key=(ctx.cell_index, 1 + trial)))
    (m1, s1), (m2, s2) = ctx.bits
    cb1, cb2 = ctx.codebooks
    w1 = int(rng.integers(1, 2**m1 + 1))
    w2 = int(rng.integers(1, 2**m2 + 1))
    x1, w1p = encode_split(cb1, m1, s1, w1, rng)
    x2, w2p = encode_split(cb2, m2, s2, w2, rng)
    idx1 = (w1 - 1) * 2**s1 + w1p
    idx2 = (w2 - 1) * 2**s2 + w2p

    u = transmit_mac(ctx.channel, x1, x2, rng)
    v, action = forward_with_action(ctx.behavior, u, (cb1, cb2), rng)

    verdict1 = decode(v, idx1, cb1, cb2, ctx.channel, ctx.schedule, own_side=1,
                      max_candidate_evals=cfg.max_candidate_evals)
    verdict2 = decode(v, idx2, cb2, cb1, ctx.channel, ctx.schedule, own_side=2,
                      max_candidate_evals=cfg.max_candidate_evals)

    msg1 = None if verdict1.is_untrusted else recover_from_split(verdict1.index, s2)
    msg2 = None if verdict2.is_untrusted else recover_from_split(verdict2.index, s1)
    correct1 = msg1 == w2
    correct2 = msg2 == w1

    window_class = None
    if cfg.classify_windows:
        window_class, _ = classify_window(u, v, ctx.posterior1, ctx.schedule)

    hypothesis = "H0" if isinstance(ctx.behavior, Honest) else "H1"
    return TrialResult(
        n=ctx.n, behavior=behavior_label(ctx.behavior_desc), hypothesis=hypothesis,
        w1=w1, w2=w2, verdict1=verdict1, verdict2=verdict2,
        correct1=correct1, correct2=correct2,
        wrong1=(msg1 is not None and msg1 != w2),
        wrong2=(msg2 is not None and msg2 != w1),
        untrusted1=verdict1.is_untrusted, untrusted2=verdict2.is_untrusted,
        relay_action=action, window_class=window_class,
        cell_index=ctx.cell_index, trial_index=trial,
    )


def run_trial(config: ExperimentConfig, cell: tuple[int, int], trial: int) -> TrialResult:
    """Replay a single trial; deterministic in (config, cell, trial)."""
    return run_trial_in_context(build_cell(config, cell), trial)


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054):
    """95% Wilson score interval for a binomial proportion."""
    if total == 0:
        return (0.0, 1.0)
    phat = successes / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (phat + z2 / (2 * total)) / denom
    half = z * np.sqrt(phat * (1 - phat) / total + z2 / (4 * total * total)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class CellResult:
    n: int
    behavior: str
    hypothesis: str
    trials: int = 0
    skipped: int = 0
    skip_reason: str = ""
    h0_errors: int = 0
    h1_errors: int = 0
    wrong_any: int = 0
    untrusted_any: int = 0
    untrusted1: int = 0
    untrusted2: int = 0
    correct_both: int = 0
    relay_actions: dict = field(default_factory=dict)
    window_e1: int = 0
    window_e2: int = 0
    cell_index: int = 0

    def add(self, t: TrialResult):
        self.trials += 1
        self.h0_errors += t.h0_error
        self.h1_errors += t.h1_error
        self.wrong_any += (t.wrong1 or t.wrong2)
        self.untrusted_any += (t.untrusted1 or t.untrusted2)
        self.untrusted1 += t.untrusted1
        self.untrusted2 += t.untrusted2
        self.correct_both += (t.correct1 and t.correct2)
        self.relay_actions[t.relay_action] = self.relay_actions.get(t.relay_action, 0) + 1
        if t.window_class == "E1":
            self.window_e1 += 1
        elif t.window_class == "E2":
            self.window_e2 += 1

    def merge(self, other: "CellResult") -> "CellResult":
        """Associative, commutative combination of two partial aggregates."""
        if (self.n, self.behavior) != (other.n, other.behavior):
            raise InputError("cannot merge results from different cells")
        out = CellResult(self.n, self.behavior, self.hypothesis, cell_index=self.cell_index)
        for name in ("trials", "skipped", "h0_errors", "h1_errors", "wrong_any",
                     "untrusted_any", "untrusted1", "untrusted2", "correct_both",
                     "window_e1", "window_e2"):
            setattr(out, name, getattr(self, name) + getattr(other, name))
        out.skip_reason = self.skip_reason or other.skip_reason
        actions = dict(self.relay_actions)
        for k, v in other.relay_actions.items():
            actions[k] = actions.get(k, 0) + v
        out.relay_actions = actions
        return out

    def rate(self, count: int) -> float:
        return count / self.trials if self.trials else float("nan")

    @property
    def p_h0_error(self) -> float:
        return self.rate(self.h0_errors)

    @property
    def p_undetected_wrong(self) -> float:
        return self.rate(self.wrong_any)

    @property
    def p_untrusted_any(self) -> float:
        return self.rate(self.untrusted_any)


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    cells: list
    schedule_echo: dict

    def cell(self, n: int, behavior: str) -> CellResult:
        for c in self.cells:
            if c.n == n and c.behavior == behavior:
                return c
        raise KeyError((n, behavior))


def run_experiment(config: ExperimentConfig, trial_sink=None) -> ExperimentResult:
    """Run every (block length, behavior) cell; deterministic in the config.

    `trial_sink`, when given, receives every TrialResult (for event logs).
    A trial that trips a resource cap is recorded as skipped with its
    reason; the cell is reported either way.
    """
    cells = []
    schedule_echo = {}
    for cell in cell_list(config):
        try:
            ctx = build_cell(config, cell)
        except ResourceError as exc:
            n = config.block_lengths[cell[0]]
            desc = config.behaviors[cell[1]]
            res = CellResult(n, behavior_label(desc),
                             "H0" if desc.get("kind") == "honest" else "H1",
                             cell_index=cell_index_of(config, cell))
            res.skipped = config.trials
            res.skip_reason = str(exc)
            cells.append(res)
            continue
        schedule_echo = ctx.schedule.describe()
        res = CellResult(ctx.n, behavior_label(ctx.behavior_desc),
                         "H0" if isinstance(ctx.behavior, Honest) else "H1",
                         cell_index=ctx.cell_index)
        for trial in range(config.trials):
            try:
                t = run_trial_in_context(ctx, trial)
            except ResourceError as exc:
                res.skipped += 1
                res.skip_reason = str(exc)
                continue
            res.add(t)
            if trial_sink is not None:
                trial_sink(t)
        cells.append(res)
    return ExperimentResult(config=config, cells=cells, schedule_echo=schedule_echo)
