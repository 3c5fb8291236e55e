"""Command line interface.

Subcommands: check (manipulability grid), region (inner bound),
simulate (Monte Carlo campaign), attack-eval (witness-derived attack and its
indistinguishability report).  Every subcommand writes CSV reports and, by
default, matplotlib figures next to them.  Exit codes: 0 success, 1 input
error, 2 resource error.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .channel import observation_channel
from .errors import InputError, ResourceError
from .harness import ExperimentConfig, resolve_channel, run_experiment
from .manipulability import find_witness, witness_to_attack
from .region import inner_bound_region, sweep_grid
from .reporting import (write_attack_report, write_check_report, write_region_report,
                        write_simulation_report)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise InputError(f"grid must look like '0.1:0.9:9', got '{spec}'") from None
    if steps < 1 or not 0 <= lo <= hi <= 1:
        raise InputError(f"bad grid bounds '{spec}'")
    return np.linspace(lo, hi, steps)


def _parse_dist(spec: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise InputError(f"distribution must be comma-separated floats, got '{spec}'") from None


def _cmd_check(args) -> int:
    channel = resolve_channel(args.channel)
    if channel.x1.size != 2 or channel.x2.size != 2:
        raise InputError("check sweeps Bernoulli input grids; both input alphabets "
                         "must be binary (use the library API for larger alphabets)")
    grid = _parse_grid(args.grid)
    rows = []
    for p in grid:
        for q in grid:
            w1 = find_witness(observation_channel(channel, [1 - q, q], side=1))
            w2 = find_witness(observation_channel(channel, [1 - p, p], side=2))
            rows.append({
                "p": float(p), "q": float(q),
                "non_manipulable_1": w1 is None,
                "non_manipulable_2": w2 is None,
                "trace_1": None if w1 is None else w1.trace_norm,
                "trace_2": None if w2 is None else w2.trace_norm,
            })
    paths = write_check_report(rows, Path(args.out), make_figure=not args.no_figures)
    bad = sum(1 for r in rows if not (r["non_manipulable_1"] and r["non_manipulable_2"]))
    print(f"check: {len(rows)} grid points, {bad} manipulable; wrote "
          + ", ".join(str(p) for p in paths))
    return 0


def _cmd_region(args) -> int:
    channel = resolve_channel(args.channel)
    region = inner_bound_region(channel, grid_steps=args.grid_steps)
    unconstrained = None
    if args.unconstrained:
        unconstrained = inner_bound_region(channel, grid_steps=args.grid_steps,
                                           constrained=False)
    diagnostics = None
    if args.diagnostics:
        if channel.x1.size != 2 or channel.x2.size != 2:
            raise InputError("per-point diagnostics are emitted for binary inputs only")
        diagnostics = []
        for rec in sweep_grid(channel, args.grid_steps):
            diagnostics.append({**rec, "p": float(rec["p_x1"][1]), "q": float(rec["p_x2"][1])})
    paths = write_region_report(region, Path(args.out), unconstrained=unconstrained,
                                diagnostics=diagnostics, make_figure=not args.no_figures,
                                half_duplex=args.half_duplex)
    print(f"region: hull has {len(region.vertices)} vertices "
          f"({region.metadata['points_passing']}/{region.metadata['grid_points']} grid points "
          f"pass); wrote " + ", ".join(str(p) for p in paths))
    return 0


def _cmd_simulate(args) -> int:
    cfg_path = Path(args.config)
    if not cfg_path.exists():
        raise InputError(f"config file not found: {cfg_path}")
    config = ExperimentConfig.from_json(cfg_path.read_text())
    if args.seed is not None:
        config = dataclasses.replace(config, master_seed=args.seed)
    log: list | None = [] if args.trial_log else None
    sink = log.append if log is not None else None
    result = run_experiment(config, trial_sink=sink)
    paths = write_simulation_report(result, Path(args.out), make_figure=not args.no_figures,
                                    trial_log=log)
    for c in result.cells:
        if c.trials:
            head = (f"H0 error {c.p_h0_error:.3f}" if c.hypothesis == "H0"
                    else f"undetected wrong {c.p_undetected_wrong:.3f}")
            print(f"simulate: n={c.n} behavior={c.behavior} [{c.hypothesis}] "
                  f"{head}, untrusted {c.p_untrusted_any:.3f} ({c.trials} trials)")
        else:
            print(f"simulate: n={c.n} behavior={c.behavior} skipped: {c.skip_reason}")
    print("simulate: wrote " + ", ".join(str(p) for p in paths))
    return 0


def _cmd_attack_eval(args) -> int:
    channel = resolve_channel(args.channel)
    other = _parse_dist(args.other_dist)
    obs = observation_channel(channel, other, side=args.side)
    witness = find_witness(obs)
    if witness is None:
        write_attack_report([], Path(args.out), manipulable=False,
                            make_figure=False)
        print(f"attack-eval: observation channel of side {args.side} is non-manipulable; "
              "no invisible substitution exists")
        return 0
    attack = witness_to_attack(witness, obs)
    rng = np.random.default_rng(args.seed)
    kernel = attack.kernel.table
    rows = []
    nx = obs.table.shape[1]
    for x in range(nx):
        u = rng.choice(channel.u.size, size=args.symbols, p=obs.table[:, x])
        cdf = np.cumsum(kernel[:, u], axis=0)
        r = rng.random(u.size)
        v = (cdf < r[None, :]).sum(axis=0)
        for s in range(channel.u.size):
            rows.append({
                "x": x, "u": s,
                "p_clean": float(np.mean(u == s)),
                "p_attacked": float(np.mean(v == s)),
            })
    paths = write_attack_report(rows, Path(args.out), manipulable=True,
                                make_figure=not args.no_figures)
    worst = max(abs(r["p_clean"] - r["p_attacked"]) for r in rows)
    print(f"attack-eval: witness found (trace {witness.trace_norm:.3f}); worst per-input "
          f"histogram gap {worst:.4f} over {args.symbols} symbols; wrote "
          + ", ".join(str(p) for p in paths))
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse parser that reports usage errors as InputError (exit code 1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="relay-integrity",
        description="Information-integrity coding over a two-way Byzantine relay: "
                    "manipulability checks, rate regions, and Monte Carlo campaigns.",
    )
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--out", default="reports", help="output directory (default: reports)")
        p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_check = sub.add_parser("check", help="non-manipulability over an input grid")
    p_check.add_argument("--channel", default="builtin:binary_erasure_mac",
                         help="channel spec file or builtin:<name>")
    p_check.add_argument("--grid", default="0.1:0.9:9", help="p/q grid as lo:hi:steps")
    common(p_check)

    p_region = sub.add_parser("region", help="guaranteed-integrity inner-bound region")
    p_region.add_argument("--channel", default="builtin:binary_erasure_mac")
    p_region.add_argument("--grid-steps", type=int, default=33)
    p_region.add_argument("--unconstrained", action="store_true",
                          help="also emit the unfiltered comparison region")
    p_region.add_argument("--diagnostics", action="store_true",
                          help="emit per-grid-point mutual informations")
    p_region.add_argument("--half-duplex", action="store_true",
                          help="scale reported rates by 0.5 to count the broadcast phase")
    common(p_region)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo campaign from a JSON config")
    p_sim.add_argument("--config", required=True, help="experiment config (JSON)")
    p_sim.add_argument("--seed", type=int, default=None, help="override the master seed")
    p_sim.add_argument("--trial-log", action="store_true", help="also write per-trial rows")
    common(p_sim)

    p_atk = sub.add_parser("attack-eval", help="derive an invisible attack and test it")
    p_atk.add_argument("--channel", default="builtin:uniform_noise_mac")
    p_atk.add_argument("--side", type=int, choices=(1, 2), default=1)
    p_atk.add_argument("--other-dist", default="0.5,0.5",
                       help="the other node's input pmf, comma separated")
    p_atk.add_argument("--symbols", type=int, default=100_000)
    p_atk.add_argument("--seed", type=int, default=0)
    common(p_atk)

    return parser


_COMMANDS = {
    "check": _cmd_check,
    "region": _cmd_region,
    "simulate": _cmd_simulate,
    "attack-eval": _cmd_attack_eval,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
