"""Delimited reports and the matplotlib figures rendered alongside them.

Every CSV starts with a versioned comment line so downstream tooling can
detect format drift; every report function returns the paths it wrote.
"""

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

FIG_DPI = 150

_RC = {
    "figure.figsize": (5.0, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 10,
    "legend.fontsize": 9,
}


def _write_csv(path: Path, format_line: str, header: list, rows: list) -> Path:
    buf = io.StringIO()
    buf.write(format_line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue())
    return path


def read_csv_report(path) -> tuple[str, list, list]:
    """Returns (format_line, header, rows) of a versioned CSV report."""
    lines = Path(path).read_text().splitlines()
    fmt = lines[0]
    reader = csv.reader(lines[1:])
    header = next(reader)
    return fmt, header, [row for row in reader]


def save_figure(fig, path: Path) -> Path:
    fig.savefig(path, dpi=FIG_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------


def write_check_report(rows: list, out_dir: Path, make_figure: bool = True) -> list:
    """rows: dicts with p, q, non_manipulable_1/2, trace_1/2 (or None)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_rows = [
        [f"{r['p']:.6f}", f"{r['q']:.6f}",
         int(r["non_manipulable_1"]), int(r["non_manipulable_2"]),
         "" if r["trace_1"] is None else f"{r['trace_1']:.9f}",
         "" if r["trace_2"] is None else f"{r['trace_2']:.9f}"]
        for r in rows
    ]
    paths = [_write_csv(out_dir / "check.csv", "# relay-integrity check v1",
                        ["p", "q", "non_manipulable_side1", "non_manipulable_side2",
                         "witness_trace_side1", "witness_trace_side2"], csv_rows)]
    if make_figure:
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            ps = [r["p"] for r in rows]
            qs = [r["q"] for r in rows]
            ok = [r["non_manipulable_1"] and r["non_manipulable_2"] for r in rows]
            colors = ["tab:green" if o else "tab:red" for o in ok]
            ax.scatter(ps, qs, c=colors, s=18)
            ax.set_xlabel("P_X1(1) = p")
            ax.set_ylabel("P_X2(1) = q")
            ax.set_title("Non-manipulability over the input grid\n(green = both sides pass)")
            paths.append(save_figure(fig, out_dir / "check.png"))
    return paths


# ---------------------------------------------------------------------------
# region
# ---------------------------------------------------------------------------


def write_region_report(region, out_dir: Path, unconstrained=None,
                        diagnostics: list | None = None, make_figure: bool = True,
                        half_duplex: bool = False) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scale = 0.5 if half_duplex else 1.0
    rows = [[f"{scale * v[0]:.9f}", f"{scale * v[1]:.9f}"] for v in region.vertices]
    paths = [_write_csv(out_dir / "region.csv", "# relay-integrity region v1",
                        ["r1_bits", "r2_bits"], rows)]
    if unconstrained is not None:
        rows_u = [[f"{scale * v[0]:.9f}", f"{scale * v[1]:.9f}"] for v in unconstrained.vertices]
        paths.append(_write_csv(out_dir / "region_unconstrained.csv",
                                "# relay-integrity region v1", ["r1_bits", "r2_bits"], rows_u))
    if diagnostics:
        diag_rows = [
            [f"{d['p']:.6f}", f"{d['q']:.6f}",
             f"{d['mi'].i_x1_u:.9f}", f"{d['mi'].i_x2_u:.9f}",
             f"{d['mi'].i_x1_u_given_x2:.9f}", f"{d['mi'].i_x2_u_given_x1:.9f}",
             f"{d['mi'].i_x1x2_u:.9f}",
             int(d["non_manipulable_1"]), int(d["non_manipulable_2"]), int(d["passing"])]
            for d in diagnostics
        ]
        paths.append(_write_csv(out_dir / "region_grid.csv",
                                "# relay-integrity region-grid v1",
                                ["p", "q", "I_x1_u", "I_x2_u", "I_x1_u_given_x2",
                                 "I_x2_u_given_x1", "I_x1x2_u",
                                 "non_manipulable_side1", "non_manipulable_side2", "passing"],
                                diag_rows))
    if make_figure:
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            if unconstrained is not None and len(unconstrained.vertices):
                poly = list(unconstrained.vertices * scale)
                poly.append(poly[0])
                xs, ys = zip(*poly)
                ax.plot(xs, ys, "--", color="tab:orange", label="unconstrained hull")
            if len(region.vertices):
                poly = list(region.vertices * scale)
                poly.append(poly[0])
                xs, ys = zip(*poly)
                ax.plot(xs, ys, "-", linewidth=2.5, color="tab:blue",
                        label="integrity inner bound")
                ax.fill(xs, ys, alpha=0.12, color="tab:blue")
            ax.set_xlabel("R1 (bits/use)")
            ax.set_ylabel("R2 (bits/use)")
            ax.set_title("Guaranteed-integrity inner bound")
            ax.legend(loc="upper right")
            paths.append(save_figure(fig, out_dir / "region.png"))
    return paths


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

_SIM_HEADER = [
    "n", "behavior", "hypothesis", "trials", "skipped", "skip_reason",
    "p_h0_error", "p_h0_error_lo", "p_h0_error_hi",
    "p_undetected_wrong", "p_undetected_wrong_lo", "p_undetected_wrong_hi",
    "p_untrusted_any", "p_untrusted_any_lo", "p_untrusted_any_hi",
    "p_untrusted_node1", "p_untrusted_node2", "p_correct_both",
    "relay_actions", "window_e1", "window_e2", "cell_index", "master_seed",
]


def write_simulation_report(result, out_dir: Path, make_figure: bool = True,
                            trial_log: list | None = None) -> list:
    from .harness import wilson_interval

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for c in result.cells:
        if c.trials:
            h0 = wilson_interval(c.h0_errors, c.trials)
            uw = wilson_interval(c.wrong_any, c.trials)
            ua = wilson_interval(c.untrusted_any, c.trials)
            actions = ";".join(f"{k}={v}" for k, v in sorted(c.relay_actions.items()))
            rows.append([
                c.n, c.behavior, c.hypothesis, c.trials, c.skipped, c.skip_reason,
                f"{c.p_h0_error:.6f}", f"{h0[0]:.6f}", f"{h0[1]:.6f}",
                f"{c.p_undetected_wrong:.6f}", f"{uw[0]:.6f}", f"{uw[1]:.6f}",
                f"{c.p_untrusted_any:.6f}", f"{ua[0]:.6f}", f"{ua[1]:.6f}",
                f"{c.untrusted1 / c.trials:.6f}", f"{c.untrusted2 / c.trials:.6f}",
                f"{c.correct_both / c.trials:.6f}",
                actions, c.window_e1, c.window_e2, c.cell_index,
                result.config.master_seed,
            ])
        else:
            rows.append([c.n, c.behavior, c.hypothesis, 0, c.skipped, c.skip_reason]
                        + [""] * 12 + [c.window_e1, c.window_e2, c.cell_index,
                                       result.config.master_seed])
    paths = [_write_csv(out_dir / "simulate.csv", "# relay-integrity simulate v1",
                        _SIM_HEADER, rows)]

    if trial_log is not None:
        log_rows = [[t.n, t.behavior, t.trial_index, t.cell_index, t.w1, t.w2,
                     str(t.verdict1), str(t.verdict2), int(t.correct1), int(t.correct2),
                     t.relay_action, t.window_class or ""] for t in trial_log]
        paths.append(_write_csv(out_dir / "trials.csv", "# relay-integrity trial-log v1",
                                ["n", "behavior", "trial", "cell_index", "w1", "w2",
                                 "verdict1", "verdict2", "correct1", "correct2",
                                 "relay_action", "window_class"], log_rows))

    if make_figure:
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            behaviors = sorted({c.behavior for c in result.cells if c.trials})
            for b in behaviors:
                cells = sorted([c for c in result.cells if c.behavior == b and c.trials],
                               key=lambda c: c.n)
                ns = [c.n for c in cells]
                if cells and cells[0].hypothesis == "H0":
                    ax.plot(ns, [c.p_h0_error for c in cells], "o-", label=f"{b}: H0 error")
                else:
                    ax.plot(ns, [c.p_undetected_wrong for c in cells], "s-",
                            label=f"{b}: undetected wrong")
                ax.plot(ns, [c.p_untrusted_any for c in cells], "^--",
                        label=f"{b}: untrusted", alpha=0.7)
            ax.set_xlabel("block length n")
            ax.set_ylabel("estimated probability")
            ax.set_ylim(-0.02, 1.02)
            ax.set_title("Monte Carlo error and detection rates")
            ax.legend(loc="best")
            paths.append(save_figure(fig, out_dir / "simulate.png"))
    return paths


# ---------------------------------------------------------------------------
# attack-eval
# ---------------------------------------------------------------------------


def write_attack_report(rows: list, out_dir: Path, manipulable: bool,
                        make_figure: bool = True) -> list:
    """rows: dicts with x, u, p_clean, p_attacked (empirical, per input symbol)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_rows = [[r["x"], r["u"], f"{r['p_clean']:.6f}", f"{r['p_attacked']:.6f}"]
                for r in rows]
    paths = [_write_csv(out_dir / "attack_eval.csv",
                        f"# relay-integrity attack-eval v1 manipulable={int(manipulable)}",
                        ["x", "u", "p_clean", "p_attacked"], csv_rows)]
    if make_figure and rows:
        with plt.rc_context(_RC):
            fig, ax = plt.subplots()
            labels = [f"x={r['x']},u={r['u']}" for r in rows]
            idx = range(len(rows))
            width = 0.4
            ax.bar([i - width / 2 for i in idx], [r["p_clean"] for r in rows],
                   width=width, label="honest relay")
            ax.bar([i + width / 2 for i in idx], [r["p_attacked"] for r in rows],
                   width=width, label="substitution attack")
            ax.set_xticks(list(idx))
            ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
            ax.set_ylabel("empirical P(u | x)")
            ax.set_title("Per-input output statistics: attack vs honest")
            ax.legend()
            paths.append(save_figure(fig, out_dir / "attack_eval.png"))
    return paths
