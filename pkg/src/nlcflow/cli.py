"""Command-line interface.

Subcommands::

    nlcflow run <config.yaml>             simulate, write diagnostics/snapshots
    nlcflow norms <snapshot> [...]        print norms of a stored state
    nlcflow check-inequalities [...]      empirical constants over seeded corpora
    nlcflow gronwall <diagnostics> [...]  exponential-growth fit report
    nlcflow report <diagnostics> [...]    render figures next to the table

Exit codes: 0 success, 1 error (message on stderr), 2 usage, 3 the run ended
in a flagged singularity or divergence (diagnostics are still written).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import io as nio
from .config import ConfigError, load_config
from .dynamics import run
from .grid import Grid
from .inequalities import (
    FieldCorpus,
    GNExponents,
    Spectrum,
    corpus_values,
    gn_ratio,
    interpolation_2_1_check,
    log_sobolev_ratio,
    moser_ratio,
    unit_director_identities,
)
from .monitor import gronwall_report
from .norms import bmo_norm, lp_norm, sobolev_norm
from .report import save_report_figures

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SINGULAR = 3


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    grid = cfg.build_grid()
    state0 = cfg.build_state(grid)
    solver = cfg.build_solver()

    out = cfg.outputs
    prefix = Path(out.snapshot_prefix)

    def snapshot_cb(step_index: int, state) -> None:
        if out.snapshot_every > 0 and step_index % out.snapshot_every == 0:
            nio.write_snapshot(state, f"{prefix}_{step_index:08d}.nlcf")

    result = run(state0, solver, step_callback=snapshot_cb)
    nio.write_diagnostics(result.records, out.diagnostics)
    if out.snapshot_every > 0:
        nio.write_snapshot(result.state, f"{prefix}_final.nlcf")

    final_criterion = result.records[-1].criterion_value if result.records else 0.0
    print(f"criterion_value {_fmt(final_criterion)}")
    print(f"failed {str(result.failed).lower()}")
    if result.failed:
        print(f"failure_time {_fmt(result.failure_time)}")
        print(f"failure_reason {result.failure_reason}")
        return EXIT_SINGULAR
    return EXIT_OK


def _cmd_norms(args) -> int:
    state = nio.read_snapshot(args.snapshot)
    fields = (("u", state.u), ("d", state.d))
    printed = False
    if args.lp is not None:
        p = math.inf if args.lp.lower() in ("inf", "infinity") else float(args.lp)
        for name, f in fields:
            print(f"{name} lp[{args.lp}] {_fmt(lp_norm(f, p))}")
        printed = True
    if args.sobolev is not None:
        try:
            m_str, p_str = args.sobolev.split(",")
            m = int(m_str)
            p = math.inf if p_str.lower() in ("inf", "infinity") else float(p_str)
        except ValueError:
            raise ValueError(f"--sobolev expects M,P (got {args.sobolev!r})") from None
        for name, f in fields:
            print(f"{name} sobolev[{args.sobolev}] {_fmt(sobolev_norm(f, m, p))}")
        printed = True
    if args.bmo:
        for name, f in fields:
            print(f"{name} bmo {_fmt(bmo_norm(f))}")
        printed = True
    if not printed:
        for name, f in fields:
            print(f"{name} lp[2] {_fmt(lp_norm(f, 2.0))}")
    return EXIT_OK


def _cmd_check_inequalities(args) -> int:
    grid = Grid(args.dim, args.n)
    spectrum = Spectrum(kmax=min(3, grid.n // 4), decay=0.7)
    smooth = FieldCorpus(args.seed, args.count, spectrum)
    pairs = FieldCorpus(args.seed + 1, 2 * args.count, spectrum)
    divfree = FieldCorpus(args.seed + 2, args.count, spectrum, constraint="divergence_free")
    unit = FieldCorpus(args.seed + 3, args.count, spectrum, constraint="unit_length")

    gn = GNExponents.from_orders(i=1, k=2, p=3.0, q=4.0, r=2.0, dim=args.dim)
    rows = []
    vals = corpus_values(smooth, grid, lambda f: gn_ratio(f, gn))
    rows.append((f"gn i=1 k=2 p=3 q=4 r=2 (alpha={gn.alpha:.6g})", vals))
    moser_vals = np.array([
        moser_ratio(pairs.sample(grid, 2 * i), pairs.sample(grid, 2 * i + 1), 3)
        for i in range(args.count)
    ])
    rows.append(("moser s=3", moser_vals))
    rows.append(("log-sobolev p=4", corpus_values(divfree, grid, log_sobolev_ratio)))
    rows.append((
        "interpolation k=3",
        corpus_values(smooth, grid, lambda f: interpolation_2_1_check(f, 3)),
    ))
    ident = np.array([unit_director_identities(f) for f in unit.samples(grid)])
    rows.append(("unit identity res1", ident[:, 0]))
    rows.append(("unit identity res2", ident[:, 1]))

    print(f"corpus: dim={args.dim} n={args.n} seed={args.seed} count={args.count}")
    width = max(len(name) for name, _ in rows)
    print(f"{'check'.ljust(width)}  {'samples':>7}  {'max':>24}  argmax")
    for name, vals in rows:
        idx = int(np.argmax(vals))
        print(f"{name.ljust(width)}  {len(vals):>7}  {_fmt(float(vals[idx])):>24}  {idx}")
    return EXIT_OK


def _cmd_gronwall(args) -> int:
    records = nio.read_diagnostics(args.diagnostics)
    rep = gronwall_report(records, args.t_star)
    print(rep.summary())
    if args.table:
        print("t,L,A")
        for t, L, A in zip(rep.times, rep.L, rep.A):
            print(f"{_fmt(t)},{_fmt(L)},{_fmt(A)}")
    if args.plot is not None:
        out = Path(args.plot)
        paths = save_report_figures(records, out.parent, out.stem, args.t_star)
        for p in paths:
            print(f"wrote {p}")
    return EXIT_OK


def _cmd_report(args) -> int:
    records = nio.read_diagnostics(args.diagnostics)
    src = Path(args.diagnostics)
    out_dir = Path(args.outdir) if args.outdir else src.parent
    paths = save_report_figures(records, out_dir, src.stem, args.t_star)
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlcflow",
        description="Pseudo-spectral nematic liquid-crystal flow simulator and monitors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate from a YAML config")
    p_run.add_argument("config")
    p_run.set_defaults(fn=_cmd_run)

    p_norms = sub.add_parser("norms", help="print norms of a snapshot")
    p_norms.add_argument("snapshot")
    p_norms.add_argument("--lp", metavar="P", help="Lebesgue exponent (number or 'inf')")
    p_norms.add_argument("--sobolev", metavar="M,P", help="Sobolev order and exponent")
    p_norms.add_argument("--bmo", action="store_true", help="bounded mean oscillation norm")
    p_norms.set_defaults(fn=_cmd_norms)

    p_chk = sub.add_parser("check-inequalities", help="empirical constants over seeded corpora")
    p_chk.add_argument("--seed", type=int, default=0)
    p_chk.add_argument("--count", type=int, default=50)
    p_chk.add_argument("--dim", type=int, default=3, choices=(2, 3))
    p_chk.add_argument("--n", type=int, default=16)
    p_chk.set_defaults(fn=_cmd_check_inequalities)

    p_gr = sub.add_parser("gronwall", help="exponential-growth fit from a diagnostics table")
    p_gr.add_argument("diagnostics")
    p_gr.add_argument("--t-star", type=float, default=None, dest="t_star")
    p_gr.add_argument("--table", action="store_true", help="print per-record (t, L, A) rows")
    p_gr.add_argument("--plot", metavar="PATH", help="also render figures with this stem")
    p_gr.set_defaults(fn=_cmd_gronwall)

    p_rep = sub.add_parser("report", help="render figures next to a diagnostics table")
    p_rep.add_argument("diagnostics")
    p_rep.add_argument("--outdir", default=None)
    p_rep.add_argument("--t-star", type=float, default=None, dest="t_star")
    p_rep.set_defaults(fn=_cmd_report)
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, nio.SnapshotError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(cli_main())
