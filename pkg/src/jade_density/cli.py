"""Command-line interface: ``jade-density <subcommand> [options]``.

Every subcommand writes its artifacts to ``--out-dir`` and prints a short
summary.  Warnings are printed to stderr and recorded in the JSON report;
they never change the exit status.  Errors exit with status 1.
"""

import argparse
import json
import math
import os
import sys
import time
import warnings

import numpy as np

from .chebyshev import AffineDomainMap, conditioning_digits, moments_to_chebyshev, rescale_moments
from .exceptions import DomainError, QuadratureError, SpectrumEscapeError
from .io import (
    atomic_write,
    read_moment_file,
    read_samples,
    read_spectral_problem,
    write_characteristic_csv,
    write_density_csv,
    write_long_csv,
    write_moment_file,
)
from .jade import DEFAULT_GRID_POINTS, characteristic_function, chebyshev_grid, jade_density_grid
from .reference import CORPUS_IDS, SPECTRAL_DIM, SPECTRAL_SEED, get_corpus
from .sources import (
    DEFAULT_MARGIN,
    estimate_spectral_bounds,
    hamiltonian_moments,
    moments_from_samples,
    random_spectral_problem,
)
from .workflows import COMPARE_METHODS, compare, spectral_convergence

__all__ = ["build_parser", "main"]


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _path(args, name):
    return os.path.join(args.out_dir, name)


def _write_curve(args, stem, x, values, comments=()):
    """Density samples as CSV (``x,density``) or JSON, per ``--format``."""
    if args.format == "json":
        payload = {"comments": list(comments), "x": [float(v) for v in x], "density": [float(v) for v in values]}
        return atomic_write(_path(args, stem + ".json"), json.dumps(payload) + "\n")
    return write_density_csv(_path(args, stem + ".csv"), x, values, comments)


def _write_report(args, name, report):
    return atomic_write(_path(args, name), json.dumps(report, indent=1, sort_keys=True) + "\n")


def _warning_lines(notes):
    return [f"warning: {n}" for n in notes]


def _emit(lines):
    for line in lines:
        print(line)


def _parse_orders(text):
    try:
        orders = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not orders or min(orders) < 0:
        raise argparse.ArgumentTypeError("orders must be non-negative integers")
    return orders


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_moments(args):
    """Write a moment file from a corpus density, a samples file or an operator file."""
    order = args.order
    if args.corpus:
        moments = get_corpus(args.corpus, seed=args.seed).moments(order, args.precision_digits)
        source = f"corpus {args.corpus}"
    elif args.samples:
        samples = read_samples(args.samples)
        domain = tuple(args.domain) if args.domain else (-1.0, 1.0)
        moments = moments_from_samples(samples, order, domain)
        source = f"{samples.size} samples from {args.samples}"
    else:
        problem = read_spectral_problem(args.matrix)
        dmap = AffineDomainMap(*args.domain) if args.domain else estimate_spectral_bounds(problem, args.margin)
        moments = hamiltonian_moments(problem, order, (dmap.a, dmap.b))
        source = f"operator {args.matrix} (dim {problem.dim})"
    path = write_moment_file(_path(args, args.output), moments)
    need = conditioning_digits(order)
    lines = [
        f"source: {source}",
        f"moments: {len(moments)} ({moments.kind}), mu'_0 = {float(moments.values[0])!r}",
        f"domain: [{float(moments.domain[0])!r}, {float(moments.domain[1])!r}]",
        f"conditioning: order {order} amplifies errors by 10^{need:.1f}; "
        f"transform default {max(4 * order, 32)} digits, moments carry "
        + ("exact values" if moments.precision_digits is None else f"{moments.precision_digits} digits"),
        f"wrote {path}",
    ]
    report = {"moments_file": path, "order": order, "conditioning_digits": need}
    return lines, report, list(moments.warnings), "moments_report.json"


def cmd_estimate(args):
    """JADE density (and optionally its characteristic function) from a moment file."""
    moments = read_moment_file(args.moments)
    order = moments.order if args.order is None else args.order
    if order > moments.order:
        raise ValueError(f"requested order {order} exceeds the {moments.order} available in {args.moments}")
    dmap = AffineDomainMap(*moments.domain)
    mapped = moments if dmap.is_identity() else rescale_moments(moments, dmap)
    c = moments_to_chebyshev(mapped, order, args.precision_digits)
    notes = list(moments.warnings) + [n for n in c.warnings if n not in moments.warnings]
    est = jade_density_grid(c, chebyshev_grid(args.grid_points), dmap, clip=args.clip)
    y, density = est.physical()
    header = [f"jade order={order} domain=[{float(dmap.a)!r}, {float(dmap.b)!r}] digits={c.precision_used}"]
    header += _warning_lines(notes)
    paths = [_write_curve(args, "density", y, density, header)]
    if args.characteristic:
        t = np.linspace(-args.t_max, args.t_max, args.t_points)
        paths.append(write_characteristic_csv(_path(args, "characteristic.csv"), t, characteristic_function(c, t), header))
    report = {
        "order": order,
        "domain": dmap.to_dict(),
        "precision_digits": c.precision_used,
        "amplification_log10": math.log10(c.amplification) if c.amplification else 0.0,
        "mass": est.integrate(),
        "clipped": bool(args.clip),
        "files": paths,
    }
    lines = [f"order {order}, mass {report['mass']:.12g}, transform digits {c.precision_used}"]
    lines += [f"wrote {p}" for p in paths]
    return lines, report, notes, "estimate_report.json"


def cmd_compare(args):
    """Metrics of JADE and the baselines against a corpus density."""
    counts = {}
    if args.jade_moments is not None:
        counts["jade"] = args.jade_moments
    if args.gc_cumulants is not None:
        counts["gram-charlier"] = args.gc_cumulants
    if args.kde_samples is not None:
        counts["kde"] = args.kde_samples
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report, curves, grid = compare(
        get_corpus(args.reference, seed=args.seed),
        methods,
        counts,
        args.grid_points,
        args.precision_digits,
        0 if args.seed is None else args.seed,
        args.timings,
    )
    data = report.to_dict()
    records = [(name, grid, values) for name, values in curves.items()]
    if args.format == "json":
        payload = {"x": grid.tolist(), "curves": {k: np.asarray(v).tolist() for k, v in curves.items()}}
        curve_path = atomic_write(_path(args, "comparison.json"), json.dumps(payload) + "\n")
    else:
        curve_path = write_long_csv(_path(args, "comparison.csv"), records, _warning_lines(report.warnings))
    lines = [f"reference {args.reference} on {args.grid_points} Chebyshev points"]
    lines.append(f"{'method':<14}{'count':>7}{'L1':>13}{'L2':>13}{'wL2':>13}{'max-abs':>13}")
    for r in report.results:
        if r.skipped:
            lines.append(f"{r.method:<14}skipped: {r.skipped}")
            continue
        m = r.metrics
        count = "" if r.count is None else r.count
        lines.append(
            f"{r.method:<14}{count!s:>7}{m['L1']:>13.4e}{m['L2']:>13.4e}{m['weighted_L2']:>13.4e}{m['max_abs']:>13.4e}"
        )
    lines.append(f"wrote {curve_path}")
    return lines, data, list(report.warnings), "comparison_report.json"


def cmd_spectrum(args):
    """Energy-distribution reconstructions of an operator/state pair at several orders."""
    if args.matrix:
        problem = read_spectral_problem(args.matrix)
    else:
        problem = random_spectral_problem(args.random_dim, SPECTRAL_SEED if args.seed is None else args.seed)
    rep = spectral_convergence(
        problem,
        args.orders,
        sigma_fraction=args.sigma_fraction,
        sigma=args.sigma,
        margin=args.margin,
        grid_points=args.grid_points,
        broaden=not args.no_broaden,
    )
    dmap = rep.domain_map
    header = [f"map [{dmap.a!r}, {dmap.b!r}] sigma_mapped={rep.sigma!r} broadened={rep.broadened}"]
    paths = []
    for n, est in rep.estimates.items():
        y, density = est.physical()
        paths.append(_write_curve(args, f"spectrum_N{n}", y, density, header + [f"order {n}"]))
    y, density = rep.oracle.physical()
    paths.append(_write_curve(args, "spectrum_oracle", y, density, header + ["exact broadened distribution"]))
    data = rep.to_dict()
    data["files"] = paths
    lines = [f"map [{dmap.a:.6g}, {dmap.b:.6g}] (Gershgorin, margin {args.margin}), sigma {rep.sigma:.4g} mapped"]
    lines.append(f"{'N':>5}{'L1':>13}{'L2':>13}{'max-abs':>13}{'mass':>13}")
    for row in rep.rows:
        m = row["metrics"]
        lines.append(f"{row['order']:>5}{m['L1']:>13.4e}{m['L2']:>13.4e}{m['max_abs']:>13.4e}{row['mass']:>13.6f}")
    for k, v in rep.gram_charlier.items():
        lines.append(f"gram-charlier {k:>2} cumulants: max |error| {v['max_oscillation']:.4e}, min {v['min_value']:.4e}")
    lines += [f"wrote {p}" for p in paths]
    return lines, data, list(rep.warnings), "spectrum_report.json"


def cmd_corpus(args):
    """Materialize corpus densities on the grid."""
    ids = CORPUS_IDS if args.id == "all" else (args.id,)
    grid = chebyshev_grid(args.grid_points)
    paths, info = [], {}
    for cid in ids:
        density = get_corpus(cid, seed=args.seed)
        stem = f"corpus_{cid}"
        paths.append(_write_curve(args, stem, grid, density(grid), [f"corpus {cid}"]))
        info[cid] = density.to_dict()
        if cid in ("multimodal-gauss", "spectral-exact", "asym-uniform"):
            paths.append(_write_report(args, stem + ".json", info[cid]))
    return [f"wrote {p}" for p in paths], {"corpus": info, "files": paths}, [], None


def cmd_golden_update(args):
    from .goldens import GOLDEN_PATH, write_goldens

    data = write_goldens()
    return [f"wrote {GOLDEN_PATH}"], data, [], None


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def _global_flags(defaults=True):
    """Global options; accepted before or after the subcommand.

    The subcommand copy suppresses defaults so that it does not overwrite a
    value given before the subcommand name.
    """

    def d(value):
        return value if defaults else argparse.SUPPRESS

    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--grid-points", type=int, default=d(DEFAULT_GRID_POINTS), help="Chebyshev grid size (default 2001)")
    g.add_argument("--precision-digits", type=int, default=d(None), help="working digits for the moment transform")
    g.add_argument("--seed", type=int, default=d(None), help="seed for sampling and random cases (default: per-case)")
    g.add_argument("--out-dir", default=d("."), help="directory for output files")
    g.add_argument("--format", choices=("csv", "json"), default=d("csv"), help="format of curve outputs")
    g.add_argument("--timings", action="store_true", default=d(False), help="record wall time (not reproducible)")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="jade-density",
        description="Density reconstruction from moments with the Jacobi-Anger closed form.",
        parents=[_global_flags()],
    )
    common = _global_flags(defaults=False)
    parser.add_argument("--golden-update", action="store_true", help="regenerate the frozen regression values")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("moments", parents=[common], help="compute a moment file")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--corpus", choices=CORPUS_IDS)
    src.add_argument("--samples", help="text file with one sample per line")
    src.add_argument("--matrix", help="operator/state JSON file")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--domain", type=float, nargs=2, metavar=("A", "B"), help="support of the variable")
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN, help="spectral margin for --matrix")
    p.add_argument("--output", default="moments.json")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("estimate", parents=[common], help="JADE density from a moment file")
    p.add_argument("--moments", required=True)
    p.add_argument("--order", type=int, default=None, help="truncation order (default: all moments)")
    p.add_argument("--clip", action="store_true", help="clip negative values and renormalize")
    p.add_argument("--characteristic", action="store_true", help="also write the characteristic function")
    p.add_argument("--t-max", type=float, default=50.0)
    p.add_argument("--t-points", type=int, default=1001)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", parents=[common], help="compare estimators on a corpus density")
    p.add_argument("--reference", choices=CORPUS_IDS, required=True)
    p.add_argument("--methods", default="jade,gram-charlier,kde", help=f"comma list of {', '.join(COMPARE_METHODS)}")
    p.add_argument("--jade-moments", type=int, default=None)
    p.add_argument("--gc-cumulants", type=int, default=None)
    p.add_argument("--kde-samples", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("spectrum", parents=[common], help="energy distribution of an operator/state pair")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--matrix", help="operator/state JSON file")
    src.add_argument("--random-dim", type=int, default=SPECTRAL_DIM, help="seeded random problem of this size")
    width = p.add_mutually_exclusive_group()
    width.add_argument("--sigma", type=float, default=None, help="kernel width in physical units")
    width.add_argument("--sigma-fraction", type=float, default=0.02, help="kernel width / interval width")
    p.add_argument("--orders", type=_parse_orders, default=[20, 50, 100], help="comma list, e.g. 20,50,100")
    p.add_argument("--margin", type=float, default=DEFAULT_MARGIN)
    p.add_argument("--no-broaden", action="store_true", help="reconstruct the sharp spectrum instead")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("corpus", parents=[common], help="write corpus densities on the grid")
    p.add_argument("--id", choices=CORPUS_IDS + ("all",), default="all")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.golden_update:
        func = cmd_golden_update
    elif args.command is None:
        parser.print_help()
        return 2
    else:
        func = args.func
    os.makedirs(args.out_dir, exist_ok=True)
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            lines, report, notes, report_name = func(args)
        except (ValueError, DomainError, QuadratureError, SpectrumEscapeError, OSError, KeyError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
            print(f"error: {msg}", file=sys.stderr)
            return 1
    for w in caught:
        text = str(w.message)
        if text not in notes:
            notes.append(text)
    if report_name is not None:
        report["warnings"] = notes
        lines.append(f"wrote {_write_report(args, report_name, report)}")
    _emit(lines)
    for line in _warning_lines(notes):
        print(line, file=sys.stderr)
    if args.timings:
        print(f"wall time: {time.perf_counter() - start:.3f} s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
