"""Command-line interface.

Every subcommand prints a one-line summary on success.  Output files are
written atomically.  Exit status: 0 success, 1 usage error, 2 invalid input,
3 numerical failure; failures also print a JSON error record on stderr.
Component indices on the command line and in output files are 1-based.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import curvature, em, model, oracle, piplot, ridgeline, topo
from .roots import composite_grid
from .errors import NumericalFailure, TopographyError

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(TopographyError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --------------------------------------------------------------------------
# formatting


def fmt(v) -> str:
    """12 significant digits, as used in every CSV cell."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return f"{float(v):.12g}"


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else None
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def _write(path, text: str) -> None:
    if path:
        model.write_text_atomic(path, text)


def _pair(m: model.Mixture, pair) -> tuple[int, int]:
    if pair is None:
        if m.k != 2:
            raise UsageError(f"--pair is required when the model has {m.k} components")
        return 0, 1
    i, j = pair
    if not (1 <= i <= m.k and 1 <= j <= m.k) or i == j:
        raise InputError(f"--pair {i} {j}: indices must be distinct and within 1..{m.k}")
    return i - 1, j - 1


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> str:
    m = model.load_mixture(args.model)
    return f"valid: K={m.k}, D={m.dim}"


def cmd_analyze(args) -> str:
    m = model.load_mixture(args.model)
    report = topo.full_topography(m, resolution=args.resolution, n_starts=args.starts, seed=args.seed)
    out = report.to_dict()
    if not args.no_verify:
        out["verification"] = oracle.verify_report(m, report, seed=args.seed).to_dict()
    _write(args.out, json_text(out))
    if not args.out:
        sys.stdout.write(json_text(out))
    return report.summary()


def cmd_elevation(args) -> str:
    m = model.load_mixture(args.model)
    i, j = _pair(m, args.pair)
    sub = m.submixture([i, j])
    prof = ridgeline.elevation_profile(sub, args.samples, axis="arclength")
    rows = [[a, s, *x, h] for a, s, x, h in zip(prof.alpha, prof.arclength, prof.x, prof.h)]
    header = ["alpha", "arclength"] + [f"x_{d + 1}" for d in range(m.dim)] + ["h"]
    _write(args.csv, csv_text(header, rows))
    if args.svg:
        from . import plots

        xs = prof.alpha if args.x == "alpha" else prof.arclength
        plots.line_plot(args.svg, xs, {"h": prof.h}, args.x, "elevation h")
    nmax, nmin = len(prof.local_maxima()), len(prof.local_minima())
    return f"{nmax} local maxima, {nmin} local minima along the ridgeline of pair {i + 1}-{j + 1}"


def _band_summary(b: piplot.ModalityBands) -> str:
    parts = [str(b.bands[0].modes)]
    for band in b.bands[1:]:
        parts += [f"{band.lo:.6g}", str(band.modes)]
    return " | ".join(parts)


def cmd_pi(args) -> str:
    m = model.load_mixture(args.model)
    i, j = _pair(m, args.pair)
    curve = piplot.pi_curve(m, i, j, args.samples)
    _write(args.csv, csv_text(["alpha", "pi"], zip(curve.alpha, curve.pi)))
    bands = piplot.modality_bands(m, i, j)
    _write(args.bands, json_text(bands.to_dict()))
    if args.svg:
        from . import plots

        levels = [args.level] if args.level is not None else []
        plots.line_plot(args.svg, curve.alpha, {"Pi": curve.pi}, "alpha", "Pi", hlines=levels)
    text = f"modes by pi for pair {i + 1}-{j + 1}: {_band_summary(bands)}"
    if args.level is not None:
        n = piplot.mode_count(m, i, j, args.level)
        text += f"; {n} mode{'s' if n != 1 else ''} at pi={args.level:g}"
    return text


def cmd_curvature(args) -> str:
    m = model.load_mixture(args.model)
    i, j = _pair(m, args.pair)
    ts = composite_grid(args.samples)
    p, q, k = curvature.curvature_arrays(m, i, j, ts)
    _write(args.csv, csv_text(["alpha", "p", "q", "kappa"], zip(ts, p, q, k)))
    report = curvature.special_case_analysis(m, i, j)
    _write(args.out, json_text(report.to_dict()))
    if args.svg:
        from . import plots

        plots.line_plot(args.svg, ts, {"kappa": k}, "alpha", "kappa", hlines=[0.0])
    verdict = "unimodal for every pi" if report.unimodal_for_all_pi else "bimodal for some pi"
    return f"{report.case.value}: {verdict}, {len(report.root_alphas)} curvature zeroes"


def cmd_contour(args) -> str:
    m = model.load_mixture(args.model)
    grid = ridgeline.simplex_grid_elevation(m, args.resolution)
    rows = [[*a, x, y, h, flag] for a, x, y, h, flag in
            zip(grid.alpha, grid.tx, grid.ty, grid.h, grid.is_local_max)]
    _write(args.csv, csv_text(["a1", "a2", "a3", "tx", "ty", "h", "is_local_max"], rows))
    if args.svg:
        from . import plots

        plots.triangle_contour(args.svg, grid.tx, grid.ty, grid.h, grid.is_local_max)
    n = int(np.sum(grid.is_local_max))
    return f"{n} grid maxima at resolution {args.resolution}"


def cmd_linkage(args) -> str:
    m = model.load_mixture(args.model)
    graph = topo.linkage_graph(m, high_pass_tau=args.tau, equal_weights=args.equal_weights)
    _write(args.out, json_text(graph.to_dict()))
    _write(args.dot, graph.to_dot())
    blocks = ", ".join("{" + ",".join(str(n + 1) for n in b) + "}" for b in graph.supercomponents)
    n = len(graph.supercomponents)
    return f"{n} supercomponent{'s' if n != 1 else ''}: {blocks}"


def cmd_fit(args) -> str:
    data = em.load_csv(args.data, has_header=args.header)
    res = em.fit_em(data, args.k, n_seeds=args.seeds, seed=args.seed, max_iter=args.max_iter, tol=args.tol)
    text = json_text(res.mixture.to_dict())
    _write(args.out, text)
    if not args.out:
        sys.stdout.write(text)
    return f"fitted K={args.k} to {data.rows}x{data.cols} data, log-likelihood {res.log_likelihood:.6f}"


def cmd_oracle(args) -> str:
    m = model.load_mixture(args.model)
    report = topo.full_topography(m, resolution=args.resolution, seed=args.seed)
    grid = oracle.default_grid(m, args.points) if m.dim <= oracle.MAX_GRID_DIM else None
    diag = oracle.verify_report(m, report, grid=grid, seed=args.seed)
    _write(args.out, json_text(diag.to_dict()))
    failed = [c.name for c in diag.checks if not c.passed]
    return "all checks passed" if not failed else "failed: " + ", ".join(failed)


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    fmt_cls = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="ridgetopo", description="Modes and saddles of Gaussian mixtures via the ridgeline.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, formatter_class=fmt_cls)

    def pair_arg(p):
        p.add_argument("--pair", nargs=2, type=int, metavar=("I", "J"),
                       help="1-based component pair; required unless K = 2")

    p = add("validate", "check a model JSON file")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = add("analyze", "find and classify every critical point")
    p.add_argument("model")
    p.add_argument("--out", help="report JSON path (stdout if omitted)")
    p.add_argument("--resolution", type=int, default=400, help="simplex grid resolution for K = 3")
    p.add_argument("--starts", type=int, default=topo.N_MULTISTART, help="multistart count for K >= 4")
    p.add_argument("--seed", type=int, default=0, help="seed for multistart and verification points")
    p.add_argument("--no-verify", action="store_true", help="skip the brute-force cross-check")
    p.set_defaults(func=cmd_analyze)

    p = add("elevation", "elevation profile along a pair ridgeline")
    p.add_argument("model")
    pair_arg(p)
    p.add_argument("--samples", type=int, default=4096, help="uniform samples (endpoint ladders added)")
    p.add_argument("--x", choices=("alpha", "arclength"), default="alpha", help="SVG horizontal axis")
    p.add_argument("--csv", help="profile CSV path")
    p.add_argument("--svg", help="profile plot path")
    p.set_defaults(func=cmd_elevation)

    p = add("pi", "Pi-function curve and modality bands of a pair")
    p.add_argument("model")
    pair_arg(p)
    p.add_argument("--samples", type=int, default=4096, help="uniform samples (endpoint ladders added)")
    p.add_argument("--level", type=float, help="also count modes at this pair proportion")
    p.add_argument("--csv", help="curve CSV path")
    p.add_argument("--bands", help="bands JSON path")
    p.add_argument("--svg", help="curve plot path")
    p.set_defaults(func=cmd_pi)

    p = add("curvature", "curvature function and closed-form special cases of a pair")
    p.add_argument("model")
    pair_arg(p)
    p.add_argument("--samples", type=int, default=4096, help="uniform samples (endpoint ladders added)")
    p.add_argument("--csv", help="curvature CSV path")
    p.add_argument("--out", help="special-case report JSON path")
    p.add_argument("--svg", help="kappa plot path")
    p.set_defaults(func=cmd_curvature)

    p = add("contour", "elevation over the 2-simplex (K = 3)")
    p.add_argument("model")
    p.add_argument("--resolution", type=int, default=400, help="lattice divisions per simplex edge")
    p.add_argument("--csv", help="grid CSV path")
    p.add_argument("--svg", help="contour plot path")
    p.set_defaults(func=cmd_contour)

    p = add("linkage", "pairwise linkage graph and supercomponents")
    p.add_argument("model")
    p.add_argument("--tau", type=float, default=None,
                   help="also link bimodal pairs whose saddle/peak ratio is at least tau (no default)")
    p.add_argument("--equal-weights", action="store_true", help="use pair proportion 0.5")
    p.add_argument("--out", help="graph JSON path")
    p.add_argument("--dot", help="Graphviz DOT path")
    p.set_defaults(func=cmd_linkage)

    p = add("fit", "fit a full-covariance mixture to CSV data by EM")
    p.add_argument("data")
    p.add_argument("--k", type=int, required=True, help="number of components")
    p.add_argument("--seeds", type=int, default=50, help="EM restarts")
    p.add_argument("--seed", type=int, default=0, help="root seed for the restarts")
    p.add_argument("--max-iter", type=int, default=1000, help="EM iterations per restart")
    p.add_argument("--tol", type=float, default=1e-8, help="relative log-likelihood change")
    p.add_argument("--header", action="store_true", help="first row holds column names")
    p.add_argument("--out", help="model JSON path (stdout if omitted)")
    p.set_defaults(func=cmd_fit)

    p = add("oracle", "cross-check the topography against brute-force search")
    p.add_argument("model")
    p.add_argument("--points", type=int, default=None, help="grid points per dimension (401 for D<=2, 121 for D=3)")
    p.add_argument("--resolution", type=int, default=400, help="simplex grid resolution for K = 3")
    p.add_argument("--seed", type=int, default=0, help="seed for the random derivative checks")
    p.add_argument("--out", help="diagnostics JSON path")
    p.set_defaults(func=cmd_oracle)
    return parser


def _fail(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        summary = args.func(args)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except NumericalFailure as exc:
        return _fail(EXIT_NUMERIC, type(exc).__name__, str(exc))
    except (TopographyError, ValueError, OSError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    except np.linalg.LinAlgError as exc:
        return _fail(EXIT_NUMERIC, "LinAlgError", str(exc))
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
