"""
Command-line front end.

Exit codes: 0 success, 2 bad input or arguments, 3 lambda out of range or
singular diagonal, 4 some lambda did not converge (the partial report is
still written), 5 unknown experiment.
"""
import argparse
import io as _stringio
import sys

import numpy as np

from . import experiments as ex
from .exceptions import (
    DidNotConverge,
    InsufficientData,
    LambdaOutOfRange,
    MatrixFormatError,
    SingularD,
)
from .io import dumps, matrix_to_dict, parse_d, read_matrix, write_trace_csv
from .linalg import char_poly, frobenius_norm, normality_defect
from .tangent import DerivativeModel, DiagonalPoint, build_model
from .transform import DEFAULT_GRID, StopPolicy, aluthge, check_lambda, r_map

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_RANGE = 3
EXIT_NOCONV = 4
EXIT_UNKNOWN = 5

EXPERIMENTS = ("section44", "reflection", "permutation", "con-dos", "witness", "conjecture", "rates")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _grid(text):
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda grid {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float)
    common.add_argument("--lambda-grid", type=_grid)
    common.add_argument("--step-tol", type=float, help="absolute; default 1e-11 * ||T||")
    common.add_argument("--normality-tol", type=float, help="absolute; default 1e-9 * ||T||")
    common.add_argument("--max-iters", type=int, default=20000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int)
    common.add_argument("--cond-bound", type=float, default=20.0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", help="output path; stdout when omitted")
    common.add_argument("--d", help="diagonal: JSON list, [re, im] pairs, polar objects or cube-roots")

    p = _Parser(prog="aluthge", description="lambda-Aluthge transform toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", parents=[common], help="one transform step")
    t.add_argument("input")
    t.add_argument("--sidecar", help="sidecar JSON path; defaults to OUT.sidecar.json or stderr")

    lim = sub.add_parser("limit", parents=[common], help="limits over a lambda grid")
    lim.add_argument("input")

    sub.add_parser("model", parents=[common], help="derivative model at diag(d)")

    e = sub.add_parser("experiment", parents=[common], help="run a named experiment")
    e.add_argument("name")
    return p


def _policy(args, t):
    base = StopPolicy.for_matrix(t, max_iters=args.max_iters)
    return StopPolicy(
        args.step_tol if args.step_tol is not None else base.step_tol,
        args.normality_tol if args.normality_tol is not None else base.normality_tol,
        args.max_iters,
    )


def _emit(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_transform(args):
    if args.lam is None:
        raise LambdaOutOfRange("--lambda is required")
    lam = check_lambda(args.lam)
    mf = read_matrix(args.input)
    t = mf.matrix
    out = aluthge(t, lam)
    side = {
        "lambda": lam,
        "char_poly_before": char_poly(t),
        "char_poly_after": char_poly(out),
        "norm_before": frobenius_norm(t),
        "norm_after": frobenius_norm(out),
        "normality_defect_before": normality_defect(t),
        "normality_defect_after": normality_defect(out),
    }
    _emit(dumps(matrix_to_dict(out, mf.label, mf.seed)), args.out)
    path = args.sidecar or (args.out + ".sidecar.json" if args.out else None)
    if path:
        _emit(dumps(side), path)
    else:
        sys.stderr.write(dumps(side))
    return EXIT_OK


def _lambdas(args, default=DEFAULT_GRID):
    if args.lambda_grid:
        return args.lambda_grid
    if args.lam is not None:
        return [args.lam]
    return list(default)


def cmd_limit(args):
    lambdas = [check_lambda(x) for x in _lambdas(args)]
    t = read_matrix(args.input).matrix
    scan = r_map(t, lambdas, _policy(args, t))
    rows = []
    for lam, tr in zip(scan.lambdas, scan.traces):
        rho = None
        if tr.converged:
            try:
                rho, _ = ex.rate_fit(tr, ex.reference_limit(tr))
            except InsufficientData:
                rho = None
        rows.append({
            "lambda": lam,
            "limit": tr.final,
            "n_steps": tr.n_steps,
            "stop_reason": tr.stop_reason,
            "normality_defect": normality_defect(tr.final),
            "rho_hat": rho,
        })
    report = {"lambdas": scan.lambdas, "results": rows, "dispersion": scan.dispersion,
              "all_converged": scan.all_converged}
    if args.format == "csv":
        buf = _stringio.StringIO()
        write_trace_csv(buf, scan.traces, scan.limits)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(dumps(report), args.out)
    if not scan.all_converged:
        bad = [f"{lam}:{s.value}" for lam, s in zip(scan.lambdas, scan.per_lambda_status)
               if s.value != "Converged"]
        sys.stderr.write(f"no convergence at {', '.join(bad)}\n")
        return EXIT_NOCONV
    return EXIT_OK


def model_report(model: DerivativeModel):
    out = {"d": model.point.d, "lambda": model.lam, "k": model.k}
    for name in DerivativeModel.MATRIX_FIELDS:
        out[name] = getattr(model, name)
    return out


def cmd_model(args):
    if args.d is None:
        raise MatrixFormatError("--d is required")
    d = parse_d(args.d)
    if args.lam is None:
        raise LambdaOutOfRange("--lambda is required")
    model = build_model(DiagonalPoint(d), args.lam)
    _emit(dumps(model_report(model)), args.out)
    return EXIT_OK


def _split_two(d):
    vals = []
    for z in d:
        if not any(abs(z - v) <= 1e-12 * max(abs(z), 1.0) for v in vals):
            vals.append(z)
    if len(vals) != 2:
        raise MatrixFormatError("con-dos needs exactly two distinct diagonal values")
    counts = [int(sum(abs(z - v) <= 1e-12 * max(abs(z), 1.0) for z in d)) for v in vals]
    if counts[0] > counts[1]:
        vals.reverse()
        counts.reverse()
    return vals[0], vals[1], counts[0], counts[1]


def run_experiment(name, args):
    """Dispatch to an experiment; returns ``(report, summary_line)``."""
    seed = args.seed
    if name == "section44":
        rep = ex.reproduce_section44()
        return rep, f"section44: {'pass' if rep['passed'] else 'FAIL'} " + ", ".join(
            f"lambda={r['lambda']} dev={r['max_abs_deviation']:.2e}" for r in rep["results"])
    if name == "reflection":
        lam = 0.5 if args.lam is None else args.lam
        rep = ex.reflection_oracle(seed, lam=lam, cond_bound=args.cond_bound)
        return rep, (f"reflection: {'pass' if rep['passed'] else 'FAIL'} lambda={rep['lambda']} "
                     f"n_steps={rep['n_steps']} one_step_error={rep['one_step_error']:.2e}")
    if name == "permutation":
        rep = ex.permutation_example(lambdas=_lambdas(args, (0.1, 0.3, 0.5, 0.7, 0.9)))
        return rep, (f"permutation: {'pass' if rep['passed'] else 'FAIL'} "
                     f"dispersion={rep['dispersion']:.2e}")
    if name == "con-dos":
        d = parse_d(args.d) if args.d else np.array([2.0, -2.0])
        d1, d2, n, k = _split_two(d)
        rep = ex.two_eigenvalue_constancy(d1, d2, n, k, seed=seed, samples=args.samples or 1,
                                          lambdas=_lambdas(args))
        return rep, (f"con-dos: {'pass' if rep['passed'] else 'FAIL'} "
                     f"max_dispersion={rep['max_dispersion']:.2e}")
    if name == "witness":
        d = parse_d(args.d) if args.d else np.array([3.0, 1.0])
        rep = ex.nonconstancy_witness(d, seed=seed, samples=args.samples or 10,
                                      lambdas=_lambdas(args, (0.3, 0.7)), cond_bound=args.cond_bound)
        return rep, f"witness: {rep['status']} tried={len(rep['dispersions_tried'])}"
    if name == "conjecture":
        d = parse_d(args.d) if args.d else ex.CUBE_ROOTS
        rep = ex.conjecture_probe(d, samples=args.samples or 50, seed=seed,
                                  lambdas=_lambdas(args, (0.3, 0.7)), cond_bound=args.cond_bound)
        lines = [f"conjecture: samples={len(rep['dispersions'])} "
                 f"max_dispersion={rep['max_dispersion']:.3e} at index {rep['argmax']}"]
        lines += [f"  {i:3d}  {v:.3e}" for i, v in enumerate(rep["dispersions"])]
        return rep, "\n".join(lines)
    if name == "rates":
        rep = ex.rate_suite(seed=seed, cases=args.samples or 30)
        return rep, (f"rates: {'pass' if rep['passed'] else 'FAIL'} "
                     f"max(rho_hat - k)={rep['max_excess']:.3e}")
    raise KeyError(name)


def cmd_experiment(args):
    if args.name not in EXPERIMENTS:
        sys.stderr.write(f"unknown experiment {args.name!r}; choose from {', '.join(EXPERIMENTS)}\n")
        return EXIT_UNKNOWN
    report, summary = run_experiment(args.name, args)
    text = dumps(report)
    if args.out:
        _emit(text, args.out)
        sys.stdout.write(summary + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(summary + "\n")
    return EXIT_OK


COMMANDS = {"transform": cmd_transform, "limit": cmd_limit, "model": cmd_model,
            "experiment": cmd_experiment}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except MatrixFormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except (LambdaOutOfRange, SingularD) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RANGE
    except DidNotConverge as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOCONV


if __name__ == "__main__":
    sys.exit(main())
