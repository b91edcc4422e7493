"""Command-line driver.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import acceptance
from .bundle_expr import EvaluationError, ParseError, run_query
from .class_ring import BasePresentation, ClassRingError, GradedClass
from .curvature import chern_curvature, chern_ricci, griffiths_min, nakano_min
from .extremal import filter_positivity, verify_lemma_linear, verify_lemma_linear1
from .hopf import (
    HopfError,
    HopfParams,
    gauduchon_residual,
    hopf_curvature,
    hopf_grid,
    relative_tangent_bound,
    ricci_form,
    solve_phi,
    write_grid_csv,
)
from .metrics import fs_tensor, fubini_study_metric, product_fs_metric, product_fs_tensor, random_kahler_tensor
from .report import Report, check_eq, check_ge, check_in, check_le, check_true
from .tautological import taut_positivity_scan


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """``re+imi`` (also ``re``, ``imi``, ``re-imi``)."""
    t = text.strip().replace(" ", "")
    if t.endswith("i"):
        t = t[:-1] + "j"
    try:
        return complex(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number of the form re+imi: {text!r}") from None


def parse_base(text: str) -> BasePresentation:
    try:
        return BasePresentation.parse(text)
    except ClassRingError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", metavar="PATH", help="write the JSON report here")
    common.add_argument("--tol", type=float, default=None, help="override the main tolerance")

    p = argparse.ArgumentParser(prog="semipos", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classes", parents=[common], help="characteristic-class queries")
    c.add_argument("--base", type=parse_base, default=BasePresentation.parse("P2"))
    c.add_argument("--expr", help="query, e.g. 'integrate(s2(T (x) O(-1)))'")

    le = sub.add_parser("lemma", parents=[common], help="sectional-curvature lemmas")
    le.add_argument("--dim", type=_positive_int, default=2)
    le.add_argument("--samples", type=_positive_int, default=64)
    le.add_argument("--tensors", type=_positive_int, default=10, help="random Kahler tensors to test")

    ta = sub.add_parser("taut", parents=[common], help="tautological line bundle scans")
    ta.add_argument("--base", type=parse_base, default=BasePresentation.parse("P2"))
    ta.add_argument("--grid", type=_positive_int, default=8, help="base points")
    ta.add_argument("--samples", type=_positive_int, default=32, help="fiber directions")

    h = sub.add_parser("hopf", parents=[common], help="Hopf surface metrics")
    h.add_argument("--a", type=parse_complex, default=complex(np.exp(1.4)))
    h.add_argument("--b", type=parse_complex, default=complex(np.exp(0.6)))
    h.add_argument("--lambda1", type=float, default=None)
    h.add_argument("--lambda2", type=float, default=None)
    h.add_argument("--grid", type=_positive_int, default=10)
    h.add_argument("--samples", type=_positive_int, default=200, help="direction pairs per point")
    h.add_argument("--eps", type=float, default=None, help="also run the relative tangent bound")
    h.add_argument("--csv", metavar="PATH")

    e = sub.add_parser("engine", parents=[common], help="curvature engine oracles")
    e.add_argument("--base", type=parse_base, default=BasePresentation.parse("P2"))
    e.add_argument("--grid", type=_positive_int, default=4, help="random chart points")

    s = sub.add_parser("suite", parents=[common], help="the acceptance battery")
    s.add_argument("level", choices=["quick", "full"])
    return p


# subcommands -------------------------------------------------------------------

def cmd_classes(args, report: Report):
    if args.expr is not None:
        value = run_query(args.expr, args.base)
        text = value.to_text() if isinstance(value, GradedClass) else str(value)
        report.extra["result"] = text
        print(text)
        return
    for c in acceptance.criterion_1() + acceptance.criterion_2(seed=args.seed):
        report.checks.append(c)


def _fs_data(base: BasePresentation):
    dims = tuple(base.factors)
    if len(dims) == 1:
        return fubini_study_metric(dims[0]), fs_tensor(dims[0])
    return product_fs_metric(dims), product_fs_tensor(dims)


def cmd_lemma(args, report: Report):
    tol = 1e-7 if args.tol is None else args.tol
    report.tolerances["slack"] = tol
    rng = np.random.default_rng(args.seed)
    worst = {"min": np.inf, "max": np.inf}
    first = 0.0
    for k in range(args.tensors):
        R = random_kahler_tensor(args.dim, rng)
        for rep in (verify_lemma_linear(R, args.samples, args.seed + k),
                    verify_lemma_linear1(R, args.samples, args.seed + k)):
            worst[rep.mode] = min(worst[rep.mode], rep.min_slack, rep.exact_slack, rep.pair_slack)
            first = max(first, rep.first_order)
    report.checks += [
        check_ge("lemma.linear_slack", worst["min"], -tol),
        check_ge("lemma.linear1_slack", worst["max"], -tol),
        check_le("lemma.first_order", first, 1e-6),
    ]
    fs = filter_positivity(fs_tensor(args.dim), args.samples, args.seed)
    report.checks.append(check_ge("lemma.filter_fs", fs.exact_min - fs.bound, -tol))
    report.extra["fs_filter"] = fs.as_dict()


def cmd_taut(args, report: Report):
    metric, _ = _fs_data(args.base)
    rng = np.random.default_rng(args.seed)
    grid = acceptance._chart_grid(rng, metric.n, args.grid)
    scan = taut_positivity_scan(metric, grid, args.samples)
    tol = 1e-8 if args.tol is None else args.tol
    report.tolerances["min_eigenvalue"] = tol
    report.extra["scan"] = scan.as_dict()
    report.checks.append(check_ge("taut.min_eigenvalue", scan.min_eigenvalue, -tol))
    report.checks.append(check_true("taut.quasi_positive", scan.strictly_positive, scan.best_min, "> 0"))


def cmd_hopf(args, report: Report):
    P = HopfParams(args.a, args.b, args.lambda1, args.lambda2)
    grid = hopf_grid(P, args.grid)
    tol = 1e-8 if args.tol is None else args.tol
    report.tolerances["main"] = tol
    report.extra["alpha"] = P.alpha
    res = a1 = det = 0.0
    psd = ric_psd = np.inf
    for z, w in grid:
        pv = solve_phi(P, z, w)
        res = max(res, abs(pv.residual))
        if P.alpha == 1:
            a1 = max(a1, abs(pv.phi / (abs(z) ** 2 + abs(w) ** 2) - 1))
        tr = float(np.trace(pv.m_log).real)
        det = max(det, abs(float(np.linalg.det(pv.m_log).real)) / tr ** 2)
        psd = min(psd, float(np.linalg.eigvalsh(pv.m_log)[0]))
        ric_psd = min(ric_psd, float(np.linalg.eigvalsh(ricci_form(P, (z, w)))[0]))
    report.checks += [
        check_le("hopf.phi_residual", res, 1e-12),
        check_le("hopf.mlog_scaled_det", det, 1e-10),
        check_ge("hopf.mlog_min_eig", psd, -1e-10),
        check_ge("hopf.ricci_min_eig", ric_psd, -1e-10),
    ]
    if P.alpha == 1:
        report.checks.append(check_le("hopf.phi_alpha1_relerr", a1, 1e-12))
    gaud = max(gauduchon_residual(P, z, w) for z, w in grid)
    if P.canonical:
        report.checks.append(check_le("hopf.gauduchon_residual", gaud, tol))
        worst = min(hopf_curvature(P, pt, seed=args.seed + k, pairs=args.samples)[1].min_value
                    for k, pt in enumerate(grid))
        report.checks.append(check_ge("hopf.griffiths_min", worst, -tol))
    else:
        report.extra["gauduchon_residual"] = gaud
    if args.eps is not None:
        lam1 = 1.0 if args.lambda1 is None else args.lambda1
        rt = relative_tangent_bound(P, lam1, args.lambda2, eps=args.eps, base_grid=grid)
        report.extra["relative_tangent"] = {"lambda2": rt.lambda2, "bound": rt.bound,
                                            "history": [list(h) for h in rt.history]}
        report.checks.append(check_ge("hopf.relative_tangent_bound", rt.bound, -args.eps))
    if args.csv:
        write_grid_csv(args.csv, P, grid, seed=args.seed)


def cmd_engine(args, report: Report):
    metric, tensor = _fs_data(args.base)
    n = metric.n
    rng = np.random.default_rng(args.seed)
    pts = [np.zeros(n, dtype=complex)] + [
        0.7 * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) for _ in range(args.grid)]
    err = max(float(np.max(np.abs(chern_curvature(metric, p).data - tensor.data))) for p in pts)
    tol = 1e-8 if args.tol is None else args.tol
    report.tolerances["curvature"] = tol
    report.checks.append(check_le("engine.fs_curvature", err, tol))
    if len(args.base.factors) == 1:
        ric = chern_ricci(metric, np.zeros(n))
        report.checks.append(check_le("engine.fs_ricci", float(np.max(np.abs(ric - (n + 1) * np.eye(n)))), 1e-6))
    report.extra["griffiths_min"] = griffiths_min(tensor, seed=args.seed).min_value
    report.extra["nakano_min"] = nakano_min(tensor)


def cmd_suite(args, report: Report):
    checks, timing = acceptance.run_battery(args.level, args.seed)
    report.checks += checks
    report.runtime["criteria"] = timing


COMMANDS = {
    "classes": cmd_classes,
    "lemma": cmd_lemma,
    "taut": cmd_taut,
    "hopf": cmd_hopf,
    "engine": cmd_engine,
    "suite": cmd_suite,
}


def run(argv=None) -> tuple[int, Report | None]:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return (0 if exc.code == 0 else 2), None
    report = Report(command=argv, seed=args.seed)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, report)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2, None
    except (EvaluationError, ClassRingError, HopfError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2, None
    report.runtime["total"] = time.perf_counter() - t0
    for c in report.sorted_checks():
        print(c.line())
    if report.checks:
        n_fail = sum(not c.passed for c in report.checks)
        print(f"{len(report.checks) - n_fail}/{len(report.checks)} checks passed")
    if args.json:
        report.write(args.json)
    return (0 if report.passed else 1), report


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
