"""The acceptance battery: one function per criterion, each returning checks.

``level="full"`` uses the stated sample sizes; ``"quick"`` shrinks them.
"""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np

from . import class_ring as cr
from .bundle_expr import run_query
from .curvature import chern_curvature, chern_ricci, complex_derivatives
from .extremal import verify_lemma_linear, verify_lemma_linear1
from .hopf import (
    HopfParams,
    fundamental_points,
    gauduchon_residual,
    hopf_curvature,
    hopf_diff_config,
    hopf_grid,
    phi_batch,
    random_points,
    relative_tangent_bound,
    solve_phi,
    solve_phi_array,
)
from .metrics import (
    flat_metric,
    flat_torus_metric,
    fs_tensor,
    fubini_study_metric,
    product_fs_metric,
    random_kahler_tensor,
)
from .report import Check, check_eq, check_ge, check_in, check_le
from .tautological import taut_curvature_at, taut_positivity_scan

BUDGETS = {1: 1, 2: 5, 3: 10, 4: 30, 5: 60, 6: 60, 7: 120, 8: 30, 9: 60, 10: 60}
TITLES = {
    1: "exact class numbers",
    2: "pushforward identity",
    3: "Hopf potential solver",
    4: "closed-form d dbar log Phi",
    5: "Gauduchon condition",
    6: "Hopf Griffiths semipositivity",
    7: "sectional-curvature lemmas",
    8: "curvature engine oracles",
    9: "tautological positivity",
    10: "relative tangent bound",
}

EQUIVARIANCE_PAIRS = [
    (2.0, 2.0),
    (3.0, 2.0),
    (np.exp(1.4), np.exp(0.6)),
    (2.5 * np.exp(1j), 1.5 * np.exp(-0.4j)),
    (4j, 1.2),
]


def _size(level, full, quick):
    return full if level == "full" else quick


def criterion_1(level="full", seed=0):
    c2 = run_query("c2(T)", "P2")
    return [
        check_eq("classes.c2_TP2", cr.integrate(c2), Fraction(3)),
        check_eq("classes.s2_TP2_twist", run_query("integrate(s2(T (x) O(-1)))", "P2"), Fraction(0)),
    ]


def criterion_2(level="full", seed=0):
    rng = np.random.default_rng(seed)
    bases = [cr.BasePresentation.parse(b) for b in ("P1", "P2", "P3", "P1xP1", "P1xP2")]
    count = _size(level, 100, 30)
    bad = 0
    for k in range(count):
        base = bases[k % len(bases)]
        E = cr.random_bundle(base, rng)
        ring = cr.projectivize(E)
        n, r = base.dim, E.rank
        lhs = ring.integrate(ring.xi() ** (n + r - 1))
        rhs = (-1) ** n * cr.integrate(cr.segre_from_chern(E).part(n))
        bad += lhs != rhs
    TP2 = cr.tangent_bundle(cr.BasePresentation.parse("P2"))
    Y = cr.projectivize(TP2)
    return [
        check_eq("pushforward.random_mismatches", bad, 0),
        check_eq("pushforward.xi_cube_TP2", Y.integrate(Y.xi() ** 3), Fraction(6)),
        check_eq("pushforward.anticanonical_cube", Y.integrate((-Y.canonical_class()) ** 3), Fraction(48)),
    ]


def criterion_3(level="full", seed=0):
    rng = np.random.default_rng(seed)
    count = _size(level, 1000, 200)
    pts = random_points(rng, count)
    zz = np.array([abs(z) ** 2 for z, _ in pts])
    ww = np.array([abs(w) ** 2 for _, w in pts])
    phi = solve_phi_array(1.0, zz, ww, shortcut=False)
    err1 = float(np.max(np.abs(phi / (zz + ww) - 1)))

    worst = 0.0
    for a, b in EQUIVARIANCE_PAIRS:
        P = HopfParams(a, b)
        al = P.alpha
        base = solve_phi_array(al, zz, ww)
        moved = solve_phi_array(al, abs(a) ** 2 * zz, abs(b) ** 2 * ww)
        worst = max(worst, float(np.max(np.abs(moved - abs(a) * abs(b) * base) / (abs(a) * abs(b) * base))))

    res = 0.0
    big = random_points(rng, _size(level, 10000, 1000))
    zz2 = np.array([abs(z) ** 2 for z, _ in big])
    ww2 = np.array([abs(w) ** 2 for _, w in big])
    for al in (1.0, 1.2, 1.4, 1.8):
        ph = solve_phi_array(al, zz2, ww2, shortcut=False)
        res = max(res, float(np.max(np.abs(zz2 * ph ** -al + ww2 * ph ** (al - 2) - 1))))
    return [
        check_le("hopf.phi_alpha1_relerr", err1, 1e-12),
        check_le("hopf.phi_equivariance_relerr", worst, 1e-10),
        check_le("hopf.phi_residual", res, 1e-12),
    ]


def criterion_4(level="full", seed=0):
    rng = np.random.default_rng(seed)
    count = _size(level, 1000, 120)
    alphas = (1.0, 1.2, 1.4, 1.8)
    fd_err = det_err = 0.0
    psd = np.inf
    for k in range(count):
        P = HopfParams.from_alpha(alphas[k % len(alphas)])
        (z, w), = fundamental_points(P, rng, 1)
        pv = solve_phi(P, z, w)
        d0, H = complex_derivatives(phi_batch(P), np.array([z, w]), hopf_diff_config(P.alpha), batch=True)
        fd_log = H / pv.phi - np.outer(d0, d0.conj()) / pv.phi ** 2
        fd_err = max(fd_err, float(np.max(np.abs(fd_log - pv.m_log)) / np.max(np.abs(pv.m_log))))
        tr = float(np.trace(pv.m_log).real)
        det_err = max(det_err, abs(float(np.linalg.det(pv.m_log).real)) / tr ** 2)
        psd = min(psd, float(np.linalg.eigvalsh(pv.m_log)[0]))
    return [
        check_le("hopf.mlog_fd_relerr", fd_err, 1e-6),
        check_le("hopf.mlog_scaled_det", det_err, 1e-10),
        check_ge("hopf.mlog_min_eig", psd, -1e-10),
    ]


def criterion_5(level="full", seed=0):
    n = _size(level, 20, 8)
    out = []
    for al in (1.0, 1.2, 1.4, 1.8):
        P = HopfParams.from_alpha(al)
        grid = hopf_grid(P, n)
        closed = max(gauduchon_residual(P, z, w, "closed") for z, w in grid)
        fd = max(gauduchon_residual(P, z, w, "fd") for z, w in grid)
        out.append(check_le(f"hopf.gauduchon_alpha{al:g}", closed, 1e-8))
        out.append(check_le(f"hopf.gauduchon_fd_alpha{al:g}", fd, 1e-6))
    P = HopfParams.from_alpha(1.4, lambda1=1.0, lambda2=1.0)
    neg = max(gauduchon_residual(P, z, w) for z, w in hopf_grid(P, n))
    out.append(check_ge("hopf.gauduchon_negative_control", neg, 1e-4))
    return out


def criterion_6(level="full", seed=0):
    n = _size(level, 20, 6)
    pairs = _size(level, 1000, 200)
    out = []
    for al in (1.4, 1.8):
        P = HopfParams.from_alpha(al)
        worst = np.inf
        for k, pt in enumerate(hopf_grid(P, n)):
            _, rep = hopf_curvature(P, pt, seed=seed + k, restarts=8, pairs=pairs)
            worst = min(worst, rep.min_value)
        out.append(check_ge(f"hopf.griffiths_min_alpha{al:g}", worst, -1e-8))
    return out


def criterion_7(level="full", seed=0):
    rng = np.random.default_rng(seed)
    count = _size(level, 200, 30)
    worst = {"min": [np.inf, 0.0, np.inf], "max": [np.inf, 0.0, np.inf]}
    for k in range(count):
        R = random_kahler_tensor(2 + k % 2, rng)
        for rep in (verify_lemma_linear(R, seed=seed + k), verify_lemma_linear1(R, seed=seed + k)):
            w = worst[rep.mode]
            w[0] = min(w[0], rep.min_slack, rep.exact_slack)
            w[1] = max(w[1], rep.first_order)
            w[2] = min(w[2], rep.pair_slack)
    out = []
    for mode, name in (("min", "lemma.linear"), ("max", "lemma.linear1")):
        slack, first, pair = worst[mode]
        out.append(check_ge(f"{name}_slack", slack, -1e-7))
        out.append(check_le(f"{name}_first_order", first, 1e-6))
        out.append(check_ge(f"{name}_pair_slack", pair, -1e-7))
    return out


def criterion_8(level="full", seed=0):
    R = chern_curvature(fubini_study_metric(2), np.zeros(2))
    fs_err = float(np.max(np.abs(R.data - fs_tensor(2).data)))
    ric = chern_ricci(fubini_study_metric(2), np.zeros(2))
    ric_err = float(np.max(np.abs(ric - 3 * np.eye(2))))
    rng = np.random.default_rng(seed)
    flat = 0.0
    for m in (flat_metric(2), flat_torus_metric(2), flat_torus_metric(3)):
        for _ in range(3):
            p = rng.standard_normal(m.n) + 1j * rng.standard_normal(m.n)
            flat = max(flat, float(np.max(np.abs(chern_curvature(m, p).data))))
    return [
        check_le("engine.fs_origin", fs_err, 1e-8),
        check_le("engine.fs_ricci", ric_err, 1e-6),
        check_le("engine.flat_zero", flat, 1e-10),
    ]


def _chart_grid(rng, n, count, radius=0.8):
    pts = [np.zeros(n, dtype=complex)]
    while len(pts) < count:
        pts.append(radius * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2 * n))
    return pts


def criterion_9(level="full", seed=0):
    rng = np.random.default_rng(seed)
    count = _size(level, 16, 5)
    fibers = _size(level, 48, 16)
    fs = taut_positivity_scan(fubini_study_metric(2), _chart_grid(rng, 2, count), fibers)
    R0 = chern_curvature(fubini_study_metric(2), np.zeros(2))
    spot = float(np.max(np.abs(taut_curvature_at(R0, [0, 1]) - np.diag([1.0, 2.0, 1.0]))))
    pp = taut_positivity_scan(product_fs_metric((1, 1)), _chart_grid(rng, 2, count), fibers)
    return [
        check_ge("taut.fs_p2_min", fs.min_eigenvalue, 1 - 1e-6),
        check_le("taut.fs_p2_spot_diag121", spot, 1e-6),
        check_in("taut.p1xp1_min", pp.min_eigenvalue, -1e-8, 1e-6),
        check_ge("taut.p1xp1_best_sample", pp.best_min, 0.1),
    ]


def criterion_10(level="full", seed=0):
    P1 = HopfParams.from_alpha(1.0)
    grid1 = hopf_grid(P1, _size(level, 8, 4))
    r1 = min(relative_tangent_bound(P1, 1.0, lam, eps=0.0, base_grid=grid1, fiber_samples=16).bound
             for lam in (1.0, 7.0, 1e3))
    P = HopfParams.from_alpha(1.4)
    r = relative_tangent_bound(P, 1.0, None, eps=0.01, base_grid=hopf_grid(P, _size(level, 6, 4)),
                               fiber_samples=_size(level, 16, 8))
    return [
        check_ge("relative.alpha1_min_eig", r1, -1e-10),
        check_ge("relative.alpha1.4_doubling", r.bound, -0.01),
    ]


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


def run_criterion(k: int, level="full", seed=0):
    """Run one criterion; returns ``(checks, seconds)``.  Exceptions become failing checks."""
    t0 = time.perf_counter()
    try:
        checks = CRITERIA[k](level, seed)
    except Exception as exc:  # a crash is a failure of the criterion, not of the battery
        checks = [Check(f"criterion{k}.error", False, f"{type(exc).__name__}: {exc}", "no exception")]
    dt = time.perf_counter() - t0
    for c in checks:
        c.criterion = str(k)
    return checks, dt


def run_battery(level="full", seed=0, only=None):
    checks, timing = [], {}
    for k in sorted(CRITERIA):
        if only and k not in only:
            continue
        cs, dt = run_criterion(k, level, seed)
        checks += cs
        timing[str(k)] = dt
    return checks, timing
