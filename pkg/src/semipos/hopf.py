"""Explicit Gauduchon metrics on diagonal Hopf surfaces ``H_{a,b}``.

Everything lives on the cover ``C^2 \\ {0}``.  The potential ``Phi > 0`` is the
unique root of

    |z|^2 Phi^{-alpha} + |w|^2 Phi^{alpha - 2} = 1,   alpha = 2 log|a| / (log|a| + log|b|),

and ``Delta = alpha |z|^2 Phi^{-alpha} + (2 - alpha) |w|^2 Phi^{alpha - 2}``.
Matrices below use the convention ``M[i, j] = d^2 / dz^i dzbar^j`` with
``(z^1, z^2) = (z, w)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import (
    CurvatureTensor,
    DiffConfig,
    MetricField,
    PositivityReport,
    complex_derivatives,
    griffiths_min,
    random_unit,
)
from .tautological import fiber_directions


class HopfError(ValueError):
    pass


@dataclass(frozen=True)
class HopfParams:
    a: complex
    b: complex
    lambda1: float | None = None
    lambda2: float | None = None

    def __post_init__(self):
        if not abs(self.a) >= abs(self.b) > 1:
            raise HopfError(f"need |a| >= |b| > 1, got |a|={abs(self.a)}, |b|={abs(self.b)}")
        for lam in (self.lambda1, self.lambda2):
            if lam is not None and not lam > 0:
                raise HopfError("metric coefficients must be positive")

    @classmethod
    def from_alpha(cls, alpha: float, total: float = 2.0, **kw) -> "HopfParams":
        """Real parameters with the given ``alpha`` and ``log|a| + log|b| = total``.

        ``alpha = 1.4`` gives ``a = e^{1.4}, b = e^{0.6}``.
        """
        if not 1 <= alpha < 2:
            raise HopfError("alpha must lie in [1, 2)")
        return cls(math.exp(alpha * total / 2), math.exp((2 - alpha) * total / 2), **kw)

    @property
    def k1(self) -> float:
        return math.log(abs(self.a))

    @property
    def k2(self) -> float:
        return math.log(abs(self.b))

    @property
    def alpha(self) -> float:
        return 2 * self.k1 / (self.k1 + self.k2)

    @property
    def canonical(self) -> bool:
        return self.lambda1 is None and self.lambda2 is None

    @property
    def lambdas(self) -> tuple[float, float]:
        al = self.alpha
        lam1 = 1 / al ** 2 if self.lambda1 is None else self.lambda1
        lam2 = 1 / (2 - al) ** 2 if self.lambda2 is None else self.lambda2
        return lam1, lam2

    def with_lambdas(self, lambda1, lambda2) -> "HopfParams":
        return HopfParams(self.a, self.b, lambda1, lambda2)


# the implicit potential ------------------------------------------------------

def solve_phi_array(alpha: float, zz, ww, rtol: float = 1e-15, max_iter: int = 200,
                    shortcut: bool = True) -> np.ndarray:
    """Vectorized root of ``zz Phi^{-alpha} + ww Phi^{alpha-2} = 1`` (``zz = |z|^2``).

    Works in ``t = log Phi``: the left side is strictly decreasing in ``t``, so
    a sign-change bracket is grown by doubling around ``log(zz + ww)`` and then
    refined by Newton steps that fall back to bisection when they leave it.
    ``shortcut=False`` forces the iterative path even when ``alpha = 1``.
    """
    zz = np.asarray(zz, dtype=float)
    ww = np.asarray(ww, dtype=float)
    if np.any(zz + ww <= 0):
        raise HopfError("Phi is undefined at the origin")
    if alpha == 1 and shortcut:
        return zz + ww
    zz, ww = np.broadcast_arrays(zz, ww)
    shape = zz.shape
    zz = zz.ravel().astype(float)
    ww = ww.ravel().astype(float)

    def g(t):
        return zz * np.exp(-alpha * t) + ww * np.exp((alpha - 2) * t) - 1.0

    t0 = np.log(zz + ww)
    lo, hi = t0 - 1.0, t0 + 1.0
    width = np.ones_like(t0)
    for _ in range(200):
        bad = g(lo) <= 0
        if not bad.any():
            break
        width[bad] *= 2
        lo[bad] = t0[bad] - width[bad]
    width = np.ones_like(t0)
    for _ in range(200):
        bad = g(hi) >= 0
        if not bad.any():
            break
        width[bad] *= 2
        hi[bad] = t0[bad] + width[bad]
    if np.any(g(lo) < 0) or np.any(g(hi) > 0):
        raise HopfError("failed to bracket Phi")  # cannot happen for 1 <= alpha < 2

    t = np.clip(t0, lo, hi)
    active = np.ones_like(t, dtype=bool)
    for _ in range(max_iter):
        X = zz * np.exp(-alpha * t)
        Y = ww * np.exp((alpha - 2) * t)
        gt = X + Y - 1.0
        dg = -alpha * X + (alpha - 2) * Y
        # shrink the bracket with the current sign
        pos = gt > 0
        lo = np.where(pos, t, lo)
        hi = np.where(pos, hi, t)
        with np.errstate(divide="ignore", invalid="ignore"):
            tn = t - gt / dg
        outside = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
        tn = np.where(outside, 0.5 * (lo + hi), tn)
        tn = np.where(gt == 0, t, tn)
        step = np.abs(tn - t)
        t = np.where(active, tn, t)
        active &= step > rtol * np.maximum(1.0, np.abs(t))
        if not active.any():
            break
    # one polishing Newton step
    X = zz * np.exp(-alpha * t)
    Y = ww * np.exp((alpha - 2) * t)
    dg = -alpha * X + (alpha - 2) * Y
    t = t - (X + Y - 1.0) / dg
    with np.errstate(over="ignore"):
        phi = np.exp(t)
    if not np.all(np.isfinite(phi)) or np.any(phi == 0):
        raise HopfError("Phi leaves the double-precision range at this point")
    return phi.reshape(shape)


def key_residual(alpha, zz, ww, phi):
    """``|z|^2 Phi^{-alpha} + |w|^2 Phi^{alpha-2} - 1``."""
    return zz * phi ** (-alpha) + ww * phi ** (alpha - 2) - 1.0


@dataclass
class PhiValue:
    phi: float
    residual: float
    dphi: np.ndarray  # (d Phi/dz, d Phi/dw)
    delta: float
    m_log: np.ndarray  # d dbar log Phi
    m_wedge: np.ndarray  # d Phi ^ dbar Phi

    @property
    def dlog(self) -> np.ndarray:
        return self.dphi / self.phi


def _closed_forms(alpha, z, w, phi):
    zz, ww = abs(z) ** 2, abs(w) ** 2
    X = zz * phi ** (-alpha)
    Y = ww * phi ** (alpha - 2)
    delta = alpha * X + (2 - alpha) * Y
    dphi = np.array([np.conj(z) * phi ** (1 - alpha) / delta,
                     np.conj(w) * phi ** (alpha - 1) / delta])
    m_wedge = np.outer(dphi, dphi.conj())
    pre = phi ** -2 / delta ** 3
    c = alpha * (alpha - 2)
    m_log = pre * np.array([[(alpha - 2) ** 2 * ww, c * np.conj(z) * w],
                            [c * z * np.conj(w), alpha ** 2 * zz]])
    return delta, dphi, m_log, m_wedge


def solve_phi(params: HopfParams | float, z: complex, w: complex) -> PhiValue:
    """Solve for ``Phi`` at ``(z, w)`` and attach the closed-form derivative pack."""
    alpha = params.alpha if isinstance(params, HopfParams) else float(params)
    if z == 0 and w == 0:
        raise HopfError("Phi is undefined at the origin")
    try:
        zz, ww = abs(z) ** 2, abs(w) ** 2
    except OverflowError:
        raise HopfError(f"point ({z}, {w}) is out of floating-point range") from None
    phi = float(solve_phi_array(alpha, zz, ww))
    delta, dphi, m_log, m_wedge = _closed_forms(alpha, z, w, phi)
    return PhiValue(phi, float(key_residual(alpha, zz, ww, phi)), dphi, delta, m_log, m_wedge)


def phi_closed_forms(params, z, w) -> PhiValue:
    return solve_phi(params, z, w)


def natural_scales(alpha: float, z) -> np.ndarray:
    """``(Phi^{alpha/2}, Phi^{1-alpha/2})``: the radii on which Phi varies in each coordinate."""
    phi = float(solve_phi_array(alpha, abs(z[0]) ** 2, abs(z[1]) ** 2))
    return np.array([phi ** (alpha / 2), phi ** (1 - alpha / 2)])


def hopf_diff_config(alpha: float, step: float = 1e-2) -> DiffConfig:
    return DiffConfig(step=step, scales=lambda z: natural_scales(alpha, z))


def phi_batch(params):
    """Vectorized ``Phi`` on an ``(k, 2)`` array of points."""
    alpha = params.alpha if isinstance(params, HopfParams) else float(params)

    def f(p):
        p = np.asarray(p)
        return solve_phi_array(alpha, np.abs(p[:, 0]) ** 2, np.abs(p[:, 1]) ** 2)

    return f


def phi_function(params):
    alpha = params.alpha if isinstance(params, HopfParams) else float(params)

    def f(p):
        return float(solve_phi_array(alpha, abs(p[0]) ** 2, abs(p[1]) ** 2))

    return f


def ddbar_phi_decomposition(params, z, w) -> dict[str, np.ndarray]:
    """The four summands of ``d dbar Phi`` obtained by differentiating the key equation twice.

    ``A`` collects ``d dbar |z|^2, d dbar |w|^2``, ``B`` the ``d(.) ^ dbar Phi`` terms,
    ``C`` the ``d Phi ^ dbar Phi`` term and ``D`` the ``d Phi ^ dbar |w|^2`` term.
    """
    alpha = params.alpha if isinstance(params, HopfParams) else float(params)
    pv = solve_phi(alpha, z, w)
    phi, dphi = pv.phi, pv.dphi
    zz, ww = abs(z) ** 2, abs(w) ** 2
    den = phi ** (alpha - 1) * pv.delta
    A = np.diag([1.0, phi ** (2 * alpha - 2)]).astype(complex) / den
    lead = np.array([-alpha * np.conj(z) / phi, (alpha - 2) * np.conj(w) * phi ** (2 * alpha - 3)])
    B = np.outer(lead, dphi.conj()) / den
    c = alpha * zz * phi ** -2 + (alpha - 2) * (2 * alpha - 3) * ww * phi ** (2 * alpha - 4)
    C = c * pv.m_wedge / den
    D = np.zeros((2, 2), dtype=complex)
    D[:, 1] = (2 * alpha - 2) * phi ** (2 * alpha - 3) * dphi * w / den
    return {"A": A, "B": B, "C": C, "D": D}


# the metric family -----------------------------------------------------------

def _exponents(alpha):
    return np.array([-alpha, alpha - 2])


def gauduchon_metric(params: HopfParams, config: DiffConfig | None = None) -> MetricField:
    """``omega = i (lambda1 Phi^{-alpha} dz^dzbar + lambda2 Phi^{alpha-2} dw^dwbar)``.

    With default lambdas (``1/alpha^2``, ``1/(2-alpha)^2``) this is Gauduchon.
    """
    alpha = params.alpha
    lam = np.array(params.lambdas)
    p = _exponents(alpha)

    def coeffs(z):
        pv = solve_phi(alpha, z[0], z[1])
        return pv, lam * pv.phi ** p

    def h(z):
        _, f = coeffs(z)
        return np.diag(f).astype(complex)

    def dh(z):
        pv, f = coeffs(z)
        out = np.zeros((2, 2, 2), dtype=complex)
        for i in range(2):
            out[i] = np.diag(p * f * pv.dlog[i])
        return out

    def ddh(z):
        pv, f = coeffs(z)
        ell = pv.dlog
        out = np.zeros((2, 2, 2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[i, j] = np.diag(p * f * (pv.m_log[i, j] + p * ell[i] * np.conj(ell[j])))
        return out

    return MetricField(2, h, dh, ddh, kahler=False, config=config or hopf_diff_config(alpha),
                       name=f"Hopf alpha={alpha:.6g}")


def hopf_grid(params: HopfParams, n: int) -> list[tuple[complex, complex]]:
    """``n x n`` points covering a fundamental domain of the deck transformation.

    One axis moves through one period ``(z, w) -> (e^{s k1} z, e^{s k2} w)``,
    ``s in [0, 1)``; the other sweeps ``theta in [0, pi/2]`` between the axes.
    """
    pts = []
    for i, s in enumerate(np.linspace(0.0, 1.0, n, endpoint=False)):
        for j, th in enumerate(np.linspace(0.0, np.pi / 2, n)):
            ph1 = 0.7 * (i + 1) + 0.3 * j
            ph2 = 1.3 * (j + 1) - 0.5 * i
            z = math.exp(s * params.k1) * math.cos(th) * np.exp(1j * ph1)
            w = math.exp(s * params.k2) * math.sin(th) * np.exp(1j * ph2)
            if abs(z) < 1e-15:
                z = 0j
            if abs(w) < 1e-15:
                w = 0j
            pts.append((complex(z), complex(w)))
    return pts


def fundamental_points(params: HopfParams, rng: np.random.Generator, count: int):
    """Random points of one deck period, i.e. of the compact surface itself."""
    out = []
    for _ in range(count):
        s = rng.uniform(0.0, 1.0)
        th = rng.uniform(0.0, np.pi / 2)
        ph = rng.uniform(0.0, 2 * np.pi, size=2)
        z = math.exp(s * params.k1) * math.cos(th) * np.exp(1j * ph[0])
        w = math.exp(s * params.k2) * math.sin(th) * np.exp(1j * ph[1])
        out.append((complex(z), complex(w)))
    return out


def random_points(rng: np.random.Generator, count: int, lo: float = 1e-3, hi: float = 1e3):
    """Points with log-uniform radius in ``[lo, hi]`` and random direction in C^2."""
    out = []
    for _ in range(count):
        v = random_unit(rng, 2)
        r = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        out.append((complex(r * v[0]), complex(r * v[1])))
    return out


@dataclass
class GauduchonReport:
    max_residual: float
    max_residual_fd: float
    max_route_gap: float
    points: int
    residuals: list = field(default_factory=list, repr=False)


def gauduchon_residual(params: HopfParams, z, w, route: str = "closed",
                       config: DiffConfig | None = None) -> float:
    """Scaled ``d_w dbar_w f1 + d_z dbar_z f2``; zero iff ``d dbar omega = 0`` at the point."""
    if route == "closed":
        ddh = gauduchon_metric(params).ddh(np.array([z, w]))
        t1 = ddh[1, 1, 0, 0].real
        t2 = ddh[0, 0, 1, 1].real
    else:
        alpha = params.alpha
        lam1, lam2 = params.lambdas
        phi = phi_batch(alpha)
        cfg = config or hopf_diff_config(alpha)
        _, d1 = complex_derivatives(lambda p: lam1 * phi(p) ** -alpha, np.array([z, w]), cfg, batch=True)
        _, d2 = complex_derivatives(lambda p: lam2 * phi(p) ** (alpha - 2), np.array([z, w]), cfg, batch=True)
        t1 = d1[1, 1].real
        t2 = d2[0, 0].real
    # normalize by the size of the individual contributions, not of t1 and t2
    # themselves: both can vanish on their own (e.g. |z| = |w| when alpha = 1)
    pv = solve_phi(params.alpha, z, w)
    p = _exponents(params.alpha)
    f = np.array(params.lambdas) * pv.phi ** p
    ell2 = np.abs(pv.dlog) ** 2
    scale = (abs(p[0]) * f[0] * (abs(pv.m_log[1, 1]) + abs(p[0]) * ell2[1])
             + abs(p[1]) * f[1] * (abs(pv.m_log[0, 0]) + abs(p[1]) * ell2[0]))
    return abs(t1 + t2) / scale


def verify_gauduchon(params: HopfParams, grid, fd: bool = True) -> GauduchonReport:
    closed = [gauduchon_residual(params, z, w, "closed") for z, w in grid]
    if fd:
        fdv = [gauduchon_residual(params, z, w, "fd") for z, w in grid]
    else:
        fdv = [float("nan")] * len(closed)
    gap = max((abs(a - b) for a, b in zip(closed, fdv)), default=0.0) if fd else float("nan")
    return GauduchonReport(max(closed), max(fdv) if fd else float("nan"), gap, len(grid), closed)


def hopf_curvature_raw(params: HopfParams, z, w) -> np.ndarray:
    """``R_{i jbar k lbar} = (d_i dbar_j log Phi) * (-p_k) f_k delta_kl`` in coordinates."""
    alpha = params.alpha
    pv = solve_phi(alpha, z, w)
    f = np.array(params.lambdas) * pv.phi ** _exponents(alpha)
    weights = -_exponents(alpha) * f
    return np.einsum("ij,kl->ijkl", pv.m_log, np.diag(weights)).astype(complex)


def hopf_curvature(params: HopfParams, point, seed: int = 0, restarts: int = 8,
                   pairs: int = 0) -> tuple[CurvatureTensor, PositivityReport]:
    """Closed-form Chern curvature (unitary frame) plus a Griffiths scan.

    ``pairs`` extra random direction pairs are evaluated directly in addition to
    the alternating minimization.
    """
    z, w = point
    alpha = params.alpha
    pv = solve_phi(alpha, z, w)
    f = np.array(params.lambdas) * pv.phi ** _exponents(alpha)
    s = 1 / np.sqrt(f)
    raw = hopf_curvature_raw(params, z, w)
    data = np.einsum("ijkl,i,j,k,l->ijkl", raw, s, s, s, s)
    R = CurvatureTensor(data, "hermitian")
    rep = griffiths_min(R, seed=seed, restarts=restarts)
    if pairs:
        rng = np.random.default_rng(seed + 1)
        U = rng.standard_normal((pairs, 2)) + 1j * rng.standard_normal((pairs, 2))
        V = rng.standard_normal((pairs, 2)) + 1j * rng.standard_normal((pairs, 2))
        U /= np.linalg.norm(U, axis=1, keepdims=True)
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        vals = np.einsum("ijkl,pi,pj,pk,pl->p", data, U, U.conj(), V, V.conj()).real
        k = int(np.argmin(vals))
        if vals[k] < rep.min_value:
            cert = "negative-witness" if vals[k] < 0 else "heuristic-nonnegative"
            rep = PositivityReport(float(vals[k]), (U[k], V[k]), rep.restarts, rep.converged, cert,
                                   rep.iterations)
    return R, rep


def ricci_form(params: HopfParams, point) -> np.ndarray:
    """``Ric(omega) = 2 d dbar log Phi`` for every member of the family."""
    z, w = point
    return 2 * solve_phi(params.alpha, z, w).m_log


# relative tangent bundle of P(T*X) -------------------------------------------

def relative_tangent_curvature(params: HopfParams, lam1: float, lam2: float, z, w, a):
    """Curvature ``2 i dd-bar log(Phi^{s} |W1|^2 / lam1 + Phi^{-s} |W2|^2 / lam2)``, ``s = alpha - 1``.

    Returned as a 3x3 Hermitian matrix in chart coordinates ``(z, w, zeta)``
    together with the reference form (canonical metric plus FS fiber form).
    The chart is ``W2 = 1`` (``zeta = W1``) when ``|a2| >= |a1|``, else ``W1 = 1``.
    """
    alpha = params.alpha
    s = alpha - 1
    a = np.asarray(a, dtype=complex)
    pv = solve_phi(alpha, z, w)
    phi, ell, mlog = pv.phi, pv.dlog, pv.m_log
    if abs(a[1]) >= abs(a[0]):
        zeta = a[0] / a[1]
        # (coefficient is |zeta|^2/lam for the first term, constant for the second)
        terms = [(s, 1 / lam1, True), (-s, 1 / lam2, False)]
    else:
        zeta = a[1] / a[0]
        terms = [(s, 1 / lam1, False), (-s, 1 / lam2, True)]
    S = 0.0
    dS = np.zeros(3, dtype=complex)
    H = np.zeros((3, 3), dtype=complex)
    for mu, lam_inv, on_fiber in terms:
        pm = phi ** mu
        if on_fiber:
            c, c_z, c_zz = lam_inv * abs(zeta) ** 2, lam_inv * np.conj(zeta), lam_inv
        else:
            c, c_z, c_zz = lam_inv, 0.0, 0.0
        S += c * pm
        dS[:2] += c * mu * pm * ell
        dS[2] += c_z * pm
        H[:2, :2] += c * mu * pm * (mlog + mu * np.outer(ell, ell.conj()))
        H[:2, 2] += np.conj(c_z) * mu * pm * ell
        H[2, :2] += c_z * mu * pm * ell.conj()
        H[2, 2] += c_zz * pm
    curv = 2 * (H / S - np.outer(dS, dS.conj()) / S ** 2)
    curv = 0.5 * (curv + curv.conj().T)
    f = np.array(HopfParams(params.a, params.b).lambdas) * phi ** _exponents(alpha)
    ref = np.diag([f[0], f[1], 1 / (1 + abs(zeta) ** 2) ** 2]).astype(complex)
    return curv, ref


def _min_generalized(curv, ref) -> float:
    from scipy.linalg import eigh

    return float(eigh(curv, ref, eigvals_only=True)[0])


@dataclass
class RelativeTangentReport:
    alpha: float
    eps: float
    lambda1: float
    lambda2: float
    bound: float  # min generalized eigenvalue of the curvature against the reference form
    passed: bool
    witness: tuple
    history: list = field(default_factory=list)


def relative_tangent_scan(params: HopfParams, lam1: float, lam2: float, grid, fibers):
    best = (np.inf, None)
    for z, w in grid:
        for a in fibers:
            curv, ref = relative_tangent_curvature(params, lam1, lam2, z, w, a)
            val = _min_generalized(curv, ref)
            if val < best[0]:
                best = (val, (z, w, tuple(complex(x) for x in a)))
    return best


def relative_tangent_bound(params: HopfParams, lambda1: float = 1.0, lambda2: float | None = None,
                           eps: float = 0.01, base_grid=None, fiber_samples: int = 16,
                           max_doublings: int = 40) -> RelativeTangentReport:
    """Search ``lambda2 = lambda1 * 2^k`` until ``curvature >= -eps * omega_Y`` on the samples.

    If ``lambda2`` is given only that value is scanned.  Fiber samples always
    include both coordinate axes.
    """
    grid = base_grid if base_grid is not None else hopf_grid(params, 6)
    fibers = fiber_directions(2, fiber_samples)
    candidates = [lambda2] if lambda2 is not None else [lambda1 * 2.0 ** k for k in range(max_doublings + 1)]
    history = []
    val, wit, lam2 = -np.inf, None, candidates[0]
    for lam2 in candidates:
        val, wit = relative_tangent_scan(params, lambda1, lam2, grid, fibers)
        history.append((lam2, val))
        if val >= -eps:
            break
    return RelativeTangentReport(params.alpha, eps, lambda1, lam2, val, val >= -eps, wit, history)


# grid dumps -------------------------------------------------------------------

CSV_COLUMNS = ["re_z", "im_z", "re_w", "im_w", "phi", "delta", "min_eig_mlog", "det_mlog",
               "gauduchon_residual", "griffiths_min"]


def grid_rows(params: HopfParams, grid, seed: int = 0):
    for z, w in grid:
        pv = solve_phi(params.alpha, z, w)
        eig = np.linalg.eigvalsh(pv.m_log)
        _, rep = hopf_curvature(params, (z, w), seed=seed)
        yield {
            "re_z": z.real, "im_z": z.imag, "re_w": w.real, "im_w": w.imag,
            "phi": pv.phi, "delta": pv.delta,
            "min_eig_mlog": float(eig[0]),
            "det_mlog": float(np.linalg.det(pv.m_log).real),
            "gauduchon_residual": gauduchon_residual(params, z, w),
            "griffiths_min": rep.min_value,
        }


def write_grid_csv(path, params: HopfParams, grid, seed: int = 0) -> int:
    rows = list(grid_rows(params, grid, seed))
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(float(v)) for k, v in row.items()})
    return len(rows)
