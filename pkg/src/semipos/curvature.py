"""Chern curvature of Hermitian metrics and pointwise positivity diagnostics.

Index convention: a tensor ``R[i, j, a, b]`` stands for ``R_{i jbar a bbar}``;
the first pair are base (form) indices, the second pair bundle indices.
Produced tensors are expressed in a frame where the metric is the identity at
the evaluation point, so "unit vector" always means Euclidean unit vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

SYMMETRY_TOL = 1e-12
POSITIVITY_SLACK = 1e-8


class MetricError(ValueError):
    """Raised for singular/indefinite metrics or non-finite derivatives."""


class PreconditionError(ValueError):
    pass


@dataclass
class DiffConfig:
    """Finite-difference settings.

    The step on each real coordinate is ``step * max(1, |z|)``, or
    ``step * scales(z)[i]`` per complex coordinate when a ``scales`` callback is
    given (for problems whose coordinates live on very different scales);
    ``richardson`` extra levels halve the step and cancel the leading ``h^4``
    error term.
    """

    method: str = "auto"  # "auto" uses closed forms when available, "fd" forces differences
    step: float = 1e-2
    richardson: int = 1
    scales: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass
class MetricField:
    """A Hermitian metric ``h(z)`` on a rank-``r`` bundle over an open set of C^n.

    ``dh(z)`` may return the closed-form array ``d h / d z^i`` with shape
    ``(n, r, r)`` and ``ddh(z)`` the array ``d^2 h / dz^i dzbar^j`` with shape
    ``(n, n, r, r)``.  When ``tangent`` is true the bundle is ``T^{1,0}`` and
    the base indices are normalized with the same metric.
    """

    n: int
    h: Callable[[np.ndarray], np.ndarray]
    dh: Optional[Callable[[np.ndarray], np.ndarray]] = None
    ddh: Optional[Callable[[np.ndarray], np.ndarray]] = None
    rank: Optional[int] = None
    tangent: bool = True
    kahler: bool = False
    config: DiffConfig = field(default_factory=DiffConfig)
    name: str = ""

    def __post_init__(self):
        if self.rank is None:
            self.rank = self.n
        if self.tangent and self.rank != self.n:
            raise MetricError("a tangent-bundle metric must have rank equal to the dimension")

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.h(np.asarray(z, dtype=complex)), dtype=complex)

    def with_config(self, **kwargs) -> "MetricField":
        cfg = DiffConfig(**{**self.config.__dict__, **kwargs})
        return MetricField(self.n, self.h, self.dh, self.ddh, self.rank, self.tangent,
                           self.kahler, cfg, self.name)

    @property
    def has_closed_form(self) -> bool:
        return self.dh is not None and self.ddh is not None

    def derivatives(self, z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(h, dh, ddh)`` at ``z`` from closed forms or finite differences."""
        z = np.asarray(z, dtype=complex)
        h0 = self(z)
        check_positive_definite(h0)
        if self.has_closed_form and self.config.method != "fd":
            dh = np.asarray(self.dh(z), dtype=complex)
            ddh = np.asarray(self.ddh(z), dtype=complex)
        else:
            dh, ddh = complex_derivatives(self, z, self.config)
        if not (np.all(np.isfinite(dh)) and np.all(np.isfinite(ddh))):
            raise MetricError("derivative backend returned non-finite values")
        return h0, dh, ddh


def check_positive_definite(h: np.ndarray) -> float:
    if not np.all(np.isfinite(h)):
        raise MetricError("metric has non-finite entries")
    if np.max(np.abs(h - h.conj().T)) > 1e-10 * max(1.0, np.max(np.abs(h))):
        raise MetricError("metric is not Hermitian")
    lam = np.linalg.eigvalsh((h + h.conj().T) / 2)
    if lam[0] <= 0:
        raise MetricError(f"metric is not positive definite (min eigenvalue {lam[0]:.3e})")
    return float(lam[0])


# finite differences ------------------------------------------------------

_D1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.array([-2, -1, 0, 1, 2])


def _stencil_keys(m: int):
    keys = [()]
    for a in range(m):
        keys += [((a, o),) for o in _OFFS if o]
        for b in range(a + 1, m):
            keys += [((a, oa), (b, ob)) for oa in _OFFS if oa for ob in _OFFS if ob]
    return keys


def _real_derivatives(f, x: np.ndarray, h, batch: bool = False):
    """Gradient and Hessian of ``f: R^m -> array`` by 4th-order central stencils.

    ``h`` is a scalar or per-coordinate step.  With ``batch`` the function is
    called once on the stacked stencil points (shape ``(k, m)``).
    """
    m = x.size
    h = np.broadcast_to(np.asarray(h, dtype=float), (m,))
    keys = _stencil_keys(m)
    pts = np.repeat(x[None, :], len(keys), axis=0)
    for row, key in enumerate(keys):
        for a, k in key:
            pts[row, a] += k * h[a]
    if batch:
        vals = np.asarray(f(pts))
    else:
        vals = np.stack([np.asarray(f(p)) for p in pts])
    table = dict(zip(keys, vals))
    f0 = table[()]
    grad = np.zeros((m,) + f0.shape, dtype=f0.dtype)
    hess = np.zeros((m, m) + f0.shape, dtype=f0.dtype)
    for a in range(m):
        for c1, o in zip(_D1, _OFFS):
            if c1:
                grad[a] += c1 * table[((a, o),)]
        for c2, o in zip(_D2, _OFFS):
            hess[a, a] += c2 * (table[((a, o),)] if o else f0)
        grad[a] /= h[a]
        hess[a, a] /= h[a] * h[a]
        for b in range(a + 1, m):
            acc = np.zeros_like(f0)
            for ca, oa in zip(_D1, _OFFS):
                if not ca:
                    continue
                for cb, ob in zip(_D1, _OFFS):
                    if cb:
                        acc = acc + ca * cb * table[((a, oa), (b, ob))]
            hess[a, b] = hess[b, a] = acc / (h[a] * h[b])
    return grad, hess


def real_derivatives(f, x, step, richardson: int = 1, batch: bool = False):
    x = np.asarray(x, dtype=float)
    step = np.asarray(step, dtype=float)
    levels = [_real_derivatives(f, x, step / 2 ** k, batch) for k in range(richardson + 1)]
    # Richardson on the h^4 term, then h^6, ...
    for lev in range(1, richardson + 1):
        p = 4 + 2 * (lev - 1)
        fac = 2.0 ** p
        levels = [
            tuple((fac * fine - coarse) / (fac - 1) for fine, coarse in zip(levels[k + 1], levels[k]))
            for k in range(len(levels) - 1)
        ]
    return levels[0]


def complex_derivatives(func, z: np.ndarray, config: DiffConfig | None = None, batch: bool = False):
    """``(d f/dz^i, d^2 f/dz^i dzbar^j)`` of a (matrix- or scalar-valued) function of C^n.

    With ``batch`` the function takes an ``(k, n)`` array of points.
    """
    config = config or DiffConfig()
    z = np.asarray(z, dtype=complex)
    n = z.size
    x0 = np.concatenate([z.real, z.imag])
    if config.scales is not None:
        sc = np.asarray(config.scales(z), dtype=float)
        step = config.step * np.concatenate([sc, sc])
    else:
        step = config.step * max(1.0, float(np.linalg.norm(z)))

    if batch:
        def f(x):
            return np.asarray(func(x[:, :n] + 1j * x[:, n:]), dtype=complex)
    else:
        def f(x):
            return np.asarray(func(x[:n] + 1j * x[n:]), dtype=complex)

    grad, hess = real_derivatives(f, x0, step, config.richardson, batch)
    gx, gy = grad[:n], grad[n:]
    dz = 0.5 * (gx - 1j * gy)
    hxx, hxy = hess[:n, :n], hess[:n, n:]
    hyx, hyy = hess[n:, :n], hess[n:, n:]
    # d_i dbar_j = 1/4 [(xx + yy) + i (x_i y_j - y_i x_j)]
    ddz = 0.25 * ((hxx + hyy) + 1j * (hxy - hyx))
    return dz, ddz


# tensors -----------------------------------------------------------------

@dataclass
class CurvatureTensor:
    data: np.ndarray
    tag: str = "hermitian"
    asymmetry: float = 0.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.ndim != 4:
            raise ValueError("curvature tensor must have four indices")
        if self.tag not in ("hermitian", "kahler"):
            raise ValueError(f"unknown symmetry tag {self.tag!r}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def rank(self) -> int:
        return self.data.shape[2]

    def __neg__(self):
        return CurvatureTensor(-self.data, self.tag)

    def __mul__(self, c: float):
        return CurvatureTensor(c * self.data, self.tag)

    __rmul__ = __mul__

    def __add__(self, other: "CurvatureTensor"):
        tag = "kahler" if self.tag == other.tag == "kahler" else "hermitian"
        return CurvatureTensor(self.data + other.data, tag)

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.data - self.data.transpose(1, 0, 3, 2).conj()), initial=0.0))

    def kahler_defect(self) -> float:
        if self.n != self.rank:
            return np.inf
        return float(np.max(np.abs(self.data - self.data.transpose(2, 1, 0, 3)), initial=0.0))

    def check_symmetry(self, tol: float = SYMMETRY_TOL) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.data), initial=0.0)))
        ok = self.hermitian_defect() <= tol * scale
        if self.tag == "kahler":
            ok = ok and self.kahler_defect() <= tol * scale
        return ok

    def ricci(self) -> np.ndarray:
        """Trace over the bundle indices (identity frame)."""
        return np.einsum("ijkk->ij", self.data)


def hermitian_project(data: np.ndarray) -> np.ndarray:
    return 0.5 * (data + data.transpose(1, 0, 3, 2).conj())


def kahler_project(data: np.ndarray) -> np.ndarray:
    """Average over the Kahler symmetries ``R_{ijkl} = R_{kjil} = R_{ilkj}``."""
    d = hermitian_project(data)
    d = 0.5 * (d + d.transpose(2, 1, 0, 3))
    d = 0.5 * (d + d.transpose(0, 3, 2, 1))
    return hermitian_project(d)


def unitary_frame(h: np.ndarray) -> np.ndarray:
    """``B`` with ``B^T h conj(B) = I`` (so the new frame vectors are orthonormal)."""
    L = np.linalg.cholesky(h)
    return np.linalg.inv(L).T


def to_identity_frame(raw: np.ndarray, h: np.ndarray, g: np.ndarray | None = None) -> np.ndarray:
    B = unitary_frame(h)
    out = np.einsum("ijab,ac,bd->ijcd", raw, B, B.conj())
    if g is not None:
        Bg = unitary_frame(g)
        out = np.einsum("ijab,ip,jq->pqab", out, Bg, Bg.conj())
    return out


def raw_curvature(h: np.ndarray, dh: np.ndarray, ddh: np.ndarray) -> np.ndarray:
    """``R_ij = -d_i dbar_j h + (d_i h) h^{-1} (d_j h)^H`` in the coordinate frame."""
    hinv = np.linalg.inv(h)
    dbar = dh.conj().transpose(0, 2, 1)
    return -ddh + np.einsum("iac,cd,jdb->ijab", dh, hinv, dbar)


def chern_curvature(metric: MetricField, point, frame: str = "identity") -> CurvatureTensor:
    point = np.asarray(point, dtype=complex)
    h0, dh, ddh = metric.derivatives(point)
    raw = raw_curvature(h0, dh, ddh)
    if frame == "coordinate":
        data = raw
    else:
        data = to_identity_frame(raw, h0, h0 if metric.tangent else None)
    asym = float(np.max(np.abs(data - data.transpose(1, 0, 3, 2).conj())))
    if metric.kahler and metric.tangent:
        return CurvatureTensor(kahler_project(data), "kahler", asym)
    return CurvatureTensor(hermitian_project(data), "hermitian", asym)


def chern_ricci(metric: MetricField, point) -> np.ndarray:
    """``-d_i dbar_j log det h`` in coordinates."""
    point = np.asarray(point, dtype=complex)
    h0 = metric(point)
    check_positive_definite(h0)
    if metric.has_closed_form and metric.config.method != "fd":
        dh = np.asarray(metric.dh(point))
        ddh = np.asarray(metric.ddh(point))
        hinv = np.linalg.inv(h0)
        dbar = dh.conj().transpose(0, 2, 1)
        ric = -np.einsum("ab,ijba->ij", hinv, ddh) + np.einsum(
            "ab,ibc,cd,jda->ij", hinv, dh, hinv, dbar)
    else:
        def logdet(z):
            sign, ld = np.linalg.slogdet(metric(z))
            return np.real(ld)

        _, dd = complex_derivatives(logdet, point, metric.config)
        ric = -dd
    return 0.5 * (ric + ric.conj().T)


def ricci_in_identity_frame(ric: np.ndarray, g: np.ndarray) -> np.ndarray:
    Bg = unitary_frame(g)
    return Bg.T @ ric @ Bg.conj()


# pointwise forms -----------------------------------------------------------

def _check_unit(v, name: str, tol: float = 1e-9):
    v = np.asarray(v, dtype=complex)
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector (|{name}| = {np.linalg.norm(v):.12g})")
    return v


def bisectional(R: CurvatureTensor, u, v) -> float:
    """``R_{i jbar k lbar} u^i ubar^j v^k vbar^l`` for unit ``u`` (base) and ``v`` (fiber)."""
    u = _check_unit(u, "u")
    v = _check_unit(v, "v")
    return _biquadratic(R.data, u, v)


def _biquadratic(data, u, v) -> float:
    return float(np.einsum("ijkl,i,j,k,l->", data, u, u.conj(), v, v.conj()).real)


def _base_matrix(data, v):
    """``A(v)_{ij} = R_{i jbar k lbar} v^k vbar^l``."""
    return np.einsum("ijkl,k,l->ij", data, v, v.conj())


def _fiber_matrix(data, u):
    return np.einsum("ijkl,i,j->kl", data, u, u.conj())


def _min_direction(A):
    # u^T A ubar = u^H A^T u, so the minimizing u is the eigenvector of A^T
    At = A.T
    w, V = np.linalg.eigh(0.5 * (At + At.conj().T))
    return w[0], V[:, 0]


@dataclass
class PositivityReport:
    min_value: float
    witness: tuple
    restarts: int
    converged: bool
    certificate: str  # "negative-witness" or "heuristic-nonnegative"
    iterations: int = 0

    def as_dict(self):
        return {
            "min_value": self.min_value,
            "witness": [[complex(c) for c in w] for w in self.witness],
            "restarts": self.restarts,
            "converged": self.converged,
            "certificate": self.certificate,
        }


def random_unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def griffiths_min(R: CurvatureTensor, seed: int = 0, restarts: int = 32,
                  max_iter: int = 500, tol: float = 1e-15) -> PositivityReport:
    """Heuristic minimum of the bisectional form over unit pairs.

    Alternates exact minimization in ``u`` (least eigenvector of ``A(v)``) and in
    ``v``; the value is non-increasing along the iteration.  A negative result
    is certified by the returned witness pair.
    """
    rng = np.random.default_rng(seed)
    data = R.data
    n, r = R.n, R.rank
    best = (np.inf, None, None)
    all_converged = True
    total_iters = 0
    starts = [np.eye(r, dtype=complex)[k] for k in range(r)]
    while len(starts) < restarts:
        starts.append(random_unit(rng, r))
    for v in starts[:max(restarts, 1)]:
        val = np.inf
        converged = False
        for it in range(max_iter):
            _, u = _min_direction(_base_matrix(data, v))
            new, v = _min_direction(_fiber_matrix(data, u))
            total_iters += 1
            if val - new <= tol * max(1.0, abs(new)):
                converged = True
                val = new
                break
            val = new
        all_converged &= converged
        val = _biquadratic(data, u, v)
        if val < best[0]:
            best = (val, u.copy(), v.copy())
    val, u, v = best
    cert = "negative-witness" if val < 0 else "heuristic-nonnegative"
    return PositivityReport(float(val), (u, v), len(starts), all_converged, cert, total_iters)


def nakano_matrix(R: CurvatureTensor) -> np.ndarray:
    n, r = R.n, R.rank
    M = R.data.transpose(0, 2, 1, 3).reshape(n * r, n * r)
    return 0.5 * (M + M.conj().T)


def nakano_form(R: CurvatureTensor, U) -> float:
    """``R_{i jbar a bbar} U^{ia} conj(U^{jb})`` for an ``n x r`` array ``U``."""
    U = np.asarray(U, dtype=complex)
    return float(np.einsum("ijab,ia,jb->", R.data, U, U.conj()).real)


def nakano_min(R: CurvatureTensor) -> float:
    return float(np.linalg.eigvalsh(nakano_matrix(R))[0])


@dataclass
class SliceCheck:
    passed: bool
    min_eigenvalue: float
    slice_eigenvalues: list


def psd_slice_check(R: CurvatureTensor, tol: float = POSITIVITY_SLACK) -> SliceCheck:
    """Each fixed-``k`` slice ``R_{i jbar k kbar}`` must be positive semidefinite."""
    eigs = []
    for k in range(R.rank):
        S = R.data[:, :, k, k]
        eigs.append(np.linalg.eigvalsh(0.5 * (S + S.conj().T)))
    lo = float(min(e[0] for e in eigs))
    return SliceCheck(lo >= -tol, lo, [e.tolist() for e in eigs])


# Flatness bound: with R Griffiths semi-positive and Ric = sum_k R_{.. k kbar},
# each H(a)_{kl} = R_{i jbar k lbar} a^i abar^j is PSD with trace Ric(a, abar),
# so |H(a)_{kl}| <= |Ric|_op on unit a; the sesquilinear form a -> H(a)_{kl} then has
# numerical radius <= |Ric|_op, hence entries bounded by twice that.
FLATNESS_CONSTANT = 2.0


@dataclass
class FlatnessVerdict:
    passed: bool
    max_entry: float
    ricci_trace_norm: float
    bound: float
    constant: float = FLATNESS_CONSTANT


def flat_if_ricci_flat(R: CurvatureTensor, tol: float = POSITIVITY_SLACK,
                       griffiths: float | None = None, seed: int = 0) -> FlatnessVerdict:
    """Check ``max |R| <= 2 * ||Ric||_1 + tol`` for a Griffiths semi-positive tensor.

    In particular a Ricci-flat semi-positive tensor must vanish.
    """
    if griffiths is None:
        griffiths = griffiths_min(R, seed=seed).min_value
    if griffiths < -tol:
        raise PreconditionError(f"tensor is not Griffiths semi-positive (min {griffiths:.3e})")
    ric = R.ricci()
    trace_norm = float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (ric + ric.conj().T)))))
    max_entry = float(np.max(np.abs(R.data), initial=0.0))
    bound = FLATNESS_CONSTANT * trace_norm + tol
    return FlatnessVerdict(max_entry <= bound, max_entry, trace_norm, bound)


# normal frames -------------------------------------------------------------

def normal_frame_metric(metric: MetricField, point):
    """Return ``zeta -> h'(zeta)`` with ``h'(0) = I`` and ``d h'(0) = 0``.

    Coordinates are shifted linearly so the metric is the identity at ``point``
    (tangent case) and the bundle frame is changed holomorphically by
    ``A(zeta) = I - sum_p zeta_p (d_p h)^T`` to kill first derivatives.
    """
    point = np.asarray(point, dtype=complex)
    h0, dh, _ = metric.derivatives(point)
    B = unitary_frame(h0)
    Bz = B if metric.tangent else np.eye(metric.n, dtype=complex)

    def hat(zeta):
        z = point + Bz @ np.asarray(zeta, dtype=complex)
        return B.T @ metric(z) @ B.conj()

    # d/dzeta_p hat(0) = sum_i Bz[i, p] B^T (d_i h) conj(B)
    dhat = np.einsum("ip,ab,ibc,cd->pad", Bz, B.T, dh, B.conj())
    C = dhat.transpose(0, 2, 1)

    def h_normal(zeta):
        zeta = np.asarray(zeta, dtype=complex)
        A = np.eye(metric.rank, dtype=complex) - np.einsum("p,pab->ab", zeta, C)
        return A.T @ hat(zeta) @ A.conj()

    return h_normal
