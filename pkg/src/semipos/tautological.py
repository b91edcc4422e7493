"""The tautological line bundle ``O(1)`` on ``P(E*)`` with the quotient metric.

A point of the fiber over ``z`` is a unit vector ``a`` (a covector on ``E``).
Fiber coordinates are ``w`` with ``W = a + (w^1, ..., w^{n-1}, 0)``, valid while
``a_n != 0``.  In these coordinates, at a point where the metric on ``E`` is in a
normal frame, the curvature of ``O(1)`` is block diagonal with base block
``sum R_{i jbar k lbar} abar_k a_l`` and fiber block ``delta_AB - abar_A a_B``;
the fiber block is the Fubini-Study metric of the fiber at ``[a]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.stats import norm, qmc

from .curvature import (
    CurvatureTensor,
    DiffConfig,
    MetricError,
    MetricField,
    chern_curvature,
    check_positive_definite,
    complex_derivatives,
    normal_frame_metric,
)


class ChartError(ValueError):
    pass


def fiber_directions(n: int, count: int) -> list[np.ndarray]:
    """The ``n`` coordinate axes followed by unscrambled Halton directions on S^{2n-1}."""
    dirs = [np.eye(n, dtype=complex)[k] for k in range(n)]
    if count > 0:
        u = qmc.Halton(d=2 * n, scramble=False).random(count + 1)[1:]
        g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
        for row in g:
            v = row[:n] + 1j * row[n:]
            dirs.append(v / np.linalg.norm(v))
    return dirs


def induced_metric_value(h, W) -> float:
    """``1 / (sum h^{alpha betabar} W_alpha Wbar_beta)``: the quotient metric on ``O(1)`` at ``[W]``."""
    h = np.asarray(h, dtype=complex)
    W = np.asarray(W, dtype=complex)
    if not np.any(W):
        raise ValueError("W must be non-zero")
    check_positive_definite(h)
    try:
        hinv_t = np.linalg.inv(h).T
    except np.linalg.LinAlgError as exc:
        raise MetricError("metric is singular") from exc
    return float(1.0 / (W @ hinv_t @ W.conj()).real)


def _unit(a):
    a = np.asarray(a, dtype=complex)
    r = np.linalg.norm(a)
    if r == 0:
        raise ValueError("fiber direction must be non-zero")
    return a / r


def taut_curvature_at(R: CurvatureTensor, a) -> np.ndarray:
    """Curvature matrix of ``O(1)`` at ``[a]`` in coordinates ``(z^1..z^n, w^1..w^{n-1})``.

    ``R`` must be in a unitary frame.  Raises :class:`ChartError` if ``a_n = 0``.
    """
    a = _unit(a)
    n, r = R.n, R.rank
    if a.size != r:
        raise ValueError(f"fiber direction has {a.size} components, bundle rank is {r}")
    if abs(a[-1]) < 1e-14:
        raise ChartError("a_n = 0: permute coordinates before using the chart W_n = 1")
    base = np.einsum("ijkl,k,l->ij", R.data, a.conj(), a)
    fib = np.eye(r - 1) - np.outer(a[:-1].conj(), a[:-1])
    out = np.zeros((n + r - 1, n + r - 1), dtype=complex)
    out[:n, :n] = 0.5 * (base + base.conj().T)
    out[n:, n:] = fib
    return out


def taut_reference_form(n: int, a) -> np.ndarray:
    """Identity on the base plus the fiber Fubini-Study metric, in the same coordinates."""
    a = _unit(a)
    r = a.size
    out = np.zeros((n + r - 1, n + r - 1), dtype=complex)
    out[:n, :n] = np.eye(n)
    out[n:, n:] = np.eye(r - 1) - np.outer(a[:-1].conj(), a[:-1])
    return out


def chart_permutation(a) -> np.ndarray:
    """Permutation moving the largest component of ``a`` to the last slot."""
    a = np.asarray(a)
    k = int(np.argmax(np.abs(a)))
    perm = np.arange(a.size)
    perm[k], perm[-1] = perm[-1], perm[k]
    return perm


def permute_bundle(R: CurvatureTensor, perm) -> CurvatureTensor:
    return CurvatureTensor(R.data[:, :, perm][:, :, :, perm], R.tag if R.n != R.rank else "hermitian")


@dataclass
class TautSample:
    point: tuple
    a: tuple
    min_eig: float  # raw eigenvalue in chart coordinates
    rel_min: float  # against the reference form
    rel_max: float


@dataclass
class TautScanReport:
    min_eigenvalue: float  # min over samples of the relative least eigenvalue
    raw_min_eigenvalue: float
    max_gap: float  # largest spread (max - min) of the relative spectrum
    best_min: float  # largest relative least eigenvalue seen (strict positivity evidence)
    strictly_positive: bool
    witness_min: TautSample | None
    witness_best: TautSample | None
    samples: int
    records: list = field(default_factory=list, repr=False)

    def as_dict(self):
        def wit(s):
            if s is None:
                return None
            return {"point": [[c.real, c.imag] for c in s.point], "a": [[c.real, c.imag] for c in s.a],
                    "min_eig": s.min_eig, "rel_min": s.rel_min}

        return {
            "min_eigenvalue": self.min_eigenvalue,
            "raw_min_eigenvalue": self.raw_min_eigenvalue,
            "max_gap": self.max_gap,
            "best_min": self.best_min,
            "strictly_positive": self.strictly_positive,
            "witness_min": wit(self.witness_min),
            "witness_best": wit(self.witness_best),
            "samples": self.samples,
        }


def taut_spectrum(R: CurvatureTensor, a) -> tuple[float, float, float]:
    """``(raw least eigenvalue, relative least, relative largest)`` at ``[a]`` in a valid chart."""
    a = _unit(a)
    if abs(a[-1]) < 1e-14:
        perm = chart_permutation(a)
        R, a = permute_bundle(R, perm), a[perm]
    M = taut_curvature_at(R, a)
    raw = float(np.linalg.eigvalsh(M)[0])
    rel = eigh(M, taut_reference_form(R.n, a), eigvals_only=True)
    return raw, float(rel[0]), float(rel[-1])


def taut_positivity_scan(metric: MetricField, base_grid, fiber_samples: int = 32) -> TautScanReport:
    fibers = fiber_directions(metric.rank, fiber_samples)
    records = []
    for p in base_grid:
        R = chern_curvature(metric, p)
        for a in fibers:
            raw, lo, hi = taut_spectrum(R, a)
            records.append(TautSample(tuple(complex(c) for c in p), tuple(complex(c) for c in a), raw, lo, hi))
    if not records:
        raise ValueError("empty scan")
    worst = min(records, key=lambda s: s.rel_min)
    best = max(records, key=lambda s: s.rel_min)
    return TautScanReport(
        min_eigenvalue=worst.rel_min,
        raw_min_eigenvalue=min(s.min_eig for s in records),
        max_gap=max(s.rel_max - s.rel_min for s in records),
        best_min=best.rel_min,
        strictly_positive=best.rel_min > 0,
        witness_min=worst,
        witness_best=best,
        samples=len(records),
        records=records,
    )


# independent routes -------------------------------------------------------------

@dataclass
class NormalFrameReport:
    value_error: float  # |h'(0) - I|
    gradient_error: float  # |d h'(0)|
    quadratic_error: float  # |d dbar h'(0) + R|
    passed: bool
    tol: float

    def as_dict(self):
        return dict(self.__dict__)


def normal_frame_check(metric: MetricField, point, tol: float = 1e-5,
                       config: DiffConfig | None = None, R: CurvatureTensor | None = None) -> NormalFrameReport:
    """The metric in the adapted frame is ``I - R z zbar + O(|z|^3)``.

    ``R`` defaults to :func:`chern_curvature` at the point; pass a closed-form
    tensor to compare against it instead.
    """
    hn = normal_frame_metric(metric, point)
    zero = np.zeros(metric.n, dtype=complex)
    d1, d2 = complex_derivatives(hn, zero, config or DiffConfig())
    if R is None:
        R = chern_curvature(metric, point)
    v_err = float(np.max(np.abs(hn(zero) - np.eye(metric.rank))))
    g_err = float(np.max(np.abs(d1)))
    q_err = float(np.max(np.abs(d2 + R.data)))
    return NormalFrameReport(v_err, g_err, q_err, max(v_err, g_err, q_err) <= tol, tol)


def induced_curvature_fd(metric: MetricField, point, a, config: DiffConfig | None = None) -> np.ndarray:
    """FD Hessian of ``log(sum h^{alpha betabar} W_alpha Wbar_beta)`` in ``(z, w)``.

    Uses the normal-frame metric at ``point`` and ``W = a + (w, 0)``; this is
    the curvature of ``O(1)`` computed through :func:`induced_metric_value`.
    """
    a = _unit(a)
    n, r = metric.n, metric.rank
    hn = normal_frame_metric(metric, point)

    def f(x):
        z, w = x[:n], x[n:]
        W = a.copy()
        W[:-1] += w
        return -np.log(induced_metric_value(hn(z), W))

    _, dd = complex_derivatives(f, np.zeros(n + r - 1, dtype=complex), config or DiffConfig())
    return 0.5 * (dd + dd.conj().T)
