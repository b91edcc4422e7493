"""Extremal directions of the holomorphic sectional curvature and the first-order
consequences at a minimizer (or maximizer) for Kahler curvature tensors.

``H(W) = R(W, Wbar, W, Wbar)`` is a real quartic form on ``C^n = R^{2n}``; we
build the fully symmetric real tensor once and run projected gradient descent
on the unit sphere followed by Riemannian Newton polishing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .curvature import CurvatureTensor, PreconditionError, griffiths_min, random_unit

LEMMA_SLACK = 1e-7
FIRST_ORDER_TOL = 1e-6
GRADIENT_TOL = 1e-9


@dataclass
class DirectionWitness:
    e: np.ndarray
    value: float
    mode: str
    restarts: int
    seed: int
    grad_norm: float

    def as_dict(self):
        return {
            "e": [[float(c.real), float(c.imag)] for c in self.e],
            "value": self.value,
            "mode": self.mode,
            "restarts": self.restarts,
            "seed": self.seed,
            "grad_norm": self.grad_norm,
        }


def sectional(R: CurvatureTensor, W) -> float:
    W = np.asarray(W, dtype=complex)
    return float(np.einsum("ijkl,i,j,k,l->", R.data, W, W.conj(), W, W.conj()).real)


def real_quartic(R: CurvatureTensor) -> np.ndarray:
    """Symmetric ``T`` on ``R^{2n}`` with ``H(x + iy) = T(v, v, v, v)``, ``v = (x, y)``."""
    n = R.n
    P = np.hstack([np.eye(n), 1j * np.eye(n)])  # W = P v
    T = np.einsum("ijkl,ia,jb,kc,ld->abcd", R.data, P, P.conj(), P, P.conj()).real
    return sum(T.transpose(p) for p in itertools.permutations(range(4))) / 24.0


def _phase_normalize(e: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(e)))
    return e * np.exp(-1j * np.angle(e[k]))


class _Sphere:
    """``f(v) = sign * T(v, v, v, v)`` restricted to the unit sphere."""

    def __init__(self, T, sign):
        self.T = sign * T

    def value(self, v):
        return float(np.einsum("abcd,a,b,c,d->", self.T, v, v, v, v))

    def egrad(self, v):
        return 4 * np.einsum("abcd,b,c,d->a", self.T, v, v, v)

    def ehess(self, v):
        return 12 * np.einsum("abcd,c,d->ab", self.T, v, v)

    def rgrad(self, v):
        g = self.egrad(v)
        return g - (g @ v) * v

    def rhess(self, v):
        Pt = np.eye(v.size) - np.outer(v, v)
        return Pt @ self.ehess(v) @ Pt - (self.egrad(v) @ v) * Pt


def _descend(f: _Sphere, v, iters=400):
    step = 0.1
    val = f.value(v)
    for _ in range(iters):
        g = f.rgrad(v)
        if np.linalg.norm(g) < 1e-6:
            break
        while step > 1e-12:
            cand = v - step * g
            cand /= np.linalg.norm(cand)
            cv = f.value(cand)
            if cv <= val - 1e-4 * step * (g @ g):
                v, val = cand, cv
                step *= 1.5
                break
            step *= 0.5
        else:
            break
    return v


def _polish(f: _Sphere, v, iters=30):
    gn = np.linalg.norm(f.rgrad(v))
    for _ in range(iters):
        if gn <= 1e-14:
            break
        Pt = np.eye(v.size) - np.outer(v, v)
        dv = -np.linalg.pinv(f.rhess(v), rcond=1e-10) @ f.rgrad(v)
        dv = Pt @ dv
        cand = v + dv
        cand /= np.linalg.norm(cand)
        cg = np.linalg.norm(f.rgrad(cand))
        # Newton may head for a saddle; accept only if the value does not rise noticeably
        if cg < gn and f.value(cand) <= f.value(v) + 1e-13 * max(1.0, abs(f.value(v))):
            v, gn = cand, cg
        else:
            break
    return v


def extremize_sectional(R: CurvatureTensor, mode: str = "min", seed: int = 0,
                        restarts: int = 16, perturb: int = 8) -> DirectionWitness:
    """Best-found minimizer or maximizer of ``H`` on the unit sphere of ``C^n``."""
    if R.tag != "kahler":
        raise PreconditionError("the sectional-curvature lemmas need a Kahler-tagged tensor")
    if mode not in ("min", "max"):
        raise ValueError("mode must be 'min' or 'max'")
    n = R.n
    f = _Sphere(real_quartic(R), 1.0 if mode == "min" else -1.0)
    rng = np.random.default_rng(seed)
    starts = [np.eye(2 * n)[k] for k in range(n)]
    for i, j in itertools.combinations(range(n), 2):
        for c in (1, -1, 1j, -1j):
            w = np.zeros(n, dtype=complex)
            w[i], w[j] = 1, c
            starts.append(np.concatenate([w.real, w.imag]) / np.sqrt(2))
    for _ in range(restarts):
        w = random_unit(rng, n)
        starts.append(np.concatenate([w.real, w.imag]))
    best_v, best = None, np.inf
    for v0 in starts:
        v = _polish(f, _descend(f, v0))
        val = f.value(v)
        if val < best:
            best_v, best = v, val
    # fine perturbation pass around the incumbent
    for _ in range(perturb):
        v = best_v + 1e-3 * rng.standard_normal(2 * n)
        v = _polish(f, _descend(f, v / np.linalg.norm(v)))
        val = f.value(v)
        if val < best:
            best_v, best = v, val
    e = _phase_normalize(best_v[:n] + 1j * best_v[n:])
    e /= np.linalg.norm(e)
    return DirectionWitness(e, sectional(R, e), mode, len(starts), seed,
                            float(np.linalg.norm(f.rgrad(best_v))))


# lemma checks -----------------------------------------------------------------

def _pair_matrix(R: CurvatureTensor, e) -> np.ndarray:
    """``A`` with ``R(e, ebar, W, Wbar) = W^H A W``."""
    A = np.einsum("ijkl,i,j->kl", R.data, e, e.conj()).T
    return 0.5 * (A + A.conj().T)


def _complement(e) -> np.ndarray:
    """Orthonormal basis (columns) of the complement of ``e``."""
    n = e.size
    Q, _ = np.linalg.qr(np.column_stack([e, np.eye(n, dtype=complex)]))
    return Q[:, 1:n]


def _unit_samples(rng, n, count):
    return [random_unit(rng, n) for _ in range(count)]


@dataclass
class LemmaReport:
    mode: str
    witness: DirectionWitness
    min_slack: float  # sampled (LHS - RHS), sign-adjusted so >= 0 is good
    exact_slack: float  # least eigenvalue of the same quadratic form
    first_order: float  # sup over unit W perp e of |R(e, ebar, e, Wbar)|
    pair_slack: float  # min over sampled e2 perp e of the sign-adjusted 2R(e,e,e2,e2) - H(e)
    samples: int
    passed: bool = False
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "mode": self.mode,
            "witness": self.witness.as_dict(),
            "min_slack": self.min_slack,
            "exact_slack": self.exact_slack,
            "first_order": self.first_order,
            "pair_slack": self.pair_slack,
            "samples": self.samples,
            "passed": self.passed,
        }


def _lemma(R: CurvatureTensor, mode: str, samples: int, seed: int, restarts: int) -> LemmaReport:
    wit = extremize_sectional(R, mode, seed=seed, restarts=restarts)
    e, H = wit.e, wit.value
    sign = 1.0 if mode == "min" else -1.0
    A = _pair_matrix(R, e)
    rng = np.random.default_rng(seed + 7919)
    n = R.n

    def slack(W):
        lhs = 2 * float((W.conj() @ A @ W).real)
        rhs = (1 + abs(np.vdot(e, W)) ** 2) * H
        return sign * (lhs - rhs)

    Ws = _unit_samples(rng, n, samples)
    min_slack = min((slack(W) for W in Ws), default=np.inf)
    Q = sign * (2 * A - H * (np.eye(n) + np.outer(e, e.conj())))
    exact = float(np.linalg.eigvalsh(0.5 * (Q + Q.conj().T))[0])

    v = np.einsum("ijkl,i,j,k->l", R.data, e, e.conj(), e)  # R(e, ebar, e, Wbar) = sum_l v_l conj(W_l)
    first = float(np.linalg.norm(v - np.vdot(e, v) * e))

    pair = np.inf
    if n > 1:
        C = _complement(e)
        for _ in range(samples):
            c = random_unit(rng, n - 1)
            e2 = C @ c
            pair = min(pair, sign * (2 * float((e2.conj() @ A @ e2).real) - H))
    ok = (min_slack >= -LEMMA_SLACK and exact >= -LEMMA_SLACK and first <= FIRST_ORDER_TOL
          and pair >= -LEMMA_SLACK)
    return LemmaReport(mode, wit, min_slack, exact, first, pair, samples, ok)


def verify_lemma_linear(R: CurvatureTensor, samples: int = 64, seed: int = 0,
                        restarts: int = 16) -> LemmaReport:
    """At a minimizer ``e1`` of ``H``: ``2R(e1,e1,W,W) >= (1 + |<W,e1>|^2) H(e1)``.

    Also checks the first-order vanishing ``R(e1, e1bar, e1, Wbar) = 0`` for
    ``W`` perpendicular to ``e1`` and ``2R(e1,e1bar,e2,e2bar) >= H(e1)``.
    """
    return _lemma(R, "min", samples, seed, restarts)


def verify_lemma_linear1(R: CurvatureTensor, samples: int = 64, seed: int = 0,
                         restarts: int = 16) -> LemmaReport:
    """Mirror image at a maximizer ``e_n`` with all inequalities reversed."""
    return _lemma(R, "max", samples, seed, restarts)


@dataclass
class FilterReport:
    witness: DirectionWitness
    bound: float  # H(e1) / 2
    sampled_min: float
    exact_min: float
    passed: bool

    def as_dict(self):
        return {
            "witness": self.witness.as_dict(),
            "bound": self.bound,
            "sampled_min": self.sampled_min,
            "exact_min": self.exact_min,
            "passed": self.passed,
        }


def filter_positivity(R: CurvatureTensor, samples: int = 64, seed: int = 0,
                      restarts: int = 16) -> FilterReport:
    """For Griffiths semi-positive ``R`` with ``H(e1) > 0``: ``R(e1,e1,W,W) >= H(e1)/2``."""
    g = griffiths_min(R, seed=seed)
    if g.min_value < -1e-9:
        raise PreconditionError(f"tensor is not Griffiths semi-positive (min {g.min_value:.3e})")
    wit = extremize_sectional(R, "min", seed=seed, restarts=restarts)
    scale = max(1.0, float(np.max(np.abs(R.data), initial=0.0)))
    if not wit.value > 1e-12 * scale:
        raise PreconditionError(f"minimal holomorphic sectional curvature is not positive ({wit.value:.3e})")
    A = _pair_matrix(R, wit.e)
    rng = np.random.default_rng(seed + 104729)
    vals = [float((W.conj() @ A @ W).real) for W in _unit_samples(rng, R.n, samples)]
    sampled = min(vals, default=np.inf)
    exact = float(np.linalg.eigvalsh(A)[0])
    bound = 0.5 * wit.value
    ok = sampled >= bound - LEMMA_SLACK and exact >= bound - LEMMA_SLACK
    return FilterReport(wit, bound, sampled, exact, ok)
