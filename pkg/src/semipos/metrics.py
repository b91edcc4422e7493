"""Reference metrics and tensors with known curvature."""

from __future__ import annotations

import numpy as np

from .curvature import CurvatureTensor, MetricField, kahler_project


def flat_metric(n: int) -> MetricField:
    eye = np.eye(n, dtype=complex)
    return MetricField(
        n,
        lambda z: eye.copy(),
        dh=lambda z: np.zeros((n, n, n), dtype=complex),
        ddh=lambda z: np.zeros((n, n, n, n), dtype=complex),
        kahler=True,
        name=f"flat C^{n}",
    )


def flat_torus_metric(n: int, periods=None) -> MetricField:
    """A constant (non-identity) Hermitian metric, flat like a complex torus."""
    rng = np.random.default_rng(12345 if periods is None else periods)
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    H = A @ A.conj().T + n * np.eye(n)
    m = MetricField(n, lambda z: H.copy(), kahler=True, name=f"flat torus T^{n}")
    return m


def _fs_h(z):
    z = np.asarray(z, dtype=complex)
    rho = 1.0 + np.vdot(z, z).real
    return np.eye(z.size) / rho - np.outer(z.conj(), z) / rho ** 2


def fubini_study_metric(n: int) -> MetricField:
    """Fubini-Study metric ``i dd-bar log(1 + |z|^2)`` on the standard chart of P^n."""
    return MetricField(n, _fs_h, kahler=True, name=f"Fubini-Study P^{n}")


def product_fs_metric(dims) -> MetricField:
    dims = tuple(int(d) for d in dims)
    n = sum(dims)
    cuts = np.cumsum((0,) + dims)

    def h(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros((n, n), dtype=complex)
        for a, b in zip(cuts[:-1], cuts[1:]):
            out[a:b, a:b] = _fs_h(z[a:b])
        return out

    label = "x".join(f"P^{d}" for d in dims)
    return MetricField(n, h, kahler=True, name=f"Fubini-Study {label}")


def fs_tensor(n: int) -> CurvatureTensor:
    """``delta_ij delta_kl + delta_il delta_kj`` (FS in a unitary frame, any point)."""
    d = np.eye(n)
    data = np.einsum("ij,kl->ijkl", d, d) + np.einsum("il,kj->ijkl", d, d)
    return CurvatureTensor(data.astype(complex), "kahler")


def product_fs_tensor(dims) -> CurvatureTensor:
    dims = tuple(int(d) for d in dims)
    n = sum(dims)
    data = np.zeros((n, n, n, n), dtype=complex)
    start = 0
    for d in dims:
        s = slice(start, start + d)
        data[s, s, s, s] = fs_tensor(d).data
        start += d
    return CurvatureTensor(data, "kahler")


def zero_tensor(n: int, r: int | None = None, tag: str = "kahler") -> CurvatureTensor:
    r = n if r is None else r
    return CurvatureTensor(np.zeros((n, n, r, r), dtype=complex), tag if r == n else "hermitian")


def random_kahler_tensor(n: int, rng: np.random.Generator) -> CurvatureTensor:
    """Complex Gaussian data averaged over the Kahler symmetry group."""
    T = rng.standard_normal((n,) * 4) + 1j * rng.standard_normal((n,) * 4)
    return CurvatureTensor(kahler_project(T), "kahler")


def random_hermitian_tensor(n: int, r: int, rng: np.random.Generator) -> CurvatureTensor:
    T = rng.standard_normal((n, n, r, r)) + 1j * rng.standard_normal((n, n, r, r))
    return CurvatureTensor(0.5 * (T + T.transpose(1, 0, 3, 2).conj()), "hermitian")


def random_semipositive_tensor(n: int, rng: np.random.Generator, terms: int = 3) -> CurvatureTensor:
    """Convex combination of FS-type tensors in random unitary frames (Griffiths >= 0)."""
    data = np.zeros((n,) * 4, dtype=complex)
    weights = rng.dirichlet(np.ones(terms))
    base = fs_tensor(n).data
    for w in weights:
        Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        data += w * np.einsum("ijkl,ia,jb,kc,ld->abcd", base, Q, Q.conj(), Q, Q.conj())
    return CurvatureTensor(data, "kahler")
