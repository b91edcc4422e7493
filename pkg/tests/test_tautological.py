import numpy as np
import pytest

from semipos.curvature import MetricError, chern_curvature, griffiths_min, random_unit
from semipos.hopf import HopfParams, gauduchon_metric, hopf_curvature
from semipos.metrics import (
    flat_metric,
    flat_torus_metric,
    fs_tensor,
    fubini_study_metric,
    product_fs_metric,
    product_fs_tensor,
    random_semipositive_tensor,
    zero_tensor,
)
from semipos.tautological import (
    ChartError,
    fiber_directions,
    induced_curvature_fd,
    induced_metric_value,
    normal_frame_check,
    taut_curvature_at,
    taut_positivity_scan,
    taut_spectrum,
)


def grid(rng, n, count, radius=0.8):
    return [np.zeros(n, dtype=complex)] + [radius * random_unit(rng, n) * rng.uniform() for _ in range(count - 1)]


def test_induced_metric_examples():
    assert induced_metric_value(np.eye(2), [1, 0]) == pytest.approx(1)
    assert induced_metric_value(np.diag([2.0, 1.0]), [1, 0]) == pytest.approx(2)


def test_induced_metric_homogeneity(rng):
    for _ in range(20):
        A = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        h = A @ A.conj().T + np.eye(3)
        W = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        c = complex(rng.standard_normal(), rng.standard_normal())
        assert induced_metric_value(h, c * W) == pytest.approx(induced_metric_value(h, W) / abs(c) ** 2, rel=1e-12)
    assert induced_metric_value(np.eye(2), [2, 0]) == pytest.approx(0.25)


def test_induced_metric_errors():
    with pytest.raises(ValueError):
        induced_metric_value(np.eye(2), [0, 0])
    with pytest.raises(MetricError):
        induced_metric_value(np.diag([1.0, 0.0]), [1, 0])


def test_zero_curvature_block():
    a = np.array([0.6, 0.8j])
    M = taut_curvature_at(zero_tensor(2), a)
    assert np.max(np.abs(M[:2, :2])) == 0
    assert M[2, 2] == pytest.approx(1 - 0.36)


def test_fs_p2_spot():
    M = taut_curvature_at(fs_tensor(2), [0, 1])
    assert np.allclose(M, np.diag([1, 2, 1]), atol=1e-14)


def test_product_spot():
    M = taut_curvature_at(product_fs_tensor((1, 1)), [0, 1])
    assert np.allclose(M, np.diag([0, 2, 1]), atol=1e-14)
    assert np.linalg.eigvalsh(M)[0] == pytest.approx(0, abs=1e-14)


def test_chart_violation():
    with pytest.raises(ChartError):
        taut_curvature_at(fs_tensor(2), [1, 0])
    # the spectrum helper permutes coordinates instead
    raw, lo, hi = taut_spectrum(fs_tensor(2), [1, 0])
    assert raw == pytest.approx(1)


def test_fiber_block_is_projection(rng):
    for n in (2, 3, 4):
        for _ in range(50):
            a = random_unit(rng, n)
            M = taut_curvature_at(zero_tensor(n), a)
            ev = np.linalg.eigvalsh(M[n:, n:])
            assert ev[0] >= -1e-14 and ev[-1] <= 1 + 1e-14


def test_fiber_directions_include_axes():
    dirs = fiber_directions(3, 10)
    assert len(dirs) == 13
    assert all(np.allclose(dirs[k], np.eye(3)[k]) for k in range(3))
    assert all(abs(np.linalg.norm(d) - 1) < 1e-12 for d in dirs)
    assert all(np.array_equal(a, b) for a, b in zip(dirs, fiber_directions(3, 10)))


def test_semipositivity_transfers(rng):
    for _ in range(30):
        n = int(rng.integers(2, 4))
        R = random_semipositive_tensor(n, rng)
        assert griffiths_min(R).min_value >= -1e-12
        for a in fiber_directions(n, 16):
            raw, _, _ = taut_spectrum(R, a)
            assert raw >= -1e-8


def test_consistency_with_induced_metric_route(rng):
    cases = [(fubini_study_metric(2), 3), (product_fs_metric((1, 1)), 3), (product_fs_metric((1, 2)), 2)]
    for metric, count in cases:
        for p in grid(rng, metric.n, count):
            R = chern_curvature(metric, p)
            for a in fiber_directions(metric.n, 3):
                if abs(a[-1]) < 1e-3:
                    continue
                assert np.max(np.abs(induced_curvature_fd(metric, p, a) - taut_curvature_at(R, a))) < 1e-5


def test_scan_flat():
    rep = taut_positivity_scan(flat_torus_metric(2), [np.zeros(2), np.array([0.3, 0.1j])], 8)
    assert abs(rep.raw_min_eigenvalue) < 1e-10
    assert abs(rep.min_eigenvalue) < 1e-10


def test_scan_fs(rng):
    rep = taut_positivity_scan(fubini_study_metric(2), grid(rng, 2, 5), 16)
    assert rep.min_eigenvalue >= 1 - 1e-6
    assert rep.strictly_positive


def test_scan_product(rng):
    rep = taut_positivity_scan(product_fs_metric((1, 1)), grid(rng, 2, 5), 16)
    assert rep.min_eigenvalue >= -1e-8
    assert abs(rep.min_eigenvalue) < 1e-8  # factor-aligned directions are degenerate
    assert np.count_nonzero(np.abs(rep.witness_min.a) > 1e-12) == 1
    assert rep.strictly_positive and rep.best_min > 0.1


def test_normal_frame_flat():
    rep = normal_frame_check(flat_metric(2), np.zeros(2))
    assert rep.passed and rep.quadratic_error < 1e-10


def test_normal_frame_fs(rng):
    for p in grid(rng, 2, 3):
        rep = normal_frame_check(fubini_study_metric(2), p, R=fs_tensor(2))
        assert rep.passed


def test_normal_frame_hopf():
    P = HopfParams.from_alpha(1.4)
    z, w = 0.9 + 0.3j, 0.5 - 0.2j
    R, _ = hopf_curvature(P, (z, w))
    rep = normal_frame_check(gauduchon_metric(P), np.array([z, w]), R=R)
    assert rep.passed
