import numpy as np
import pytest

from semipos.curvature import (
    CurvatureTensor,
    DiffConfig,
    MetricError,
    MetricField,
    PreconditionError,
    bisectional,
    chern_curvature,
    chern_ricci,
    complex_derivatives,
    flat_if_ricci_flat,
    griffiths_min,
    nakano_form,
    nakano_min,
    psd_slice_check,
    random_unit,
)
from semipos.hopf import HopfParams, fundamental_points, gauduchon_metric, hopf_curvature, ricci_form
from semipos.metrics import (
    flat_metric,
    flat_torus_metric,
    fs_tensor,
    fubini_study_metric,
    product_fs_metric,
    product_fs_tensor,
    random_hermitian_tensor,
    random_kahler_tensor,
    random_semipositive_tensor,
    zero_tensor,
)


def chart_points(rng, n, count, radius=1.5):
    return [radius * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2 * n)
            for _ in range(count)]


def relerr(a, b):
    return float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))


# chern_curvature -----------------------------------------------------------------

def test_flat_is_zero():
    R = chern_curvature(flat_metric(3), np.zeros(3))
    assert np.max(np.abs(R.data)) == 0


def test_flat_torus_fd_is_zero():
    R = chern_curvature(flat_torus_metric(2), np.array([0.3 + 0.1j, -0.2j]))
    assert np.max(np.abs(R.data)) < 1e-10  # FD rounding only


def test_fs_origin():
    R = chern_curvature(fubini_study_metric(2), np.zeros(2))
    assert R.tag == "kahler"
    assert np.max(np.abs(R.data - fs_tensor(2).data)) < 1e-8


@pytest.mark.parametrize("metric, tensor", [
    (fubini_study_metric(2), fs_tensor(2)),
    (fubini_study_metric(3), fs_tensor(3)),
    (product_fs_metric((1, 1)), product_fs_tensor((1, 1))),
    (product_fs_metric((1, 2)), product_fs_tensor((1, 2))),
])
def test_fd_matches_closed_form_at_random_points(metric, tensor, rng):
    worst = max(relerr(chern_curvature(metric, p).data, tensor.data) for p in chart_points(rng, metric.n, 100))
    assert worst < 1e-6


def test_hopf_fd_matches_closed_form(rng):
    P = HopfParams.from_alpha(1.4)
    metric = gauduchon_metric(P).with_config(method="fd")
    for z, w in fundamental_points(P, rng, 20):
        R_fd = chern_curvature(metric, np.array([z, w]))
        R_cf, _ = hopf_curvature(P, (z, w))
        assert relerr(R_fd.data, R_cf.data) < 1e-6


def test_hopf_closed_callbacks_match_closed_tensor(rng):
    P = HopfParams.from_alpha(1.8)
    metric = gauduchon_metric(P)
    for z, w in fundamental_points(P, rng, 100):
        assert relerr(chern_curvature(metric, np.array([z, w])).data, hopf_curvature(P, (z, w))[0].data) < 1e-10


def test_symmetry_tags(rng):
    for p in chart_points(rng, 2, 10):
        R = chern_curvature(fubini_study_metric(2), p)
        assert R.tag == "kahler" and R.check_symmetry(1e-12)
    P = HopfParams.from_alpha(1.2)
    R = chern_curvature(gauduchon_metric(P), np.array([0.7 + 0.2j, 0.4j]))
    assert R.tag == "hermitian" and R.check_symmetry(1e-12)


def test_singular_metric_rejected():
    m = MetricField(2, lambda z: np.diag([1.0, 0.0]).astype(complex))
    with pytest.raises(MetricError):
        chern_curvature(m, np.zeros(2))


def test_non_finite_derivatives_rejected():
    m = MetricField(1, lambda z: np.eye(1, dtype=complex),
                    dh=lambda z: np.full((1, 1, 1), np.nan), ddh=lambda z: np.zeros((1, 1, 1, 1)))
    with pytest.raises(MetricError):
        chern_curvature(m, np.zeros(1))


def test_complex_derivatives_polynomial():
    # f = |z1|^2 |z2|^2 + Re(z1^2): d1 f = zbar1 |z2|^2 + z1, d1 dbar2 f = zbar1 z2
    z = np.array([0.3 + 0.4j, -0.5 + 0.1j])

    def f(x):
        return abs(x[0]) ** 2 * abs(x[1]) ** 2 + (x[0] ** 2).real

    d1, d2 = complex_derivatives(f, z, DiffConfig())
    assert abs(d1[0] - (z[0].conjugate() * abs(z[1]) ** 2 + z[0])) < 1e-10
    assert abs(d2[0, 1] - z[0].conjugate() * z[1]) < 1e-10
    assert abs(d2[0, 0] - abs(z[1]) ** 2) < 1e-10


# chern_ricci ---------------------------------------------------------------------

def test_ricci_flat():
    assert np.max(np.abs(chern_ricci(flat_metric(2), np.zeros(2)))) == 0


def test_ricci_fs_p2():
    assert np.max(np.abs(chern_ricci(fubini_study_metric(2), np.zeros(2)) - 3 * np.eye(2))) < 1e-6


def test_ricci_trace_consistency(rng):
    for metric in (fubini_study_metric(2), product_fs_metric((1, 2))):
        for p in chart_points(rng, metric.n, 10):
            g = metric(p)
            ric = chern_ricci(metric, p)
            R = chern_curvature(metric, p, frame="coordinate")
            trace = np.einsum("ijkl,lk->ij", R.data, np.linalg.inv(g))
            assert np.max(np.abs(ric - trace)) < 1e-6


def test_hopf_ricci_is_twice_mlog(rng):
    P = HopfParams.from_alpha(1.4)
    metric = gauduchon_metric(P)
    fd = metric.with_config(method="fd")
    for z, w in fundamental_points(P, rng, 10):
        p = np.array([z, w])
        ref = ricci_form(P, (z, w))
        assert relerr(chern_ricci(metric, p), ref) < 1e-10
        assert relerr(chern_ricci(fd, p), ref) < 1e-6


# pointwise forms -------------------------------------------------------------------

def test_bisectional_examples():
    e1, e2 = np.eye(2, dtype=complex)
    assert bisectional(zero_tensor(2), e1, e2) == 0
    assert bisectional(fs_tensor(2), e1, e2) == pytest.approx(1)
    assert bisectional(fs_tensor(2), e1, e1) == pytest.approx(2)


def test_bisectional_rejects_non_unit():
    with pytest.raises(ValueError):
        bisectional(fs_tensor(2), np.array([1.0, 1.0]), np.array([1.0, 0.0]))


def test_griffiths_examples():
    assert griffiths_min(zero_tensor(2)).min_value == 0
    assert griffiths_min(fs_tensor(2)).min_value == pytest.approx(1, abs=1e-12)
    rep = griffiths_min(-fs_tensor(2))
    assert rep.min_value == pytest.approx(-2, abs=1e-12)
    assert rep.certificate == "negative-witness"
    u, v = rep.witness
    assert abs(abs(np.vdot(u, v)) - 1) < 1e-8
    assert bisectional(-fs_tensor(2), u, v) == pytest.approx(rep.min_value, abs=1e-10)


def test_negative_witness_reproduces_value(rng):
    for _ in range(30):
        R = random_hermitian_tensor(2, 3, rng)
        rep = griffiths_min(R, seed=1)
        if rep.certificate == "negative-witness":
            u, v = rep.witness
            assert abs(bisectional(R, u, v) - rep.min_value) < 1e-10


def test_nakano_examples():
    assert nakano_min(zero_tensor(2)) == 0
    # frozen from a dense eigensolve: the antisymmetric vector e1 (x) e2 - e2 (x) e1 is a null direction
    assert nakano_min(fs_tensor(2)) == pytest.approx(0.0, abs=1e-12)
    U = (np.outer([1, 0], [0, 1]) - np.outer([0, 1], [1, 0])) / np.sqrt(2)
    assert nakano_form(fs_tensor(2), U) == pytest.approx(0.0, abs=1e-12)


def test_nakano_rank_one_is_bisectional(rng):
    R = random_hermitian_tensor(3, 2, rng)
    u, v = random_unit(rng, 3), random_unit(rng, 2)
    assert nakano_form(R, np.outer(u, v)) == pytest.approx(bisectional(R, u, v), abs=1e-12)


def test_griffiths_dominates_nakano(rng):
    for k in range(100):
        n, r = rng.integers(1, 4), rng.integers(1, 4)
        R = random_hermitian_tensor(int(n), int(r), rng)
        assert griffiths_min(R, seed=k).min_value >= nakano_min(R) - 1e-9


def test_psd_slices():
    assert psd_slice_check(fs_tensor(3)).passed
    assert psd_slice_check(zero_tensor(2)).passed
    assert not psd_slice_check(-fs_tensor(2)).passed


def test_psd_slices_on_semipositive(rng):
    for _ in range(30):
        R = random_semipositive_tensor(int(rng.integers(2, 4)), rng)
        assert griffiths_min(R).min_value >= -1e-12
        assert psd_slice_check(R).passed


def test_flatness():
    assert flat_if_ricci_flat(zero_tensor(2)).passed
    R = chern_curvature(flat_torus_metric(2), np.zeros(2))
    assert flat_if_ricci_flat(R).passed
    v = flat_if_ricci_flat(fs_tensor(2))
    assert v.passed and v.ricci_trace_norm == pytest.approx(6)
    with pytest.raises(PreconditionError):
        flat_if_ricci_flat(-fs_tensor(2))


def test_flatness_bound_holds_on_semipositive(rng):
    for _ in range(30):
        R = random_semipositive_tensor(3, rng)
        assert flat_if_ricci_flat(R).passed


def test_kahler_projection_of_random_tensors(rng):
    R = random_kahler_tensor(3, rng)
    assert R.check_symmetry(1e-12)
    with pytest.raises(ValueError):
        CurvatureTensor(np.zeros((2, 2)))
