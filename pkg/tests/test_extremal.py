import numpy as np
import pytest

from semipos.curvature import CurvatureTensor, PreconditionError
from semipos.extremal import (
    extremize_sectional,
    filter_positivity,
    sectional,
    verify_lemma_linear,
    verify_lemma_linear1,
)
from semipos.metrics import fs_tensor, product_fs_tensor, random_hermitian_tensor, random_kahler_tensor, zero_tensor


def sphere_grid_values(R, m=400):
    """H on (cos t, sin t e^{i p}): every unit vector of C^2 up to an overall phase."""
    t = np.linspace(0, np.pi / 2, m)
    p = np.linspace(0, 2 * np.pi, m, endpoint=False)
    T, Pp = np.meshgrid(t, p, indexing="ij")
    W = np.stack([np.cos(T).astype(complex), np.sin(T) * np.exp(1j * Pp)], axis=-1).reshape(-1, 2)
    return np.einsum("ijkl,pi,pj,pk,pl->p", R.data, W, W.conj(), W, W.conj()).real


def test_zero_tensor():
    wit = extremize_sectional(zero_tensor(2))
    assert wit.value == 0
    assert abs(np.linalg.norm(wit.e) - 1) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_fs_constant(n):
    R = fs_tensor(n)
    assert extremize_sectional(R, "min").value == pytest.approx(2, abs=1e-12)
    assert extremize_sectional(R, "max").value == pytest.approx(2, abs=1e-12)


def test_product_fs_minimizer():
    wit = extremize_sectional(product_fs_tensor((1, 1)))
    assert wit.value == pytest.approx(1, abs=1e-12)
    assert np.allclose(np.abs(wit.e), [2 ** -0.5, 2 ** -0.5], atol=1e-8)
    # phase tie-break: largest component real positive
    k = int(np.argmax(np.abs(wit.e)))
    assert abs(wit.e[k].imag) < 1e-14 and wit.e[k].real > 0


def test_witness_invariants(rng):
    for _ in range(10):
        R = random_kahler_tensor(3, rng)
        for mode in ("min", "max"):
            wit = extremize_sectional(R, mode, seed=3)
            assert abs(np.linalg.norm(wit.e) - 1) < 1e-12
            assert wit.grad_norm <= 1e-9
            assert abs(sectional(R, wit.e) - wit.value) < 1e-10


def test_brute_force_bracket(rng):
    for _ in range(10):
        R = random_kahler_tensor(2, rng)
        vals = sphere_grid_values(R)
        lo = extremize_sectional(R, "min").value
        hi = extremize_sectional(R, "max").value
        # the optimizer is at least as good as the grid, and the grid is close behind
        assert lo <= vals.min() + 1e-12 and vals.min() - lo <= 1e-4
        assert hi >= vals.max() - 1e-12 and hi - vals.max() <= 1e-4


def test_scaling_covariance(rng):
    R = random_kahler_tensor(3, rng)
    w1 = extremize_sectional(R, seed=5)
    w2 = extremize_sectional(3.5 * R, seed=5)
    assert w2.value == pytest.approx(3.5 * w1.value, rel=1e-10)
    assert abs(abs(np.vdot(w1.e, w2.e)) - 1) < 1e-8


def test_rejects_hermitian_tag(rng):
    with pytest.raises(PreconditionError):
        extremize_sectional(random_hermitian_tensor(2, 2, rng))
    with pytest.raises(ValueError):
        extremize_sectional(fs_tensor(2), mode="sideways")


# lemmas --------------------------------------------------------------------------

def test_lemma_fs_equality():
    rep = verify_lemma_linear(fs_tensor(3))
    assert rep.passed
    assert abs(rep.exact_slack) < 1e-12 and abs(rep.min_slack) < 1e-12
    rep1 = verify_lemma_linear1(fs_tensor(3))
    assert rep1.passed and abs(rep1.exact_slack) < 1e-12


def test_lemma_zero_tensor():
    for f in (verify_lemma_linear, verify_lemma_linear1):
        rep = f(zero_tensor(2))
        assert rep.passed and rep.min_slack == 0


def test_lemma_product_fs_spot_value():
    R = product_fs_tensor((1, 1))
    rep = verify_lemma_linear(R)
    e = rep.witness.e
    W = np.array([1.0, 0.0], dtype=complex)
    lhs = 2 * float(np.einsum("ijkl,i,j,k,l->", R.data, e, e.conj(), W, W.conj()).real)
    rhs = (1 + abs(np.vdot(e, W)) ** 2) * rep.witness.value
    assert lhs == pytest.approx(2 * 0.5 * 2)  # R(e,ebar,W,Wbar) = 2|e_1|^2 = 1
    assert rhs == pytest.approx(1.5)
    assert rep.passed


def test_lemma_linear1_negated_product():
    R = -product_fs_tensor((1, 1))
    rep = verify_lemma_linear1(R)
    assert rep.passed
    assert rep.witness.value == pytest.approx(-1, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_lemmas_on_random_tensors(n):
    rng = np.random.default_rng(100 + n)
    for k in range(100):
        R = random_kahler_tensor(n, rng)
        for rep in (verify_lemma_linear(R, 32, seed=k), verify_lemma_linear1(R, 32, seed=k)):
            assert rep.min_slack >= -1e-7
            assert rep.exact_slack >= -1e-7
            assert rep.pair_slack >= -1e-7
            assert rep.first_order <= 1e-6


def test_axis_is_critical_but_not_minimal():
    R = product_fs_tensor((1, 1))
    e = np.array([1.0, 0.0], dtype=complex)
    v = np.einsum("ijkl,i,j,k->l", R.data, e, e.conj(), e)
    assert np.linalg.norm(v - np.vdot(e, v) * e) == 0  # the axis is critical ...
    assert sectional(R, e) == 2  # ... but a maximizer, so the min-lemma would not apply there


# filter --------------------------------------------------------------------------

def test_filter_fs():
    rep = filter_positivity(fs_tensor(3))
    assert rep.passed
    assert rep.bound == pytest.approx(1)
    assert rep.exact_min == pytest.approx(1, abs=1e-12)


def test_filter_product_fs():
    R = product_fs_tensor((1, 1))
    rep = filter_positivity(R)
    assert rep.passed
    assert rep.bound == pytest.approx(0.5)
    # oracle: R(e,ebar,W,Wbar) = 2(|e1|^2|W1|^2 + |e2|^2|W2|^2) = |W1|^2 + |W2|^2 = 1 at |e_i|^2 = 1/2
    assert rep.exact_min == pytest.approx(1, abs=1e-10)


def test_filter_preconditions(rng):
    with pytest.raises(PreconditionError):
        filter_positivity(zero_tensor(2))
    with pytest.raises(PreconditionError):
        filter_positivity(-fs_tensor(2))
    with pytest.raises(PreconditionError):
        filter_positivity(CurvatureTensor(random_hermitian_tensor(2, 2, rng).data, "hermitian"))
