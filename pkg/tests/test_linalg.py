import numpy as np
import pytest

from proctomo.linalg import (
    Permutation,
    dagger,
    haar_unitary,
    hermitian_eig,
    hermitian_part,
    partial_trace_first,
    psd_sqrt,
    reshuffle_permutation,
    transpose_permutation,
    unvec,
    vec,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_vec_column_stacking():
    assert np.array_equal(vec(np.array([[1, 2], [3, 4]])), [1, 3, 2, 4])
    assert np.array_equal(vec(np.eye(2)), [1, 0, 0, 1])


def test_vec_kron_identity():
    # vec(XYZ) = (Z^T kron X) vec(Y)
    rng = np.random.default_rng(0)
    x, y, z = (random_complex(rng, (2, 2)) for _ in range(3))
    np.testing.assert_allclose(
        vec(x @ y @ z), np.kron(z.T, x) @ vec(y), atol=1e-12
    )


def test_unvec_round_trip():
    rng = np.random.default_rng(1)
    a = random_complex(rng, (3, 5))
    assert np.array_equal(unvec(vec(a), 3, 5), a)
    b = random_complex(rng, (4, 4))
    assert np.array_equal(unvec(vec(b)), b)


def test_vec_rejects_empty():
    with pytest.raises(ValueError):
        vec(np.zeros((0, 2)))


def test_transpose_permutation_trivial():
    k = transpose_permutation(1, 1)
    assert np.array_equal(k.forward, [0])


def test_transpose_permutation_2x2():
    a = np.array([[1, 2], [3, 4]])
    k = transpose_permutation(2, 2)
    assert np.array_equal(k.apply(vec(a)), vec(a.T))
    assert np.array_equal(k.apply(np.array([1, 3, 2, 4])), [1, 2, 3, 4])


def test_transpose_permutation_rectangular():
    rng = np.random.default_rng(2)
    a = random_complex(rng, (3, 2))
    k = transpose_permutation(3, 2)
    np.testing.assert_array_equal(k.apply(vec(a)), vec(a.T))


def test_transpose_permutation_square_self_inverse():
    k = transpose_permutation(4, 4)
    assert np.array_equal(k.forward[k.forward], np.arange(16))


def test_permutation_inverse_and_matrix():
    rng = np.random.default_rng(3)
    p = Permutation(rng.permutation(10))
    v = rng.standard_normal(10)
    assert np.array_equal(p.inverse().apply(p.apply(v)), v)
    np.testing.assert_array_equal(p.matrix() @ v, p.apply(v))


def test_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        Permutation(np.array([0, 0, 1]))


@pytest.mark.parametrize("d", [2, 3])
def test_reshuffle_is_involution_and_bijection(d):
    r = reshuffle_permutation(d)
    assert np.array_equal(np.sort(r.forward), np.arange(d**4))
    assert np.array_equal(r.forward[r.forward], np.arange(d**4))


@pytest.mark.parametrize("d", [2, 3])
def test_reshuffle_factorizes_coefficient_matrix(d):
    # Oracle: build the stacked coefficient matrix entry by entry from its
    # definition and compare against (I kron V^T) R.
    from proctomo.ensembles import random_states, sic_states
    from proctomo.reconstruct import dense_expansion_matrix

    ensemble = sic_states(2) if d == 2 else random_states(3, 9, seed=7)
    v = ensemble.parameterization()
    dense = dense_expansion_matrix(ensemble)
    structured = np.kron(np.eye(d * d), v.T) @ reshuffle_permutation(d).matrix()
    assert np.abs(dense - structured).max() <= 1e-12


def test_partial_trace_outer_product():
    rng = np.random.default_rng(4)
    s, t = random_complex(rng, (2, 2)), random_complex(rng, (2, 2))
    x = np.outer(vec(s), vec(t).conj())
    np.testing.assert_allclose(partial_trace_first(x, 2), s @ dagger(t), atol=1e-12)


def test_partial_trace_identity():
    np.testing.assert_allclose(partial_trace_first(np.eye(4), 2), 2 * np.eye(2), atol=1e-14)


def test_partial_trace_preserves_trace():
    rng = np.random.default_rng(5)
    x = hermitian_part(random_complex(rng, (9, 9)))
    assert abs(np.trace(partial_trace_first(x, 3)) - np.trace(x)) < 1e-12


def test_partial_trace_norm_bound():
    # ||Tr_1(X)|| <= sqrt(d) ||X|| in Frobenius norm
    rng = np.random.default_rng(6)
    for d in (2, 3):
        x = random_complex(rng, (d * d, d * d))
        assert np.linalg.norm(partial_trace_first(x, d)) <= np.sqrt(d) * np.linalg.norm(x) + 1e-12


def test_partial_trace_shape_check():
    with pytest.raises(ValueError):
        partial_trace_first(np.eye(6), 2)


def test_hermitian_eig_simple():
    w, u = hermitian_eig(np.diag([1.0, -1.0]))
    np.testing.assert_allclose(w, [1.0, -1.0])
    np.testing.assert_allclose(u @ np.diag(w) @ dagger(u), np.diag([1.0, -1.0]), atol=1e-14)


def test_hermitian_eig_reconstruction():
    rng = np.random.default_rng(7)
    x = hermitian_part(random_complex(rng, (16, 16)))
    w, u = hermitian_eig(x)
    assert np.all(np.diff(w) <= 1e-12)
    assert np.linalg.norm(u @ np.diag(w) @ dagger(u) - x) <= 1e-10


def test_hermitian_eig_weyl_inequalities():
    # Eigenvalue perturbations obey max_j |dw_j| <= ||dX|| and
    # sum_j dw_j^2 <= ||dX||^2.
    rng = np.random.default_rng(8)
    for _ in range(20):
        x = hermitian_part(random_complex(rng, (5, 5)))
        y = hermitian_part(random_complex(rng, (5, 5)))
        wx, _ = hermitian_eig(x)
        wy, _ = hermitian_eig(y)
        gap = np.linalg.norm(x - y)
        assert np.abs(wx - wy).max() <= gap + 1e-12
        assert np.sum((wx - wy) ** 2) <= gap**2 + 1e-12


def test_hermitian_eig_rejects_bad_input():
    with pytest.raises(ValueError):
        hermitian_eig(np.ones((2, 3)))
    with pytest.raises(ValueError):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_psd_sqrt_basics():
    np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-14)
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 1.0])), np.diag([2.0, 1.0]), atol=1e-14)


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(9)
    b = random_complex(rng, (6, 6))
    a = b @ dagger(b)
    root = psd_sqrt(a)
    assert np.linalg.norm(root @ root - a) <= 1e-9


def test_psd_sqrt_rejects_negative():
    with pytest.raises(ValueError):
        psd_sqrt(np.diag([1.0, -0.5]))


def test_haar_unitary_is_unitary_and_seeded():
    u1 = haar_unitary(4, np.random.default_rng(10))
    u2 = haar_unitary(4, np.random.default_rng(10))
    assert np.array_equal(u1, u2)
    assert np.linalg.norm(u1 @ dagger(u1) - np.eye(4)) <= 1e-12
