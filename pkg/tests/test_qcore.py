import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bb84eve.interaction import DisturbancePair, build_optimal_general, joint_states
from bb84eve.measurement import eve_density, gamma_operator
from bb84eve.qcore import (
    FUCHS_PROBE_ORDER, KET_U, KET_V, KET_X, KET_Y, as_ket, as_operator, bell_basis,
    canonical_probe_basis, hermitian_eigensystem, partial_trace_first, probe_ket,
    projector, psd_sqrt, tensor_product, trace_norm, uv_from_xy, xy_from_uv,
)

R2 = 1 / math.sqrt(2)


def random_hermitian(rng, n=4):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


# ---------------------------------------------------------------- kets


def test_as_ket_rejects_non_finite():
    with pytest.raises(ValueError):
        as_ket([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_ket([float("inf"), 0.0])


def test_as_ket_normalization_check():
    with pytest.raises(ValueError, match="normalized"):
        as_ket([1.0, 1.0], normalized=True)
    assert as_ket([R2, R2], normalized=True).shape == (2,)


def test_as_operator_validates_shape_and_hermiticity():
    with pytest.raises(ValueError):
        as_operator([[1, 2, 3]])
    with pytest.raises(ValueError):
        as_operator([[0, 1], [0, 0]], hermitian=True)


def test_tensor_xx_is_first_axis():
    assert np.allclose(tensor_product(KET_X, KET_X), [1, 0, 0, 0])


def test_tensor_uu_is_uniform():
    assert np.allclose(tensor_product(KET_U, KET_U), [0.5] * 4, atol=1e-15)


def test_tensor_u_times_y():
    assert np.allclose(tensor_product(KET_U, KET_Y), [0, R2, 0, R2], atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=4),
       st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=4))
def test_tensor_norm_is_multiplicative(a, b):
    a, b = np.array(a), np.array(b)
    assert np.linalg.norm(tensor_product(a, b)) == pytest.approx(np.linalg.norm(a) * np.linalg.norm(b), abs=1e-12)


# ---------------------------------------------------------------- partial trace


def test_partial_trace_of_joint_state_matches_schmidt_mixture():
    d = DisturbancePair(0.2, 0.3)
    iv = build_optimal_general(d)
    X = joint_states(iv, d, include_uv=False).X
    expected = 0.8 * projector(iv.xi_x) + 0.2 * projector(iv.zeta_x)
    assert np.allclose(partial_trace_first(projector(X)), expected, atol=1e-12)


def test_partial_trace_maximally_mixed():
    assert np.allclose(partial_trace_first(np.eye(8) / 8), np.eye(4) / 4, atol=1e-15)


def test_partial_trace_product_state():
    m = random_hermitian(np.random.default_rng(1))
    assert np.allclose(partial_trace_first(np.kron(projector(KET_X), m)), m, atol=1e-15)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(ValueError):
        partial_trace_first(np.eye(6), first_dim=4)


def test_partial_trace_preserves_trace_and_hermiticity():
    rng = np.random.default_rng(2)
    for _ in range(200):
        op = random_hermitian(rng, 8)
        out = partial_trace_first(op)
        assert np.trace(out) == pytest.approx(np.trace(op), abs=1e-12)
        assert np.allclose(out, out.conj().T, atol=1e-12)


# ---------------------------------------------------------------- eigensystem


def test_diagonal_eigensystem_is_sorted_signed_permutation():
    es = hermitian_eigensystem(np.diag([3.0, -1.0, 2.0, 0.0]))
    assert np.allclose(es.eigenvalues, [3, 2, 0, -1])
    assert np.allclose(np.abs(es.eigenvectors), np.eye(4)[[0, 2, 3, 1]])


def test_gamma_eigenvalues_at_quarter():
    d = DisturbancePair(0.25, 0.25)
    js = joint_states(build_optimal_general(d), d, include_uv=False)
    es = hermitian_eigensystem(gamma_operator(eve_density(js, "x"), eve_density(js, "y")))
    assert np.allclose(es.eigenvalues, [0.3247595, 0.1082532, -0.1082532, -0.3247595], atol=1e-7)


def test_zero_operator_gives_canonical_basis():
    es = hermitian_eigensystem(np.zeros((4, 4)))
    assert np.allclose(es.eigenvalues, 0)
    assert np.allclose(es.eigenvectors, np.eye(4))


def test_non_hermitian_rejected():
    with pytest.raises(ValueError):
        hermitian_eigensystem(np.array([[0, 1], [0, 0]]))


def test_degenerate_cluster_is_deterministic():
    rng = np.random.default_rng(3)
    q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
    op = q @ np.diag([1.0, 1.0, -2.0, 0.5]) @ q.T
    a, b = hermitian_eigensystem(op), hermitian_eigensystem(op.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    assert np.allclose(a.reconstruct(), op, atol=1e-10)


def test_phase_convention():
    rng = np.random.default_rng(4)
    es = hermitian_eigensystem(random_hermitian(rng))
    for v in es.eigenvectors:
        first = v[np.flatnonzero(np.abs(v) > 1e-9)[0]]
        assert abs(first.imag) < 1e-15 and first.real > 0


def test_thousand_random_hermitian_reconstruct():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        op = random_hermitian(rng)
        es = hermitian_eigensystem(op)
        assert np.all(np.diff(es.eigenvalues) <= 0)
        assert np.max(np.abs(es.reconstruct() - op)) < 1e-10
        gram = es.eigenvectors.conj() @ es.eigenvectors.T
        assert np.max(np.abs(gram - np.eye(4))) < 1e-10


def test_psd_sqrt_squares_back():
    rng = np.random.default_rng(6)
    a = rng.standard_normal((4, 4))
    p = a @ a.T
    r = psd_sqrt(p)
    assert np.allclose(r @ r, p, atol=1e-10)


# ---------------------------------------------------------------- trace norm


def test_trace_norm_of_optimal_gamma():
    d = DisturbancePair(0.25, 0.25)
    js = joint_states(build_optimal_general(d), d, include_uv=False)
    assert trace_norm(gamma_operator(eve_density(js, "x"), eve_density(js, "y"))) == pytest.approx(0.8660254, abs=1e-7)


def test_trace_norm_zero_cases():
    assert trace_norm(np.zeros((4, 4))) == 0
    rho = projector(np.array([0.6, 0.8, 0, 0]))
    assert trace_norm(0.5 * (rho - rho)) == 0


def test_trace_norm_dominates_projective_measurements():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        a = random_hermitian(rng)
        q, _ = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        total = sum(abs(np.vdot(q[:, k], a @ q[:, k])) for k in range(4))
        assert total <= trace_norm(a) + 1e-12


def test_trace_norm_rejects_non_hermitian():
    with pytest.raises(ValueError):
        trace_norm(np.array([[0, 1], [0, 0]]))


# ---------------------------------------------------------------- fixed bases


def test_canonical_basis_order_and_gram():
    e = canonical_probe_basis()
    assert np.allclose(e[0], [1, 0, 0, 0]) and np.allclose(e[3], [0, 0, 0, 1])
    assert np.allclose(e[1], probe_ket(KET_Y, KET_X))
    assert np.allclose(e @ e.conj().T, np.eye(4))


def test_canonical_basis_permutation():
    e = canonical_probe_basis(FUCHS_PROBE_ORDER)
    assert np.allclose(e[1], probe_ket(KET_Y, KET_Y))
    with pytest.raises(ValueError):
        canonical_probe_basis([0, 0, 1, 2])


def test_bell_basis():
    b = bell_basis()
    assert np.allclose(b[0], [R2, 0, 0, R2])
    assert np.allclose(b[3], [0, -R2, R2, 0])
    assert np.allclose(b @ b.conj().T, np.eye(4))


def test_uv_conversion():
    assert np.allclose(uv_from_xy(KET_X), [R2, R2])
    assert np.allclose(xy_from_uv(np.array([1, 0])), KET_U)
    assert np.allclose(uv_from_xy(KET_V), [0, 1])
    k = np.array([0.6, 0.8j])
    assert np.allclose(uv_from_xy(uv_from_xy(k)), k, atol=1e-12)
