import numpy as np
import pytest

from qframe.exceptions import DualityError
from qframe.frames import (
    basis_frame,
    canonical_dual,
    leonhardt_frame,
    pairings,
    random_frame,
    renormalize,
    represent,
    wootters_frame,
)
from qframe.operator_space import herm_basis, hs_inner, projector, random_hermitian, random_pure_state, random_state
from qframe.quasiprob import rep_effects
from qframe.operator_space import computational_povm, random_povm
from qframe.star_algebra import (
    frame_ip,
    identity_element,
    is_pure_state_rep,
    pure_state_probes,
    star_kernel,
    star_product,
    theta_kernel,
    validate_effect_rep,
    validate_state_rep,
)


@pytest.fixture(scope="module")
def pair():
    f = renormalize(wootters_frame(3), "standard")
    e = canonical_dual(f)
    return f, e, theta_kernel(e), star_kernel(f, e)


def test_theta_examples(pair):
    b = basis_frame(3)
    np.testing.assert_allclose(theta_kernel(b).matrix, np.eye(9), atol=1e-14)
    _, e, theta, _ = pair
    g = theta.matrix
    assert np.max(np.abs(g - np.diag(np.diag(g)))) <= 1e-12
    for f in (leonhardt_frame(2), random_frame(3, 12, 0)):
        assert np.linalg.eigvalsh(theta_kernel(canonical_dual(f)).matrix)[0] >= -1e-10


def test_star_kernel_shape_and_symmetry(pair):
    _, _, _, k = pair
    assert k.tensor.shape == (9, 9, 9)
    np.testing.assert_allclose(k.tensor, k.tensor.transpose(0, 2, 1).conj(), atol=1e-12)


def test_star_kernel_entries_match_definition(pair):
    f, e, _, k = pair
    rng = np.random.default_rng(0)
    for a, b, c in rng.integers(0, 9, size=(20, 3)):
        expected = np.trace(f.elements[a] @ e.elements[b] @ e.elements[c])
        assert abs(k.tensor[a, b, c] - expected) <= 1e-14


def test_star_kernel_basis_structure_constants():
    b = basis_frame(2)
    k = star_kernel(b, b)
    B = herm_basis(2)
    for i in range(4):
        for j in range(4):
            for l in range(4):
                assert abs(k.tensor[i, j, l] - np.trace(B[i] @ B[j] @ B[l])) <= 1e-14


def test_star_kernel_requires_dual_pair():
    f = wootters_frame(3)
    with pytest.raises(DualityError):
        star_kernel(f, f)


def test_star_kernel_size_guard_and_lazy(rng):
    f = random_frame(2, 300, rng)
    e = canonical_dual(f)
    with pytest.raises(MemoryError, match="lazy"):
        star_kernel(f, e)
    lazy = star_kernel(f, e, lazy=True)
    a, b = random_hermitian(2, rng), random_hermitian(2, rng)
    prod = star_product(represent(f, a), represent(f, b), lazy, f.weights)
    np.testing.assert_allclose(prod, pairings(f, a @ b), atol=1e-10)


def test_lazy_and_materialized_agree(pair, rng):
    f, e, _, k = pair
    lazy = star_kernel(f, e, lazy=True)
    a, b = represent(f, random_hermitian(3, rng)), represent(f, random_hermitian(3, rng))
    np.testing.assert_allclose(star_product(a, b, k, f.weights), star_product(a, b, lazy, f.weights), atol=1e-12)
    assert abs(lazy.entry(1, 2, 3) - k.entry(1, 2, 3)) <= 1e-14


def test_frame_ip_examples(pair, rng):
    f, _, theta, _ = pair
    psi = random_pure_state(3, rng)
    r = represent(f, projector(psi))
    assert frame_ip(r, r, theta, f.weights) == pytest.approx(1, abs=1e-10)
    v = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
    r0, r1 = represent(f, projector(v[:, 0])), represent(f, projector(v[:, 1]))
    assert abs(frame_ip(r0, r1, theta, f.weights)) <= 1e-10
    assert frame_ip(r, np.zeros(9), theta, f.weights) == 0


@pytest.mark.parametrize("make", [lambda: leonhardt_frame(2), lambda: random_frame(3, 11, 5)])
def test_isometry_other_frames(make, rng):
    f = make()
    e = canonical_dual(f)
    theta = theta_kernel(e)
    for _ in range(20):
        a, b = random_hermitian(f.dim, rng), random_hermitian(f.dim, rng)
        ip = frame_ip(represent(f, a), represent(f, b), theta, f.weights)
        assert abs(ip - hs_inner(a, b)) <= 1e-10


def test_star_homomorphism(pair, rng):
    f, _, _, k = pair
    for _ in range(50):
        a, b = random_hermitian(3, rng), random_hermitian(3, rng)
        prod = star_product(represent(f, a), represent(f, b), k, f.weights)
        assert np.max(np.abs(prod - pairings(f, a @ b))) <= 1e-10


def test_star_associativity(pair, rng):
    f, _, _, k = pair
    w = f.weights
    for _ in range(10):
        a, b, c = (represent(f, random_hermitian(3, rng)).values for _ in range(3))
        ab = star_product(a, b, k, w)
        bc = star_product(b, c, k, w)
        # complex intermediate: split into real and imaginary parts (product is bilinear)
        left = star_product(ab.real, c, k, w) + 1j * star_product(ab.imag, c, k, w)
        right = star_product(a, bc.real, k, w) + 1j * star_product(a, bc.imag, k, w)
        assert np.max(np.abs(left - right)) <= 1e-9


def test_projector_idempotent(pair, rng):
    f, _, _, k = pair
    p = projector(random_pure_state(3, rng))
    r = represent(f, p)
    np.testing.assert_allclose(star_product(r, r, k, f.weights), r.values, atol=1e-10)


def test_pure_state_examples(pair, rng):
    f, _, _, k = pair
    assert is_pure_state_rep(represent(f, projector(np.eye(3)[0])), k, f.weights)
    mixed = represent(f, np.eye(3) / 3)
    assert not is_pure_state_rep(mixed, k, f.weights)
    np.testing.assert_allclose(star_product(mixed, mixed, k, f.weights), represent(f, np.eye(3) / 9).values, atol=1e-12)
    v = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
    rank2 = projector(v[:, 0]) + projector(v[:, 1])
    assert not is_pure_state_rep(represent(f, rank2), k, f.weights)


def test_pure_state_classification_matches_operator_truth(pair):
    f, _, _, k = pair
    rng = np.random.default_rng(99)
    for i in range(100):
        rank = [1, 2, 3][i % 3]
        rho = random_state(3, rng, rank=rank).matrix
        truth = np.linalg.matrix_rank(rho, tol=1e-9) == 1
        assert is_pure_state_rep(represent(f, rho), k, f.weights) == truth


def test_identity_element_examples(pair, rng):
    f, _, _, k = pair
    np.testing.assert_allclose(identity_element(f).values, 1, atol=1e-12)
    b = basis_frame(2)
    np.testing.assert_allclose(identity_element(b).values, np.trace(herm_basis(2), axis1=1, axis2=2).real, atol=1e-15)
    iota = identity_element(f)
    for _ in range(20):
        r = represent(f, random_hermitian(3, rng))
        np.testing.assert_allclose(star_product(iota, r, k, f.weights), r.values, atol=1e-10)
        np.testing.assert_allclose(star_product(r, iota, k, f.weights), r.values, atol=1e-10)


def test_identity_element_unique(pair):
    f, _, _, k = pair
    # g * B = B for spanning B is linear in g: sum_b w_b g(b) (sum_c w_c B(c) f(a,b,c)) = B(a)
    w = f.weights
    rows, rhs = [], []
    for j in range(9):
        bj = np.zeros(9)
        bj[j] = 1.0
        m = np.einsum("abc,c->ab", k.tensor, w * bj) * w  # (a, b) coefficient of g(b)
        rows.append(m)
        rhs.append(bj)
    a_mat = np.concatenate(rows)
    g, *_ = np.linalg.lstsq(a_mat, np.concatenate(rhs).astype(complex), rcond=None)
    assert np.max(np.abs(g - identity_element(f).values)) <= 1e-9


def test_effect_side_identity_is_dual_identity(pair, rng):
    f, e, _, _ = pair
    swapped = star_kernel(e, f)
    iota_e = identity_element(e)
    r = represent(e, random_hermitian(3, rng))
    np.testing.assert_allclose(star_product(iota_e, r, swapped, e.weights), r.values, atol=1e-10)
    z = rep_effects(e, computational_povm(3), "E")
    np.testing.assert_allclose(z.completeness(), iota_e.values, atol=1e-10)


def test_validate_state_rep(pair):
    f, e, theta, k = pair
    rng = np.random.default_rng(4)
    for _ in range(50):
        assert validate_state_rep(represent(f, random_state(3, rng).matrix), theta, k, f.weights)
    bad = np.diag([0.9, 0.6, -0.5]).astype(complex)
    assert not validate_state_rep(represent(f, bad), theta, k, f.weights)
    with pytest.raises(ValueError):
        validate_state_rep(represent(f, bad), theta, k, f.weights, probes=[])


def test_validate_effect_rep(pair):
    f, e, theta, k = pair
    z = computational_povm(3)
    assert validate_effect_rep(rep_effects(e, z, "E").reps, k, f.weights, via="E")
    assert validate_effect_rep(rep_effects(f, z, "F").reps, k, f.weights, via="F", theta=theta)
    povm = random_povm(3, 4, 1)
    assert validate_effect_rep(rep_effects(e, povm, "E").reps, k, f.weights, via="E")
    # an indefinite "effect" pair summing to identity fails
    bad = [np.diag([1.3, 0.5, 0.5]), np.diag([-0.3, 0.5, 0.5])]
    reps = [represent(e, m) for m in bad]
    assert not validate_effect_rep(reps, k, f.weights, via="E")


def test_probe_set_contains_eigenprojectors(pair):
    f, _, _, _ = pair
    probes = pure_state_probes(f, [np.diag([1.0, 2.0, 3.0])], n_random=0)
    assert len(probes) == 3
    np.testing.assert_allclose(probes[0].values, represent(f, projector(np.eye(3)[0])).values)
