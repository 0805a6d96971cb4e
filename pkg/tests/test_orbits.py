import numpy as np
import pytest

from unitary_finsler.errors import (
    ClosedFormMismatch,
    DomainError,
    NormTooLarge,
    NotTangent,
    NumericalDomainError,
    OutsideSection,
    SingleEigenvalue,
)
from unitary_finsler.linalg import adjoint, mat_exp
from unitary_finsler.norms import operator_norm
from unitary_finsler.orbits import (
    MinimalLifting,
    OrbitPath,
    OrbitTangent,
    SpectralDecomposition,
    canonical_lifting,
    commutator_decay,
    cross_section_theta,
    delta,
    derivation_gap,
    derivation_gap_report,
    derivation_matrix,
    kernel_projection,
    measured_derivation_gap,
    minimal_lifting,
    minimality_probe,
    orbit_competitor_length,
    piecewise_lift,
    quotient_norm,
    range_membership,
)
from unitary_finsler.sampling import random_antihermitian, random_complex, random_orbit_point, random_unitary


def _orbit(rng, eigenvalues, multiplicities):
    a = random_orbit_point(rng, eigenvalues, multiplicities)
    return a, SpectralDecomposition.from_matrix(a)


def _block_lower_bound(spectral, z):
    return max(operator_norm(p @ z @ (np.eye(spectral.dim) - p)) for p in spectral.projections)


def test_spectral_decomposition_groups_eigenvalues(rng):
    a, spectral = _orbit(rng, [1.0, 0.0, -1.0], [2, 1, 1])
    assert spectral.n_blocks == 3
    assert spectral.block_sizes == [1, 1, 2]
    assert np.allclose(spectral.eigenvalues, [-1.0, 0.0, 1.0])
    assert spectral.distinguished_block == 2
    assert operator_norm(spectral.reconstruct() - a) < 1e-12


def test_distinguished_block_needs_a_unique_largest_block(rng):
    _, spectral = _orbit(rng, [1.0, 0.0], [2, 2])
    assert spectral.distinguished_block is None
    _, spectral = _orbit(rng, [1.0, 0.0, 2.0], [1, 1, 1])
    assert spectral.distinguished_block is None


def test_from_parts_validates():
    p = np.diag([1.0, 0.0]).astype(np.complex128)
    spectral = SpectralDecomposition.from_parts([3.0, -1.0], [p, np.eye(2) - p])
    assert np.allclose(spectral.reconstruct(), np.diag([3.0, -1.0]))
    with pytest.raises(DomainError):
        SpectralDecomposition.from_parts([3.0, -1.0], [p, p])
    with pytest.raises(DomainError):
        SpectralDecomposition.from_parts([1.0, 1.0], [p, np.eye(2) - p])


def test_delta_and_derivation_matrix(rng):
    b = np.diag([1.0, 0.0]).astype(np.complex128)
    y = np.array([[0, 1], [0, 0]], dtype=np.complex128)
    assert np.allclose(delta(b, y), [[0, -1], [0, 0]])
    with pytest.raises(DomainError):
        delta(b, np.eye(3))
    a, _ = _orbit(rng, [2.0, 0.5, -1.0], [1, 2, 1])
    y = random_complex(rng, 4)
    assert np.allclose(derivation_matrix(a) @ y.flatten(order="F"), delta(a, y).flatten(order="F"))


def test_kernel_projection_is_a_conditional_expectation(rng):
    _, spectral = _orbit(rng, [1.0, 0.0, -2.0], [2, 1, 2])
    x = random_complex(rng, 5)
    px = kernel_projection(spectral, x)
    assert operator_norm(kernel_projection(spectral, px) - px) < 1e-12
    c1 = spectral.kernel_direction(rng, 1.0)
    c2 = spectral.kernel_direction(rng, 1.0)
    assert operator_norm(kernel_projection(spectral, c1 @ x @ c2) - c1 @ px @ c2) < 1e-10
    assert operator_norm(delta(spectral.reconstruct(), px)) < 1e-10


def test_range_membership(rng):
    a, spectral = _orbit(rng, [1.0, 0.0, -1.0], [1, 2, 1])
    w = delta(a, random_complex(rng, 4))
    assert range_membership(spectral, w)
    assert range_membership(spectral, np.zeros((4, 4)))
    assert not range_membership(spectral, spectral.projections[0])
    matrix = derivation_matrix(a)
    for target, solvable in ((w, True), (spectral.projections[0], False)):
        vec = target.flatten(order="F")
        solution = np.linalg.lstsq(matrix, vec, rcond=None)[0]
        residual = np.linalg.norm(matrix @ solution - vec)
        assert (residual < 1e-9) == solvable


def test_derivation_gap():
    two = SpectralDecomposition.from_matrix(np.diag([1.0, 0.0]))
    assert derivation_gap(two) == pytest.approx(1.0)
    assert measured_derivation_gap(two) == pytest.approx(1.0)
    wide = SpectralDecomposition.from_matrix(np.diag([2.0, 0.0, 0.0]))
    assert derivation_gap(wide) == pytest.approx(2.0)
    assert measured_derivation_gap(wide) == pytest.approx(2.0)
    with pytest.raises(SingleEigenvalue):
        derivation_gap(SpectralDecomposition.from_matrix(np.eye(3)))
    with pytest.raises(SingleEigenvalue):
        measured_derivation_gap(SpectralDecomposition.from_matrix(np.eye(3)))


def test_derivation_gap_report(rng):
    _, spectral = _orbit(rng, [3.0, 1.0, 0.0], [1, 1, 2])
    report = derivation_gap_report(spectral, rng, samples=50)
    assert report.eigen_gap == pytest.approx(1.0)
    assert report.measured_gap == pytest.approx(1.0)
    assert report.operator_ratio > 0


def test_cross_section(rng):
    a = np.diag([1.0, 1.0, 0.0]).astype(np.complex128)
    spectral = SpectralDecomposition.from_matrix(a)
    assert np.allclose(cross_section_theta(spectral, np.eye(3)), np.eye(3))
    u = mat_exp(random_antihermitian(rng, 3, 0.2))
    theta = cross_section_theta(spectral, u)
    b = u @ a @ adjoint(u)
    assert operator_norm(theta @ a @ adjoint(theta) - b) < 1e-10
    w = mat_exp(spectral.kernel_direction(rng, 1.0))
    assert operator_norm(cross_section_theta(spectral, u @ w) - theta) < 1e-10


def test_cross_section_outside_the_ball():
    spectral = SpectralDecomposition.from_matrix(np.diag([1.0, 0.0]))
    swap = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    with pytest.raises(OutsideSection):
        cross_section_theta(spectral, swap)


def test_canonical_lifting_and_tangent_construction(rng):
    a, spectral = _orbit(rng, [1.0, 0.0, -1.0], [1, 2, 1])
    x = delta(a, random_antihermitian(rng, 4))
    z = canonical_lifting(spectral, x)
    assert operator_norm(z + adjoint(z)) < 1e-12
    assert operator_norm(kernel_projection(spectral, z)) < 1e-10
    tangent = OrbitTangent.from_vector(spectral, x)
    assert tangent.is_consistent()
    with pytest.raises(NotTangent):
        OrbitTangent.from_vector(spectral, spectral.projections[1])


def test_quotient_norm_of_two_block_orbit_is_the_corner(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [1, 1])
    z = random_antihermitian(rng, 2)
    tangent = OrbitTangent.from_lifting(a, z)
    corner = abs((adjoint(spectral.frames[0]) @ z @ spectral.frames[1])[0, 0])
    assert quotient_norm(spectral, tangent) == pytest.approx(corner, rel=1e-10)
    assert quotient_norm(spectral, OrbitTangent.from_lifting(a, np.zeros((2, 2)))) == 0.0


def test_quotient_norm_bounds_and_invariance(rng):
    a, spectral = _orbit(rng, [2.0, 1.0, 0.0], [1, 1, 1])
    z = random_antihermitian(rng, 3, 1.0)
    tangent = OrbitTangent.from_lifting(a, z)
    value = quotient_norm(spectral, tangent)
    assert _block_lower_bound(spectral, z) - 1e-9 <= value
    assert value <= operator_norm(canonical_lifting(spectral, tangent.vector)) + 1e-12
    u = random_unitary(rng, 3)
    moved = u @ a @ adjoint(u)
    moved_tangent = OrbitTangent.from_lifting(moved, u @ z @ adjoint(u))
    assert quotient_norm(SpectralDecomposition.from_matrix(moved), moved_tangent) == pytest.approx(value, abs=1e-6)


def test_quotient_norm_rejects_foreign_base(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [1, 1])
    tangent = OrbitTangent.from_lifting(a + np.eye(2), random_antihermitian(rng, 2))
    with pytest.raises(DomainError):
        quotient_norm(spectral, tangent)


def test_minimal_lifting_of_zero_vector(rng):
    a, spectral = _orbit(rng, [1.0, 0.0, -1.0], [1, 1, 1])
    result = minimal_lifting(spectral, OrbitTangent.from_lifting(a, np.zeros((3, 3), dtype=np.complex128)))
    assert result.quotient_norm == 0.0
    assert result.unique


def test_minimal_lifting_around_a_projection_is_codiagonal(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [2, 3])
    z = random_antihermitian(rng, 5, 1.0)
    result = minimal_lifting(spectral, OrbitTangent.from_lifting(a, z))
    codiagonal = z - kernel_projection(spectral, z)
    assert result.quotient_norm == pytest.approx(operator_norm(codiagonal), rel=1e-10)
    assert operator_norm(delta(a, result.z_c) - delta(a, z)) < 1e-10


def test_minimal_lifting_with_distinguished_block(rng):
    a, spectral = _orbit(rng, [2.0, 1.0, 0.0], [1, 1, 2])
    z = random_antihermitian(rng, 4, 1.0)
    tangent = OrbitTangent.from_lifting(a, z)
    result = minimal_lifting(spectral, tangent, restarts=4)
    assert operator_norm(delta(a, result.z_c) - tangent.vector) < 1e-9
    assert operator_norm(result.z_c + adjoint(result.z_c)) < 1e-12
    assert result.quotient_norm <= quotient_norm(spectral, tangent, restarts=4) + 1e-12
    assert result.quotient_norm >= _block_lower_bound(spectral, z) - 1e-9
    for _ in range(20):
        d = spectral.kernel_direction(rng, rng.uniform(0.05, 1.0))
        assert operator_norm(result.z_c + d) >= result.quotient_norm - 1e-6


def test_certificate_accepts_codiagonal_lifting(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [1, 2])
    z = random_antihermitian(rng, 3, 1.0)
    result = minimal_lifting(spectral, OrbitTangent.from_lifting(a, z), certify=30, rng=rng)
    assert len(result.certificate) == 30
    assert result.certified()
    assert result.min_norm_slack >= -1e-12


def test_certificate_rejects_shifted_lifting(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [1, 1])
    z = random_antihermitian(rng, 2)
    z_c = z - kernel_projection(spectral, z)
    z_c *= 0.5 / operator_norm(z_c)
    eps = 0.2
    shifted = MinimalLifting(z_c + 1j * eps * np.eye(2), 0.5 + eps)
    entries = minimality_probe(spectral, shifted, 5, rng, directions=[-1j * eps * np.eye(2)])
    shifted.certificate = entries
    assert entries[0].norm_slack == pytest.approx(-eps, abs=1e-12)
    assert not shifted.certified()


def test_minimality_probe_needs_small_lifting(rng):
    _, spectral = _orbit(rng, [1.0, 0.0], [1, 1])
    big = MinimalLifting(np.diag([2.0j, -2.0j]), 2.0)
    with pytest.raises(NormTooLarge):
        minimality_probe(spectral, big, 3, rng)


def test_orbit_competitors_are_longer(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [2, 2])
    z = random_antihermitian(rng, 4)
    z_c = z - kernel_projection(spectral, z)
    z_c *= 1.2 / operator_norm(z_c)
    for _ in range(50):
        assert orbit_competitor_length(spectral, z_c, rng) >= 1.2 - 1e-9


def _conjugation_path(a, z):
    def point(t):
        u = mat_exp(t * z)
        return u @ a @ adjoint(u)

    return OrbitPath(point=point, velocity=lambda t: delta(point(t), z))


def test_piecewise_lift_along_a_minimal_geodesic(rng):
    a, spectral = _orbit(rng, [1.0, 0.0], [1, 2])
    z = random_antihermitian(rng, 3)
    z = z - kernel_projection(spectral, z)
    z *= 0.5 / operator_norm(z)
    lift = piecewise_lift(_conjugation_path(a, z), 8)
    assert len(lift.liftings) == 8
    assert lift.endpoint_error < 1e-8
    assert lift.length == pytest.approx(0.5, rel=1e-9)


def test_piecewise_lift_converges(rng):
    a, _ = _orbit(rng, [1.0, 0.0], [1, 2])
    path = _conjugation_path(a, random_antihermitian(rng, 3, 0.8))
    coarse = piecewise_lift(path, 4)
    fine = piecewise_lift(path, 32)
    assert fine.endpoint_error < coarse.endpoint_error
    assert fine.length <= 0.8 + 1e-9
    with pytest.raises(DomainError):
        piecewise_lift(path, 0)


def test_commutator_decay():
    assert commutator_decay([1.0, 2.0, 3.0], 1) == (0.0, 2.0)
    value, bound = commutator_decay([1.0, 0.0], 2)
    assert value == pytest.approx(0.5)
    assert bound == pytest.approx(1.0)
    lambdas = 1.0 / np.arange(1, 201)
    values = [commutator_decay(lambdas, k) for k in (10, 50, 200)]
    assert all(value <= bound for value, bound in values)
    assert values[2][1] < values[0][1]
    with pytest.raises(DomainError):
        commutator_decay([1.0], 2)


def test_commutator_decay_reports_cancelled_closed_form():
    # k sum l² - (sum l)² cancels to a multiple of 2 while the direct value is 0.5
    with pytest.raises(ClosedFormMismatch) as excinfo:
        commutator_decay([1e8 + 1.0, 1e8], 2)
    assert isinstance(excinfo.value, NumericalDomainError)
