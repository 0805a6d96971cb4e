import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unitary_finsler.errors import DomainError, ImaginaryResidue
from unitary_finsler.norms import (
    FinslerNorm,
    NormKind,
    check_hessian_properties,
    elementary_inequalities,
    hessian_form,
    operator_norm,
    quadratic_form,
    quadratic_form_identity,
    schatten_norm,
    second_derivative_oracle,
)
from unitary_finsler.sampling import random_antihermitian, random_complex, trial_generator


def test_operator_and_schatten_norms_of_diagonal():
    x = np.diag([3.0, -4.0])
    assert operator_norm(x) == pytest.approx(4.0)
    assert schatten_norm(x, FinslerNorm.schatten(2)) == pytest.approx(5.0)
    assert schatten_norm(x, FinslerNorm.normalized(2)) == pytest.approx(5.0 / np.sqrt(2))


def test_norm_of_zero_matrix():
    assert FinslerNorm.schatten(4).of(np.zeros((3, 3))) == 0.0
    assert FinslerNorm.operator().of(np.zeros((3, 3))) == 0.0


def test_finsler_norm_selection():
    assert FinslerNorm.parse("operator").kind is NormKind.OPERATOR
    assert FinslerNorm.parse("schatten", 4).label() == "schatten-4"
    assert FinslerNorm.parse("schatten", 6, normalized=True).label() == "normalized-schatten-6"
    with pytest.raises(DomainError):
        FinslerNorm.schatten(3)
    with pytest.raises(DomainError):
        FinslerNorm.parse("nuclear", 2)


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 10))
def test_schatten_norms_approach_operator_norm(seed, dim):
    w = random_antihermitian(trial_generator(seed, 1), dim, 1.0)
    standard = [schatten_norm(w, FinslerNorm.schatten(p)) for p in (4, 8, 16, 32, 64)]
    normalized = [schatten_norm(w, FinslerNorm.normalized(p)) for p in (4, 8, 16, 32, 64)]
    assert all(b <= a + 1e-12 for a, b in zip(standard, standard[1:]))
    # trace-normalized norms grow with p towards the operator norm
    assert all(a <= b + 1e-12 for a, b in zip(normalized, normalized[1:]))
    for p, value in zip((4, 8, 16, 32, 64), standard):
        assert 1.0 - 1e-12 <= value <= dim ** (1.0 / p) + 1e-12
    assert normalized[-1] <= 1.0 + 1e-12


def test_quadratic_form_matches_second_derivative(rng):
    a = random_antihermitian(rng, 4, 1.0)
    b = random_antihermitian(rng, 4, 1.0)
    assert quadratic_form(a, b, 4) == pytest.approx(second_derivative_oracle(a, b, 4), rel=1e-9, abs=1e-10)


def test_quadratic_form_p6_close_to_finite_difference(rng):
    a = random_antihermitian(rng, 3, 0.8)
    b = random_antihermitian(rng, 3, 0.8)
    assert quadratic_form(a, b, 6) == pytest.approx(second_derivative_oracle(a, b, 6, h=1e-2), rel=1e-5)


@settings(deadline=None, max_examples=40)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(2, 6), p=st.sampled_from([4, 6]))
def test_hessian_properties_hold(seed, dim, p):
    rng = trial_generator(seed, 2)
    a = random_antihermitian(rng, dim, rng.uniform(0.1, 2.0))
    b = random_antihermitian(rng, dim, rng.uniform(0.1, 2.0))
    report = check_hessian_properties(a, b, p)
    assert report.is_ok
    assert report.Q_b >= -1e-10
    assert report.property2_lhs == pytest.approx(quadratic_form_identity(a, b, p), rel=1e-9, abs=1e-9)


def test_quadratic_form_vanishes_for_zero_direction(rng):
    a = random_antihermitian(rng, 3, 1.0)
    assert quadratic_form(a, np.zeros((3, 3)), 4) == pytest.approx(0.0)


def test_hessian_form_detects_imaginary_residue():
    b = np.diag([1.0, 2.0]).astype(complex)
    with pytest.raises(ImaginaryResidue):
        hessian_form(np.eye(2), b, 1j * b, 4)


def test_hessian_form_rejects_small_p(rng):
    a = random_antihermitian(rng, 2, 1.0)
    with pytest.raises(DomainError):
        hessian_form(a, a, a, 2)


def test_elementary_inequalities(rng):
    x = random_complex(rng, 4)
    y = random_complex(rng, 4)
    xy, bound, modulus, same = elementary_inequalities(x, y, 4)
    assert xy <= bound + 1e-12
    assert modulus == pytest.approx(same, rel=1e-12)


@pytest.mark.parametrize("p", [4, 6, 8])
def test_hessian_form_is_symmetric(rng, p):
    a, b, c = (random_antihermitian(rng, 4, 1.2) for _ in range(3))
    assert hessian_form(a, b, c, p) == pytest.approx(hessian_form(a, c, b, p), rel=1e-10, abs=1e-12)
