import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mrpz.config import TOLERANCE_ENV, Tolerances, get_tolerances, solve_tolerance
from mrpz.errors import NotConjugateSymmetric
from mrpz.utils import (
    checked_lu,
    conjugate_pairing,
    drop_imaginary,
    format_complex,
    is_conjugate_symmetric,
    is_controllable,
    is_observable,
    numerical_rank,
    parse_complex,
    realification_basis,
    sort_spectrum,
    spectral_gap,
    symmetrize_pairs,
)

finite = st.floats(allow_nan=False, allow_infinity=False)


@pytest.mark.utils
@given(finite, finite)
def test_complex_text_is_exact(real, imag):
    """
    Test to ensure that complex scalars written with `format_complex` read
        back bit for bit, signed zeros included.
    """
    value = complex(real, imag)
    parsed = parse_complex(format_complex(value))
    assert parsed == value
    assert np.signbit(parsed.imag) == np.signbit(value.imag)


@pytest.mark.utils
def test_format_complex_literals():
    assert format_complex(1 + 2j) == "1.0+2.0j"
    assert format_complex(complex(0.1, -3)) == "0.1-3.0j"
    assert parse_complex(" 2 - 1j ") == 2 - 1j
    assert parse_complex(3) == 3 + 0j
    with pytest.raises(ValueError):
        parse_complex("two")


@pytest.mark.utils
def test_conjugate_pairing():
    """Test to ensure that real entries pair with themselves and complex entries with their conjugate."""
    assert conjugate_pairing([1.0, 1j, 2.0, -1j]) == [(0, 0), (1, 3), (2, 2)]
    assert conjugate_pairing([1j, 1j, -1j, -1j]) == [(0, 2), (1, 3)]
    with pytest.raises(NotConjugateSymmetric):
        conjugate_pairing([1j, 2.0])
    assert not is_conjugate_symmetric([1 + 1j])
    assert is_conjugate_symmetric([])


@pytest.mark.utils
@given(
    st.floats(min_value=-5, max_value=5),
    st.floats(min_value=0.1, max_value=5),
)
def test_realification_basis(a, b):
    """
    Test to ensure that the basis is unitary and turns a conjugate pair on
        the diagonal into the real block [[a, b], [-b, a]].
    """
    T = realification_basis([(0, 1)], 2)
    D = np.diag([complex(a, b), complex(a, -b)])
    np.testing.assert_allclose(T.conj().T @ T, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(T.conj().T @ D @ T, [[a, b], [-b, a]], atol=1e-12)


@pytest.mark.utils
def test_drop_imaginary():
    np.testing.assert_array_equal(drop_imaginary(np.array([1 + 1e-14j, 2])), [1.0, 2.0])
    with pytest.raises(NotConjugateSymmetric):
        drop_imaginary(np.array([1 + 1e-3j]))


@pytest.mark.utils
def test_symmetrize_pairs():
    vector = np.array([1 + 1e-13j, 2 + 1j, 2 - 1j + 1e-13])
    result = symmetrize_pairs(vector, [(0, 0), (1, 2)])
    assert result[0] == 1.0
    assert result[2] == np.conj(result[1])
    with pytest.raises(NotConjugateSymmetric):
        symmetrize_pairs(np.array([1j, 2.0]), [(0, 1)])


@pytest.mark.utils
def test_checked_lu():
    """Test to ensure that singular matrices are reported rather than warned about."""
    assert checked_lu(np.zeros((2, 2))).singular
    assert checked_lu(np.array([[1.0, 1.0], [1.0, 1.0]])).singular
    factor = checked_lu(np.eye(3))
    assert not factor.singular
    assert factor.condition == pytest.approx(1.0)
    np.testing.assert_allclose(factor.solve(np.ones((3, 1))), np.ones((3, 1)))


@pytest.mark.utils
def test_rank_and_controllability():
    A = np.diag([-1.0, -2.0])
    assert numerical_rank(np.array([[1.0, 2.0], [2.0, 4.0]])) == 1
    assert is_controllable(A, np.array([[1.0], [1.0]]))
    assert not is_controllable(A, np.array([[1.0], [0.0]]))
    assert is_observable(np.array([[1.0, 1.0]]), A)
    assert not is_observable(np.array([[0.0, 1.0]]), A)


@pytest.mark.utils
def test_sort_spectrum_and_gap():
    """Test to ensure spectra sort by real part, then imaginary part, both descending."""
    assert sort_spectrum([-1, 1j, 2, -1j]) == [2, 1j, -1j, -1]
    assert spectral_gap([0, 1], [3, 1.5]) == pytest.approx(0.5)
    assert spectral_gap([], [1]) == np.inf


@pytest.mark.utils
def test_tolerances_from_environment():
    """Test to ensure that MRPZ_TOL overrides only the solve tolerance."""
    assert get_tolerances({}) == Tolerances()
    assert get_tolerances({TOLERANCE_ENV: " "}) == Tolerances()
    custom = get_tolerances({TOLERANCE_ENV: "1e-6"})
    assert custom.solve == 1e-6
    assert custom.constraint == Tolerances().constraint
    for raw in ("abc", "0", "-1e-3"):
        with pytest.raises(ValueError):
            get_tolerances({TOLERANCE_ENV: raw})


@pytest.mark.utils
def test_solve_tolerance(monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)
    assert solve_tolerance() == 1e-10
    assert solve_tolerance(1e-3) == 1e-3
    monkeypatch.setenv(TOLERANCE_ENV, "1e-7")
    assert solve_tolerance() == 1e-7
