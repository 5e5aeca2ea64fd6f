import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import central_difference, numerator_roots, response
from strategies import point_sets, stable_systems

from mrpz import StateSpace, TransferSample, eval_tf, eval_tf_deriv, invariant_zeros
from mrpz.errors import NonMinimalSystem, NotConjugateSymmetric, SingularShift
from mrpz.statespace import check_samples, dominant_poles, frequency_response, realify, spectrum
from mrpz.systems import first_order, random_system, second_order, synthetic_system


@pytest.mark.lti
def test_eval_tf_examples():
    """Test to ensure K(s) = 1/(s+1) and 1/((s+1)(s+2)) evaluate to their closed forms."""
    assert eval_tf(first_order(), 0) == pytest.approx(1.0)
    assert eval_tf(first_order(), 1) == pytest.approx(0.5)
    assert eval_tf(second_order(), 0) == pytest.approx(0.5)
    assert first_order()(1j) == pytest.approx(1 / (1 + 1j))


@pytest.mark.lti
def test_eval_tf_deriv_examples():
    """Test to ensure that dʲ/dsʲ 1/(s+1) = (-1)ʲ j!/(s+1)^(j+1)."""
    sys = first_order()
    assert eval_tf_deriv(sys, 0, 0) == pytest.approx(1.0)
    assert eval_tf_deriv(sys, 0, 1) == pytest.approx(-1.0)
    assert eval_tf_deriv(sys, 0, 2) == pytest.approx(2.0)
    assert eval_tf_deriv(sys, 1, 1) == pytest.approx(-0.25)
    with pytest.raises(ValueError):
        eval_tf_deriv(sys, 0, -1)


@pytest.mark.lti
def test_singular_shift():
    """Test to ensure that evaluating at a pole raises SingularShift carrying the point."""
    with pytest.raises(SingularShift) as info:
        eval_tf(first_order(), -1)
    assert info.value.point == -1
    with pytest.raises(SingularShift):
        eval_tf_deriv(second_order(), -2, 1)


@pytest.mark.lti
@given(stable_systems(max_n=8), point_sets(max_order=2))
def test_eval_tf_matches_dense_solve(sys, points):
    for s in points:
        assert eval_tf(sys, s) == pytest.approx(response(sys, s), rel=1e-10, abs=1e-12)


@pytest.mark.lti
@given(stable_systems(max_n=8), point_sets(max_order=2))
def test_derivative_matches_finite_difference(sys, points):
    """
    Test to ensure that the first derivative agrees with a central
        difference of K around each point.
    """
    for s in points:
        expected = central_difference(sys, s)
        assert eval_tf_deriv(sys, s, 1) == pytest.approx(expected, rel=1e-5, abs=1e-7)


@pytest.mark.lti
def test_zero_system():
    zero = StateSpace.zero()
    assert zero.n == 0
    assert zero(1.0) == 0
    assert zero.is_stable
    assert zero.poles() == []
    assert repr(zero) == "<StateSpace n=0 real>"


@pytest.mark.lti
def test_dimension_checks():
    with pytest.raises(ValueError):
        StateSpace([[1.0, 2.0]], [1.0], [1.0])
    with pytest.raises(ValueError):
        StateSpace([[-1.0]], [1.0, 2.0], [1.0])


@pytest.mark.lti
def test_arrays_are_read_only():
    sys = first_order()
    with pytest.raises(ValueError):
        sys.A[0, 0] = 2.0


@pytest.mark.lti
def test_convert():
    """Test to ensure StateSpace.convert accepts systems, mappings and 3-tuples."""
    sys = first_order()
    assert StateSpace.convert(sys) is sys
    assert StateSpace.convert(([[-1.0]], [[1.0]], [[1.0]])) == sys
    assert StateSpace.convert({"A": [[-1.0]], "B": [1.0], "C": [1.0]}) == sys
    with pytest.raises(TypeError):
        StateSpace.convert(3)
    with pytest.raises(TypeError):
        StateSpace.convert({"A": [[-1.0]]})


@pytest.mark.lti
def test_parallel_and_error_systems():
    """Test to ensure that + adds transfer functions and - forms the error system."""
    first, second = first_order(), second_order()
    assert (first + second)(0) == pytest.approx(1.5)
    assert (first - second)(0) == pytest.approx(0.5)
    assert (first - first)(2j) == pytest.approx(0)
    assert (first - first).n == 2
    assert (-first)(0) == pytest.approx(-1)


@pytest.mark.lti
def test_stability_and_minimality():
    assert first_order().is_stable
    assert not StateSpace([[1.0]], [[1.0]], [[1.0]]).is_stable
    assert synthetic_system(6).is_minimal
    redundant = StateSpace(np.diag([-1.0, -2.0]), [[1.0], [0.0]], [[1.0, 1.0]])
    assert not redundant.is_controllable
    assert redundant.is_observable
    with pytest.warns(NonMinimalSystem):
        assert not redundant.check_minimal()


@pytest.mark.lti
def test_spectrum_order():
    sys = StateSpace(np.array([[-1.0, 2.0], [-2.0, -1.0]]), [[1.0], [0.0]], [[1.0, 0.0]])
    poles = spectrum(sys)
    assert poles[0] == pytest.approx(-1 + 2j)
    assert poles[1] == pytest.approx(-1 - 2j)


@pytest.mark.lti
def test_invariant_zeros_example():
    """Test to ensure K(s) = (s+3)/((s+1)(s+2)) has its single zero at -3."""
    sys = StateSpace([[0.0, 1.0], [-2.0, -3.0]], [[0.0], [1.0]], [[3.0, 1.0]])
    zeros = invariant_zeros(sys)
    assert len(zeros) == 1
    assert zeros[0] == pytest.approx(-3)
    assert second_order().zeros() == []


@pytest.mark.lti
@given(stable_systems(min_n=3, max_n=5))
def test_invariant_zeros_match_numerator(sys):
    expected = numerator_roots(sys)
    zeros = invariant_zeros(sys)
    assert len(zeros) == len(expected)
    for zero in zeros:
        assert np.min(np.abs(expected - zero)) <= 1e-4 * max(1.0, abs(zero))


@pytest.mark.lti
def test_dominant_poles_keep_pairs():
    sys = synthetic_system(6)
    chosen = dominant_poles(sys, 2)
    assert len(chosen) == 2
    assert chosen[0] == pytest.approx(np.conj(chosen[1]))
    slowest = max(p.real for p in sys.poles())
    assert chosen[0].real == pytest.approx(slowest)
    assert dominant_poles(synthetic_system(7), 1) == [pytest.approx(-1.0)]


@pytest.mark.lti
@given(st.floats(min_value=-3, max_value=-0.1), st.floats(min_value=0.1, max_value=3))
def test_realify_preserves_transfer_function(a, b):
    """
    Test to ensure that a conjugate-symmetric complex diagonal model and its
        realification have the same transfer function.
    """
    pole = complex(a, b)
    model = StateSpace(np.diag([pole, pole.conjugate()]), [[1 + 2j], [1 - 2j]], [[0.5 - 1j, 0.5 + 1j]])
    real = realify(model)
    assert real.is_real
    np.testing.assert_allclose(real.A, [[a, b], [-b, a]], atol=1e-12)
    probes = [0, 1j, 2 + 1j]
    np.testing.assert_allclose(frequency_response(real, probes), frequency_response(model, probes), rtol=1e-10)


@pytest.mark.lti
def test_realify_rejects_asymmetric_data():
    model = StateSpace(np.diag([-1 + 1j, -1 - 1j]), [[1.0], [2.0j]], [[1.0, 1.0]])
    with pytest.raises(NotConjugateSymmetric):
        realify(model)


@pytest.mark.lti
def test_check_samples():
    """Test to ensure sample sets must be duplicate free and closed under conjugation."""
    sys = random_system(4, seed=1)
    good = [TransferSample(1j, sys(1j)), TransferSample(-1j, sys(-1j)), TransferSample(0, sys(0))]
    check_samples(good)
    with pytest.raises(ValueError):
        check_samples(good + [TransferSample(0, sys(0))])
    with pytest.raises(NotConjugateSymmetric):
        check_samples(good[:1])
    with pytest.raises(NotConjugateSymmetric):
        check_samples([TransferSample(1.0, 1 + 1j)])
    with pytest.raises(ValueError):
        TransferSample(0, 1, order=-1)
