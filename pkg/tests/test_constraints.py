import time
import typing as t
import warnings

import numpy as np
import pytest
import scipy.linalg
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from strategies import point_sets, pole_sets, random_family_parameter, seeds, stable_systems, zero_sets

from mrpz import ConstraintSpec, InterpolationSpec, reduce_with_constraints
from mrpz.constraints import (
    ConstraintSystem,
    assemble,
    build_reduced,
    choose_route,
    default_probe_points,
    deriv_rows,
    pole_rows_diagonal,
    solve_G,
    verify_constraints,
    zero_rows,
)
from mrpz.errors import (
    DuplicatePole,
    FamilyInvalid,
    IllConditioned,
    NonSquare,
    NotCanonical,
    NotConjugateSymmetric,
    PoleCoincidesWithPoint,
    RankDeficient,
    SingularSystem,
    ZeroCoincidesWithPoint,
)
from mrpz.loewner import LoewnerPair, reduce_from_loewner
from mrpz.moments import build_upsilon_blocks, moment_table_via_pi
from mrpz.sylvester import solve_pi
from mrpz.statespace import eval_tf, eval_tf_deriv
from mrpz.systems import first_order, random_system, second_order


def nearest(values, target):
    return float(np.min(np.abs(np.asarray(values) - target)))


@pytest.mark.constraints
def test_first_order_pole_placement():
    """Test to ensure ν=1, s=0, λ=-2 on 1/(s+1) gives G=2 and F=-2."""
    result = reduce_with_constraints(first_order(), [0], ConstraintSpec(poles=[-2]))
    assert result.route == "diagonal"
    np.testing.assert_allclose(result.G, [[2.0]], rtol=1e-12)
    np.testing.assert_allclose(result.model.F, [[-2.0]], rtol=1e-12)
    assert result.model(0) == pytest.approx(1.0, rel=1e-12)
    assert result.report.passed


@pytest.mark.constraints
def test_pole_and_derivative_example():
    """
    Test to ensure ν=2, S=diag(0, 1), λ=-2 with a derivative match at 1
        gives G=[-2, 6] and the spectrum {-1, -2}.
    """
    sys = first_order()
    constraints = ConstraintSpec(poles=[-2], derivative_points=[1])
    interpolation = InterpolationSpec.from_points([0, 1], constraints.derivative_points)
    S, L = interpolation.S, interpolation.L
    # ν exceeds n here, so Π is built without its rank check.
    Pi = solve_pi(sys, S, L, check=False)
    blocks = build_upsilon_blocks(sys, interpolation, ())
    system = assemble(
        2,
        pole_rows_diagonal(S, L, constraints.poles),
        derivatives=deriv_rows(blocks.Upsilon_D, Pi, sys.B),
        spec=constraints,
    )
    G = solve_G(constraints, system)
    np.testing.assert_allclose(G.ravel(), [-2.0, 6.0], rtol=1e-12)
    model = build_reduced(S, L, G, sys.C @ Pi, interpolation.pairs)
    np.testing.assert_allclose(model.poles(), [-1.0, -2.0], rtol=1e-12)
    assert model.derivative(1) == pytest.approx(sys.derivative(1), rel=1e-12)
    report = verify_constraints(model, constraints, sys, interpolation)
    assert report.passed
    assert [entry.kind for entry in report.entries] == ["moment", "moment", "derivative", "pole"]


@pytest.mark.constraints
def test_rank_deficient_pi():
    """Test to ensure ν > n is rejected by the pipeline."""
    with pytest.raises(RankDeficient):
        reduce_with_constraints(first_order(), [0, 1], ConstraintSpec(poles=[-2], derivative_points=[1]))


@pytest.mark.constraints
def test_coincidence_errors():
    with pytest.raises(PoleCoincidesWithPoint) as info:
        reduce_with_constraints(first_order(), [0, 1], ConstraintSpec(poles=[0, -3]))
    assert info.value.point == 0
    with pytest.raises(ZeroCoincidesWithPoint):
        reduce_with_constraints(second_order(), [0, 1], ConstraintSpec(poles=[-3], zeros=[1]))


@pytest.mark.constraints
def test_constraint_counts():
    """Test to ensure ℓ + k + μ ≠ ν raises NonSquare unless a least-norm member is requested."""
    sys = random_system(6, seed=4)
    with pytest.raises(NonSquare):
        reduce_with_constraints(sys, [0, 1, 2], ConstraintSpec(poles=[-2]))
    with pytest.raises(NonSquare):
        reduce_with_constraints(sys, [0], ConstraintSpec(poles=[-2, -3]))
    result = reduce_with_constraints(sys, [0, 1, 2], ConstraintSpec(poles=[-2]), least_norm=True)
    assert nearest(result.model.poles(), -2) < 1e-9
    assert result.report.passed


@pytest.mark.constraints
def test_constraint_spec_validation():
    with pytest.raises(DuplicatePole):
        ConstraintSpec(poles=[-1, -1])
    with pytest.raises(NotConjugateSymmetric):
        ConstraintSpec(poles=[-1 + 1j])
    with pytest.raises(NotConjugateSymmetric):
        ConstraintSpec(zeros=[2j])
    assert ConstraintSpec(poles=[-1], zeros=[2, 3]).counts == (1, 2, 0)


@pytest.mark.constraints
def test_pole_rows_diagonal():
    """Test to ensure the Sherman-Morrison rows are 1/(λ - sⱼ) with right-hand side -1."""
    rows, rhs = pole_rows_diagonal(np.diag([0.0, 1.0]), np.ones((1, 2)), [-2])
    np.testing.assert_allclose(rows, [[-0.5, -1 / 3]])
    np.testing.assert_allclose(rhs, [[-1.0]])
    with pytest.raises(NotCanonical):
        pole_rows_diagonal(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([[1.0, 0.0]]), [-2])
    with pytest.raises(PoleCoincidesWithPoint):
        pole_rows_diagonal(np.diag([0.0, 1.0]), np.ones((1, 2)), [1])


@pytest.mark.constraints
def test_zero_rows():
    rows, rhs = zero_rows(np.array([[1.0, 0.5]]), np.diag([0.0, 1.0]), [-3])
    np.testing.assert_allclose(rows, [[-1 / 3, -0.125]])
    np.testing.assert_array_equal(rhs, [[0.0]])
    with pytest.raises(ZeroCoincidesWithPoint):
        zero_rows(np.array([[1.0, 0.5]]), np.diag([0.0, 1.0]), [0])


@pytest.mark.constraints
def test_solve_g_failures():
    spec = ConstraintSpec(poles=[-1, -2])
    system = assemble(2, (np.array([[1.0, 1.0], [1.0, 1.0]]), np.array([[1.0], [1.0]])), spec=spec)
    with pytest.raises(SingularSystem):
        solve_G(spec, system)
    wide = assemble(1, (np.array([[1.0], [2.0]]), np.array([[1.0], [1.0]])), spec=spec)
    with pytest.raises(NonSquare):
        solve_G(spec, wide, least_norm=True)


@pytest.mark.constraints
def test_family_invalid():
    """Test to ensure σ(S - GL) meeting σ(S) is rejected."""
    with pytest.raises(FamilyInvalid):
        build_reduced(np.diag([0.0, 1.0]), np.ones((1, 2)), np.zeros((2, 1)), np.array([[1.0, 0.5]]))


@pytest.mark.constraints
def test_choose_route():
    canonical = InterpolationSpec.from_points([0, 1])
    jordan = InterpolationSpec.from_points([0, 0])
    assert choose_route(canonical) == "diagonal"
    assert choose_route(jordan) == "sylvester"
    assert choose_route(canonical, "sylvester") == "sylvester"
    with pytest.raises(NotCanonical):
        choose_route(jordan, "diagonal")
    with pytest.raises(ValueError):
        choose_route(canonical, "fast")


@pytest.mark.constraints
def test_require_stable_flags_unstable_result():
    """Test to ensure an unstable placement fails the report only when stability is required."""
    points, constraints = [0, 1], ConstraintSpec(poles=[2, -2])
    relaxed = reduce_with_constraints(second_order(), points, constraints)
    assert relaxed.report.passed
    strict = reduce_with_constraints(second_order(), points, constraints, require_stable=True)
    assert not strict.report.passed
    assert [entry.kind for entry in strict.report.violations()] == ["stability"]


@pytest.mark.constraints
def test_multiplicity_uses_sylvester_rows():
    """
    Test to ensure a repeated interpolation point matches η₀ and η₁ there
        while the Sylvester pole rows place every prescribed pole.
    """
    sys = random_system(8, seed=3)
    poles = [-1.5, -2.5, -3.5]
    result = reduce_with_constraints(sys, [0, 0, 1], ConstraintSpec(poles=poles))
    assert result.route == "sylvester"
    for pole in poles:
        assert nearest(result.model.poles(), pole) < 1e-7 * abs(pole)
    assert result.model.derivative(0) == pytest.approx(sys.derivative(0), rel=1e-7)
    assert result.report.passed


@pytest.mark.constraints
def test_report_to_dict():
    result = reduce_with_constraints(first_order(), [0], ConstraintSpec(poles=[-2]))
    data = result.report.to_dict()
    assert data["passed"] is True
    assert {entry["kind"] for entry in data["entries"]} == {"moment", "pole"}
    assert result.report.max_residual < 1e-12
    assert result.report.by_kind("zero") == []


@pytest.mark.constraints
@given(stable_systems(min_n=8, max_n=16), point_sets(min_order=2, max_order=6), seeds)
def test_every_family_member_matches_moments(sys, points, seed):
    """
    Test to ensure that any conjugate-symmetric G gives a model matching K
        at every interpolation point.
    """
    spec = InterpolationSpec.from_points(points)
    table = moment_table_via_pi(sys, spec)
    G = random_family_parameter(list(spec.diagonal), seed)
    try:
        model = build_reduced(spec.S, spec.L, G, table.W, spec.pairs)
    except FamilyInvalid:
        assume(False)
    for point in spec.diagonal:
        assert model(point) == pytest.approx(eval_tf(sys, point), rel=1e-6, abs=1e-10)
    assert model.state_space.is_real


@pytest.mark.constraints
@given(stable_systems(min_n=7, max_n=12), point_sets(min_order=1, max_order=4), st.data())
def test_pole_routes_agree(sys, points, data):
    """
    Test to ensure the Sherman-Morrison rows and the Sylvester rows give the
        same G, and both place every prescribed pole.
    """
    poles = data.draw(pole_sets(len(points)))
    constraints = ConstraintSpec(poles=poles)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditioned)
        diagonal = reduce_with_constraints(sys, points, constraints, route="diagonal")
        general = reduce_with_constraints(sys, points, constraints, route="sylvester")
    scale = max(1.0, np.linalg.norm(diagonal.G))
    assert np.linalg.norm(diagonal.G - general.G) <= 1e-6 * scale
    for pole in poles:
        assert nearest(diagonal.model.poles(), pole) <= 1e-6 * max(1.0, abs(pole))
        assert nearest(general.model.poles(), pole) <= 1e-6 * max(1.0, abs(pole))


@pytest.mark.constraints
@given(stable_systems(min_n=6, max_n=12), point_sets(min_order=2, max_order=4), st.data())
def test_zero_placement(sys, points, data):
    """Test to ensure placed zeros are zeros of K_G relative to its peak on the probe grid."""
    k = data.draw(st.integers(min_value=1, max_value=len(points) - 1))
    zeros = data.draw(zero_sets(k))
    poles = data.draw(pole_sets(len(points) - k))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            result = reduce_with_constraints(sys, points, ConstraintSpec(poles=poles, zeros=zeros))
        except FamilyInvalid:
            assume(False)
    for zero in zeros:
        assume(nearest(result.model.poles(), zero) > 1e-3)
    peak = max(abs(result.model(p)) for p in default_probe_points())
    for zero in zeros:
        assert abs(result.model(zero)) <= 1e-7 * peak


@pytest.mark.constraints
def test_zero_report():
    sys = random_system(6, seed=5)
    constraints = ConstraintSpec(poles=[-2], zeros=[-0.6, 1.3])
    result = reduce_with_constraints(sys, [0, 1, 2], constraints)
    entries = result.report.by_kind("zero")
    assert [entry.point for entry in entries] == [-0.6, 1.3]
    assert all(entry.passed for entry in entries)


@pytest.mark.constraints
@given(stable_systems(min_n=6, max_n=12), point_sets(min_order=1, max_order=4))
def test_full_derivative_matching(sys, points):
    """Test to ensure μ = ν matches value and first derivative at every point."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditioned)
        result = reduce_with_constraints(sys, points, ConstraintSpec(derivative_points=points))
    for point in points:
        expected = eval_tf_deriv(sys, point, 1)
        assert result.model.derivative(point) == pytest.approx(expected, rel=1e-6, abs=1e-9)
        assert result.model(point) == pytest.approx(eval_tf(sys, point), rel=1e-6, abs=1e-10)


@pytest.mark.constraints
def test_verify_constraints_default_blocks():
    """Test to ensure verification works from the model alone when no interpolation data is passed."""
    sys = second_order()
    result = reduce_with_constraints(sys, [0, 1], ConstraintSpec(poles=[-3, -4]))
    report = verify_constraints(result.model, result.constraints, sys)
    assert report.passed
    assert len(report.by_kind("moment")) == 2


@pytest.mark.constraints
@settings(max_examples=200)
@given(point_sets(min_order=1, max_order=6), seeds, st.data())
def test_sherman_morrison_reduction(points, seed, data):
    """
    Test to ensure det(D_k + GL) = det(D_k)(1 + L D_k⁻¹ G), and that both
        vanish together once G satisfies the pole row.
    """
    pole = data.draw(pole_sets(2))[0]
    s = np.array(points, dtype=complex)
    d = pole - s
    L = np.ones((1, s.size))
    G = random_family_parameter(points, seed).astype(complex)

    def scale(G):
        return 1.0 + float(np.sum(np.abs(G.ravel() / d)))

    factor = 1.0 + np.sum(G.ravel() / d)
    determinant = np.linalg.det(np.diag(d) + G @ L)
    assert determinant == pytest.approx(np.prod(d) * factor, rel=1e-8, abs=1e-10 * np.prod(np.abs(d)) * scale(G))

    G[0, 0] -= factor * d[0]
    rows, rhs = pole_rows_diagonal(np.diag(s), L, [pole])
    assert abs((rows @ G - rhs)[0, 0]) <= 1e-10 * scale(G)
    singular_values = scipy.linalg.svdvals(np.diag(d) + G @ L)
    assert singular_values[-1] <= 1e-9 * singular_values[0]
    assert nearest(np.linalg.eigvals(np.diag(s) - G @ L), pole) <= 1e-6 * max(1.0, abs(pole))


def best_time(fn, repeat: int = 30) -> float:
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def solve_times(nu: int) -> t.Tuple[float, float]:
    """Warm best-of timings of the constraint solve and the Loewner inversion at order ``nu``."""
    rng = np.random.default_rng(nu)
    matrix = rng.standard_normal((nu, nu)) + nu * np.eye(nu)
    spec = ConstraintSpec(poles=[-(1.0 + k) for k in range(nu)])
    system = ConstraintSystem(matrix, rng.standard_normal((nu, 1)), tuple(("pole", p) for p in spec.poles), nu)
    S = np.diag(np.arange(nu, dtype=float))
    L = np.ones((1, nu))
    V = -matrix @ np.ones((nu, 1))
    pair = LoewnerPair(matrix, matrix @ S + V @ L, V, rng.standard_normal((1, nu)), S, S, L)
    return best_time(lambda: solve_G(spec, system)), best_time(lambda: reduce_from_loewner(pair))


@pytest.mark.constraints
@pytest.mark.slow
def test_solve_time_scaling():
    """Test to ensure doubling ν from 16 to 32 costs at most ten times the solve time."""
    solve_times(16)
    small, large = solve_times(16), solve_times(32)
    assert large[0] <= 10 * small[0]
    assert large[1] <= 10 * small[1]
