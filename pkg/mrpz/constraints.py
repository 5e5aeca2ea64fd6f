"""
Constraints Module
******************

Linear conditions on the free parameter ``G`` of the family

.. math::

    Σ_G: \\dot ξ = (S - GL) ξ + G u, \\quad ψ = CΠ ξ,

whose members all match the moments ``CΠ`` at ``σ(S)``. Pole rows place
``λ`` in ``σ(S - GL)``, zero rows place ``z`` among the zeros of ``K_G`` and
derivative rows match first-order moments on the derivative block. Stacked
they form a ``ν×ν`` system for ``G``.

.. exec_code::

    from mrpz import StateSpace, ConstraintSpec, reduce_with_constraints

    sys = StateSpace([[-1.0]], [[1.0]], [[1.0]])
    result = reduce_with_constraints(sys, [0, 1], ConstraintSpec(poles=[-2], derivative_points=[1]))
    print(result.G.ravel().real)
    print(result.model.poles())
"""
import concurrent.futures
import dataclasses
import functools
import logging
import typing as t
import warnings

import numpy as np
import scipy.linalg

from .config import get_tolerances, solve_tolerance
from .errors import (
    DegenerateRow,
    DuplicatePole,
    FamilyInvalid,
    IllConditioned,
    NonSquare,
    NotCanonical,
    PoleCoincidesWithPoint,
    PoleZeroCancellation,
    RankDeficient,
    SingularShift,
    SingularSystem,
    ZeroCoincidesWithPoint,
)
from .moments import (
    InterpolationSpec,
    PointsType,
    annihilating_row,
    build_upsilon_blocks,
    check_conjugate_closed,
    check_distinct,
)
from .statespace import StateSpace, eval_tf, eval_tf_deriv, realify_matrices, sort_spectrum
from .sylvester import solve_pi
from .utils import EPS, Pairing, checked_lu, numerical_rank, spectral_gap, symmetrize_pairs

log = logging.getLogger(__name__)

ROUTES = ("auto", "diagonal", "sylvester")

RowBlock = t.Tuple[np.ndarray, np.ndarray]


@dataclasses.dataclass(frozen=True)
class ConstraintSpec:
    """Prescribed poles, zeros and derivative-match points."""

    poles: t.Tuple[complex, ...] = ()
    zeros: t.Tuple[complex, ...] = ()
    derivative_points: t.Tuple[complex, ...] = ()

    def __post_init__(self):
        for name in ("poles", "zeros", "derivative_points"):
            values = tuple(complex(v) for v in getattr(self, name))
            object.__setattr__(self, name, values)
        check_distinct(self.poles, "Prescribed poles", DuplicatePole)
        check_conjugate_closed(self.poles, "Prescribed poles")
        check_conjugate_closed(self.zeros, "Prescribed zeros")

    @property
    def counts(self) -> t.Tuple[int, int, int]:
        """``(ℓ, k, μ)``."""
        return len(self.poles), len(self.zeros), len(self.derivative_points)

    @property
    def total(self) -> int:
        return sum(self.counts)

    def check_points(self, spec: InterpolationSpec) -> None:
        """Reject poles or zeros in ``σ(S)``."""
        diagonal = spec.diagonal
        scale = max(1.0, float(np.max(np.abs(diagonal))))
        for values, error in ((self.poles, PoleCoincidesWithPoint), (self.zeros, ZeroCoincidesWithPoint)):
            for value in values:
                if np.min(np.abs(diagonal - value)) <= 1e-10 * scale:
                    raise error(value)


def _is_canonical(S: np.ndarray, L: np.ndarray) -> bool:
    S = np.atleast_2d(S)
    return np.array_equal(S, np.diag(np.diag(S))) and np.all(np.asarray(L) == 1)


def _require_canonical(S: np.ndarray, L: np.ndarray, what: str) -> np.ndarray:
    if not _is_canonical(S, L):
        raise NotCanonical(f"{what} need diagonal S with L all ones.")
    return np.diag(np.atleast_2d(S)).astype(complex)


def _empty(nu: int) -> RowBlock:
    return np.zeros((0, nu)), np.zeros((0, 1))


def pole_rows_diagonal(S: np.ndarray, L: np.ndarray, poles: PointsType) -> RowBlock:
    """
    Rows ``L D_k⁻¹`` with right-hand side ``-1``, ``D_k = λ_k I - S``.

    By the Sherman-Morrison formula ``det(λ_k I - S + GL) = det(D_k)(1 + L D_k⁻¹ G)``,
    so each row enforces one pole.
    """
    s = _require_canonical(S, L, "Sherman-Morrison pole rows")
    poles = np.asarray(poles, dtype=complex).ravel()
    if poles.size == 0:
        return _empty(s.size)
    scale = max(1.0, float(np.max(np.abs(s))))
    for value in poles:
        if np.min(np.abs(value - s)) <= 1e-10 * scale:
            raise PoleCoincidesWithPoint(complex(value))
    rows = 1.0 / (poles[:, None] - s[None, :])
    return rows, -np.ones((poles.size, 1))


def pole_rows_general(Upsilon_P: np.ndarray, Pi: np.ndarray, B: np.ndarray) -> RowBlock:
    """``Υ_P Π G = Υ_P B``; any solution puts ``σ(Q_P)`` into ``σ(S - GL)``."""
    rows = np.asarray(Upsilon_P) @ np.asarray(Pi)
    ell = rows.shape[0]
    if ell and numerical_rank(rows) < ell:
        raise RankDeficient(f"Υ_P Π has rank {numerical_rank(rows)}, expected {ell}.")
    return rows, np.asarray(Upsilon_P) @ np.asarray(B).reshape(-1, 1)


def zero_rows(
    W: np.ndarray,
    S: np.ndarray,
    zeros: PointsType,
    L: t.Optional[np.ndarray] = None,
    scale: float = 1.0,
) -> RowBlock:
    """
    Rows ``η_i / (z_j - s_i)`` with zero right-hand side.

    The numerator of ``K_G(z) = W (zI - S + GL)⁻¹ G`` is ``Σ_i η_i g_i / (z - s_i)``
    up to the factor ``det(zI - S)``.
    """
    S = np.atleast_2d(np.asarray(S))
    L = np.ones((1, S.shape[0])) if L is None else L
    s = _require_canonical(S, L, "Zero rows")
    W = np.asarray(W).ravel()
    zeros = np.asarray(zeros, dtype=complex).ravel()
    if zeros.size == 0:
        return _empty(s.size)
    point_scale = max(1.0, float(np.max(np.abs(s))))
    rows = []
    for z in zeros:
        gap = np.abs(z - s)
        if np.min(gap) <= 1e-10 * point_scale:
            raise ZeroCoincidesWithPoint(complex(z))
        row = W / (z - s)
        if np.max(np.abs(row)) <= EPS * scale:
            raise DegenerateRow(f"Zero row for z={complex(z)} vanishes numerically.")
        rows.append(row)
    return np.array(rows), np.zeros((zeros.size, 1))


def deriv_rows(Upsilon_D: np.ndarray, Pi: np.ndarray, B: np.ndarray) -> RowBlock:
    """``Υ_D Π G = Υ_D B`` matches ``K_G′ = K′`` on the derivative block."""
    return np.asarray(Upsilon_D) @ np.asarray(Pi), np.asarray(Upsilon_D) @ np.asarray(B).reshape(-1, 1)


@dataclasses.dataclass(frozen=True)
class ConstraintSystem:
    """The stacked rows ``[poles; zeros; derivatives]`` with one label per row."""

    matrix: np.ndarray
    rhs: np.ndarray
    labels: t.Tuple[t.Tuple[str, complex], ...]
    order: int
    pairs: t.Optional[Pairing] = None

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def assemble(
    order: int,
    poles: t.Optional[RowBlock] = None,
    zeros: t.Optional[RowBlock] = None,
    derivatives: t.Optional[RowBlock] = None,
    spec: t.Optional[ConstraintSpec] = None,
    pairs: t.Optional[Pairing] = None,
) -> ConstraintSystem:
    blocks = [b if b is not None else _empty(order) for b in (poles, zeros, derivatives)]
    spec = spec or ConstraintSpec()
    labels = (
        [("pole", p) for p in spec.poles][:blocks[0][0].shape[0]]
        + [("zero", z) for z in spec.zeros][:blocks[1][0].shape[0]]
        + [("derivative", d) for d in spec.derivative_points][:blocks[2][0].shape[0]]
    )
    matrix = np.vstack([np.asarray(b[0]).reshape(-1, order) for b in blocks])
    rhs = np.vstack([np.asarray(b[1]).reshape(-1, 1) for b in blocks])
    return ConstraintSystem(matrix, rhs, tuple(labels), order, pairs)


def solve_G(
    spec: ConstraintSpec,
    system: ConstraintSystem,
    least_norm: bool = False,
    tol: t.Optional[float] = None,
) -> np.ndarray:
    """
    Solve the stacked system for ``G``.

    Square systems are solved by LU. With ``least_norm`` an underdetermined
    system (``ℓ + k + μ < ν``) returns the minimum 2-norm solution. When the
    system carries a conjugate pairing the result is made exactly
    conjugate-symmetric so that it realifies to a real vector.

    Raises
    ------
    NonSquare
        If ``ℓ + k + μ ≠ ν`` and least-norm mode does not apply.
    SingularSystem
        If the stacked matrix is numerically singular.
    """
    tol = solve_tolerance(tol)
    nu = system.order
    m = system.size
    if spec.total != m:
        raise ValueError(f"Constraint spec has {spec.total} entries but {m} rows were assembled.")
    matrix, rhs = system.matrix, system.rhs
    if m == nu:
        factor = checked_lu(matrix)
        log.debug("Constraint system %d×%d, condition estimate %.3e", m, nu, factor.condition)
        if factor.singular:
            raise SingularSystem("Constraint system is singular", factor.condition)
        G = factor.solve(rhs.astype(complex) if np.iscomplexobj(matrix) else rhs)
        condition = factor.condition
    elif least_norm and m < nu:
        rank = numerical_rank(matrix) if m else 0
        if rank < m:
            raise SingularSystem(f"Constraint rows have rank {rank} < {m}", np.inf)
        if m == 0:
            G = np.zeros((nu, 1))
        else:
            G = scipy.linalg.lstsq(matrix, rhs)[0]
        condition = np.linalg.cond(matrix) if m else 1.0
    else:
        raise NonSquare(
            f"ℓ + k + μ = {m} but ν = {nu}; pass least_norm to accept fewer constraints."
            if m < nu else f"ℓ + k + μ = {m} exceeds ν = {nu}."
        )
    residual = np.linalg.norm(matrix @ G - rhs)
    bound = tol * (np.linalg.norm(matrix) * np.linalg.norm(G) + np.linalg.norm(rhs))
    if residual > max(bound, 10 * EPS * condition * np.linalg.norm(rhs)):
        warnings.warn(f"Constraint residual {residual:.3e} exceeds {bound:.3e}.", IllConditioned, stacklevel=2)
    if system.pairs is not None and np.iscomplexobj(G):
        G = symmetrize_pairs(G, system.pairs, max(1e-10, 1e3 * EPS * condition)).reshape(-1, 1)
    return G.reshape(-1, 1)


@dataclasses.dataclass(frozen=True)
class ReducedModel:
    """
    A member ``Σ_G`` of the moment-matching family.

    ``W = CΠ``; the dynamics are ``F = S - GL``. :attr:`state_space` is the
    realified real model when ``σ(S)`` is closed under conjugation, and the
    complex model otherwise.
    """

    S: np.ndarray
    L: np.ndarray
    G: np.ndarray
    W: np.ndarray
    pairs: t.Optional[Pairing] = None

    @property
    def F(self) -> np.ndarray:
        return np.asarray(self.S) - np.asarray(self.G) @ np.asarray(self.L)

    @property
    def order(self) -> int:
        return self.F.shape[0]

    @functools.cached_property
    def complex_state_space(self) -> StateSpace:
        return StateSpace(self.F, self.G, self.W)

    @functools.cached_property
    def state_space(self) -> StateSpace:
        model = self.complex_state_space
        if model.is_real or self.pairs is None:
            return model
        return StateSpace(*realify_matrices(self.F, self.G, self.W, self.pairs))

    def poles(self) -> t.List[complex]:
        return sort_spectrum(scipy.linalg.eigvals(self.F))

    def __call__(self, s: complex) -> complex:
        return eval_tf(self.complex_state_space, s)

    def derivative(self, s: complex, j: int = 1) -> complex:
        return eval_tf_deriv(self.complex_state_space, s, j)


def build_reduced(
    S: np.ndarray,
    L: np.ndarray,
    G: np.ndarray,
    W: np.ndarray,
    pairs: t.Optional[Pairing] = None,
    tol: t.Optional[float] = None,
) -> ReducedModel:
    """
    Build ``Σ_G`` after checking ``σ(S - GL) ∩ σ(S) = ∅``.

    Raises
    ------
    FamilyInvalid
        If the spectra come within the family gap tolerance.
    """
    tol = get_tolerances().family_gap if tol is None else tol
    S = np.atleast_2d(np.asarray(S))
    model = ReducedModel(S, np.asarray(L).reshape(1, -1), np.asarray(G).reshape(-1, 1), np.asarray(W).reshape(1, -1), pairs)
    points = scipy.linalg.eigvals(S)
    gap = spectral_gap(model.poles(), points)
    threshold = tol * max(1.0, float(np.max(np.abs(points))))
    if gap <= threshold:
        raise FamilyInvalid(
            f"σ(S - GL) comes within {gap:.3e} of σ(S); the model does not interpolate. "
            "Perturb the interpolation points or the constraints."
        )
    return model


@dataclasses.dataclass(frozen=True)
class ConstraintResidual:
    kind: str
    point: complex
    residual: float
    scale: float
    passed: bool
    note: str = ""

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "kind": self.kind,
            "point": self.point,
            "residual": self.residual,
            "scale": self.scale,
            "passed": self.passed,
            "note": self.note,
        }


@dataclasses.dataclass(frozen=True)
class ConstraintReport:
    entries: t.Tuple[ConstraintResidual, ...]
    tolerance: float

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    def violations(self) -> t.List[ConstraintResidual]:
        return [entry for entry in self.entries if not entry.passed]

    def by_kind(self, kind: str) -> t.List[ConstraintResidual]:
        return [entry for entry in self.entries if entry.kind == kind]

    @property
    def max_residual(self) -> float:
        return max((entry.residual for entry in self.entries), default=0.0)

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "entries": [entry.to_dict() for entry in self.entries],
        }


def default_probe_points(count: int = 40) -> np.ndarray:
    """Points on the imaginary axis from ``10⁻²j`` to ``10²j``."""
    return 1j * np.logspace(-2, 2, count)


def _entry(kind, point, residual, scale, tol, note="") -> ConstraintResidual:
    relative = residual / scale
    return ConstraintResidual(kind, complex(point), float(relative), float(scale), bool(relative <= tol), note)


def verify_constraints(
    model: ReducedModel,
    spec: ConstraintSpec,
    full: StateSpace,
    interpolation: t.Optional[InterpolationSpec] = None,
    probe_points: t.Optional[t.Sequence[complex]] = None,
    require_stable: bool = False,
    tol: t.Optional[float] = None,
    max_workers: t.Optional[int] = None,
) -> ConstraintReport:
    """
    Residual of every constraint, relative to its local scale.

    Moments and derivatives are scaled by ``max(1, |K|)``, poles by
    ``max(1, |λ|)`` and zeros by ``max |K_G|`` over the probe grid. A placed
    zero that lands in ``σ(S - GL)`` is flagged with a
    :class:`PoleZeroCancellation` warning.
    """
    tol = get_tolerances().constraint if tol is None else tol
    entries: t.List[ConstraintResidual] = []
    if interpolation is None:
        blocks = [(complex(p), 1) for p in np.diag(model.S)]
    else:
        blocks = interpolation.blocks
    reduced = model.complex_state_space

    jobs = [(point, k) for point, m in blocks for k in range(m)]
    jobs += [(point, 1) for point in spec.derivative_points]
    probes = list(default_probe_points() if probe_points is None else probe_points)

    def evaluate(job):
        point, k = job
        return eval_tf_deriv(full, point, k), eval_tf_deriv(reduced, point, k)

    def probe(point):
        try:
            return abs(eval_tf(reduced, point))
        except SingularShift:
            return 0.0

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        pairs = list(executor.map(evaluate, jobs))
        magnitudes = list(executor.map(probe, probes))

    moment_count = len(jobs) - len(spec.derivative_points)
    for index, ((point, k), (expected, actual)) in enumerate(zip(jobs, pairs)):
        kind = "moment" if index < moment_count else "derivative"
        note = f"order {k}" if kind == "moment" and k else ""
        entries.append(_entry(kind, point, abs(actual - expected), max(1.0, abs(expected)), tol, note))

    poles = np.array(model.poles(), dtype=complex)
    for value in spec.poles:
        entries.append(_entry("pole", value, float(np.min(np.abs(poles - value))), max(1.0, abs(value)), tol))

    zero_scale = max(max(magnitudes, default=0.0), EPS)
    for value in spec.zeros:
        distance = float(np.min(np.abs(poles - value)))
        if distance <= tol * max(1.0, abs(value)):
            warnings.warn(f"Placed zero {value} lies in the reduced spectrum.", PoleZeroCancellation, stacklevel=2)
            entries.append(ConstraintResidual("zero", value, np.nan, zero_scale, False, "pole-zero cancellation"))
            continue
        entries.append(_entry("zero", value, abs(eval_tf(reduced, value)), zero_scale, tol))

    if require_stable:
        worst = float(np.max(poles.real))
        entries.append(ConstraintResidual("stability", complex(worst), worst, 1.0, worst < 0, "max real part of poles"))
    return ConstraintReport(tuple(entries), tol)


@dataclasses.dataclass(frozen=True)
class ReductionResult:
    model: ReducedModel
    report: ConstraintReport
    route: str
    interpolation: InterpolationSpec
    constraints: ConstraintSpec
    system: ConstraintSystem

    @property
    def G(self) -> np.ndarray:
        return self.model.G


def choose_route(interpolation: InterpolationSpec, route: str = "auto") -> str:
    if route not in ROUTES:
        raise ValueError(f"Unknown pole-row route {route!r}, expected one of {ROUTES}.")
    if route == "auto":
        return "diagonal" if interpolation.is_canonical else "sylvester"
    if route == "diagonal" and not interpolation.is_canonical:
        raise NotCanonical("The diagonal route needs simple interpolation points.")
    return route


def reduce_with_constraints(
    sys: StateSpace,
    points: t.Union[PointsType, InterpolationSpec],
    constraints: ConstraintSpec,
    least_norm: bool = False,
    require_stable: bool = False,
    route: str = "auto",
    tol: t.Optional[float] = None,
) -> ReductionResult:
    """
    Moment matching with pole, zero and derivative constraints.

    ``points`` lists the interpolation points; a repeated point gains
    multiplicity. The derivative points of ``constraints`` must be among
    them and are moved to the derivative block.
    """
    if isinstance(points, InterpolationSpec):
        interpolation = points
        if set(interpolation.derivative_points) != set(constraints.derivative_points):
            raise ValueError("Interpolation and constraint derivative points differ.")
    else:
        interpolation = InterpolationSpec.from_points(points, constraints.derivative_points)
    constraints.check_points(interpolation)
    sys.check_minimal()
    nu = interpolation.order
    route = choose_route(interpolation, route)
    S, L = interpolation.S, interpolation.L
    log.debug("Reducing order %d to %d via %s pole rows", sys.n, nu, route)

    Pi = solve_pi(sys, S, L, tol=tol)
    W = sys.C @ Pi
    ell, k, mu = constraints.counts
    if route == "sylvester" and ell:
        C_P = annihilating_row(Pi)
        blocks = build_upsilon_blocks(sys, interpolation, constraints.poles, C_P, tol=tol)
        pole_block = pole_rows_general(blocks.Upsilon_P, Pi, sys.B)
    else:
        blocks = build_upsilon_blocks(sys, interpolation, (), tol=tol)
        pole_block = pole_rows_diagonal(S, L, constraints.poles)
    K_scale = float(np.max(np.abs(W))) if W.size else 1.0
    zero_block = zero_rows(W, S, constraints.zeros, L, scale=K_scale) if k else None
    deriv_block = deriv_rows(blocks.Upsilon_D, Pi, sys.B) if mu else None

    system = assemble(nu, pole_block, zero_block, deriv_block, constraints, interpolation.pairs)
    G = solve_G(constraints, system, least_norm=least_norm, tol=tol)
    model = build_reduced(S, L, G, W, interpolation.pairs)
    report = verify_constraints(model, constraints, sys, interpolation, require_stable=require_stable)
    if not report.passed:
        log.warning("Constraint report failed: %s", [e.kind for e in report.violations()])
    return ReductionResult(model, report, route, interpolation, constraints, system)
