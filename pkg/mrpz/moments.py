"""
Moments Module
**************

Interpolation data and the structural matrices built from it: the moment
table ``CΠ``, the annihilating row ``C_P`` and the stacked ``Υ`` blocks.

Points of multiplicity ``m`` are encoded as an ``m×m`` upper Jordan block in
``S`` with ``L`` segment ``[1, 0, …, 0]``. Column ``k`` of such a block in
``CΠ`` holds ``(-1)ᵏ η_k``.
"""
import collections
import dataclasses
import logging
import math
import typing as t

import numpy as np
import scipy.linalg

from .errors import (
    DuplicatePole,
    NoLeftNullspace,
    NotCanonical,
    NotConjugateSymmetric,
    SingularLoewner,
)
from .statespace import StateSpace, eval_tf, eval_tf_deriv
from .sylvester import canonical_blocks, solve_pi, solve_upsilon
from .utils import EPS, Pairing, conjugate_pairing, numerical_rank, rank_tolerance

log = logging.getLogger(__name__)

PointsType = t.Sequence[complex]


def _complex_tuple(values: t.Iterable) -> t.Tuple[complex, ...]:
    return tuple(complex(v) for v in values)


def check_conjugate_closed(values: PointsType, what: str, tol: float = 1e-10) -> Pairing:
    try:
        return conjugate_pairing(values, tol)
    except NotConjugateSymmetric as e:
        raise NotConjugateSymmetric(f"{what} are not closed under conjugation: {e}") from e


def check_distinct(values: PointsType, what: str, error: t.Type[Exception] = ValueError) -> None:
    values = np.asarray(values, dtype=complex)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    for i in range(values.size):
        for j in range(i + 1, values.size):
            if abs(values[i] - values[j]) <= 1e-10 * scale:
                raise error(f"{what} contain the repeated value {values[i]}.")


@dataclasses.dataclass(frozen=True)
class InterpolationSpec:
    """
    Distinct interpolation points with multiplicities.

    Derivative points are simple points whose first-order moment is matched
    through ``Υ_D``; they form the trailing block ``S_D`` of ``S``. The other
    points keep their order in the leading block ``S_p``.

    .. exec_code::

        from mrpz import InterpolationSpec

        spec = InterpolationSpec.from_points([1, 0, 0], derivative_points=[1])
        print(spec.blocks)
        print(spec.S)
        print(spec.L)
    """

    points: t.Tuple[complex, ...]
    multiplicities: t.Tuple[int, ...] = ()
    derivative_points: t.Tuple[complex, ...] = ()

    def __post_init__(self):
        points = _complex_tuple(self.points)
        multiplicities = tuple(int(m) for m in self.multiplicities) or (1,) * len(points)
        derivative_points = _complex_tuple(self.derivative_points)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "multiplicities", multiplicities)
        object.__setattr__(self, "derivative_points", derivative_points)
        if not points:
            raise ValueError("At least one interpolation point is required.")
        if len(multiplicities) != len(points):
            raise ValueError(
                f"Got {len(multiplicities)} multiplicities for {len(points)} points."
            )
        if min(multiplicities) < 1:
            raise ValueError(f"Multiplicities must be positive, got {multiplicities}.")
        check_distinct(points, "Interpolation points")
        check_distinct(derivative_points, "Derivative points")
        lookup = dict(zip(points, multiplicities))
        for point in derivative_points:
            if point not in lookup:
                raise ValueError(f"Derivative point {point} is not an interpolation point.")
            if lookup[point] != 1:
                raise ValueError(f"Derivative point {point} must be simple, got multiplicity {lookup[point]}.")
        expanded = [p for p, m in zip(points, multiplicities) for _ in range(m)]
        check_conjugate_closed(expanded, "Interpolation points")
        check_conjugate_closed(derivative_points, "Derivative points")

    @classmethod
    def from_points(
        cls,
        points: PointsType,
        derivative_points: PointsType = (),
    ) -> "InterpolationSpec":
        """Repeated entries of ``points`` raise the multiplicity of that point."""
        counts = collections.Counter(_complex_tuple(points))
        distinct = list(dict.fromkeys(_complex_tuple(points)))
        return cls(tuple(distinct), tuple(counts[p] for p in distinct), tuple(derivative_points))

    @property
    def blocks(self) -> t.List[t.Tuple[complex, int]]:
        """``(point, multiplicity)`` in the order of ``S``: leading block, then derivative block."""
        derivative = set(self.derivative_points)
        lead = [(p, m) for p, m in zip(self.points, self.multiplicities) if p not in derivative]
        return lead + [(p, 1) for p in self.derivative_points]

    @property
    def order(self) -> int:
        return sum(self.multiplicities)

    @property
    def derivative_count(self) -> int:
        return len(self.derivative_points)

    @property
    def lead_order(self) -> int:
        """Size of ``S_p``."""
        return self.order - self.derivative_count

    @property
    def is_canonical(self) -> bool:
        """Diagonal ``S`` with ``L`` all ones."""
        return all(m == 1 for m in self.multiplicities)

    @property
    def diagonal(self) -> np.ndarray:
        return np.array([p for p, m in self.blocks for _ in range(m)], dtype=complex)

    @property
    def S(self) -> np.ndarray:
        S = scipy.linalg.block_diag(*[
            point * np.eye(m) + np.eye(m, k=1) for point, m in self.blocks
        ]).astype(complex)
        return S.real.copy() if not np.any(S.imag) else S

    @property
    def L(self) -> np.ndarray:
        return np.hstack([np.eye(1, m) for _, m in self.blocks])

    @property
    def L1(self) -> np.ndarray:
        return self.L[:, :self.lead_order]

    @property
    def L2(self) -> np.ndarray:
        return self.L[:, self.lead_order:]

    @property
    def S_p(self) -> np.ndarray:
        return self.S[:self.lead_order, :self.lead_order]

    @property
    def S_D(self) -> np.ndarray:
        return self.S[self.lead_order:, self.lead_order:]

    @property
    def pairs(self) -> Pairing:
        """Conjugate pairing of the diagonal of ``S``."""
        return conjugate_pairing(self.diagonal)


def moment(sys: StateSpace, s: complex, j: int) -> complex:
    """``η_j(s) = (-1)ʲ / j! · dʲK/dsʲ(s)``."""
    if j == 0:
        return eval_tf(sys, s)
    return (-1) ** j / math.factorial(j) * eval_tf_deriv(sys, s, j)


@dataclasses.dataclass(frozen=True)
class MomentTable:
    """``CΠ`` for the generator ``(S, L)`` of an :class:`InterpolationSpec`."""

    spec: InterpolationSpec
    values: np.ndarray
    L: t.Optional[np.ndarray] = None

    @property
    def W(self) -> np.ndarray:
        return np.asarray(self.values).reshape(1, -1)

    def moments(self) -> t.Dict[complex, t.List[complex]]:
        """``{s_i: [η_0(s_i), …, η_{j_i}(s_i)]}``."""
        L = self.spec.L if self.L is None else self.L
        blocks = canonical_blocks(self.spec.S, L)
        if blocks is None:
            raise NotCanonical("Moments can only be read off a canonical generator.")
        values = np.asarray(self.values).ravel()
        table = {}
        start = 0
        for point, size, weight in blocks:
            if weight == 0:
                raise NotCanonical(f"L vanishes on the block at {point}.")
            table[point] = [(-1) ** k * values[start + k] / weight for k in range(size)]
            start += size
        return table

    def __getitem__(self, key: t.Tuple[complex, int]) -> complex:
        point, order = key
        return self.moments()[complex(point)][order]


def moment_table_via_pi(
    sys: StateSpace,
    spec: InterpolationSpec,
    L: t.Optional[np.ndarray] = None,
    tol: t.Optional[float] = None,
) -> MomentTable:
    """``CΠ`` with ``Π`` from :func:`mrpz.sylvester.solve_pi`."""
    L = spec.L if L is None else np.asarray(L).reshape(1, -1)
    Pi = solve_pi(sys, spec.S, L, tol=tol)
    return MomentTable(spec, (sys.C @ Pi).ravel(), L)


def moment_table_direct(sys: StateSpace, spec: InterpolationSpec) -> MomentTable:
    """The canonical table from :func:`moment` evaluations, without ``Π``."""
    values = [
        (-1) ** k * moment(sys, point, k)
        for point, m in spec.blocks
        for k in range(m)
    ]
    return MomentTable(spec, np.array(values, dtype=complex))


def _normalise_sign(row: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(row))
    for value in row:
        if abs(value) > 1e-12 * scale:
            phase = value / abs(value)
            return row / phase
    return row


def annihilating_row(Pi: np.ndarray) -> np.ndarray:
    """
    Unit row ``C_P`` with ``C_P Π = 0``.

    Taken as the left singular direction of ``Π`` with the smallest singular
    value; when the columns of ``Π`` are closed under conjugation the real
    stacked matrix ``[Re Π, Im Π]`` is used so that ``C_P`` is real. The
    first nonzero entry is made positive.
    """
    Pi = np.atleast_2d(np.asarray(Pi))
    n, nu = Pi.shape
    if nu >= n:
        raise NoLeftNullspace(f"Π is {n}×{nu}; no left nullspace.")
    if np.iscomplexobj(Pi):
        stacked = np.hstack([Pi.real, Pi.imag])
        if numerical_rank(stacked, rank_tolerance(Pi)) <= nu:
            Pi = stacked
    U, _, _ = scipy.linalg.svd(Pi)
    row = U[:, -1].conj()
    row = _normalise_sign(row)
    if np.iscomplexobj(row) and not np.any(row.imag):
        row = row.real
    return row.reshape(1, n)


@dataclasses.dataclass(frozen=True)
class UpsilonBlocks:
    """
    ``Υ = [Υ_P; Υ_D]`` solving ``QΥ = ΥA + 𝐑(C_P, C)`` with
    ``Q = diag(Q_P, S_D)`` and ``𝐑(C_P, C) = [R_P C_P; R C]``.
    """

    Upsilon_P: np.ndarray
    Upsilon_D: np.ndarray
    Q: np.ndarray
    R_P: np.ndarray
    R_D: np.ndarray
    C_P: t.Optional[np.ndarray]
    B: np.ndarray
    C: np.ndarray

    @property
    def Upsilon(self) -> np.ndarray:
        return np.vstack([self.Upsilon_P, self.Upsilon_D])

    @property
    def UpsilonB(self) -> np.ndarray:
        return self.Upsilon @ self.B

    @property
    def forcing(self) -> np.ndarray:
        """``𝐑(C_P, C)``."""
        n = self.B.shape[0]
        top = self.R_P @ self.C_P if self.C_P is not None else np.zeros((0, n))
        return np.vstack([top, self.R_D @ self.C])


def build_upsilon_blocks(
    sys: StateSpace,
    spec: InterpolationSpec,
    poles: PointsType,
    C_P: t.Optional[np.ndarray] = None,
    normalise: bool = False,
    tol: t.Optional[float] = None,
) -> UpsilonBlocks:
    """
    Solve for ``Υ_P`` (``Q_P = diag(λ)``, ``R_P`` ones) and ``Υ_D``
    (``Q_D = S_D``, ``R = L₂ᵀ``).

    With ``normalise=True`` each pole row is rescaled so ``Υ_P B = 1``,
    which replaces ``R_P`` by ``1 / (Υ_P B)`` entrywise.

    Raises
    ------
    DuplicatePole
        If ``poles`` has repeated values.
    SpectraOverlap
        If a pole or a derivative point lies in ``σ(A)``.
    """
    poles = _complex_tuple(poles)
    check_distinct(poles, "Prescribed poles", DuplicatePole)
    n = sys.n
    ell = len(poles)
    if ell and C_P is None:
        C_P = annihilating_row(solve_pi(sys, spec.S, spec.L, tol=tol))
    if ell:
        Q_P = np.diag(np.array(poles, dtype=complex))
        if not any(p.imag for p in poles):
            Q_P = Q_P.real
        R_P = np.ones((ell, 1))
        Upsilon_P = solve_upsilon(Q_P, sys, R_P, C_P, tol=tol)
        if normalise:
            scale = (Upsilon_P @ sys.B).ravel()
            tiny = EPS * np.linalg.norm(Upsilon_P) * np.linalg.norm(sys.B)
            if np.any(np.abs(scale) <= tiny):
                raise SingularLoewner("Υ_P B vanishes, so the pole rows can't be normalised", np.inf)
            Upsilon_P = Upsilon_P / scale[:, None]
            R_P = (1.0 / scale).reshape(-1, 1)
    else:
        Q_P = np.zeros((0, 0))
        R_P = np.zeros((0, 1))
        Upsilon_P = np.zeros((0, n))
    S_D = spec.S_D
    R_D = spec.L2.T
    if S_D.size:
        Upsilon_D = solve_upsilon(S_D, sys, R_D, sys.C, tol=tol)
    else:
        Upsilon_D = np.zeros((0, n))
    log.debug("Υ blocks: %d pole rows, %d derivative rows", ell, Upsilon_D.shape[0])
    return UpsilonBlocks(
        Upsilon_P=Upsilon_P,
        Upsilon_D=Upsilon_D,
        Q=scipy.linalg.block_diag(Q_P, S_D),
        R_P=R_P,
        R_D=R_D,
        C_P=C_P,
        B=np.asarray(sys.B),
        C=np.asarray(sys.C),
    )
