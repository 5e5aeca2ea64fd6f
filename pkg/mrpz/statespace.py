"""
State-Space Module
******************

Module for the :class:`StateSpace` class: a SISO realization
``ẋ = Ax + Bu, y = Cx`` with transfer function ``K(s) = C(sI - A)⁻¹B``,
plus transfer-function evaluation, spectra, invariant zeros and
realification of conjugate-symmetric complex models.
"""
import dataclasses
import functools
import math
import typing as t
import warnings

import numpy as np
import scipy.linalg

from .errors import NonMinimalSystem, NotConjugateSymmetric, SingularShift
from .utils import (
    Pairing,
    checked_lu,
    conjugate_pairing,
    drop_imaginary,
    is_controllable,
    is_observable,
    realification_basis,
    sort_spectrum,
)

ArrayLike = t.Union[np.ndarray, t.Sequence]

#:
ValidSystemType = t.Union[
    "StateSpace",
    t.Tuple[ArrayLike, ArrayLike, ArrayLike],
    t.Mapping[str, ArrayLike],
]


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array)
    if array.dtype.kind not in "fc":
        array = array.astype(float)
    array.flags.writeable = False
    return array


class StateSpace:
    """
    Immutable SISO realization ``(A, B, C)``.

    ``B`` is stored as an ``n×1`` column and ``C`` as a ``1×n`` row. Entries
    may be complex (the family models of :mod:`mrpz.constraints` live in the
    coordinates of a complex ``S`` before realification).

    Systems compose like their transfer functions:

    .. exec_code::

        from mrpz import StateSpace

        first = StateSpace([[-1.0]], [[1.0]], [[1.0]])
        second = StateSpace([[-2.0]], [[1.0]], [[1.0]])

        print(first(0), second(0))
        print((first + second)(0))  # parallel connection
        print((first - second)(0))  # error system
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def __init__(self, A: ArrayLike, B: ArrayLike, C: ArrayLike, /) -> None:
        A = np.atleast_2d(np.asarray(A))
        n = 0 if A.size == 0 else A.shape[0]
        A = A.reshape(n, n) if A.size == 0 else A
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}.")
        B = np.asarray(B)
        C = np.asarray(C)
        if B.size != n or C.size != n:
            raise ValueError(
                f"B and C must have {n} entries to match A, got {B.size} and {C.size}."
            )
        self.A = _frozen(A)
        self.B = _frozen(B.reshape(n, 1))
        self.C = _frozen(C.reshape(1, n))

    @classmethod
    def zero(cls) -> "StateSpace":
        """The zero system, with no states."""
        return cls(np.zeros((0, 0)), np.zeros((0, 1)), np.zeros((1, 0)))

    @staticmethod
    def get_matrices(obj: ValidSystemType, /) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Extracts ``(A, B, C)`` from a :class:`StateSpace`, a mapping with keys
        ``"A"``, ``"B"``, ``"C"``, or a 3-tuple.
        """
        if isinstance(obj, StateSpace):
            return obj.A, obj.B, obj.C
        if isinstance(obj, t.Mapping):
            try:
                return tuple(np.asarray(obj[key]) for key in ("A", "B", "C"))
            except KeyError as e:
                raise TypeError(f"Mapping needs keys 'A', 'B', 'C', got {list(obj)}.") from e
        if isinstance(obj, (tuple, list)) and len(obj) == 3:
            return tuple(np.asarray(m) for m in obj)
        raise TypeError(f"Can't get matrices from {obj.__class__.__qualname__} for object {obj!r}.")

    @classmethod
    def convert(cls, obj: ValidSystemType, /) -> "StateSpace":
        if isinstance(obj, StateSpace):
            return obj
        return cls(*cls.get_matrices(obj))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def is_real(self) -> bool:
        return not any(np.iscomplexobj(m) for m in (self.A, self.B, self.C))

    @functools.cached_property
    def is_stable(self) -> bool:
        return self.n == 0 or max(p.real for p in self.poles()) < 0

    @functools.cached_property
    def is_controllable(self) -> bool:
        return is_controllable(self.A, self.B)

    @functools.cached_property
    def is_observable(self) -> bool:
        return is_observable(self.C, self.A)

    @property
    def is_minimal(self) -> bool:
        return self.is_controllable and self.is_observable

    def check_minimal(self) -> bool:
        """Warn with :class:`NonMinimalSystem` when the realization is not minimal."""
        if not self.is_minimal:
            warnings.warn(
                f"Realization of order {self.n} is not minimal "
                f"(controllable={self.is_controllable}, observable={self.is_observable}).",
                NonMinimalSystem,
                stacklevel=2,
            )
            return False
        return True

    def poles(self) -> t.List[complex]:
        return spectrum(self)

    def zeros(self) -> t.List[complex]:
        return invariant_zeros(self)

    def derivative(self, s: complex, j: int = 1) -> complex:
        return eval_tf_deriv(self, s, j)

    def __call__(self, s: complex) -> complex:
        return eval_tf(self, s)

    def __repr__(self) -> str:
        kind = "real" if self.is_real else "complex"
        return f"<StateSpace n={self.n} {kind}>"

    def __neg__(self) -> "StateSpace":
        return StateSpace(self.A, self.B, -self.C)

    def __add__(self, other: ValidSystemType) -> "StateSpace":
        """Parallel connection: the transfer functions add."""
        try:
            other = StateSpace.convert(other)
        except TypeError:
            return NotImplemented
        n1, n2 = self.n, other.n
        A = np.block([
            [self.A, np.zeros((n1, n2))],
            [np.zeros((n2, n1)), other.A],
        ])
        B = np.vstack([self.B, other.B])
        C = np.hstack([self.C, other.C])
        return StateSpace(A, B, C)

    def __sub__(self, other: ValidSystemType) -> "StateSpace":
        """Error system: block-diagonal dynamics, output difference."""
        try:
            other = StateSpace.convert(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __eq__(self, other: t.Any) -> bool:
        if isinstance(other, StateSpace):
            return all(
                a.shape == b.shape and np.array_equal(a, b)
                for a, b in zip(self.get_matrices(self), self.get_matrices(other))
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(np.ascontiguousarray(m).tobytes() for m in (self.A, self.B, self.C)))


@dataclasses.dataclass(frozen=True)
class TransferSample:
    """A sample ``K(point)`` (``order=0``) or ``K′(point)`` (``order=1``)."""

    point: complex
    value: complex
    order: int = 0
    #: Source line when the sample was read from a file.
    line: t.Optional[int] = None

    def __post_init__(self):
        if self.order < 0:
            raise ValueError(f"Sample order must be nonnegative, got {self.order}.")
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "value", complex(self.value))

    @property
    def key(self) -> t.Tuple[complex, int]:
        return self.point, self.order


def check_samples(samples: t.Sequence[TransferSample], tol: float = 1e-10) -> None:
    """
    Validate a sample set: unique ``(point, order)`` pairs and, for every
    sample, a conjugate sample with the conjugate value.
    """
    seen: t.Dict[t.Tuple[complex, int], TransferSample] = {}
    for sample in samples:
        if sample.key in seen:
            raise ValueError(
                f"Duplicate sample at {sample.point} of order {sample.order} "
                f"(lines {seen[sample.key].line} and {sample.line})."
            )
        seen[sample.key] = sample
    for sample in samples:
        atol = tol * max(1.0, abs(sample.value))
        if sample.point.imag == 0:
            if abs(sample.value.imag) > atol:
                raise NotConjugateSymmetric(
                    f"Sample at real point {sample.point} has complex value {sample.value}"
                    + (f" (line {sample.line})." if sample.line is not None else ".")
                )
            continue
        partner = seen.get((sample.point.conjugate(), sample.order))
        if partner is None or abs(partner.value - sample.value.conjugate()) > atol:
            raise NotConjugateSymmetric(
                f"Sample at {sample.point} of order {sample.order} has no conjugate partner"
                + (f" (line {sample.line})." if sample.line is not None else ".")
            )


def _resolvent_solves(sys: StateSpace, s: complex, count: int) -> t.List[np.ndarray]:
    """``[(sI - A)⁻¹B, (sI - A)⁻²B, …]`` from one LU factorization."""
    shifted = complex(s) * np.eye(sys.n) - sys.A
    factor = checked_lu(shifted.astype(complex))
    if factor.singular:
        raise SingularShift(complex(s), factor.condition)
    columns = []
    column = sys.B.astype(complex)
    for _ in range(count):
        column = factor.solve(column)
        columns.append(column)
    return columns


def eval_tf(sys: StateSpace, s: complex) -> complex:
    """``K(s) = C(sI - A)⁻¹B`` by one dense solve."""
    return eval_tf_deriv(sys, s, 0)


def eval_tf_deriv(sys: StateSpace, s: complex, j: int) -> complex:
    """``dʲK/dsʲ(s) = (-1)ʲ j! C(sI - A)^-(j+1) B``."""
    if j < 0:
        raise ValueError(f"Derivative order must be nonnegative, got {j}.")
    if sys.n == 0:
        return 0j
    column = _resolvent_solves(sys, s, j + 1)[-1]
    return complex((-1) ** j * math.factorial(j) * (sys.C @ column).item())


def frequency_response(sys: StateSpace, points: t.Iterable[complex]) -> np.ndarray:
    return np.array([eval_tf(sys, s) for s in points], dtype=complex)


def spectrum(sys: StateSpace) -> t.List[complex]:
    """Eigenvalues of ``A``, real part descending then imaginary part descending."""
    if sys.n == 0:
        return []
    return sort_spectrum(scipy.linalg.eigvals(sys.A))


def invariant_zeros(sys: StateSpace, ratio: float = 1e-10) -> t.List[complex]:
    """
    Finite generalized eigenvalues of ``([[A, B], [C, 0]], diag(I, 0))``.

    Eigenvalues with ``|β| <= ratio * |α|`` are treated as infinite.
    """
    n = sys.n
    if n == 0:
        return []
    M = np.block([[sys.A, sys.B], [sys.C, np.zeros((1, 1))]])
    N = scipy.linalg.block_diag(np.eye(n), np.zeros((1, 1)))
    alpha, beta = scipy.linalg.eig(M, N, right=False, homogeneous_eigvals=True)
    finite = np.abs(beta) > ratio * np.abs(alpha)
    return sort_spectrum(alpha[finite] / beta[finite])


def dominant_poles(sys: StateSpace, count: int) -> t.List[complex]:
    """
    The ``count`` poles closest to the imaginary axis, keeping conjugate
    pairs together. A pair that would overshoot ``count`` is skipped in
    favour of the next real pole.
    """
    poles = spectrum(sys)
    chosen: t.List[complex] = []
    for p, q in conjugate_pairing(poles):
        unit = [poles[p]] if p == q else [poles[p], poles[q]]
        if len(chosen) + len(unit) <= count:
            chosen.extend(unit)
        if len(chosen) == count:
            break
    return chosen


def realify_matrices(
    A: np.ndarray,
    B: np.ndarray,
    C: np.ndarray,
    pairs: t.Optional[Pairing] = None,
    tol: float = 1e-10,
) -> t.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Real ``(Tᴴ A T, Tᴴ B, C T)`` for the pairing of ``diag(A)``.

    The imaginary residue of every product must stay below ``tol`` (relative
    to the matrix scale); it is then dropped.
    """
    A = np.asarray(A)
    pairs = conjugate_pairing(np.diag(A), tol) if pairs is None else pairs
    T = realification_basis(pairs, A.shape[0])
    Th = T.conj().T
    try:
        return (
            drop_imaginary(Th @ A @ T, tol),
            drop_imaginary(Th @ np.asarray(B), tol),
            drop_imaginary(np.asarray(C) @ T, tol),
        )
    except NotConjugateSymmetric as e:
        raise NotConjugateSymmetric(f"Realification failed for pairing {pairs}: {e}") from e


def realify(model: StateSpace, tol: float = 1e-10) -> StateSpace:
    """
    Real model similar to a conjugate-symmetric complex diagonal model.

    Each conjugate pair ``a ± bj`` on the diagonal becomes the block
    ``[[a, b], [-b, a]]``; the transfer function is unchanged.
    """
    if model.is_real:
        return model
    return StateSpace(*realify_matrices(model.A, model.B, model.C, tol=tol))
