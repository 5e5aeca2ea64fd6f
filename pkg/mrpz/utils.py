"""
Numerical helpers shared by the other modules: rank decisions, LU
factorizations with a condition estimate, spectra bookkeeping and the
conjugate pairing behind realification.
"""
import dataclasses
import typing as t

import numpy as np
import scipy.linalg
from scipy.linalg import get_lapack_funcs

from .config import get_tolerances
from .errors import NotConjugateSymmetric

EPS = np.finfo(float).eps

#: An LU factor whose reciprocal condition estimate is below this is singular.
SINGULAR_RCOND = EPS

Pairing = t.List[t.Tuple[int, int]]


def rank_tolerance(matrix: np.ndarray, factor: t.Optional[float] = None) -> float:
    """``max(dim) * eps * σ_max``, scaled by the configured rank factor."""
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    factor = get_tolerances().rank_factor if factor is None else factor
    return factor * max(matrix.shape) * EPS * np.linalg.norm(matrix, 2)


def numerical_rank(matrix: np.ndarray, tol: t.Optional[float] = None) -> int:
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0
    tol = rank_tolerance(matrix) if tol is None else tol
    return int(np.count_nonzero(scipy.linalg.svdvals(matrix) > tol))


def staircase_rank(A: np.ndarray, B: np.ndarray, tol: t.Optional[float] = None) -> int:
    """
    Dimension of the controllable subspace of ``(A, B)``.

    Orthogonal staircase reduction: each step compresses the current input
    block with an SVD and continues on the part of ``A`` it does not reach.
    """
    A = np.atleast_2d(np.asarray(A))
    B = np.asarray(B).reshape(A.shape[0], -1)
    n = A.shape[0]
    if n == 0:
        return 0
    tol = rank_tolerance(np.hstack([B, A])) if tol is None else tol
    reached = 0
    a_rest, b_rest = A, B
    while reached < n:
        U, s, _ = scipy.linalg.svd(b_rest)
        r = int(np.count_nonzero(s > tol))
        if r == 0:
            break
        reached += r
        if reached >= n:
            return n
        transformed = U.conj().T @ a_rest @ U
        a_rest = transformed[r:, r:]
        b_rest = transformed[r:, :r]
    return reached


def is_controllable(A, B, tol: t.Optional[float] = None) -> bool:
    A = np.atleast_2d(np.asarray(A))
    return staircase_rank(A, B, tol) == A.shape[0]


def is_observable(C, A, tol: t.Optional[float] = None) -> bool:
    A = np.atleast_2d(np.asarray(A))
    return staircase_rank(A.conj().T, np.asarray(C).conj().T, tol) == A.shape[0]


@dataclasses.dataclass(frozen=True)
class LUFactor:
    """LU factors of a square matrix plus the LAPACK reciprocal condition estimate."""

    lu: np.ndarray
    piv: np.ndarray
    rcond: float
    exact_singular: bool

    @property
    def singular(self) -> bool:
        return self.exact_singular or not self.rcond > SINGULAR_RCOND

    @property
    def condition(self) -> float:
        return np.inf if self.rcond == 0 else 1.0 / self.rcond

    def solve(self, rhs: np.ndarray, trans: int = 0) -> np.ndarray:
        return scipy.linalg.lu_solve((self.lu, self.piv), rhs, trans=trans, check_finite=False)


def checked_lu(matrix: np.ndarray) -> LUFactor:
    """LU factorization that reports singularity instead of warning about it."""
    matrix = np.asarray(matrix)
    if matrix.dtype.kind not in "fc":
        matrix = matrix.astype(float)
    assert matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1]
    if matrix.size == 0:
        return LUFactor(matrix, np.zeros(0, dtype=np.int32), 1.0, False)
    getrf, gecon = get_lapack_funcs(("getrf", "gecon"), (matrix,))
    lu, piv, info = getrf(matrix)
    if info > 0:
        return LUFactor(lu, piv, 0.0, True)
    anorm = np.linalg.norm(matrix, 1)
    if anorm == 0:
        return LUFactor(lu, piv, 0.0, True)
    rcond, _ = gecon(lu, anorm, norm="1")
    return LUFactor(lu, piv, float(rcond), False)


def spectral_gap(first: t.Sequence[complex], second: t.Sequence[complex]) -> float:
    """Smallest distance between the two point sets (``inf`` if either is empty)."""
    first = np.asarray(first, dtype=complex).ravel()
    second = np.asarray(second, dtype=complex).ravel()
    if first.size == 0 or second.size == 0:
        return np.inf
    return float(np.min(np.abs(first[:, None] - second[None, :])))


def sort_spectrum(values: t.Iterable[complex]) -> t.List[complex]:
    """Real part descending, then imaginary part descending."""
    values = np.asarray(list(values), dtype=complex)
    order = np.lexsort((-values.imag, -values.real))
    return [complex(v) for v in values[order]]


def _scale(values: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0


def conjugate_pairing(values: t.Sequence[complex], tol: float = 1e-10) -> Pairing:
    """
    Pair every entry with its conjugate.

    Real entries pair with themselves. Complex entries are matched with the
    first unmatched entry equal to their conjugate, so repeated values
    (Jordan blocks) pair in order of occurrence.
    """
    values = np.asarray(values, dtype=complex).ravel()
    atol = tol * _scale(values)
    pairs: Pairing = []
    matched = np.zeros(values.size, dtype=bool)
    for p, value in enumerate(values):
        if matched[p]:
            continue
        matched[p] = True
        if abs(value.imag) <= atol:
            pairs.append((p, p))
            continue
        candidates = [
            q for q in range(p + 1, values.size)
            if not matched[q] and abs(values[q] - value.conjugate()) <= atol
        ]
        if not candidates:
            raise NotConjugateSymmetric(f"{value} has no conjugate partner in {values.tolist()}.")
        matched[candidates[0]] = True
        pairs.append((p, candidates[0]))
    return pairs


def is_conjugate_symmetric(values: t.Sequence[complex], tol: float = 1e-10) -> bool:
    try:
        conjugate_pairing(values, tol)
    except NotConjugateSymmetric:
        return False
    return True


def realification_basis(pairs: Pairing, size: int) -> np.ndarray:
    """
    Unitary ``T`` whose columns mix each conjugate pair ``(p, q)``.

    For ``D = diag(values)`` with ``values[p] = a + bj`` the product
    ``Tᴴ D T`` holds the real block ``[[a, b], [-b, a]]`` on rows and columns
    ``p, q``. Conjugate-symmetric column vectors map to real vectors under
    ``Tᴴ`` and conjugate-symmetric row vectors map to real rows under ``T``.
    """
    T = np.zeros((size, size), dtype=complex)
    root = np.sqrt(0.5)
    for p, q in pairs:
        if p == q:
            T[p, p] = 1.0
        else:
            T[p, p] = root
            T[q, p] = root
            T[p, q] = -1j * root
            T[q, q] = 1j * root
    return T


def drop_imaginary(matrix: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Return the real part, refusing if the imaginary part is not negligible."""
    matrix = np.asarray(matrix)
    if not np.iscomplexobj(matrix):
        return matrix
    scale = _scale(np.abs(matrix).ravel())
    residue = float(np.max(np.abs(matrix.imag))) if matrix.size else 0.0
    if residue > tol * scale:
        raise NotConjugateSymmetric(
            f"Imaginary residue {residue:.3e} exceeds {tol:.1e} after realification."
        )
    return np.ascontiguousarray(matrix.real)


def symmetrize_pairs(vector: np.ndarray, pairs: Pairing, tol: float = 1e-10) -> np.ndarray:
    """
    Enforce ``v[q] = conj(v[p])`` on a vector that already nearly satisfies it.

    Raises :class:`NotConjugateSymmetric` when the mismatch exceeds ``tol``
    relative to the vector scale.
    """
    vector = np.array(vector, dtype=complex).ravel()
    atol = tol * _scale(np.abs(vector))
    for p, q in pairs:
        if p == q:
            if abs(vector[p].imag) > atol:
                raise NotConjugateSymmetric(f"Entry {p} should be real, got {vector[p]}.")
            vector[p] = vector[p].real
        else:
            if abs(vector[q] - vector[p].conjugate()) > atol:
                raise NotConjugateSymmetric(f"Entries {p} and {q} are not conjugates.")
            mean = 0.5 * (vector[p] + vector[q].conjugate())
            vector[p] = mean
            vector[q] = mean.conjugate()
    return vector


def parse_complex(text: t.Union[str, complex, float, int]) -> complex:
    """Parse ``"a+bj"`` literals (and plain numbers) into :class:`complex`."""
    if isinstance(text, (complex, float, int)) and not isinstance(text, bool):
        return complex(text)
    try:
        return complex(str(text).strip().replace(" ", ""))
    except ValueError as e:
        raise ValueError(f"Can't parse {text!r} as a complex number.") from e


def format_complex(value: complex) -> str:
    """Bit-exact ``"a+bj"`` text for :func:`parse_complex`."""
    value = complex(value)
    imag = value.imag
    sign = "-" if (imag < 0 or (imag == 0 and np.signbit(imag))) else "+"
    return f"{value.real!r}{sign}{abs(imag)!r}j"
