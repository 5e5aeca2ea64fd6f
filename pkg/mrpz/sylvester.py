"""
Sylvester Module
****************

Dense solvers for ``M X - X N = RHS`` and the two structured instances the
reduction layer needs: ``Π`` from ``AΠ + BL = ΠS`` and ``Υ`` from
``QΥ = ΥA + R C``.

When ``S`` (or ``Q``) is a canonical generator, block diagonal with Jordan
blocks and ``L`` (or ``R``) carrying one nonzero entry per block, the
solution is assembled from resolvent solves instead.
"""
import dataclasses
import logging
import typing as t
import warnings

import numpy as np
import scipy.linalg

from .config import solve_tolerance
from .errors import IllConditioned, RankDeficient, SpectraOverlap
from .statespace import StateSpace
from .utils import checked_lu, is_controllable, is_observable, numerical_rank, spectral_gap

log = logging.getLogger(__name__)

#: Largest number of unknowns the Kronecker backend accepts.
KRON_LIMIT = 400

BACKENDS = ("schur", "kron")


@dataclasses.dataclass(frozen=True)
class SylvesterProblem:
    """``M X - X N = RHS`` with ``M`` of size ``p×p`` and ``N`` of size ``q×q``."""

    M: np.ndarray
    N: np.ndarray
    RHS: np.ndarray

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M))
        N = np.atleast_2d(np.asarray(self.N))
        p = 0 if M.size == 0 else M.shape[0]
        q = 0 if N.size == 0 else N.shape[0]
        M = M.reshape(p, p)
        N = N.reshape(q, q)
        RHS = np.asarray(self.RHS)
        if RHS.size != p * q:
            raise ValueError(f"RHS must be {p}×{q}, got shape {RHS.shape}.")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "RHS", RHS.reshape(p, q))

    @property
    def shape(self) -> t.Tuple[int, int]:
        return self.RHS.shape

    @property
    def scale(self) -> float:
        """``‖M‖ + ‖N‖`` (Frobenius)."""
        return float(np.linalg.norm(self.M) + np.linalg.norm(self.N))

    def residual(self, X: np.ndarray) -> float:
        return float(np.linalg.norm(self.M @ X - X @ self.N - self.RHS))

    def check_spectra(self, tol: t.Optional[float] = None) -> float:
        """Raise :class:`SpectraOverlap` unless ``σ(M)`` and ``σ(N)`` are separated."""
        tol = solve_tolerance(tol)
        p, q = self.shape
        if p == 0 or q == 0:
            return np.inf
        gap = spectral_gap(scipy.linalg.eigvals(self.M), scipy.linalg.eigvals(self.N))
        threshold = tol * self.scale
        if gap < threshold or gap == 0:
            raise SpectraOverlap(gap, threshold)
        return gap

    def check_residual(self, X: np.ndarray, tol: t.Optional[float] = None) -> float:
        """Warn with :class:`IllConditioned` when the residual bound is missed."""
        tol = solve_tolerance(tol)
        residual = self.residual(X)
        bound = tol * self.scale * np.linalg.norm(X)
        if residual > bound and residual > tol * np.linalg.norm(self.RHS):
            warnings.warn(
                f"Sylvester residual {residual:.3e} exceeds {bound:.3e}.",
                IllConditioned,
                stacklevel=3,
            )
        return residual


def _solve_kron(prob: SylvesterProblem) -> np.ndarray:
    p, q = prob.shape
    if p * q > KRON_LIMIT:
        raise ValueError(
            f"The Kronecker backend handles at most {KRON_LIMIT} unknowns, got {p * q}."
        )
    # Column-major vec: vec(MX - XN) = (I ⊗ M - Nᵀ ⊗ I) vec(X).
    operator = np.kron(np.eye(q), prob.M) - np.kron(prob.N.T, np.eye(p))
    vec = scipy.linalg.solve(operator, prob.RHS.reshape(-1, order="F"))
    return vec.reshape(p, q, order="F")


def solve_sylvester(
    prob: SylvesterProblem,
    backend: str = "schur",
    tol: t.Optional[float] = None,
) -> np.ndarray:
    """
    Solve ``M X - X N = RHS``.

    Parameters
    ----------
    prob : SylvesterProblem
        Coefficients and right-hand side.
    backend : str
        ``"schur"`` (Bartels-Stewart through :func:`scipy.linalg.solve_sylvester`)
        or ``"kron"`` (dense Kronecker linearization, small problems only).
    tol : float, optional
        Relative tolerance for the spectral gap and the residual check.

    Raises
    ------
    SpectraOverlap
        If ``min |μ_i - ν_j| < tol (‖M‖ + ‖N‖)``.
    """
    if backend not in BACKENDS:
        raise ValueError(f"Unknown Sylvester backend {backend!r}, expected one of {BACKENDS}.")
    p, q = prob.shape
    complex_data = any(np.iscomplexobj(m) for m in (prob.M, prob.N, prob.RHS))
    dtype = complex if complex_data else float
    if p == 0 or q == 0:
        return np.zeros((p, q), dtype=dtype)
    gap = prob.check_spectra(tol)
    log.debug("Sylvester %d×%d via %s, spectral gap %.3e", p, q, backend, gap)
    if backend == "kron":
        X = _solve_kron(prob)
    else:
        X = scipy.linalg.solve_sylvester(prob.M, -prob.N, prob.RHS)
    X = np.asarray(X, dtype=dtype)
    prob.check_residual(X, tol)
    return X


def solve_lyapunov(A: np.ndarray, rhs: np.ndarray, tol: t.Optional[float] = None) -> np.ndarray:
    """Hermitian ``X`` with ``AX + XAᴴ + rhs = 0``, as a Sylvester problem."""
    A = np.atleast_2d(np.asarray(A))
    X = solve_sylvester(SylvesterProblem(A, -A.conj().T, -np.asarray(rhs)), tol=tol)
    return 0.5 * (X + X.conj().T)


def canonical_blocks(
    S: np.ndarray,
    L: np.ndarray,
) -> t.Optional[t.List[t.Tuple[complex, int, complex]]]:
    """
    ``[(point, size, weight), …]`` when ``S`` is block diagonal with upper
    Jordan blocks (ones on the superdiagonal) and ``L`` is nonzero only on the
    first entry of each block, else ``None``.

    Diagonal ``S`` gives blocks of size one with weight ``L[j]``.
    """
    S = np.atleast_2d(np.asarray(S))
    L = np.asarray(L).ravel()
    nu = S.shape[0]
    if nu == 0:
        return []
    expected = np.diag(np.diag(S)) + np.diag(np.diag(S, 1), 1)
    if not np.array_equal(S, expected):
        return None
    blocks = []
    start = 0
    for j in range(1, nu + 1):
        if j < nu and S[j - 1, j] == 1 and S[j, j] == S[j - 1, j - 1]:
            continue
        if j < nu and S[j - 1, j] != 0:
            return None
        if np.any(L[start + 1:j] != 0):
            return None
        blocks.append((complex(S[start, start]), j - start, complex(L[start])))
        start = j
    return blocks


def _resolvent_chain(A: np.ndarray, point: complex, vector: np.ndarray, size: int, trans: int):
    """``[(pI - A)⁻¹v, -(pI - A)⁻²v, …]`` (transposed solves for ``trans=1``)."""
    factor = checked_lu(point * np.eye(A.shape[0]) - A.astype(complex))
    if factor.singular:
        raise SpectraOverlap(0.0, factor.rcond)
    chain = []
    current = vector.astype(complex)
    for _ in range(size):
        current = factor.solve(current, trans=trans)
        chain.append(current)
        current = -current
    return chain


def _check_rank(matrix: np.ndarray, expected: int, name: str) -> None:
    rank = numerical_rank(matrix)
    if rank < expected:
        raise RankDeficient(f"{name} has numerical rank {rank}, expected {expected}.")


def solve_pi(
    sys: StateSpace,
    S: np.ndarray,
    L: np.ndarray,
    tol: t.Optional[float] = None,
    check: bool = True,
) -> np.ndarray:
    """
    ``Π`` with ``AΠ + BL = ΠS``.

    For a canonical generator column ``k`` of the Jordan block at ``s`` is
    ``(-1)ᵏ (sI - A)^-(k+1) B`` scaled by the block weight, so the solve
    reduces to one LU factorization per block.

    Raises
    ------
    RankDeficient
        If ``(L, S)`` is unobservable or ``rank Π < ν``.
    SpectraOverlap
        If ``σ(A) ∩ σ(S) ≠ ∅``.
    """
    S = np.atleast_2d(np.asarray(S))
    L = np.asarray(L).reshape(1, -1)
    nu = L.shape[1]
    assert S.shape == (nu, nu)
    if check and not is_observable(L, S):
        raise RankDeficient("(L, S) is not observable.")
    prob = SylvesterProblem(sys.A, S, -sys.B @ L)
    blocks = canonical_blocks(S, L)
    if blocks is None:
        Pi = solve_sylvester(prob, tol=tol)
    else:
        prob.check_spectra(tol)
        columns = []
        for point, size, weight in blocks:
            chain = _resolvent_chain(sys.A, point, sys.B, size, trans=0)
            columns.extend(weight * column for column in chain)
        Pi = np.hstack(columns) if columns else np.zeros((sys.n, 0), dtype=complex)
        if not any(np.iscomplexobj(m) for m in (S, L, sys.A, sys.B)):
            Pi = Pi.real
    if check:
        _check_rank(Pi, nu, "Π")
    return Pi


def solve_upsilon(
    Q: np.ndarray,
    sys: StateSpace,
    Rmat: np.ndarray,
    Cmat: np.ndarray,
    tol: t.Optional[float] = None,
    check: bool = True,
) -> np.ndarray:
    """
    ``Υ`` with ``QΥ = ΥA + Rmat·Cmat``.

    The dual of :func:`solve_pi`: for diagonal ``Q`` row ``i`` is
    ``Rmat[i] · Cmat (q_i I - A)⁻¹``. A zero ``Rmat`` returns the zero
    solution without rank checks.
    """
    Q = np.atleast_2d(np.asarray(Q))
    Rmat = np.asarray(Rmat).reshape(-1, 1)
    Cmat = np.asarray(Cmat).reshape(1, sys.n)
    m = Rmat.shape[0]
    assert Q.shape == (m, m)
    prob = SylvesterProblem(Q, sys.A, Rmat @ Cmat)
    if not np.any(Rmat):
        prob.check_spectra(tol)
        dtype = complex if np.iscomplexobj(prob.RHS) or np.iscomplexobj(Q) else float
        return np.zeros((m, sys.n), dtype=dtype)
    if check and not is_controllable(Q, Rmat):
        raise RankDeficient("(Q, R) is not controllable.")
    # Qᵀ is canonical exactly when Q has lower Jordan blocks; the dual chain
    # then runs in transposed solves.
    blocks = canonical_blocks(Q.T, Rmat.T)
    if blocks is None:
        Upsilon = solve_sylvester(prob, tol=tol)
    else:
        prob.check_spectra(tol)
        rows = []
        for point, size, weight in blocks:
            chain = _resolvent_chain(sys.A, point, Cmat.T, size, trans=1)
            rows.extend(weight * column.T for column in chain)
        Upsilon = np.vstack(rows)
        if not any(np.iscomplexobj(m) for m in (Q, Rmat, sys.A, Cmat)):
            Upsilon = Upsilon.real
    if check:
        _check_rank(Upsilon, m, "Υ")
    return Upsilon
