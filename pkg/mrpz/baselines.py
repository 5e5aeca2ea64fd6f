"""
Baselines Module
****************

Reference reductions the constrained models are compared against:
balanced truncation (square-root method) and IRKA.
"""
import dataclasses
import logging
import typing as t

import numpy as np
import scipy.linalg

from .errors import InvalidOrder, NonSquare, RankDeficient, UnstableInput
from .statespace import StateSpace, dominant_poles, eval_tf_deriv
from .sylvester import solve_lyapunov
from .utils import EPS, checked_lu, conjugate_pairing, sort_spectrum

log = logging.getLogger(__name__)

IRKA_STATUSES = ("converged", "max_iter", "stagnated")


def _require_stable(sys: StateSpace, what: str) -> None:
    if not sys.is_stable:
        raise UnstableInput(f"{what} needs an asymptotically stable system.")


def controllability_gramian(sys: StateSpace) -> np.ndarray:
    """``P`` with ``AP + PAᴴ + BBᴴ = 0``."""
    return solve_lyapunov(sys.A, sys.B @ sys.B.conj().T)


def observability_gramian(sys: StateSpace) -> np.ndarray:
    """``Q`` with ``AᴴQ + QA + CᴴC = 0``."""
    return solve_lyapunov(sys.A.conj().T, sys.C.conj().T @ sys.C)


def _gramian_factor(gramian: np.ndarray) -> np.ndarray:
    """``Z`` with ``Z Zᴴ = P`` from a symmetric eigendecomposition."""
    values, vectors = scipy.linalg.eigh(gramian)
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def _square_root_factors(sys: StateSpace):
    Zp = _gramian_factor(controllability_gramian(sys))
    Zq = _gramian_factor(observability_gramian(sys))
    U, hsv, Vh = scipy.linalg.svd(Zq.conj().T @ Zp)
    return Zp, Zq, U, hsv, Vh


def hankel_singular_values(sys: StateSpace) -> np.ndarray:
    """Square roots of the eigenvalues of ``PQ``, in decreasing order."""
    _require_stable(sys, "Hankel singular values")
    if sys.n == 0:
        return np.zeros(0)
    return _square_root_factors(sys)[3]


def balanced_truncation(sys: StateSpace, order: int) -> t.Tuple[StateSpace, float]:
    """
    Square-root balanced truncation.

    Returns the reduced model and the bound ``2 Σ_{i>ν} σ_i`` on the H∞
    error.
    """
    _require_stable(sys, "Balanced truncation")
    if not 0 < order:
        raise InvalidOrder(order, sys.n)
    if order >= sys.n:
        return sys, 0.0
    Zp, Zq, U, hsv, Vh = _square_root_factors(sys)
    if hsv[order - 1] <= EPS * hsv[0] * sys.n:
        raise RankDeficient(
            f"Hankel singular value {order} is numerically zero; the minimal order is below {order}."
        )
    scale = 1.0 / np.sqrt(hsv[:order])
    T = Zp @ Vh[:order].conj().T * scale
    W = Zq @ U[:, :order] * scale
    reduced = StateSpace(W.conj().T @ sys.A @ T, W.conj().T @ sys.B, sys.C @ T)
    bound = 2.0 * float(np.sum(hsv[order:]))
    log.debug("Balanced truncation %d -> %d, error bound %.3e", sys.n, order, bound)
    return reduced, bound


@dataclasses.dataclass(frozen=True)
class IrkaResult:
    model: StateSpace
    status: str
    #: Shifts the returned model interpolates at.
    shifts: t.Tuple[complex, ...]
    iterations: int
    #: Relative shift change of every iteration.
    history: t.Tuple[float, ...]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def force_shifts_in_rhp(values: t.Iterable[complex]) -> t.List[complex]:
    """Mirror every value into the closed right half-plane: ``|Re p| + j Im p``."""
    return sort_spectrum(abs(v.real) + 1j * v.imag for v in map(complex, values))


def _real_basis(columns: np.ndarray, order: int) -> np.ndarray:
    stacked = np.hstack([columns.real, columns.imag])
    U, _, _ = scipy.linalg.svd(stacked, full_matrices=False)
    return U[:, :order]


def _interpolation_step(sys: StateSpace, shifts: t.Sequence[complex], order: int):
    right = []
    left = []
    for shift in shifts:
        factor = checked_lu(shift * np.eye(sys.n) - sys.A.astype(complex))
        right.append(factor.solve(sys.B.astype(complex)))
        left.append(factor.solve(sys.C.T.astype(complex), trans=1))
    V = _real_basis(np.hstack(right), order)
    W = _real_basis(np.hstack(left), order)
    projector = W.T @ V
    factor = checked_lu(projector)
    if factor.singular:
        return None
    A_r = factor.solve(W.T @ sys.A @ V)
    B_r = factor.solve(W.T @ sys.B)
    return StateSpace(A_r, B_r, sys.C @ V)


def _shift_change(old: t.Sequence[complex], new: t.Sequence[complex]) -> float:
    old = np.asarray(sort_spectrum(old))
    new = np.asarray(sort_spectrum(new))
    return float(np.max(np.abs(new - old) / np.maximum(np.abs(old), EPS)))


def irka(
    sys: StateSpace,
    order: int,
    init_points: t.Optional[t.Sequence[complex]] = None,
    tol: float = 1e-6,
    max_iter: int = 100,
    patience: int = 3,
) -> IrkaResult:
    """
    Iterative rational Krylov algorithm.

    Each iteration projects onto the rational Krylov spaces at the current
    shifts, then moves the shifts to the mirror images of the reduced poles.
    The run is ``converged`` when the relative shift change drops below
    ``tol``, ``stagnated`` when the change has not improved on its best value
    for ``patience`` iterations, and ``max_iter`` otherwise.

    Parameters
    ----------
    init_points : sequence of complex, optional
        Initial shifts, closed under conjugation. Defaults to the mirror
        images of the ``order`` dominant poles of ``sys``.
    """
    _require_stable(sys, "IRKA")
    if not 0 < order <= sys.n:
        raise InvalidOrder(order, sys.n)
    if init_points is None:
        init_points = [-p for p in dominant_poles(sys, order)]
    shifts = force_shifts_in_rhp(init_points)
    if len(shifts) != order:
        raise NonSquare(f"Got {len(shifts)} initial shifts for order {order}.")
    conjugate_pairing(shifts)

    log.info("Starting IRKA")
    history: t.List[float] = []
    best = np.inf
    since_best = 0
    model = None
    used = shifts
    status = "max_iter"
    for it in range(max_iter):
        reduced = _interpolation_step(sys, shifts, order)
        if reduced is None:
            log.warning("IRKA projection became singular in iteration %d", it + 1)
            status = "stagnated"
            break
        model, used = reduced, shifts
        new_shifts = force_shifts_in_rhp(-p for p in model.poles())
        dist = _shift_change(shifts, new_shifts)
        history.append(dist)
        log.info(f"Convergence criterion in iteration {it + 1}: {dist:e}")
        shifts = new_shifts
        if dist < tol:
            status = "converged"
            break
        if dist < best:
            best, since_best = dist, 0
        else:
            since_best += 1
            if since_best >= patience:
                status = "stagnated"
                break
    if model is None:
        model = _interpolation_step(sys, force_shifts_in_rhp(init_points), order) or StateSpace.zero()
    return IrkaResult(model, status, tuple(used), len(history), tuple(history))


def hermite_residual(full: StateSpace, reduced: StateSpace, points: t.Iterable[complex]) -> float:
    """
    ``max |K - K_r|`` and ``max |K′ - K_r′|`` over ``points``, each relative to
    ``max(1, |K|)`` (or ``max(1, |K′|)``).
    """
    worst = 0.0
    for point in points:
        for j in (0, 1):
            expected = eval_tf_deriv(full, point, j)
            actual = eval_tf_deriv(reduced, point, j)
            worst = max(worst, abs(expected - actual) / max(1.0, abs(expected)))
    return worst
