"""
Metrics Module
**************

Error norms and scalar figures of a reduced model: H2 and H∞ norms of the
error system, the largest pole real part and the DC gain.
"""
import logging
import typing as t

import numpy as np
import scipy.linalg

from .config import get_tolerances
from .errors import SingularShift
from .statespace import StateSpace, eval_tf
from .sylvester import solve_lyapunov

log = logging.getLogger(__name__)

#: Iteration cap of the H∞ level-set search; convergence is quadratic.
HINF_MAX_ITER = 50


def _same(full: StateSpace, reduced: StateSpace) -> bool:
    return full is reduced or full == reduced


def h2_norm(sys: StateSpace) -> float:
    """``sqrt(C P Cᴴ)`` with ``P`` the controllability Gramian; ``inf`` if unstable."""
    if sys.n == 0:
        return 0.0
    if not sys.is_stable:
        return np.inf
    P = solve_lyapunov(sys.A, sys.B @ sys.B.conj().T)
    value = float((sys.C @ P @ sys.C.conj().T).real.item())
    return float(np.sqrt(max(value, 0.0)))


def h2_error(full: StateSpace, reduced: StateSpace) -> float:
    """H2 norm of the error system; ``inf`` when it is not asymptotically stable."""
    if _same(full, reduced):
        return 0.0
    return h2_norm(full - reduced)


def _peak_frequency(sys: StateSpace) -> float:
    """Frequency of the least damped pole, the usual first guess for the peak."""
    poles = np.asarray(sys.poles())
    oscillating = poles[np.abs(poles.imag) > 0]
    if oscillating.size:
        damping = np.abs(oscillating.real) / np.abs(oscillating)
        return float(np.abs(oscillating[np.argmin(damping)]))
    return float(np.min(np.abs(poles)))


def _gain(sys: StateSpace, omega: float) -> float:
    try:
        return abs(eval_tf(sys, 1j * omega))
    except SingularShift:
        return np.inf


def hinf_norm(sys: StateSpace, rtol: t.Optional[float] = None) -> float:
    """
    Peak gain over the imaginary axis.

    ``γ`` is tested with the Hamiltonian ``[[A, BBᴴ/γ], [-CᴴC/γ, -Aᴴ]]``, which
    has imaginary eigenvalues ``jω`` exactly at the frequencies where
    ``|K(jω)| = γ``. Each round evaluates ``|K|`` at the midpoints of those
    frequencies to raise the lower bound, until ``γ = (1 + 2 rtol) γ_lb``
    has no imaginary eigenvalues.
    """
    rtol = get_tolerances().hinf_rtol if rtol is None else rtol
    if sys.n == 0:
        return 0.0
    if not sys.is_stable:
        return np.inf
    A, B, C = sys.A, sys.B, sys.C
    lower = max(_gain(sys, 0.0), _gain(sys, _peak_frequency(sys)))
    if lower == 0.0:
        return 0.0
    upper = np.inf
    for _ in range(HINF_MAX_ITER):
        gamma = lower * (1 + 2 * rtol)
        hamiltonian = np.block([
            [A, B @ B.conj().T / gamma],
            [-C.conj().T @ C / gamma, -A.conj().T],
        ])
        eigs = scipy.linalg.eigvals(hamiltonian)
        scale = max(1.0, float(np.max(np.abs(eigs))))
        imaginary = eigs[np.abs(eigs.real) <= 1e-8 * scale]
        if imaginary.size == 0:
            upper = gamma
            break
        omegas = np.unique(np.sort(imaginary.imag))
        if sys.is_real:
            omegas = np.unique(np.abs(omegas))
        candidates = (omegas[1:] + omegas[:-1]) / 2 if omegas.size > 1 else omegas
        raised = max(_gain(sys, w) for w in candidates)
        if raised <= lower:
            upper = gamma
            break
        lower = raised
    else:
        log.warning("H∞ search stopped after %d rounds", HINF_MAX_ITER)
        upper = lower * (1 + 2 * rtol)
    return float((lower + upper) / 2)


def hinf_error(full: StateSpace, reduced: StateSpace, rtol: t.Optional[float] = None) -> float:
    if _same(full, reduced):
        return 0.0
    return hinf_norm(full - reduced, rtol)


def max_real_pole(sys: StateSpace) -> float:
    """Largest pole real part (``-inf`` for the zero system)."""
    poles = sys.poles()
    return max((p.real for p in poles), default=-np.inf)


def dc_gain(sys: StateSpace) -> complex:
    """``K(0)``; ``inf`` when ``0`` is a pole."""
    try:
        return eval_tf(sys, 0.0)
    except SingularShift:
        return complex(np.inf)
