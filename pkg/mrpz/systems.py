"""
Bundled Systems
***************

Deterministic demo systems and a seeded generator of random stable minimal
systems. The CLI addresses the demo systems as ``builtin:<name>[:<order>]``.
"""
import typing as t

import numpy as np
import scipy.linalg

from .statespace import StateSpace


def first_order() -> StateSpace:
    """``K(s) = 1/(s + 1)``."""
    return StateSpace([[-1.0]], [[1.0]], [[1.0]])


def second_order() -> StateSpace:
    """``K(s) = 1/((s + 1)(s + 2))`` in companion form."""
    return StateSpace([[0.0, 1.0], [-2.0, -3.0]], [[0.0], [1.0]], [[1.0, 0.0]])


def _modal_blocks(poles: t.Sequence[complex]) -> np.ndarray:
    blocks = []
    for p in poles:
        if p.imag == 0:
            blocks.append(np.array([[p.real]]))
        else:
            blocks.append(np.array([[p.real, abs(p.imag)], [-abs(p.imag), p.real]]))
    return scipy.linalg.block_diag(*blocks)


def synthetic_system(n: int = 20, damping: float = 0.05) -> StateSpace:
    """
    Lightly damped modal system of order ``n``.

    Natural frequencies are log-spaced over ``[0.1, 100]`` rad/s with the
    given damping ratio; odd orders add a real pole at ``-1``. Input and
    output weights are positive and fall off with frequency, so the DC gain
    is nonzero.
    """
    if n < 1:
        raise ValueError(f"Order must be positive, got {n}.")
    pairs = n // 2
    omegas = np.logspace(-1, 2, pairs) if pairs else np.zeros(0)
    poles = [complex(-damping * w, w * np.sqrt(1 - damping ** 2)) for w in omegas]
    if n % 2:
        poles.append(complex(-1.0))
    A = _modal_blocks(poles)
    B = np.empty((n, 1))
    C = np.empty((1, n))
    row = 0
    for index, p in enumerate(poles):
        weight = 1.0 / (1.0 + index)
        if p.imag == 0:
            B[row], C[0, row] = 1.0, weight
            row += 1
        else:
            B[row:row + 2, 0] = (0.0, 1.0)
            C[0, row:row + 2] = (weight * abs(p), weight)
            row += 2
    return StateSpace(A, B, C)


def random_system(
    n: int,
    seed: t.Optional[int] = None,
    complex_fraction: float = 0.5,
    spread: float = 10.0,
) -> StateSpace:
    """
    Random stable SISO system with distinct poles, in random coordinates.

    Roughly ``complex_fraction`` of the states belong to conjugate pole
    pairs. Poles have real parts in ``[-spread, -0.1]``.
    """
    rng = np.random.default_rng(seed)
    pair_count = int(round(complex_fraction * n / 2))
    real_count = n - 2 * pair_count
    poles = [complex(-rng.uniform(0.1, spread)) for _ in range(real_count)]
    poles += [
        complex(-rng.uniform(0.1, spread), rng.uniform(0.1, spread))
        for _ in range(pair_count)
    ]
    modal = _modal_blocks(poles) if poles else np.zeros((0, 0))
    T, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = T @ modal @ T.T
    B = rng.standard_normal((n, 1))
    C = rng.standard_normal((1, n))
    return StateSpace(A, B, C)


BUILTIN: t.Dict[str, t.Callable[..., StateSpace]] = {
    "synthetic": synthetic_system,
    "first-order": first_order,
    "second-order": second_order,
}


def builtin_system(spec: str) -> StateSpace:
    """``"synthetic"``, ``"synthetic:30"``, ``"first-order"`` and so on."""
    name, _, order = spec.partition(":")
    try:
        factory = BUILTIN[name]
    except KeyError as e:
        raise ValueError(f"Unknown builtin system {name!r}, expected one of {sorted(BUILTIN)}.") from e
    if not order:
        return factory()
    try:
        return factory(int(order))
    except (TypeError, ValueError) as e:
        raise ValueError(f"Builtin system {spec!r} does not take order {order!r}.") from e
