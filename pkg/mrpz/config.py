"""
Configuration
*************

Numerical tolerances shared by every module. The solve tolerance can be
overridden with the ``MRPZ_TOL`` environment variable.
"""
import dataclasses
import os
import typing as t

#: Environment variable that overrides :attr:`Tolerances.solve`.
TOLERANCE_ENV = "MRPZ_TOL"


@dataclasses.dataclass(frozen=True)
class Tolerances:
    #: Relative residual bound for linear and Sylvester solves.
    solve: float = 1e-10
    #: Minimum distance between ``σ(S - GL)`` and ``σ(S)``.
    family_gap: float = 1e-8
    #: Relative residual a constraint report accepts.
    constraint: float = 1e-8
    #: Multiplier on the ``max(dim) * eps * σ_max`` rank tolerance.
    rank_factor: float = 1.0
    #: Half the relative gap between the bounds at which the H∞ level-set iteration stops.
    hinf_rtol: float = 1e-6


def get_tolerances(environ: t.Optional[t.Mapping[str, str]] = None) -> Tolerances:
    """Defaults, with ``solve`` taken from ``MRPZ_TOL`` when it is set."""
    environ = os.environ if environ is None else environ
    raw = environ.get(TOLERANCE_ENV)
    if raw is None or raw.strip() == "":
        return Tolerances()
    try:
        value = float(raw)
    except ValueError as e:
        raise ValueError(f"{TOLERANCE_ENV}={raw!r} is not a number.") from e
    if not value > 0:
        raise ValueError(f"{TOLERANCE_ENV} must be positive, got {raw!r}.")
    return dataclasses.replace(Tolerances(), solve=value)


def solve_tolerance(tol: t.Optional[float] = None) -> float:
    return get_tolerances().solve if tol is None else tol
