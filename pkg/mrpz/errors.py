"""
Errors and Warnings
*******************

Every failure the toolkit raises is an :class:`MRPZError`, which is a
:class:`ValueError`, so callers that only care about bad input can keep
catching :class:`ValueError`.

Advisory numerical conditions are emitted through :mod:`warnings` with a
subclass of :class:`MRPZWarning`.
"""
import typing as t


class MRPZError(ValueError):
    """Base class for all toolkit errors."""


class SingularShift(MRPZError):
    """:math:`sI - A` is numerically singular at the requested point."""

    def __init__(self, point: complex, condition: float):
        self.point = point
        self.condition = condition
        super().__init__(
            f"sI - A is numerically singular at s={point} "
            f"(condition estimate {condition:.3e})."
        )


class SpectraOverlap(MRPZError):
    """The two coefficient matrices of a Sylvester equation share an eigenvalue."""

    def __init__(self, gap: float, threshold: float):
        self.gap = gap
        self.threshold = threshold
        super().__init__(
            f"Spectra overlap: smallest eigenvalue distance {gap:.3e} "
            f"is below {threshold:.3e}."
        )


class RankDeficient(MRPZError):
    """A matrix that must have full rank does not."""


class NotConjugateSymmetric(MRPZError):
    """Complex data that must be closed under conjugation is not."""


class NotCanonical(MRPZError):
    """An operation needs diagonal ``S`` with ``L`` all ones."""


class NoLeftNullspace(MRPZError):
    """``Π`` is square, so no nonzero row annihilates it."""


class DuplicatePole(MRPZError):
    """The prescribed pole set contains repeated values."""


class PointCoincidence(MRPZError):
    """A prescribed value coincides with an interpolation point."""

    kind = "value"

    def __init__(self, point: complex):
        self.point = point
        super().__init__(f"Prescribed {self.kind} {point} coincides with an interpolation point.")


class PoleCoincidesWithPoint(PointCoincidence):
    kind = "pole"


class ZeroCoincidesWithPoint(PointCoincidence):
    kind = "zero"


class DegenerateRow(MRPZError):
    """A constraint row vanishes numerically."""


class SingularSystem(MRPZError):
    """The stacked constraint system cannot be solved reliably."""

    def __init__(self, message: str, condition: float):
        self.condition = condition
        super().__init__(f"{message} (condition estimate {condition:.3e})")


class NonSquare(MRPZError):
    """The number of constraints differs from the reduced order."""


class InvalidOrder(MRPZError):
    """The requested reduced order is out of range for the full model."""

    def __init__(self, order: int, n: int):
        self.order = order
        self.n = n
        super().__init__(f"Order must be in [1, {n}], got {order}.")


class FamilyInvalid(MRPZError):
    """``σ(S - GL)`` meets ``σ(S)``, so the model does not interpolate."""


class CoincidentPoints(MRPZError):
    """A left and a right Loewner point coincide in an off-diagonal cell."""

    def __init__(self, point: complex, line: t.Optional[int] = None):
        self.point = point
        self.line = line
        where = f" (sample line {line})" if line is not None else ""
        super().__init__(f"Left and right points coincide at {point}{where}.")


class MissingDerivative(MRPZError):
    """A derivative sample needed on the Loewner diagonal is absent."""

    def __init__(self, point: complex):
        self.point = point
        super().__init__(f"Missing first-derivative sample at {point}.")


class MissingSample(MRPZError):
    """A transfer-function value needed by the data route is absent."""

    def __init__(self, point: complex):
        self.point = point
        super().__init__(f"Missing transfer-function sample at {point}.")


class SingularLoewner(SingularSystem):
    """The Loewner matrix (or ``ΥΠ``) is numerically singular."""


class SingularPencil(MRPZError):
    """The point is an eigenvalue of the ``(σ𝕃, 𝕃)`` pencil."""


class SingularTransform(MRPZError):
    """A coordinate transformation is not invertible."""


class UnstableInput(MRPZError):
    """The operation needs an asymptotically stable system."""


class MRPZWarning(UserWarning):
    """Base class for advisory warnings."""


class IllConditioned(MRPZWarning):
    """A residual bound was not met."""


class NonMinimalSystem(MRPZWarning):
    """The realization is not controllable or not observable."""


class PoleZeroCancellation(MRPZWarning):
    """A placed zero lies in the reduced spectrum."""
