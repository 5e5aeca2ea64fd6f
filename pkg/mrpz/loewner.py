"""
Loewner Module
**************

Generalized Loewner matrices with pole rows and derivative rows, built
either from transfer-function samples or from a realization, and the
reduced model ``G = -𝕃⁻¹V`` they define.

Layout of a pair of order ``ν`` with ``ℓ`` prescribed poles:

* pole rows ``k < ℓ``: ``𝕃_kj = w_k / (λ_k - s_j)``, ``σ𝕃_kj = λ_k 𝕃_kj``,
  ``V_k = w_k``. These are divided differences of the annihilated transfer
  function ``C_P (sI - A)⁻¹ B``, which vanishes on ``σ(S)``.
* derivative rows ``i ≥ ℓ`` (left point ``s_i``): divided differences of
  ``K`` and of ``sK``, with ``K′(s_i)`` and ``K(s_i) + s_i K′(s_i)`` on the
  diagonal, and ``V_i = K(s_i)``.

In every case ``σ𝕃 = 𝕃S + VL``, and from a realization ``𝕃 = -ΥΠ``.
The published sign layout, with ``K(λ_k)`` in
the pole rows, is available with ``literal_signs=True`` for comparison only;
see :doc:`conventions`.
"""
import dataclasses
import logging
import typing as t

import numpy as np
import scipy.linalg

from .constraints import ReducedModel, build_reduced
from .errors import (
    CoincidentPoints,
    MissingDerivative,
    MissingSample,
    NonSquare,
    SingularLoewner,
    SingularPencil,
    SingularTransform,
)
from .moments import InterpolationSpec, PointsType, build_upsilon_blocks, check_distinct
from .statespace import StateSpace, TransferSample, check_samples
from .sylvester import solve_pi
from .utils import EPS, checked_lu, conjugate_pairing, sort_spectrum, symmetrize_pairs

log = logging.getLogger(__name__)


def _coincide(a: complex, b: complex) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


@dataclasses.dataclass(frozen=True)
class LoewnerData:
    """
    Samples behind a generalized Loewner pair.

    ``points`` are the right points ``s_1 … s_ν``; the last ``ν - ℓ`` of them
    are also the left points of the derivative rows and need
    ``derivatives``. ``pole_values`` (``K(λ_k)``) are only read with
    ``literal_signs=True``.
    """

    poles: t.Tuple[complex, ...]
    points: t.Tuple[complex, ...]
    values: t.Tuple[complex, ...]
    derivatives: t.Tuple[t.Optional[complex], ...]
    pole_values: t.Optional[t.Tuple[complex, ...]] = None
    weights: t.Optional[t.Tuple[complex, ...]] = None
    #: Sample-file line of each point, for error messages.
    lines: t.Mapping[complex, int] = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        for name in ("poles", "points", "values", "pole_values", "weights"):
            values = getattr(self, name)
            if values is not None:
                object.__setattr__(self, name, tuple(complex(v) for v in values))
        object.__setattr__(
            self, "derivatives",
            tuple(None if d is None else complex(d) for d in self.derivatives),
        )
        nu, ell = len(self.points), len(self.poles)
        if ell > nu:
            raise NonSquare(f"{ell} poles exceed the order {nu}.")
        if len(self.values) != nu:
            raise ValueError(f"Got {len(self.values)} values for {nu} points.")
        if len(self.derivatives) != nu - ell:
            raise ValueError(f"Got {len(self.derivatives)} derivatives for {nu - ell} derivative rows.")
        if self.weights is not None and len(self.weights) != ell:
            raise ValueError(f"Got {len(self.weights)} weights for {ell} pole rows.")
        if self.pole_values is not None and len(self.pole_values) != ell:
            raise ValueError(f"Got {len(self.pole_values)} pole values for {ell} poles.")

    @property
    def order(self) -> int:
        return len(self.points)

    @property
    def pole_count(self) -> int:
        return len(self.poles)

    @property
    def left_points(self) -> t.Tuple[complex, ...]:
        return self.poles + self.points[self.pole_count:]

    @property
    def derivative_points(self) -> t.Tuple[complex, ...]:
        return self.points[self.pole_count:]


@dataclasses.dataclass(frozen=True)
class LoewnerPair:
    """
    ``(𝕃, σ𝕃, V, W)`` with the generators ``S``, ``Q``, ``L``.

    ``Upsilon``, ``Pi`` and ``forcing`` (``𝐑(C_P, C)``) are kept when the pair
    comes from a realization, for the Sylvester residual.
    """

    loewner: np.ndarray
    shifted: np.ndarray
    V: np.ndarray
    W: np.ndarray
    S: np.ndarray
    Q: np.ndarray
    L: np.ndarray
    Upsilon: t.Optional[np.ndarray] = None
    Pi: t.Optional[np.ndarray] = None
    forcing: t.Optional[np.ndarray] = None

    @property
    def order(self) -> int:
        return self.loewner.shape[0]

    def to_dict(self) -> t.Dict[str, np.ndarray]:
        return {
            "L": self.loewner,
            "sigma_L": self.shifted,
            "V": self.V,
            "W": self.W,
            "S": self.S,
            "Q": self.Q,
            "Lrow": self.L,
        }


def _diag(values: t.Sequence[complex]) -> np.ndarray:
    matrix = np.diag(np.asarray(values, dtype=complex))
    return matrix.real.copy() if not np.any(matrix.imag) else matrix


def build_loewner_from_data(data: LoewnerData, literal_signs: bool = False) -> LoewnerPair:
    """
    Loewner pair from samples alone.

    Raises
    ------
    CoincidentPoints
        If a left point equals a right point in an off-diagonal cell.
    MissingDerivative
        If a derivative row has no ``K′(s_i)``.
    """
    nu, ell = data.order, data.pole_count
    s = np.array(data.points, dtype=complex)
    K = np.array(data.values, dtype=complex)
    weights = np.ones(ell, dtype=complex) if data.weights is None else np.array(data.weights)
    if literal_signs and ell and data.pole_values is None:
        raise MissingSample(data.poles[0])
    loewner = np.zeros((nu, nu), dtype=complex)
    shifted = np.zeros((nu, nu), dtype=complex)
    V = np.zeros((nu, 1), dtype=complex)

    for k, lam in enumerate(data.poles):
        for j in range(nu):
            if _coincide(lam, s[j]):
                raise CoincidentPoints(lam, data.lines.get(complex(s[j])))
            if literal_signs:
                K_lam = data.pole_values[k]
                loewner[k, j] = (K_lam - K[j]) / (lam - s[j])
                shifted[k, j] = -(lam * K_lam - s[j] * K[j]) / (lam - s[j])
            else:
                loewner[k, j] = weights[k] / (lam - s[j])
                shifted[k, j] = lam * weights[k] / (lam - s[j])
        V[k] = data.pole_values[k] if literal_signs else weights[k]

    sign = -1.0 if literal_signs else 1.0
    for i in range(ell, nu):
        derivative = data.derivatives[i - ell]
        if derivative is None:
            raise MissingDerivative(complex(s[i]))
        for j in range(nu):
            if i == j:
                loewner[i, i] = sign * derivative
                shifted[i, i] = -s[i] * derivative if literal_signs else K[i] + s[i] * derivative
            elif _coincide(s[i], s[j]):
                raise CoincidentPoints(complex(s[i]), data.lines.get(complex(s[i])))
            else:
                loewner[i, j] = sign * (K[i] - K[j]) / (s[i] - s[j])
                shifted[i, j] = sign * (s[i] * K[i] - s[j] * K[j]) / (s[i] - s[j])
        V[i] = K[i]

    return LoewnerPair(
        loewner=loewner,
        shifted=shifted,
        V=V,
        W=K.reshape(1, nu),
        S=_diag(s),
        Q=_diag(data.left_points),
        L=np.ones((1, nu)),
    )


def build_loewner_from_realization(
    sys: StateSpace,
    spec: InterpolationSpec,
    poles: PointsType,
    tol: t.Optional[float] = None,
) -> LoewnerPair:
    """
    ``(-ΥΠ, -ΥΠS + ΥBL, ΥB, CΠ)`` with pole rows normalised to ``Υ_P B = 1``.

    The pole rows need ``ℓ`` to equal the size of the leading block of
    ``spec`` so that ``ΥΠ`` is square.

    Raises
    ------
    SingularLoewner
        If ``ΥΠ`` is numerically singular.
    """
    poles = tuple(complex(p) for p in poles)
    if len(poles) != spec.lead_order:
        raise NonSquare(
            f"{len(poles)} poles but the leading block has size {spec.lead_order}; "
            "Loewner rows need one pole per non-derivative point."
        )
    S, L = spec.S, spec.L
    Pi = solve_pi(sys, S, L, tol=tol)
    blocks = build_upsilon_blocks(sys, spec, poles, normalise=True, tol=tol)
    Upsilon = blocks.Upsilon
    product = Upsilon @ Pi
    factor = checked_lu(product)
    if factor.singular:
        raise SingularLoewner("ΥΠ is singular", factor.condition)
    V = blocks.UpsilonB
    log.debug("Loewner pair of order %d from a realization, condition %.3e", spec.order, factor.condition)
    return LoewnerPair(
        loewner=-product,
        shifted=-product @ S + V @ L,
        V=V,
        W=sys.C @ Pi,
        S=S,
        Q=blocks.Q,
        L=L,
        Upsilon=Upsilon,
        Pi=Pi,
        forcing=blocks.forcing,
    )


def reduce_from_loewner(pair: LoewnerPair) -> t.Tuple[np.ndarray, ReducedModel]:
    """``G = -𝕃⁻¹V`` and the model ``Σ_G``."""
    factor = checked_lu(pair.loewner)
    if factor.singular:
        raise SingularLoewner("The Loewner matrix is singular", factor.condition)
    G = -factor.solve(pair.V)
    diagonal = np.diag(pair.S)
    pairs = None
    if np.array_equal(pair.S, np.diag(diagonal)):
        pairs = conjugate_pairing(diagonal)
        if np.iscomplexobj(G):
            G = symmetrize_pairs(G, pairs, max(1e-10, 1e3 * EPS * factor.condition)).reshape(-1, 1)
    return G, build_reduced(pair.S, pair.L, G, pair.W, pairs)


def eval_loewner_tf(pair: LoewnerPair, s: complex) -> complex:
    """``W (σ𝕃 - s𝕃)⁻¹ V``."""
    factor = checked_lu(np.asarray(pair.shifted, dtype=complex) - complex(s) * pair.loewner)
    if factor.singular:
        raise SingularPencil(f"s={s} is an eigenvalue of the Loewner pencil (condition {factor.condition:.3e}).")
    return complex((pair.W @ factor.solve(pair.V.astype(complex))).item())


def pencil_poles(pair: LoewnerPair) -> t.List[complex]:
    """Finite eigenvalues of ``σ𝕃 - s𝕃``."""
    alpha, beta = scipy.linalg.eig(pair.shifted, pair.loewner, right=False, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-12 * np.abs(alpha)
    return sort_spectrum(alpha[finite] / beta[finite])


def _inverse(matrix: np.ndarray, name: str) -> np.ndarray:
    matrix = np.atleast_2d(np.asarray(matrix))
    factor = checked_lu(matrix)
    if factor.singular:
        raise SingularTransform(f"{name} is singular (condition {factor.condition:.3e}).")
    return factor.solve(np.eye(matrix.shape[0], dtype=matrix.dtype))


def transform_loewner(pair: LoewnerPair, T_Q: np.ndarray, T_S: np.ndarray) -> LoewnerPair:
    """
    The pair in the coordinates ``Ŝ = T_S⁻¹ S T_S``, ``Q̂ = T_Q⁻¹ Q T_Q``:
    ``𝕃̂ = T_Q⁻¹ 𝕃 T_S``, ``V̂ = T_Q⁻¹ V``, ``Ŵ = W T_S``, ``L̂ = L T_S``.

    The reduced transfer function is unchanged.
    """
    inv_Q = _inverse(T_Q, "T_Q")
    inv_S = _inverse(T_S, "T_S")
    T_Q = np.asarray(T_Q)
    T_S = np.asarray(T_S)
    return LoewnerPair(
        loewner=inv_Q @ pair.loewner @ T_S,
        shifted=inv_Q @ pair.shifted @ T_S,
        V=inv_Q @ pair.V,
        W=pair.W @ T_S,
        S=inv_S @ pair.S @ T_S,
        Q=inv_Q @ pair.Q @ T_Q,
        L=pair.L @ T_S,
        Upsilon=None if pair.Upsilon is None else inv_Q @ pair.Upsilon,
        Pi=None if pair.Pi is None else pair.Pi @ T_S,
        forcing=None if pair.forcing is None else inv_Q @ pair.forcing,
    )


def shifted_residual(pair: LoewnerPair) -> float:
    """``‖σ𝕃 - 𝕃S - VL‖_F`` relative to ``‖σ𝕃‖_F``."""
    residual = pair.shifted - pair.loewner @ pair.S - pair.V @ pair.L
    return float(np.linalg.norm(residual) / max(np.linalg.norm(pair.shifted), EPS))


def sylvester_residual(pair: LoewnerPair) -> float:
    """
    ``‖𝕃S - Q𝕃 - (𝐑Π - VL)‖_F`` relative to ``‖𝕃‖_F (‖S‖_F + ‖Q‖_F)``.

    Needs a pair built from a realization.
    """
    if pair.forcing is None or pair.Pi is None:
        raise ValueError("The Sylvester residual needs Π and 𝐑(C_P, C) from a realization.")
    lhs = pair.loewner @ pair.S - pair.Q @ pair.loewner
    rhs = pair.forcing @ pair.Pi - pair.V @ pair.L
    scale = np.linalg.norm(pair.loewner) * (np.linalg.norm(pair.S) + np.linalg.norm(pair.Q))
    return float(np.linalg.norm(lhs - rhs) / max(scale, EPS))


def estimate_derivative(
    samples: t.Sequence[TransferSample],
    point: complex,
    neighbours: int = 5,
) -> complex:
    """
    ``K′(point)`` from a local quadratic least-squares fit over the nearest
    order-0 samples.
    """
    values = [sample for sample in samples if sample.order == 0]
    if len(values) < 3:
        raise MissingDerivative(complex(point))
    values.sort(key=lambda sample: abs(sample.point - point))
    nearest = values[:max(3, neighbours)]
    offsets = np.array([sample.point - point for sample in nearest], dtype=complex)
    rhs = np.array([sample.value for sample in nearest], dtype=complex)
    vandermonde = np.vander(offsets, 3, increasing=True)
    coefficients, *_ = np.linalg.lstsq(vandermonde, rhs, rcond=None)
    return complex(coefficients[1])


def loewner_data_from_samples(
    samples: t.Sequence[TransferSample],
    points: PointsType,
    poles: PointsType = (),
    estimate_derivatives: bool = False,
    literal_signs: bool = False,
) -> LoewnerData:
    """
    Pick the values the Loewner pair needs out of a sample set.

    The first ``ℓ = len(poles)`` entries of ``points`` are value-only; the
    others need a first-derivative sample unless ``estimate_derivatives``.
    """
    check_samples(samples)
    points = tuple(complex(p) for p in points)
    poles = tuple(complex(p) for p in poles)
    check_distinct(points, "Interpolation points")
    lookup = {sample.key: sample for sample in samples}

    def value(point: complex) -> complex:
        sample = lookup.get((point, 0))
        if sample is None:
            raise MissingSample(point)
        return sample.value

    derivatives = []
    for point in points[len(poles):]:
        sample = lookup.get((point, 1))
        if sample is not None:
            derivatives.append(sample.value)
        elif estimate_derivatives:
            derivatives.append(estimate_derivative(samples, point))
        else:
            raise MissingDerivative(point)

    return LoewnerData(
        poles=poles,
        points=points,
        values=tuple(value(p) for p in points),
        derivatives=tuple(derivatives),
        pole_values=tuple(value(p) for p in poles) if literal_signs else None,
        lines={sample.point: sample.line for sample in samples if sample.line is not None},
    )


def samples_from_system(
    sys: StateSpace,
    points: PointsType,
    derivative_points: PointsType = (),
) -> t.List[TransferSample]:
    """Order-0 samples at ``points`` and first-derivative samples at ``derivative_points``."""
    samples = [TransferSample(p, sys(p), 0) for p in points]
    samples += [TransferSample(p, sys.derivative(p), 1) for p in derivative_points]
    return samples
