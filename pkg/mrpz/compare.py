"""
Comparison Harness
******************

Runs several reduction methods on one full model and tabulates the largest
pole real part, the H2 and H∞ errors and the DC gain of each result.
"""
import concurrent.futures
import csv
import dataclasses
import io
import json
import logging
import math
import typing as t

import numpy as np

from .baselines import balanced_truncation, irka
from .constraints import ConstraintSpec, reduce_with_constraints
from .errors import MRPZError
from .metrics import dc_gain, h2_error, hinf_error, max_real_pole
from .statespace import StateSpace, dominant_poles
from .utils import format_complex

log = logging.getLogger(__name__)

METHODS = ("moment-matching", "bt", "irka")
METHOD_ALIASES = {"mm": "moment-matching", "moment-matching": "moment-matching", "bt": "bt", "irka": "irka"}
FORMATS = ("json", "md", "csv")

#: Column keys and their Markdown headings.
COLUMNS = (
    ("method", "Method"),
    ("order", "ν"),
    ("ell", "ℓ"),
    ("k", "k"),
    ("max_re_pole", "Max Re(p)"),
    ("h2_error", "‖K−K_r‖₂"),
    ("hinf_error", "‖K−K_r‖∞"),
    ("dc_gain", "K_r(0)"),
    ("status", "Status"),
)


def default_interpolation_points(order: int) -> t.List[complex]:
    """``0`` (odd orders) plus conjugate pairs on the imaginary axis, log-spaced over ``[0.1j, 10j]``."""
    pairs = order // 2
    points = [0j] if order % 2 else []
    for w in np.logspace(-1, 1, pairs) if pairs else ():
        points += [complex(0, w), complex(0, -w)]
    return points


@dataclasses.dataclass(frozen=True)
class MethodConfig:
    method: str
    order: int
    points: t.Optional[t.Tuple[complex, ...]] = None
    constraints: ConstraintSpec = dataclasses.field(default_factory=ConstraintSpec)
    least_norm: bool = False
    label: t.Optional[str] = None

    def __post_init__(self):
        try:
            object.__setattr__(self, "method", METHOD_ALIASES[self.method])
        except KeyError as e:
            raise ValueError(f"Unknown method {self.method!r}, expected one of {sorted(METHOD_ALIASES)}.") from e
        if self.order < 1:
            raise ValueError(f"Order must be positive, got {self.order}.")
        if self.points is not None:
            object.__setattr__(self, "points", tuple(complex(p) for p in self.points))

    @property
    def name(self) -> str:
        return self.label or self.method

    @property
    def interpolation_points(self) -> t.List[complex]:
        return list(self.points) if self.points is not None else default_interpolation_points(self.order)


@dataclasses.dataclass(frozen=True)
class ComparisonRow:
    method: str
    order: int
    ell: int
    k: int
    max_re_pole: float
    h2_error: float
    hinf_error: float
    dc_gain: complex
    status: str = "ok"
    error: t.Optional[str] = None

    @classmethod
    def failed(cls, config: MethodConfig, error: Exception) -> "ComparisonRow":
        ell, k, _ = config.constraints.counts
        nan = float("nan")
        return cls(config.name, config.order, ell, k, nan, nan, nan, complex(nan, 0), "error", str(error))

    def to_dict(self) -> t.Dict[str, t.Any]:
        return {
            "method": self.method,
            "order": self.order,
            "ell": self.ell,
            "k": self.k,
            "max_re_pole": _number(self.max_re_pole),
            "h2_error": _number(self.h2_error),
            "hinf_error": _number(self.hinf_error),
            "dc_gain": _number(self.dc_gain),
            "status": self.status,
            "error": self.error,
        }


def _number(value: t.Union[float, complex]) -> t.Union[float, str]:
    value = complex(value)
    if value.imag != 0:
        return format_complex(value)
    real = value.real
    return real if math.isfinite(real) else repr(real)


def moment_matching_constraints(full: StateSpace, config: MethodConfig) -> ConstraintSpec:
    """The configured constraints, or the dominant poles of ``full`` when there are none."""
    if config.constraints.total:
        return config.constraints
    return ConstraintSpec(poles=dominant_poles(full, config.order))


def _reduce(full: StateSpace, config: MethodConfig) -> t.Tuple[StateSpace, str, t.Tuple[int, int]]:
    if config.method == "bt":
        reduced, _ = balanced_truncation(full, config.order)
        return reduced, "ok", (0, 0)
    if config.method == "irka":
        result = irka(full, config.order, init_points=config.points)
        return result.model, result.status, (0, 0)
    constraints = moment_matching_constraints(full, config)
    result = reduce_with_constraints(
        full,
        config.interpolation_points,
        constraints,
        least_norm=config.least_norm or constraints.total < config.order,
    )
    status = "ok" if result.report.passed else "violated"
    return result.model.state_space, status, constraints.counts[:2]


def run_method(full: StateSpace, config: MethodConfig) -> ComparisonRow:
    """One row; an :class:`MRPZError` or a LAPACK failure is captured in the row."""
    try:
        reduced, status, (ell, k) = _reduce(full, config)
        return ComparisonRow(
            method=config.name,
            order=reduced.n,
            ell=ell,
            k=k,
            max_re_pole=max_real_pole(reduced),
            h2_error=h2_error(full, reduced),
            hinf_error=hinf_error(full, reduced),
            dc_gain=dc_gain(reduced),
            status=status,
        )
    except (MRPZError, np.linalg.LinAlgError) as e:
        log.warning("%s (order %d) failed: %s", config.name, config.order, e)
        return ComparisonRow.failed(config, e)


def compare(
    full: StateSpace,
    configs: t.Sequence[MethodConfig],
    max_workers: t.Optional[int] = None,
) -> t.List[ComparisonRow]:
    """Run every config concurrently; rows come back in config order."""
    if not configs:
        raise ValueError("No method configurations to compare.")
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
        return list(executor.map(lambda config: run_method(full, config), configs))


def _cell(value: t.Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, complex):
        return f"{value.real:.6g}" if value.imag == 0 else f"{value:.6g}"
    return str(value)


def rows_to_json(rows: t.Sequence[ComparisonRow]) -> str:
    return json.dumps([row.to_dict() for row in rows], indent=2) + "\n"


def rows_to_markdown(rows: t.Sequence[ComparisonRow]) -> str:
    lines = [
        "| " + " | ".join(heading for _, heading in COLUMNS) + " |",
        "|" + "|".join("---" for _ in COLUMNS) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(_cell(getattr(row, key)) for key, _ in COLUMNS) + " |")
    return "\n".join(lines) + "\n"


def rows_to_csv(rows: t.Sequence[ComparisonRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow([key for key, _ in COLUMNS] + ["error"])
    for row in rows:
        data = row.to_dict()
        writer.writerow([data[key] for key, _ in COLUMNS] + [data["error"] or ""])
    return buffer.getvalue()


def format_rows(rows: t.Sequence[ComparisonRow], fmt: str = "json") -> str:
    try:
        return {"json": rows_to_json, "md": rows_to_markdown, "csv": rows_to_csv}[fmt](rows)
    except KeyError as e:
        raise ValueError(f"Unknown format {fmt!r}, expected one of {FORMATS}.") from e
