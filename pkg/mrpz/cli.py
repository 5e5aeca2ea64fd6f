"""
Command Line
************

``mrpz analyze | reduce | reduce-data | compare``.

Results go to stdout or ``--out``; log records go to stderr. The exit
code is ``0`` on success, ``1`` on an error and ``2`` when a reduced model
was written but its constraint report failed.
"""
import argparse
import dataclasses
import json
import logging
import pathlib
import sys
import typing as t

from . import __version__
from .baselines import hankel_singular_values
from .compare import FORMATS, METHOD_ALIASES, MethodConfig, compare, default_interpolation_points, format_rows
from .constraints import ConstraintSpec, reduce_with_constraints
from .errors import MRPZError, NonSquare
from .io import (
    constraints_from_dict,
    dump_json,
    load_system,
    read_constraints,
    read_samples,
    write_loewner,
    write_model,
)
from .loewner import build_loewner_from_data, loewner_data_from_samples, reduce_from_loewner
from .metrics import dc_gain, h2_norm, hinf_norm
from .moments import InterpolationSpec
from .statespace import TransferSample, invariant_zeros
from .utils import format_complex, parse_complex

log = logging.getLogger(__name__)

COMMANDS = ("analyze", "reduce", "reduce-data", "compare")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2


def parse_points(text: t.Optional[str]) -> t.Tuple[complex, ...]:
    """``"0, 1j, -1j"`` -> ``(0j, 1j, -1j)``; ``None`` or blank gives ``()``."""
    if text is None or not text.strip():
        return ()
    try:
        return tuple(parse_complex(item.strip()) for item in text.split(","))
    except ValueError as e:
        raise ValueError(f"Cannot parse point list {text!r}: {e}") from e


@dataclasses.dataclass(frozen=True)
class RunConfig:
    command: str
    system: t.Optional[str] = None
    samples: t.Optional[pathlib.Path] = None
    points: t.Tuple[complex, ...] = ()
    constraints: ConstraintSpec = dataclasses.field(default_factory=ConstraintSpec)
    order: t.Optional[int] = None
    methods: t.Tuple[str, ...] = ()
    config: t.Optional[pathlib.Path] = None
    out: t.Optional[pathlib.Path] = None
    loewner_out: t.Optional[pathlib.Path] = None
    format: str = "json"
    require_stable: bool = False
    least_norm: bool = False
    paper_sign_compat: bool = False
    estimate_derivatives: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}.")
        if self.command == "reduce-data":
            if self.samples is None:
                raise ValueError("reduce-data needs --samples.")
            if self.system is not None:
                raise ValueError("reduce-data works from samples only; drop --system.")
        elif self.system is None:
            raise ValueError(f"{self.command} needs --system.")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        constraints = (
            read_constraints(args.constraints)
            if getattr(args, "constraints", None)
            else ConstraintSpec()
        )
        flagged = ConstraintSpec(
            poles=parse_points(getattr(args, "poles", None)),
            zeros=parse_points(getattr(args, "zeros", None)),
            derivative_points=parse_points(getattr(args, "deriv_points", None)),
        )
        if flagged.total:
            if constraints.total:
                raise ValueError("Give constraints either as flags or as --constraints, not both.")
            constraints = flagged
        methods = getattr(args, "methods", None)
        return cls(
            command=args.command,
            system=getattr(args, "system", None),
            samples=_path(getattr(args, "samples", None)),
            points=parse_points(getattr(args, "points", None)),
            constraints=constraints,
            order=getattr(args, "order", None),
            methods=tuple(m.strip() for m in methods.split(",") if m.strip()) if methods else (),
            config=_path(getattr(args, "config", None)),
            out=_path(getattr(args, "out", None)),
            loewner_out=_path(getattr(args, "loewner_out", None)),
            format=getattr(args, "format", "json"),
            require_stable=getattr(args, "require_stable", False),
            least_norm=getattr(args, "least_norm", False),
            paper_sign_compat=getattr(args, "paper_sign_compat", False),
            estimate_derivatives=getattr(args, "estimate_derivatives", False),
        )

    @property
    def interpolation_points(self) -> t.Tuple[complex, ...]:
        if self.points:
            return self.points
        if self.order:
            return tuple(default_interpolation_points(self.order))
        raise ValueError("Give the interpolation points (--points) or the order (--order).")

    def check_counts(self) -> None:
        """``ℓ + k + μ = ν`` unless a least-norm member is requested."""
        nu = len(self.interpolation_points)
        if not self.least_norm and self.constraints.total != nu:
            ell, k, mu = self.constraints.counts
            raise ValueError(
                f"ℓ + k + μ = {ell} + {k} + {mu} must equal ν = {nu}; pass --least-norm for fewer constraints."
            )


def _path(value: t.Optional[str]) -> t.Optional[pathlib.Path]:
    return None if value is None else pathlib.Path(value)


def _emit(text: str, path: t.Optional[pathlib.Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)
        log.info("Wrote %s", path)


def cmd_analyze(config: RunConfig) -> int:
    system = load_system(config.system)
    report = {
        "n": system.n,
        "poles": [format_complex(p) for p in system.poles()],
        "zeros": [format_complex(z) for z in invariant_zeros(system)],
        "stable": bool(system.is_stable),
        "controllable": bool(system.is_controllable),
        "observable": bool(system.is_observable),
        "minimal": bool(system.is_minimal),
        "dc_gain": format_complex(dc_gain(system)),
    }
    if system.is_stable:
        report["hankel_singular_values"] = [float(v) for v in hankel_singular_values(system)]
        report["h2_norm"] = h2_norm(system)
        report["hinf_norm"] = hinf_norm(system)
    _emit(dump_json(report), config.out)
    return EXIT_OK


def cmd_reduce(config: RunConfig) -> int:
    config.check_counts()
    system = load_system(config.system)
    result = reduce_with_constraints(
        system,
        config.interpolation_points,
        config.constraints,
        least_norm=config.least_norm,
        require_stable=config.require_stable,
    )
    _emit(write_model(result.model, report=result.report), config.out)
    if not result.report.passed:
        for entry in result.report.violations():
            log.error(
                "%s constraint at %s missed: residual %.3e (scale %.3e) %s",
                entry.kind, format_complex(entry.point), entry.residual, entry.scale, entry.note,
            )
        return EXIT_VIOLATED
    return EXIT_OK


def _loewner_path(config: RunConfig) -> t.Optional[pathlib.Path]:
    if config.loewner_out is not None:
        return config.loewner_out
    if config.out is not None:
        return config.out.with_name(config.out.stem + ".loewner.json")
    return None


def _data_points(config: RunConfig, samples: t.Sequence[TransferSample]) -> t.Tuple[complex, ...]:
    """Right points with the derivative block trailing; one pole or derivative row per point."""
    poles = config.constraints.poles
    points = config.points or tuple(
        dict.fromkeys(s.point for s in samples if s.order == 0 and s.point not in poles)
    )
    spec = InterpolationSpec.from_points(points, config.constraints.derivative_points)
    if not spec.is_canonical:
        raise ValueError("reduce-data needs distinct interpolation points.")
    if len(poles) + spec.derivative_count != spec.order:
        raise NonSquare(
            f"{len(poles)} poles and {spec.derivative_count} derivative points "
            f"must add up to the {spec.order} interpolation points."
        )
    return tuple(complex(p) for p in spec.diagonal)


def cmd_reduce_data(config: RunConfig) -> int:
    """Loewner reduction straight from samples; zeros are not supported on this route."""
    if config.constraints.zeros:
        raise ValueError("reduce-data places poles and matches derivatives only; drop --zeros.")
    samples = read_samples(config.samples)
    poles = config.constraints.poles
    data = loewner_data_from_samples(
        samples,
        _data_points(config, samples),
        poles,
        estimate_derivatives=config.estimate_derivatives,
        literal_signs=config.paper_sign_compat,
    )
    pair = build_loewner_from_data(data, literal_signs=config.paper_sign_compat)
    _, model = reduce_from_loewner(pair)
    _emit(write_model(model), config.out)
    loewner_path = _loewner_path(config)
    if loewner_path is not None:
        write_loewner(pair, loewner_path)
        log.info("Wrote %s", loewner_path)
    return EXIT_OK


def _method_configs(config: RunConfig) -> t.List[MethodConfig]:
    if config.config is not None:
        entries = json.loads(config.config.read_text())
        if not isinstance(entries, list):
            raise ValueError(f"{config.config} must hold a list of method configurations.")
        return [
            MethodConfig(
                method=entry["method"],
                order=int(entry["order"]),
                points=parse_points(",".join(map(str, entry["points"]))) if entry.get("points") else None,
                constraints=constraints_from_dict(entry.get("constraints", {})),
                least_norm=bool(entry.get("least_norm", False)),
                label=entry.get("label"),
            )
            for entry in entries
        ]
    if not config.methods:
        return []
    order = config.order or len(config.points)
    if not order:
        raise ValueError("compare needs --order or --points.")
    return [
        MethodConfig(
            method=method,
            order=order,
            points=config.points or None,
            constraints=config.constraints if METHOD_ALIASES.get(method) == "moment-matching" else ConstraintSpec(),
            least_norm=config.least_norm,
        )
        for method in config.methods
    ]


def cmd_compare(config: RunConfig) -> int:
    configs = _method_configs(config)
    if not configs:
        raise ValueError("No methods to compare; pass --methods or --config.")
    system = load_system(config.system)
    rows = compare(system, configs)
    _emit(format_rows(rows, config.format), config.out)
    return EXIT_OK


HANDLERS: t.Dict[str, t.Callable[[RunConfig], int]] = {
    "analyze": cmd_analyze,
    "reduce": cmd_reduce,
    "reduce-data": cmd_reduce_data,
    "compare": cmd_compare,
}


def _add_constraint_flags(parser: argparse.ArgumentParser, zeros: bool = True) -> None:
    parser.add_argument("--poles", help="Prescribed reduced poles, comma separated.")
    if zeros:
        parser.add_argument("--zeros", help="Prescribed reduced zeros, comma separated.")
    parser.add_argument("--deriv-points", help="Interpolation points that also match K′.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mrpz",
        description="Moment matching with pole and zero placement.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG.")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Spectrum, zeros, minimality and norms of a system.")
    analyze.add_argument("--system", required=True, help="System JSON, .mat file or builtin:<name>[:<order>].")
    analyze.add_argument("--out")

    reduce = commands.add_parser("reduce", help="Constrained moment matching from a realization.")
    reduce.add_argument("--system", required=True)
    reduce.add_argument("--points", help="Interpolation points, comma separated; repeats add multiplicity.")
    reduce.add_argument("--order", type=int, help="Reduced order when --points is omitted.")
    _add_constraint_flags(reduce)
    reduce.add_argument("--constraints", help="Constraint JSON, instead of the flags.")
    reduce.add_argument("--require-stable", action="store_true")
    reduce.add_argument("--least-norm", action="store_true", help="Minimum-norm G when constraints are short.")
    reduce.add_argument("--out")

    data = commands.add_parser("reduce-data", help="Loewner reduction from transfer-function samples.")
    data.add_argument("--samples", required=True, help="Samples CSV.")
    data.add_argument("--points", help="Interpolation points; defaults to every non-pole value sample.")
    _add_constraint_flags(data, zeros=False)
    data.add_argument("--paper-sign-compat", action="store_true", help="Literal published Loewner signs.")
    data.add_argument("--estimate-derivatives", action="store_true")
    data.add_argument("--out")
    data.add_argument("--loewner-out", help="Loewner pair dump; defaults to <out>.loewner.json.")

    comparison = commands.add_parser("compare", help="Compare moment matching, BT and IRKA.")
    comparison.add_argument("--system", required=True)
    comparison.add_argument("--methods", default="mm,bt,irka", help="Comma separated: mm, bt, irka.")
    comparison.add_argument("--order", type=int)
    comparison.add_argument("--points")
    _add_constraint_flags(comparison)
    comparison.add_argument("--constraints")
    comparison.add_argument("--least-norm", action="store_true")
    comparison.add_argument("--config", help="JSON list of method configurations.")
    comparison.add_argument("--format", choices=FORMATS, default="json")
    comparison.add_argument("--out")
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        config = RunConfig.from_args(args)
        return HANDLERS[config.command](config)
    except (MRPZError, ValueError, KeyError, OSError) as e:
        log.debug("Command failed", exc_info=True)
        sys.stderr.write(f"mrpz {args.command}: {type(e).__name__}: {e}\n")
        return EXIT_ERROR
