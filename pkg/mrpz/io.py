"""
File Formats
************

* Systems: JSON ``{"A": [[…]], "B": […], "C": […]}`` or MATLAB ``.mat`` files
  with variables ``A``, ``B``, ``C`` (first input/output channel kept), or
  ``builtin:<name>[:<order>]``.
* Samples: CSV with header ``point_re,point_im,order,value_re,value_im``.
* Constraints: JSON ``{"poles": […], "zeros": […], "derivative_points": […]}``.
* Reduced models and Loewner pairs: JSON.

Complex scalars are written as ``"a+bj"`` strings; real scalars as JSON
numbers. Floats use their shortest round-trip text, so files read back
bit-exactly.
"""
import csv
import json
import pathlib
import typing as t

import numpy as np
import scipy.io

from .constraints import ConstraintReport, ConstraintSpec, ReducedModel
from .loewner import LoewnerPair
from .statespace import StateSpace, TransferSample
from .systems import builtin_system
from .utils import format_complex, parse_complex

PathType = t.Union[str, pathlib.Path]

SAMPLE_HEADER = ("point_re", "point_im", "order", "value_re", "value_im")
BUILTIN_PREFIX = "builtin:"


def encode_scalar(value: t.Any) -> t.Union[float, str]:
    value = complex(value)
    if value.imag == 0:
        real = value.real
        return real if np.isfinite(real) else repr(real)
    return format_complex(value)


def decode_scalar(value: t.Any) -> complex:
    if isinstance(value, bool):
        raise ValueError(f"Expected a number, got {value!r}.")
    return parse_complex(value)


def encode_matrix(matrix: np.ndarray) -> t.List:
    matrix = np.asarray(matrix)
    if matrix.ndim == 1:
        return [encode_scalar(v) for v in matrix]
    return [encode_matrix(row) for row in matrix]


def decode_matrix(data: t.Any) -> np.ndarray:
    array = np.array(data, dtype=object)
    values = np.vectorize(decode_scalar, otypes=[complex])(array) if array.size else array.astype(complex)
    return values.real.copy() if not np.any(values.imag) else values


def system_to_dict(sys: StateSpace) -> t.Dict[str, t.List]:
    return {
        "A": encode_matrix(sys.A),
        "B": encode_matrix(sys.B.ravel()),
        "C": encode_matrix(sys.C.ravel()),
    }


def system_from_dict(data: t.Mapping[str, t.Any]) -> StateSpace:
    try:
        A, B, C = (decode_matrix(data[key]) for key in ("A", "B", "C"))
    except KeyError as e:
        raise ValueError(f"System JSON needs keys 'A', 'B', 'C'; missing {e}.") from e
    n = B.size
    return StateSpace(A.reshape(n, n) if A.size == n * n else A, B, C)


def _load_mat(path: pathlib.Path) -> StateSpace:
    data = scipy.io.loadmat(str(path))
    try:
        A, B, C = (data[key] for key in ("A", "B", "C"))
    except KeyError as e:
        raise ValueError(f"{path} needs variables A, B and C; missing {e}.") from e
    A = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
    B = B.toarray() if hasattr(B, "toarray") else np.asarray(B)
    C = C.toarray() if hasattr(C, "toarray") else np.asarray(C)
    return StateSpace(A.astype(float), B[:, :1].astype(float), C[:1, :].astype(float))


def load_system(path: PathType) -> StateSpace:
    text = str(path)
    if text.startswith(BUILTIN_PREFIX):
        return builtin_system(text[len(BUILTIN_PREFIX):])
    path = pathlib.Path(path)
    if path.suffix.lower() == ".mat":
        return _load_mat(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}") from e
    return system_from_dict(data)


def dump_json(data: t.Any, path: t.Optional[PathType] = None) -> str:
    text = json.dumps(data, indent=2, allow_nan=False) + "\n"
    if path is not None:
        pathlib.Path(path).write_text(text)
    return text


def save_system(sys: StateSpace, path: PathType) -> None:
    dump_json(system_to_dict(sys), path)


def read_samples(path: PathType) -> t.List[TransferSample]:
    """Samples in file order; line numbers count the header as line 1."""
    samples = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SAMPLE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(SAMPLE_HEADER)}, got {header}.")
        for line, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(SAMPLE_HEADER):
                raise ValueError(f"{path}:{line}: expected {len(SAMPLE_HEADER)} fields, got {len(row)}.")
            try:
                point_re, point_im, order, value_re, value_im = row
                samples.append(TransferSample(
                    complex(float(point_re), float(point_im)),
                    complex(float(value_re), float(value_im)),
                    int(order),
                    line,
                ))
            except ValueError as e:
                raise ValueError(f"{path}:{line}: {e}") from e
    return samples


def write_samples(samples: t.Iterable[TransferSample], path: PathType) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(SAMPLE_HEADER)
        for sample in samples:
            writer.writerow([
                repr(sample.point.real),
                repr(sample.point.imag),
                sample.order,
                repr(sample.value.real),
                repr(sample.value.imag),
            ])


def constraints_from_dict(data: t.Mapping[str, t.Any]) -> ConstraintSpec:
    unknown = set(data) - {"poles", "zeros", "derivative_points"}
    if unknown:
        raise ValueError(f"Unknown constraint keys {sorted(unknown)}.")
    return ConstraintSpec(**{
        key: tuple(decode_scalar(v) for v in data.get(key, ()))
        for key in ("poles", "zeros", "derivative_points")
    })


def constraints_to_dict(spec: ConstraintSpec) -> t.Dict[str, t.List]:
    return {
        "poles": [format_complex(v) for v in spec.poles],
        "zeros": [format_complex(v) for v in spec.zeros],
        "derivative_points": [format_complex(v) for v in spec.derivative_points],
    }


def read_constraints(path: PathType) -> ConstraintSpec:
    return constraints_from_dict(json.loads(pathlib.Path(path).read_text()))


def report_to_dict(report: ConstraintReport) -> t.Dict[str, t.Any]:
    data = report.to_dict()
    for entry in data["entries"]:
        entry["point"] = format_complex(entry["point"])
        entry["residual"] = encode_scalar(entry["residual"])
    return data


def model_to_dict(
    model: t.Union[ReducedModel, StateSpace],
    report: t.Optional[ConstraintReport] = None,
) -> t.Dict[str, t.Any]:
    """The real realization under ``A``, ``B``, ``C``; family data alongside."""
    if isinstance(model, ReducedModel):
        data = system_to_dict(model.state_space)
        data["family"] = {
            "S": encode_matrix(model.S),
            "L": encode_matrix(np.ravel(model.L)),
            "G": encode_matrix(np.ravel(model.G)),
            "W": encode_matrix(np.ravel(model.W)),
        }
        poles = model.poles()
    else:
        data = system_to_dict(model)
        poles = model.poles()
    data["poles"] = [format_complex(p) for p in poles]
    if report is not None:
        data["report"] = report_to_dict(report)
    return data


def write_model(
    model: t.Union[ReducedModel, StateSpace],
    path: t.Optional[PathType] = None,
    report: t.Optional[ConstraintReport] = None,
) -> str:
    return dump_json(model_to_dict(model, report), path)


def read_model(path: PathType) -> StateSpace:
    return system_from_dict(json.loads(pathlib.Path(path).read_text()))


def loewner_to_dict(pair: LoewnerPair) -> t.Dict[str, t.List]:
    """Row-major matrices of the pair, for debugging."""
    return {key: encode_matrix(value) for key, value in pair.to_dict().items()}


def write_loewner(pair: LoewnerPair, path: PathType) -> None:
    dump_json(loewner_to_dict(pair), path)
