"""File formats: moment files, operator files, density and characteristic CSVs.

Every writer goes through :func:`atomic_write`, which writes a temporary file
in the target directory and renames it into place.
"""

import csv
import io
import json
import os
import tempfile
import warnings
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from .chebyshev import FLOAT_DIGITS, MomentVector
from .exceptions import PrecisionWarning
from .sources import SpectralProblem

__all__ = [
    "atomic_write",
    "format_number",
    "read_density_csv",
    "read_moment_file",
    "read_samples",
    "read_spectral_problem",
    "write_characteristic_csv",
    "write_density_csv",
    "write_long_csv",
    "write_moment_file",
    "write_spectral_problem",
]


def atomic_write(path, text):
    """Write ``text`` to ``path`` via a temporary file and ``os.replace``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_number(x):
    """17 significant digits: enough for a lossless float64 round trip."""
    return f"{float(x):.17g}"


def _load_json(path):
    with open(path) as fh:
        text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON ({exc.msg})") from None


def _require(obj, key, path):
    if not isinstance(obj, dict) or key not in obj:
        raise ValueError(f"{path}: missing field {key!r}")
    return obj[key]


# --------------------------------------------------------------------------
# Moment files
# --------------------------------------------------------------------------


def _moment_to_json(v):
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, Decimal):
        return str(v)
    return float(v)


def write_moment_file(path, moments):
    """Write ``{"domain", "moments", "precision_digits"}``.

    Decimal moments are written as decimal strings, exact rationals as
    ``"p/q"`` strings and binary floats as JSON numbers.
    """
    payload = {
        "domain": [_moment_to_json(x) for x in moments.domain],
        "moments": [_moment_to_json(v) for v in moments.values],
        "precision_digits": moments.precision_digits,
    }
    if moments.kind == "rational":
        payload["precision_digits"] = None
    if moments.standard_errors is not None:
        payload["standard_errors"] = [float(s) for s in moments.standard_errors]
    return atomic_write(path, json.dumps(payload, indent=1) + "\n")


def _parse_moment(v, where):
    if isinstance(v, bool):
        raise ValueError(f"{where}: expected a number or numeric string, got {v!r}")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        s = v.strip()
        if s.lstrip("+-").isdigit():
            return Fraction(int(s))
        if "/" in s:
            try:
                return Fraction(s)
            except ValueError:
                raise ValueError(f"{where}: malformed rational {v!r}") from None
        try:
            d = Decimal(s)
        except InvalidOperation:
            raise ValueError(f"{where}: malformed decimal {v!r}") from None
        if not d.is_finite():
            raise ValueError(f"{where}: non-finite moment {v!r}")
        return d
    raise ValueError(f"{where}: expected a number or numeric string, got {type(v).__name__}")


def read_moment_file(path):
    """Read a moment file into a :class:`MomentVector`.

    Binary floats are accepted, but the result is flagged with a
    :class:`PrecisionWarning` because they carry at most 15-17 digits.
    """
    data = _load_json(path)
    domain = _require(data, "domain", path)
    if not isinstance(domain, list) or len(domain) != 2:
        raise ValueError(f"{path}: field 'domain' must be a two-element list")
    domain = tuple(_parse_moment(x, f"{path}: domain[{i}]") for i, x in enumerate(domain))
    raw = _require(data, "moments", path)
    if not isinstance(raw, list) or not raw:
        raise ValueError(f"{path}: field 'moments' must be a non-empty list")
    values = [_parse_moment(v, f"{path}: moments[{i}]") for i, v in enumerate(raw)]
    digits = data.get("precision_digits")
    if digits is not None and (not isinstance(digits, int) or digits <= 0):
        raise ValueError(f"{path}: field 'precision_digits' must be a positive integer")
    notes = []
    if any(isinstance(v, float) for v in values):
        notes.append(f"{path}: moments given as binary floats; precision limited to {FLOAT_DIGITS} digits")
        warnings.warn(notes[-1], PrecisionWarning, stacklevel=2)
        digits = FLOAT_DIGITS if digits is None else min(digits, FLOAT_DIGITS)
    se = data.get("standard_errors")
    domain = tuple(int(x) if isinstance(x, Fraction) and x.denominator == 1 else x for x in domain)
    return MomentVector(tuple(values), domain, digits, tuple(se) if se else None, tuple(notes))


# --------------------------------------------------------------------------
# Operator files and samples
# --------------------------------------------------------------------------


def _complex_list(raw, where):
    out = []
    for i, pair in enumerate(raw):
        if isinstance(pair, (int, float)) and not isinstance(pair, bool):
            out.append(complex(pair))
            continue
        if not isinstance(pair, list) or len(pair) != 2:
            raise ValueError(f"{where}[{i}]: expected a [re, im] pair, got {pair!r}")
        out.append(complex(float(pair[0]), float(pair[1])))
    return np.array(out, dtype=complex)


def read_spectral_problem(path, dimension_cap=None):
    """Read ``{"dim", "matrix": row-major [re, im] pairs, "state": [re, im] pairs}``."""
    data = _load_json(path)
    dim = _require(data, "dim", path)
    if not isinstance(dim, int) or dim <= 0:
        raise ValueError(f"{path}: field 'dim' must be a positive integer")
    raw = _require(data, "matrix", path)
    if raw and isinstance(raw[0], list) and raw[0] and isinstance(raw[0][0], list):
        raw = [pair for row in raw for pair in row]
    matrix = _complex_list(raw, f"{path}: matrix")
    if matrix.size != dim * dim:
        raise ValueError(f"{path}: field 'matrix' has {matrix.size} entries, expected dim^2 = {dim * dim}")
    state = _complex_list(_require(data, "state", path), f"{path}: state")
    if state.size != dim:
        raise ValueError(f"{path}: field 'state' has {state.size} entries, expected {dim}")
    kwargs = {} if dimension_cap is None else {"dimension_cap": dimension_cap}
    return SpectralProblem(matrix.reshape(dim, dim), state, **kwargs)


def _pairs(a):
    return [[float(z.real), float(z.imag)] for z in a]


def write_spectral_problem(path, problem):
    payload = {"dim": problem.dim, "matrix": _pairs(problem.operator.ravel()), "state": _pairs(problem.state)}
    return atomic_write(path, json.dumps(payload) + "\n")


def read_samples(path):
    """One sample per line (or whitespace/comma separated); ``#`` starts a comment."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].replace(",", " ")
            for tok in line.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: not a number: {tok!r}") from None
    if not values:
        raise ValueError(f"{path}: no samples found")
    return np.array(values)


# --------------------------------------------------------------------------
# CSV outputs
# --------------------------------------------------------------------------


def _csv_text(header, rows, comments=()):
    buf = io.StringIO()
    for c in comments:
        for line in str(c).splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_density_csv(path, x, density, comments=()):
    """``x,density`` rows; ``comments`` become leading ``#`` lines."""
    rows = zip(np.asarray(x, dtype=float), np.asarray(density, dtype=float))
    return atomic_write(path, _csv_text(("x", "density"), rows, comments))


def write_characteristic_csv(path, t, phi, comments=()):
    phi = np.asarray(phi, dtype=complex)
    rows = zip(np.asarray(t, dtype=float), phi.real, phi.imag)
    return atomic_write(path, _csv_text(("t", "re", "im"), rows, comments))


def write_long_csv(path, records, comments=()):
    """Long-format ``x,method,value`` rows from ``(method, x, values)`` records."""
    rows = ((float(xi), method, float(vi)) for method, x, values in records for xi, vi in zip(x, values))
    return atomic_write(path, _csv_text(("x", "method", "value"), rows, comments))


def read_density_csv(path):
    """Read a CSV written by the writers above.

    Returns
    -------
    columns : dict of numpy.ndarray
        One array per header field (string columns stay as object arrays).
    comments : list of str
    """
    comments, lines = [], []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                comments.append(line[1:].strip())
            elif line.strip():
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    cols = [[] for _ in header]
    for lineno, row in enumerate(reader, 2):
        if len(row) != len(header):
            raise ValueError(f"{path}: data row {lineno} has {len(row)} fields, expected {len(header)}")
        for col, v in zip(cols, row):
            col.append(v)
    out = {}
    for name, col in zip(header, cols):
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col, dtype=object)
    return out, comments
