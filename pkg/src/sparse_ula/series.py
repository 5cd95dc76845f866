"""Sampled curves and distributions, empirical CDFs, and their file formats.

JSON documents carry every series plus a metadata block and validate
against ``schemas/output.schema.json``. CSV output is one ``x,value`` file
per series with a ``<stem>.meta.json`` sidecar for the metadata.
"""

from dataclasses import dataclass, field
import csv
import json
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ParameterError

SCHEMA_VERSION = 1
KINDS = ("cdf", "pdf", "curve")


@dataclass
class DistributionSeries:
    """Ordered ``(x, value)`` pairs with metadata.

    ``kind`` is ``"cdf"`` (values nondecreasing in [0, 1]), ``"pdf"``
    (non-negative histogram density) or ``"curve"`` (any sampled function).
    """

    name: str
    kind: str
    x: np.ndarray
    value: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.value = np.asarray(self.value, dtype=float)
        if self.kind not in KINDS:
            raise ParameterError(f"unknown series kind {self.kind!r}")
        if self.x.shape != self.value.shape or self.x.ndim != 1:
            raise ParameterError("x and value must be 1-D arrays of equal length")
        if self.x.size > 1 and np.any(np.diff(self.x) <= 0):
            raise ParameterError(f"series {self.name!r}: x must be strictly increasing")
        if self.kind == "cdf":
            if np.any(np.diff(self.value) < 0) or np.any((self.value < 0) | (self.value > 1)):
                raise ParameterError(f"series {self.name!r} is not a valid CDF")
        if self.kind == "pdf" and np.any(self.value < 0):
            raise ParameterError(f"series {self.name!r}: density must be non-negative")

    def __eq__(self, other):
        if not isinstance(other, DistributionSeries):
            return NotImplemented
        return (self.name == other.name and self.kind == other.kind
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.value, other.value)
                and _plain(self.meta) == _plain(other.meta))


def empirical_cdf(samples, name="ecdf", meta=None):
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ParameterError("empirical CDF of an empty sample")
    values, counts = np.unique(samples, return_counts=True)
    cum = np.cumsum(counts) / samples.size
    cum[-1] = 1.0
    meta = dict(meta or {})
    meta.setdefault("samples", int(samples.size))
    return DistributionSeries(name, "cdf", values, cum, meta)


def kolmogorov_distance(cdf, samples, left=None):
    """``sup_x |cdf(x) - F_n(x)|`` for a vectorized, nondecreasing callable ``cdf``.

    Both one-sided limits are checked at every sample. ``left(x)`` gives the
    left limit ``P(X < x)``; by default ``cdf`` is evaluated one ulp below,
    which is exact unless ``cdf`` locates its jumps only up to roundoff.
    """
    samples = np.asarray(samples, dtype=float)
    values, counts = np.unique(samples, return_counts=True)
    n = samples.size
    after = np.cumsum(counts) / n
    before = after - counts / n
    at = np.asarray(cdf(values), dtype=float)
    if left is None:
        left = np.asarray(cdf(np.nextafter(values, -np.inf)), dtype=float)
    else:
        left = np.asarray(left(values), dtype=float)
    return float(max(np.max(np.abs(at - after)), np.max(np.abs(left - before))))


# -- serialization ----------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def output_schema():
    text = resources.files("sparse_ula").joinpath("schemas/output.schema.json").read_text()
    return json.loads(text)


def to_document(series, command, meta=None):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "meta": _plain(meta or {}),
        "series": [
            {"name": s.name, "kind": s.kind, "x": s.x.tolist(),
             "value": s.value.tolist(), "meta": _plain(s.meta)}
            for s in series
        ],
    }


def from_document(doc):
    jsonschema.validate(doc, output_schema())
    series = [DistributionSeries(s["name"], s["kind"], s["x"], s["value"], s["meta"])
              for s in doc["series"]]
    return series, doc["meta"]


def csv_paths(path, series):
    path = Path(path)
    if len(series) == 1:
        return [path]
    return [path.with_name(f"{path.stem}.{s.name}{path.suffix or '.csv'}") for s in series]


def write_series(path, series, command, meta=None, fmt=None):
    """Write ``series`` to ``path``; ``fmt`` defaults to the file extension.

    Returns the list of files written.
    """
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "json")
    doc = to_document(series, command, meta)
    jsonschema.validate(doc, output_schema())
    if fmt == "json":
        path.write_text(json.dumps(doc, indent=1) + "\n")
        return [path]
    if fmt != "csv":
        raise ParameterError(f"unknown output format {fmt!r}")
    written = []
    for s, p in zip(series, csv_paths(path, series)):
        with open(p, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            writer.writerows((repr(float(a)), repr(float(b))) for a, b in zip(s.x, s.value))
        written.append(p)
    sidecar = path.with_name(f"{path.stem}.meta.json")
    side = dict(doc)
    side["series"] = [{"name": s["name"], "kind": s["kind"], "meta": s["meta"], "file": p.name}
                      for s, p in zip(doc["series"], written)]
    sidecar.write_text(json.dumps(side, indent=1) + "\n")
    return written + [sidecar]


def read_csv_series(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["x", "value"]:
        raise ParameterError(f"{path}: expected header 'x,value'")
    data = np.array([[float(a), float(b)] for a, b in rows[1:]]).reshape(-1, 2)
    return data[:, 0], data[:, 1]


def read_series(path):
    """Load a JSON document or a CSV sidecar back into ``(series, meta)``."""
    path = Path(path)
    doc = json.loads(path.read_text())
    if doc.get("series") and "file" in doc["series"][0]:
        series = []
        for entry in doc["series"]:
            x, v = read_csv_series(path.with_name(entry["file"]))
            series.append(DistributionSeries(entry["name"], entry["kind"], x, v, entry["meta"]))
        return series, doc["meta"]
    return from_document(doc)
