"""JSON wire format: schema validation, parsing into domain objects, canonical output.

Documents look like ``{"schema_version": "povm-lab/1", "payload": {"kind": ...}}``.
Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of them. Canonical output sorts keys and writes every float with 17
significant digits, so ``serialize(parse(doc))`` reproduces a canonical
document byte for byte.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from importlib import resources
from typing import Any

import jsonschema
import numpy as np

from .convex import CstarCoefficients, make_cstar_coefficients
from .errors import SchemaError
from .integral import ElementaryUcp, make_ucp
from .linalg import DEFAULT_TOL, Tolerance
from .measure import DensityGrid, make_density_grid
from .model import FinitePovm, OutcomePoint, QuantumRandomVariable, State, make_povm, make_state
from .randomness import KrausChannel, make_channel

SCHEMA_VERSION = "povm-lab/1"


@lru_cache(maxsize=1)
def schema() -> dict:
    return json.loads(resources.files("povmlab").joinpath("schema.json").read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def _validator():
    cls = jsonschema.validators.validator_for(schema())
    return cls(schema())


# canonical text -----------------------------------------------------------

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    if not any(c in s for c in ".e"):
        s += ".0"
    return s


def _plain(value: Any) -> Any:
    """Convert numpy scalars and tuples into plain JSON values."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write(value: Any, out: list, indent: int | None, level: int):
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, int):
        out.append(str(value))
    elif isinstance(value, float):
        out.append(_format_float(value))
    elif isinstance(value, str):
        out.append(json.dumps(value, ensure_ascii=False))
    elif isinstance(value, list):
        _write_seq("[", "]", [(None, v) for v in value], out, indent, level)
    elif isinstance(value, dict):
        _write_seq("{", "}", sorted(value.items()), out, indent, level)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_seq(open_, close, items, out, indent, level):
    if not items:
        out.append(open_ + close)
        return
    # keep innermost [re, im] pairs and numeric rows on one line when pretty
    flat = indent is None or all(not isinstance(v, (list, dict)) for _, v in items)
    out.append(open_)
    for k, (key, v) in enumerate(items):
        if k:
            out.append("," if flat and indent is None else ", " if flat else ",")
        if not flat:
            out.append("\n" + " " * (indent * (level + 1)))
        if key is not None:
            out.append(json.dumps(key, ensure_ascii=False) + (": " if indent is not None else ":"))
        _write(v, out, indent, level + 1)
    if not flat:
        out.append("\n" + " " * (indent * level))
    out.append(close)


def dumps(document: dict, pretty: bool = False) -> str:
    """Canonical JSON text (sorted keys, floats with 17 significant digits)."""
    out: list[str] = []
    _write(_plain(document), out, 2 if pretty else None, 0)
    return "".join(out) + "\n"


# encoding -----------------------------------------------------------------

def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _point_fields(p: OutcomePoint) -> dict:
    out = {"label": p.label}
    if p.coordinate is not None:
        out["coordinate"] = p.coordinate
    return out


def encode_payload(obj) -> dict:
    if isinstance(obj, FinitePovm):
        return {
            "kind": "povm",
            "dim": obj.dim,
            "outcomes": [{**_point_fields(p), "effect": encode_matrix(h)} for p, h in obj],
        }
    if isinstance(obj, State):
        return {"kind": "state", "dim": obj.dim, "matrix": encode_matrix(obj.matrix)}
    if isinstance(obj, QuantumRandomVariable):
        return {
            "kind": "qrv",
            "dim": obj.dim,
            "values": [{"label": x, "matrix": encode_matrix(m)} for x, m in obj.items()],
        }
    if isinstance(obj, KrausChannel):
        return {
            "kind": "channel",
            "dim": obj.dim,
            "kraus": [encode_matrix(a) for a in obj.kraus],
            "trace_preserving": obj.trace_preserving,
            "unital": obj.unital,
        }
    if isinstance(obj, CstarCoefficients):
        return encode_payload(make_channel(obj.matrices, obj.dim))
    if isinstance(obj, ElementaryUcp):
        return {
            "kind": "ucp",
            "dim": obj.dim,
            "terms": [{**_point_fields(p), "coefficient": encode_matrix(t)} for p, t in obj],
        }
    if isinstance(obj, DensityGrid):
        return {
            "kind": "density_grid",
            "dim": obj.dim,
            "samples": [
                {"coordinate": float(t), "matrix": encode_matrix(m)}
                for t, m in zip(obj.coordinates, obj.matrices)
            ],
        }
    raise TypeError(f"no wire encoding for {type(obj).__name__}")


def report_payload(name: str, data: dict, trace=()) -> dict:
    return {"kind": "report", "name": name, "data": data, "trace": list(trace)}


def document(payload_or_obj) -> dict:
    payload = payload_or_obj if isinstance(payload_or_obj, dict) else encode_payload(payload_or_obj)
    return {"schema_version": SCHEMA_VERSION, "payload": payload}


def serialize(obj, pretty: bool = False) -> str:
    return dumps(document(obj), pretty)


# decoding -----------------------------------------------------------------

def validate_document(doc: Any) -> dict:
    """Check ``doc`` against the wire schema; raise :class:`SchemaError` at the deepest failing path."""
    errors = sorted(_validator().iter_errors(doc), key=lambda e: len(e.absolute_path), reverse=True)
    if errors:
        err = errors[0]
        # descend into composite failures to report the most specific location
        while err.context:
            err = max(err.context, key=lambda e: len(e.absolute_path))
        raise SchemaError(err.message, err.absolute_path)
    return doc


def decode_matrix(obj, path, dim: int | None = None) -> np.ndarray:
    rows = len(obj)
    if any(len(row) != rows for row in obj):
        raise SchemaError(f"matrix must be square, got {rows} rows of lengths {[len(r) for r in obj]}", path)
    if dim is not None and rows != dim:
        raise SchemaError(f"expected a {dim}x{dim} matrix, got {rows}x{rows}", path)
    arr = np.array(obj, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _point(entry) -> OutcomePoint:
    return OutcomePoint(entry["label"], entry.get("coordinate"))


def decode_payload(payload: dict, cfg: Tolerance = DEFAULT_TOL, strict: bool = True):
    """Build the domain object for a schema-valid payload, enforcing its invariants.

    ``strict=False`` skips the unitality check on ``ucp`` payloads so that
    a verifier can report on maps that are not unital.
    """
    kind, dim = payload["kind"], payload.get("dim")
    base = ("payload",)
    if kind == "povm":
        entries = [
            (_point(o), decode_matrix(o["effect"], base + ("outcomes", k, "effect"), dim))
            for k, o in enumerate(payload["outcomes"])
        ]
        return make_povm(dim, entries, cfg)
    if kind == "state":
        return make_state(decode_matrix(payload["matrix"], base + ("matrix",), dim), cfg)
    if kind == "qrv":
        values = [
            (v["label"], decode_matrix(v["matrix"], base + ("values", k, "matrix"), dim))
            for k, v in enumerate(payload["values"])
        ]
        return QuantumRandomVariable(values, dim)
    if kind == "channel":
        return make_channel(
            [decode_matrix(a, base + ("kraus", k), dim) for k, a in enumerate(payload["kraus"])], dim, cfg
        )
    if kind == "ucp":
        terms = [
            (_point(t), decode_matrix(t["coefficient"], base + ("terms", k, "coefficient"), dim))
            for k, t in enumerate(payload["terms"])
        ]
        return make_ucp(dim, terms, cfg, check=strict)
    if kind == "density_grid":
        samples = [
            (s["coordinate"], decode_matrix(s["matrix"], base + ("samples", k, "matrix"), dim))
            for k, s in enumerate(payload["samples"])
        ]
        return make_density_grid(samples, dim, cfg)
    if kind == "report":
        return payload
    raise SchemaError(f"unknown payload kind {kind!r}", base + ("kind",))


def loads_document(text: str | bytes) -> dict:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SchemaError(f"document is not UTF-8: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None
    return validate_document(doc)


def parse(text: str | bytes, cfg: Tolerance = DEFAULT_TOL, strict: bool = True):
    """Parse a document into its validated domain object."""
    return decode_payload(loads_document(text)["payload"], cfg, strict)


def parse_as(text: str | bytes, kind: str, cfg: Tolerance = DEFAULT_TOL, strict: bool = True):
    payload = loads_document(text)["payload"]
    if payload["kind"] != kind:
        raise SchemaError(f"expected a {kind!r} payload, got {payload['kind']!r}", ("payload", "kind"))
    return decode_payload(payload, cfg, strict)


def coefficients_from_channel(channel: KrausChannel, cfg: Tolerance = DEFAULT_TOL) -> CstarCoefficients:
    """Read a channel payload's Kraus list as C*-convex coefficients (``sum a^* a = 1``)."""
    return make_cstar_coefficients(channel.kraus, channel.dim, cfg)


def canonicalize(text: str | bytes, pretty: bool = False) -> str:
    """Canonical text for a schema-valid document without rebuilding domain objects."""
    return dumps(loads_document(text), pretty)


__all__ = [
    "SCHEMA_VERSION",
    "canonicalize",
    "coefficients_from_channel",
    "decode_payload",
    "document",
    "dumps",
    "encode_matrix",
    "encode_payload",
    "loads_document",
    "parse",
    "parse_as",
    "report_payload",
    "schema",
    "serialize",
    "validate_document",
]
