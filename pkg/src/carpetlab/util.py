"""Shared plumbing: complex literals, canonical JSON, digests."""

from __future__ import annotations

import hashlib
import json
import math
import re

# Complex literal grammar: a+bi / a-bi with no spaces, plus the bare forms
# "a" (real) and "bi" / "i" (imaginary).  Shell-safe and unambiguous.
_FLOAT = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?:(?P<re>{_FLOAT})(?P<im>[-+](?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)i"
    rf"|(?P<im_only>{_FLOAT}|[-+]?)i"
    rf"|(?P<re_only>{_FLOAT}))$"
)


class ComplexFormatError(ValueError):
    pass


def parse_complex(text: str) -> complex:
    """Parse a complex literal of the form a+bi / a-bi (no spaces)."""
    m = _COMPLEX_RE.match(text.strip())
    if m is None:
        raise ComplexFormatError(f"not a complex literal (want a+bi): {text!r}")
    if m.group("re") is not None:
        return complex(float(m.group("re")), float(m.group("im")))
    if m.group("im_only") is not None:
        s = m.group("im_only")
        if s in ("", "+"):
            return complex(0.0, 1.0)
        if s == "-":
            return complex(0.0, -1.0)
        return complex(0.0, float(s))
    return complex(float(m.group("re_only")), 0.0)


def format_complex(z: complex) -> str:
    """Shortest round-trip a+bi literal for z (parse_complex inverse)."""
    sign = "+" if (z.imag >= 0 or math.isnan(z.imag)) else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def float17(x: float) -> str:
    """Serialize a float with 17 significant digits (exact round trip)."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite float in report: {x}")
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, no whitespace, floats at 17 digits.

    Used both for report output and for request digests, so the encoding
    must never depend on dict insertion order or platform float repr.
    """
    out: list[str] = []
    _write_canonical(obj, out)
    return "".join(out)


def _write_canonical(obj, out: list[str]) -> None:
    if obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(float17(obj))
    elif isinstance(obj, dict):
        out.append("{")
        first = True
        for key in sorted(obj):
            if not isinstance(key, str):
                raise TypeError(f"non-string key in canonical JSON: {key!r}")
            if not first:
                out.append(",")
            first = False
            out.append(json.dumps(key))
            out.append(":")
            _write_canonical(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _write_canonical(item, out)
        out.append("]")
    else:
        raise TypeError(f"unsupported type in canonical JSON: {type(obj)!r}")


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_json(obj) -> str:
    return digest_bytes(canonical_json(obj).encode("utf-8"))
