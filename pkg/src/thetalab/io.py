"""Canonical JSON encodings and human-readable monomial printing.

Rationals are written as ``"p/q"`` strings in lowest terms with ``q > 0``;
series terms are listed in graded-lexicographic order so that identical
objects always serialize to identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any, Sequence

from .broken_lines import BrokenLine, ThetaResult
from .lattice import ExtendedExchangeMatrix
from .scattering import ScatteringDiagram
from .series import GradedElement, TruncatedSeries, graded_lex_key


class InputError(ValueError):
    """Malformed user input (bad JSON or wrong shapes)."""


def rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s) -> Fraction:
    if isinstance(s, bool):
        raise InputError(f"not a rational number: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"not a rational number: {s!r}") from exc
    raise InputError(f"not a rational number: {s!r}")


def parse_json_arg(text: str) -> Any:
    """Inline JSON, or the contents of a file when ``text`` names one."""
    if text.lstrip().startswith(("[", "{", "-")) or text.strip().lstrip("-").isdigit():
        source = text
    else:
        try:
            with open(text, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read {text!r}: {exc}") from exc
    try:
        return json.loads(source)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc


def parse_int_vector(text: str) -> tuple[int, ...]:
    value = parse_json_arg(text)
    if not isinstance(value, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise InputError(f"expected an integer array, got {text!r}")
    return tuple(value)


def parse_point(text: str) -> tuple[Fraction, ...]:
    value = parse_json_arg(text) if text.strip().startswith("[") else text.split(",")
    if not isinstance(value, list):
        raise InputError(f"expected a point, got {text!r}")
    return tuple(parse_rational(x) for x in value)


# matrices ---------------------------------------------------------------------------


def matrix_from_json(value: Any, principal_if_square: bool = True) -> ExtendedExchangeMatrix:
    """Accepts a bare array of rows or ``{"matrix": rows, "I_uf": [...], "I_fr": [...], "d": [...]}``.

    Rows are indexed by ``I_uf``; columns list ``I_uf`` first, then ``I_fr``.
    A square matrix without frozen indices gets principal coefficients when
    ``principal_if_square`` is set.
    """
    d = None
    if isinstance(value, dict):
        if "matrix" not in value:
            raise InputError('matrix object needs a "matrix" field')
        rows = value["matrix"]
        uf = value.get("I_uf")
        fr = value.get("I_fr", [])
        d = value.get("d")
        if uf is not None and len(uf) != len(rows):
            raise InputError("I_uf must list one index per row")
        if uf is not None and rows and len(rows[0]) != len(uf) + len(fr):
            raise InputError("columns must be indexed by I_uf followed by I_fr")
    else:
        rows = value
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise InputError("matrix must be a nonempty array of rows")
    for row in rows:
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in row):
            raise InputError("matrix entries must be integers")
    try:
        if principal_if_square and len(rows[0]) == len(rows):
            return ExtendedExchangeMatrix.principal(rows, d)
        return ExtendedExchangeMatrix(rows, d)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def matrix_to_json(Bt: ExtendedExchangeMatrix) -> dict:
    r = Bt.rank
    return {
        "matrix": [list(row) for row in Bt.entries],
        "I_uf": list(range(1, r + 1)),
        "I_fr": list(range(r + 1, len(Bt.entries[0]) + 1)),
        "d": list(Bt.d),
    }


# series and elements ------------------------------------------------------------


def series_to_json(s: TruncatedSeries) -> dict:
    return {
        "order": s.order,
        "terms": [{"n": list(n), "coeff": rational(c)} for n, c in s.sorted_terms()],
    }


def series_from_json(value: dict, nvars: int) -> TruncatedSeries:
    try:
        terms = {tuple(t["n"]): parse_rational(t["coeff"]) for t in value["terms"]}
        return TruncatedSeries(terms, nvars, value.get("order"))
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed series: {exc}") from exc


def graded_to_json(x: GradedElement) -> dict:
    pieces = []
    for g in sorted(x.pieces, key=graded_lex_key):
        p = x.pieces[g]
        pieces.append({"m": list(g), "shift": list(p.shift), "series": series_to_json(p.series)})
    return {"pieces": pieces}


# diagrams and broken lines --------------------------------------------------------


def diagram_to_json(diagram: ScatteringDiagram) -> dict:
    walls = []
    for w in diagram.walls:
        walls.append(
            {
                "n": list(w.normal),
                "ray_dir": None if w.direction is None else list(w.direction),
                "f": series_to_json(w.f),
                "outgoing": w.outgoing,
            }
        )
    walls.sort(key=lambda w: (w["ray_dir"] is not None, w["ray_dir"] or [], w["n"]))
    return {
        "B": matrix_to_json(diagram.matrix),
        "order": diagram.order,
        "certified_finite_type": diagram.is_certified_finite(),
        "walls": walls,
    }


def _point(p) -> list[str] | None:
    return None if p is None else [rational(x) for x in p]


def line_to_json(line: BrokenLine) -> dict:
    return {
        "asymptotic": list(line.asymptotic),
        "endpoint": _point(line.endpoint),
        "domains": [
            {
                "start": _point(d.start),
                "end": _point(d.end),
                "direction": [-x for x in d.m],
                "label": {"coeff": rational(d.coeff), "m": list(d.m), "n": list(d.n)},
            }
            for d in line.domains
        ],
        "bends": [
            {"normal": list(b.normal), "power": b.power, "coeff": rational(b.coeff), "point": _point(b.point)}
            for b in line.bends
        ],
    }


def theta_to_json(result: ThetaResult, include_lines: bool = True) -> dict:
    out = {
        "m": list(result.m),
        "Q": _point(result.Q),
        "finiteness": result.finiteness,
        "broken_line_count": result.broken_line_count,
        "F": series_to_json(result.F),
        "display": display_pointed(result.m, result.F),
    }
    if include_lines:
        out["lines"] = [line_to_json(g) for g in result.lines]
    return out


def expansion_to_json(expansion) -> list[dict]:
    return [{"m": list(m), "n": list(n), "coeff": rational(c)} for m, n, c in expansion]


def dumps(value: Any) -> str:
    return json.dumps(value, indent=2, sort_keys=True) + "\n"


# pretty printing ---------------------------------------------------------------


def _monomial(name: str, exps: Sequence[int]) -> str:
    parts = []
    for i, e in enumerate(exps, start=1):
        if e == 0:
            continue
        parts.append(f"{name}{i}" if e == 1 else f"{name}{i}^{e}")
    return " ".join(parts)


def display_series(s: TruncatedSeries, name: str = "zeta") -> str:
    chunks = []
    for n, c in s.sorted_terms():
        mono = _monomial(name, n)
        if not mono:
            chunks.append(str(c))
        elif c == 1:
            chunks.append(mono)
        else:
            chunks.append(f"{c} {mono}")
    body = " + ".join(chunks) or "0"
    body = body.replace("+ -", "- ")
    if s.order is not None:
        body += f" + O({s.order + 1})"
    return body


def display_pointed(m: Sequence[int], F: TruncatedSeries) -> str:
    """``z^m (F)`` with the variables printed first, e.g. ``z1^-2 z2^3 (1 + 2 zeta1 + ...)``."""
    head = _monomial("z", m)
    body = display_series(F)
    if not head:
        return body
    if body == "1":
        return head
    return f"{head} ({body})"
