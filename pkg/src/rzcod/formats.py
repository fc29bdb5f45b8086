"""Text and JSON serialization of designs and signed matrices.

Text designs look like::

    # scod n=4 k=3 scale_num=0 scale=1
     x1 -x2* -x3*    0
     x2  x1*    0 -x3*
    ...

Unit entries are written ``[-][j]x<idx>[*]`` and zero as ``0``.  Entries
that are linear combinations are ``+``-joined terms ``(p/q+r/s j)x<idx>[*]``;
a coefficient with a sqrt(2) part is ``(p/q+r/s j|t/u+v/w j)`` meaning
``(p/q + r/s j) + sqrt(2) (t/u + v/w j)``.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any

import numpy as np

from .design import Coeff, DesignMatrix, Entry, GramForm, SignedMatrix, SymbolicTerm, ZERO_ENTRY, unit_entry

__all__ = [
    "ParseError",
    "render_entry",
    "parse_entry",
    "render_coeff",
    "parse_coeff",
    "scale_text",
    "design_to_text",
    "design_from_text",
    "design_to_json",
    "design_from_json",
    "signed_to_text",
    "signed_from_text",
    "load_design",
    "render_gram",
]


class ParseError(ValueError):
    """Malformed input; ``row``/``col`` locate the offending cell when known."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        where = f" at cell ({row}, {col})" if row is not None and col is not None else (
            f" at row {row}" if row is not None else "")
        super().__init__(message + where)
        self.row = row
        self.col = col


_UNIT_RE = re.compile(r"^(-?)(j?)x(\d+)(\*?)$")
_FRAC = r"-?\d+(?:/\d+)?"
_GAUSS = rf"({_FRAC})([+-]\d+(?:/\d+)?) j"
_COEFF_RE = re.compile(rf"^\({_GAUSS}(?:\|{_GAUSS})?\)$")
_TERM_RE = re.compile(r"^(\(.*\))x(\d+)(\*?)$")
_PHASE_PREFIX = {0: "", 1: "j", 2: "-", 3: "-j"}


def _frac(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _gauss(re_: Fraction, im: Fraction) -> str:
    sign = "-" if im < 0 else "+"
    return f"{_frac(re_)}{sign}{_frac(abs(im))} j"


def render_coeff(c: Coeff) -> str:
    if c.has_sqrt2:
        return f"({_gauss(c.re, c.im)}|{_gauss(c.re2, c.im2)})"
    return f"({_gauss(c.re, c.im)})"


def parse_coeff(text: str) -> Coeff:
    m = _COEFF_RE.match(text)
    if not m:
        raise ParseError(f"bad coefficient {text!r}")
    re_, im, re2, im2 = m.groups()
    if re2 is None:
        return Coeff(Fraction(re_), Fraction(im))
    return Coeff(Fraction(re_), Fraction(im), Fraction(re2), Fraction(im2))


def render_entry(e: Entry) -> str:
    if e.is_zero:
        return "0"
    u = e.unit_form
    if u is not None:
        var, conj, phase = u
        return f"{_PHASE_PREFIX[phase]}x{var}{'*' if conj else ''}"
    return "+".join(f"{render_coeff(t.coeff)}x{t.var}{'*' if t.conj else ''}" for t in e.terms)


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def parse_entry(text: str) -> Entry:
    if text == "0":
        return ZERO_ENTRY
    m = _UNIT_RE.match(text)
    if m:
        neg, j, idx, star = m.groups()
        var = int(idx)
        if var < 1:
            raise ParseError(f"variable index must be >= 1 in {text!r}")
        return unit_entry(var, star == "*", (2 if neg else 0) + (1 if j else 0))
    terms = []
    for part in _split_top(text, "+"):
        mu = _UNIT_RE.match(part)
        if mu:
            neg, j, idx, star = mu.groups()
            terms.append(SymbolicTerm(Coeff.unit((2 if neg else 0) + (1 if j else 0)), int(idx), star == "*"))
            continue
        mt = _TERM_RE.match(part)
        if not mt or int(mt.group(2)) < 1:
            raise ParseError(f"bad entry {text!r}")
        coeff = parse_coeff(mt.group(1))
        if not coeff:
            raise ParseError(f"zero coefficient in {text!r}")
        terms.append(SymbolicTerm(coeff, int(mt.group(2)), mt.group(3) == "*"))
    return Entry(tuple(terms))


def scale_text(scale_num: int) -> str:
    """Human form of ``2**(scale_num/2)``, e.g. ``1/sqrt(2)`` or ``1/(2*sqrt(2))``."""
    whole, half = divmod(abs(scale_num), 2)
    mag = str(1 << whole) if whole else ""
    if half:
        mag = f"{mag}*sqrt(2)" if mag else "sqrt(2)"
    if not mag:
        return "1"
    if scale_num > 0:
        return mag
    return f"1/({mag})" if "*" in mag else f"1/{mag}"


def _tokens(line: str) -> list[str]:
    # whitespace split that keeps " j)" inside parenthesized coefficients
    out, depth, cur = [], 0, []
    for ch in line:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch.isspace() and depth == 0:
            if cur:
                out.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if cur:
        out.append("".join(cur))
    return out


def _align(cells: list[list[str]]) -> str:
    widths = [max(len(row[j]) for row in cells) for j in range(len(cells[0]))]
    return "\n".join(" ".join(c.rjust(w) for c, w in zip(row, widths)) for row in cells)


def design_to_text(design: DesignMatrix) -> str:
    header = f"# scod n={design.n} k={design.k} scale_num={design.scale_num} scale={scale_text(design.scale_num)}"
    arrays = design.restricted_arrays()
    if arrays is not None:
        slots, phases = arrays
        lut = ["0"] + [
            f"{_PHASE_PREFIX[p]}x{s // 2 + 1}{'*' if s & 1 else ''}" for s in range(2 * design.k) for p in range(4)
        ]
        codes = np.where(slots >= 0, 1 + 4 * slots.astype(np.int64) + phases, 0)
        cells = [[lut[c] for c in row] for row in codes.tolist()]
    else:
        cells = [[render_entry(e) for e in row] for row in design.entries]
    return header + "\n" + _align(cells) + "\n"


def _parse_header(line: str, kind: str, required: tuple[str, ...]) -> dict[str, str]:
    parts = line.lstrip("#").split()
    if not parts or parts[0] != kind:
        raise ParseError(f"expected a '# {kind} ...' header", row=0)
    fields = {}
    for p in parts[1:]:
        if "=" not in p:
            raise ParseError(f"bad header field {p!r}", row=0)
        key, val = p.split("=", 1)
        fields[key] = val
    missing = [r for r in required if r not in fields]
    if missing:
        raise ParseError(f"header missing {', '.join(missing)}", row=0)
    return fields


def _body(text: str) -> tuple[str, list[str]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ParseError("missing header line")
    return lines[0], lines[1:]


def _int_field(fields: dict[str, str], key: str) -> int:
    try:
        return int(fields[key])
    except ValueError:
        raise ParseError(f"header field {key} must be an integer", row=0) from None


def design_from_text(text: str) -> DesignMatrix:
    head, rows = _body(text)
    fields = _parse_header(head, "scod", ("n", "k", "scale_num"))
    n, k, scale_num = (_int_field(fields, f) for f in ("n", "k", "scale_num"))
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}")
    grid = []
    for i, line in enumerate(rows):
        cells = _tokens(line)
        if len(cells) != n:
            raise ParseError(f"expected {n} cells, found {len(cells)}", row=i)
        row = []
        for j, c in enumerate(cells):
            try:
                e = parse_entry(c)
            except ParseError as exc:
                raise ParseError(str(exc), row=i, col=j) from None
            if e.max_var() > k:
                raise ParseError(f"variable in {c!r} exceeds k={k}", row=i, col=j)
            row.append(e)
        grid.append(row)
    return DesignMatrix(grid, k, scale_num)


def design_to_json(design: DesignMatrix) -> str:
    doc: dict[str, Any] = {
        "format": "rzcod-design",
        "n": design.n,
        "k": design.k,
        "scale_num": design.scale_num,
        "entries": [
            [[[render_coeff(t.coeff), t.var, t.conj] for t in e.terms] for e in row] for row in design.entries
        ],
    }
    return json.dumps(doc, separators=(",", ":")) + "\n"


def design_from_json(text: str) -> DesignMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", row=exc.lineno) from None
    if not isinstance(doc, dict) or doc.get("format") != "rzcod-design":
        raise ParseError("not an rzcod-design document")
    try:
        n, k, scale_num = int(doc["n"]), int(doc["k"]), int(doc["scale_num"])
        rows = doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad document fields: {exc}") from None
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}")
    grid = []
    for i, row in enumerate(rows):
        if len(row) != n:
            raise ParseError(f"expected {n} cells, found {len(row)}", row=i)
        out = []
        for j, cell in enumerate(row):
            try:
                terms = tuple(SymbolicTerm(parse_coeff(c), int(v), bool(cj)) for c, v, cj in cell)
            except (ValueError, TypeError) as exc:
                raise ParseError(f"bad entry: {exc}", row=i, col=j) from None
            e = Entry(terms)
            if e.max_var() > k:
                raise ParseError(f"variable exceeds k={k}", row=i, col=j)
            out.append(e)
        grid.append(out)
    return DesignMatrix(grid, k, scale_num)


def signed_to_text(m: SignedMatrix) -> str:
    header = f"# signed n={m.n} scale_num={m.scale_num} scale={scale_text(m.scale_num)}"
    return header + "\n" + _align([[str(v) for v in row] for row in m.entries.tolist()]) + "\n"


def signed_from_text(text: str) -> SignedMatrix:
    head, rows = _body(text)
    fields = _parse_header(head, "signed", ("n",))
    n = _int_field(fields, "n")
    scale_num = _int_field(fields, "scale_num") if "scale_num" in fields else 0
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}")
    grid = []
    for i, line in enumerate(rows):
        cells = line.split()
        if len(cells) != n:
            raise ParseError(f"expected {n} cells, found {len(cells)}", row=i)
        row = []
        for j, c in enumerate(cells):
            if c not in ("-1", "0", "1"):
                raise ParseError(f"signed entry must be -1, 0 or 1, got {c!r}", row=i, col=j)
            row.append(int(c))
        grid.append(row)
    return SignedMatrix(grid, scale_num)


def load_design(text: str) -> DesignMatrix:
    """Parse either format, sniffing JSON by its leading brace."""
    if text.lstrip().startswith("{"):
        return design_from_json(text)
    return design_from_text(text)


def render_gram(form: GramForm) -> str:
    """E.g. ``(1/1+0/1 j) x1 x1* + (-1/1+0/1 j) x1* x2``; ``0`` for the zero form."""
    if form.is_zero:
        return "0"

    def var(key: tuple[int, bool]) -> str:
        return f"x{key[0]}{'*' if key[1] else ''}"

    return " + ".join(f"{render_coeff(c)} {var(u)} {var(v)}" for (u, v), c in form.terms)
