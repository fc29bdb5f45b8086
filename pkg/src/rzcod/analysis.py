"""Code metrics: zero fraction, PAPR, zero-transmission probability and signaling complexity."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .combinatorics import compute_ma, order_d, span_s
from .design import DesignMatrix

__all__ = [
    "CodeMetrics",
    "SignalingReport",
    "SIGNALING_CLASSES",
    "zero_fraction",
    "zero_fraction_formula",
    "papr_flat_qam",
    "papr_per_antenna",
    "signaling_complexity",
    "design_metrics",
    "support_offsets",
    "metrics_table",
    "table_i",
    "table_ii",
    "TABLE_I",
    "TABLE_II",
    "TABLE_III",
    "QAM16_PEAK_FACTOR",
    "render_fraction",
    "metrics_to_text",
    "metrics_to_json",
    "measure_papr",
]

SIGNALING_CLASSES = ("restricted-unit", "quarter-phase", "linear-combination")


@dataclass(frozen=True)
class CodeMetrics:
    family: str
    a: int
    n: int
    k: int
    rate: Fraction
    zero_fraction: Fraction
    papr_qam_ratio: Fraction
    p_zero: Fraction
    signaling_class: str


@dataclass(frozen=True)
class SignalingReport:
    levels: np.ndarray  # per-entry quantization level counts (object dtype, exact ints)
    max_levels: int
    signaling_class: str


def zero_fraction(design: DesignMatrix) -> Fraction:
    mask = design.nonzero_mask()
    return Fraction(int(mask.size - mask.sum()), int(mask.size))


def zero_fraction_formula(a: int, family: str) -> Fraction:
    """Closed forms: ``1 - (a+1)/2^a`` for ``G_a``, ``1 - (a+1) 2^(a-d)/2^a`` for ``H_a``."""
    if family == "g":
        return 1 - Fraction(a + 1, 1 << a)
    if family == "h":
        return 1 - Fraction((a + 1) << (a - order_d(a)), 1 << a)
    raise ValueError(f"unknown family {family!r}")


def papr_per_antenna(design: DesignMatrix) -> list[Fraction]:
    """Peak over time-averaged power for each antenna (column), all non-zero symbols of equal power."""
    counts = design.nonzero_mask().sum(axis=0)
    return [Fraction(design.n, int(c)) if c else Fraction(0) for c in counts]


def papr_flat_qam(design: DesignMatrix) -> Fraction:
    """Single PAPR value for a design whose rows and columns all carry the same number of symbols."""
    mask = design.nonzero_mask()
    rows, cols = mask.sum(axis=1), mask.sum(axis=0)
    if rows.min() != rows.max() or cols.min() != cols.max():
        raise ValueError("non-uniform support; use papr_per_antenna for per-antenna values")
    return Fraction(design.n, int(cols[0]))


def signaling_complexity(design: DesignMatrix, constellation_size: int) -> SignalingReport:
    """Quantization levels per entry for an ``M``-point constellation.

    A zero needs one level, a single (possibly scaled) variable needs ``M``,
    and a combination touching ``t`` distinct variables needs ``M**t``.
    """
    m = int(constellation_size)
    if m < 2:
        raise ValueError("constellation size must be at least 2")
    levels = np.empty((design.n, design.n), dtype=object)
    cls = 0
    arrays = design.restricted_arrays()
    if arrays is not None:
        slots, phases = arrays
        levels[:] = 1
        levels[slots >= 0] = m
        if np.any((phases & 1).astype(bool) & (slots >= 0)):
            cls = 1
        return SignalingReport(levels, m if (slots >= 0).any() else 1, SIGNALING_CLASSES[cls])
    for i, row in enumerate(design.entries):
        for j, e in enumerate(row):
            levels[i, j] = m ** len(e.variables) if not e.is_zero else 1
            if e.is_zero:
                continue
            u = e.unit_form
            if u is None:
                cls = 2
            elif u[2] & 1:
                cls = max(cls, 1)
    return SignalingReport(levels, int(levels.max()), SIGNALING_CLASSES[cls])


def design_metrics(design: DesignMatrix, family: str = "", a: int = 0, constellation_size: int = 4) -> CodeMetrics:
    fz = zero_fraction(design)
    return CodeMetrics(
        family=family,
        a=a,
        n=design.n,
        k=design.k,
        rate=design.rate,
        zero_fraction=fz,
        papr_qam_ratio=papr_flat_qam(design),
        p_zero=fz,
        signaling_class=signaling_complexity(design, constellation_size).signaling_class,
    )


def support_offsets(a: int, family: str) -> frozenset[int]:
    """XOR offsets ``T`` with row ``i`` supported on ``{i ^ t : t in T}``.

    ``G_a`` rows use ``E = {0} u {2^j}``; rows of ``H_a`` combine the rows
    ``i ^ s`` for ``s`` in the span, giving the sumset ``S ^ E``.  This
    lets the tables reach ``a = 16`` without materializing any matrix.
    """
    e = {0} | {1 << j for j in range(a)}
    if family == "g":
        return frozenset(e)
    if family == "h":
        return frozenset(s ^ t for s in span_s(a) for t in e)
    raise ValueError(f"unknown family {family!r}")


def metrics_table(a_range: Iterable[int], families: Sequence[str] = ("g", "h")) -> list[CodeMetrics]:
    """Metrics of ``G_a``/``H_a`` from their row-support structure (``1 <= a <= 16``)."""
    out = []
    for a in a_range:
        if not 1 <= a <= 16:
            raise ValueError(f"a={a} outside 1..16")
        n = 1 << a
        for fam in families:
            w = len(support_offsets(a, fam))
            fz = 1 - Fraction(w, n)
            out.append(CodeMetrics(fam, a, n, a + 1, Fraction(a + 1, n), fz, Fraction(n, w), fz, "restricted-unit"))
    return out


# Reference values as printed, used by the self-check and the tests.
TABLE_I = {
    3: ((3,), (7,), 2),
    4: ((3,), (7,), 3),
    5: ((3, 5), (7, 25), 3),
    6: ((3, 5, 6), (7, 25, 42), 3),
    7: ((3, 5, 6, 7), (7, 25, 42, 75), 3),
    8: ((3, 5, 6, 7), (7, 25, 42, 75), 4),
    9: ((3, 5, 6, 7, 9), (7, 25, 42, 75, 385), 4),
}

# (antennas, constellation) -> ((PAPR G, P0 G), (PAPR H, P0 H)); two-decimal values as printed
TABLE_II = {
    (16, "QPSK"): ((3.2, 0.6875), (1.6, 0.375)),
    (16, "16QAM"): ((11.52, 0.6875), (5.76, 0.375)),
    (32, "QPSK"): ((5.33, 0.8125), (1.33, 0.25)),
    (32, "16QAM"): ((19.2, 0.8125), (4.8, 0.25)),
}

TABLE_III = {
    a: (fh, fg)
    for a, fh, fg in [
        (3, Fraction(0), Fraction(1, 2)),
        (4, Fraction(3, 8), Fraction(11, 16)),
        (5, Fraction(2, 8), Fraction(13, 16)),
        (6, Fraction(1, 8), Fraction(57, 64)),
        (7, Fraction(0), Fraction(120, 128)),
        (8, Fraction(7, 16), Fraction(247, 256)),
        (9, Fraction(6, 16), Fraction(502, 512)),
        (10, Fraction(5, 16), Fraction(1013, 1024)),
        (11, Fraction(4, 16), Fraction(2036, 2048)),
        (12, Fraction(3, 16), Fraction(4083, 4096)),
        (13, Fraction(2, 16), Fraction(8178, 8192)),
        (14, Fraction(1, 16), Fraction(16369, 16384)),
        (15, Fraction(0), Fraction(32752, 32768)),
        (16, Fraction(15, 32), Fraction(65519, 65536)),
    ]
}


def table_i(a_range: Iterable[int] = range(3, 10)) -> dict[int, tuple[tuple[int, ...], tuple[int, ...], int]]:
    return {a: (compute_ma(a).m_a, compute_ma(a).m_a_prime, compute_ma(a).d) for a in a_range}


QAM16_PEAK_FACTOR = Fraction(9, 5)  # corner energy of unit-average 16-QAM


def table_ii() -> dict[tuple[int, str], tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]]:
    """Per-antenna PAPR and P0 for 16 and 32 antennas.

    QPSK is constant-modulus, so PAPR is ``n / (non-zero slots per antenna)``.
    For 16-QAM the value here is that figure times the constellation's own
    peak-to-average factor 9/5; other peak conventions scale G and H alike,
    so only the G/H ratio is convention-free.
    """
    out = {}
    for a in (4, 5):
        g, h = metrics_table([a])
        for const, factor in (("QPSK", Fraction(1)), ("16QAM", QAM16_PEAK_FACTOR)):
            out[(1 << a, const)] = ((g.papr_qam_ratio * factor, g.p_zero), (h.papr_qam_ratio * factor, h.p_zero))
    return out


def render_fraction(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def metrics_to_text(rows: Sequence[CodeMetrics]) -> str:
    header = ["family", "a", "n", "k", "rate", "zero_fraction", "papr", "p_zero", "class"]
    cells = [header] + [
        [r.family, str(r.a), str(r.n), str(r.k), render_fraction(r.rate), render_fraction(r.zero_fraction),
         render_fraction(r.papr_qam_ratio), render_fraction(r.p_zero), r.signaling_class]
        for r in rows
    ]
    widths = [max(len(c[j]) for c in cells) for j in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells) + "\n"


def metrics_to_json(rows: Sequence[CodeMetrics]) -> str:
    recs = []
    for r in rows:
        d = asdict(r)
        for key, val in d.items():
            if isinstance(val, Fraction):
                d[key] = render_fraction(val)
        recs.append(d)
    return json.dumps(recs, indent=1) + "\n"


def measure_papr(
    design: DesignMatrix, points: np.ndarray, codewords: int = 2000, seed: int = 0
) -> np.ndarray:
    """Empirical per-antenna PAPR over random codewords.

    Peak is the largest instantaneous power seen on the antenna; average is
    the mean over all transmitted slots, zeros included.
    """
    from .design import evaluate

    rng = np.random.default_rng(seed)
    pts = np.asarray(points, dtype=complex)
    peak = np.zeros(design.n)
    total = np.zeros(design.n)
    for _ in range(codewords):
        x = evaluate(design, pts[rng.integers(0, pts.size, design.k)])
        p = np.abs(x) ** 2
        peak = np.maximum(peak, p.max(axis=0))
        total += p.sum(axis=0)
    return peak / (total / (codewords * design.n))
