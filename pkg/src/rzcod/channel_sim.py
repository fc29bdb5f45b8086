"""Monte Carlo symbol-error-rate simulation over quasi-static Rayleigh fading.

Conventions: a codeword is ``n x n`` with row = time slot and column =
transmit antenna.  The receiver sees ``Y = rho * X @ Hc + N`` where ``Hc`` is
``n_tx x n_rx`` with i.i.d. CN(0, 1) entries held for one codeword and ``N``
has i.i.d. CN(0, sigma^2) entries, ``sigma^2 = 10^(-snr_db/10)``.

Power modes fix ``rho``:

* ``average``: expected transmit energy per channel use is 1, so
  ``rho = 1/sqrt(k)`` for any SCOD (unit-energy constellation).
* ``peak``: the largest instantaneous per-antenna power (constellation
  peak times the design's largest entry gain) equals ``peak_energy / n``,
  the level a zero-free constant-modulus design reaches under the average
  rule.  Designs with many zeros must back off, which costs SNR.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .design import DesignMatrix, dispersion_matrices

__all__ = [
    "Constellation",
    "QPSK",
    "QAM16",
    "constellation",
    "SimConfig",
    "SerEstimate",
    "encode",
    "power_scale",
    "normalize_power",
    "ml_detect",
    "joint_ml_detect",
    "run_campaign",
    "snr_at_ser",
    "curves_overlap",
    "ci95",
]


@dataclass(frozen=True)
class Constellation:
    name: str
    points: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def peak_energy(self) -> float:
        return float(np.max(np.abs(self.points) ** 2))

    def nearest(self, z: np.ndarray) -> np.ndarray:
        """Index of the closest point for every element of ``z``."""
        d = np.abs(z[..., None] - self.points) ** 2
        return np.argmin(d, axis=-1)


def _qpsk() -> Constellation:
    pts = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / math.sqrt(2)
    return Constellation("QPSK", pts)


def _qam16() -> Constellation:
    levels = np.array([-3, -1, 1, 3])
    pts = (levels[:, None] + 1j * levels[None, :]).ravel() / math.sqrt(10)
    return Constellation("QAM16", pts)


QPSK = _qpsk()
QAM16 = _qam16()
_BY_NAME = {"QPSK": QPSK, "QAM16": QAM16, "16QAM": QAM16}


def constellation(name: str) -> Constellation:
    try:
        return _BY_NAME[name.upper()]
    except KeyError:
        raise ValueError(f"unknown constellation {name!r}; expected QPSK or QAM16") from None


@dataclass(frozen=True)
class SimConfig:
    design: DesignMatrix
    constellation: Constellation
    snr_db_grid: tuple[float, ...]
    power_mode: str = "average"
    rx_antennas: int = 1
    trials_per_point: int = 200_000  # codeword ceiling per SNR point
    rng_seed: int = 0
    target_errors: int = 200
    batch_size: int = 2000
    stream: int = 0  # distinct streams give independent runs; equal streams share random numbers
    design_id: str = ""

    def __post_init__(self) -> None:
        grid = tuple(float(s) for s in self.snr_db_grid)
        object.__setattr__(self, "snr_db_grid", grid)
        if self.power_mode not in ("average", "peak"):
            raise ValueError(f"power_mode must be 'average' or 'peak', got {self.power_mode!r}")
        if self.rx_antennas < 1 or self.trials_per_point < 1 or self.batch_size < 1:
            raise ValueError("rx_antennas, trials_per_point and batch_size must be positive")
        if self.target_errors < 1:
            raise ValueError("target_errors must be positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("snr grid must be strictly increasing")


@dataclass(frozen=True)
class SerEstimate:
    snr_db: float
    ser: float
    symbol_errors: int
    symbols_sent: int
    ci95_halfwidth: float


def ci95(errors: int, sent: int) -> float:
    """Normal-approximation 95% half-width of a binomial proportion."""
    if sent == 0:
        return float("nan")
    p = errors / sent
    return 1.96 * math.sqrt(p * (1 - p) / sent)


def encode(design: DesignMatrix, symbols: np.ndarray) -> np.ndarray:
    """Codeword(s) for one symbol vector ``(k,)`` or a batch ``(b, k)``."""
    s = np.asarray(symbols, dtype=complex)
    if s.shape[-1] != design.k:
        raise ValueError(f"expected {design.k} symbols, got {s.shape[-1]}")
    a, b = dispersion_matrices(design)
    return np.einsum("knm,...k->...nm", a, s) + np.einsum("knm,...k->...nm", b, s.conj())


def _peak_gain(design: DesignMatrix) -> float:
    # largest |entry| per unit-modulus symbols; exact for single-term entries
    a, b = dispersion_matrices(design)
    return float(np.max(np.abs(a).sum(axis=0) + np.abs(b).sum(axis=0)))


def power_scale(design: DesignMatrix, const: Constellation, power_mode: str) -> float:
    """Amplitude ``rho`` applied to encoded codewords."""
    if power_mode == "average":
        return 1.0 / math.sqrt(design.k)
    if power_mode == "peak":
        cap = const.peak_energy / design.n
        return math.sqrt(cap / const.peak_energy) / _peak_gain(design)
    raise ValueError(f"unknown power mode {power_mode!r}")


def normalize_power(codeword: np.ndarray, design: DesignMatrix, const: Constellation, power_mode: str) -> np.ndarray:
    return power_scale(design, const, power_mode) * codeword


def _matched(design_disp, y: np.ndarray, h: np.ndarray) -> np.ndarray:
    a, b = design_disp
    ah = np.einsum("ktj,...jr->...ktr", a, h)
    bh = np.einsum("ktj,...jr->...ktr", b, h)
    yc = y.conj()
    return np.einsum("...tr,...ktr->...k", yc, ah) + np.einsum("...tr,...ktr->...k", yc, bh).conj()


def ml_detect(
    design: DesignMatrix,
    received: np.ndarray,
    channel: np.ndarray,
    const: Constellation,
    rho: float = 1.0,
    disp=None,
) -> np.ndarray:
    """Symbol-by-symbol ML decisions (indices into ``const.points``).

    Valid for any SCOD: the joint metric separates into one quadratic per
    symbol, minimized at the point closest to ``conj(c_k) / (rho ||Hc||^2)``.
    Accepts single blocks or batches with a leading axis.
    """
    disp = dispersion_matrices(design) if disp is None else disp
    c = _matched(disp, received, channel)
    energy = np.sum(np.abs(channel) ** 2, axis=(-2, -1))[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(energy > 0, c.conj() / (rho * energy), 0)
    return const.nearest(z)


def joint_ml_detect(
    design: DesignMatrix, received: np.ndarray, channel: np.ndarray, const: Constellation, rho: float = 1.0
) -> np.ndarray:
    """Exhaustive ML over all ``M^k`` symbol vectors (oracle for small designs)."""
    idx = np.array(list(product(range(const.size), repeat=design.k)))
    cands = encode(design, const.points[idx]) * rho  # (M^k, n, n)
    pred = np.einsum("cnm,...mr->...cnr", cands, channel)
    metric = np.sum(np.abs(received[..., None, :, :] - pred) ** 2, axis=(-2, -1))
    return idx[np.argmin(metric, axis=-1)]


def _rng(seed: int, stream: int, point: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, point, batch)))


def _run_point(cfg: SimConfig, disp, rho: float, point: int) -> SerEstimate:
    snr = cfg.snr_db_grid[point]
    sigma = math.sqrt(10 ** (-snr / 10))
    n, k, r, m = cfg.design.n, cfg.design.k, cfg.rx_antennas, cfg.constellation.size
    errors = sent = codewords = 0
    batch = 0
    while errors < cfg.target_errors and codewords < cfg.trials_per_point:
        bs = min(cfg.batch_size, cfg.trials_per_point - codewords)
        rng = _rng(cfg.rng_seed, cfg.stream, point, batch)
        sym = rng.integers(0, m, size=(bs, k))
        hc = (rng.standard_normal((bs, n, r)) + 1j * rng.standard_normal((bs, n, r))) / math.sqrt(2)
        noise = (rng.standard_normal((bs, n, r)) + 1j * rng.standard_normal((bs, n, r))) * (sigma / math.sqrt(2))
        a, b = disp
        s = cfg.constellation.points[sym]
        x = np.einsum("knm,bk->bnm", a, s) + np.einsum("knm,bk->bnm", b, s.conj())
        y = rho * np.einsum("bnm,bmr->bnr", x, hc) + noise
        det = ml_detect(cfg.design, y, hc, cfg.constellation, rho, disp)
        errors += int(np.count_nonzero(det != sym))
        sent += bs * k
        codewords += bs
        batch += 1
    return SerEstimate(snr, errors / sent, errors, sent, ci95(errors, sent))


def run_campaign(cfg: SimConfig, workers: int = 1) -> list[SerEstimate]:
    """SER at every grid point; bit-identical for a given seed whatever ``workers`` is."""
    disp = dispersion_matrices(cfg.design)
    rho = power_scale(cfg.design, cfg.constellation, cfg.power_mode)
    points = range(len(cfg.snr_db_grid))
    if workers <= 1:
        return [_run_point(cfg, disp, rho, p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: _run_point(cfg, disp, rho, p), points))


def snr_at_ser(curve: Sequence[SerEstimate], target: float) -> float:
    """SNR where the curve crosses ``target``, interpolating ``log10(SER)`` linearly in dB."""
    pts = [(e.snr_db, e.ser) for e in curve]
    for (s0, p0), (s1, p1) in zip(pts, pts[1:]):
        if p0 >= target > p1:
            if p1 <= 0:
                raise ValueError("crossing falls on a point with zero observed errors")
            t = (math.log10(target) - math.log10(p0)) / (math.log10(p1) - math.log10(p0))
            return s0 + t * (s1 - s0)
    raise ValueError(f"curve does not cross SER {target:g} inside the grid")


def curves_overlap(c1: Sequence[SerEstimate], c2: Sequence[SerEstimate]) -> list[bool]:
    """Per point: do the two 95% intervals intersect?"""
    out = []
    for e1, e2 in zip(c1, c2):
        if e1.snr_db != e2.snr_db:
            raise ValueError("curves use different SNR grids")
        out.append(abs(e1.ser - e2.ser) <= e1.ci95_halfwidth + e2.ci95_halfwidth)
    return out
