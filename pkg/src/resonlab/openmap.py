"""Three-branch open baker map: block-DFT quantization and modulus counting.

Phase convention: F_m[j, l] = exp(-2 pi i j l / m) / sqrt(m) (plain DFT,
no half-integer offsets).  The propagator on C^{3N} is
A = F_{3N}^* . blockdiag(F_N, Z, F_N) with Z = 0 (middle branch opened)
or Z = F_N for the closed, unitary control variant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, SizeOverflow


def dft_matrix(m: int) -> np.ndarray:
    j = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(j, j) / m) / np.sqrt(m)


@dataclass(frozen=True)
class OpenMapMatrix:
    branch_size: int  # N = 3^k
    matrix: np.ndarray  # 3N x 3N
    opened: bool

    @property
    def size(self):
        return 3 * self.branch_size


def build_open_map(k: int, opened: bool = True) -> OpenMapMatrix:
    """Quantized baker propagator at size 3N = 3^(k+1)."""
    if not 1 <= k <= 7:
        raise SizeOverflow(f"k = {k} outside the desk-scale range 1..7")
    n = 3**k
    f_big = dft_matrix(3 * n)
    f_small = dft_matrix(n)
    blocks = np.zeros((3 * n, 3 * n), dtype=complex)
    blocks[:n, :n] = f_small
    if not opened:
        blocks[n : 2 * n, n : 2 * n] = f_small
    blocks[2 * n :, 2 * n :] = f_small
    return OpenMapMatrix(branch_size=n, matrix=f_big.conj().T @ blocks, opened=opened)


def open_map_spectrum(map_: OpenMapMatrix) -> np.ndarray:
    """All 3N eigenvalues, deterministic (Re, Im) ordering.

    For the opened map the middle N columns vanish, so the nonzero
    spectrum equals that of the 2N x 2N compression onto the kept
    branches; the remaining N eigenvalues are exact zeros.
    """
    a = map_.matrix
    n = map_.branch_size
    if map_.opened:
        kept = np.r_[0:n, 2 * n : 3 * n]
        # spec(XY) \ {0} = spec(YX) \ {0} with the zero columns removed
        small = a[np.ix_(kept, kept)]
        vals = np.concatenate([np.linalg.eigvals(small), np.zeros(n, complex)])
    else:
        vals = np.linalg.eigvals(a)
    order = np.lexsort((vals.imag, vals.real))
    return vals[order]


@dataclass(frozen=True)
class ModulusCounting:
    """n(N, r) = #{eigenvalues with |lambda| >= r} along an r ladder."""

    branch_size: int
    radii: np.ndarray
    counts: np.ndarray
    opened: bool

    def to_rows(self):
        k = int(round(np.log(self.branch_size) / np.log(3)))
        return [(k, self.branch_size, float(r), int(c)) for r, c in zip(self.radii, self.counts)]


def count_moduli(map_or_spectrum, r_ladder, branch_size=None, opened=True) -> ModulusCounting:
    if isinstance(map_or_spectrum, OpenMapMatrix):
        spectrum = open_map_spectrum(map_or_spectrum)
        branch_size = map_or_spectrum.branch_size
        opened = map_or_spectrum.opened
    else:
        spectrum = np.asarray(map_or_spectrum)
        if branch_size is None:
            branch_size = len(spectrum) // 3
    radii = np.asarray(r_ladder, float)
    if np.any((radii <= 0.0) | (radii >= 1.0)):
        raise ValueError("r ladder must lie inside (0, 1)")
    moduli = np.abs(spectrum)
    counts = np.array([int(np.sum(moduli >= r)) for r in radii])
    return ModulusCounting(branch_size=branch_size, radii=radii, counts=counts, opened=opened)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    r: float


def fit_weyl_exponent(countings, r: float) -> ExponentFit:
    """Slope of log n(N, r) vs log N across map sizes at fixed r."""
    xs, ys = [], []
    for c in countings:
        match = np.where(np.isclose(c.radii, r))[0]
        if len(match) == 0:
            continue
        count = c.counts[match[0]]
        if count > 0:
            xs.append(np.log(c.branch_size))
            ys.append(np.log(count))
    if len(xs) < 2:
        raise DegenerateFit("need counts at >= 2 map sizes to fit an exponent")
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss == 0 else 1.0 - float(np.sum(resid**2)) / ss
    return ExponentFit(slope=float(slope), intercept=float(intercept), r2=r2, r=r)
