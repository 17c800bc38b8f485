"""Eigenvalue counting in shrinking discs and Liouville-measure predictions."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import (
    DegenerateEnergySurface,
    DegenerateFit,
    WindowOutsideComputedRegion,
)


def _values_of(source):
    from .eig import ResonanceSet

    if isinstance(source, ResonanceSet):
        return source.resonances, source.window
    return np.asarray(source), None


def count_in_disc(source, center: float, C: float, h: float) -> int:
    """#{z : |z - center| <= C h}, boundary ties included.

    source may be a ResonanceSet (its window must contain the disc) or a
    plain array of real or complex values.
    """
    values, window = _values_of(source)
    radius = C * h
    if window is not None and not window.contains_disc(complex(center), radius):
        raise WindowOutsideComputedRegion(
            f"disc D({center}, {radius:.3g}) not inside the computed window"
        )
    if len(values) == 0:
        return 0
    return int(np.sum(np.abs(values - center) <= radius))


@dataclass(frozen=True)
class LiouvilleResult:
    value: float
    diverged: bool
    window: tuple


def liouville_measure(model, E: float, x_window=None, periodic_length=None, n_grid=80):
    """Surface measure of {p = E} with dL dp = dx dxi.

    In 1D this is the two-branch integral of dx / (2 |xi|) over the
    classically allowed region; with V of compact support on the line the
    integral diverges, so it is restricted to x_window and flagged.  On a
    circle pass periodic_length instead.  In 2D a midpoint coarea rule
    over a phase-space grid is used.
    """
    n = model.dim
    shift = model.energy_shift
    if n == 1:
        if periodic_length is not None:
            lo, hi = 0.0, periodic_length
            diverged = False
        elif x_window is not None:
            lo, hi = x_window
            diverged = True  # compactly supported V: free branches extend forever
        else:
            raise ValueError("1D measure needs x_window or periodic_length")
        xs = np.linspace(lo, hi, 4001)
        kin = E + shift - model.potential.value(xs.reshape(-1, 1))
        allowed = kin > 0
        if not np.any(allowed):
            raise DegenerateEnergySurface("no classically allowed region in the window")
        grad_ok = np.abs(2 * np.sqrt(kin[allowed])) >= 1e-6
        if not np.all(grad_ok):
            raise DegenerateEnergySurface("dp vanishes on the energy surface")

        def integrand(x):
            k = E + shift - float(model.potential.value(np.array([x])))
            return 1.0 / np.sqrt(k) if k > 0 else 0.0

        val, _ = quad(integrand, lo, hi, limit=400)
        return LiouvilleResult(value=float(val), diverged=diverged, window=(lo, hi))

    if n == 2:
        if x_window is None:
            raise ValueError("2D measure needs x_window (half-width of the box)")
        L = float(x_window)
        xi_max = np.sqrt(max(E + shift, 0.0)) + 1.0
        axes = [np.linspace(-L, L, n_grid)] * 2 + [np.linspace(-xi_max, xi_max, n_grid)] * 2
        mesh = np.meshgrid(*axes, indexing="ij")
        states = np.stack([m.ravel() for m in mesh], axis=1)
        p = model.p_states(states)
        cell = np.prod([a[1] - a[0] for a in axes])
        w = 0.05
        vol = float(np.sum(np.abs(p - E) <= w)) * cell
        return LiouvilleResult(value=vol / (2 * w), diverged=True, window=(-L, L))

    raise ValueError("liouville_measure supports n = 1 or 2")


def circle_spectrum(h: float, n_max: int = None, shift: float = 1.0) -> np.ndarray:
    """Lattice eigenvalues h^2 k^2 - shift of the free circle of length 2 pi."""
    if n_max is None:
        n_max = int(np.ceil(2.5 / h))
    k = np.arange(-n_max, n_max + 1)
    return h**2 * k.astype(float) ** 2 - shift


def harmonic_spectrum(h: float, n_max: int = None, shift: float = 1.0) -> np.ndarray:
    """Oscillator eigenvalues h (2n + 1) - shift."""
    if n_max is None:
        n_max = int(np.ceil(2.0 / h))
    n = np.arange(n_max + 1)
    return h * (2 * n + 1.0) - shift


@dataclass(frozen=True)
class WeylCheckRow:
    h: float
    count: int
    predicted: float
    rel_error: float


@dataclass(frozen=True)
class WeylCheckReport:
    rows: list
    E: float
    C: float

    @property
    def max_rel_error(self):
        return max(r.rel_error for r in self.rows)

    def to_json(self):
        return json.dumps(
            {
                "E": self.E,
                "C": self.C,
                "rows": [
                    {
                        "h": r.h,
                        "count": r.count,
                        "predicted": r.predicted,
                        "rel_error": r.rel_error,
                    }
                    for r in self.rows
                ],
            },
            indent=2,
        )


def check_infinitesimal_weyl(
    spectrum_fn, model, E: float, C: float, h_ladder, measure: float = None, **measure_kw
) -> WeylCheckReport:
    """Compare disc counts with (2 C h / (2 pi h)^n) * Liouville measure.

    spectrum_fn(h) must return the (real) spectrum of the self-adjoint
    operator; the closed-orbit measure-zero hypothesis is the caller's
    responsibility.
    """
    n = model.dim
    if measure is None:
        measure = liouville_measure(model, E, **measure_kw).value
    rows = []
    for h in h_ladder:
        count = count_in_disc(spectrum_fn(h), E, C, h)
        predicted = 2 * C * h / (2 * np.pi * h) ** n * measure
        rel = abs(count - predicted) / max(predicted, 1e-300)
        rows.append(WeylCheckRow(h=float(h), count=count, predicted=predicted, rel_error=rel))
    return WeylCheckReport(rows=rows, E=E, C=C)


@dataclass(frozen=True)
class CountingCurve:
    """Resonance counts N(h) in D(E, C h) along a decreasing h ladder."""

    h_values: np.ndarray
    counts: np.ndarray
    C: float
    E: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h_values, float)
        c = np.asarray(self.counts)
        if np.any(np.diff(h) >= 0):
            raise ValueError("h values must be strictly decreasing")
        if np.any(c < 0):
            raise ValueError("counts must be nonnegative")
        object.__setattr__(self, "h_values", h)
        object.__setattr__(self, "counts", c.astype(int))

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("h,count\n")
            for h, c in zip(self.h_values, self.counts):
                fh.write(f"{h:.17g},{c}\n")


@dataclass(frozen=True)
class WeylFit:
    """Power-law exponent of N(h): slope of log N against log (1/h)."""

    slope: float
    intercept: float
    r2: float
    conclusive: bool

    def to_json(self):
        return json.dumps(
            {
                "nu_hat": self.slope,
                "intercept": self.intercept,
                "r2": self.r2,
                "conclusive": self.conclusive,
            },
            indent=2,
        )


def fit_weyl(curve: CountingCurve) -> WeylFit:
    """Least-squares exponent fit; flagged inconclusive when r2 < 0.8."""
    mask = curve.counts > 0
    if int(np.sum(mask)) < 2:
        raise DegenerateFit("need at least two positive counts")
    x = np.log(1.0 / curve.h_values[mask])
    y = np.log(curve.counts[mask].astype(float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss < 1e-30 else 1.0 - float(np.sum(resid**2)) / ss
    return WeylFit(
        slope=float(slope), intercept=float(intercept), r2=r2, conclusive=bool(r2 >= 0.8)
    )
