"""Exterior complex scaling and 1D discretization of the dilated operator.

The contour is flat on [-R0, R0], joins the rotated ray e^{i theta} R
at |x| = 2R0 through a C^2 quintic blend, and the operator
-h^2 (1/g) d/dx ((1/g) d/dx) + V(x + i f(x)) - E0,  g = 1 + i f'(x),
is discretized in the expanded form u''/g^2 - (i f''/g^3) u' with
fourth-order five-point stencils and Dirichlet ends (boundary values
eliminated; the matrix acts on interior nodes).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadAngle, GridTooCoarse

# C^2 monotone quintic with h(0)=h'(0)=h''(0)=0, h(1)=2, h'(1)=1, h''(1)=0:
# the blend that leaves the flat zone at R0 and lands on the ray at 2R0.
_BLEND = np.array([16.0, -23.0, 9.0])  # coefficients of s^3, s^4, s^5


def _blend_h(s):
    return s**3 * (_BLEND[0] + s * (_BLEND[1] + s * _BLEND[2]))


def _blend_hp(s):
    return s**2 * (3 * _BLEND[0] + s * (4 * _BLEND[1] + 5 * s * _BLEND[2]))


def _blend_hpp(s):
    return s * (6 * _BLEND[0] + s * (12 * _BLEND[1] + 20 * s * _BLEND[2]))


@dataclass(frozen=True)
class ScalingContour:
    """Deformation x -> x + i f(x) with f = 0 inside R0 and f = x tan(theta) beyond 2R0."""

    theta: float
    R0: float

    def _pieces(self, x):
        x = np.asarray(x, float)
        ax = np.abs(x)
        s = np.clip((ax - self.R0) / self.R0, 0.0, 1.0)
        return x, ax, s

    def f(self, x):
        x, ax, s = self._pieces(x)
        t = np.tan(self.theta)
        mid = t * np.sign(x) * self.R0 * _blend_h(s)
        return np.where(ax >= 2 * self.R0, t * x, np.where(ax <= self.R0, 0.0, mid))

    def fp(self, x):
        x, ax, s = self._pieces(x)
        t = np.tan(self.theta)
        mid = t * _blend_hp(s)
        return np.where(ax >= 2 * self.R0, t, np.where(ax <= self.R0, 0.0, mid))

    def fpp(self, x):
        x, ax, s = self._pieces(x)
        t = np.tan(self.theta)
        mid = t * np.sign(x) * _blend_hpp(s) / self.R0
        return np.where((ax >= 2 * self.R0) | (ax <= self.R0), 0.0, mid)

    def point(self, x):
        return np.asarray(x, float) + 1j * self.f(x)


def build_contour(theta: float, R0: float) -> ScalingContour:
    if not (0.0 <= theta <= np.pi / 4):
        raise BadAngle(f"theta = {theta} outside [0, pi/4]")
    if R0 <= 0:
        raise BadAngle("R0 must be positive")
    return ScalingContour(theta=float(theta), R0=float(R0))


@dataclass(frozen=True)
class Grid1D:
    """Interior nodes of a Dirichlet box [x_min, x_max] with n unknowns."""

    x_min: float
    x_max: float
    n: int

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / (self.n + 1)

    @property
    def nodes(self):
        return np.linspace(self.x_min, self.x_max, self.n + 2)[1:-1]

    def to_dict(self):
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n}


def suggested_box(contour: ScalingContour, h: float, decay: float = 10.0) -> float:
    """Half-width L making the scaled free wave at k = 1/h drop by e^-decay."""
    t = max(np.tan(contour.theta), 1e-9)
    return float(max(2 * contour.R0, decay * h / t + contour.R0))


@dataclass(frozen=True)
class ScaledOperator:
    grid: Grid1D
    h: float
    matrix: np.ndarray
    contour: ScalingContour
    boundary: str = "dirichlet"

    def export(self, path_prefix):
        """Row-major little-endian complex128 binary plus a JSON header."""
        mat = np.ascontiguousarray(self.matrix.astype(np.complex128))
        if mat.dtype.byteorder == ">":
            mat = mat.byteswap().view(mat.dtype.newbyteorder("<"))
        with open(f"{path_prefix}.bin", "wb") as fh:
            fh.write(mat.tobytes(order="C"))
        header = {
            "N": self.grid.n,
            "h": self.h,
            "theta": self.contour.theta,
            "grid": self.grid.to_dict(),
            "dtype": "complex128-little-endian",
            "layout": "row-major",
        }
        with open(f"{path_prefix}.json", "w") as fh:
            json.dump(header, fh, indent=2)


# fourth-order five-point stencils (offsets -2..2)
_D2_W = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D1_W = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0


def _banded(weights, n, scale):
    m = np.zeros((n, n))
    for off, w in zip(range(-2, 3), weights):
        if w == 0.0:
            continue
        d = np.full(n - abs(off), w * scale)
        m += np.diag(d, off)
    return m


def assemble(model, contour: ScalingContour, grid: Grid1D, h: float) -> ScaledOperator:
    """Discretize the dilated operator on the grid.

    Requires the box to contain the full transition region (|x| up to
    2 R0 on both sides) and a spacing no coarser than h/4.
    """
    if model.dim != 1:
        raise ValueError("scaled operators are assembled in one dimension only")
    if grid.n < 200:
        raise ValueError("need at least 200 grid nodes")
    if min(grid.x_max, -grid.x_min) < 2 * contour.R0 - 1e-12:
        raise ValueError("grid must extend past the transition region |x| <= 2 R0")
    dx = grid.spacing
    if dx > h / 4:
        raise GridTooCoarse(f"spacing {dx:.3g} exceeds h/4 = {h / 4:.3g}")

    x = grid.nodes
    real_case = contour.theta == 0.0
    if real_case:
        w = model.potential.value(x) - model.energy_shift
        a = _banded(_D2_W, grid.n, -(h**2) / dx**2)
        a[np.arange(grid.n), np.arange(grid.n)] += w
        return ScaledOperator(grid=grid, h=h, matrix=a, contour=contour)

    fp = contour.fp(x)
    fpp = contour.fpp(x)
    g = 1.0 + 1j * fp
    z = contour.point(x)
    w = model.potential.value_complex(z) - model.energy_shift

    d2 = _banded(_D2_W, grid.n, 1.0 / dx**2).astype(complex)
    d1 = _banded(_D1_W, grid.n, 1.0 / dx).astype(complex)
    a = -(h**2) * ((1.0 / g**2)[:, None] * d2 - (1j * fpp / g**3)[:, None] * d1)
    a[np.arange(grid.n), np.arange(grid.n)] += w
    return ScaledOperator(grid=grid, h=h, matrix=a, contour=contour)


def scaled_symbol(model, contour: ScalingContour, x, xi):
    """p_theta(x, xi) = xi^2 / (1 + i f'(x))^2 + V(x + i f(x)) - E0."""
    x = np.asarray(x, float)
    xi = np.asarray(xi, float)
    g = 1.0 + 1j * contour.fp(x)
    v = model.potential.value_complex(contour.point(x))
    return xi**2 / g**2 + v - model.energy_shift


def symbol_scan(model, contour, x_range, xi_range, p_window, nx=200, nxi=200, x_floor=None):
    """Minimum of -Im p_theta over {|p| <= p_window, |x| >= x_floor}.

    x_floor defaults to the ray region 2 R0 where the dilation estimate
    is clean; returns (min value, ratio to theta).
    """
    if x_floor is None:
        x_floor = 2 * contour.R0
    xs = np.linspace(*x_range, nx)
    xis = np.linspace(*xi_range, nxi)
    X, XI = np.meshgrid(xs, xis, indexing="ij")
    xf, xif = X.ravel(), XI.ravel()
    p = xif**2 + model.potential.value(xf) - model.energy_shift
    mask = (np.abs(p) <= p_window) & (np.abs(xf) >= x_floor)
    if not np.any(mask):
        return np.nan, np.nan
    vals = -np.imag(scaled_symbol(model, contour, xf[mask], xif[mask]))
    lo = float(np.min(vals))
    return lo, lo / contour.theta if contour.theta > 0 else np.inf
