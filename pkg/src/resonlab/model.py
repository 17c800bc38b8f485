"""Potentials and classical symbols p = |xi|^2 + V(x) - E0.

Built-in potential kinds are evaluable on real points and, except for
tabulated data, on complex-dilated arguments z = x + i f(x) as required
by exterior scaling.  All evaluation routines are vectorized over a
leading batch axis: positions have shape (n,) or (m, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadParams, UnsupportedContinuation

SUPPORT_TRUNCATION = 1e-14


def _as_batch(x, n):
    """Coerce x to an (m, n) float or complex array; return (array, was_single)."""
    a = np.asarray(x)
    if a.ndim == 0:
        if n != 1:
            raise ValueError(f"scalar position given for dimension {n}")
        return a.reshape(1, 1), True
    if a.ndim == 1:
        if a.shape[0] == n:
            return a.reshape(1, n), True
        if n == 1:
            return a.reshape(-1, 1), False
        raise ValueError(f"position shape {a.shape} incompatible with dimension {n}")
    if a.shape[-1] != n:
        raise ValueError(f"position shape {a.shape} incompatible with dimension {n}")
    return a.reshape(-1, n), False


def _unbatch(values, was_single):
    return values[0] if was_single else values


class Potential:
    """Base class; subclasses implement batched _value/_gradient/_value_complex."""

    kind = "abstract"
    dim = 1
    support_radius = np.inf
    holomorphic = False

    def value(self, x):
        pts, single = _as_batch(x, self.dim)
        if np.iscomplexobj(pts):
            return self.value_complex(x)
        return _unbatch(self._value(pts.astype(float)), single)

    def gradient(self, x):
        pts, single = _as_batch(x, self.dim)
        return _unbatch(self._gradient(pts.astype(float)), single)

    def value_complex(self, z):
        if not self.holomorphic:
            raise UnsupportedContinuation(
                f"{self.kind} potential has no principled complex continuation"
            )
        pts, single = _as_batch(z, self.dim)
        return _unbatch(self._value_complex(pts.astype(complex)), single)

    def _value(self, pts):
        raise NotImplementedError

    def _gradient(self, pts):
        # central differences, used only by kinds without an analytic gradient
        step = 1e-6
        out = np.empty_like(pts)
        for j in range(self.dim):
            dp = pts.copy()
            dm = pts.copy()
            dp[:, j] += step
            dm[:, j] -= step
            out[:, j] = (self._value(dp) - self._value(dm)) / (2 * step)
        return out

    def _value_complex(self, pts):
        raise NotImplementedError


@dataclass(frozen=True)
class GaussianBump(Potential):
    """V(x) = A exp(-|x - c|^2 / w^2); entire in x."""

    amplitude: float
    width: float = 1.0
    center: np.ndarray = field(default_factory=lambda: np.zeros(1))

    kind = "gaussian-bump"
    holomorphic = True

    def __post_init__(self):
        if self.width <= 0:
            raise BadParams("gaussian width must be positive")
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, float)))

    @property
    def dim(self):
        return self.center.shape[0]

    @property
    def support_radius(self):
        # radius where |V| falls below the truncation tolerance
        decay = np.sqrt(np.log(max(abs(self.amplitude), 1.0) / SUPPORT_TRUNCATION))
        return float(np.linalg.norm(self.center) + self.width * decay)

    def _value(self, pts):
        r2 = np.sum((pts - self.center) ** 2, axis=-1)
        return self.amplitude * np.exp(-r2 / self.width**2)

    def _gradient(self, pts):
        d = pts - self.center
        v = self.amplitude * np.exp(-np.sum(d**2, axis=-1) / self.width**2)
        return v[:, None] * (-2.0 * d / self.width**2)

    def _value_complex(self, pts):
        r2 = np.sum((pts - self.center) ** 2, axis=-1)  # sum of squares, not |.|^2
        return self.amplitude * np.exp(-r2 / self.width**2)


@dataclass(frozen=True)
class SumOfBumps(Potential):
    """Sum of Gaussian bumps, V = sum_i A_i exp(-|x - c_i|^2 / w_i^2)."""

    centers: np.ndarray
    amplitudes: np.ndarray
    widths: np.ndarray

    kind = "sum-of-bumps"
    holomorphic = True

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, float))
        a = np.atleast_1d(np.asarray(self.amplitudes, float))
        w = np.atleast_1d(np.asarray(self.widths, float))
        if len(a) != c.shape[0] or len(w) != c.shape[0]:
            raise BadParams("centers, amplitudes, widths must have matching lengths")
        if np.any(w <= 0):
            raise BadParams("bump widths must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "widths", w)

    @property
    def dim(self):
        return self.centers.shape[1]

    @property
    def support_radius(self):
        decay = np.sqrt(np.log(max(np.max(np.abs(self.amplitudes)), 1.0) / SUPPORT_TRUNCATION))
        radii = np.linalg.norm(self.centers, axis=1) + self.widths * decay
        return float(np.max(radii))

    def _terms(self, pts):
        d = pts[:, None, :] - self.centers[None, :, :]
        r2 = np.sum(d**2, axis=-1)
        return d, self.amplitudes * np.exp(-r2 / self.widths**2)

    def _value(self, pts):
        return self._terms(pts)[1].sum(axis=1)

    def _gradient(self, pts):
        d, terms = self._terms(pts)
        return np.sum(terms[:, :, None] * (-2.0 * d / self.widths[None, :, None] ** 2), axis=1)

    def _value_complex(self, pts):
        d = pts[:, None, :] - self.centers[None, :, :]
        r2 = np.sum(d**2, axis=-1)
        return (self.amplitudes * np.exp(-r2 / self.widths**2)).sum(axis=1)


@dataclass(frozen=True)
class SquareBarrier(Potential):
    """V = V0 on the open interval (a, b), zero elsewhere (1D)."""

    a: float
    b: float
    height: float

    kind = "square-barrier"
    dim = 1
    holomorphic = True  # continuation defined off the support only

    def __post_init__(self):
        if not self.a < self.b:
            raise BadParams("square barrier needs a < b")

    @property
    def support_radius(self):
        return float(max(abs(self.a), abs(self.b)))

    def _value(self, pts):
        x = pts[:, 0]
        return np.where((x > self.a) & (x < self.b), self.height, 0.0)

    def _gradient(self, pts):
        return np.zeros_like(pts)

    def _value_complex(self, pts):
        # The jump cannot be continued; off the support the extension is 0,
        # which is all exterior scaling ever evaluates.
        z = pts[:, 0]
        inside = (z.real > self.a) & (z.real < self.b)
        if np.any(inside & (np.abs(z.imag) > 0)):
            raise UnsupportedContinuation(
                "square barrier cannot be evaluated at complex points over its support"
            )
        return np.where(inside, complex(self.height), 0.0 + 0.0j)


@dataclass(frozen=True)
class TablePotential(Potential):
    """Cubic interpolation of sampled values; real evaluation only (1D)."""

    xs: np.ndarray
    values: np.ndarray

    kind = "custom-table"
    dim = 1
    holomorphic = False

    def __post_init__(self):
        from scipy.interpolate import CubicSpline

        xs = np.asarray(self.xs, float)
        vs = np.asarray(self.values, float)
        if xs.ndim != 1 or xs.shape != vs.shape or len(xs) < 4:
            raise BadParams("table potential needs >= 4 matching samples")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", vs)
        object.__setattr__(self, "_spline", CubicSpline(xs, vs, bc_type="natural"))

    @property
    def support_radius(self):
        return float(max(abs(self.xs[0]), abs(self.xs[-1])))

    def _value(self, pts):
        x = pts[:, 0]
        out = np.zeros_like(x)
        inside = (x >= self.xs[0]) & (x <= self.xs[-1])
        out[inside] = self._spline(x[inside])
        return out

    def _gradient(self, pts):
        x = pts[:, 0]
        out = np.zeros_like(pts)
        inside = (x >= self.xs[0]) & (x <= self.xs[-1])
        out[inside, 0] = self._spline(x[inside], 1)
        return out


@dataclass(frozen=True)
class AnalyticPotential(Potential):
    """Wrapper for an analytic V given as a callable (e.g. x**2 oracles).

    fn must accept real or complex arrays of shape (m, n) and return (m,);
    grad, when given, returns (m, n).  Not compactly supported in general.
    """

    fn: callable
    grad: callable = None
    ndim: int = 1
    radius: float = np.inf

    kind = "analytic"
    holomorphic = True

    @property
    def dim(self):
        return self.ndim

    @property
    def support_radius(self):
        return self.radius

    def _value(self, pts):
        return np.asarray(self.fn(pts), float)

    def _gradient(self, pts):
        if self.grad is not None:
            return np.asarray(self.grad(pts), float)
        return super()._gradient(pts)

    def _value_complex(self, pts):
        return np.asarray(self.fn(pts), complex)


def zero_potential(dim=1):
    return AnalyticPotential(
        fn=lambda pts: np.zeros(pts.shape[0], dtype=pts.dtype),
        grad=lambda pts: np.zeros_like(pts),
        ndim=dim,
        radius=0.0,
    )


def three_bump_potential(amplitude=4.0, width=0.6, radius=1.0):
    """Three equal bumps at equilateral positions; hyperbolic at a range of energies."""
    angles = np.array([np.pi / 2, np.pi / 2 + 2 * np.pi / 3, np.pi / 2 + 4 * np.pi / 3])
    centers = radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return SumOfBumps(centers=centers, amplitudes=np.full(3, amplitude), widths=np.full(3, width))


def double_barrier_potential(amplitude=2.0, width=0.4, separation=1.0):
    """Two bumps at +-separation on the line; traps a well of closed orbits."""
    centers = np.array([[-separation], [separation]])
    return SumOfBumps(
        centers=centers, amplitudes=np.full(2, amplitude), widths=np.full(2, width)
    )


@dataclass(frozen=True)
class PhasePoint:
    """A point (x, xi) in phase space T*R^n."""

    x: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, float))
        xi = np.atleast_1d(np.asarray(self.xi, float))
        if x.shape != xi.shape:
            raise ValueError("x and xi must have the same length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xi))):
            raise ValueError("phase point components must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)

    @property
    def dim(self):
        return self.x.shape[0]

    def as_state(self):
        return np.concatenate([self.x, self.xi])

    @classmethod
    def from_state(cls, state):
        state = np.asarray(state, float)
        n = state.shape[0] // 2
        return cls(state[:n], state[n:])


class HamiltonianBase:
    """Protocol shared by potential-backed and custom symbols.

    States are arrays of shape (m, 2n) laid out as (x_1..x_n, xi_1..xi_n).
    """

    dim = 1

    def p_states(self, states):
        raise NotImplementedError

    def field_states(self, states):
        """Hamilton vector field (dx/dt, dxi/dt) for a batch of states."""
        raise NotImplementedError

    def p(self, x, xi):
        return float(self.p_states(_state(x, xi, self.dim))[0])

    def vector_field(self, x, xi):
        f = self.field_states(_state(x, xi, self.dim))[0]
        n = self.dim
        return f[:n].copy(), f[n:].copy()


def _state(x, xi, n):
    x = np.atleast_1d(np.asarray(x, float)).reshape(n)
    xi = np.atleast_1d(np.asarray(xi, float)).reshape(n)
    return np.concatenate([x, xi])[None, :]


@dataclass(frozen=True)
class HamiltonianModel(HamiltonianBase):
    """p(x, xi) = |xi|^2 + V(x) - energy_shift."""

    potential: Potential
    energy_shift: float = 1.0

    @property
    def dim(self):
        return self.potential.dim

    @property
    def support_radius(self):
        return self.potential.support_radius

    def p_states(self, states):
        n = self.dim
        x, xi = states[:, :n], states[:, n:]
        return np.sum(xi**2, axis=-1) + self.potential._value(x) - self.energy_shift

    def field_states(self, states):
        n = self.dim
        x, xi = states[:, :n], states[:, n:]
        return np.concatenate([2.0 * xi, -self.potential._gradient(x)], axis=1)


@dataclass(frozen=True)
class CustomHamiltonian(HamiltonianBase):
    """Symbol given by callables p(x, xi) and the two gradients, all batched.

    p_fn(x, xi) -> (m,); dp_dx / dp_dxi -> (m, n) for x, xi of shape (m, n).
    Missing gradients fall back to central differences with step 1e-6.
    """

    p_fn: callable
    dp_dx: callable = None
    dp_dxi: callable = None
    ndim: int = 1

    @property
    def dim(self):
        return self.ndim

    def p_states(self, states):
        n = self.dim
        return np.asarray(self.p_fn(states[:, :n], states[:, n:]), float)

    def field_states(self, states):
        n = self.dim
        x, xi = states[:, :n], states[:, n:]
        if self.dp_dx is not None and self.dp_dxi is not None:
            return np.concatenate([self.dp_dxi(x, xi), -self.dp_dx(x, xi)], axis=1)
        step = 1e-6
        out = np.empty_like(states)
        for j in range(2 * n):
            sp = states.copy()
            sm = states.copy()
            sp[:, j] += step
            sm[:, j] -= step
            d = (self.p_states(sp) - self.p_states(sm)) / (2 * step)
            # dx_j/dt = dp/dxi_j ; dxi_j/dt = -dp/dx_j
            if j < n:
                out[:, n + j] = -d
            else:
                out[:, j - n] = d
        return out


def linear_hyperbolic_model():
    """p = xi_1 + x_2 xi_2 on T*R^2: one straight trapped line, exact hyperbolicity.

    Flow: x_1(t) = x_1 + t, x_2(t) = x_2 e^t, xi_2(t) = xi_2 e^-t, xi_1 const.
    """
    return CustomHamiltonian(
        p_fn=lambda x, xi: xi[:, 0] + x[:, 1] * xi[:, 1],
        dp_dx=lambda x, xi: np.stack([np.zeros(len(x)), xi[:, 1]], axis=1),
        dp_dxi=lambda x, xi: np.stack([np.ones(len(x)), x[:, 1]], axis=1),
        ndim=2,
    )


def inverted_oscillator():
    """p = xi^2 - x^2 - 1 on T*R; the linear flow has a cosh/sinh closed form."""
    return CustomHamiltonian(
        p_fn=lambda x, xi: xi[:, 0] ** 2 - x[:, 0] ** 2 - 1.0,
        dp_dx=lambda x, xi: -2.0 * x,
        dp_dxi=lambda x, xi: 2.0 * xi,
        ndim=1,
    )


def eval_p(model, pt: PhasePoint) -> float:
    """Value of the classical symbol at a phase point."""
    return model.p(pt.x, pt.xi)


def eval_V_complex(potential: Potential, z):
    """Entire continuation of V at complex z; agrees with V on the real axis."""
    return potential.value_complex(z)


def hamiltonian_vector_field(model, pt: PhasePoint):
    """(dx/dt, dxi/dt) = (dp/dxi, -dp/dx) at a phase point."""
    return model.vector_field(pt.x, pt.xi)
