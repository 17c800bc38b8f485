"""Hamilton flow integration, escape times, and trapped-set sampling.

The public single-trajectory operations ride on scipy's adaptive RK45;
the sampling operations use a vectorized fixed-step RK4 over seed
batches, with escape detected at step resolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepFailure
from .fractal import PointCloud
from .model import PhasePoint

ESCAPE_SENTINEL = math.inf


@dataclass(frozen=True)
class Trajectory:
    """Integrated flow segment: times (k,), states (k, 2n), max energy drift."""

    times: np.ndarray
    states: np.ndarray
    energy_drift: float

    def __len__(self):
        return len(self.times)

    def point(self, i) -> PhasePoint:
        return PhasePoint.from_state(self.states[i])

    @property
    def endpoint(self) -> PhasePoint:
        return self.point(-1)


@dataclass(frozen=True)
class EscapeRecord:
    """First outward crossing times of |x| = R in each time direction.

    A time equals the sentinel (inf) when no crossing occurs before the
    horizon; forward uses x . xi > 0 at the crossing, backward x . xi < 0.
    """

    forward_escape_t: float
    backward_escape_t: float
    escape_radius: float
    horizon: float

    @property
    def trapped(self) -> bool:
        return math.isinf(self.forward_escape_t) and math.isinf(self.backward_escape_t)


def integrate(model, rho0: PhasePoint, t_span, tol=1e-9, sample_times=None) -> Trajectory:
    """Integrate the Hamilton flow from rho0 over t_span.

    tol is the relative tolerance of the adaptive RK45 scheme; dense
    output is evaluated at sample_times when given, otherwise at the
    solver's own steps.
    """
    if not (1e-13 < tol < 1e-3):
        raise ValueError("tol must lie in (1e-13, 1e-3)")

    def rhs(t, y):
        return model.field_states(y[None, :])[0]

    sol = solve_ivp(
        rhs,
        t_span,
        rho0.as_state(),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-2,
        dense_output=sample_times is not None,
    )
    if not sol.success:
        raise StepFailure(f"integrator failed: {sol.message}")
    if sample_times is not None:
        times = np.asarray(sample_times, float)
        states = sol.sol(times).T
    else:
        times = sol.t
        states = sol.y.T
    p0 = model.p_states(rho0.as_state()[None, :])[0]
    drift = float(np.max(np.abs(model.p_states(states) - p0))) if len(states) else 0.0
    return Trajectory(times=times, states=states, energy_drift=drift)


def _escape_leg(model, state0, R, T_max, sign):
    """Escape time along one time direction (sign=+1 forward, -1 backward)."""
    n = model.dim
    x0, xi0 = state0[:n], state0[n:]
    if np.linalg.norm(x0) > R and sign * float(x0 @ xi0) > 0:
        return 0.0

    def rhs(t, y):
        return sign * model.field_states(y[None, :])[0]

    def crossing(t, y):
        return float(np.linalg.norm(y[:n]) - R)

    crossing.terminal = True
    crossing.direction = 1.0

    sol = solve_ivp(
        rhs, (0.0, T_max), state0, method="RK45",
        rtol=1e-9, atol=1e-11, events=crossing,
    )
    if not sol.success:
        raise StepFailure(f"integrator failed: {sol.message}")
    for t_ev, y_ev in zip(sol.t_events[0], sol.y_events[0]):
        if sign * float(y_ev[:n] @ y_ev[n:]) > 0:  # outward in the original time
            return float(t_ev)
    return ESCAPE_SENTINEL


def escape_record(model, rho0: PhasePoint, R, T_max=40.0) -> EscapeRecord:
    """Forward/backward first-escape times from the ball |x| <= R.

    The outward-crossing test (|x| = R with x . xi of the right sign)
    prevents re-entering trajectories from registering a false escape.
    """
    state0 = rho0.as_state()
    fwd = _escape_leg(model, state0, R, T_max, +1)
    bwd = _escape_leg(model, state0, R, T_max, -1)
    return EscapeRecord(fwd, bwd, escape_radius=R, horizon=T_max)


# ---------------------------------------------------------------------------
# batched fixed-step machinery

def rk4_step(model, states, dt):
    k1 = model.field_states(states)
    k2 = model.field_states(states + 0.5 * dt * k1)
    k3 = model.field_states(states + 0.5 * dt * k2)
    k4 = model.field_states(states + dt * k3)
    return states + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def batch_escape_times(model, states, R, T_max, dt=0.01, direction=+1):
    """Escape times for a batch of seeds, at step resolution.

    Returns an array with inf where no outward crossing of |x| = R occurs
    before T_max.  direction=-1 integrates the reversed flow.
    """
    n = model.dim
    m = states.shape[0]
    times = np.full(m, ESCAPE_SENTINEL)
    cur = states.copy()
    radial = np.einsum("ij,ij->i", cur[:, :n], cur[:, n:]) * direction
    out = (np.linalg.norm(cur[:, :n], axis=1) > R) & (radial > 0)
    times[out] = 0.0
    active = ~out
    steps = int(np.ceil(T_max / dt))
    sgn = float(direction)
    for k in range(1, steps + 1):
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        sub = cur[idx]
        k1 = sgn * model.field_states(sub)
        k2 = sgn * model.field_states(sub + 0.5 * dt * k1)
        k3 = sgn * model.field_states(sub + 0.5 * dt * k2)
        k4 = sgn * model.field_states(sub + dt * k3)
        stepped = sub + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        cur[idx] = stepped
        radial = np.einsum("ij,ij->i", stepped[:, :n], stepped[:, n:]) * direction
        crossed = (np.linalg.norm(stepped[:, :n], axis=1) > R) & (radial > 0)
        hit = idx[crossed]
        times[hit] = k * dt
        active[hit] = False
    return times


@dataclass(frozen=True)
class SeedGrid:
    """Uniform tensor grid over a phase-space box.

    x_bounds / xi_bounds: per-axis (lo, hi) pairs, length n each;
    nx / nxi: node counts per axis.
    """

    x_bounds: tuple
    xi_bounds: tuple
    nx: int = 20
    nxi: int = 20

    def states(self, n):
        axes = [np.linspace(lo, hi, self.nx) for lo, hi in self.x_bounds]
        axes += [np.linspace(lo, hi, self.nxi) for lo, hi in self.xi_bounds]
        if len(axes) != 2 * n:
            raise ValueError("seed grid bounds do not match the model dimension")
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def default_seed_grid(model, R, nx=20, nxi=20, xi_max=None):
    n = model.dim
    if xi_max is None:
        xi_max = 1.6
    return SeedGrid(
        x_bounds=tuple((-R, R) for _ in range(n)),
        xi_bounds=tuple((-xi_max, xi_max) for _ in range(n)),
        nx=nx,
        nxi=nxi,
    )


@dataclass(frozen=True)
class InvariantSample:
    """Seeds split by escape behaviour.

    backward_trapped: no backward escape before the horizon (the set a
    trajectory sweeps after leaving the trapped region); forward_trapped:
    no forward escape; trapped: neither.
    """

    trapped: PointCloud
    backward_trapped: PointCloud
    forward_trapped: PointCloud
    horizon: float
    escape_radius: float


def sample_invariant_sets(
    model, energy_window=0.05, R=None, T_max=40.0, seed_grid=None, dt=0.01, energy=0.0
) -> InvariantSample:
    """Classify energy-shell seeds by forward/backward escape.

    Seeds come from a uniform grid intersected with |p - energy| <= window
    by rejection.  Trapped = no escape either way before T_max.
    """
    if R is None:
        R = getattr(model, "support_radius", 2.0) + 2.0
    if seed_grid is None:
        seed_grid = default_seed_grid(model, R)
    states = seed_grid.states(model.dim)
    keep = np.abs(model.p_states(states) - energy) <= energy_window
    states = states[keep]
    if len(states) == 0:
        empty = PointCloud(np.empty((0, 2 * model.dim)))
        return InvariantSample(empty, empty, empty, T_max, R)
    fwd = batch_escape_times(model, states, R, T_max, dt=dt, direction=+1)
    bwd = batch_escape_times(model, states, R, T_max, dt=dt, direction=-1)
    trapped = np.isinf(fwd) & np.isinf(bwd)
    return InvariantSample(
        trapped=PointCloud(states[trapped]),
        backward_trapped=PointCloud(states[np.isinf(bwd)]),
        forward_trapped=PointCloud(states[np.isinf(fwd)]),
        horizon=T_max,
        escape_radius=R,
    )


def sample_trapped_set(
    model, energy_window=0.05, R=None, T_max=40.0, seed_grid=None, dt=0.01, energy=0.0
) -> PointCloud:
    """Seeds whose forward and backward escape records are both sentinels."""
    return sample_invariant_sets(
        model, energy_window, R, T_max, seed_grid, dt=dt, energy=energy
    ).trapped


def export_invariant_csv(sample: InvariantSample, path):
    """CSV with columns t_tag, x1..xn, xi1..xin; tags K / B / F."""
    rows = []
    for tag, cloud in (
        ("K", sample.trapped),
        ("B", sample.backward_trapped),
        ("F", sample.forward_trapped),
    ):
        for state in cloud.points:
            rows.append((tag, state))
    if rows:
        n = rows[0][1].shape[0] // 2
    else:
        n = 1
    header = "t_tag," + ",".join(
        [f"x{j + 1}" for j in range(n)] + [f"xi{j + 1}" for j in range(n)]
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for tag, state in rows:
            fh.write(tag + "," + ",".join(f"{v:.17g}" for v in state) + "\n")
