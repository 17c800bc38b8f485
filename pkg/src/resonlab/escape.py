"""Escape functions for hyperbolic flows, built and checked at symbol level.

Pieces: a mollified piecewise-linear ramp; a Whitney-cover regularization
of squared distance to a closed set; flow averaging of the regularized
distances; the logarithmic difference field and its flow derivative; and
a nonnegative-derivative background field assembled from flow-time ramps
through the nontrapped region.  All flow derivatives are produced by the
chain rule along integrated trajectories, never by differencing the
assembled fields.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import BadParams, EmptyTarget, ShapeMismatch

# ---------------------------------------------------------------------------
# polynomial mollifier (1 - s^2)^4, exactly supported in [-1, 1]

_PDF_NORM = 315.0 / 256.0


def bump_pdf(s):
    s = np.asarray(s, float)
    inside = np.abs(s) < 1.0
    v = np.where(inside, (1.0 - s**2) ** 4, 0.0)
    return _PDF_NORM * v


def bump_cdf(u):
    u = np.asarray(u, float)
    c = np.clip(u, -1.0, 1.0)
    poly = c - (4.0 / 3.0) * c**3 + (6.0 / 5.0) * c**5 - (4.0 / 7.0) * c**7 + (1.0 / 9.0) * c**9
    return _PDF_NORM * poly + 0.5


def bump_cdf_integral(u):
    """Antiderivative of bump_cdf vanishing at -inf (linear growth beyond 1)."""
    u = np.asarray(u, float)
    c = np.clip(u, -1.0, 1.0)
    q = c**2 / 2 - c**4 / 3 + c**6 / 5 - c**8 / 14 + c**10 / 90
    q_m1 = 193.0 / 630.0
    inner = _PDF_NORM * (q - q_m1) + (c + 1.0) / 2.0
    return inner + np.where(u > 1.0, u - 1.0, 0.0)


def smoothstep(u):
    """0 below -1, 1 above +1, C^4 monotone in between."""
    return bump_cdf(u)


# ---------------------------------------------------------------------------
# ramp


@dataclass(frozen=True)
class RampFunction:
    """Smooth ramp equal to t on [-aT, aT] and 0 beyond |t| = T.

    Exact convolution of the piecewise-linear ramp with the polynomial
    mollifier of width eta, so chi(t) = t holds identically for
    |t| <= alpha T - eta and the derivative never drops below
    -alpha/(1 - alpha) > -2 alpha.
    """

    T: float
    alpha: float
    eta: float = None

    def __post_init__(self):
        if not (0.0 < self.alpha < 0.5) or self.T <= 0:
            raise BadParams("need T > 0 and alpha in (0, 1/2)")
        if self.eta is None:
            object.__setattr__(
                self, "eta", 0.25 * min(self.alpha * self.T, (1 - self.alpha) * self.T)
            )
        if self.eta <= 0 or self.eta >= min(self.alpha * self.T, (1 - self.alpha) * self.T):
            raise BadParams("mollification width must fit between the kinks")

    @property
    def _kinks_jumps(self):
        T, a = self.T, self.alpha
        s = a / (1.0 - a)
        kinks = np.array([-T, -a * T, a * T, T])
        jumps = np.array([-s, 1.0 + s, -(1.0 + s), s])
        return kinks, jumps

    def __call__(self, t):
        t = np.asarray(t, float)
        kinks, jumps = self._kinks_jumps
        out = np.zeros_like(t)
        for k, j in zip(kinks, jumps):
            out = out + j * self.eta * bump_cdf_integral((t - k) / self.eta)
        return out

    def derivative(self, t):
        t = np.asarray(t, float)
        kinks, jumps = self._kinks_jumps
        out = np.zeros_like(t)
        for k, j in zip(kinks, jumps):
            out = out + j * bump_cdf((t - k) / self.eta)
        return out


def build_ramp(T: float, alpha: float, eta: float = None) -> RampFunction:
    return RampFunction(T=T, alpha=alpha, eta=eta)


# ---------------------------------------------------------------------------
# Whitney regularization of squared distance


@dataclass(frozen=True)
class RegularizedDistance:
    """phi_eps >= eps, comparable to d(., target)^2 + eps, with tame derivatives.

    phi_eps(x) = eps + sum_j d_j^2 chi((x - x_j) / (d_j + sqrt(eps)))
    over a greedy cover {x_j} of the complement of the target; chi is a
    radial bump, 1 inside radius 1/8 and 0 outside 1/4.
    """

    centers: np.ndarray
    center_dists: np.ndarray
    epsilon: float
    overlap_bound: int

    def _terms(self, x):
        scales = self.center_dists + np.sqrt(self.epsilon)
        diffs = x[:, None, :] - self.centers[None, :, :]
        r = np.linalg.norm(diffs, axis=-1) / scales[None, :]
        return diffs, r, scales

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        out = np.full(x.shape[0], self.epsilon)
        if len(self.centers) == 0:
            return out
        for block in _blocks(len(self.centers), x.shape[0]):
            c = self.centers[block]
            d = self.center_dists[block]
            scales = d + np.sqrt(self.epsilon)
            r = np.linalg.norm(x[:, None, :] - c[None, :, :], axis=-1) / scales[None, :]
            out = out + np.sum(d[None, :] ** 2 * _radial_bump(r), axis=1)
        return out

    def gradient(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        out = np.zeros_like(x)
        if len(self.centers) == 0:
            return out
        for block in _blocks(len(self.centers), x.shape[0]):
            c = self.centers[block]
            d = self.center_dists[block]
            scales = d + np.sqrt(self.epsilon)
            diffs = x[:, None, :] - c[None, :, :]
            rr = np.linalg.norm(diffs, axis=-1)
            r = rr / scales[None, :]
            dpsi = _radial_bump_deriv(r)
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(rr[:, :, None] > 0, diffs / rr[:, :, None], 0.0)
            out = out + np.sum(
                (d[None, :] ** 2 * dpsi / scales[None, :])[:, :, None] * unit, axis=1
            )
        return out

    def overlap_at(self, x):
        x = np.atleast_2d(np.asarray(x, float))
        scales = self.center_dists + np.sqrt(self.epsilon)
        diffs = x[:, None, :] - self.centers[None, :, :]
        r = np.linalg.norm(diffs, axis=-1) / scales[None, :]
        return np.sum(r < 0.25, axis=1)


def _blocks(total, width, budget=4_000_000):
    step = max(1, budget // max(width, 1))
    for lo in range(0, total, step):
        yield slice(lo, min(lo + step, total))


def _radial_bump(r):
    # 1 on [0, 1/8], 0 beyond 1/4, C^4 transition
    return 1.0 - smoothstep((r - 3.0 / 16.0) * 16.0)


def _radial_bump_deriv(r):
    return -16.0 * bump_pdf((r - 3.0 / 16.0) * 16.0)


def whitney_phi(target, epsilon: float, box=None, max_centers=40000) -> RegularizedDistance:
    """Greedy Whitney-style cover and the regularized squared distance.

    target: point array (m, d) or PointCloud sampling the closed set;
    box: (d, 2) evaluation region, defaulting to the target box inflated
    by half its diameter.
    """
    pts = getattr(target, "points", target)
    pts = np.atleast_2d(np.asarray(pts, float))
    if pts.shape[0] == 0:
        raise EmptyTarget("regularized distance needs a nonempty target")
    if epsilon <= 0:
        raise BadParams("epsilon must be positive")
    d = pts.shape[1]
    from scipy.spatial import cKDTree

    tree = cKDTree(pts)
    if box is None:
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        margin = 0.5 * max(float(np.linalg.norm(hi - lo)), 1.0)
        box = np.stack([lo - margin, hi + margin], axis=1)
    else:
        box = np.asarray(box, float)

    widths = box[:, 1] - box[:, 0]
    s_max = max(np.max(widths) / 4.0, np.sqrt(epsilon))
    s_min = np.sqrt(epsilon) / 2.0
    spacings = []
    s = s_max
    while s > s_min:
        spacings.append(s)
        s /= 2.0
    spacings.append(s_min)

    cands = []
    for s in spacings:
        axes = [np.arange(box[j, 0], box[j, 1] + s, s) for j in range(d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        dist, _ = tree.query(grid)
        band = (dist > np.sqrt(epsilon)) & (dist >= 2 * s * np.sqrt(d)) & (
            dist <= 16 * s * np.sqrt(d)
        )
        cands.append((grid[band], dist[band]))
    cand_pts = np.concatenate([c[0] for c in cands], axis=0)
    cand_d = np.concatenate([c[1] for c in cands], axis=0)

    # greedy, largest distance first; a candidate already inside an accepted
    # ball (shrunk by 0.7 to keep the cover dense) is dropped.  Blockers of
    # a candidate necessarily have a comparable distance, so a small query
    # radius suffices.
    order = np.argsort(-cand_d)
    accepted = []
    accepted_d = []
    acc_tree = None
    tree_size = 0
    for i in order:
        if len(accepted) >= max_centers:
            break
        c = cand_pts[i]
        covered = False
        if acc_tree is not None:
            for j in acc_tree.query_ball_point(c, r=0.15 * cand_d[i]):
                if np.linalg.norm(c - accepted[j]) < 0.7 * accepted_d[j] / 8.0:
                    covered = True
                    break
        if not covered and tree_size < len(accepted):
            tail = np.asarray(accepted[tree_size:])
            tail_d = np.asarray(accepted_d[tree_size:])
            rr = np.linalg.norm(tail - c, axis=1)
            covered = bool(np.any(rr < 0.7 * tail_d / 8.0))
        if covered:
            continue
        accepted.append(c)
        accepted_d.append(cand_d[i])
        if len(accepted) - tree_size >= 512:
            acc_tree = cKDTree(np.asarray(accepted))
            tree_size = len(accepted)

    centers = np.asarray(accepted).reshape(-1, d)
    dists = np.asarray(accepted_d)
    rd = RegularizedDistance(
        centers=centers, center_dists=dists, epsilon=float(epsilon), overlap_bound=0
    )
    if len(centers):
        probe = centers + 0.05 * np.sqrt(epsilon)
        object.__setattr__(rd, "overlap_bound", int(np.max(rd.overlap_at(probe))))
    return rd


# ---------------------------------------------------------------------------
# flow averaging


@dataclass(frozen=True)
class AveragingProfile:
    """Weight g_T supported in (-1, T+1): unit-slope ramp up at 0, down at T."""

    T: float

    def __post_init__(self):
        if self.T < 2.0:
            raise BadParams("averaging horizon must be >= 2 so the ramps separate")

    def g(self, t):
        t = np.asarray(t, float)
        plateau = 256.0 / 315.0
        return plateau * (bump_cdf(t) - bump_cdf(t - self.T))

    def gprime(self, t):
        # unit slopes at 0 and T: plateau * pdf(0) = 1
        t = np.asarray(t, float)
        return (256.0 / 315.0) * (bump_pdf(t) - bump_pdf(t - self.T))

    @property
    def integral(self):
        return self.T * 256.0 / 315.0


@dataclass(frozen=True)
class AveragedPhi:
    """Flow averages of phi+- and their exact in-flow derivatives.

    hp_* comes from the integration-by-parts identity: the derivative
    along the flow equals the average against -g'.
    """

    phi_hat_plus: np.ndarray
    phi_hat_minus: np.ndarray
    hp_phi_hat_plus: np.ndarray
    hp_phi_hat_minus: np.ndarray
    T: float


def time_average_phi(model, phi_plus, phi_minus, states, T=5.0, dt=0.025) -> AveragedPhi:
    """Average phi+- along the flow against the ramp profile.

    phi_plus / phi_minus are callables mapping a state batch (m, 2n) to
    values (m,).  Quadrature is trapezoidal on a uniform t grid through
    [-1, T+1] containing 0 exactly; the flow is advanced by fixed-step
    RK4 on the same grid.
    """
    from .flow import rk4_step

    profile = AveragingProfile(T=T)
    dt = 1.0 / max(2, int(round(1.0 / dt)))
    n_back = int(round(1.0 / dt))
    n_fwd = int(round((T + 1.0) / dt))
    states = np.atleast_2d(np.asarray(states, float))
    m = states.shape[0]

    acc = {
        "gp": np.zeros(m), "gm": np.zeros(m),
        "wp": np.zeros(m), "wm": np.zeros(m),
    }

    def take(t, cur, weight):
        gv = float(profile.g(t))
        wv = -float(profile.gprime(t))
        if gv == 0.0 and wv == 0.0:
            return
        pp = phi_plus(cur)
        pm = phi_minus(cur)
        if gv != 0.0:
            acc["gp"] += weight * gv * pp
            acc["gm"] += weight * gv * pm
        if wv != 0.0:
            acc["wp"] += weight * wv * pp
            acc["wm"] += weight * wv * pm

    # node t = 0 (interior weight), then backward leg to -1
    take(0.0, states, dt)
    cur = states.copy()
    for k in range(1, n_back + 1):
        cur = rk4_step(model, cur, -dt)
        t = -k * dt
        take(t, cur, dt if k < n_back else dt / 2.0)
    # forward leg to T + 1
    cur = states.copy()
    for k in range(1, n_fwd + 1):
        cur = rk4_step(model, cur, dt)
        t = k * dt
        take(t, cur, dt if k < n_fwd else dt / 2.0)

    return AveragedPhi(
        phi_hat_plus=acc["gp"],
        phi_hat_minus=acc["gm"],
        hp_phi_hat_plus=acc["wp"],
        hp_phi_hat_minus=acc["wm"],
        T=T,
    )


# ---------------------------------------------------------------------------
# background field with nonnegative flow derivative


@dataclass(frozen=True)
class G0Field:
    """Flow-time ramp through the nontrapped region.

    values = integral of k(t) a(flow_t) with k a smoothed decreasing
    step, so the in-flow derivative is the average of a >= 0 against a
    positive bump: hp_values >= 0 holds exactly at quadrature level, and
    equals ~1 wherever the activity window a is 1 along |t| <= 1.
    """

    values: np.ndarray
    hp_values: np.ndarray
    active_radius: float
    exclusion_radius: float


def _activity(model, states, trapped_tree, active_radius, p_halfwidth, exclusion_radius):
    n = model.dim
    x = states[:, :n]
    rad = np.linalg.norm(x, axis=1)
    a = 1.0 - smoothstep((rad - active_radius - 1.0) * 2.0 / 2.0)
    p = model.p_states(states)
    a = a * (1.0 - smoothstep((np.abs(p) - 1.5 * p_halfwidth) / (0.5 * p_halfwidth)))
    if trapped_tree is not None:
        dist, _ = trapped_tree.query(states)
        a = a * smoothstep((dist - 1.5 * exclusion_radius) / (0.5 * exclusion_radius))
    return a


def build_G0(
    model,
    states,
    trapped_points=None,
    active_radius=4.0,
    p_halfwidth=0.1,
    exclusion_radius=0.05,
    horizon=30.0,
    dt=0.02,
) -> G0Field:
    """Assemble the background escape field along trajectories.

    trapped_points: sample of the trapped set to excise (None or empty
    for nontrapping models); active_radius: |x| radius of the region the
    field must sweep; the activity cutoff extends 1 beyond it and decays
    over a further unit so the unit flow window never sees the edge.
    """
    from .flow import rk4_step

    states = np.atleast_2d(np.asarray(states, float))
    tree = None
    if trapped_points is not None:
        pts = getattr(trapped_points, "points", trapped_points)
        pts = np.atleast_2d(np.asarray(pts, float))
        if pts.shape[0]:
            from scipy.spatial import cKDTree

            tree = cKDTree(pts)

    m = states.shape[0]
    g0 = np.zeros(m)
    hp = np.zeros(m)
    n = model.dim
    stop_radius = active_radius + 3.5

    def leg(sign):
        cur = states.copy()
        active = np.ones(m, bool)
        steps = int(round(horizon / dt))
        for k in range(0, steps + 1):
            t = sign * k * dt
            if k > 0:
                idx = np.nonzero(active)[0]
                if len(idx) == 0:
                    break
                cur[idx] = rk4_step(model, cur[idx], sign * dt)
            if k == 0 and sign < 0:
                continue  # t = 0 node accounted on the forward leg
            w = dt
            a = np.zeros(m)
            if np.any(active):
                a[active] = _activity(
                    model, cur[active], tree, active_radius, p_halfwidth, exclusion_radius
                )
            g0[:] += w * float(_k_profile(t)) * a
            hp[:] += w * float(bump_pdf(t)) * a
            # freeze points that left the activity zone moving outward
            if k % 10 == 0 and np.any(active):
                xs = cur[active, :n]
                rad = np.linalg.norm(xs, axis=1)
                vel = model.field_states(cur[active])[:, :n]
                outgoing = np.einsum("ij,ij->i", xs, vel * sign) > 0
                gone = (rad > stop_radius) & outgoing
                act_idx = np.nonzero(active)[0]
                active[act_idx[gone]] = False

    leg(+1)
    leg(-1)
    return G0Field(
        values=g0, hp_values=hp,
        active_radius=active_radius, exclusion_radius=exclusion_radius,
    )


def _k_profile(t):
    return 0.5 - bump_cdf(t)


# ---------------------------------------------------------------------------
# assembled escape field


@dataclass(frozen=True)
class CutoffField:
    """A cutoff sampled on the grid, with its in-flow derivative."""

    values: np.ndarray
    hp_values: np.ndarray


def radial_cutoff(model, states, inner: float, outer: float) -> CutoffField:
    """Smooth cutoff of |x|: 1 inside `inner`, 0 beyond `outer`."""
    n = model.dim
    x = states[:, :n]
    rad = np.linalg.norm(x, axis=1)
    mid = 0.5 * (inner + outer)
    half = 0.5 * (outer - inner)
    u = (rad - mid) / half
    vals = 1.0 - smoothstep(u)
    dvals = -bump_pdf(u) / half
    vel = model.field_states(states)[:, :n]
    with np.errstate(invalid="ignore", divide="ignore"):
        ddt_rad = np.where(rad > 0, np.einsum("ij,ij->i", x, vel) / rad, 0.0)
    return CutoffField(values=vals, hp_values=dvals * ddt_rad)


@dataclass(frozen=True)
class EscapeField:
    """All escape-function ingredients sampled on a phase-space grid."""

    states: np.ndarray
    phi_hat_plus: np.ndarray
    phi_hat_minus: np.ndarray
    g_hat: np.ndarray
    hp_g_hat: np.ndarray
    g0: np.ndarray
    hp_g0: np.ndarray
    G: np.ndarray
    hp_G: np.ndarray
    epsilon: float
    M: float
    C0: float

    def scaled(self, factor: float) -> "EscapeField":
        return EscapeField(
            states=self.states,
            phi_hat_plus=self.phi_hat_plus,
            phi_hat_minus=self.phi_hat_minus,
            g_hat=self.g_hat * factor,
            hp_g_hat=self.hp_g_hat * factor,
            g0=self.g0,
            hp_g0=self.hp_g0,
            G=self.G * factor,
            hp_G=self.hp_G * factor,
            epsilon=self.epsilon,
            M=self.M,
            C0=self.C0,
        )

    def to_csv(self, path):
        n2 = self.states.shape[1]
        n = n2 // 2
        cols = [f"x{j + 1}" for j in range(n)] + [f"xi{j + 1}" for j in range(n)]
        header = ",".join(cols + ["phi_hat_plus", "phi_hat_minus", "G", "Hp_G"])
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for i in range(self.states.shape[0]):
                row = list(self.states[i]) + [
                    self.phi_hat_plus[i],
                    self.phi_hat_minus[i],
                    self.G[i],
                    self.hp_G[i],
                ]
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def build_G(
    averaged: AveragedPhi,
    epsilon: float,
    M: float,
    states,
    g0_field: G0Field = None,
    C0: float = 5.0,
    chi_hat: CutoffField = None,
    chi0: CutoffField = None,
) -> EscapeField:
    """Combine the averaged distances and the background field.

    g_hat = log(M eps + phi_hat_minus) - log(M eps + phi_hat_plus);
    G = chi_hat g_hat + C0 log(1/eps) chi0 g0, with flow derivatives by
    the chain rule through the stored in-flow derivatives.  Cutoffs
    default to 1 on the whole grid (zero derivative).
    """
    states = np.atleast_2d(np.asarray(states, float))
    m = states.shape[0]
    fields = [
        averaged.phi_hat_plus, averaged.phi_hat_minus,
        averaged.hp_phi_hat_plus, averaged.hp_phi_hat_minus,
    ]
    for f in fields:
        if f.shape != (m,):
            raise ShapeMismatch("averaged fields do not match the grid")
    if g0_field is not None and g0_field.values.shape != (m,):
        raise ShapeMismatch("background field does not match the grid")

    phi_p = averaged.phi_hat_plus
    phi_m = averaged.phi_hat_minus
    den_p = M * epsilon + phi_p
    den_m = M * epsilon + phi_m
    g_hat = np.log(den_m) - np.log(den_p)
    hp_g_hat = averaged.hp_phi_hat_minus / den_m - averaged.hp_phi_hat_plus / den_p

    ones = np.ones(m)
    zeros = np.zeros(m)
    ch = chi_hat if chi_hat is not None else CutoffField(ones, zeros)
    c0f = chi0 if chi0 is not None else CutoffField(ones, zeros)
    if g0_field is None:
        g0_field = G0Field(values=zeros, hp_values=zeros, active_radius=0.0, exclusion_radius=0.0)

    lam = C0 * np.log(1.0 / epsilon)
    G = ch.values * g_hat + lam * c0f.values * g0_field.values
    hp_G = (
        ch.values * hp_g_hat
        + ch.hp_values * g_hat
        + lam * (c0f.values * g0_field.hp_values + c0f.hp_values * g0_field.values)
    )
    return EscapeField(
        states=states,
        phi_hat_plus=phi_p,
        phi_hat_minus=phi_m,
        g_hat=g_hat,
        hp_g_hat=hp_g_hat,
        g0=g0_field.values,
        hp_g0=g0_field.hp_values,
        G=G,
        hp_G=hp_G,
        epsilon=epsilon,
        M=M,
        C0=C0,
    )


@dataclass(frozen=True)
class EscapeReport:
    """Outcome of the flow-inequality scan on an escape field."""

    min_hp_g_shell: float
    shell_nodes: int
    pass_shell: bool
    global_min_hp_g: float
    global_floor: float
    pass_floor: bool
    sup_g: float
    sup_ratio: float
    pass_sup: bool
    C: float
    epsilon: float

    @property
    def passed(self):
        return self.pass_shell and self.pass_floor and self.pass_sup

    def to_json(self):
        return json.dumps(
            {
                "C": self.C,
                "epsilon": self.epsilon,
                "min_hp_g_shell": self.min_hp_g_shell,
                "shell_nodes": self.shell_nodes,
                "pass_shell": self.pass_shell,
                "global_min_hp_g": self.global_min_hp_g,
                "global_floor": self.global_floor,
                "pass_floor": self.pass_floor,
                "sup_g": self.sup_g,
                "sup_ratio": self.sup_ratio,
                "pass_sup": self.pass_sup,
                "passed": self.passed,
            },
            indent=2,
        )


def verify_escape(
    field: EscapeField,
    model,
    trapped_points,
    C: float,
    delta0: float = 0.05,
    shell_mask=None,
    shell_threshold: float = None,
) -> EscapeReport:
    """Scan the escape inequalities on the sampled field.

    (i) min of Hp G over nodes with d(., trapped sample)^2 >= C eps
    (restricted to shell_mask when given) against the floor 1/C, or
    shell_threshold when supplied; (ii) global min against
    -delta0 log(1/eps); (iii) sup |G| against O(log(1/eps)).
    """
    eps = field.epsilon
    m = field.states.shape[0]
    pts = getattr(trapped_points, "points", trapped_points)
    pts = np.atleast_2d(np.asarray(pts, float)) if pts is not None else np.empty((0, 1))
    if pts.shape[0]:
        from scipy.spatial import cKDTree

        dist, _ = cKDTree(pts).query(field.states)
    else:
        dist = np.full(m, np.inf)
    qualifying = dist**2 >= C * eps
    if shell_mask is not None:
        qualifying &= np.asarray(shell_mask, bool)

    threshold = 1.0 / C if shell_threshold is None else shell_threshold
    if np.any(qualifying):
        min_shell = float(np.min(field.hp_G[qualifying]))
    else:
        min_shell = np.inf
    floor = -delta0 * np.log(1.0 / eps)
    gmin = float(np.min(field.hp_G))
    sup_g = float(np.max(np.abs(field.G)))
    ratio = sup_g / np.log(1.0 / eps)
    return EscapeReport(
        min_hp_g_shell=min_shell,
        shell_nodes=int(np.sum(qualifying)),
        pass_shell=bool(min_shell >= threshold),
        global_min_hp_g=gmin,
        global_floor=float(floor),
        pass_floor=bool(gmin >= floor),
        sup_g=sup_g,
        sup_ratio=float(ratio),
        pass_sup=bool(ratio <= 100.0),
        C=C,
        epsilon=eps,
    )


def log_regularity_fit(states, values, epsilon, rng, n_pairs=4000):
    """Least-squares exponent of the order-function bound.

    Fits |G(a) - G(b)| ~ log C0 + N0 log<(a - b)/sqrt(eps)> over random
    node pairs and returns (N0, C0).
    """
    states = np.atleast_2d(np.asarray(states, float))
    m = states.shape[0]
    i = rng.integers(0, m, n_pairs)
    j = rng.integers(0, m, n_pairs)
    keep = i != j
    i, j = i[keep], j[keep]
    sep = np.linalg.norm(states[i] - states[j], axis=1) / np.sqrt(epsilon)
    x = np.log(np.sqrt(1.0 + sep**2))
    y = np.abs(values[i] - values[j])
    good = x > 0.5
    slope, intercept = np.polyfit(x[good], y[good], 1)
    return float(slope), float(np.exp(intercept))
