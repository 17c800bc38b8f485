"""Dense non-Hermitian eigensolves and two-angle resonance filtering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceFailure

DESK_SCALE_N = 4000


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of a dense matrix, ordered by (Re, Im).

    residual_norms are ||A v - lambda v|| / ||A||_F per pair, filled only
    when eigenvectors were requested.
    """

    eigenvalues: np.ndarray
    matrix_norm: float
    residual_norms: np.ndarray = None


def eigenvalues(a, compute_vectors: bool = False) -> Spectrum:
    """Full spectrum via LAPACK's Hessenberg + shifted-QR path (zgeev)."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if a.shape[0] > DESK_SCALE_N:
        raise ValueError(f"N = {a.shape[0]} exceeds the desk-scale guard")
    norm = float(np.linalg.norm(a))
    try:
        if compute_vectors:
            vals, vecs = np.linalg.eig(a)
        else:
            vals = np.linalg.eigvals(a)
            vecs = None
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    order = np.lexsort((vals.imag, vals.real))
    vals = vals[order]
    residuals = None
    if vecs is not None:
        vecs = vecs[:, order]
        r = a @ vecs - vecs * vals[None, :]
        residuals = np.linalg.norm(r, axis=0) / max(norm, 1e-300)
    return Spectrum(eigenvalues=vals, matrix_norm=norm, residual_norms=residuals)


@dataclass(frozen=True)
class Window:
    """Axis-aligned rectangle in the complex plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z):
        z = np.asarray(z)
        return (
            (z.real >= self.re_min)
            & (z.real <= self.re_max)
            & (z.imag >= self.im_min)
            & (z.imag <= self.im_max)
        )

    def contains_disc(self, center, radius):
        return (
            center.real - radius >= self.re_min
            and center.real + radius <= self.re_max
            and abs(center.imag) + radius <= max(abs(self.im_min), abs(self.im_max))
            and center.imag - radius >= self.im_min
            and center.imag + radius <= self.im_max
        )


@dataclass(frozen=True)
class Provenance:
    h: float
    theta1: float
    theta2: float
    tol: float


@dataclass(frozen=True)
class ResonanceSet:
    """theta-stable eigenvalues inside a window, with match distances."""

    resonances: np.ndarray
    window: Window
    provenance: Provenance
    match_dists: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self):
        return len(self.resonances)

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("h,theta1,theta2,re_z,im_z,match_dist\n")
            p = self.provenance
            for z, d in zip(self.resonances, self.match_dists):
                fh.write(
                    f"{p.h:.17g},{p.theta1:.17g},{p.theta2:.17g},"
                    f"{z.real:.17g},{z.imag:.17g},{d:.17g}\n"
                )


def filter_resonances(spec1: Spectrum, spec2: Spectrum, window: Window, tol: float) -> ResonanceSet:
    """Keep window eigenvalues of spec1 having a partner in spec2 within tol.

    Operationalizes theta-independence: rotated-continuum branches and
    boundary artifacts move with the angle and drop out.
    """
    z1 = spec1.eigenvalues[window.contains(spec1.eigenvalues)]
    z2 = spec2.eigenvalues
    kept = []
    dists = []
    if len(z1) and len(z2):
        from scipy.spatial import cKDTree

        tree = cKDTree(np.stack([z2.real, z2.imag], axis=1))
        d, _ = tree.query(np.stack([z1.real, z1.imag], axis=1), k=1)
        for z, dist in zip(z1, d):
            if dist <= tol:
                kept.append(z)
                dists.append(dist)
    # dedupe: collapse pairs closer than 1e-10
    kept_arr = []
    dist_arr = []
    for z, dist in sorted(zip(kept, dists), key=lambda t: (t[0].real, t[0].imag)):
        if kept_arr and abs(z - kept_arr[-1]) <= 1e-10:
            continue
        kept_arr.append(z)
        dist_arr.append(dist)
    return ResonanceSet(
        resonances=np.asarray(kept_arr, complex),
        window=window,
        provenance=Provenance(h=np.nan, theta1=np.nan, theta2=np.nan, tol=tol),
        match_dists=np.asarray(dist_arr, float),
    )


def with_provenance(rs: ResonanceSet, h, theta1, theta2) -> ResonanceSet:
    return ResonanceSet(
        resonances=rs.resonances,
        window=rs.window,
        provenance=Provenance(h=h, theta1=theta1, theta2=theta2, tol=rs.provenance.tol),
        match_dists=rs.match_dists,
    )


def resonance_free_check(rs: ResonanceSet, M: float, h: float):
    """True when no resonance lies in the closed disc D(0, M h log(1/h)).

    Returns (verdict, margin); margin is the gap between the nearest
    resonance and the disc boundary (inf when the set is empty).
    """
    radius = M * h * np.log(1.0 / h)
    if len(rs) == 0:
        return True, np.inf
    dist = np.min(np.abs(rs.resonances))
    return bool(dist > radius), float(dist - radius)
