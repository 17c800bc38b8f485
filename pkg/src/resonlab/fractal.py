"""Box-counting dimension estimation for sampled point sets."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLadder, EmptyCloud, NegativeDimension


@dataclass(frozen=True)
class PointCloud:
    """Points of shape (m, d) with an axis-aligned bounding box."""

    points: np.ndarray
    bounding_box: np.ndarray = None  # (d, 2) [min, max] per axis

    def __post_init__(self):
        pts = np.asarray(self.points, float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        object.__setattr__(self, "points", pts)
        if self.bounding_box is None and len(pts):
            bb = np.stack([pts.min(axis=0), pts.max(axis=0)], axis=1)
            object.__setattr__(self, "bounding_box", bb)

    @property
    def dim(self):
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    @property
    def diameter(self):
        if len(self.points) == 0:
            return 0.0
        span = self.bounding_box[:, 1] - self.bounding_box[:, 0]
        return float(np.linalg.norm(span))

    def translated(self, shift):
        return PointCloud(self.points + np.asarray(shift, float))


def box_count(cloud: PointCloud, eps: float) -> int:
    """Number of occupied cells of the eps-grid anchored at the box min corner."""
    if len(cloud) == 0:
        raise EmptyCloud("cannot box-count an empty cloud")
    if eps <= 0:
        raise ValueError("eps must be positive")
    anchor = cloud.bounding_box[:, 0]
    idx = np.floor((cloud.points - anchor) / eps).astype(np.int64)
    # points sitting exactly on the top face belong to the last cell
    top = np.floor((cloud.bounding_box[:, 1] - anchor) / eps).astype(np.int64)
    idx = np.minimum(idx, top)
    return int(len(np.unique(idx, axis=0)))


def box_count_randomized(cloud: PointCloud, eps: float, rng, n_offsets: int = 5) -> int:
    """Median count over random grid-anchor offsets; damps anchor artifacts."""
    counts = []
    for _ in range(n_offsets):
        shift = rng.uniform(0.0, eps, size=cloud.dim)
        shifted = PointCloud(cloud.points + shift, bounding_box=None)
        counts.append(box_count(shifted, eps))
    return int(np.median(counts))


def default_epsilon_ladder(cloud: PointCloud, rungs: int = 10, ratio: float = 2 ** -0.5):
    """Geometric ladder from diameter/8 downward."""
    start = cloud.diameter / 8.0
    if start <= 0:
        raise EmptyCloud("cloud has zero diameter")
    return start * ratio ** np.arange(rungs)


@dataclass(frozen=True)
class DimensionFit:
    """Least-squares slope of log N(eps) against log(1/eps)."""

    epsilons: np.ndarray
    counts: np.ndarray
    slope: float
    intercept: float
    r2: float
    dimension_estimate: float
    spacing_warning: bool = False
    caveat: str = "limsup-slope estimate from samples; pure dimension not certified"

    def to_json(self) -> str:
        return json.dumps(
            {
                "epsilons": list(map(float, self.epsilons)),
                "counts": list(map(int, self.counts)),
                "slope": self.slope,
                "intercept": self.intercept,
                "r2": self.r2,
                "dimension_estimate": self.dimension_estimate,
                "spacing_warning": self.spacing_warning,
                "caveat": self.caveat,
            },
            indent=2,
        )


def _median_nn_spacing(points):
    from scipy.spatial import cKDTree

    sub = points
    if len(sub) > 20000:
        sub = sub[:: len(sub) // 20000 + 1]
    tree = cKDTree(sub)
    d, _ = tree.query(sub, k=2)
    return float(np.median(d[:, 1]))


def fit_dimension(cloud: PointCloud, epsilon_ladder=None) -> DimensionFit:
    """Box-count over the ladder and fit the scaling exponent.

    Raises DegenerateLadder when fewer than 4 rungs are given or the
    ladder spans less than one decade.  Warns when the sample spacing is
    coarser than the finest rung (counts then saturate).
    """
    if epsilon_ladder is None:
        epsilon_ladder = default_epsilon_ladder(cloud)
    eps = np.sort(np.asarray(epsilon_ladder, float))[::-1]
    if len(eps) < 4:
        raise DegenerateLadder("need at least 4 ladder values")
    if eps[0] / eps[-1] < 10.0:
        raise DegenerateLadder("ladder must span at least one decade")

    spacing_warning = False
    if len(cloud) > 1:
        spacing = _median_nn_spacing(cloud.points)
        if spacing > eps[-1]:
            spacing_warning = True
            warnings.warn(
                "sample spacing exceeds the finest epsilon; counts saturate",
                stacklevel=2,
            )

    counts = np.array([box_count(cloud, e) for e in eps])
    x = np.log(1.0 / eps)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return DimensionFit(
        epsilons=eps,
        counts=counts,
        slope=float(slope),
        intercept=float(intercept),
        r2=r2,
        dimension_estimate=float(slope),
        spacing_warning=spacing_warning,
    )


def nu_from_dimension(m0: float) -> float:
    """Counting exponent (m0 - 1)/2 from a trapped-set dimension m0."""
    if m0 < 1.0:
        raise NegativeDimension(f"dimension {m0} below the one-orbit floor")
    return (m0 - 1.0) / 2.0
