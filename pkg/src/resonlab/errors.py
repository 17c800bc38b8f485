"""Exception types shared across the package."""


class ResonlabError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedContinuation(ResonlabError):
    """Potential kind does not admit evaluation at complex arguments."""


class StepFailure(ResonlabError):
    """ODE integrator step size underflowed (stiff or singular input)."""


class EmptyCloud(ResonlabError):
    """Operation requires a nonempty point cloud."""


class EmptyTarget(ResonlabError):
    """Regularized distance needs a nonempty target set."""


class DegenerateLadder(ResonlabError):
    """Epsilon ladder too short or spanning less than one decade."""


class NegativeDimension(ResonlabError):
    """Minkowski dimension below 1 has no counting exponent."""


class BadParams(ResonlabError):
    """Parameters outside the admissible range."""


class ShapeMismatch(ResonlabError):
    """Field arrays do not share a common grid shape."""


class BadAngle(ResonlabError):
    """Scaling angle outside [0, pi/4]."""


class GridTooCoarse(ResonlabError):
    """Grid spacing exceeds h/4; discretization would alias the symbol."""


class ConvergenceFailure(ResonlabError):
    """Eigenvalue iteration did not converge within the cap."""


class SizeOverflow(ResonlabError):
    """Requested matrix exceeds the desk-scale guard."""


class DegenerateFit(ResonlabError):
    """Not enough distinct data points for a least-squares fit."""


class WindowOutsideComputedRegion(ResonlabError):
    """Counting disc extends beyond the region where spectra were computed."""


class DegenerateEnergySurface(ResonlabError):
    """dp vanishes somewhere on the requested energy surface."""


class UnknownArtifactKind(ResonlabError):
    """emit-plot does not recognize the artifact kind."""


class ConfigError(ResonlabError):
    """Experiment config failed schema validation."""
