"""Exception hierarchy for bhflow."""


class BhflowError(Exception):
    """Base class for all bhflow errors."""


class UnrepresentablePointError(BhflowError):
    """A chart transition was requested at a point where the pivot
    homogeneous coordinate (nearly) vanishes."""


class DegenerateJacobianError(BhflowError):
    """A real-linear map that must be inverted is (numerically) singular."""


class FlowError(BhflowError):
    """Trajectory integration failed: step budget exhausted, the solver
    reported failure, or the transported Jacobian became ill-conditioned."""


class NearCurveError(BhflowError):
    """An operation that needs the meromorphic form directly was invoked
    too close to the anticanonical curve."""


class CurveError(BhflowError):
    """Curve diagnostics could not run: Newton non-convergence, a
    (nearly) singular section differential, or a degenerate divisor."""


class QuadratureError(BhflowError):
    """Surface-integral quadrature did not converge under refinement."""


class ConfigError(BhflowError):
    """Invalid run configuration (unknown key, bad value, bad shape)."""
