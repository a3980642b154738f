"""Exception types shared across the package."""


class SwflowError(Exception):
    """Base class for all package-specific errors."""


class NonConvergence(SwflowError):
    """An iterative routine exhausted its iteration budget before reaching
    its tolerance (e.g. alternating-projection sweeps, inner prox solves)."""


class PointOutsideSet(SwflowError):
    """A query point violates a set-membership precondition."""


class NoProxOracle(SwflowError):
    """The requested proximal step has neither a closed form nor a
    convergent inner solve for this function/set combination."""


class LayoutMismatch(SwflowError):
    """A state vector or graph does not match the declared agent layout."""


class OracleUnavailable(SwflowError):
    """No minimizer description can be produced for this mode (too large
    or too irregular for the structural and numeric routes)."""


class AnchorNotInA(SwflowError):
    """A Lyapunov anchor fails the common-minimizer residual pre-check."""


class AnchorNotInAq(SwflowError):
    """A per-mode anchor fails the mode's minimizer residual pre-check."""


class AnchorNotZero(SwflowError):
    """A probe anchor is not a zero of the monotone map."""


class GridMismatch(SwflowError):
    """Two trajectories do not share the same time grid."""


class InitialConditionOutsideSet(SwflowError):
    """The initial state is infeasible for the mode active at t = 0."""


class ConfigInvalid(SwflowError):
    """A scenario configuration failed validation.

    Carries the path of the offending field (dotted keys / indices) so CLI
    errors point at the exact entry.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


class UnknownPreset(SwflowError):
    """Requested preset name is not registered."""
