"""Exception types shared across the toolkit."""


class SpecValidationError(ValueError):
    """A set specification is degenerate or inconsistent."""


class OracleUnavailableError(ValueError):
    """No closed-form Green's function for this set; use the nodal estimator."""


class MeshAdequacyError(ValueError):
    """Mesh resolution or size is inadequate for the requested computation."""


class DegreeError(ValueError):
    """Requested polynomial degree is not reachable on this mesh.

    ``achieved`` holds the largest degree that was still well conditioned.
    """

    def __init__(self, message: str, achieved: int = -1):
        super().__init__(message)
        self.achieved = achieved


class WindowError(ValueError):
    """A level set left the sampled window; retry with ``suggested_halfwidth``."""

    def __init__(self, message: str, suggested_halfwidth: float = 0.0):
        super().__init__(message)
        self.suggested_halfwidth = suggested_halfwidth
