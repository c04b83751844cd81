"""Exception hierarchy shared by the numerical modules and the CLI."""


class BoxctlError(Exception):
    """Base class for numerical failures reported with exit status 3."""

    def payload(self) -> dict:
        return {"error": type(self).__name__, "message": str(self)}


class DegenerateSpectrumError(BoxctlError, ValueError):
    """A rank needed for a strict ordering is tied with a neighbour."""


class PropagationError(BoxctlError, RuntimeError):
    """Time stepping lost unitarity or the linear solve failed."""


class TruncationError(PropagationError):
    """Population leaked into the top of the Galerkin basis."""


class ControlSynthesisError(BoxctlError, RuntimeError):
    """The control chain could not produce an admissible shape law."""


class BracketError(BoxctlError, ValueError):
    """A bisection was asked to search an interval that does not bracket the target."""
