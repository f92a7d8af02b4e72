"""Exception hierarchy shared by all modules."""


class TropMapsError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(TropMapsError, ValueError):
    pass


class InvalidEdgeError(InvalidInputError):
    pass


class InvalidFaceError(InvalidInputError):
    pass


class InvalidWeightError(InvalidInputError):
    pass


class ZeroClassError(InvalidInputError):
    """The vector lies in the lineality space, so it has no ray class."""


class UnsupportedError(TropMapsError):
    """Operation requested on an input shape it does not handle (e.g. non-simplicial cones)."""


class ResourceError(TropMapsError):
    """Input exceeds a size guard; the message says which limit and how to proceed."""


class NonRigidSectorError(InvalidInputError):
    pass


class GenericityError(InvalidInputError):
    pass


class SearchFailureError(TropMapsError):
    pass


class InternalConsistencyError(TropMapsError, AssertionError):
    """A correctness tripwire fired. This indicates a bug, not bad input."""
