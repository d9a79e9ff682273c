"""Exception hierarchy shared across the package."""


class CoopfluxError(Exception):
    """Base class for all errors raised by coopflux."""


class NetworkError(CoopfluxError, ValueError):
    pass


class SelfEdge(NetworkError):
    pass


class DuplicateEdge(NetworkError):
    pass


class UnknownNode(NetworkError, KeyError):
    pass


class EmptyNetwork(NetworkError):
    pass


class TooFewTargets(NetworkError):
    pass


class TooManyEdges(NetworkError):
    pass


class DegenerateDegree(CoopfluxError, ValueError):
    pass


class InvalidParams(CoopfluxError, ValueError):
    pass


class SeriesTooShort(CoopfluxError, ValueError):
    pass


class MismatchedGrids(CoopfluxError, ValueError):
    pass


class InvalidCounts(CoopfluxError, ValueError):
    pass


class TooFewSamples(CoopfluxError, ValueError):
    pass


class InvalidConfig(CoopfluxError, ValueError):
    pass


class IoFailure(CoopfluxError, OSError):
    pass
