"""Exception types shared across the package."""


class LocaldError(Exception):
    """Base class for package errors."""


class GraphError(LocaldError):
    """Malformed graph/hypergraph input or invalid vertex id."""


class IlpError(LocaldError):
    """Malformed ILP instance or assignment."""


class BruteForceCapExceeded(LocaldError):
    """A local solve was asked to enumerate more free variables than the cap allows."""


class InfeasibleError(LocaldError):
    """A covering instance (global or local) admits no feasible assignment."""


class InvariantViolation(LocaldError):
    """A guarantee that must hold on every run was observed to fail.

    Raised instead of silently producing output so that the offending seed is
    reproducible.
    """
