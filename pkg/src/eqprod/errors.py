"""Shared exception types."""


class DomainError(ValueError):
    """A required quantity vanishes or an input leaves the op's domain.

    The message names the offending quantity, e.g. "k must be nonzero".
    """


class DegenerateSet(DomainError):
    """A triple set violates the equal-sum / equal-product constraints."""


class SingularCurve(DomainError):
    """A Weierstrass equation with discriminant zero."""


class IncompleteFactorization(RuntimeError):
    """The factoring budget ran out and the caller needs the missing primes."""
