"""Exception types shared across the library."""


class WgError(Exception):
    """Base class for all library errors."""


class ValidationError(WgError):
    """Malformed input: bad letters, bad text formats, illegal parameters."""


class SizeLimitError(WgError):
    """A requested computation exceeds the configured desk-scale limits."""


class DimensionError(WgError):
    """Operands have incompatible sizes (ground sets or word lengths)."""


class MembershipError(WgError):
    """A partition is not a member of the required family."""


class EmptyInputError(WgError):
    """An operation that needs at least one element received none."""


class SingularGramError(WgError):
    """The Gram matrix is not invertible at the requested (category, k, n)."""

    def __init__(self, category, k, n):
        self.category = category
        self.k = k
        self.n = n
        super().__init__(
            f"Gram matrix is singular for (cat={category.value}, k={k}, n={n})"
        )
