"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the physically admissible domain."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its accuracy target."""


class SingularPointError(NumericalError):
    """Evaluation requested exactly at a gap-closing / singular point."""
