"""Exceptions shared by the generators and the command line."""


class ConfigError(ValueError):
    """A configuration violates an invariant; the message names it."""


class Stagnation(RuntimeError):
    """Sequential placement ran out of attempts or time.

    ``placed`` maps phase name to the number of inclusions placed so far and
    ``partial`` holds the incomplete sample.
    """

    def __init__(self, message, placed=None, partial=None, attempts=0, elapsed=0.0):
        super().__init__(message)
        self.placed = dict(placed or {})
        self.partial = partial
        self.attempts = attempts
        self.elapsed = elapsed


class NonConvergence(RuntimeError):
    """Relaxation did not reach a contact-free state within its step limit."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class IntegrationError(FloatingPointError):
    """The dynamics produced non-finite values."""
