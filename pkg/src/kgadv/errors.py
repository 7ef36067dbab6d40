"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or inconsistent dataset input."""


class NumericError(Exception):
    """Non-finite values encountered during optimization."""


class SamplingExhausted(Exception):
    """Negative sampler could not avoid known-true triples.

    Carries the last candidate so callers may accept a possibly-true
    corruption instead of failing.
    """

    def __init__(self, message, candidate):
        super().__init__(message)
        self.candidate = candidate
