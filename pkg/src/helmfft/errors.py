"""Exception types shared across the solver stack."""


class UnsupportedSchemeError(ValueError):
    """Scheme constraints violated (e.g. sixth order on an anisotropic grid)."""


class InvalidPartitionError(ValueError):
    """Requested more parts than there are indices to distribute."""


class SingularSystemError(ArithmeticError):
    """A spectral tridiagonal system hit a vanishing pivot (near-resonance).

    Carries the 1-based sine-mode pair (n, m) of the offending system when
    raised from a batched solve; both are None for a standalone system.
    """

    def __init__(self, message, n=None, m=None):
        super().__init__(message)
        self.n = n
        self.m = m


class ExchangeError(RuntimeError):
    """Block redistribution failed; names the (sender, receiver) edge."""

    def __init__(self, message, sender=None, receiver=None):
        super().__init__(message)
        self.sender = sender
        self.receiver = receiver
