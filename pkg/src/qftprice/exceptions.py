"""Exception hierarchy shared by the pricing, simulation and CLI layers."""


class QftPriceError(Exception):
    """Base class for all package errors."""


class ArgumentError(QftPriceError, ValueError):
    """An argument violates a documented precondition."""


class GridRangeError(ArgumentError):
    """A strike lies outside the log-strike grid."""


class ModelDomainError(QftPriceError, ArithmeticError):
    """A characteristic function was evaluated outside its strip of analyticity.

    Attributes
    ----------
    u : complex or None
        The offending argument, when known.
    alpha : float or None
        The dampening factor that produced ``u``, when known.
    """

    def __init__(self, message, u=None, alpha=None):
        self.u = u
        self.alpha = alpha
        parts = [message]
        if u is not None:
            parts.append(f"u={complex(u)!r}")
        if alpha is not None:
            parts.append(f"alpha={alpha!r}")
        super().__init__("; ".join(parts))
