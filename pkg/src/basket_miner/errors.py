"""Exception types shared across the package."""


class BasketMinerError(Exception):
    """Base class for all package-specific errors."""


class InsufficientDataError(BasketMinerError):
    """Too few observations (or days) for the requested computation."""


class DegenerateSeriesError(BasketMinerError):
    """A series is constant, so variance-based estimators are undefined."""


class DegenerateStockError(DegenerateSeriesError):
    """A stock's increments have zero variance over the period."""

    def __init__(self, symbol, message=None):
        self.symbol = symbol
        super().__init__(message or f"stock {symbol}: zero-variance increments")


class ContractViolationError(BasketMinerError):
    """An argument breaks a documented precondition (shape, symmetry, ...)."""


class UnsupportedSizeError(BasketMinerError):
    """The requested sample size is outside what the generator supports."""


class EmbeddingFailureError(BasketMinerError):
    """Circulant spectral embedding produced negative eigenvalues."""

    def __init__(self, hurst, n):
        self.hurst = hurst
        self.n = n
        super().__init__(
            f"circulant embedding failed for H={hurst}, n={n}: negative spectrum"
        )
