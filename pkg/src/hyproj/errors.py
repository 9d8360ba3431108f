"""Exception types shared across the package."""


class InvalidParams(ValueError):
    """Model parameters violate a structural constraint (e.g. q > p, n < d)."""


class DegenerateNoise(ValueError):
    """Noise rates sit on a boundary (q in {0,1} or p = 1) where likelihood
    edge factors are undefined or infinite."""


class ThresholdOverflow(OverflowError):
    """A threshold formula is not finitely representable even in log domain."""


class BudgetExceeded(RuntimeError):
    """An enumeration or trial budget was exceeded."""


class CliqueBudgetExceeded(BudgetExceeded):
    """Clique listing would emit more cliques than the configured cap."""


class UnsupportedRegime(ValueError):
    """Region classification requested outside the p = Theta(1) regime."""


class UnsupportedArity(ValueError):
    """Hyperedge arity outside the supported range for this operation."""


class ZeroEvidence(RuntimeError):
    """The observed graph has probability zero under the model (possible only
    with degenerate p, q)."""
