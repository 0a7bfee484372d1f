"""Exception hierarchy shared across the package."""


class RephiError(Exception):
    """Base class for all package-specific errors."""


class BundleLoadError(RephiError):
    """A bundle file or blob is missing or unreadable."""


class BundleValidationError(RephiError):
    """A bundle, annotation set, or result row violates a declared invariant."""


class SpanError(BundleValidationError):
    """A token span is inverted or out of range."""


class DegenerateNodeError(RephiError):
    """A reduced-series node has zero variance and cannot be binarized."""

    def __init__(self, node_index: int):
        super().__init__(f"node {node_index} has zero variance")
        self.node_index = node_index


class DegenerateRepertoireError(RephiError):
    """Conditioning on the current state leaves zero probability mass."""


class NetworkInitializationError(RephiError):
    """The TPM cannot support a valid cause-effect analysis (sample invalid)."""


class MarkovTestUndefinedError(RephiError):
    """Too few distinct transitions to run the order test (sample invalid)."""
