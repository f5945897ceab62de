"""Exception types shared across the package."""


class IotAdminError(Exception):
    """Base class for package errors."""


class DegenerateInputError(IotAdminError, ValueError):
    """Input is structurally valid but carries no usable signal (e.g. all whitespace, zero vector)."""


class IntegrityError(IotAdminError, ValueError):
    """Data violates a structural contract (dimension mismatch, malformed payload, bad schema)."""


class CapabilityError(IotAdminError, RuntimeError):
    """A remote endpoint does not support the requested operation."""


class TransportError(IotAdminError, RuntimeError):
    """A remote call failed after exhausting retries."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempt(s))")
        self.attempts = attempts


class StoreFormatError(IotAdminError, ValueError):
    """A persisted store file is corrupt; carries the first offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ConfigurationError(IotAdminError, ValueError):
    """Invalid or incomplete runtime configuration; names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
