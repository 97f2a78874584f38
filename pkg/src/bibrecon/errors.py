"""Error classes shared by the source adapters and the service layer."""
from __future__ import annotations


class AdapterError(Exception):
    """Base class for source adapter failures."""

    retryable = False


class NetworkFailure(AdapterError):
    """Transport-level failure (connection error, timeout, 5xx)."""

    retryable = True


class RateLimited(AdapterError):
    """The source asked us to back off (HTTP 429 or equivalent)."""

    retryable = True


class AuthFailure(AdapterError):
    """Missing or invalid credentials; retrying cannot help."""

    retryable = False


class MalformedResponse(AdapterError):
    """The source returned a payload we cannot map; carries a snippet for diagnostics."""

    retryable = False

    def __init__(self, message: str, payload_snippet: str = ""):
        super().__init__(message)
        self.payload_snippet = payload_snippet[:500]


class NotFound(AdapterError):
    """No record exists for the requested id."""

    retryable = False


class UnknownSource(AdapterError):
    """The requested source is not configured."""

    retryable = False


class ExhaustedRetries(AdapterError):
    """All retry attempts failed; wraps the last underlying error."""

    retryable = False

    def __init__(self, attempts: int, last_error: AdapterError):
        super().__init__(f"gave up after {attempts} attempts: {last_error}")
        self.attempts = attempts
        self.last_error = last_error
