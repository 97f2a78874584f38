"""Per-source token-bucket throttling and retry with backoff.

External bibliographic APIs are the weak link of the whole pipeline, so every
adapter call is funneled through one of these: a token bucket smooths the
request rate and retryable failures are retried with exponential backoff and
full jitter.
"""
from __future__ import annotations

import logging
import random
import threading
import time
from typing import Callable, TypeVar

from .errors import AdapterError, ExhaustedRetries

logger = logging.getLogger(__name__)

T = TypeVar("T")


class TokenBucket:
    """Classic token bucket: ``rate`` tokens/second, up to ``burst`` banked.

    acquire() blocks (via the injected sleep) until a token is available.
    Thread-safe; token accounting is serialized on an internal lock.
    """

    def __init__(
        self,
        rate: float = 5.0,
        burst: int = 5,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError("rate must be positive")
        if burst < 1:
            raise ValueError("burst must be >= 1")
        self.rate = rate
        self.burst = burst
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._updated = clock()
        self._lock = threading.Lock()

    def _refill(self) -> None:
        now = self._clock()
        self._tokens = min(
            float(self.burst), self._tokens + (now - self._updated) * self.rate
        )
        self._updated = now

    def acquire(self) -> float:
        """Take one token, waiting if the bucket is empty. Returns the wait."""
        waited = 0.0
        while True:
            with self._lock:
                self._refill()
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return waited
                shortfall = (1.0 - self._tokens) / self.rate
            self._sleep(shortfall)
            waited += shortfall


class RetryPolicy:
    """Retry retryable AdapterErrors with exponential backoff and full jitter."""

    def __init__(
        self,
        max_retries: int = 3,
        base_delay: float = 0.5,
        factor: float = 2.0,
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ):
        self.max_retries = max_retries
        self.base_delay = base_delay
        self.factor = factor
        self._sleep = sleep
        self._rng = rng or random.Random()

    def run(self, name: str, request: Callable[[], T]) -> T:
        """Invoke ``request``; retry up to max_retries on retryable errors.

        Non-retryable errors propagate immediately. When retries run out the
        last error is wrapped in ExhaustedRetries.
        """
        last_error: AdapterError | None = None
        for attempt in range(self.max_retries + 1):
            try:
                return request()
            except AdapterError as err:
                if not err.retryable:
                    raise
                last_error = err
                if attempt == self.max_retries:
                    break
                # full jitter: sleep uniformly within the backoff window
                ceiling = self.base_delay * (self.factor**attempt)
                delay = self._rng.uniform(0.0, ceiling)
                logger.warning(
                    "%s: retryable failure (%s), retry %d/%d after %.3fs",
                    name,
                    err,
                    attempt + 1,
                    self.max_retries,
                    delay,
                )
                self._sleep(delay)
        assert last_error is not None
        raise ExhaustedRetries(self.max_retries + 1, last_error)


class Throttle:
    """Bundles the per-source bucket and retry policy behind one call."""

    def __init__(self, name: str, bucket: TokenBucket, retry: RetryPolicy):
        self.name = name
        self.bucket = bucket
        self.retry = retry

    def call(self, request: Callable[[], T]) -> T:
        def throttled() -> T:
            self.bucket.acquire()
            return request()

        return self.retry.run(self.name, throttled)
