from __future__ import annotations

import random

import pytest

from bibrecon.errors import AuthFailure, ExhaustedRetries, RateLimited
from bibrecon.ratelimit import RetryPolicy, Throttle, TokenBucket


class FakeClock:
    """Manual clock; sleep() advances it, so waits are observable and instant."""

    def __init__(self):
        self.now = 0.0
        self.sleeps: list[float] = []

    def __call__(self) -> float:
        return self.now

    def sleep(self, seconds: float) -> None:
        self.sleeps.append(seconds)
        self.now += seconds


def make_bucket(rate=5.0, burst=5):
    clock = FakeClock()
    bucket = TokenBucket(rate=rate, burst=burst, clock=clock, sleep=clock.sleep)
    return bucket, clock


class TestTokenBucket:
    def test_burst_passes_without_waiting(self):
        bucket, clock = make_bucket()
        for _ in range(5):
            assert bucket.acquire() == 0.0
        assert clock.sleeps == []

    def test_sixth_instantaneous_request_waits_at_least_200ms(self):
        bucket, clock = make_bucket(rate=5.0, burst=5)
        for _ in range(5):
            bucket.acquire()
        waited = bucket.acquire()
        assert waited >= 0.2

    def test_tokens_refill_over_time(self):
        bucket, clock = make_bucket(rate=5.0, burst=5)
        for _ in range(5):
            bucket.acquire()
        clock.now += 1.0  # a second refills all five
        for _ in range(5):
            assert bucket.acquire() == 0.0

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            TokenBucket(rate=0)
        with pytest.raises(ValueError):
            TokenBucket(burst=0)


class TestRetryPolicy:
    def make_policy(self, **kwargs):
        clock = FakeClock()
        policy = RetryPolicy(sleep=clock.sleep, rng=random.Random(7), **kwargs)
        return policy, clock

    def test_retries_then_succeeds(self):
        policy, clock = self.make_policy()
        attempts = {"n": 0}

        def flaky():
            attempts["n"] += 1
            if attempts["n"] <= 2:
                raise RateLimited("slow down")
            return "ok"

        assert policy.run("test", flaky) == "ok"
        assert attempts["n"] == 3
        assert len(clock.sleeps) == 2

    def test_non_retryable_propagates_immediately(self):
        policy, clock = self.make_policy()
        attempts = {"n": 0}

        def denied():
            attempts["n"] += 1
            raise AuthFailure("bad key")

        with pytest.raises(AuthFailure):
            policy.run("test", denied)
        assert attempts["n"] == 1
        assert clock.sleeps == []

    def test_exhausted_retries_wraps_last_error(self):
        policy, clock = self.make_policy(max_retries=3)

        def always_limited():
            raise RateLimited("never stops")

        with pytest.raises(ExhaustedRetries) as exc_info:
            policy.run("test", always_limited)
        assert exc_info.value.attempts == 4
        assert isinstance(exc_info.value.last_error, RateLimited)
        assert len(clock.sleeps) == 3

    def test_backoff_windows_grow_exponentially(self):
        clock = FakeClock()
        # rng returning the ceiling makes the window growth observable
        class TopRng(random.Random):
            def uniform(self, a, b):
                return b

        policy = RetryPolicy(
            max_retries=3, base_delay=0.5, factor=2.0, sleep=clock.sleep, rng=TopRng()
        )
        with pytest.raises(ExhaustedRetries):
            policy.run("test", lambda: (_ for _ in ()).throw(RateLimited("x")))
        assert clock.sleeps == [0.5, 1.0, 2.0]


class TestThrottle:
    def test_throttle_combines_bucket_and_retry(self):
        bucket, clock = make_bucket()
        policy = RetryPolicy(sleep=clock.sleep, rng=random.Random(1))
        throttle = Throttle("test", bucket, policy)
        calls = {"n": 0}

        def once_limited():
            calls["n"] += 1
            if calls["n"] == 1:
                raise RateLimited("first call fails")
            return 42

        assert throttle.call(once_limited) == 42
        assert calls["n"] == 2
