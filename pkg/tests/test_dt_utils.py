"""Tests for datetime utilities."""

from datetime import UTC, datetime, timedelta

import pendulum
from hypothesis import given
from hypothesis import strategies as st

from fusestyle.utils.dt import elapsed, now, to_iso


def get_tzname(dt: datetime) -> str:
    """Get timezone name, asserting tzinfo is not None."""
    assert dt.tzinfo is not None, "datetime must be timezone-aware"
    return dt.tzinfo.tzname(dt)  # type: ignore[return-value]


class TestNow:
    """Tests for now() function."""

    def test_returns_datetime(self):
        """Should return datetime object."""
        assert isinstance(now(), datetime)

    def test_is_utc(self):
        """Should return UTC timezone."""
        assert get_tzname(now()) == "UTC"

    def test_close_to_current_time(self):
        """Should return time close to actual current time."""
        before = datetime.now(UTC)
        result = now()
        after = datetime.now(UTC)

        assert before <= result <= after


class TestToIso:
    """Tests for to_iso() function."""

    def test_formats_to_iso8601(self):
        """Should format datetime as ISO 8601 string."""
        result = to_iso(datetime(2026, 1, 2, 15, 30, 0, tzinfo=UTC))

        assert result == "2026-01-02T15:30:00Z"

    def test_converts_offsets_to_utc(self):
        """Should express aware datetimes in UTC."""
        moment = pendulum.datetime(2026, 1, 2, 15, 30, tz="Europe/Moscow")

        assert to_iso(moment) == "2026-01-02T12:30:00Z"

    def test_handles_naive_datetime(self):
        """Should treat naive datetimes as UTC."""
        assert to_iso(datetime(2026, 1, 2, 15, 30, 0)) == "2026-01-02T15:30:00Z"

    @given(st.datetimes(min_value=datetime(1971, 1, 1), max_value=datetime(2200, 1, 1)))
    def test_parses_back(self, moment):
        """Should produce strings datetime.fromisoformat reads back to the same instant."""
        aware = moment.replace(tzinfo=UTC)
        assert datetime.fromisoformat(to_iso(aware)) == aware


class TestElapsed:
    """Tests for elapsed() function."""

    def test_describes_duration(self):
        """Should describe the duration in words."""
        start = datetime(2026, 1, 1, 0, 0, 0, tzinfo=UTC)
        end = start + timedelta(minutes=3, seconds=5)

        assert elapsed(start, end) == "3 minutes 5 seconds"

    def test_defaults_to_now(self):
        """Should measure up to the current time when no end is given."""
        start = datetime.now(UTC) - timedelta(hours=2)

        assert elapsed(start).startswith("2 hours")
