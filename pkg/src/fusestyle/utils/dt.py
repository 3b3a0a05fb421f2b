"""Datetime helpers built on pendulum.

All timestamps written by fusestyle (metrics records, checkpoint metadata,
timing reports) are timezone-aware UTC. Pendulum is used internally; callers
get standard datetime objects.
"""

from datetime import datetime

import pendulum


def now() -> datetime:
    """
    Get current UTC time (timezone-aware).

    Returns:
        Current datetime in UTC

    Example:
        >>> now().tzinfo is not None
        True
    """
    return pendulum.now("UTC")


def to_iso(moment: datetime) -> str:
    """
    Format datetime as an ISO 8601 string.

    Args:
        moment: Datetime to format (naive values are taken as UTC)

    Returns:
        ISO 8601 formatted string

    Example:
        >>> to_iso(pendulum.datetime(2026, 1, 2, 15, 30))
        '2026-01-02T15:30:00Z'
    """
    return pendulum.instance(moment, tz="UTC").in_timezone("UTC").to_iso8601_string()


def elapsed(start: datetime, end: datetime | None = None) -> str:
    """
    Human-readable duration between two moments, e.g. "3 minutes".

    Args:
        start: Earlier moment
        end: Later moment (defaults to now)
    """
    stop = pendulum.instance(end) if end is not None else pendulum.now("UTC")
    return pendulum.instance(start).diff(stop).in_words()
