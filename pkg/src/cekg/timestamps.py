"""Timestamp normalization.

Every timestamp stored in a graph is UTC with millisecond precision.  Naive
input timestamps are interpreted as UTC; zoned ones are converted.
"""

from __future__ import annotations

from datetime import datetime, timezone


def to_utc(value: datetime) -> datetime:
    """Normalize a datetime to UTC, truncated to millisecond precision."""
    if value.tzinfo is None:
        value = value.replace(tzinfo=timezone.utc)
    else:
        value = value.astimezone(timezone.utc)
    return value.replace(microsecond=value.microsecond - value.microsecond % 1000)


def parse_timestamp(text: str) -> datetime:
    """Parse an ISO-8601 timestamp and normalize it with :func:`to_utc`.

    Accepts a trailing ``Z`` offset, which ``datetime.fromisoformat`` on
    Python 3.10 does not.  Raises ``ValueError`` on malformed input.
    """
    cleaned = text.strip()
    if cleaned.endswith(("Z", "z")):
        cleaned = cleaned[:-1] + "+00:00"
    return to_utc(datetime.fromisoformat(cleaned))


def format_timestamp(value: datetime) -> str:
    """Render a normalized timestamp as ISO-8601 with milliseconds."""
    return to_utc(value).isoformat(timespec="milliseconds")
