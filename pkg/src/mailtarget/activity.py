"""Per-user activity scoring from most-recent behavior.

The score is a linear recency ramp over a scoring window: 1.0 for activity on
the reference day, 0.0 for activity on the window's oldest day, and ineligible
(None) for anything older. Only the three tracked behaviors count; the kind of
activity never changes the score, only the recorded `last_kind`.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date, timedelta

from .ingest import ActivityKind, Corpus

DEFAULT_WINDOW_DAYS = 90

# Same-day ties keep the most commitment-heavy behavior as last_kind.
_KIND_PRIORITY = {ActivityKind.APPLY: 3, ActivityKind.SEARCH: 2, ActivityKind.RESUME_UPDATE: 1}


@dataclass(frozen=True)
class ActivityProfile:
    """A user's most recent qualifying activity."""

    user_id: str
    category: int
    last_active: date
    last_kind: ActivityKind


@dataclass(frozen=True)
class ScoringWindow:
    """The scoring interval: `oldest` is the eligibility cutoff, `today` the run date."""

    today: date
    oldest: date

    def __post_init__(self):
        if self.oldest >= self.today:
            raise ValueError(f"window oldest ({self.oldest}) must be before today ({self.today})")

    @classmethod
    def ending(cls, today: date, window_days: int = DEFAULT_WINDOW_DAYS) -> "ScoringWindow":
        if window_days <= 0:
            raise ValueError(f"window_days must be positive, got {window_days}")
        return cls(today=today, oldest=today - timedelta(days=window_days))

    @property
    def length_days(self) -> int:
        return (self.today - self.oldest).days


@dataclass(frozen=True)
class ActivityScore:
    user_id: str
    value: float


def compute_activity_score(profile: ActivityProfile, window: ScoringWindow) -> ActivityScore | None:
    """Score a profile's recency within the window; None when ineligible.

    The score is 1 - (today - last_active) / (today - oldest), computed as a
    single division so boundary values are exactly 1.0 and 0.0. Users last
    active before the window's oldest date are ineligible, a normal outcome.
    """
    days_above_cutoff = (profile.last_active - window.oldest).days
    if days_above_cutoff < 0:
        return None
    if profile.last_active > window.today:
        raise ValueError(f"user {profile.user_id!r} last active {profile.last_active}, after today {window.today}")
    return ActivityScore(profile.user_id, days_above_cutoff / window.length_days)


def build_activity_profiles(corpus: Corpus) -> list[ActivityProfile]:
    """One profile per user with at least one activity event, sorted by user id.

    last_active is the user's maximum event date; same-day ties pick the
    highest-priority kind (apply > search > resume_update) for last_kind only.
    """
    best: dict[str, tuple[date, int, ActivityKind]] = {}
    for event in corpus.activity:
        key = (event.date, _KIND_PRIORITY[event.kind], event.kind)
        current = best.get(event.user_id)
        if current is None or key[:2] > current[:2]:
            best[event.user_id] = key
    return [
        ActivityProfile(user_id, corpus.users[user_id].category, last_active, kind)
        for user_id, (last_active, _, kind) in sorted(best.items())
    ]
