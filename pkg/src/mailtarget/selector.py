"""Score candidate emails and pick the send batch for one window under a budget.

A candidate's combined score is the product of the user's activity score and
the mean transition probability from the user's category to each item's
category. Selection keeps one candidate per user, drops anything under the
threshold, and takes the top scores up to the budget with deterministic
tie-breaking (ascending user id). The baseline selector models the control
system: every user gets their own category's items, no activity filter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .activity import ActivityProfile, ScoringWindow, compute_activity_score
from .ingest import Corpus, ItemRecord
from .trends import TransitionGraph

DEFAULT_THRESHOLD = 0.05
DEFAULT_ITEMS_PER_EMAIL = 10

CANDIDATES_HEADER = ["user_id", "item_ids"]
PLAN_HEADER = ["window_id", "user_id", "item_ids", "activity", "affinity", "combined"]
ITEM_SEPARATOR = ";"


@dataclass(frozen=True)
class CandidateList:
    """One upstream-recommended email: an ordered, duplicate-free item list for a user."""

    user_id: str
    items: tuple[ItemRecord, ...]
    source: str = ""

    def __post_init__(self):
        if not self.items:
            raise ValueError(f"candidate list for user {self.user_id!r} has no items")
        ids = [item.item_id for item in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError(f"candidate list for user {self.user_id!r} repeats an item")

    def item_ids(self) -> tuple[str, ...]:
        return tuple(item.item_id for item in self.items)


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: CandidateList
    activity: float
    affinity: float
    combined: float


@dataclass(frozen=True)
class BatchPlan:
    """The selected sends for one window: at most `budget`, one per user."""

    window_id: date
    selections: tuple[ScoredCandidate, ...]
    budget: int
    threshold: float


def score_candidate(
    candidate: CandidateList,
    profiles: dict[str, ActivityProfile],
    graph: TransitionGraph,
    window: ScoringWindow,
) -> ScoredCandidate | None:
    """Combine activity and list affinity; None when the user has no score in the window."""
    profile = profiles.get(candidate.user_id)
    if profile is None:
        return None
    score = compute_activity_score(profile, window)
    if score is None:
        return None
    affinity = sum(graph.probability(profile.category, item.category) for item in candidate.items) / len(candidate.items)
    return ScoredCandidate(candidate, score.value, affinity, score.value * affinity)


def select_batch(
    scored: list[ScoredCandidate], budget: int, threshold: float, window_id: date
) -> BatchPlan:
    """Pick the top-budget candidates at or above the threshold, one per user.

    Per user, the best candidate wins (score ties go to the lexicographically
    smallest item-id sequence, then source). Globally, rows are ordered by
    combined score descending with ascending user id breaking ties, and the
    budget takes a prefix of that order, so a larger budget only appends.
    """
    if budget < 0:
        raise ValueError(f"budget must be non-negative, got {budget}")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")

    best_per_user: dict[str, ScoredCandidate] = {}
    for entry in scored:
        user_id = entry.candidate.user_id
        current = best_per_user.get(user_id)
        if current is None or _per_user_rank(entry) < _per_user_rank(current):
            best_per_user[user_id] = entry

    eligible = [entry for entry in best_per_user.values() if entry.combined >= threshold]
    eligible.sort(key=lambda entry: (-entry.combined, entry.candidate.user_id))
    return BatchPlan(window_id, tuple(eligible[:budget]), budget, threshold)


def _per_user_rank(entry: ScoredCandidate):
    return (-entry.combined, entry.candidate.item_ids(), entry.candidate.source)


def baseline_select(
    corpus: Corpus, window_id: date, items_per_email: int = DEFAULT_ITEMS_PER_EMAIL
) -> BatchPlan:
    """Control policy: email every user up to k of their own category's items.

    No activity filter and no scoring; users whose category has no items are
    omitted. Each email takes the k smallest item ids in the user's category.
    Selections carry 0.0 for all three scores since the control never scores.
    """
    if items_per_email <= 0:
        raise ValueError(f"items_per_email must be positive, got {items_per_email}")
    by_category: dict[int, list[ItemRecord]] = {}
    for item in corpus.items.values():
        by_category.setdefault(item.category, []).append(item)
    for items in by_category.values():
        items.sort(key=lambda item: item.item_id)

    selections = []
    for user_id in sorted(corpus.users):
        pool = by_category.get(corpus.users[user_id].category)
        if not pool:
            continue
        candidate = CandidateList(user_id, tuple(pool[:items_per_email]), source="baseline")
        selections.append(ScoredCandidate(candidate, 0.0, 0.0, 0.0))
    return BatchPlan(window_id, tuple(selections), budget=len(selections), threshold=0.0)


def read_candidates(path: str | Path, corpus: Corpus, source: str = "file") -> list[CandidateList]:
    """Parse candidates.csv (`user_id,item_ids` with ids ';'-separated), resolving every id."""
    path = Path(path)
    candidates = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != CANDIDATES_HEADER:
            raise ValueError(f"{path.name}: expected header {','.join(CANDIDATES_HEADER)!r}")
        for row in reader:
            user_id, raw_items = row
            if user_id not in corpus.users:
                raise ValueError(f"{path.name}:{reader.line_num}: unknown user id {user_id!r}")
            items = []
            for item_id in raw_items.split(ITEM_SEPARATOR):
                if item_id not in corpus.items:
                    raise ValueError(f"{path.name}:{reader.line_num}: unknown item id {item_id!r}")
                items.append(corpus.items[item_id])
            candidates.append(CandidateList(user_id, tuple(items), source=source))
    return candidates


def write_candidates(candidates: list[CandidateList], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANDIDATES_HEADER)
        for candidate in candidates:
            writer.writerow([candidate.user_id, ITEM_SEPARATOR.join(candidate.item_ids())])


def write_plan(plan: BatchPlan, path: str | Path) -> None:
    """Write selections in selection order, scores at 6 decimal places."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLAN_HEADER)
        for entry in plan.selections:
            writer.writerow(
                [
                    plan.window_id.isoformat(),
                    entry.candidate.user_id,
                    ITEM_SEPARATOR.join(entry.candidate.item_ids()),
                    f"{entry.activity:.6f}",
                    f"{entry.affinity:.6f}",
                    f"{entry.combined:.6f}",
                ]
            )


def read_plan(path: str | Path, corpus: Corpus, fallback_window_id: date | None = None) -> BatchPlan:
    """Re-load a plan file; budget is taken as the number of rows, threshold as 0.

    `fallback_window_id` names the window when the file has no rows.
    """
    path = Path(path)
    selections = []
    window_id = fallback_window_id
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != PLAN_HEADER:
            raise ValueError(f"{path.name}: expected header {','.join(PLAN_HEADER)!r}")
        for row in reader:
            raw_window, user_id, raw_items, raw_activity, raw_affinity, raw_combined = row
            window_id = date.fromisoformat(raw_window)
            if user_id not in corpus.users:
                raise ValueError(f"{path.name}:{reader.line_num}: unknown user id {user_id!r}")
            items = []
            for item_id in raw_items.split(ITEM_SEPARATOR):
                if item_id not in corpus.items:
                    raise ValueError(f"{path.name}:{reader.line_num}: unknown item id {item_id!r}")
                items.append(corpus.items[item_id])
            candidate = CandidateList(user_id, tuple(items), source="plan")
            selections.append(
                ScoredCandidate(candidate, float(raw_activity), float(raw_affinity), float(raw_combined))
            )
    if window_id is None:
        raise ValueError(f"{path.name}: empty plan and no fallback window id given")
    return BatchPlan(window_id, tuple(selections), budget=len(selections), threshold=0.0)
