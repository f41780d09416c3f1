"""Load, validate, and index the four input event datasets plus the category taxonomy.

All five inputs are comma-separated UTF-8 text files with a header row:
categories.csv, users.csv, items.csv, activity.csv, exposure.csv. Loading
resolves every cross-reference, rejects malformed or future-dated rows with
the offending line number, and normalizes the exposure log so that every
interacted row is covered by a seen row for the same (user, item) pair.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

CATEGORIES_FILE = "categories.csv"
USERS_FILE = "users.csv"
ITEMS_FILE = "items.csv"
ACTIVITY_FILE = "activity.csv"
EXPOSURE_FILE = "exposure.csv"

DATA_FILES = (CATEGORIES_FILE, USERS_FILE, ITEMS_FILE, ACTIVITY_FILE, EXPOSURE_FILE)


class LoadError(ValueError):
    """Raised when an input file is missing, malformed, or violates an invariant."""

    def __init__(self, filename: str, line: int | None, message: str):
        self.filename = filename
        self.line = line
        where = f"{filename}:{line}" if line is not None else filename
        super().__init__(f"{where}: {message}")


class ActivityKind(enum.Enum):
    """Tracked user behaviors that count as activity."""

    SEARCH = "search"
    APPLY = "apply"
    RESUME_UPDATE = "resume_update"


class ExposureKind(enum.Enum):
    SEEN = "seen"
    INTERACTED = "interacted"


@dataclass(frozen=True)
class Category:
    id: int
    label: str


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    category: int


@dataclass(frozen=True)
class ItemRecord:
    item_id: str
    category: int
    title: str


@dataclass(frozen=True)
class ActivityEvent:
    user_id: str
    kind: ActivityKind
    date: date


@dataclass(frozen=True)
class ExposureEvent:
    user_id: str
    item_id: str
    kind: ExposureKind
    date: date


@dataclass(frozen=True)
class LoadReport:
    """Row counts observed at load time, including normalization repairs."""

    num_categories: int
    num_users: int
    num_items: int
    num_activity_events: int
    num_exposure_events: int
    synthesized_seen: int

    def as_dict(self) -> dict[str, int]:
        return {
            "categories": self.num_categories,
            "users": self.num_users,
            "items": self.num_items,
            "activity_events": self.num_activity_events,
            "exposure_events": self.num_exposure_events,
            "synthesized_seen": self.synthesized_seen,
        }


@dataclass(frozen=True)
class Corpus:
    """Immutable, fully cross-referenced view of the loaded datasets.

    `exposures` is already normalized: for every (user, item) pair the number
    of interacted rows never exceeds the number of seen rows.
    """

    categories: tuple[Category, ...]
    users: dict[str, UserRecord]
    items: dict[str, ItemRecord]
    activity: tuple[ActivityEvent, ...]
    exposures: tuple[ExposureEvent, ...]
    report: LoadReport = field(compare=False)

    def category_ids(self) -> set[int]:
        return {c.id for c in self.categories}


def _read_rows(path: Path, expected_header: list[str]):
    """Yield (line_number, row) for each data row, validating the header and width."""
    filename = path.name
    if not path.exists():
        raise LoadError(filename, None, "file not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(filename, 1, "missing header row") from None
        if header != expected_header:
            raise LoadError(
                filename, 1, f"expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
            )
        for row in reader:
            if not row:
                continue
            if len(row) != len(expected_header):
                raise LoadError(
                    filename, reader.line_num, f"expected {len(expected_header)} fields, got {len(row)}"
                )
            yield reader.line_num, row


def _parse_date(filename: str, line: int, text: str, reference_date: date) -> date:
    try:
        parsed = date.fromisoformat(text)
    except ValueError:
        raise LoadError(filename, line, f"invalid date {text!r} (expected YYYY-MM-DD)") from None
    if parsed > reference_date:
        raise LoadError(filename, line, f"event dated {parsed} is after the reference date {reference_date}")
    return parsed


def _load_categories(path: Path) -> tuple[Category, ...]:
    seen_ids: dict[int, int] = {}
    seen_labels: dict[str, int] = {}
    categories = []
    for line, (raw_id, label) in _read_rows(path, ["id", "label"]):
        try:
            cat_id = int(raw_id)
        except ValueError:
            raise LoadError(path.name, line, f"category id {raw_id!r} is not an integer") from None
        if cat_id in seen_ids:
            raise LoadError(path.name, line, f"duplicate category id {cat_id} (first seen on line {seen_ids[cat_id]})")
        folded = label.casefold()
        if folded in seen_labels:
            raise LoadError(path.name, line, f"duplicate category label {label!r} (case-insensitive)")
        seen_ids[cat_id] = line
        seen_labels[folded] = line
        categories.append(Category(cat_id, label))
    expected = list(range(len(categories)))
    if sorted(seen_ids) != expected:
        raise LoadError(path.name, None, f"category ids must be dense 0..{len(categories) - 1}, got {sorted(seen_ids)}")
    return tuple(categories)


def _load_users(path: Path, category_ids: set[int]) -> dict[str, UserRecord]:
    users: dict[str, UserRecord] = {}
    for line, (user_id, raw_cat) in _read_rows(path, ["user_id", "category_id"]):
        if user_id in users:
            raise LoadError(path.name, line, f"duplicate user id {user_id!r}")
        try:
            cat = int(raw_cat)
        except ValueError:
            raise LoadError(path.name, line, f"category id {raw_cat!r} is not an integer") from None
        if cat not in category_ids:
            raise LoadError(path.name, line, f"unknown category id {cat} for user {user_id!r}")
        users[user_id] = UserRecord(user_id, cat)
    return users


def _load_items(path: Path, category_ids: set[int]) -> dict[str, ItemRecord]:
    items: dict[str, ItemRecord] = {}
    for line, (item_id, raw_cat, title) in _read_rows(path, ["item_id", "category_id", "title"]):
        if item_id in items:
            raise LoadError(path.name, line, f"duplicate item id {item_id!r}")
        try:
            cat = int(raw_cat)
        except ValueError:
            raise LoadError(path.name, line, f"category id {raw_cat!r} is not an integer") from None
        if cat not in category_ids:
            raise LoadError(path.name, line, f"unknown category id {cat} for item {item_id!r}")
        items[item_id] = ItemRecord(item_id, cat, title)
    return items


def _load_activity(path: Path, users: dict[str, UserRecord], reference_date: date) -> tuple[ActivityEvent, ...]:
    kinds = {k.value: k for k in ActivityKind}
    events = []
    for line, (user_id, raw_kind, raw_date) in _read_rows(path, ["user_id", "kind", "date"]):
        if user_id not in users:
            raise LoadError(path.name, line, f"unknown user id {user_id!r}")
        if raw_kind not in kinds:
            raise LoadError(path.name, line, f"unknown activity kind {raw_kind!r} (expected one of {sorted(kinds)})")
        events.append(ActivityEvent(user_id, kinds[raw_kind], _parse_date(path.name, line, raw_date, reference_date)))
    return tuple(events)


def _load_exposure(
    path: Path, users: dict[str, UserRecord], items: dict[str, ItemRecord], reference_date: date
) -> tuple[tuple[ExposureEvent, ...], int]:
    """Load exposure rows and normalize so interacted rows never outnumber seen rows per pair.

    Every interacted row must be covered by a seen row for the same (user, item)
    pair; for each uncovered interacted row a seen row with the same date is
    synthesized and appended after the loaded rows, in file order.
    """
    kinds = {k.value: k for k in ExposureKind}
    events = []
    for line, (user_id, item_id, raw_kind, raw_date) in _read_rows(path, ["user_id", "item_id", "kind", "date"]):
        if user_id not in users:
            raise LoadError(path.name, line, f"unknown user id {user_id!r}")
        if item_id not in items:
            raise LoadError(path.name, line, f"unknown item id {item_id!r}")
        if raw_kind not in kinds:
            raise LoadError(path.name, line, f"unknown exposure kind {raw_kind!r} (expected one of {sorted(kinds)})")
        events.append(
            ExposureEvent(user_id, item_id, kinds[raw_kind], _parse_date(path.name, line, raw_date, reference_date))
        )

    seen_totals: dict[tuple[str, str], int] = {}
    for event in events:
        if event.kind is ExposureKind.SEEN:
            pair = (event.user_id, event.item_id)
            seen_totals[pair] = seen_totals.get(pair, 0) + 1

    synthesized = []
    interacted_so_far: dict[tuple[str, str], int] = {}
    for event in events:
        if event.kind is not ExposureKind.INTERACTED:
            continue
        pair = (event.user_id, event.item_id)
        index = interacted_so_far.get(pair, 0)
        interacted_so_far[pair] = index + 1
        if index >= seen_totals.get(pair, 0):
            synthesized.append(ExposureEvent(event.user_id, event.item_id, ExposureKind.SEEN, event.date))

    return tuple(events + synthesized), len(synthesized)


def load_corpus(data_dir: str | Path, reference_date: date) -> Corpus:
    """Load the five datasets from `data_dir` into a validated, normalized Corpus.

    Raises LoadError (with file name and line number) on the first violation:
    unknown category/user/item id, duplicate id, malformed row, or an event
    dated after `reference_date`.
    """
    data_dir = Path(data_dir)
    categories = _load_categories(data_dir / CATEGORIES_FILE)
    category_ids = {c.id for c in categories}
    users = _load_users(data_dir / USERS_FILE, category_ids)
    items = _load_items(data_dir / ITEMS_FILE, category_ids)
    activity = _load_activity(data_dir / ACTIVITY_FILE, users, reference_date)
    exposures, synthesized = _load_exposure(data_dir / EXPOSURE_FILE, users, items, reference_date)
    report = LoadReport(
        num_categories=len(categories),
        num_users=len(users),
        num_items=len(items),
        num_activity_events=len(activity),
        num_exposure_events=len(exposures),
        synthesized_seen=synthesized,
    )
    return Corpus(categories, users, items, activity, exposures, report)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_corpus(corpus: Corpus, out_dir: str | Path) -> None:
    """Write a corpus back out in the five-file input format (rows in stored order)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(out_dir / CATEGORIES_FILE, ["id", "label"], ((c.id, c.label) for c in corpus.categories))
    _write_csv(out_dir / USERS_FILE, ["user_id", "category_id"], ((u.user_id, u.category) for u in corpus.users.values()))
    _write_csv(
        out_dir / ITEMS_FILE,
        ["item_id", "category_id", "title"],
        ((i.item_id, i.category, i.title) for i in corpus.items.values()),
    )
    _write_csv(
        out_dir / ACTIVITY_FILE,
        ["user_id", "kind", "date"],
        ((e.user_id, e.kind.value, e.date.isoformat()) for e in corpus.activity),
    )
    _write_csv(
        out_dir / EXPOSURE_FILE,
        ["user_id", "item_id", "kind", "date"],
        ((e.user_id, e.item_id, e.kind.value, e.date.isoformat()) for e in corpus.exposures),
    )
