"""Shared fixture helpers: write tiny CSV datasets and load them as corpora."""

from __future__ import annotations

import csv
import random
from datetime import date, timedelta
from pathlib import Path

import pytest

from mailtarget.ingest import load_corpus

TODAY = date(2026, 1, 1)

HEADERS = {
    "categories.csv": ["id", "label"],
    "users.csv": ["user_id", "category_id"],
    "items.csv": ["item_id", "category_id", "title"],
    "activity.csv": ["user_id", "kind", "date"],
    "exposure.csv": ["user_id", "item_id", "kind", "date"],
}


def write_dataset(
    data_dir: Path,
    categories=((0, "alpha"), (1, "beta")),
    users=(),
    items=(),
    activity=(),
    exposure=(),
) -> Path:
    """Write the five input files from row tuples; returns the directory."""
    data_dir.mkdir(parents=True, exist_ok=True)
    rows_by_file = {
        "categories.csv": categories,
        "users.csv": users,
        "items.csv": items,
        "activity.csv": activity,
        "exposure.csv": exposure,
    }
    for name, rows in rows_by_file.items():
        with open(data_dir / name, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(HEADERS[name])
            writer.writerows(rows)
    return data_dir


def random_dataset(rng: random.Random, max_users: int = 50, max_categories: int = 5, max_exposure_rows: int = 200):
    """Row tuples for a random but loadable dataset (dates within 120 days of TODAY)."""
    num_cats = rng.randint(1, max_categories)
    num_users = rng.randint(1, max_users)
    num_items = rng.randint(1, 60)
    categories = [(c, f"cat{c}") for c in range(num_cats)]
    users = [(f"u{n:03d}", rng.randrange(num_cats)) for n in range(num_users)]
    items = [(f"i{n:03d}", rng.randrange(num_cats), f"listing {n}") for n in range(num_items)]

    def random_date():
        return (TODAY - timedelta(days=rng.randint(0, 120))).isoformat()

    activity = [
        (users[rng.randrange(num_users)][0], rng.choice(["search", "apply", "resume_update"]), random_date())
        for _ in range(rng.randint(0, num_users))
    ]
    exposure = [
        (
            users[rng.randrange(num_users)][0],
            items[rng.randrange(num_items)][0],
            "seen" if rng.random() < 0.6 else "interacted",
            random_date(),
        )
        for _ in range(rng.randint(0, max_exposure_rows))
    ]
    return {"categories": categories, "users": users, "items": items, "activity": activity, "exposure": exposure}


@pytest.fixture
def make_corpus(tmp_path):
    """Factory: write a dataset under tmp_path and load it with the real loader."""

    counter = 0

    def _make(reference_date=TODAY, **rows):
        nonlocal counter
        counter += 1
        data_dir = write_dataset(tmp_path / f"data{counter}", **rows)
        return load_corpus(data_dir, reference_date=reference_date)

    return _make
