"""Seeded synthetic population and response replay for desk-scale evaluation.

A scenario plants a true category-affinity matrix plus per-stage funnel
multipliers, generates a corpus whose exposure log converges to the planted
matrix, and replays any batch plan through the send -> open -> click -> apply
funnel. Truth stays separate from the learned graph so estimator recovery can
be checked, and everything is driven by numpy's default PCG64 generator on
fixed substreams, so a (scenario, seed) pair fully determines the output.

Substream layout (all seeded as default_rng([seed, stream])):
  1 user categories, 2 activity events, 3 exposure log, 4 candidate lists,
  5 response draws. Responses consume exactly three uniforms per email, in
  plan order, so outcomes are independent of evaluation order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .activity import ScoringWindow, build_activity_profiles, compute_activity_score
from .ingest import (
    ActivityEvent,
    ActivityKind,
    Category,
    Corpus,
    ExposureEvent,
    ExposureKind,
    ItemRecord,
    LoadReport,
    UserRecord,
)
from .metrics import FunnelOutcome
from .selector import BatchPlan, CandidateList

_STREAM_USERS = 1
_STREAM_ACTIVITY = 2
_STREAM_EXPOSURE = 3
_STREAM_CANDIDATES = 4
_STREAM_RESPONSES = 5

_ACTIVITY_KINDS = (ActivityKind.SEARCH, ActivityKind.APPLY, ActivityKind.RESUME_UPDATE)
_EXTRA_EVENT_RATE = 0.3

DEFAULT_TODAY = date(2026, 1, 1)

_AFFINITY_OVERRIDE = re.compile(r"^affinity_(\d+)_(\d+)$")

_SCENARIO_DEFAULTS = {
    "seed": 42,
    "num_users": 10_000,
    "num_items": 50_000,
    "num_categories": 8,
    "window_days": 90,
    "today": DEFAULT_TODAY,
    "activity_dispersion": 1.0,
    "exposures_per_pair": 1_500,
    "candidates_per_user": 3,
    "items_per_email": 10,
    "open_base": 0.65,
    "click_base": 0.70,
    "apply_base": 0.55,
    "recency_weight": 0.5,
    "affinity_self": 0.4,
    "affinity_next": 0.8,
    "affinity_skip": 0.2,
}


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Planted true affinities and funnel stage multipliers.

    `affinity[a, b]` is the true probability that a seen (category-a user,
    category-b item) exposure converts to an interaction, and drives the
    simulated click/apply stages. Distinct from any learned graph.
    """

    affinity: np.ndarray
    open_base: float = 0.65
    click_base: float = 0.70
    apply_base: float = 0.55
    recency_weight: float = 0.5

    def __post_init__(self):
        matrix = np.array(self.affinity, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"affinity must be a square matrix, got shape {matrix.shape}")
        if matrix.size and (matrix.min() < 0.0 or matrix.max() > 1.0):
            raise ValueError("affinity entries must lie in [0, 1]")
        for name in ("open_base", "click_base", "apply_base"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {value}")
        if not 0.0 <= self.recency_weight <= 1.0:
            raise ValueError(f"recency_weight must be in [0, 1], got {self.recency_weight}")
        matrix.flags.writeable = False
        object.__setattr__(self, "affinity", matrix)

    @property
    def num_categories(self) -> int:
        return self.affinity.shape[0]


@dataclass(frozen=True, eq=False)
class SimulationConfig:
    seed: int
    num_users: int
    num_items: int
    num_categories: int
    window_days: int
    today: date
    activity_dispersion: float
    exposures_per_pair: int
    candidates_per_user: int
    items_per_email: int
    ground_truth: GroundTruth

    def __post_init__(self):
        for name in ("num_users", "num_items", "num_categories", "window_days", "candidates_per_user", "items_per_email"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.num_categories > self.num_items:
            raise ValueError(f"need at least one item per category ({self.num_categories} > {self.num_items})")
        if self.exposures_per_pair < 0:
            raise ValueError(f"exposures_per_pair must be non-negative, got {self.exposures_per_pair}")
        if self.activity_dispersion <= 0:
            raise ValueError(f"activity_dispersion must be positive, got {self.activity_dispersion}")
        if self.ground_truth.num_categories != self.num_categories:
            raise ValueError(
                f"affinity matrix is {self.ground_truth.num_categories}x{self.ground_truth.num_categories}, "
                f"expected {self.num_categories}"
            )

    @property
    def window(self) -> ScoringWindow:
        return ScoringWindow.ending(self.today, self.window_days)


def ring_affinity(num_categories: int, self_strength: float, next_strength: float, skip_strength: float) -> np.ndarray:
    """Default planted matrix: moderate self-affinity, one strong and one weak neighbor."""
    matrix = np.zeros((num_categories, num_categories))
    for a in range(num_categories):
        matrix[a, a] = self_strength
        nxt = (a + 1) % num_categories
        skip = (a + 2) % num_categories
        if nxt != a:
            matrix[a, nxt] = next_strength
        if skip not in (a, nxt):
            matrix[a, skip] = skip_strength
    return matrix


def _build_config(values: dict) -> SimulationConfig:
    overrides = {}
    for key in list(values):
        match = _AFFINITY_OVERRIDE.match(key)
        if match:
            overrides[(int(match.group(1)), int(match.group(2)))] = float(values.pop(key))
    unknown = set(values) - set(_SCENARIO_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
    merged = {**_SCENARIO_DEFAULTS, **values}

    today = merged["today"]
    if isinstance(today, str):
        today = date.fromisoformat(today)
    num_categories = int(merged["num_categories"])
    matrix = ring_affinity(
        num_categories,
        float(merged["affinity_self"]),
        float(merged["affinity_next"]),
        float(merged["affinity_skip"]),
    )
    for (a, b), value in sorted(overrides.items()):
        if not (0 <= a < num_categories and 0 <= b < num_categories):
            raise ValueError(f"affinity override ({a}, {b}) outside 0..{num_categories - 1}")
        matrix[a, b] = value

    truth = GroundTruth(
        affinity=matrix,
        open_base=float(merged["open_base"]),
        click_base=float(merged["click_base"]),
        apply_base=float(merged["apply_base"]),
        recency_weight=float(merged["recency_weight"]),
    )
    return SimulationConfig(
        seed=int(merged["seed"]),
        num_users=int(merged["num_users"]),
        num_items=int(merged["num_items"]),
        num_categories=num_categories,
        window_days=int(merged["window_days"]),
        today=today,
        activity_dispersion=float(merged["activity_dispersion"]),
        exposures_per_pair=int(merged["exposures_per_pair"]),
        candidates_per_user=int(merged["candidates_per_user"]),
        items_per_email=int(merged["items_per_email"]),
        ground_truth=truth,
    )


def default_scenario(**overrides) -> SimulationConfig:
    """The documented default scenario, with keyword overrides for any scenario key."""
    return _build_config(dict(overrides))


def load_scenario(path: str | Path) -> SimulationConfig:
    """Read a flat key/value scenario file (TOML syntax; see README for the keys)."""
    with open(path, "rb") as fh:
        values = tomllib.load(fh)
    return _build_config(values)


def _rng(seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([seed, stream])


def _sample_distinct(rng: np.random.Generator, capacity: int, count: int) -> np.ndarray:
    """`count` distinct integers from [0, capacity), ascending, seed-deterministic."""
    if count * 2 >= capacity:
        return np.sort(rng.permutation(capacity)[:count])
    codes = np.unique(rng.integers(0, capacity, size=count))
    while len(codes) < count:
        extra = rng.integers(0, capacity, size=count - len(codes))
        codes = np.unique(np.concatenate([codes, extra]))
    return codes


def generate_corpus(config: SimulationConfig) -> Corpus:
    """Deterministic-for-seed synthetic corpus in the engine's own domain types.

    Users get uniform categories; items are assigned categories round-robin so
    every category is populated. Each user's last-active gap is
    floor(u ** dispersion * window_days) days, u uniform, so dispersion > 1
    skews recent and < 1 skews stale; 30% of users get one extra, older event.
    Per ordered category pair, `exposures_per_pair` distinct (user, item)
    pairs are sampled (capped by availability); each is seen once and
    interacts with the planted affinity probability, so empirical interaction
    ratios converge to the matrix as the count grows.
    """
    truth = config.ground_truth
    num_cats = config.num_categories
    user_width = len(str(config.num_users))
    item_width = len(str(config.num_items))

    categories = tuple(Category(c, f"category-{c}") for c in range(num_cats))

    rng_users = _rng(config.seed, _STREAM_USERS)
    user_cats = rng_users.integers(0, num_cats, size=config.num_users)
    user_ids = [f"u{idx:0{user_width}d}" for idx in range(config.num_users)]
    users = {uid: UserRecord(uid, int(cat)) for uid, cat in zip(user_ids, user_cats)}

    item_ids = [f"i{idx:0{item_width}d}" for idx in range(config.num_items)]
    items = {
        iid: ItemRecord(iid, idx % num_cats, f"synthetic listing {idx}")
        for idx, iid in enumerate(item_ids)
    }

    rng_act = _rng(config.seed, _STREAM_ACTIVITY)
    gaps = np.floor(rng_act.random(config.num_users) ** config.activity_dispersion * config.window_days).astype(int)
    kinds = rng_act.integers(0, len(_ACTIVITY_KINDS), size=config.num_users)
    extra_mask = rng_act.random(config.num_users) < _EXTRA_EVENT_RATE
    extra_gaps = gaps + np.floor(rng_act.random(config.num_users) * (config.window_days - gaps + 1)).astype(int)
    extra_kinds = rng_act.integers(0, len(_ACTIVITY_KINDS), size=config.num_users)
    activity = []
    for idx, uid in enumerate(user_ids):
        activity.append(ActivityEvent(uid, _ACTIVITY_KINDS[kinds[idx]], config.today - timedelta(days=int(gaps[idx]))))
        if extra_mask[idx]:
            activity.append(
                ActivityEvent(uid, _ACTIVITY_KINDS[extra_kinds[idx]], config.today - timedelta(days=int(extra_gaps[idx])))
            )

    users_by_cat = [[] for _ in range(num_cats)]
    for uid, cat in zip(user_ids, user_cats):
        users_by_cat[cat].append(uid)
    items_by_cat = [item_ids[c :: num_cats] for c in range(num_cats)]

    rng_exp = _rng(config.seed, _STREAM_EXPOSURE)
    exposures = []
    for a in range(num_cats):
        for b in range(num_cats):
            pool_users, pool_items = users_by_cat[a], items_by_cat[b]
            capacity = len(pool_users) * len(pool_items)
            count = min(config.exposures_per_pair, capacity)
            if count == 0:
                continue
            codes = _sample_distinct(rng_exp, capacity, count)
            interact = rng_exp.random(count) < truth.affinity[a, b]
            days_ago = rng_exp.integers(0, config.window_days + 1, size=count)
            for k in range(count):
                uid = pool_users[codes[k] // len(pool_items)]
                iid = pool_items[codes[k] % len(pool_items)]
                when = config.today - timedelta(days=int(days_ago[k]))
                exposures.append(ExposureEvent(uid, iid, ExposureKind.SEEN, when))
                if interact[k]:
                    exposures.append(ExposureEvent(uid, iid, ExposureKind.INTERACTED, when))

    report = LoadReport(
        num_categories=num_cats,
        num_users=len(users),
        num_items=len(items),
        num_activity_events=len(activity),
        num_exposure_events=len(exposures),
        synthesized_seen=0,
    )
    return Corpus(categories, users, items, tuple(activity), tuple(exposures), report)


def generate_candidates(corpus: Corpus, config: SimulationConfig) -> list[CandidateList]:
    """Stand-in for the upstream recommender: per user, a few single-category lists.

    Each list picks a uniform focus category and draws up to `items_per_email`
    of its items without replacement. Users are processed in id order.
    """
    num_cats = config.num_categories
    items_by_cat = [[] for _ in range(num_cats)]
    for item in corpus.items.values():
        items_by_cat[item.category].append(item)

    rng = _rng(config.seed, _STREAM_CANDIDATES)
    user_ids = sorted(corpus.users)
    focus = rng.integers(0, num_cats, size=(len(user_ids), config.candidates_per_user))
    candidates = []
    for row, uid in enumerate(user_ids):
        for j in range(config.candidates_per_user):
            pool = items_by_cat[focus[row, j]]
            take = min(config.items_per_email, len(pool))
            picks = rng.choice(len(pool), size=take, replace=False)
            candidates.append(CandidateList(uid, tuple(pool[p] for p in picks), source="sim"))
    return candidates


def true_recency(corpus: Corpus, window: ScoringWindow) -> dict[str, float]:
    """Each user's true activity score in the window; 0 for stale or inactive users."""
    recency = {}
    for profile in build_activity_profiles(corpus):
        score = compute_activity_score(profile, window)
        recency[profile.user_id] = score.value if score is not None else 0.0
    return recency


def simulate_responses(
    plan: BatchPlan,
    corpus: Corpus,
    ground_truth: GroundTruth,
    seed: int,
    window: ScoringWindow,
) -> list[FunnelOutcome]:
    """Replay a plan through the funnel with planted probabilities.

    Per selection: open with open_base * (w * r + (1 - w) * g), then click
    with click_base * g, then apply with apply_base * g, where r is the
    user's true activity score (0 if stale) and g the mean true affinity
    from the user's category to the email's item categories. Three uniforms
    are drawn per email in plan order regardless of outcome, so a pointwise
    increase of the planted matrix under the same seed never loses opens.
    """
    recency = true_recency(corpus, window)
    draws = _rng(seed, _STREAM_RESPONSES).random((len(plan.selections), 3))
    weight = ground_truth.recency_weight

    outcomes = []
    for j, entry in enumerate(plan.selections):
        user_id = entry.candidate.user_id
        user = corpus.users.get(user_id)
        if user is None:
            raise ValueError(f"plan references unknown user {user_id!r}")
        g_bar = float(
            np.mean([ground_truth.affinity[user.category, item.category] for item in entry.candidate.items])
        )
        mix = weight * recency.get(user_id, 0.0) + (1.0 - weight) * g_bar
        opened = bool(draws[j, 0] < ground_truth.open_base * mix)
        clicked = opened and bool(draws[j, 1] < ground_truth.click_base * g_bar)
        applied = clicked and bool(draws[j, 2] < ground_truth.apply_base * g_bar)
        outcomes.append(FunnelOutcome(f"e{j:06d}", user_id, opened, clicked, applied))
    return outcomes
