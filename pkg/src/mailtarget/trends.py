"""Category-to-category affinity from exposure logs.

Each directed edge (a, b) aggregates how users of category a responded to
items of category b: the number of distinct (user, item) pairs seen, the
number of those pairs interacted with, and their ratio as the transition
probability. Pairs are counted once regardless of repeat exposure rows, and
an edge only exists once its seen count reaches the support threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

from .ingest import Category, Corpus, ExposureKind

DEFAULT_MIN_SUPPORT = 10

GRAPH_HEADER = ["from_category", "to_category", "seen", "interacted", "probability"]


@dataclass(frozen=True)
class TransitionEdge:
    from_category: int
    to_category: int
    seen_count: int
    interaction_count: int
    probability: float


@dataclass(frozen=True)
class TransitionGraph:
    categories: tuple[Category, ...]
    edges: dict[tuple[int, int], TransitionEdge]
    min_support: int

    def probability(self, from_category: int, to_category: int) -> float:
        """Edge probability for (from, to); 0.0 when the edge is absent.

        Self-edges follow the same counting rule as any other pair. Unknown
        category ids are an error, not a zero.
        """
        known = {c.id for c in self.categories}
        for cat in (from_category, to_category):
            if cat not in known:
                raise KeyError(f"unknown category id {cat}")
        edge = self.edges.get((from_category, to_category))
        return edge.probability if edge is not None else 0.0


def build_transition_graph(
    corpus: Corpus, min_support: int = DEFAULT_MIN_SUPPORT, laplace_alpha: float = 0.0
) -> TransitionGraph:
    """Count distinct seen/interacted (user, item) pairs per ordered category pair.

    An edge (a, b) is present only when its seen count is at least
    max(min_support, 1); below that the pair simply has no edge and queries
    return 0. `laplace_alpha` > 0 switches the ratio to the smoothed form
    (interacted + alpha) / (seen + 2 * alpha); the default is the plain ratio.
    """
    if min_support < 0:
        raise ValueError(f"min_support must be non-negative, got {min_support}")
    seen_pairs: set[tuple[str, str]] = set()
    interacted_pairs: set[tuple[str, str]] = set()
    for event in corpus.exposures:
        pair = (event.user_id, event.item_id)
        if event.kind is ExposureKind.SEEN:
            seen_pairs.add(pair)
        else:
            interacted_pairs.add(pair)

    seen_counts: dict[tuple[int, int], int] = {}
    interaction_counts: dict[tuple[int, int], int] = {}
    for user_id, item_id in seen_pairs:
        key = (corpus.users[user_id].category, corpus.items[item_id].category)
        seen_counts[key] = seen_counts.get(key, 0) + 1
    for user_id, item_id in interacted_pairs:
        key = (corpus.users[user_id].category, corpus.items[item_id].category)
        interaction_counts[key] = interaction_counts.get(key, 0) + 1

    support = max(min_support, 1)
    edges = {}
    for key in sorted(seen_counts):
        seen = seen_counts[key]
        if seen < support:
            continue
        interacted = interaction_counts.get(key, 0)
        if laplace_alpha > 0:
            probability = (interacted + laplace_alpha) / (seen + 2 * laplace_alpha)
        else:
            probability = interacted / seen
        edges[key] = TransitionEdge(key[0], key[1], seen, interacted, probability)
    return TransitionGraph(corpus.categories, edges, min_support)


def write_graph(graph: TransitionGraph, path: str | Path) -> None:
    """Export edges as CSV, sorted by (from, to), probability at 6 decimal places."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(GRAPH_HEADER)
        for key in sorted(graph.edges):
            edge = graph.edges[key]
            writer.writerow(
                [edge.from_category, edge.to_category, edge.seen_count, edge.interaction_count, f"{edge.probability:.6f}"]
            )


def read_graph(path: str | Path, categories: tuple[Category, ...], min_support: int = 0) -> TransitionGraph:
    """Re-import an exported graph; probabilities are recomputed from the counts."""
    path = Path(path)
    known = {c.id for c in categories}
    edges: dict[tuple[int, int], TransitionEdge] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != GRAPH_HEADER:
            raise ValueError(f"{path.name}: expected header {','.join(GRAPH_HEADER)!r}")
        for row in reader:
            from_cat, to_cat, seen, interacted = int(row[0]), int(row[1]), int(row[2]), int(row[3])
            if from_cat not in known or to_cat not in known:
                raise ValueError(f"{path.name}: unknown category in edge ({from_cat}, {to_cat})")
            if (from_cat, to_cat) in edges:
                raise ValueError(f"{path.name}: duplicate edge ({from_cat}, {to_cat})")
            if seen <= 0 or interacted < 0 or interacted > seen:
                raise ValueError(f"{path.name}: invalid counts for edge ({from_cat}, {to_cat}): {interacted}/{seen}")
            edges[(from_cat, to_cat)] = TransitionEdge(from_cat, to_cat, seen, interacted, interacted / seen)
    return TransitionGraph(tuple(categories), edges, min_support)
