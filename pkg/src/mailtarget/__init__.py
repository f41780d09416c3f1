"""Batch targeting engine for recommendation emails.

Fuses a per-user recency activity score with a category-to-category affinity
graph to choose which users receive which recommendation lists under a send
budget, and evaluates the resulting open/click/apply funnel against a
send-to-all baseline via a seeded simulator.
"""

__version__ = "0.1.0"

from .activity import ActivityProfile, ActivityScore, ScoringWindow, build_activity_profiles, compute_activity_score
from .ingest import Corpus, LoadError, load_corpus, write_corpus
from .metrics import FunnelMetrics, FunnelOutcome, compare_report, compute_funnel
from .selector import BatchPlan, CandidateList, ScoredCandidate, baseline_select, score_candidate, select_batch
from .simulator import GroundTruth, SimulationConfig, default_scenario, generate_corpus, simulate_responses
from .trends import TransitionGraph, build_transition_graph

__all__ = [
    "ActivityProfile",
    "ActivityScore",
    "BatchPlan",
    "CandidateList",
    "Corpus",
    "FunnelMetrics",
    "FunnelOutcome",
    "GroundTruth",
    "LoadError",
    "ScoredCandidate",
    "ScoringWindow",
    "SimulationConfig",
    "TransitionGraph",
    "baseline_select",
    "build_activity_profiles",
    "build_transition_graph",
    "compare_report",
    "compute_activity_score",
    "compute_funnel",
    "default_scenario",
    "generate_corpus",
    "load_corpus",
    "score_candidate",
    "select_batch",
    "simulate_responses",
    "write_corpus",
]
