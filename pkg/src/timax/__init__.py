"""Topic-aware influence maximization with landmark preprocessing.

Per-topic greedy seed lists are precomputed at a grid of probability scales
(landmarks); topic-mixture queries are then answered in microseconds by Best
Topic Selection (:func:`bts_query`) or Marginal Influence Sort
(:func:`mis_query`).
"""

from .diffusion import (
    ExactOracle,
    Oracle,
    SpreadEstimate,
    exact_spread,
    marginal_influence,
    simulate_spread,
)
from .errors import (
    CapacityError,
    DegenerateMixtureError,
    FormatError,
    InvalidInputError,
    SelectorError,
    SmoothingError,
    StaleIndexError,
    TimaxError,
)
from .graph import (
    TopicGraph,
    TopicMixture,
    mix_probabilities,
    normalize_mixture,
    read_graph,
    scale_topic,
    write_graph,
)
from .kernels import BACKEND
from .preprocess import LandmarkIndex, LandmarkSet, build_index, load_index, mu_max, save_index
from .query import QueryResult, bts_query, mis_query, round_down, round_up
from .selection import GreedyResult, SeedRecord, greedy_select, select_baseline

__version__ = "0.1.0"
