"""Flavour-network pipeline: projection, filtration, reconciliation and
constrained map-equation community detection for ingredient pairing."""

from .community import ConstraintSet, Partition, codelength, detect
from .graph_core import (
    BipartiteGraph,
    IngredientNetwork,
    connected_components,
    degree_histogram,
    filter_local,
    load_bipartite,
    project,
)
from .pipeline import PipelineConfig, evaluate, sensitivity, specificity, sweep, train
from .reconciliation import node_discrepancy, sanity_check
from .recipes import Recipe, RecipeCorpus, build_cooccurrence, load_recipes, split_corpus

__version__ = "0.1.0"
