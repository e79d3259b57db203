"""Planted-cuisine generator with known ground truth.

Ingredients belong to ``clusters`` flavour families.  Each ingredient holds
``compounds_per_ingredient`` compounds, mostly from its family's private
pool and a ``compound_overlap`` share from the other pools.  Western
recipes combine ingredients of one family; eastern recipes take each
ingredient from a different family, so their size is capped at
``clusters``.  ``noise`` is the per-recipe probability of injecting one
contrary pair (a foreign ingredient into a western recipe, a family-mate
into an eastern one).
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .graph_core import BipartiteGraph
from .recipes import Recipe, RecipeCorpus
from .seeds import child_rng


@dataclass(frozen=True)
class SyntheticSpec:
    clusters: int = 4
    ingredients_per_cluster: int = 15
    compounds_per_cluster: int = 40
    compound_overlap: float = 0.1
    recipes_per_corpus: int = 200
    recipe_size_range: tuple = (3, 8)
    noise: float = 0.05
    seed: int = 0
    compounds_per_ingredient: int = 10

    def __post_init__(self):
        object.__setattr__(self, "recipe_size_range", tuple(self.recipe_size_range))
        if self.clusters < 2:
            raise DomainError("need at least 2 clusters")
        for name in ("ingredients_per_cluster", "compounds_per_cluster",
                     "recipes_per_corpus", "compounds_per_ingredient"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be positive")
        for name in ("compound_overlap", "noise"):
            if not 0 <= getattr(self, name) <= 1:
                raise DomainError(f"{name} must lie in [0, 1]")
        lo, hi = self.recipe_size_range
        if not 2 <= lo <= hi:
            raise DomainError(f"recipe sizes must satisfy 2 <= min <= max, got {self.recipe_size_range}")
        if hi > self.ingredients_per_cluster:
            raise DomainError(
                f"recipe size {hi} exceeds the {self.ingredients_per_cluster} ingredients of a cluster"
            )
        if self.compounds_per_ingredient > self.compounds_per_cluster:
            raise DomainError("compounds_per_ingredient exceeds compounds_per_cluster")


def ingredient_id(cluster: int, index: int) -> str:
    return f"ing{cluster:02d}_{index:03d}"


def compound_id(cluster: int, index: int) -> str:
    return f"cmp{cluster:02d}_{index:03d}"


def generate_synthetic(spec: SyntheticSpec):
    """Return ``(bipartite, western, eastern, labels)`` for ``spec``.

    ``labels`` maps every ingredient to its planted cluster index.
    """
    k, n_ing = spec.clusters, spec.ingredients_per_cluster
    members = [[ingredient_id(c, i) for i in range(n_ing)] for c in range(k)]
    pools = [[compound_id(c, j) for j in range(spec.compounds_per_cluster)] for c in range(k)]
    labels = {ing: c for c in range(k) for ing in members[c]}

    rng = child_rng(spec.seed, "synthetic", "compounds")
    n_foreign = round(spec.compound_overlap * spec.compounds_per_ingredient)
    edges = set()
    for c in range(k):
        foreign = [x for d in range(k) if d != c for x in pools[d]]
        for ing in members[c]:
            own = rng.sample(pools[c], spec.compounds_per_ingredient - n_foreign)
            other = rng.sample(foreign, min(n_foreign, len(foreign)))
            edges.update((ing, x) for x in own + other)
    compounds = {x for pool in pools for x in pool}
    bipartite = BipartiteGraph.from_edges(edges, ingredients=labels, compounds=compounds)

    lo, hi = spec.recipe_size_range

    rng = child_rng(spec.seed, "synthetic", "western")
    western = []
    for r in range(spec.recipes_per_corpus):
        size = rng.randint(lo, hi)
        c = rng.randrange(k)
        chosen = rng.sample(members[c], size)
        if rng.random() < spec.noise:
            d = rng.choice([x for x in range(k) if x != c])
            chosen[rng.randrange(size)] = rng.choice(members[d])
        western.append(Recipe(f"w{r:05d}", frozenset(chosen)))

    rng = child_rng(spec.seed, "synthetic", "eastern")
    eastern = []
    for r in range(spec.recipes_per_corpus):
        size = min(rng.randint(lo, hi), k)
        chosen = [rng.choice(members[c]) for c in rng.sample(range(k), size)]
        if rng.random() < spec.noise:
            i, j = rng.sample(range(size), 2)
            mates = [x for x in members[labels[chosen[j]]] if x not in chosen]
            if mates:
                chosen[i] = rng.choice(mates)
        eastern.append(Recipe(f"e{r:05d}", frozenset(chosen)))

    return (
        bipartite,
        RecipeCorpus("western", tuple(western)),
        RecipeCorpus("eastern", tuple(eastern)),
        labels,
    )
