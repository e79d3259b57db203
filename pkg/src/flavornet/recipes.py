"""Recipe corpora: loading, matching, balancing, splitting, co-occurrence."""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .errors import DomainError, IntegrityError, ParseError
from .graph_core import IngredientNetwork
from .seeds import child_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Recipe:
    id: str
    ingredients: frozenset

    def __post_init__(self):
        object.__setattr__(self, "ingredients", frozenset(self.ingredients))
        if not self.ingredients:
            raise DomainError(f"recipe {self.id!r} has no ingredients")


@dataclass(frozen=True)
class RecipeCorpus:
    """An ordered collection of recipes sharing one cuisine label.

    ``skipped`` counts records dropped while loading (empty ingredient
    lists); it is informational only.
    """

    label: str
    recipes: tuple = ()
    skipped: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "recipes", tuple(self.recipes))
        seen = set()
        for r in self.recipes:
            if r.id in seen:
                raise IntegrityError(f"duplicate recipe id {r.id!r} in corpus {self.label!r}")
            seen.add(r.id)

    def __len__(self):
        return len(self.recipes)

    def __iter__(self):
        return iter(self.recipes)

    def ids(self) -> list[str]:
        return [r.id for r in self.recipes]

    def replace(self, recipes) -> "RecipeCorpus":
        return RecipeCorpus(self.label, tuple(recipes))


@dataclass(frozen=True)
class CorpusSplit:
    train: RecipeCorpus
    validation: RecipeCorpus
    test: RecipeCorpus
    seed: int


@dataclass(frozen=True)
class MatchReport:
    input_recipes: int
    kept_recipes: int
    unknown_ingredient_mentions: int

    @property
    def dropped_recipes(self) -> int:
        return self.input_recipes - self.kept_recipes

    def to_dict(self) -> dict:
        return {
            "input_recipes": self.input_recipes,
            "kept_recipes": self.kept_recipes,
            "unknown_ingredient_mentions": self.unknown_ingredient_mentions,
        }


def _records(path: Path):
    """Yield ``(lineno, id, ingredient list)`` from JSON Lines or CSV."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    first = next((ln for ln in lines if ln.strip()), "")
    as_json = first.lstrip().startswith("{")
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        if as_json:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line=lineno) from None
            if not isinstance(obj, dict) or "id" not in obj or "ingredients" not in obj:
                raise ParseError("record needs 'id' and 'ingredients'", line=lineno)
            ings = obj["ingredients"]
            if not isinstance(ings, list):
                raise ParseError("'ingredients' must be a list", line=lineno)
            yield lineno, str(obj["id"]), [str(i) for i in ings]
        else:
            if line.startswith("#") or line.lower().startswith("id,"):
                continue
            rid, sep, rest = line.partition(",")
            if not sep or not rid:
                raise ParseError(f"expected 'id,ing1;ing2;...', got {line!r}", line=lineno)
            yield lineno, rid, [i.strip() for i in rest.split(";") if i.strip()]


def load_recipes(path, label: str) -> RecipeCorpus:
    """Load a recipe file (JSON Lines, or the ``id,a;b;c`` CSV fallback).

    Records with an empty ingredient list are skipped and counted in
    ``RecipeCorpus.skipped``; a repeated recipe id raises
    :class:`IntegrityError`.
    """
    recipes = []
    seen = set()
    skipped = 0
    for lineno, rid, ings in _records(Path(path)):
        if rid in seen:
            raise IntegrityError(f"line {lineno}: duplicate recipe id {rid!r}")
        seen.add(rid)
        if not ings:
            skipped += 1
            continue
        recipes.append(Recipe(rid, frozenset(ings)))
    if skipped:
        logger.warning("%s: skipped %d recipe(s) with no ingredients", path, skipped)
    return RecipeCorpus(label, tuple(recipes), skipped=skipped)


def dump_recipes(c: RecipeCorpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in c.recipes:
            fh.write(json.dumps({"id": r.id, "ingredients": sorted(r.ingredients)}) + "\n")


def match_to_network(c: RecipeCorpus, n: IngredientNetwork) -> tuple[RecipeCorpus, MatchReport]:
    """Restrict recipes to ingredients that exist in ``n``.

    Recipes left with fewer than two ingredients carry no pairs and are
    dropped.
    """
    kept = []
    unknown = 0
    for r in c.recipes:
        matched = r.ingredients & n.nodes
        unknown += len(r.ingredients) - len(matched)
        if len(matched) >= 2:
            kept.append(Recipe(r.id, matched))
    return c.replace(kept), MatchReport(len(c), len(kept), unknown)


def _sample(c: RecipeCorpus, k: int, rng) -> RecipeCorpus:
    idx = sorted(rng.sample(range(len(c)), k))
    return c.replace(c.recipes[i] for i in idx)


def balance_corpora(a: RecipeCorpus, b: RecipeCorpus, seed: int):
    """Downsample the larger corpus to the size of the smaller one.

    Sampling is uniform without replacement and keeps the original order of
    the surviving recipes.
    """
    if not len(a) or not len(b):
        raise DomainError("cannot balance an empty corpus")
    rng = child_rng(seed, "balance")
    if len(a) > len(b):
        return _sample(a, len(b), rng), b
    if len(b) > len(a):
        return a, _sample(b, len(a), rng)
    return a, b


def split_sizes(n: int) -> tuple[int, int, int]:
    train = (8 * n) // 10
    validation = n // 10
    return train, validation, n - train - validation


def split_corpus(c: RecipeCorpus, seed: int) -> CorpusSplit:
    """Shuffle and cut 80/10/10 (floors for train and validation)."""
    if len(c) < 10:
        raise DomainError(f"need at least 10 recipes to split, got {len(c)}")
    order = list(c.recipes)
    child_rng(seed, "split", c.label).shuffle(order)
    ntr, nva, _ = split_sizes(len(order))
    return CorpusSplit(
        train=c.replace(order[:ntr]),
        validation=c.replace(order[ntr : ntr + nva]),
        test=c.replace(order[ntr + nva :]),
        seed=seed,
    )


def build_cooccurrence(c: RecipeCorpus) -> IngredientNetwork:
    """Weight each ingredient pair by the number of recipes containing both."""
    counts: dict[tuple[str, str], int] = defaultdict(int)
    nodes = set()
    for r in c.recipes:
        nodes |= r.ingredients
        for a, b in combinations(sorted(r.ingredients), 2):
            counts[(a, b)] += 1
    return IngredientNetwork(nodes, counts)
