"""Training, scoring, parameter sweeps and pair classification.

A model is trained from the flavour network plus a sample of western
(positive) and eastern (negative) training recipes: both recipe samples are
turned into co-occurrence graphs, filtered, reconciled, and used as
must-link / cannot-link knowledge for community detection on the filtered
flavour network.  Ingredients sharing a community are predicted to pair
well.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations, product
from pathlib import Path

from .community import (
    DEFAULT_TRIALS,
    ConstraintSet,
    Partition,
    detect,
    load_partition,
    write_partition,
)
from .errors import DomainError, UndefinedScoreError
from .graph_core import IngredientNetwork, filter_local, load_network, pair, write_network
from .reconciliation import dumps_audit, sanity_check
from .recipes import (
    CorpusSplit,
    RecipeCorpus,
    balance_corpora,
    build_cooccurrence,
    match_to_network,
    split_corpus,
)
from .seeds import child_rng, derive_seed

logger = logging.getLogger(__name__)

VALIDATION_REPETITIONS = 5
TEST_REPETITIONS = 10


@dataclass(frozen=True)
class PipelineConfig:
    ff: float = 1.0
    fr: float = 0.15
    knowledge: float = 0.1
    trials: int = DEFAULT_TRIALS
    seed: int = 0
    step: float = 0.05

    def __post_init__(self):
        for name in ("ff", "fr", "knowledge"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise DomainError(f"{name} must lie in [0, 1], got {value!r}")
        if not 0 < self.step <= 1:
            raise DomainError(f"step must lie in (0, 1], got {self.step!r}")
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        return cls(**known)


@dataclass(frozen=True)
class RepetitionScore:
    sensitivity: float
    specificity: float
    codelength: float

    @property
    def min_score(self) -> float:
        return min(self.sensitivity, self.specificity)


@dataclass(frozen=True)
class ModelReport:
    partition: Partition
    sensitivity: float
    specificity: float
    config: PipelineConfig
    repetitions: tuple = ()

    @property
    def min_score(self) -> float:
        return min(self.sensitivity, self.specificity)

    @property
    def codelength(self) -> float:
        if not self.repetitions:
            return self.partition.codelength
        return sum(r.codelength for r in self.repetitions) / len(self.repetitions)

    def metrics(self) -> dict:
        return {
            "ff": self.config.ff,
            "fr": self.config.fr,
            "knowledge": self.config.knowledge,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "min_score": self.min_score,
            "codelength": self.codelength,
            "repetitions": [asdict(r) for r in self.repetitions],
        }


@dataclass(frozen=True)
class PairVerdict:
    pair: tuple
    compatible: bool
    score: float
    unknown: bool = False

    def to_dict(self) -> dict:
        return {
            "a": self.pair[0],
            "b": self.pair[1],
            "compatible": self.compatible,
            "score": self.score,
            "unknown": self.unknown,
        }


@dataclass
class TrainResult:
    partition: Partition
    constraints: ConstraintSet
    audit: list = field(default_factory=list)
    dropped_pairs: int = 0


# ---------------------------------------------------------------------------
# data preparation
# ---------------------------------------------------------------------------


def prepare_corpora(flavour: IngredientNetwork, west: RecipeCorpus, east: RecipeCorpus, seed: int):
    """Match both corpora to the network, balance them and split 80/10/10.

    Returns ``(split_west, split_east, match_reports)``.
    """
    west, west_report = match_to_network(west, flavour)
    east, east_report = match_to_network(east, flavour)
    west, east = balance_corpora(west, east, seed)
    return (
        split_corpus(west, seed),
        split_corpus(east, seed),
        {west.label: west_report, east.label: east_report},
    )


def knowledge_size(fraction: float, n: int) -> int:
    # the epsilon absorbs binary representation error such as 0.29 * 100
    return min(n, math.floor(fraction * n + 1e-9))


def sample_knowledge(train_w: RecipeCorpus, train_e: RecipeCorpus, fraction: float, seed: int):
    """Draw ``floor(fraction * N)`` recipes from each training corpus."""
    if not 0 <= fraction <= 1:
        raise DomainError(f"knowledge fraction must lie in [0, 1], got {fraction!r}")
    out = []
    for corpus in (train_w, train_e):
        k = knowledge_size(fraction, len(corpus))
        rng = child_rng(seed, "knowledge", corpus.label)
        idx = sorted(rng.sample(range(len(corpus)), k))
        out.append(corpus.replace(corpus.recipes[i] for i in idx))
    return tuple(out)


# ---------------------------------------------------------------------------
# training and scoring
# ---------------------------------------------------------------------------


def train(
    flavour: IngredientNetwork,
    train_w: RecipeCorpus,
    train_e: RecipeCorpus,
    config: PipelineConfig,
) -> TrainResult:
    network = filter_local(flavour, config.ff)
    know_w, know_e = sample_knowledge(train_w, train_e, config.knowledge, config.seed)
    west = filter_local(build_cooccurrence(know_w), config.fr)
    east = filter_local(build_cooccurrence(know_e), config.fr)
    west, east, audit = sanity_check(west, east)
    constraints = ConstraintSet(frozenset(west.edges), frozenset(east.edges))
    assert not constraints.must_link & constraints.cannot_link
    constraints, dropped = constraints.restrict(network.nodes)
    partition = detect(network, constraints, config.trials, derive_seed(config.seed, "detect"))
    return TrainResult(partition, constraints, audit, dropped)


def _recipe_fractions(p: Partition, recipes: RecipeCorpus, together: bool):
    fractions = []
    skipped = 0
    for r in recipes:
        present = sorted(i for i in r.ingredients if i in p)
        if len(present) < 2:
            skipped += 1
            continue
        pairs = list(combinations(present, 2))
        hits = sum(1 for a, b in pairs if p.same_community(a, b) == together)
        fractions.append(hits / len(pairs))
    return fractions, skipped


def _mean_fraction(p, recipes, together):
    fractions, skipped = _recipe_fractions(p, recipes, together)
    if not fractions:
        raise UndefinedScoreError(f"no scorable recipe in corpus {recipes.label!r}")
    if skipped:
        logger.debug("%s: %d recipe(s) not scorable", recipes.label, skipped)
    return sum(fractions) / len(fractions)


def sensitivity(p: Partition, recipes: RecipeCorpus) -> float:
    """Mean per-recipe fraction of ingredient pairs sharing a community.

    Ingredients missing from ``p`` are ignored; recipes left with fewer
    than two are skipped.
    """
    return _mean_fraction(p, recipes, together=True)


def specificity(p: Partition, recipes: RecipeCorpus) -> float:
    """Mean per-recipe fraction of ingredient pairs split across communities."""
    return _mean_fraction(p, recipes, together=False)


def coverage(p: Partition, recipes: RecipeCorpus) -> tuple[int, int]:
    """Return ``(scored, skipped)`` recipe counts for ``recipes`` under ``p``."""
    fractions, skipped = _recipe_fractions(p, recipes, True)
    return len(fractions), skipped


def _resplit(split: CorpusSplit, seed: int, repetition: int) -> tuple[RecipeCorpus, RecipeCorpus]:
    pool = list(split.train.recipes) + list(split.validation.recipes)
    child_rng(seed, "resplit", split.train.label, repetition).shuffle(pool)
    cut = len(split.train)
    return split.train.replace(pool[:cut]), split.train.replace(pool[cut:])


def evaluate(
    flavour: IngredientNetwork,
    split_w: CorpusSplit,
    split_e: CorpusSplit,
    config: PipelineConfig,
    repetitions: int = VALIDATION_REPETITIONS,
    target: str = "validation",
) -> ModelReport:
    """Average sensitivity/specificity over repeated train/validation draws.

    Each repetition reshuffles the union of the training and validation
    recipes (keeping part sizes) and trains a fresh model.  With
    ``target="validation"`` the model is scored on the redrawn validation
    parts; with ``target="test"`` on the fixed test parts.  The returned
    partition is that of the first repetition.
    """
    if repetitions < 1:
        raise DomainError(f"repetitions must be >= 1, got {repetitions!r}")
    if target not in ("validation", "test"):
        raise DomainError(f"target must be 'validation' or 'test', got {target!r}")
    scores = []
    first = None
    for r in range(repetitions):
        tr_w, va_w = _resplit(split_w, config.seed, r)
        tr_e, va_e = _resplit(split_e, config.seed, r)
        if target == "test":
            va_w, va_e = split_w.test, split_e.test
        rep_config = replace(config, seed=derive_seed(config.seed, "train", r))
        result = train(flavour, tr_w, tr_e, rep_config)
        part = result.partition
        scores.append(
            RepetitionScore(sensitivity(part, va_w), specificity(part, va_e), part.codelength)
        )
        if first is None:
            first = part
    return ModelReport(
        partition=first,
        sensitivity=sum(s.sensitivity for s in scores) / len(scores),
        specificity=sum(s.specificity for s in scores) / len(scores),
        config=config,
        repetitions=tuple(scores),
    )


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def grid(step: float) -> list[float]:
    """``0, step, 2*step, ...`` up to and including 1."""
    if not 0 < step <= 1:
        raise DomainError(f"step must lie in (0, 1], got {step!r}")
    count = math.floor(1 / step + 1e-9)
    values = [round(i * step, 10) for i in range(count + 1)]
    if values[-1] < 1:
        values.append(1.0)
    return values


def rank_key(report: ModelReport):
    c = report.config
    return (
        -report.min_score,
        -(report.sensitivity + report.specificity),
        c.ff,
        c.fr,
        c.knowledge,
    )


def _evaluate_cell(args):
    flavour, split_w, split_e, config, repetitions = args
    return evaluate(flavour, split_w, split_e, config, repetitions)


def sweep(
    flavour: IngredientNetwork,
    split_w: CorpusSplit,
    split_e: CorpusSplit,
    step: float = 0.05,
    repetitions: int = VALIDATION_REPETITIONS,
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    fixed: dict | None = None,
    workers: int = 1,
) -> list[ModelReport]:
    """Evaluate every ``(ff, fr, knowledge)`` cell of the grid and rank them.

    Ranking maximizes ``min(sensitivity, specificity)``, then their sum,
    then prefers smaller parameter values.  ``fixed`` pins any of ``ff``,
    ``fr`` or ``knowledge`` to a single value.
    """
    fixed = fixed or {}
    unknown = set(fixed) - {"ff", "fr", "knowledge"}
    if unknown:
        raise DomainError(f"cannot fix unknown parameter(s) {sorted(unknown)}")
    values = grid(step)
    axes = [[fixed[name]] if name in fixed else values for name in ("ff", "fr", "knowledge")]
    jobs = []
    for index, (ff, fr, k) in enumerate(product(*axes)):
        config = PipelineConfig(
            ff=ff, fr=fr, knowledge=k, trials=trials, step=step,
            seed=derive_seed(seed, "cell", index),
        )
        jobs.append((flavour, split_w, split_e, config, repetitions))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_evaluate_cell, jobs, chunksize=1))
    else:
        reports = [_evaluate_cell(job) for job in jobs]
    return sorted(reports, key=rank_key)


SWEEP_COLUMNS = ["ff", "fr", "knowledge", "sensitivity", "specificity", "min_score", "codelength"]


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def dumps_sweep(reports) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for r in reports:
        c = r.config
        writer.writerow(
            [_fmt(v) for v in (c.ff, c.fr, c.knowledge, r.sensitivity, r.specificity,
                               r.min_score, r.codelength)]
        )
    return out.getvalue()


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


def classify_pair(p: Partition, a: str, b: str, flavour: IngredientNetwork | None = None) -> PairVerdict:
    """Western-context verdict for one ingredient pair.

    Unknown ingredients yield an incompatible verdict flagged ``unknown``.
    ``score`` is the shared-compound weight in ``flavour`` (0 without it).
    """
    if a == b:
        raise DomainError(f"self-pair {a!r} cannot be classified")
    unknown = a not in p or b not in p
    score = flavour.weight(a, b) if flavour is not None and a in flavour and b in flavour else 0
    return PairVerdict(pair(a, b), p.same_community(a, b), score, unknown)


def rank_pairs(n: IngredientNetwork, p: Partition, limit: int | None = None) -> list[PairVerdict]:
    """All node pairs of ``n``; compatible first, then by score, then by name."""
    if limit is not None and limit <= 0:
        return []
    verdicts = [classify_pair(p, a, b, n) for a, b in combinations(sorted(n.nodes), 2)]
    verdicts.sort(key=lambda v: (not v.compatible, -v.score, v.pair))
    return verdicts if limit is None else verdicts[:limit]


# ---------------------------------------------------------------------------
# model bundle
# ---------------------------------------------------------------------------


@dataclass
class Model:
    partition: Partition
    config: PipelineConfig
    network: IngredientNetwork
    metrics: dict = field(default_factory=dict)


def save_model(directory, partition, config, network, audit=(), metrics=None) -> Path:
    """Write a self-contained model directory.

    ``network`` should be the unfiltered projection; it supplies the
    compatibility scores used by classify and rank.
    """
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_partition(partition, d / "partition.tsv")
    write_network(network, d / "network.tsv")
    (d / "config.json").write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")
    (d / "audit.jsonl").write_text(dumps_audit(audit), encoding="utf-8")
    (d / "metrics.json").write_text(json.dumps(metrics or {}, indent=2) + "\n", encoding="utf-8")
    return d


def load_model(directory) -> Model:
    d = Path(directory)
    config = PipelineConfig.from_dict(json.loads((d / "config.json").read_text(encoding="utf-8")))
    metrics_path = d / "metrics.json"
    metrics = json.loads(metrics_path.read_text(encoding="utf-8")) if metrics_path.exists() else {}
    return Model(load_partition(d / "partition.tsv"), config, load_network(d / "network.tsv"), metrics)
