"""Command-line interface for the flavornet pipeline.

Every stage of the pipeline is a subcommand that reads files, writes files
into ``--out`` and logs to standard error.  Exit status is 0 on success,
1 on usage errors (bad flags, missing files) and 2 on data errors.

Any option may also be given in a JSON file passed with ``--config``;
keys are the option names with dashes replaced by underscores, and flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .community import DEFAULT_TRIALS
from .errors import FlavornetError
from .graph_core import (
    degree_histogram,
    filter_local,
    load_bipartite,
    load_network,
    project,
    write_histogram,
    write_network,
)
from .pipeline import (
    PipelineConfig,
    TEST_REPETITIONS,
    VALIDATION_REPETITIONS,
    classify_pair,
    dumps_sweep,
    evaluate,
    load_model,
    prepare_corpora,
    rank_pairs,
    save_model,
    sensitivity,
    specificity,
    sweep,
    train,
)
from .reconciliation import dumps_audit, sanity_check
from .recipes import build_cooccurrence, dump_recipes, load_recipes, match_to_network
from .synthetic import SyntheticSpec, generate_synthetic

logger = logging.getLogger("flavornet")

USAGE_ERROR = 1
DATA_ERROR = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


# option name -> default, filled in per subcommand
_DEFAULTS: dict[str, dict] = {}


def _opt(sub, name: str, *flags, default=None, **kw):
    """Register an option whose default is applied after config merging."""
    _DEFAULTS.setdefault(sub.prog.split()[-1], {})[name] = default
    sub.add_argument(*(flags or (f"--{name.replace('_', '-')}",)), dest=name, default=None, **kw)


def _common(sub):
    _opt(sub, "seed", type=int, default=0, help="root seed (default 0)")
    _opt(sub, "out", default="out", help="output directory (default ./out)")
    sub.add_argument("--config", help="JSON file with option values")
    sub.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flavornet", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = subs.add_parser("generate", help="write a synthetic planted-cuisine dataset")
    _common(p)
    _opt(p, "clusters", type=int, default=4)
    _opt(p, "ingredients_per_cluster", type=int, default=15)
    _opt(p, "compounds_per_cluster", type=int, default=40)
    _opt(p, "compounds_per_ingredient", type=int, default=10)
    _opt(p, "overlap", type=float, default=0.1)
    _opt(p, "recipes", type=int, default=200)
    _opt(p, "size_min", type=int, default=3)
    _opt(p, "size_max", type=int, default=8)
    _opt(p, "noise", type=float, default=0.05)

    p = subs.add_parser("project", help="project a bipartite edge list onto ingredients")
    _common(p)
    _opt(p, "bipartite", required=False, help="ingredient<TAB>compound edge list")
    _opt(p, "ff", type=float, default=None, help="also write a network filtered at this factor")

    p = subs.add_parser("filter", help="locally filter a weighted network")
    _common(p)
    _opt(p, "network")
    _opt(p, "factor", type=float, default=1.0)

    p = subs.add_parser("sanity-check", help="reconcile western/eastern co-occurrence graphs")
    _common(p)
    _opt(p, "west")
    _opt(p, "east")
    _opt(p, "network", help="optional network to match recipes against")
    _opt(p, "fr", type=float, default=0.15)

    for name, help_ in (
        ("train", "train one model and score it on the validation parts"),
        ("evaluate", "repeated training and scoring at one parameter setting"),
        ("sweep", "grid search over ff, fr and knowledge fraction"),
    ):
        p = subs.add_parser(name, help=help_)
        _common(p)
        _opt(p, "network")
        _opt(p, "west")
        _opt(p, "east")
        _opt(p, "trials", type=int, default=DEFAULT_TRIALS)
        _opt(p, "format", choices=["json", "csv"], default="json")
        if name == "sweep":
            _opt(p, "step", type=float, default=0.05)
            _opt(p, "reps", type=int, default=VALIDATION_REPETITIONS)
            _opt(p, "threads", type=int, default=os.cpu_count() or 1)
            _opt(p, "fix_ff", type=float)
            _opt(p, "fix_fr", type=float)
            _opt(p, "fix_knowledge", type=float)
        else:
            _opt(p, "ff", type=float, default=1.0)
            _opt(p, "fr", type=float, default=0.15)
            _opt(p, "knowledge", type=float, default=0.1)
        if name == "evaluate":
            _opt(p, "reps", type=int)
            _opt(p, "target", choices=["validation", "test"], default="validation")

    p = subs.add_parser("classify", help="classify ingredient pairs with a trained model")
    _common(p)
    _opt(p, "model")
    p.add_argument("--pair", action="append", default=[], help="a,b (repeatable)")

    p = subs.add_parser("rank", help="rank all ingredient pairs by compatibility")
    _common(p)
    _opt(p, "model")
    _opt(p, "limit", type=int)
    return parser


def _resolve(args) -> argparse.Namespace:
    defaults = _DEFAULTS.get(args.command, {})
    values = dict(defaults)
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from None
        stray = set(loaded) - set(defaults)
        if stray:
            raise UsageError(f"unknown config key(s) for {args.command}: {sorted(stray)}")
        values.update(loaded)
    for key, value in vars(args).items():
        if value is not None or key not in values:
            values[key] = value
    return argparse.Namespace(**values)


def _need(args, *names):
    for name in names:
        value = getattr(args, name, None)
        if value is None:
            raise UsageError(f"--{name.replace('_', '-')} is required")
        if name in ("bipartite", "network", "west", "east") and not Path(value).is_file():
            raise UsageError(f"file not found: {value}")
        if name == "model" and not Path(value).is_dir():
            raise UsageError(f"model directory not found: {value}")


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")


def _write_metrics(path_stem: Path, metrics: dict, fmt: str) -> Path:
    if fmt == "csv":
        path = path_stem.with_suffix(".csv")
        flat = {k: v for k, v in metrics.items() if not isinstance(v, (list, dict))}
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(flat.keys())
            writer.writerow(flat.values())
    else:
        path = path_stem.with_suffix(".json")
        _write_json(path, metrics)
    return path


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args):
    spec = SyntheticSpec(
        clusters=args.clusters,
        ingredients_per_cluster=args.ingredients_per_cluster,
        compounds_per_cluster=args.compounds_per_cluster,
        compound_overlap=args.overlap,
        recipes_per_corpus=args.recipes,
        recipe_size_range=(args.size_min, args.size_max),
        noise=args.noise,
        seed=args.seed,
        compounds_per_ingredient=args.compounds_per_ingredient,
    )
    bipartite, west, east, labels = generate_synthetic(spec)
    out = _out(args)
    with open(out / "bipartite.tsv", "w", encoding="utf-8") as fh:
        fh.write("#ingredient\tcompound\n")
        for ing, comp in sorted(bipartite.edges):
            fh.write(f"{ing}\t{comp}\n")
    dump_recipes(west, out / "western.jsonl")
    dump_recipes(east, out / "eastern.jsonl")
    with open(out / "labels.tsv", "w", encoding="utf-8") as fh:
        for ing in sorted(labels):
            fh.write(f"{ing}\t{labels[ing]}\n")
    logger.info("wrote %d ingredients, %d + %d recipes to %s", len(labels), len(west), len(east), out)


def cmd_project(args):
    _need(args, "bipartite")
    net = project(load_bipartite(args.bipartite))
    out = _out(args)
    write_network(net, out / "network.tsv")
    write_histogram(degree_histogram(net), out / "degree_histogram.csv", out / "degree_summary.json")
    logger.info("projected network: %d nodes, %d edges", len(net), net.number_of_edges())
    if args.ff is not None:
        filtered = filter_local(net, args.ff)
        write_network(filtered, out / "filtered.tsv")
        write_histogram(
            degree_histogram(filtered),
            out / "degree_histogram_filtered.csv",
            out / "degree_summary_filtered.json",
        )
        logger.info("filtered at %g: %d edges", args.ff, filtered.number_of_edges())


def cmd_filter(args):
    _need(args, "network")
    filtered = filter_local(load_network(args.network), args.factor)
    out = _out(args)
    write_network(filtered, out / "filtered.tsv")
    write_histogram(
        degree_histogram(filtered),
        out / "degree_histogram_filtered.csv",
        out / "degree_summary_filtered.json",
    )


def cmd_sanity_check(args):
    _need(args, "west", "east")
    west = load_recipes(args.west, "western")
    east = load_recipes(args.east, "eastern")
    if args.network:
        _need(args, "network")
        net = load_network(args.network)
        west, _ = match_to_network(west, net)
        east, _ = match_to_network(east, net)
    w = filter_local(build_cooccurrence(west), args.fr)
    e = filter_local(build_cooccurrence(east), args.fr)
    w_clean, e_clean, audit = sanity_check(w, e)
    out = _out(args)
    write_network(w_clean, out / "western_clean.tsv")
    write_network(e_clean, out / "eastern_clean.tsv")
    (out / "audit.jsonl").write_text(dumps_audit(audit), encoding="utf-8")
    logger.info("sanity check: %d decision(s)", len(audit))


def _load_inputs(args):
    _need(args, "network", "west", "east")
    net = load_network(args.network)
    west = load_recipes(args.west, "western")
    east = load_recipes(args.east, "eastern")
    split_w, split_e, reports = prepare_corpora(net, west, east, args.seed)
    for label, report in reports.items():
        logger.info("%s: %s", label, report.to_dict())
    return net, split_w, split_e, reports


def _config(args) -> PipelineConfig:
    return PipelineConfig(
        ff=args.ff, fr=args.fr, knowledge=args.knowledge, trials=args.trials, seed=args.seed
    )


def cmd_train(args):
    net, split_w, split_e, reports = _load_inputs(args)
    config = _config(args)
    result = train(net, split_w.train, split_e.train, config)
    metrics = {
        "ff": config.ff,
        "fr": config.fr,
        "knowledge": config.knowledge,
        "sensitivity": sensitivity(result.partition, split_w.validation),
        "specificity": specificity(result.partition, split_e.validation),
        "codelength": result.partition.codelength,
        "communities": result.partition.number_of_communities(),
        "must_link": len(result.constraints.must_link),
        "cannot_link": len(result.constraints.cannot_link),
        "match": {k: v.to_dict() for k, v in reports.items()},
    }
    out = _out(args)
    save_model(out / "model", result.partition, config, net, result.audit, metrics)
    _write_metrics(out / "metrics", metrics, args.format)


def cmd_evaluate(args):
    net, split_w, split_e, _ = _load_inputs(args)
    config = _config(args)
    reps = args.reps or (TEST_REPETITIONS if args.target == "test" else VALIDATION_REPETITIONS)
    report = evaluate(net, split_w, split_e, config, reps, target=args.target)
    metrics = dict(report.metrics(), target=args.target)
    out = _out(args)
    save_model(out / "model", report.partition, config, net, (), metrics)
    _write_metrics(out / "metrics", metrics, args.format)


def cmd_sweep(args):
    net, split_w, split_e, _ = _load_inputs(args)
    fixed = {
        name: getattr(args, f"fix_{name}")
        for name in ("ff", "fr", "knowledge")
        if getattr(args, f"fix_{name}") is not None
    }
    reports = sweep(
        net, split_w, split_e,
        step=args.step, repetitions=args.reps, seed=args.seed,
        trials=args.trials, fixed=fixed, workers=max(1, args.threads),
    )
    out = _out(args)
    (out / "sweep.csv").write_text(dumps_sweep(reports), encoding="utf-8")
    best = reports[0]
    _write_json(out / "best.json", dict(best.metrics(), seed=best.config.seed))
    save_model(out / "best_model", best.partition, best.config, net, (), best.metrics())
    logger.info("best cell: ff=%g fr=%g knowledge=%g min_score=%.3f",
                best.config.ff, best.config.fr, best.config.knowledge, best.min_score)


def cmd_classify(args):
    _need(args, "model")
    if not args.pair:
        raise UsageError("at least one --pair a,b is required")
    model = load_model(args.model)
    verdicts = []
    for raw in args.pair:
        parts = [x.strip() for x in raw.split(",")]
        if len(parts) != 2 or not all(parts):
            raise UsageError(f"--pair expects 'a,b', got {raw!r}")
        verdicts.append(classify_pair(model.partition, parts[0], parts[1], model.network).to_dict())
    payload = verdicts[0] if len(verdicts) == 1 else verdicts
    _write_json(_out(args) / "verdicts.json", payload)
    print(json.dumps(payload, indent=2))


def cmd_rank(args):
    _need(args, "model")
    model = load_model(args.model)
    ranked = rank_pairs(model.network, model.partition, args.limit)
    with open(_out(args) / "ranking.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["a", "b", "compatible", "score"])
        for v in ranked:
            writer.writerow([v.pair[0], v.pair[1], int(v.compatible), v.score])


COMMANDS = {
    "generate": cmd_generate,
    "project": cmd_project,
    "filter": cmd_filter,
    "sanity-check": cmd_sanity_check,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "classify": cmd_classify,
    "rank": cmd_rank,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        args = _resolve(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"flavornet {args.command}: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (FlavornetError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        print(f"flavornet {args.command}: data error: {exc}", file=sys.stderr)
        return DATA_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
