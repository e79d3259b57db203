import json
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from flavornet.errors import DomainError, IntegrityError, ParseError
from flavornet.graph_core import IngredientNetwork
from flavornet.recipes import (
    Recipe,
    RecipeCorpus,
    balance_corpora,
    build_cooccurrence,
    load_recipes,
    match_to_network,
    split_corpus,
    split_sizes,
)


def corpus(*ingredient_sets, label="western"):
    return RecipeCorpus(label, tuple(Recipe(f"r{i}", s) for i, s in enumerate(ingredient_sets)))


def numbered(n, label="western"):
    return corpus(*[{f"a{i}", f"b{i}"} for i in range(n)], label=label)


def write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


class TestLoadRecipes:
    def test_two_records(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_jsonl(path, [{"id": "r1", "ingredients": ["a", "b", "c"]},
                           {"id": "r2", "ingredients": ["a", "b", "c", "d"]}])
        c = load_recipes(path, "western")
        assert len(c) == 2
        assert c.ids() == ["r1", "r2"]

    def test_set_semantics(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_jsonl(path, [{"id": "r1", "ingredients": ["salt", "salt", "egg"]}])
        assert load_recipes(path, "w").recipes[0].ingredients == {"salt", "egg"}

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_jsonl(path, [{"id": "r1", "ingredients": ["a"]}, {"id": "r1", "ingredients": ["b"]}])
        with pytest.raises(IntegrityError):
            load_recipes(path, "w")

    def test_empty_record_skipped(self, tmp_path):
        path = tmp_path / "r.jsonl"
        write_jsonl(path, [{"id": "r1", "ingredients": []}, {"id": "r2", "ingredients": ["a", "b"]}])
        c = load_recipes(path, "w")
        assert c.ids() == ["r2"]
        assert c.skipped == 1

    def test_bad_json_line(self, tmp_path):
        path = tmp_path / "r.jsonl"
        path.write_text('{"id": "r1", "ingredients": ["a"]}\n{oops\n', encoding="utf-8")
        with pytest.raises(ParseError) as exc:
            load_recipes(path, "w")
        assert exc.value.line == 2

    def test_csv_fallback(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("id,ingredients\nr1,apple;pear\nr2,plum; apple ;plum\n", encoding="utf-8")
        c = load_recipes(path, "w")
        assert [r.ingredients for r in c] == [{"apple", "pear"}, {"plum", "apple"}]


class TestMatch:
    def test_intersection(self):
        net = IngredientNetwork(["apple", "pear"])
        matched, report = match_to_network(corpus({"apple", "unicorn_fruit", "pear"}), net)
        assert matched.recipes[0].ingredients == {"apple", "pear"}
        assert report.unknown_ingredient_mentions == 1
        assert report.to_dict() == {"input_recipes": 1, "kept_recipes": 1,
                                    "unknown_ingredient_mentions": 1}

    def test_single_ingredient_dropped(self):
        net = IngredientNetwork(["apple", "pear"])
        matched, report = match_to_network(corpus({"apple", "kiwi"}), net)
        assert len(matched) == 0
        assert report.dropped_recipes == 1

    def test_empty(self):
        matched, report = match_to_network(corpus(), IngredientNetwork(["a"]))
        assert len(matched) == 0 and report.input_recipes == 0

    @given(st.lists(st.frozensets(st.sampled_from("abcdefgh"), min_size=1), max_size=10),
           st.frozensets(st.sampled_from("abcdefgh")))
    def test_never_introduces_unknown_ingredients(self, sets, nodes):
        matched, _ = match_to_network(corpus(*sets), IngredientNetwork(nodes))
        for r in matched:
            assert r.ingredients <= nodes and len(r.ingredients) >= 2


class TestBalance:
    def test_larger_corpus_subsampled(self):
        west, east = numbered(1000), numbered(507, "eastern")
        w2, e2 = balance_corpora(west, east, seed=1)
        assert len(w2) == len(e2) == 507
        assert e2 is east
        assert set(w2.ids()) <= set(west.ids())

    def test_equal_sizes_untouched(self):
        a, b = numbered(20), numbered(20, "eastern")
        assert balance_corpora(a, b, 3) == (a, b)

    def test_deterministic(self):
        a, b = numbered(50), numbered(20, "eastern")
        assert balance_corpora(a, b, 9) == balance_corpora(a, b, 9)

    def test_empty(self):
        with pytest.raises(DomainError):
            balance_corpora(corpus(), numbered(3), 0)


class TestSplit:
    def test_507_recipes(self):
        s = split_corpus(numbered(507), seed=0)
        assert (len(s.train), len(s.validation), len(s.test)) == (405, 50, 52)

    def test_minimal(self):
        s = split_corpus(numbered(10), seed=0)
        assert (len(s.train), len(s.validation), len(s.test)) == (8, 1, 1)

    def test_too_small(self):
        with pytest.raises(DomainError):
            split_corpus(numbered(9), seed=0)

    def test_deterministic(self):
        assert split_corpus(numbered(40), 5) == split_corpus(numbered(40), 5)

    @given(st.integers(10, 300), st.integers(0, 2**32))
    def test_parts_cover_input(self, n, seed):
        c = numbered(n)
        s = split_corpus(c, seed)
        ids = s.train.ids() + s.validation.ids() + s.test.ids()
        assert sorted(ids) == sorted(c.ids())
        assert len(set(ids)) == n
        assert (len(s.train), len(s.validation), len(s.test)) == split_sizes(n)
        assert len(s.train) == (8 * n) // 10 and len(s.validation) == n // 10


class TestCooccurrence:
    def test_counts(self):
        g = build_cooccurrence(corpus({"a", "b", "c"}, {"a", "b"}))
        assert dict(g.edges) == {("a", "b"): 2, ("a", "c"): 1, ("b", "c"): 1}

    def test_single(self):
        assert dict(build_cooccurrence(corpus({"a", "b"})).edges) == {("a", "b"): 1}

    def test_disjoint(self):
        g = build_cooccurrence(corpus({"a", "b"}, {"c", "d"}))
        assert dict(g.edges) == {("a", "b"): 1, ("c", "d"): 1}

    @given(st.lists(st.frozensets(st.sampled_from("abcdefg"), min_size=1), max_size=12))
    def test_total_weight(self, sets):
        g = build_cooccurrence(corpus(*sets))
        assert g.total_weight() == sum(len(list(combinations(s, 2))) for s in sets)
        assert g.nodes == set().union(*sets) if sets else not g.nodes
