import json

import pytest
from deepdiff import DeepDiff

from combinatorial_cstar.exceptions import InputError, InputSyntaxError
from combinatorial_cstar.input_handler import INPUT_FORMAT, parse_input, serialize
from combinatorial_cstar.utils import fixture_path


@pytest.fixture
def graph_document():
    return json.loads(fixture_path("fixture_a").read_text())


@pytest.fixture
def loop_document():
    return json.loads(fixture_path("loop").read_text())


class TestParseInput:
    def test_graph(self, spec_a):
        cat = spec_a.category
        assert spec_a.kind == "graph"
        assert spec_a.name == "fixture_a"
        assert cat.names == ("v", "w", "e")
        assert cat.objects == {0, 1}
        assert cat.src == (0, 1, 1)
        assert cat.rng == (0, 1, 0)
        assert cat.degree == ((0,), (0,), (1,))
        assert spec_a.edges == (2,)
        assert not spec_a.cyclic

    def test_table_form_matches_graph_form(self, spec_a):
        table = parse_input(fixture_path("fixture_a_table")).category
        graph = spec_a.category
        assert table.names == graph.names
        assert table.src == graph.src
        assert table.rng == graph.rng
        assert dict(table.table) == dict(graph.table)
        assert table.degree == graph.degree

    def test_monoid(self):
        cat = parse_input(fixture_path("fixture_b")).category
        assert cat.size == 2
        assert cat.objects == {0}
        assert cat.compose(1, 1) == 0
        assert cat.degree is None

    def test_square_identifies_paths(self):
        cat = parse_input(fixture_path("fixture_c")).category
        assert cat.size == 9
        assert cat.id_of("a.c") == 8
        assert "b.d'" not in cat.names
        assert cat.compose(cat.id_of("b"), cat.id_of("d'")) == 8
        assert cat.degree[8] == (1, 1)

    def test_two_squares(self):
        cat = parse_input(fixture_path("fixture_d")).category
        assert cat.size == 12

    @pytest.mark.parametrize("source", ["dict", "text", "path", "str"])
    def test_sources(self, graph_document, source):
        given = {
            "dict": graph_document,
            "text": json.dumps(graph_document),
            "path": fixture_path("fixture_a"),
            "str": str(fixture_path("fixture_a")),
        }[source]
        assert parse_input(given).category.size == 3


class TestMalformedInput:
    def test_syntax_error_has_position(self):
        with pytest.raises(InputSyntaxError) as err:
            parse_input('{\n  "format": \n}')
        assert err.value.line == 3
        assert err.value.column == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            parse_input(tmp_path / "missing.json")

    @pytest.mark.parametrize(
        "change",
        [
            {"format": "cstar-input/0"},
            {"kind": "hypergraph"},
            {"edges": [{"name": "e", "range": "v", "source": "u"}]},
            {"edges": [{"name": "v", "range": "v", "source": "w"}]},
            {"edges": [{"range": "v", "source": "w"}]},
        ],
        ids=["format", "kind", "unknown_vertex", "duplicate_name", "missing_name"],
    )
    def test_rejected(self, graph_document, change):
        graph_document.update(change)
        with pytest.raises(InputError):
            parse_input(graph_document)

    def test_not_an_object(self):
        with pytest.raises(InputError):
            parse_input("[1, 2]")

    def test_monoid_table_must_be_square(self):
        doc = json.loads(fixture_path("fixture_b").read_text())
        doc["table"] = [["1", "g"]]
        with pytest.raises(InputError):
            parse_input(doc)

    def test_square_must_close_up(self):
        doc = json.loads(fixture_path("fixture_c").read_text())
        doc["squares"] = [["a", "c", "d'", "b"]]
        with pytest.raises(InputError):
            parse_input(doc)


class TestCyclicInput:
    def test_depth_from_options(self, loop_document):
        spec = parse_input(loop_document)
        assert spec.cyclic
        assert spec.category.depth_bound == 3
        assert spec.category.size == 4

    def test_depth_argument_overrides(self, loop_document):
        spec = parse_input(loop_document, depth=2)
        assert spec.category.size == 3

    def test_no_depth(self, loop_document):
        del loop_document["options"]
        with pytest.raises(InputError):
            parse_input(loop_document)

    def test_refused_at_cstar_level(self, loop_document):
        with pytest.raises(InputError):
            parse_input(loop_document, require_cstar=True)

    def test_acyclic_ignores_depth(self, graph_document):
        spec = parse_input(graph_document, depth=1)
        assert not spec.cyclic
        assert spec.category.size == 3


class TestSerialize:
    @pytest.mark.parametrize(
        "name", ["fixture_a", "fixture_a_table", "fixture_b", "fixture_c", "loop"]
    )
    def test_round_trip(self, name):
        spec = parse_input(fixture_path(name))
        text = serialize(spec)
        assert parse_input(text) == spec
        original = json.loads(fixture_path(name).read_text())
        assert DeepDiff(json.loads(text), original, ignore_order=True) == {}

    def test_format_tag(self, spec_a):
        assert json.loads(serialize(spec_a))["format"] == INPUT_FORMAT
