import json

import jsonschema
import pytest
from hypothesis import given, strategies as st

from formbench.schema import (
    MAX_DEPTH, SchemaError, classify_structure, conforms, inline_defs,
    iter_leaf_paths, leaf_type, node_at, validate_schema,
)
from tests.conftest import load_fixture

FLAT = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "fee": {"type": "number"},
    },
}

NESTED = {
    "type": "object",
    "properties": {
        "name": {"type": "string"},
        "address": {"$ref": "#/$defs/Address"},
    },
    "$defs": {
        "Address": {
            "type": "object",
            "properties": {
                "street": {"type": "string"},
                "zip": {"type": "string"},
            },
        },
    },
}

TABLE = {
    "type": "object",
    "properties": {
        "title": {"type": "string"},
        "rows": {"type": "array", "items": {"$ref": "#/$defs/Row"}},
    },
    "$defs": {
        "Row": {
            "type": "object",
            "properties": {
                "item": {"type": "string"},
                "amount": {"type": "number"},
            },
        },
    },
}


class TestValidate:
    def test_accepts_subset_schemas(self):
        for schema in (FLAT, NESTED, TABLE):
            assert validate_schema(schema) == []

    def test_root_must_be_object(self):
        assert validate_schema({"type": "string"}) == [
            "<root>: root must be an object node"
        ]

    def test_rejects_unsupported_type(self):
        schema = {"type": "object", "properties": {"ok": {"type": "boolean"}}}
        violations = validate_schema(schema)
        assert violations == ["ok: unsupported node type 'boolean'"]

    def test_rejects_foreign_ref(self):
        schema = {
            "type": "object",
            "properties": {"x": {"$ref": "http://example.com/x"}},
        }
        assert any("unsupported $ref" in v for v in validate_schema(schema))

    def test_reports_unresolved_ref(self):
        schema = {"type": "object", "properties": {"x": {"$ref": "#/$defs/Gone"}}}
        assert any("unresolved" in v for v in validate_schema(schema))

    def test_reports_ref_cycle(self):
        schema = {
            "type": "object",
            "properties": {"x": {"$ref": "#/$defs/A"}},
            "$defs": {
                "A": {"type": "object", "properties": {"y": {"$ref": "#/$defs/A"}}},
            },
        }
        assert any("cycle" in v for v in validate_schema(schema))

    def test_depth_cap(self):
        # Build a chain one level past the cap: 5 nested objects.
        leaf: dict = {"type": "string"}
        node: dict = leaf
        for i in range(MAX_DEPTH + 1):
            node = {"type": "object", "properties": {f"k{i}": node}}
        violations = validate_schema(node)
        assert any("deeper than" in v for v in violations)
        # One level shallower passes.
        node = leaf
        for i in range(MAX_DEPTH):
            node = {"type": "object", "properties": {f"k{i}": node}}
        assert validate_schema(node) == []

    def test_fixture_schemas_are_valid(self):
        for name in ("housing.schema.json", "alj.schema.json", "lab.schema.json"):
            assert validate_schema(load_fixture(name)) == []


class TestPaths:
    def test_leaf_paths_flat(self):
        assert [p for p, _ in iter_leaf_paths(FLAT)] == ["name", "fee"]

    def test_leaf_paths_follow_refs(self):
        assert [p for p, _ in iter_leaf_paths(NESTED)] == [
            "name", "address/street", "address/zip",
        ]

    def test_leaf_paths_mark_arrays(self):
        assert [p for p, _ in iter_leaf_paths(TABLE)] == [
            "title", "rows[]/item", "rows[]/amount",
        ]

    def test_node_at_accepts_indexed_and_bare_forms(self):
        for path in ("rows[]/amount", "rows[0]/amount", "rows[17]/amount"):
            assert node_at(TABLE, path) == {"type": "number"}

    def test_node_at_missing_path(self):
        assert node_at(TABLE, "rows[]/price") is None
        assert node_at(FLAT, "name/deeper") is None

    def test_node_at_root(self):
        assert node_at(FLAT, "")["type"] == "object"

    def test_leaf_type(self):
        assert leaf_type(TABLE, "rows[3]/amount") == "number"
        assert leaf_type(TABLE, "title") == "string"
        assert leaf_type(TABLE, "rows") is None      # container, not scalar
        assert leaf_type(TABLE, "missing") is None


class TestInlineDefs:
    def test_drops_defs_and_refs(self):
        flat = inline_defs(NESTED)
        assert "$defs" not in flat
        assert "$ref" not in json.dumps(flat)
        assert flat["properties"]["address"]["properties"]["zip"] == {
            "type": "string"
        }

    def test_source_schema_untouched(self):
        before = json.dumps(TABLE, sort_keys=True)
        inline_defs(TABLE)
        assert json.dumps(TABLE, sort_keys=True) == before

    def test_annotations_on_ref_override_target(self):
        schema = {
            "type": "object",
            "properties": {
                "code": {"$ref": "#/$defs/Code", "max_visual_chars": 5},
            },
            "$defs": {"Code": {"type": "string", "max_visual_chars": 99}},
        }
        flat = inline_defs(schema)
        assert flat["properties"]["code"]["max_visual_chars"] == 5

    def test_unresolved_ref_raises(self):
        schema = {"type": "object", "properties": {"x": {"$ref": "#/$defs/Gone"}}}
        with pytest.raises(SchemaError, match="unresolved"):
            inline_defs(schema)

    def test_cycle_raises(self):
        schema = {
            "type": "object",
            "properties": {"x": {"$ref": "#/$defs/A"}},
            "$defs": {
                "A": {"type": "object", "properties": {"y": {"$ref": "#/$defs/A"}}},
            },
        }
        with pytest.raises(SchemaError, match="cycle"):
            inline_defs(schema)

    def test_same_leaf_paths_after_inlining(self):
        for name in ("housing.schema.json", "alj.schema.json", "lab.schema.json"):
            schema = load_fixture(name)
            flat = inline_defs(schema)
            assert [p for p, _ in iter_leaf_paths(flat)] == [
                p for p, _ in iter_leaf_paths(schema)
            ]


class TestClassify:
    def test_flat(self):
        assert classify_structure(FLAT) == "Flat"

    def test_nested(self):
        assert classify_structure(NESTED) == "Nested"

    def test_table(self):
        assert classify_structure(TABLE) == "Table"

    def test_array_wins_over_nesting(self):
        schema = {
            "type": "object",
            "properties": {
                "inner": {
                    "type": "object",
                    "properties": {
                        "rows": {"type": "array",
                                 "items": {"type": "string"}},
                    },
                },
            },
        }
        assert classify_structure(schema) == "Table"

    def test_fixtures(self):
        assert classify_structure(load_fixture("housing.schema.json")) == "Nested"
        assert classify_structure(load_fixture("alj.schema.json")) == "Table"
        assert classify_structure(load_fixture("lab.schema.json")) == "Table"


class TestConforms:
    def test_accepts_matching_instance(self):
        assert conforms({"name": "a", "fee": 3}, FLAT)
        assert conforms(
            {"title": "t", "rows": [{"item": "x", "amount": 1.5}]}, TABLE
        )

    def test_rejects_extra_key(self):
        assert not conforms({"name": "a", "extra": "b"}, FLAT)

    def test_rejects_bool_as_number(self):
        assert not conforms({"fee": True}, FLAT)

    def test_enum_membership(self):
        schema = {
            "type": "object",
            "properties": {"unit": {"type": "string", "enum": ["kg", "lb"]}},
        }
        assert conforms({"unit": "kg"}, schema)
        assert not conforms({"unit": "oz"}, schema)

    def test_fixture_ground_truth_conforms(self):
        pairs = [
            ("housing.schema.json", "housing.gt.json"),
            ("alj.schema.json", "alj.gt.json"),
            ("lab.schema.json", "lab.gt.json"),
        ]
        for schema_name, gt_name in pairs:
            schema = load_fixture(schema_name)
            gt = load_fixture(gt_name)
            assert conforms(gt["values"], schema), schema_name


# --- oracle: jsonschema agrees with inline_defs on conformance ------------

scalar_nodes = st.sampled_from([
    {"type": "string"},
    {"type": "number"},
    {"type": "string", "enum": ["a", "b"]},
])


@st.composite
def subset_schemas(draw, depth=0):
    if depth >= 2:
        return draw(scalar_nodes)
    choice = draw(st.integers(0, 3))
    if choice == 0:
        return draw(scalar_nodes)
    if choice == 1:
        return {"type": "array", "items": draw(subset_schemas(depth=depth + 1))}
    n = draw(st.integers(1, 3))
    return {
        "type": "object",
        "properties": {
            f"f{i}": draw(subset_schemas(depth=depth + 1)) for i in range(n)
        },
    }


@st.composite
def root_schemas(draw):
    n = draw(st.integers(1, 3))
    return {
        "type": "object",
        "properties": {
            f"f{i}": draw(subset_schemas(depth=1)) for i in range(n)
        },
    }


def build_instance(schema: dict, rng) -> object:
    t = schema["type"]
    if t == "object":
        return {k: build_instance(v, rng) for k, v in schema["properties"].items()}
    if t == "array":
        return [build_instance(schema["items"], rng) for _ in range(rng.randint(0, 2))]
    if t == "string":
        enum = schema.get("enum")
        return rng.choice(enum) if enum else "s" + str(rng.randint(0, 9))
    return rng.randint(0, 100)


@given(root_schemas(), st.integers(0, 2**32 - 1))
def test_inlined_schema_validates_generated_instances(schema, seed):
    import random

    rng = random.Random(seed)
    flat = inline_defs(schema)
    instance = build_instance(schema, rng)
    assert conforms(instance, schema)
    # Independent check with a real JSON-Schema validator. The subset uses
    # closed objects, so tack on additionalProperties for strictness parity.
    strict = json.loads(
        json.dumps(flat).replace(
            '"type": "object"',
            '"type": "object", "additionalProperties": false',
        )
    )
    jsonschema.validate(instance, strict)


@given(root_schemas())
def test_validate_passes_on_generated_schemas(schema):
    assert validate_schema(schema) == []
    assert validate_schema(inline_defs(schema)) == []
