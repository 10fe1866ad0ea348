import itertools
import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from formbench.genpipe import GroundTruthRecord
from formbench.jsonutil import dumps_canonical, parse_lenient
from formbench.qa import ExclusionLedger
from formbench.scoring import (
    COMPLIANT, INVALID_JSON, OTHER_NONCOMPLIANT, SCHEMA_REPRODUCTION,
    SCHEMA_WRAPPED, STATUS_EXCLUDED, STATUS_MATCHED, STATUS_MISSING,
    DocumentScore, ScoreConfig, all_leaves, classify_compliance,
    element_leaves, flatten, levenshtein, match_arrays, normalize_value,
    score_document, score_field_anls, unwrap_envelope,
)
from tests.conftest import load_fixture


# --- normalization -----------------------------------------------------------

class TestNormalize:
    def test_null_is_empty(self):
        assert normalize_value(None) == ""

    def test_numbers_shortest_form(self):
        assert normalize_value(1500) == "1500"
        assert normalize_value(1500.0) == "1500"
        assert normalize_value(1500.5) == "1500.5"
        assert normalize_value(-3.25) == "-3.25"

    def test_whitespace_collapsed(self):
        assert normalize_value("  Maria   Lopez\t ") == "Maria Lopez"
        assert normalize_value("a\nb") == "a b"

    def test_unicode_nfc(self):
        composed = "José"
        decomposed = "José"
        assert normalize_value(composed) == normalize_value(decomposed)

    def test_case_sensitivity_is_default(self):
        assert normalize_value("ABC") != normalize_value("abc")
        assert normalize_value("ABC", case_sensitive=False) == \
            normalize_value("abc", case_sensitive=False)

    def test_booleans(self):
        assert normalize_value(True) == "true"
        assert normalize_value(False) == "false"


# --- edit distance against a full-matrix oracle --------------------------------

def levenshtein_oracle(a: str, b: str) -> int:
    """Textbook full-matrix DP, kept independent of the two-row version."""
    n, m = len(a), len(b)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            dist[i][j] = min(
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
                dist[i - 1][j - 1] + cost,
            )
    return dist[n][m]


class TestLevenshtein:
    def test_known_distances(self):
        assert levenshtein("", "") == 0
        assert levenshtein("abc", "abc") == 0
        assert levenshtein("abc", "") == 3
        assert levenshtein("kitten", "sitting") == 3
        assert levenshtein("Department", "Departmen") == 1

    def test_truncated_tail_scores_point_nine(self):
        assert score_field_anls("Department", "Departmen") == \
            pytest.approx(0.9)

    @given(st.text(max_size=40), st.text(max_size=40))
    def test_matches_full_matrix_oracle(self, a, b):
        assert levenshtein(a, b) == levenshtein_oracle(a, b)

    @given(st.text(max_size=30), st.text(max_size=30))
    def test_symmetry(self, a, b):
        assert levenshtein(a, b) == levenshtein(b, a)

    @given(st.text(max_size=20), st.text(max_size=20), st.text(max_size=20))
    def test_triangle_inequality(self, a, b, c):
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


class TestAnls:
    def test_equal_strings(self):
        assert score_field_anls("x", "x") == 1.0

    def test_both_empty(self):
        assert score_field_anls("", "") == 1.0

    def test_below_tau_collapses_to_zero(self):
        # "abcd" vs "wxyz": similarity 0.0
        assert score_field_anls("abcd", "wxyz") == 0.0
        # similarity 0.25 < tau=0.5
        assert score_field_anls("abcd", "axyz") == 0.0

    def test_exactly_tau_survives(self):
        # "ab" vs "ax": distance 1 over max length 2 -> 0.5
        assert score_field_anls("ab", "ax", tau=0.5) == 0.5

    def test_tau_zero_keeps_raw_similarity(self):
        assert score_field_anls("abcd", "axyz", tau=0.0) == 0.25

    @given(st.text(max_size=25), st.text(max_size=25))
    def test_anls_at_least_em(self, gt, pred):
        em = 1 if gt == pred else 0
        assert score_field_anls(gt, pred) >= em

    @given(st.text(max_size=25), st.text(max_size=25))
    def test_anls_within_unit_interval(self, gt, pred):
        assert 0.0 <= score_field_anls(gt, pred) <= 1.0

    def test_config_validates_tau(self):
        with pytest.raises(ValueError):
            ScoreConfig(tau=1.5)
        with pytest.raises(ValueError):
            ScoreConfig(tau=-0.1)


# --- flattening ----------------------------------------------------------------

class TestFlatten:
    def test_arrays_stop_descent(self):
        view = flatten({"a": 1, "b": {"c": "x"}, "rows": [{"d": 2}]})
        assert view.leaves == {"a": 1, "b/c": "x"}
        assert view.arrays == {"rows": [{"d": 2}]}

    def test_all_leaves_indexes_arrays(self):
        leaves = all_leaves({"rows": [{"d": 2}, {"d": 3}], "tags": ["x"]})
        assert leaves == {"rows[0]/d": 2, "rows[1]/d": 3, "tags[0]": "x"}

    def test_element_leaves_of_scalar(self):
        assert element_leaves("plain") == {"": "plain"}
        assert element_leaves({"a": 1}) == {"a": 1}


# --- order-invariant array matching against a brute-force oracle ----------------

def overlap_count(gt_element, pred_element) -> int:
    g = {k: normalize_value(v) for k, v in element_leaves(gt_element).items()}
    p = {k: normalize_value(v) for k, v in element_leaves(pred_element).items()}
    return sum(1 for k, v in g.items() if p.get(k) == v)


def assignment_oracle(gt_elements, pred_elements):
    """Enumerate every maximal assignment; return (best total, lexicographically
    smallest optimal pair list)."""
    n, m = len(gt_elements), len(pred_elements)
    matrix = [
        [overlap_count(g, p) for p in pred_elements] for g in gt_elements
    ]
    k = min(n, m)
    best_total = -1
    best_pairs = None
    for rows in itertools.combinations(range(n), k):
        for cols in itertools.permutations(range(m), k):
            total = sum(matrix[r][c] for r, c in zip(rows, cols))
            pairs = list(zip(rows, cols))
            if total > best_total or (
                total == best_total and pairs < best_pairs
            ):
                best_total = total
                best_pairs = pairs
    return best_total, best_pairs or []


elements = st.dictionaries(
    st.sampled_from(["a", "b", "c"]),
    st.sampled_from(["x", "y"]),
    max_size=3,
)
small_arrays = st.tuples(
    st.lists(elements, max_size=3), st.lists(elements, max_size=3),
)


class TestMatchArrays:
    def test_identity_match(self):
        rows = [{"a": "1"}, {"a": "2"}]
        result = match_arrays(rows, list(rows))
        assert result.pairs == [(0, 0), (1, 1)]
        assert result.total_overlap == 2
        assert result.unmatched_gt == []
        assert result.surplus_pred == []

    def test_shuffled_predictions_pair_back(self):
        gt = [{"item": "A", "fee": 1}, {"item": "B", "fee": 2},
              {"item": "C", "fee": 3}]
        pred = [gt[2], gt[0], gt[1]]
        result = match_arrays(gt, pred)
        assert result.pairs == [(0, 1), (1, 2), (2, 0)]
        assert result.total_overlap == 6

    def test_scarce_predictions_leave_gt_unmatched(self):
        gt = [{"a": "x"}, {"a": "y"}]
        result = match_arrays(gt, [{"a": "y"}])
        assert result.pairs == [(1, 0)]
        assert result.unmatched_gt == [0]
        assert result.surplus_pred == []

    def test_surplus_predictions_tallied(self):
        gt = [{"a": "x"}]
        result = match_arrays(gt, [{"a": "q"}, {"a": "x"}, {"a": "z"}])
        assert result.pairs == [(0, 1)]
        assert sorted(result.surplus_pred) == [0, 2]

    def test_ties_go_to_lowest_indices(self):
        gt = [{"a": "x"}, {"a": "x"}]
        pred = [{"a": "x"}, {"a": "x"}]
        assert match_arrays(gt, pred).pairs == [(0, 0), (1, 1)]

    def test_empty_sides(self):
        result = match_arrays([], [{"a": "x"}])
        assert result.pairs == []
        assert result.surplus_pred == [0]
        result = match_arrays([{"a": "x"}], [])
        assert result.unmatched_gt == [0]

    @settings(deadline=None)
    @given(small_arrays)
    def test_matches_brute_force_oracle(self, arrays):
        gt, pred = arrays
        want_total, want_pairs = assignment_oracle(gt, pred)
        got = match_arrays(gt, pred)
        assert got.total_overlap == max(want_total, 0)
        assert got.pairs == want_pairs

    @settings(deadline=None)
    @given(small_arrays)
    def test_assignment_is_maximal_and_partitions(self, arrays):
        gt, pred = arrays
        got = match_arrays(gt, pred)
        assert len(got.pairs) == min(len(gt), len(pred))
        matched_gt = {gi for gi, _ in got.pairs}
        matched_pred = {pi for _, pi in got.pairs}
        assert matched_gt | set(got.unmatched_gt) == set(range(len(gt)))
        assert matched_pred | set(got.surplus_pred) == set(range(len(pred)))
        assert not matched_gt & set(got.unmatched_gt)
        assert not matched_pred & set(got.surplus_pred)

    @settings(deadline=None)
    @given(st.lists(elements, min_size=1, max_size=4), st.randoms())
    def test_permutation_invariant_total(self, gt, rnd):
        pred = list(gt)
        rnd.shuffle(pred)
        result = match_arrays(gt, pred)
        assert result.total_overlap == sum(len(e) for e in gt)
        assert result.unmatched_gt == []


# --- envelope unwrapping ---------------------------------------------------------

class TestUnwrap:
    def test_properties_wrapper(self):
        wrapped = {"type": "object", "properties": {"a": "x", "b": 2}}
        assert unwrap_envelope(wrapped) == {"a": "x", "b": 2}

    def test_nested_wrappers(self):
        wrapped = {
            "type": "object",
            "properties": {
                "inner": {"type": "object", "properties": {"a": "x"}},
            },
        }
        assert unwrap_envelope(wrapped) == {"inner": {"a": "x"}}

    def test_array_items_wrapper(self):
        wrapped = {"type": "array", "items": [{"value": "x"}, "y"]}
        assert unwrap_envelope(wrapped) == ["x", "y"]

    def test_value_envelope(self):
        assert unwrap_envelope({"value": "x"}) == "x"
        assert unwrap_envelope({"const": 5}) == 5

    def test_plain_instance_untouched(self):
        instance = {"name": "Maria", "rows": [{"fee": 1}]}
        assert unwrap_envelope(instance) == instance

    def test_object_with_extra_keys_not_a_wrapper(self):
        shaped = {"type": "object", "properties": {"a": 1}, "name": "keep"}
        assert unwrap_envelope(shaped) == shaped

    def test_fixture_wrapped_unwraps_to_compliant(self):
        wrapped = load_fixture("lab_pred_wrapped.json")
        compliant = load_fixture("lab_pred_compliant.json")
        assert unwrap_envelope(wrapped) == compliant

    json_values = st.recursive(
        st.one_of(
            st.none(), st.booleans(), st.integers(-5, 5),
            st.sampled_from(["x", "value", "type", "object", "properties"]),
        ),
        lambda children: st.one_of(
            st.lists(children, max_size=3),
            st.dictionaries(
                st.sampled_from(
                    ["type", "properties", "items", "value", "a", "b"]
                ),
                children, max_size=3,
            ),
        ),
        max_leaves=12,
    )

    @settings(deadline=None)
    @given(json_values)
    def test_idempotent(self, value):
        once = unwrap_envelope(value)
        assert unwrap_envelope(once) == once


# --- compliance --------------------------------------------------------------------

class TestCompliance:
    def setup_method(self):
        self.schema = load_fixture("lab.schema.json")

    def test_compliant_fixture(self):
        parsed = load_fixture("lab_pred_compliant.json")
        assert classify_compliance(parsed, self.schema) == COMPLIANT

    def test_wrapped_fixture(self):
        parsed = load_fixture("lab_pred_wrapped.json")
        assert classify_compliance(parsed, self.schema) == SCHEMA_WRAPPED

    def test_echo_fixture(self):
        parsed = load_fixture("lab_pred_echo.json")
        assert classify_compliance(parsed, self.schema) == SCHEMA_REPRODUCTION

    def test_unparsed_is_invalid(self):
        assert classify_compliance(None, self.schema) == INVALID_JSON

    def test_unrelated_object_is_other(self):
        assert classify_compliance({}, self.schema) == OTHER_NONCOMPLIANT
        assert classify_compliance(
            {"totally": "unrelated"}, self.schema
        ) == OTHER_NONCOMPLIANT
        assert classify_compliance(["a", "b"], self.schema) == \
            OTHER_NONCOMPLIANT

    def test_partial_answer_still_compliant(self):
        parsed = {"laboratory_name": "Acme Labs"}
        assert classify_compliance(parsed, self.schema) == COMPLIANT

    def test_reproduction_wins_over_wrapped(self):
        # an echo inside a properties wrapper is still an echo
        echo = load_fixture("lab_pred_echo.json")
        wrapped_echo = {"type": "object", "properties": echo["properties"]} \
            if "properties" in echo else {"type": "object", "properties": echo}
        assert classify_compliance(wrapped_echo, self.schema) == \
            SCHEMA_REPRODUCTION


# --- lenient parsing ------------------------------------------------------------

class TestLenientParse:
    def test_plain_json(self):
        assert parse_lenient('{"a": 1}') == {"a": 1}

    def test_fenced_json(self):
        text = 'Sure, here you go:\n```json\n{"a": 1}\n```\nHope that helps.'
        assert parse_lenient(text) == {"a": 1}

    def test_embedded_object(self):
        assert parse_lenient('The answer is {"a": [1, 2]} as requested.') \
            == {"a": [1, 2]}

    def test_garbage_is_none(self):
        assert parse_lenient("I cannot find any fields.") is None
        assert parse_lenient("") is None


# --- document scoring --------------------------------------------------------------

def lab_gt() -> GroundTruthRecord:
    raw = load_fixture("lab.gt.json")
    return GroundTruthRecord(
        doc_id=raw["doc_id"], values=raw["values"],
        generation_seed=raw.get("generation_seed", 0),
    )


class TestScoreDocument:
    def test_ground_truth_as_prediction_is_perfect(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        score = score_document(gt, schema, dumps_canonical(gt.values))
        assert score.compliance == COMPLIANT
        assert score.em == 1.0
        assert score.anls == 1.0
        assert score.perfect

    def test_wrapped_prediction_keeps_accuracy(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        wrapped = json.dumps(
            {"type": "object", "properties": gt.values}
        )
        score = score_document(gt, schema, wrapped)
        assert score.compliance == SCHEMA_WRAPPED
        assert score.em == 1.0

    def test_echo_prediction_scores_zero(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        echo = json.dumps(load_fixture("lab_pred_echo.json"))
        score = score_document(gt, schema, echo)
        assert score.compliance == SCHEMA_REPRODUCTION
        assert score.em == 0.0

    def test_invalid_json_scores_zero_but_keeps_fields(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        score = score_document(gt, schema, "no json here")
        assert score.compliance == INVALID_JSON
        assert score.em == 0.0
        assert all(f.status == STATUS_MISSING for f in score.fields)

    def test_absent_field_with_empty_gt_matches(self):
        gt = GroundTruthRecord("d", {"a": "", "b": "real"}, 0)
        schema = {"type": "object", "properties": {
            "a": {"type": "string"}, "b": {"type": "string"}}}
        score = score_document(gt, schema, '{"b": "real"}')
        by_path = {f.field_path: f for f in score.fields}
        assert by_path["a"].em == 1
        assert by_path["a"].status == STATUS_MATCHED
        assert score.perfect

    def test_null_prediction_equals_empty_gt(self):
        gt = GroundTruthRecord("d", {"a": ""}, 0)
        schema = {"type": "object", "properties": {"a": {"type": "string"}}}
        score = score_document(gt, schema, '{"a": null}')
        assert score.em == 1.0

    def test_case_insensitive_config(self):
        gt = GroundTruthRecord("d", {"a": "Maria"}, 0)
        schema = {"type": "object", "properties": {"a": {"type": "string"}}}
        strict = score_document(gt, schema, '{"a": "maria"}')
        loose = score_document(
            gt, schema, '{"a": "maria"}',
            config=ScoreConfig(case_sensitive=False),
        )
        assert strict.em == 0.0
        assert loose.em == 1.0

    def test_shuffled_table_rows_score_perfect(self):
        raw = load_fixture("alj.gt.json")
        gt = GroundTruthRecord(raw["doc_id"], raw["values"], 0)
        schema = load_fixture("alj.schema.json")
        shuffled = json.loads(json.dumps(gt.values))
        rnd = random.Random(4)
        rnd.shuffle(shuffled["alj_experience"])
        score = score_document(gt, schema, json.dumps(shuffled))
        assert score.category == "Table"
        assert score.em == 1.0
        assert score.perfect

    def test_surplus_rows_counted_but_not_penalized_in_em(self):
        gt = GroundTruthRecord(
            "d", {"rows": [{"item": "A"}]}, 0,
        )
        schema = {
            "type": "object",
            "properties": {"rows": {
                "type": "array",
                "items": {"type": "object",
                          "properties": {"item": {"type": "string"}}},
            }},
        }
        pred = '{"rows": [{"item": "A"}, {"item": "Z"}]}'
        score = score_document(gt, schema, pred)
        assert score.em == 1.0
        assert score.surplus_elements == 1

    def test_missing_array_leaves_rows_missing(self):
        gt = GroundTruthRecord("d", {"rows": [{"item": "A"}]}, 0)
        schema = {
            "type": "object",
            "properties": {"rows": {
                "type": "array",
                "items": {"type": "object",
                          "properties": {"item": {"type": "string"}}},
            }},
        }
        score = score_document(gt, schema, "{}")
        assert score.em == 0.0
        assert score.fields[0].field_path == "rows[0]/item"
        assert score.fields[0].status == STATUS_MISSING

    def test_excluded_field_outside_averages(self):
        gt = GroundTruthRecord("doc1", {"a": "x", "b": "y"}, 0)
        schema = {"type": "object", "properties": {
            "a": {"type": "string"}, "b": {"type": "string"}}}
        ledger = ExclusionLedger(excluded_fields=(("doc1", "b", "reason"),))
        score = score_document(gt, schema, '{"a": "x", "b": "wrong"}', ledger)
        by_path = {f.field_path: f for f in score.fields}
        assert by_path["b"].status == STATUS_EXCLUDED
        assert score.em == 1.0
        assert score.perfect

    def test_excluded_array_prefix_covers_members(self):
        gt = GroundTruthRecord(
            "doc1", {"a": "x", "rows": [{"item": "A"}]}, 0,
        )
        schema = {
            "type": "object",
            "properties": {
                "a": {"type": "string"},
                "rows": {"type": "array",
                         "items": {"type": "object",
                                   "properties": {"item": {"type": "string"}}}},
            },
        }
        ledger = ExclusionLedger(excluded_fields=(("doc1", "rows", "r"),))
        score = score_document(gt, schema, '{"a": "x"}', ledger)
        assert {f.field_path for f in score.fields
                if f.status == STATUS_EXCLUDED} == {"rows[0]/item"}
        assert score.em == 1.0

    def test_round_trip_through_dict(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        score = score_document(gt, schema, dumps_canonical(gt.values))
        again = DocumentScore.from_dict(score.to_dict())
        assert again.doc_id == score.doc_id
        assert again.em == score.em
        assert [f.field_path for f in again.fields] == \
            [f.field_path for f in score.fields]

    def test_document_anls_at_least_em(self):
        gt = lab_gt()
        schema = load_fixture("lab.schema.json")
        for text in (
            dumps_canonical(gt.values),
            '{"laboratory_name": "Pace Analytcal"}',  # near miss
            "garbage",
            json.dumps(load_fixture("lab_pred_wrapped.json")),
        ):
            score = score_document(gt, schema, text)
            assert score.anls >= score.em
