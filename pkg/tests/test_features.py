import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rationale.errors import InputError, RationaleError
from rationale.features import (
    FeatureMeta,
    build_layout,
    decode_answer,
    decode_point,
    encode_point,
    implicit_constraints,
    parse_metadata,
)
from rationale.linear import Conjunction, LinExpr, Rat, normalize, render_conjunction

AGE = FeatureMeta("age", "ordinal", lo=Rat(18), hi=Rat(90))
JOB = FeatureMeta("job", "nominal", values=("a", "b", "c"))
INCOME = FeatureMeta("income", "continuous", lo=Rat(0), hi=Rat(200000))


class TestParseMetadata:
    def test_example_document(self):
        doc = {
            "features": [
                {"name": "age", "kind": "ordinal", "min": 18, "max": 90},
                {"name": "job", "kind": "nominal", "values": ["a", "b", "c"]},
                {"name": "income", "kind": "continuous", "min": 0, "max": 200000},
            ]
        }
        metas = parse_metadata(doc)
        assert metas == (AGE, JOB, INCOME)

    def test_string_bounds_parse_exactly(self):
        doc = {"features": [{"name": "x", "kind": "continuous", "min": "0.1", "max": "1/3"}]}
        (m,) = parse_metadata(doc)
        assert m.lo == Fraction(1, 10) and m.hi == Fraction(1, 3)

    def test_float_bounds_rejected(self):
        doc = {"features": [{"name": "x", "kind": "continuous", "min": 0.1, "max": 1.0}]}
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_continuous_bounds_optional(self):
        doc = {"features": [{"name": "x", "kind": "continuous"}]}
        (m,) = parse_metadata(doc)
        assert m.lo is None and m.hi is None

    def test_continuous_half_bounds_rejected(self):
        doc = {"features": [{"name": "x", "kind": "continuous", "min": 0}]}
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_ordinal_requires_integer_bounds(self):
        doc = {"features": [{"name": "x", "kind": "ordinal", "min": "1/2", "max": 3}]}
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_duplicate_feature_rejected(self):
        doc = {
            "features": [
                {"name": "x", "kind": "continuous"},
                {"name": "x", "kind": "continuous"},
            ]
        }
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_single_valued_nominal_rejected(self):
        doc = {"features": [{"name": "j", "kind": "nominal", "values": ["only"]}]}
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_unknown_keys_rejected(self):
        doc = {"features": [{"name": "x", "kind": "continuous", "vals": []}]}
        with pytest.raises(InputError):
            parse_metadata(doc)

    def test_bad_feature_name(self):
        doc = {"features": [{"name": "2x", "kind": "continuous"}]}
        with pytest.raises(InputError):
            parse_metadata(doc)


class TestBuildLayout:
    def test_ordinal_two_instances(self):
        lay = build_layout([AGE], ["F", "CE"])
        assert lay.num_vars == 2
        assert lay.mask == {0, 1}
        assert lay.var_name(0) == "F.age" and lay.var_name(1) == "CE.age"

    def test_one_hot_width(self):
        lay = build_layout([JOB], ["F"])
        assert lay.num_vars == 3
        assert lay.mask == {0, 1, 2}
        assert [lay.var_name(v) for v in range(3)] == ["F.job^a", "F.job^b", "F.job^c"]

    def test_continuous_not_integral(self):
        lay = build_layout([INCOME], ["F", "CE"])
        assert lay.num_vars == 2
        assert lay.mask == frozenset()

    def test_ids_contiguous_and_bijective(self):
        lay = build_layout([AGE, JOB, INCOME], ["F", "CE"])
        assert lay.num_vars == 10
        assert len(set(lay.names)) == 10
        assert lay.instance_vars("F") == tuple(range(5))
        assert lay.instance_vars("CE") == tuple(range(5, 10))
        assert lay.feature_vars("CE", "job") == (6, 7, 8)

    def test_duplicate_instance_rejected(self):
        with pytest.raises(InputError):
            build_layout([AGE], ["F", "F"])

    def test_bad_instance_name_rejected(self):
        with pytest.raises(InputError):
            build_layout([AGE], ["not an ident"])


class TestImplicitConstraints:
    def test_ordinal_bounds(self):
        lay = build_layout([AGE], ["F"])
        psi = implicit_constraints(lay)
        assert render_conjunction(psi, lay.var_name) == "18 <= F.age, F.age <= 90"

    def test_one_hot_bounds_and_sum(self):
        lay = build_layout([FeatureMeta("j", "nominal", values=("a", "b"))], ["F"])
        psi = implicit_constraints(lay)
        assert render_conjunction(psi, lay.var_name) == (
            "0 <= F.j^a, F.j^a <= 1, 0 <= F.j^b, F.j^b <= 1, F.j^a + F.j^b = 1"
        )

    def test_continuous_contributes_nothing(self):
        lay = build_layout([INCOME], ["F", "CE"])
        assert len(implicit_constraints(lay)) == 0

    def test_encoded_points_satisfy_psi(self):
        lay = build_layout([AGE, JOB, INCOME], ["F"])
        psi = implicit_constraints(lay)
        for age, job, income in itertools.product([18, 35, 90], "abc", [0, 100]):
            pt = encode_point(lay, "F", {"age": age, "job": job, "income": income})
            assert psi.satisfied_at(pt)

    def test_integral_block_points_are_one_hot(self):
        lay = build_layout([JOB], ["F"])
        psi = implicit_constraints(lay)
        good = [p for p in itertools.product([0, 1], repeat=3)
                if psi.satisfied_at({v: Rat(p[v]) for v in range(3)})]
        assert good == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


class TestEncodeDecodePoint:
    def test_one_hot_expansion(self):
        lay = build_layout([JOB], ["F"])
        assert encode_point(lay, "F", {"job": "b"}) == {0: 0, 1: 1, 2: 0}

    def test_numeric(self):
        lay = build_layout([AGE], ["F"])
        assert encode_point(lay, "F", {"age": 35}) == {0: 35}

    def test_round_trip(self):
        lay = build_layout([AGE, JOB], ["F"])
        values = {"age": Rat(35), "job": "b"}
        assert decode_point(lay, "F", encode_point(lay, "F", values)) == values

    def test_out_of_domain_nominal(self):
        lay = build_layout([JOB], ["F"])
        with pytest.raises(InputError):
            encode_point(lay, "F", {"job": "z"})

    def test_ordinal_out_of_range(self):
        lay = build_layout([AGE], ["F"])
        with pytest.raises(InputError):
            encode_point(lay, "F", {"age": 17})

    def test_ordinal_rejects_non_integer(self):
        lay = build_layout([AGE], ["F"])
        with pytest.raises(InputError):
            encode_point(lay, "F", {"age": Fraction(35, 2)})

    def test_missing_feature(self):
        lay = build_layout([AGE, JOB], ["F"])
        with pytest.raises(InputError):
            encode_point(lay, "F", {"age": 35})

    def test_continuous_unbounded_by_domain(self):
        lay = build_layout([INCOME], ["F"])
        assert encode_point(lay, "F", {"income": Rat(10**9)}) == {0: 10**9}

    @given(st.integers(18, 90), st.sampled_from("abc"), st.fractions(min_value=-1000, max_value=1000, max_denominator=50))
    def test_round_trip_property(self, age, job, income):
        lay = build_layout([AGE, JOB, INCOME], ["F", "CE"])
        values = {"age": Rat(age), "job": job, "income": income}
        for inst in ("F", "CE"):
            assert decode_point(lay, inst, encode_point(lay, inst, values)) == values


def _lay():
    return build_layout([AGE, JOB, INCOME], ["F", "CE"])


class TestDecodeAnswer:
    def test_pin_to_value(self):
        lay = _lay()
        vb = dict(lay.onehot[("F", "job")])["b"]
        c = Conjunction.of([normalize(LinExpr.var(vb), "=", 1)])
        assert decode_answer(c, lay) == ["F.job = b"]

    def test_pin_to_zero(self):
        lay = _lay()
        vb = dict(lay.onehot[("F", "job")])["b"]
        c = Conjunction.of([normalize(LinExpr.var(vb), "=", 0)])
        assert decode_answer(c, lay) == ["F.job != b"]

    def test_numeric_rendering(self):
        lay = _lay()
        age_ce = lay.numeric[("CE", "age")]
        c = Conjunction.of([normalize(30, "<=", LinExpr.var(age_ce))])
        assert decode_answer(c, lay) == ["30 <= CE.age"]

    def test_fully_determined_block_collapses(self):
        lay = _lay()
        block = dict(lay.onehot[("F", "job")])
        c = Conjunction.of([
            normalize(LinExpr.var(block["a"]), "=", 0),
            normalize(LinExpr.var(block["b"]), "=", 1),
            normalize(LinExpr.var(block["c"]), "=", 0),
        ])
        assert decode_answer(c, lay) == ["F.job = b"]

    def test_all_but_one_excluded_collapses(self):
        lay = _lay()
        block = dict(lay.onehot[("F", "job")])
        c = Conjunction.of([
            normalize(LinExpr.var(block["a"]), "=", 0),
            normalize(LinExpr.var(block["c"]), "=", 0),
        ])
        assert decode_answer(c, lay) == ["F.job = b"]

    def test_plumbing_suppressed(self):
        lay = _lay()
        block = lay.onehot[("F", "job")]
        total = LinExpr.of({v: Rat(1) for _, v in block})
        c = Conjunction.of([
            normalize(0, "<=", LinExpr.var(block[0][1])),
            normalize(LinExpr.var(block[0][1]), "<=", 1),
            normalize(total, "=", 1),
            normalize(LinExpr.var(block[1][1]), "=", 0),
        ])
        assert decode_answer(c, lay) == ["F.job != b"]

    def test_order_preserved(self):
        lay = _lay()
        age_f = lay.numeric[("F", "age")]
        vb = dict(lay.onehot[("CE", "job")])["b"]
        c = Conjunction.of([
            normalize(LinExpr.var(age_f), "<=", 44),
            normalize(LinExpr.var(vb), "=", 1),
            normalize(30, "<", LinExpr.var(age_f)),
        ])
        assert decode_answer(c, lay) == ["F.age <= 44", "CE.job = b", "30 < F.age"]

    def test_never_emits_one_hot_names(self):
        lay = _lay()
        block = lay.onehot[("CE", "job")]
        total = LinExpr.of({v: Rat(1) for _, v in block})
        c = Conjunction.of([
            normalize(total, "=", 1),
            normalize(LinExpr.var(block[2][1]), "=", 0),
        ])
        for text in decode_answer(c, lay):
            assert "^" not in text

    def test_mixed_support_raises(self):
        lay = _lay()
        vb = dict(lay.onehot[("F", "job")])["b"]
        age = lay.numeric[("F", "age")]
        mixed = normalize(LinExpr.var(vb) + LinExpr.var(age), "<=", 10)
        with pytest.raises(RationaleError):
            decode_answer(Conjunction.of([mixed]), lay)

    def test_contradictory_pins_raise(self):
        lay = _lay()
        block = dict(lay.onehot[("F", "job")])
        c = Conjunction.of([
            normalize(LinExpr.var(block["a"]), "=", 1),
            normalize(LinExpr.var(block["b"]), "=", 1),
        ])
        with pytest.raises(RationaleError):
            decode_answer(c, lay)

    def test_strict_unit_forms_decode_by_integrality(self):
        lay = _lay()
        vb = dict(lay.onehot[("F", "job")])["b"]
        c = Conjunction.of([normalize(0, "<", LinExpr.var(vb))])
        assert decode_answer(c, lay) == ["F.job = b"]
