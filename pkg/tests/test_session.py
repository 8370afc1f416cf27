"""Session layer: dialogue goldens, script round trips, state management."""

import json
from pathlib import Path

import pytest

from rationale.errors import InputError
from rationale.linear import Rat
from rationale.session import (
    Answer,
    Session,
    apply_command,
    parse_command,
    render_answer_json,
    render_answer_text,
    split_options,
)
from rationale.tree import parse_tree, predict

FIXTURES = Path(__file__).parent / "fixtures"

META = json.loads((FIXTURES / "credit_meta.json").read_text())
TREE = json.loads((FIXTURES / "credit_tree.json").read_text())

DENY_RULES_TEXT = (
    "F.income <= 60000, F.lease = active, F.age <= 44\n"
    "F.income <= 60000, F.lease = paid, F.age <= 35\n"
    "60000 < F.income, F.age <= 35\n"
)

SHADOW = ("projection eliminated integer variables; "
          "shown constraints are their rational shadow")

MIN_CHANGE_TEXT = (
    "CE.income <= 60000, CE.lease = active, 44 < CE.age\n"
    "min = 5/36\n"
    "witness CE: age=45, income=40000, lease=active\n"
    f"note: {SHADOW}\n"
)

MIN_CHANGE_JSON = (
    '{"members":[[{"text":"CE.income <= 60000"},{"text":"CE.lease = active"},'
    '{"text":"44 < CE.age"}]],"min":"5/36","attained":true,'
    '"witnesses":[{"CE":{"age":"45","income":"40000","lease":"active"}}],'
    f'"note":"{SHADOW}"}}'
)


def credit_session():
    s = Session(META)
    s.model(TREE)
    return s


def pinned_session():
    s = credit_session()
    s.instance("F", "credit", "deny")
    s.constraint("F.age = 35, F.income = 40000, F.lease = active")
    s.instance("CE", "credit", "approve")
    return s


class TestDialogue:
    def test_deny_rules_golden(self):
        s = credit_session()
        s.instance("F", "credit", "deny")
        a = s.solveopt(project=["F"])
        assert render_answer_text(a) == DENY_RULES_TEXT
        assert a.min is None and a.note is None

    def test_minimal_change_golden(self):
        s = pinned_session()
        a = s.solveopt(project=["CE"], minimize="l1norm(F, CE)")
        assert render_answer_text(a) == MIN_CHANGE_TEXT
        assert render_answer_json(a) == MIN_CHANGE_JSON

    def test_age_cap_empties_the_answer(self):
        s = pinned_session()
        s.constraint("CE.age <= 35")
        a = s.solveopt(project=["CE"], minimize="l1norm(F, CE)")
        assert a.members == ()
        assert render_answer_text(a) == "no solution\n"
        assert render_answer_json(a) == '{"members":[]}'

    def test_retraction_restores_prior_bytes(self):
        s = pinned_session()
        before = render_answer_text(s.solveopt(project=["CE"], minimize="l1norm(F, CE)"))
        cid = s.constraint("CE.age <= 35")
        assert s.solveopt(project=["CE"], minimize="l1norm(F, CE)").members == ()
        s.retract(cid)
        after = render_answer_text(s.solveopt(project=["CE"], minimize="l1norm(F, CE)"))
        assert after == before == MIN_CHANGE_TEXT

    def test_witness_classifies_as_declared(self):
        s = pinned_session()
        a = s.solveopt(project=["CE"], minimize="l1norm(F, CE)")
        (w,) = a.witnesses
        tree = parse_tree(TREE, s.metas)
        point = {
            "age": Rat(w["CE"]["age"]),
            "income": Rat(w["CE"]["income"]),
            "lease": w["CE"]["lease"],
        }
        assert predict(tree, point) == ("approve", Rat(1))

    def test_projection_mentions_only_kept_instance(self):
        s = pinned_session()
        a = s.solveopt(project=["CE"], minimize="l1norm(F, CE)")
        for rows in a.members:
            for text in rows:
                assert "CE." in text and "F." not in text

    def test_feature_granular_projection(self):
        s = pinned_session()
        a = s.solveopt(project=["CE.age"])
        assert a.members == (("44 < CE.age",), ("35 < CE.age",))
        assert a.note == SHADOW

    def test_minimize_without_project_keeps_both_instances(self):
        s = pinned_session()
        a = s.solveopt(minimize="l1norm(F, CE)")
        assert a.min == Rat(5, 36) and a.attained
        assert a.note is None
        (w,) = a.witnesses
        assert set(w) == {"F", "CE"}
        assert w["F"] == {"age": "35", "income": "40000", "lease": "active"}

    def test_user_pins_survive_display_pruning(self):
        s = pinned_session()
        a = s.solveopt(project=["F"])
        assert a.members == (("F.age = 35", "F.income = 40000", "F.lease = active"),)


class TestDeterminism:
    def run_all(self):
        s = pinned_session()
        out = [render_answer_text(s.solveopt(project=["F"]))]
        out.append(render_answer_json(s.solveopt(project=["CE"], minimize="l1norm(F, CE)")))
        s.constraint("CE.age <= 35")
        out.append(render_answer_text(s.solveopt(minimize="l1norm(F, CE)")))
        return out

    def test_fresh_sessions_agree_byte_for_byte(self):
        assert self.run_all() == self.run_all()


class TestStateManagement:
    def test_duplicate_model_registration(self):
        s = credit_session()
        with pytest.raises(InputError) as e:
            s.model(TREE)
        assert e.value.kind == "duplicate"

    def test_duplicate_instance_name(self):
        s = credit_session()
        s.instance("F", "credit", "deny")
        with pytest.raises(InputError) as e:
            s.instance("F", "credit", "approve")
        assert e.value.kind == "duplicate"

    def test_unknown_model_reference(self):
        s = credit_session()
        with pytest.raises(InputError) as e:
            s.instance("F", "nope", "deny")
        assert e.value.kind == "model"

    def test_unknown_label_lists_classes(self):
        s = credit_session()
        with pytest.raises(InputError) as e:
            s.instance("F", "credit", "maybe")
        assert "approve, deny" in str(e.value)

    def test_minconf_range_checked(self):
        s = credit_session()
        with pytest.raises(InputError):
            s.instance("F", "credit", "deny", minconf=Rat(3, 2))

    def test_model_requires_metadata(self):
        s = Session()
        with pytest.raises(InputError) as e:
            s.model(TREE)
        assert e.value.kind == "metadata"

    def test_constraint_against_undeclared_instance(self):
        s = credit_session()
        with pytest.raises(InputError) as e:
            s.constraint("F.age = 30")
        assert e.value.kind == "unknown_ref"

    def test_constraints_recompile_when_layout_grows(self):
        s = credit_session()
        s.instance("F", "credit", "deny")
        s.constraint("F.age = 35, F.income = 40000, F.lease = active")
        s.instance("CE", "credit", "approve")
        a = s.solveopt(project=["F"])
        assert a.members == (("F.age = 35", "F.income = 40000", "F.lease = active"),)

    def test_retract_unknown_id(self):
        s = pinned_session()
        with pytest.raises(InputError):
            s.retract(99)

    def test_undo_is_exact_inverse(self):
        s = pinned_session()
        before = render_answer_text(s.solveopt(minimize="l1norm(F, CE)"))
        s.constraint("CE.age <= 35")
        assert s.undo() == 2
        assert render_answer_text(s.solveopt(minimize="l1norm(F, CE)")) == before

    def test_undo_on_empty_stack(self):
        s = credit_session()
        with pytest.raises(InputError):
            s.undo()

    def test_reset_clears_constraints_only(self):
        s = pinned_session()
        s.reset()
        assert s.constraints == []
        assert s.decl_order == ["F", "CE"]
        a = s.solveopt(project=["F"])
        assert render_answer_text(a).startswith(DENY_RULES_TEXT)
        assert a.note == SHADOW

    def test_cids_grow_over_session_lifetime(self):
        s = pinned_session()
        assert s.constraint("CE.age <= 35") == 2
        s.retract(2)
        assert s.constraint("CE.age <= 36") == 3

    def test_show_dump(self):
        s = pinned_session()
        assert s.show() == (
            "features: 3\n"
            "model credit\n"
            "instance F credit label=deny\n"
            "instance CE credit label=approve\n"
            "constraint 1: F.age = 35, F.income = 40000, F.lease = active\n"
        )

    def test_empty_session_solve(self):
        s = Session(META)
        a = s.solveopt()
        assert a.members == ((),)
        assert render_answer_text(a) == "true\n"

    def test_unknown_project_reference(self):
        s = pinned_session()
        with pytest.raises(InputError) as e:
            s.solveopt(project=["G"])
        assert e.value.kind == "project"
        with pytest.raises(InputError):
            s.solveopt(project=["CE.salary"])


class TestScriptRoundTrip:
    def drive(self):
        s = pinned_session()
        outputs = [render_answer_json(s.solveopt(project=["F"]))]
        outputs.append(
            render_answer_json(s.solveopt(project=["CE"], minimize="l1norm(F, CE)"))
        )
        s.constraint("CE.age <= 35")
        outputs.append(
            render_answer_json(s.solveopt(project=["CE"], minimize="l1norm(F, CE)"))
        )
        s.retract(2)
        outputs.append(
            render_answer_json(s.solveopt(project=["CE"], minimize="l1norm(F, CE)"))
        )
        return s, outputs

    def test_export_references_bundle_paths(self):
        s, _ = self.drive()
        bundle = s.export_script()
        assert set(bundle["models"]) == {"credit.json"}
        assert bundle["metadata"] == META
        assert "model credit.json" in bundle["script"].splitlines()

    def test_replay_reproduces_answer_bytes(self):
        s, outputs = self.drive()
        bundle = s.export_script()
        replay = Session(bundle["metadata"])
        got = []
        for line in bundle["script"].splitlines():
            event = parse_command(line)
            if event is None:
                continue
            result = apply_command(
                replay, event, load_model_doc=lambda p: bundle["models"][p]
            )
            if isinstance(result, Answer):
                got.append(render_answer_json(result))
        assert got == outputs

    def test_replay_of_replay_is_fixed_point(self):
        s, _ = self.drive()
        bundle = s.export_script()
        replay = Session(bundle["metadata"])
        for line in bundle["script"].splitlines():
            event = parse_command(line)
            if event is not None:
                apply_command(replay, event, load_model_doc=lambda p: bundle["models"][p])
        assert replay.export_script() == bundle


class TestParseCommand:
    def test_blanks_and_comments(self):
        assert parse_command("") is None
        assert parse_command("   ") is None
        assert parse_command("# a note") is None

    def test_model(self):
        assert parse_command("model trees/credit.json") == ("model", "trees/credit.json")

    def test_instance_full(self):
        assert parse_command("instance F credit label=deny minconf=4/5") == (
            "instance", "F", "credit", "deny", Rat(4, 5),
        )

    def test_instance_minimal(self):
        assert parse_command("instance CE credit label=approve") == (
            "instance", "CE", "credit", "approve", None,
        )

    def test_constraint_keeps_commas(self):
        assert parse_command("constraint F.age = 30, F.income >= 1000") == (
            "constraint", "F.age = 30, F.income >= 1000",
        )

    def test_solve_plain(self):
        assert parse_command("solve") == ("solve", None, None)

    def test_solve_project_list(self):
        assert parse_command("solve project=[CE, F.age]") == (
            "solve", ["CE", "F.age"], None,
        )

    def test_solve_minimize_with_spaces(self):
        assert parse_command("solve minimize=l1norm(F, CE)") == (
            "solve", None, "l1norm(F, CE)",
        )

    def test_solve_both_options(self):
        assert parse_command("solve project=[CE] minimize=dist(F, CE, beta=2)") == (
            "solve", ["CE"], "dist(F, CE, beta=2)",
        )

    def test_retract_and_reset(self):
        assert parse_command("retract 3") == ("retract", 3)
        assert parse_command("reset") == ("reset",)

    def test_repl_verbs(self):
        assert parse_command("undo") == ("undo",)
        assert parse_command("show") == ("show",)

    @pytest.mark.parametrize(
        "line",
        [
            "frobnicate x",
            "retract x",
            "reset now",
            "instance F credit",
            "instance F credit label=deny extra=1",
            "solve project=CE",
            "solve minimize=l1norm(F, CE",
            "solve speed=fast",
            "model",
        ],
    )
    def test_rejections(self, line):
        with pytest.raises(InputError):
            parse_command(line)

    def test_split_options_nested(self):
        assert split_options("project=[CE, F] minimize=dist(F, CE, beta=1/2)") == [
            "project=[CE, F]",
            "minimize=dist(F, CE, beta=1/2)",
        ]


class TestBudget:
    def test_exhausted_budget_raises_with_progress(self):
        from rationale.errors import SolveBudgetExceeded
        from rationale.theory import Budget

        s = pinned_session()
        b = Budget(0)
        b.deadline -= 1
        with pytest.raises(SolveBudgetExceeded) as e:
            s.solveopt(minimize="l1norm(F, CE)", budget=b)
        assert e.value.solved_members == 0

    def test_roomy_budget_changes_nothing(self):
        from rationale.theory import Budget

        s = pinned_session()
        a = s.solveopt(minimize="l1norm(F, CE)", budget=Budget(60))
        assert a.min == Rat(5, 36)
