import hashlib
import json
from pathlib import Path

import pytest

from airstar.errors import MissionFailed, NoMatch, PlanRejected
from airstar.knowledge import EntryKind, KnowledgeBase, KnowledgeEntry
from airstar.planner import (AttemptRecord, DEFAULT_BUDGETS, ExecutionLog,
                             ExecutionRecord, FailureCause, MockPlannerBackend,
                             Plan, PromptContext, SkillCall, StepResult,
                             assemble_context, default_registry, execute_plan,
                             make_plan, replan, step_budget, validate_plan)

GOLDENS = json.loads((Path(__file__).parent / "goldens" / "plans.json").read_text())
LANDMARKS = ["Badminton Court", "Library", "Teaching Building"]


def backend():
    return MockPlannerBackend(landmark_names=LANDMARKS)


def ctx_for(instruction, prior=None):
    return PromptContext(instruction=instruction, knowledge=[], tools=[],
                         perception="", prior=list(prior or []))


class TestGrammarGoldens:
    @pytest.mark.parametrize("instruction", sorted(GOLDENS))
    def test_byte_identical(self, instruction):
        plan = make_plan(ctx_for(instruction), backend())
        assert plan.to_json() == GOLDENS[instruction]

    def test_title_instruction_structure(self):
        doc = json.loads(GOLDENS["Hi AirStar, guide me to the badminton court."])
        assert [s["tool"] for s in doc["steps"]] == \
            ["geo_navigate", "announce_arrival", "return_to_user"]
        assert doc["steps"][0]["params"]["map"] == "pedestrian_guide"

    def test_plan_id_is_stable_hash(self):
        ins = "Go to the library."
        digest = hashlib.sha1(ins.strip().lower().encode()).hexdigest()[:10]
        plan = make_plan(ctx_for(ins), backend())
        assert plan.plan_id == f"plan-{digest}-a0"

    def test_case_insensitive(self):
        a = make_plan(ctx_for("GO TO THE LIBRARY."), backend())
        b = make_plan(ctx_for("go to the library."), backend())
        assert [s.params for s in a.steps] == [s.params for s in b.steps]

    def test_no_match(self):
        with pytest.raises(NoMatch):
            make_plan(ctx_for("do a barrel roll"), backend())


class TestValidation:
    def test_unknown_tool_rejected(self):
        doc = {"plan_id": "p", "attempt": 0,
               "steps": [{"tool": "teleport", "params": {}}]}
        with pytest.raises(PlanRejected):
            validate_plan(doc, default_registry())

    def test_missing_required_param(self):
        doc = {"plan_id": "p", "attempt": 0,
               "steps": [{"tool": "geo_navigate", "params": {"map": "uav_autonomous"}}]}
        with pytest.raises(PlanRejected):
            validate_plan(doc, default_registry())

    def test_unknown_param_rejected(self):
        doc = {"plan_id": "p", "attempt": 0,
               "steps": [{"tool": "frame_human", "params": {"speed": 3}}]}
        with pytest.raises(PlanRejected):
            validate_plan(doc, default_registry())

    def test_wrong_type_rejected(self):
        doc = {"plan_id": "p", "attempt": 0,
               "steps": [{"tool": "track", "params": {"query": 7}}]}
        with pytest.raises(PlanRejected):
            validate_plan(doc, default_registry())

    def test_empty_steps_rejected(self):
        with pytest.raises(PlanRejected):
            validate_plan({"plan_id": "p", "attempt": 0, "steps": []},
                          default_registry())

    def test_valid_plan_accepted(self):
        doc = json.loads(GOLDENS["Go to the library."])
        plan = validate_plan(doc, default_registry())
        assert plan.steps[0].tool == "geo_navigate"


class TestContext:
    def test_assemble_pulls_knowledge(self):
        kb = KnowledgeBase().ingest(KnowledgeEntry(
            id="lm-1", kind=EntryKind.landmark_description,
            text="the badminton court is south of the gym"))
        ctx = assemble_context("go to the badminton court", None, kb,
                               default_registry())
        assert ctx.knowledge and ctx.knowledge[0]["id"] == "lm-1"
        assert ctx.attempt == 0

    def test_history_only_when_prior(self):
        ctx = ctx_for("go to the library")
        assert "execution_history" not in ctx.to_dict()
        log = ExecutionLog([ExecutionRecord(0, 0, 5, "failed",
                                            FailureCause.no_path)])
        ctx.prior.append(AttemptRecord(plan_doc={"steps": []}, log=log))
        assert "execution_history" in ctx.to_dict()
        assert ctx.attempt == 1


class TestExecution:
    def _plan(self, tools):
        return Plan(plan_id="p", attempt=0,
                    steps=[SkillCall(tool=t, params={}) for t in tools])

    def test_all_succeed(self):
        plan, log = execute_plan(self._plan(["frame_human", "gesture_session"]),
                                 lambda s, b: StepResult(True, ticks_used=3))
        assert not log.failed and log.failure_cause is None
        assert all(s.status.value == "succeeded" for s in plan.steps)

    def test_failure_halts(self):
        def executor(step, budget):
            if step.tool == "frame_human":
                return StepResult(False, FailureCause.timeout, ticks_used=budget)
            return StepResult(True)
        plan, log = execute_plan(self._plan(["frame_human", "gesture_session"]),
                                 executor)
        assert log.failed and log.failure_cause == FailureCause.timeout
        assert plan.steps[1].status.value == "pending"

    def test_budgets(self):
        assert step_budget(SkillCall("geo_navigate", {})) == 1200
        assert step_budget(SkillCall("object_navigate", {})) == 600
        assert step_budget(SkillCall("search_qa", {})) == 300
        assert step_budget(SkillCall("track", {"duration": 4.5})) == 45
        assert step_budget(SkillCall("geo_navigate",
                                     {"budget_scale": 2.0})) == 2400


class TestReplan:
    def _failed_attempt(self, instruction, cause, step_idx=0):
        plan = make_plan(ctx_for(instruction), backend())
        log = ExecutionLog([ExecutionRecord(step_idx, 0, 10, "failed", cause)])
        return plan, log

    def test_no_path_flips_map(self):
        ins = "Hi AirStar, guide me to the badminton court."
        plan, log = self._failed_attempt(ins, FailureCause.no_path)
        ctx = ctx_for(ins)
        nxt = replan(ctx, log, backend(), last_plan=plan)
        assert nxt.attempt == 1
        assert nxt.steps[0].params["map"] == "uav_autonomous"

    def test_no_target_inserts_geo_navigate(self):
        ins = "Fly ahead of the teaching building."
        plan, log = self._failed_attempt(ins, FailureCause.no_target)
        nxt = replan(ctx_for(ins), log, backend(), last_plan=plan)
        assert [s.tool for s in nxt.steps] == ["geo_navigate", "object_navigate"]
        assert nxt.steps[0].params["landmark"] == "teaching building"

    def test_timeout_doubles_budget(self):
        ins = "Go to the library."
        plan, log = self._failed_attempt(ins, FailureCause.timeout)
        nxt = replan(ctx_for(ins), log, backend(), last_plan=plan)
        assert nxt.steps[0].params["budget_scale"] == 2.0
        assert step_budget(nxt.steps[0]) == 2400

    def test_other_cause_retries_unchanged(self):
        ins = "Go to the library."
        plan, log = self._failed_attempt(ins, FailureCause.blocked)
        nxt = replan(ctx_for(ins), log, backend(), last_plan=plan)
        assert nxt.to_document()["steps"] == plan.to_document()["steps"]

    def test_mission_failed_after_exactly_three_attempts(self):
        ins = "Go to the library."
        ctx = ctx_for(ins)
        plan = make_plan(ctx, backend())
        for attempt in (1, 2):
            log = ExecutionLog([ExecutionRecord(0, 0, 10, "failed",
                                                FailureCause.blocked)])
            plan = replan(ctx, log, backend(), last_plan=plan)
            assert plan.attempt == attempt
        log = ExecutionLog([ExecutionRecord(0, 0, 10, "failed",
                                            FailureCause.blocked)])
        with pytest.raises(MissionFailed) as ei:
            replan(ctx, log, backend(), last_plan=plan)
        assert len(ei.value.logs) == 3

    def test_replan_requires_failed_log(self):
        with pytest.raises(ValueError):
            replan(ctx_for("go to the library"), ExecutionLog(), backend())
