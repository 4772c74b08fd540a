"""Task planner: context assembly, structured plans from a pluggable backend,
monitored execution, and failure-driven replanning."""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Protocol

from .errors import BackendUnavailable, MissionFailed, NoMatch, PlanRejected
from .geonav import tokenize
from .knowledge import KnowledgeBase
from .world.types import ViewFrame


class ParamType(str, Enum):
    string = "string"
    number = "number"
    landmark = "landmark"
    direction = "direction"


DIRECTIONS = {"up", "down", "left", "right", "forward", "backward"}


@dataclass
class ParamSpec:
    name: str
    type: ParamType
    required: bool = True


@dataclass
class ToolSchema:
    name: str
    description: str
    params: list[ParamSpec] = field(default_factory=list)
    success_criterion: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "params": [{"name": p.name, "type": p.type.value, "required": p.required}
                       for p in self.params],
            "success_criterion": self.success_criterion,
        }


def default_registry() -> dict[str, ToolSchema]:
    scale = ParamSpec("budget_scale", ParamType.number, required=False)
    tools = [
        ToolSchema("geo_navigate",
                   "Fly to a named landmark over the selected occupancy map.",
                   [ParamSpec("landmark", ParamType.landmark),
                    ParamSpec("map", ParamType.string), scale],
                   "UAV within 1.5 m of the landmark goal"),
        ToolSchema("object_navigate",
                   "Fly to a goal grounded from the current camera view.",
                   [ParamSpec("instruction", ParamType.string), scale],
                   "UAV within 1.0 m of the grounded goal"),
        ToolSchema("track",
                   "Follow a target, keeping it centered in view.",
                   [ParamSpec("query", ParamType.string),
                    ParamSpec("duration", ParamType.number, required=False), scale],
                   "ran the requested duration without losing the target"),
        ToolSchema("search_qa",
                   "Scan viewpoints near the current position and answer a question.",
                   [ParamSpec("question", ParamType.string), scale],
                   "an answer was produced"),
        ToolSchema("frame_human", "Center the nearest person in the camera view.",
                   [], "person centered within tolerance"),
        ToolSchema("gesture_session",
                   "Accept up/down/left/right/forward/backward nudges until ended.",
                   [], "session closed by the operator"),
        ToolSchema("announce_arrival", "Notify the operator of arrival.",
                   [], "event emitted"),
        ToolSchema("return_to_user", "Fly back near the user and hover.",
                   [], "UAV within 1.5 m of the return point"),
    ]
    return {t.name: t for t in tools}


class StepStatus(str, Enum):
    pending = "pending"
    running = "running"
    succeeded = "succeeded"
    failed = "failed"


class FailureCause(str, Enum):
    timeout = "timeout"
    no_path = "no_path"
    no_target = "no_target"
    target_lost = "target_lost"
    backend_unavailable = "backend_unavailable"
    blocked = "blocked"


@dataclass
class SkillCall:
    tool: str
    params: dict
    status: StepStatus = StepStatus.pending


@dataclass
class Plan:
    plan_id: str
    attempt: int
    steps: list[SkillCall]

    def to_document(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "attempt": self.attempt,
            "steps": [{"tool": s.tool, "params": s.params} for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))


@dataclass
class ExecutionRecord:
    step_index: int
    started_tick: int
    ended_tick: int
    outcome: str                         # "succeeded" | "failed"
    failure_cause: Optional[FailureCause] = None

    def to_dict(self) -> dict:
        return {
            "step_index": self.step_index,
            "started_tick": self.started_tick,
            "ended_tick": self.ended_tick,
            "outcome": self.outcome,
            "failure_cause": self.failure_cause.value if self.failure_cause else None,
        }


@dataclass
class ExecutionLog:
    records: list[ExecutionRecord] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return bool(self.records) and self.records[-1].outcome == "failed"

    @property
    def failure_cause(self) -> Optional[FailureCause]:
        return self.records[-1].failure_cause if self.failed else None

    def to_dict(self) -> dict:
        return {"records": [r.to_dict() for r in self.records]}


@dataclass
class AttemptRecord:
    plan_doc: dict
    log: ExecutionLog


@dataclass
class PromptContext:
    instruction: str
    knowledge: list[dict]
    tools: list[dict]
    perception: str
    prior: list[AttemptRecord] = field(default_factory=list)

    @property
    def attempt(self) -> int:
        return len(self.prior)

    def to_dict(self) -> dict:
        d = {
            "instruction": self.instruction,
            "knowledge": self.knowledge,
            "tools": self.tools,
            "perception": self.perception,
        }
        if self.prior:
            d["execution_history"] = [
                {"plan": a.plan_doc, "log": a.log.to_dict()} for a in self.prior
            ]
        return d


def perception_summary(frame: Optional[ViewFrame]) -> str:
    if frame is None:
        return ""
    tags = sorted({t for o in frame.objects
                   for t in [o.class_tag] + list(o.landmark_tags)})
    return " ".join(tags)


def assemble_context(instruction: str, frame: Optional[ViewFrame],
                     kb: KnowledgeBase, registry: dict[str, ToolSchema],
                     prior: Optional[list[AttemptRecord]] = None,
                     k: int = 3) -> PromptContext:
    if not registry:
        raise ValueError("tool registry must be nonempty")
    perception = perception_summary(frame)
    retrieved = kb.retrieve(instruction, perception, k=k)
    return PromptContext(
        instruction=instruction,
        knowledge=[{"id": e.id, "kind": e.kind.value, "text": e.text,
                    "score": round(score, 6)} for e, score in retrieved],
        tools=[registry[name].to_dict() for name in sorted(registry)],
        perception=perception,
        prior=list(prior or []),
    )


# ---------------------------------------------------------------------------
# Plan validation
# ---------------------------------------------------------------------------

def validate_plan(doc: dict, registry: dict[str, ToolSchema]) -> Plan:
    """Check the backend's plan document against the tool registry."""
    try:
        plan_id = str(doc["plan_id"])
        attempt = int(doc["attempt"])
        raw_steps = doc["steps"]
    except (KeyError, TypeError, ValueError) as e:
        raise PlanRejected(f"malformed plan document: {e}") from e
    if attempt < 0:
        raise PlanRejected("attempt index must be >= 0")
    if not isinstance(raw_steps, list) or not raw_steps:
        raise PlanRejected("plan must contain at least one step")
    steps = []
    for i, raw in enumerate(raw_steps):
        tool = raw.get("tool")
        params = raw.get("params", {})
        schema = registry.get(tool)
        if schema is None:
            raise PlanRejected(f"step {i}: unknown tool '{tool}'")
        known = {p.name: p for p in schema.params}
        for pname in params:
            if pname not in known:
                raise PlanRejected(f"step {i}: tool '{tool}' has no param '{pname}'")
        for spec in schema.params:
            if spec.name not in params:
                if spec.required:
                    raise PlanRejected(
                        f"step {i}: tool '{tool}' missing required param '{spec.name}'")
                continue
            value = params[spec.name]
            if spec.type in (ParamType.string, ParamType.landmark):
                if not isinstance(value, str) or not value:
                    raise PlanRejected(
                        f"step {i}: param '{spec.name}' must be a nonempty string")
            elif spec.type == ParamType.number:
                if not isinstance(value, (int, float)) or isinstance(value, bool):
                    raise PlanRejected(f"step {i}: param '{spec.name}' must be a number")
            elif spec.type == ParamType.direction:
                if value not in DIRECTIONS:
                    raise PlanRejected(
                        f"step {i}: param '{spec.name}' must be one of {sorted(DIRECTIONS)}")
        steps.append(SkillCall(tool=tool, params=dict(params)))
    return Plan(plan_id=plan_id, attempt=attempt, steps=steps)


# ---------------------------------------------------------------------------
# Backends
# ---------------------------------------------------------------------------

class PlannerBackend(Protocol):
    def plan(self, ctx: PromptContext) -> dict: ...


_GREETING_RE = re.compile(r"^(hi|hello|hey)[,\s]+airstar[,.!\s]*", re.IGNORECASE)


def _plan_id(instruction: str, attempt: int) -> str:
    digest = hashlib.sha1(instruction.strip().lower().encode()).hexdigest()[:10]
    return f"plan-{digest}-a{attempt}"


class MockPlannerBackend:
    """Deterministic grammar standing in for the LLM planner."""

    def __init__(self, landmark_names: Optional[list[str]] = None):
        self.landmark_names = [n.lower() for n in (landmark_names or [])]

    def plan(self, ctx: PromptContext) -> dict:
        if ctx.prior:
            return self._replan(ctx)
        steps = self._grammar(ctx.instruction)
        return {"plan_id": _plan_id(ctx.instruction, 0), "attempt": 0, "steps": steps}

    # -- first-attempt grammar --------------------------------------------

    def _grammar(self, instruction: str) -> list[dict]:
        text = _GREETING_RE.sub("", instruction.strip()).strip()
        lowered = text.lower().rstrip(".!? ")

        m = re.match(r"guide me to (?:the )?(.+)", lowered)
        if m:
            return [
                {"tool": "geo_navigate",
                 "params": {"landmark": m.group(1), "map": "pedestrian_guide"}},
                {"tool": "announce_arrival", "params": {}},
                {"tool": "return_to_user", "params": {}},
            ]
        m = re.match(r"go to (?:the )?(.+)", lowered)
        if m:
            return [{"tool": "geo_navigate",
                     "params": {"landmark": m.group(1), "map": "uav_autonomous"}}]
        m = re.match(r"fly (ahead of|behind|above) (?:the )?(.+)", lowered)
        if m:
            return [{"tool": "object_navigate", "params": {"instruction": lowered}}]
        m = re.match(r"(?:follow|track) (?:the )?(.+)", lowered)
        if m:
            query = m.group(1)
            params: dict = {}
            dur = re.search(r"\s*for (\d+(?:\.\d+)?) seconds?$", query)
            if dur:
                query = query[:dur.start()]
                params["duration"] = float(dur.group(1))
            params["query"] = query
            return [{"tool": "track", "params": params}]
        if "take my picture" in lowered or "gesture" in lowered:
            return [{"tool": "frame_human", "params": {}},
                    {"tool": "gesture_session", "params": {}}]
        if text.rstrip().endswith("?") or lowered.startswith(("what", "where", "which", "who", "how", "is ")):
            landmark = self._question_landmark(lowered)
            if landmark:
                return [
                    {"tool": "geo_navigate",
                     "params": {"landmark": landmark, "map": "uav_autonomous"}},
                    {"tool": "search_qa", "params": {"question": lowered}},
                ]
        raise NoMatch(f"mock grammar has no rule for '{instruction}'")

    def _question_landmark(self, lowered: str) -> Optional[str]:
        m = re.search(r"near (?:the )?([a-z0-9 ]+)", lowered)
        if m:
            return m.group(1).strip()
        for name in sorted(self.landmark_names):
            if name in lowered:
                return name
        q_tokens = set(tokenize(lowered))
        best, best_score = None, 0
        for name in sorted(self.landmark_names):
            score = len(q_tokens & set(tokenize(name)))
            if score > best_score:
                best, best_score = name, score
        return best

    # -- failure-driven replanning ----------------------------------------

    def _replan(self, ctx: PromptContext) -> dict:
        last = ctx.prior[-1]
        attempt = len(ctx.prior)
        cause = last.log.failure_cause
        failed_idx = last.log.records[-1].step_index if last.log.records else 0
        steps = [dict(tool=s["tool"], params=dict(s["params"]))
                 for s in last.plan_doc["steps"]]
        failed = steps[failed_idx] if failed_idx < len(steps) else None

        if cause == FailureCause.no_path and failed and failed["tool"] == "geo_navigate":
            flips = {"pedestrian_guide": "uav_autonomous",
                     "uav_autonomous": "pedestrian_guide"}
            failed["params"]["map"] = flips.get(failed["params"].get("map"),
                                                "uav_autonomous")
        elif cause == FailureCause.no_target and failed and failed["tool"] == "object_navigate":
            landmark = self._question_landmark(failed["params"]["instruction"])
            if landmark:
                steps.insert(failed_idx, {
                    "tool": "geo_navigate",
                    "params": {"landmark": landmark, "map": "uav_autonomous"}})
        elif cause == FailureCause.timeout and failed:
            failed["params"]["budget_scale"] = float(
                failed["params"].get("budget_scale", 1.0)) * 2.0
        # other causes: retry the same plan unchanged

        return {"plan_id": _plan_id(ctx.instruction, attempt),
                "attempt": attempt, "steps": steps}


class RemotePlannerBackend:
    """HTTP planning slot: POSTs the serialized context, expects a plan document."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def plan(self, ctx: PromptContext) -> dict:
        import httpx
        try:
            resp = httpx.post(self.url, json=ctx.to_dict(), timeout=self.timeout)
            resp.raise_for_status()
            return resp.json()
        except httpx.HTTPError as e:
            raise BackendUnavailable(f"planner backend: {e}") from e


def make_plan(ctx: PromptContext, backend: PlannerBackend,
              registry: Optional[dict[str, ToolSchema]] = None) -> Plan:
    registry = registry or default_registry()
    doc = backend.plan(ctx)
    return validate_plan(doc, registry)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

@dataclass
class StepResult:
    succeeded: bool
    failure_cause: Optional[FailureCause] = None
    ticks_used: int = 0


DEFAULT_BUDGETS = {
    "geo_navigate": 1200,
    "object_navigate": 600,
    "search_qa": 300,
    "frame_human": 200,
    "gesture_session": 300,
    "announce_arrival": 1,
    "return_to_user": 1200,
    "track": 300,   # overridden by the requested duration
}


def step_budget(step: SkillCall, budgets: Optional[dict] = None) -> int:
    budgets = budgets or DEFAULT_BUDGETS
    base = budgets.get(step.tool, 600)
    if step.tool == "track" and "duration" in step.params:
        base = int(float(step.params["duration"]) * 10)   # seconds -> ticks
    return int(base * float(step.params.get("budget_scale", 1.0)))


Executor = Callable[[SkillCall, int], StepResult]


def execute_plan(plan: Plan, executor: Executor,
                 budgets: Optional[dict] = None,
                 start_tick: int = 0) -> tuple[Plan, ExecutionLog]:
    """Run steps sequentially; a failure halts execution and is data, not an error."""
    log = ExecutionLog()
    tick = start_tick
    for i, step in enumerate(plan.steps):
        step.status = StepStatus.running
        budget = step_budget(step, budgets)
        result = executor(step, budget)
        ended = tick + max(result.ticks_used, 0)
        if result.succeeded:
            step.status = StepStatus.succeeded
            log.records.append(ExecutionRecord(i, tick, ended, "succeeded"))
            tick = ended
        else:
            step.status = StepStatus.failed
            log.records.append(ExecutionRecord(i, tick, ended, "failed",
                                               result.failure_cause))
            break
    return plan, log


def replan(ctx: PromptContext, log: ExecutionLog, backend: PlannerBackend,
           registry: Optional[dict[str, ToolSchema]] = None,
           last_plan: Optional[Plan] = None,
           max_attempts: int = 3) -> Plan:
    """Next attempt after a failure; raises MissionFailed when exhausted."""
    if not log.failed:
        raise ValueError("replan requires a log ending in a failure")
    if last_plan is not None:
        ctx.prior.append(AttemptRecord(plan_doc=last_plan.to_document(), log=log))
    if ctx.attempt >= max_attempts:
        raise MissionFailed(
            f"mission failed after {max_attempts} attempts",
            logs=[a.log for a in ctx.prior])
    return make_plan(ctx, backend, registry)
