"""Station tier: client handling, the mission state machine, planning and
step-monitored execution. Reasoning-heavy work lives here, never onboard."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from ..config import AirstarConfig
from ..errors import (BackendUnavailable, DecodeError, GoalBlocked,
                      InvalidDepth, MissingGrid, NoInformativeView,
                      NoHumanVisible, NoMatch, NoPath, NoTarget, NotFound,
                      PlanRejected, SmoothingFailed, StartBlocked)
from ..geonav import (gps_to_local, lookup_landmark, plan_waypoints, select_map,
                      simplify_path, smooth_trajectory)
from ..knowledge import EntryKind, KnowledgeBase, KnowledgeEntry
from ..objectnav import (MockGroundingBackend, RemoteGroundingBackend,
                         instruction_nouns, object_nav_goal)
from ..planner import (AttemptRecord, ExecutionLog, ExecutionRecord,
                       FailureCause, MockPlannerBackend, Plan, PromptContext,
                       RemotePlannerBackend, SkillCall, StepStatus,
                       assemble_context, default_registry, make_plan,
                       step_budget)
from ..skills import (MockQABackend, RemoteQABackend, candidate_yaw,
                      frame_human, scan_views)
from ..world.render import render_view
from ..world.sim import TICK_DT
from ..world.types import GridKind, UavMode, World
from .link import LinkEndpoint
from .mission import MissionEvent, MissionState, MissionStateMachine
from .protocol import (Abort, Ack, Answer, Click, Command, Event, FrameMeta,
                       Gesture, PlanMessage, Setpoint, StepUpdate, Telemetry,
                       TrajectoryMessage, WireMessage, decode, encode)


def build_knowledge_base(world: World, journal_path=None,
                         extra_entries: Optional[list[dict]] = None) -> KnowledgeBase:
    """Seed the store with landmark descriptions and scenario-provided entries."""
    kb = KnowledgeBase(journal_path=journal_path)
    for node in world.landmarks:
        text = f"{node.name}. {node.description}".strip()
        if node.orientation_tag:
            text += f" Orientation: {node.orientation_tag}."
        kb.ingest(KnowledgeEntry(
            id=f"lm-{node.id}", kind=EntryKind.landmark_description,
            text=text, tags=[node.name] + list(node.aliases)))
    for d in extra_entries or []:
        kb.ingest(KnowledgeEntry.from_dict(d))
    return kb


class StepRunner:
    """One plan step executing against live telemetry."""

    def __init__(self, step: SkillCall, station: "StationAgent"):
        self.step = step
        self.station = station
        self.start_tick: Optional[int] = None
        self.budget = step_budget(step, station.cfg.budgets)
        self.failure: Optional[FailureCause] = None
        self.done = False

    def start(self) -> None:
        pass

    def on_tick(self) -> None:
        pass

    def fail(self, cause: FailureCause) -> None:
        self.failure = cause

    def elapsed(self) -> int:
        return self.station.tick - (self.start_tick or self.station.tick)

    def check_timeout(self) -> None:
        if not self.done and self.failure is None and self.elapsed() > self.budget:
            self.fail(FailureCause.timeout)


class GeoNavigateRunner(StepRunner):
    MODE = UavMode.executing

    def goal_point(self) -> np.ndarray:
        node = lookup_landmark(self.station.world.landmarks, self.step.params["landmark"])
        p = gps_to_local(self.station.world.reference_gps, node.gps)
        return np.array([p[0], p[1], self.station.world.z_cruise])

    def map_kinds(self) -> list[str]:
        return [self.step.params["map"]]

    def start(self) -> None:
        st = self.station
        try:
            self.goal = self.goal_point()
        except NotFound:
            self.fail(FailureCause.no_target)
            return
        waypoints = grid = None
        for kind in self.map_kinds():
            try:
                grid = select_map(st.world, kind)
                path = plan_waypoints(grid, st.uav_position(), self.goal)
                waypoints = simplify_path(grid, path, z=st.world.z_cruise)
                break
            except (MissingGrid, StartBlocked, GoalBlocked, NoPath):
                continue
        if waypoints is None:
            self.fail(FailureCause.no_path)
            return
        c_min = (st.cfg.c_min_uav if grid.kind == GridKind.uav_exploration
                 else st.cfg.c_min_pedestrian)
        if len(waypoints) < 2:
            points = [[float(v) for v in self.goal]]
        else:
            try:
                traj = smooth_trajectory(waypoints, grid, st.world.limits.v_max,
                                         st.world.limits.a_max, c_min=c_min)
                points = traj.sample_polyline(TICK_DT)
            except SmoothingFailed:
                # fall back to piecewise-linear waypoint following
                points = _polyline_from_waypoints(waypoints, st.world.limits.v_max * 0.8)
        st.send_setpoint(Setpoint(kind="trajectory", data={
            "points": points, "start_tick": st.tick + 1, "mode": self.MODE.value}))
        st.broadcast(TrajectoryMessage(points=points))

    def on_tick(self) -> None:
        if np.linalg.norm(self.station.uav_position() - self.goal) <= \
                self.station.cfg.arrival_tolerance:
            self.done = True


class ReturnToUserRunner(GeoNavigateRunner):
    MODE = UavMode.returning

    def goal_point(self) -> np.ndarray:
        st = self.station
        user = st.world.user().position
        uav = st.uav_position()
        away = uav[:2] - user[:2]
        n = float(np.linalg.norm(away))
        direction = away / n if n > 1e-9 else np.array([1.0, 0.0])
        xy = user[:2] + direction * st.cfg.return_offset
        return np.array([xy[0], xy[1], st.world.z_cruise])

    def map_kinds(self) -> list[str]:
        # prefer walkable routes so the user can follow, but never strand the
        # UAV when the pedestrian map has no way back
        return ["pedestrian_guide", "uav_autonomous"]


class ObjectNavigateRunner(StepRunner):
    def start(self) -> None:
        st = self.station
        frame = render_view(st.world, pose=st.uav_state_model(), with_depth=True)
        try:
            self.goal = object_nav_goal(
                self.step.params["instruction"], frame, st.world.camera,
                frame.pose_at_capture, standoff=st.cfg.standoff,
                backend=st.grounding_backend)
        except BackendUnavailable:
            self.fail(FailureCause.backend_unavailable)
            return
        except (NoTarget, InvalidDepth):
            self.fail(FailureCause.no_target)
            return
        st.send_setpoint(Setpoint(kind="goto", data={
            "point": [float(v) for v in self.goal], "mode": "executing"}))

    def on_tick(self) -> None:
        if np.linalg.norm(self.station.uav_position() - self.goal) <= \
                self.station.cfg.object_arrival_tolerance:
            self.done = True


class TrackRunner(StepRunner):
    def start(self) -> None:
        st = self.station
        self.duration = int(float(self.step.params.get("duration", 10.0)) * 10)
        st.send_setpoint(Setpoint(kind="track", data={
            "query": self.step.params["query"],
            "standoff": st.cfg.track_standoff, "mode": "executing"}))

    def on_tick(self) -> None:
        if self.station.consume_track_event("track_lost"):
            self.fail(FailureCause.target_lost)
            return
        if self.station.consume_track_event("track_no_target"):
            self.fail(FailureCause.no_target)
            return
        if self.elapsed() >= self.duration:
            self.done = True


class SearchQARunner(StepRunner):
    def start(self) -> None:
        st = self.station
        question = self.step.params["question"]
        try:
            node = lookup_landmark(st.world.landmarks, question)
            yaw = candidate_yaw(node, st.uav_state_model(), st.world.reference_gps)
            nouns = instruction_nouns(question) or [node.name]
            best = scan_views(st.world, st.uav_state_model(), st.world.camera,
                              yaw, nouns)
        except (NotFound, NoInformativeView):
            self.fail(FailureCause.no_target)
            return
        pose = st.uav_state_model()
        pose.yaw = best.yaw
        frame = render_view(st.world, pose=pose, with_depth=False)
        try:
            text = st.qa_backend.answer(question, frame)
        except BackendUnavailable:
            self.fail(FailureCause.backend_unavailable)
            return
        st.send_setpoint(Setpoint(kind="goto", data={
            "point": [float(v) for v in st.uav_position()],
            "yaw": float(best.yaw), "mode": "executing"}))
        st.broadcast(Answer(text=text))
        self.done = True


class FrameHumanRunner(StepRunner):
    def start(self) -> None:
        st = self.station
        try:
            adj = frame_human(st.world, st.uav_state_model(), st.world.camera)
        except NoHumanVisible:
            self.fail(FailureCause.no_target)
            return
        self.target = adj.position
        st.send_setpoint(Setpoint(kind="goto", data={
            "point": [float(v) for v in adj.position],
            "yaw": float(adj.yaw), "mode": "executing"}))

    def on_tick(self) -> None:
        if np.linalg.norm(self.station.uav_position() - self.target) <= 0.3:
            self.done = True


class ImmediateRunner(StepRunner):
    def start(self) -> None:
        if self.step.tool == "announce_arrival":
            self.station.broadcast(Event(level="info", text="arrived"))
        self.done = True


RUNNERS = {
    "geo_navigate": GeoNavigateRunner,
    "return_to_user": ReturnToUserRunner,
    "object_navigate": ObjectNavigateRunner,
    "track": TrackRunner,
    "search_qa": SearchQARunner,
    "frame_human": FrameHumanRunner,
    "gesture_session": ImmediateRunner,
    "announce_arrival": ImmediateRunner,
}


def _polyline_from_waypoints(waypoints, speed: float) -> list[list[float]]:
    points = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        seg = np.asarray(b) - np.asarray(a)
        dist = float(np.linalg.norm(seg))
        n = max(1, int(math.ceil(dist / (speed * TICK_DT))))
        for i in range(n):
            points.append([round(float(v), 4) for v in (np.asarray(a) + seg * (i / n))])
    points.append([round(float(v), 4) for v in waypoints[-1]])
    return points


class StationAgent:
    def __init__(self, world: World, onboard_link: LinkEndpoint,
                 config: Optional[AirstarConfig] = None,
                 kb: Optional[KnowledgeBase] = None):
        self.world = world
        self.link = onboard_link
        self.cfg = config or AirstarConfig()
        self.registry = default_registry()
        self.kb = kb or build_knowledge_base(world)
        names = [n.name for n in world.landmarks]
        if self.cfg.planner_url:
            self.planner_backend = RemotePlannerBackend(self.cfg.planner_url,
                                                        self.cfg.backend_timeout)
        else:
            self.planner_backend = MockPlannerBackend(names)
        if self.cfg.grounding_url:
            self.grounding_backend = RemoteGroundingBackend(self.cfg.grounding_url,
                                                            self.cfg.backend_timeout)
        else:
            self.grounding_backend = MockGroundingBackend()
        if self.cfg.qa_url:
            self.qa_backend = RemoteQABackend(self.cfg.qa_url, self.cfg.backend_timeout)
        else:
            self.qa_backend = MockQABackend(world.landmarks)

        self.fsm = MissionStateMachine()
        self.tick = 0
        self.latest_pose: Optional[dict] = None
        self.latest_frame_meta: Optional[FrameMeta] = None
        self.clients: list = []          # objects with .send(line)
        self._track_events: list[str] = []
        self._activated = False

        # mission runtime
        self.instruction: Optional[str] = None
        self.ctx: Optional[PromptContext] = None
        self.plan: Optional[Plan] = None
        self.step_idx = 0
        self.runner: Optional[StepRunner] = None
        self.log: Optional[ExecutionLog] = None
        self.planning_attempts = 0
        self.return_runner: Optional[ReturnToUserRunner] = None

    # -- plumbing ----------------------------------------------------------

    def add_client(self, client) -> None:
        self.clients.append(client)

    def remove_client(self, client) -> None:
        if client in self.clients:
            self.clients.remove(client)

    def broadcast(self, msg: WireMessage) -> None:
        line = encode(msg)
        for c in self.clients:
            c.send(line)

    def send_setpoint(self, msg: Setpoint) -> None:
        self.link.send(encode(msg))

    def uav_position(self) -> np.ndarray:
        if self.latest_pose is None:
            return self.world.uav.position.copy()
        return np.asarray(self.latest_pose["position"], dtype=float)

    def uav_state_model(self):
        """UAV state as known from telemetry, for station-side geometry."""
        from ..world.types import UavState
        if self.latest_pose is None:
            return self.world.uav.copy()
        return UavState(position=np.asarray(self.latest_pose["position"], dtype=float),
                        velocity=np.asarray(self.latest_pose.get("velocity", [0, 0, 0]), dtype=float),
                        yaw=float(self.latest_pose.get("yaw", 0.0)),
                        mode=self.world.uav.mode)

    def consume_track_event(self, name: str) -> bool:
        if name in self._track_events:
            self._track_events.remove(name)
            return True
        return False

    # -- message intake ----------------------------------------------------

    def _handle_onboard(self) -> None:
        for line in self.link.poll(self.tick):
            try:
                msg = decode(line)
            except DecodeError:
                continue
            if isinstance(msg, Telemetry):
                self.latest_pose = msg.pose
                # split mode: the onboard tick is the authoritative clock
                self.tick = max(self.tick, msg.tick)
                msg.mission_state = self.fsm.state.value
                self.broadcast(msg)
            elif isinstance(msg, FrameMeta):
                self.latest_frame_meta = msg
                self.broadcast(msg)
            elif isinstance(msg, Event):
                if msg.text in ("track_lost", "track_no_target"):
                    self._track_events.append(msg.text)
                else:
                    self.broadcast(msg)

    def handle_client_line(self, line: str) -> None:
        try:
            msg = decode(line)
        except DecodeError as e:
            self.broadcast(Event(level="error", text=f"decode_error: {e}"))
            return
        if isinstance(msg, Command):
            self._on_command(msg.text)
        elif isinstance(msg, Abort):
            self._on_abort()
        elif isinstance(msg, Ack):
            if self.fsm.can(MissionEvent.ack):
                self.fsm.apply(MissionEvent.ack)
                self._hover("standby_hover")
        elif isinstance(msg, Click):
            self._on_click(msg)
        elif isinstance(msg, Gesture):
            self.send_setpoint(Setpoint(kind="gesture",
                                        data={"dir": msg.dir, "step": 0.5}))
        else:
            self.broadcast(Event(level="error",
                                 text=f"unexpected message type '{msg.TYPE}'"))

    def _on_command(self, text: str) -> None:
        if self.fsm.state != MissionState.standby_hover:
            self.broadcast(Event(level="error",
                                 text=f"command rejected in state {self.fsm.state.value}"))
            return
        self.instruction = text
        self.planning_attempts = 0
        self.fsm.apply(MissionEvent.command)

    def _on_abort(self) -> None:
        if self.fsm.state == MissionState.executing:
            self.fsm.apply(MissionEvent.abort)
            self._start_return()
            self.broadcast(Event(level="warn", text="mission aborted"))
        else:
            self.broadcast(Event(level="error",
                                 text=f"abort ignored in state {self.fsm.state.value}"))

    def _on_click(self, msg: Click) -> None:
        # click re-initializes tracking on the clicked object
        self.send_setpoint(Setpoint(kind="track", data={
            "u": msg.u, "v": msg.v, "retarget": True,
            "standoff": self.cfg.track_standoff, "mode": self.world.uav.mode.value}))
        self.broadcast(Event(level="info", text="track_retarget"))

    # -- mission driving ---------------------------------------------------

    def poll(self) -> None:
        """One station cycle; driven at tick cadence by the embedding loop."""
        self._handle_onboard()
        state = self.fsm.state
        if state == MissionState.grounded:
            if not self._activated:
                self._activated = True
                self.fsm.apply(MissionEvent.activate)
                start = self.world.uav.position
                self.send_setpoint(Setpoint(kind="goto", data={
                    "point": [float(start[0]), float(start[1]), self.world.z_cruise],
                    "mode": "ascending"}))
        elif state == MissionState.ascending:
            pos = self.uav_position()
            if abs(pos[2] - self.world.z_cruise) < 0.3:
                self.fsm.apply(MissionEvent.ascended)
                self._hover("standby_hover")
        elif state == MissionState.planning:
            self._try_plan(first=True)
        elif state == MissionState.replanning:
            self._try_replan()
        elif state == MissionState.executing:
            self._drive_step()
        elif state == MissionState.returning:
            self._drive_return()

    def _hover(self, mode: str) -> None:
        self.send_setpoint(Setpoint(kind="hover", data={"mode": mode}))

    def _assemble(self) -> PromptContext:
        frame = render_view(self.world, pose=self.uav_state_model(), with_depth=False)
        prior = self.ctx.prior if self.ctx else []
        return assemble_context(self.instruction, frame, self.kb, self.registry,
                                prior=prior)

    def _try_plan(self, first: bool) -> None:
        self.ctx = self._assemble() if first else self.ctx
        try:
            self.plan = make_plan(self.ctx, self.planner_backend, self.registry)
        except (NoMatch, PlanRejected, BackendUnavailable) as e:
            self.planning_attempts += 1
            self.fsm.apply(MissionEvent.plan_failed)
            self.broadcast(Event(level="error", text=f"planning failed: {e}"))
            return
        self.fsm.active_plan_id = self.plan.plan_id
        self.fsm.apply(MissionEvent.plan_ready)
        self.broadcast(PlanMessage(plan=self.plan.to_document()))
        self.log = ExecutionLog()
        self.step_idx = 0
        self._start_step()

    def _try_replan(self) -> None:
        total_attempts = self.planning_attempts + (self.ctx.attempt if self.ctx else 0)
        if total_attempts >= self.cfg.max_attempts:
            self.fsm.apply(MissionEvent.exhausted)
            self.broadcast(Event(level="error",
                                 text=f"mission failed after {total_attempts} attempts"))
            self._finish_mission("failed")
            self._hover("standby_hover")
            return
        try:
            self.plan = make_plan(self.ctx, self.planner_backend, self.registry)
        except (NoMatch, PlanRejected, BackendUnavailable) as e:
            self.planning_attempts += 1
            self.broadcast(Event(level="error", text=f"replanning failed: {e}"))
            return
        self.fsm.active_plan_id = self.plan.plan_id
        self.fsm.apply(MissionEvent.plan_ready)
        self.broadcast(PlanMessage(plan=self.plan.to_document()))
        self.log = ExecutionLog()
        self.step_idx = 0
        self._start_step()

    def _start_step(self) -> None:
        step = self.plan.steps[self.step_idx]
        step.status = StepStatus.running
        runner_cls = RUNNERS.get(step.tool, ImmediateRunner)
        self.runner = runner_cls(step, self)
        self.runner.start_tick = self.tick
        self.broadcast(StepUpdate(index=self.step_idx, status="running"))
        self.runner.start()

    def _drive_step(self) -> None:
        if self.runner is None:
            return
        if self.runner.failure is None and not self.runner.done:
            self.runner.on_tick()
            self.runner.check_timeout()
        step = self.plan.steps[self.step_idx]
        if self.runner.done:
            step.status = StepStatus.succeeded
            self.log.records.append(ExecutionRecord(
                self.step_idx, self.runner.start_tick, self.tick, "succeeded"))
            self.broadcast(StepUpdate(index=self.step_idx, status="succeeded"))
            self.step_idx += 1
            if self.step_idx >= len(self.plan.steps):
                self.runner = None
                self.fsm.apply(MissionEvent.plan_complete)
                self._start_return()
            else:
                self._start_step()
        elif self.runner.failure is not None:
            cause = self.runner.failure
            step.status = StepStatus.failed
            self.log.records.append(ExecutionRecord(
                self.step_idx, self.runner.start_tick, self.tick, "failed", cause))
            self.broadcast(StepUpdate(index=self.step_idx, status="failed",
                                      cause=cause.value))
            self.runner = None
            self.ctx.prior.append(AttemptRecord(plan_doc=self.plan.to_document(),
                                                log=self.log))
            self.fsm.apply(MissionEvent.step_failed)
            self._hover("standby_hover")

    def _start_return(self) -> None:
        self.return_runner = ReturnToUserRunner(
            SkillCall(tool="return_to_user", params={}), self)
        self.return_runner.start_tick = self.tick
        self.return_runner.start()

    def _drive_return(self) -> None:
        r = self.return_runner
        if r is None:
            self.fsm.apply(MissionEvent.returned)
            self._hover("standby_hover")
            return
        if not r.done and r.failure is None:
            r.on_tick()
            r.check_timeout()
        if r.done or r.failure is not None:
            self.return_runner = None
            self.fsm.apply(MissionEvent.returned)
            self._hover("standby_hover")
            self._finish_mission("succeeded" if r.done else "returned_with_failure")

    def _finish_mission(self, outcome: str) -> None:
        if self.instruction and self.plan:
            self.kb.record_outcome(self.instruction, self.plan.to_document(),
                                   outcome, self.tick * TICK_DT)
        self.instruction = None
        self.ctx = None
        self.plan = None
        self.runner = None

    def set_tick(self, tick: int) -> None:
        self.tick = tick
