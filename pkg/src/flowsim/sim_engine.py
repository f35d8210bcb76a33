"""Fixed-step world scheduler: spawns agents on global routes, runs
perception, behaviour, steering and kinematics each tick, and records a
JSON-lines trace plus a metrics report."""
from __future__ import annotations

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path as FsPath

import numpy as np

from . import SCHEMA
from .motion import (
    ControlLimits, NoPath, SteeringConfig, VehicleState, grid_plan_points, kinematic_step,
    pure_pursuit_steering, shortcut_path, spline_steering,
)
from .perception import Change, Listener, PerceptionSystem, SightConfig, Stimulus
from .road_network import Color, NetworkError, Spline, load_network, network_from_dict
from .routing import Router

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class Mode(str, Enum):
    SPLINE = "SplineFollow"
    GRID = "GridFollow"

    @classmethod
    def parse(cls, s):
        key = str(s).lower()
        if key in ("spline", "splinefollow"):
            return cls.SPLINE
        if key in ("grid", "gridfollow"):
            return cls.GRID
        raise ConfigError(f"unknown mode {s!r}; use spline or grid")


class Status(str, Enum):
    DRIVING = "Driving"
    STOPPED = "Stopped"
    PARKED = "Parked"
    COLLIDED = "Collided"

    @property
    def terminal(self):
        return self in (Status.PARKED, Status.COLLIDED)


@dataclass(frozen=True)
class SimParams:
    vehicle_radius: float = 2.25
    wheelbase: float = 2.7
    parking_tolerance: float = 0.5
    sight_radius: float = 60.0
    sight_fov: float = 60.0  # half angle, degrees
    smoothing: float = 5.0
    lookahead: float = 5.0
    max_accel: float = 3.0
    max_decel: float = 6.0
    max_steer_angle: float = 70.0
    max_curvature: float = 0.25
    comfort_decel: float = 2.0
    stop_decel: float = 3.0  # planned deceleration at stop lines
    lateral_accel: float = 2.0
    headway: float = 1.5
    min_gap: float = 2.0
    stop_margin: float = 0.5
    amber_margin: float = 1.0  # seconds of green that must remain when passing a line
    follow_corridor: float = 2.0
    obstacle_clearance: float = 1.5
    spawn_clearance: float = 8.5
    avoidance: bool = True
    grid_action_interval: int = 1

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        bad = set(d) - names
        if bad:
            raise ConfigError(f"unknown params: {', '.join(sorted(bad))}")
        p = cls(**d)
        if p.grid_action_interval < 1:
            raise ConfigError("grid_action_interval must be at least 1")
        return p

    @property
    def limits(self):
        return ControlLimits(self.max_accel, self.max_decel, self.max_steer_angle, self.max_curvature)


@dataclass
class AgentSpec:
    id: str
    spawn: str
    goal: str
    spawn_time: float = 0.0
    mode: Mode | None = None


@dataclass
class ScenarioConfig:
    network: object
    agents: list
    dt: float = 0.05
    duration: float = 120.0
    seed: int = 0
    mode: Mode = Mode.SPLINE
    router: str = "ch"
    obstacles: list = field(default_factory=list)  # [((x, y), radius)]
    params: SimParams = field(default_factory=SimParams)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.duration < 0:
            raise ConfigError("duration must be non-negative")
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            raise ConfigError("agent ids must be unique")
        for a in self.agents:
            for node in (a.spawn, a.goal):
                if node not in self.network.nodes:
                    raise ConfigError(f"agent {a.id}: unknown node {node!r}")

    @classmethod
    def from_dict(cls, d, base_dir="."):
        try:
            net = d["network"]
            if isinstance(net, str):
                net = load_network(FsPath(base_dir) / net)
            else:
                net = network_from_dict(net)
            agents = [
                AgentSpec(str(a["id"]), a["spawn"], a["goal"], float(a.get("spawn_time", 0.0)),
                          Mode.parse(a["mode"]) if "mode" in a else None)
                for a in d.get("agents", [])
            ]
            obstacles = [((float(o["position"][0]), float(o["position"][1])), float(o["radius"]))
                         for o in d.get("obstacles", [])]
            return cls(
                network=net,
                agents=agents,
                dt=float(d.get("dt", 0.05)),
                duration=float(d.get("duration", 120.0)),
                seed=int(d.get("seed", 0)),
                mode=Mode.parse(d.get("mode", "spline")),
                router=d.get("router", "ch"),
                obstacles=obstacles,
                params=SimParams.from_dict(d.get("params", {})),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed scenario: missing or invalid {exc}") from exc

    def with_mode(self, mode):
        mode = Mode.parse(mode) if not isinstance(mode, Mode) else mode
        return replace(self, mode=mode, agents=[replace(a, mode=mode) for a in self.agents])


def load_scenario(path, seed=None) -> ScenarioConfig:
    path = FsPath(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    cfg = ScenarioConfig.from_dict(data, base_dir=path.parent)
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    return cfg


@dataclass
class Agent:
    id: str
    state: VehicleState
    route: object
    guidance: Spline
    mode: Mode
    goal: np.ndarray
    tolerance: float
    status: Status = Status.DRIVING
    spawn_time: float = 0.0
    # bookkeeping
    progress: float = 0.0
    speed_limit: float = math.inf
    profile: np.ndarray = None
    stop_lines: list = field(default_factory=list)  # [(light index, s of crossing)]
    known_obstacles: set = field(default_factory=set)
    holding: int = None  # light the agent has decided to stop for
    steering_hold: float = 0.0
    end_time: float = None
    collisions: int = 0
    offroad: float = 0.0
    accel_hist: list = field(default_factory=list)
    path_points: list = field(default_factory=list)

    @property
    def live(self):
        return not self.status.terminal


PROFILE_STEP = 0.5


def _dedupe(points, eps=1e-6):
    out = [points[0]]
    for p in points[1:]:
        if math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) > eps:
            out.append(p)
    if len(out) == 1:
        out.append(out[0] + np.array([1e-3, 0.0]))
    return np.array(out)


def speed_profile(guidance: Spline, lateral_accel, decel, window=4.0):
    """Speed cap along the guidance: lateral-acceleration limit from windowed
    turning per meter, zero at the end, and braking-feasible backward."""
    L = guidance.length
    ss = np.append(np.arange(0.0, L, PROFILE_STEP), L)
    seg = np.clip(np.searchsorted(guidance.cumulative_arc_length, ss, side="right") - 1,
                  0, len(guidance.seg_len) - 1)
    theta = np.unwrap(np.arctan2(guidance.seg_dir[seg, 1], guidance.seg_dir[seg, 0]))
    k = max(int(round(window / PROFILE_STEP)), 1)
    hi = np.minimum(np.arange(len(ss)) + k, len(ss) - 1)
    lo = np.maximum(np.arange(len(ss)) - k, 0)
    span = np.maximum(ss[hi] - ss[lo], 1e-9)
    kappa = np.abs(theta[hi] - theta[lo]) / span
    with np.errstate(divide="ignore"):
        cap = np.where(kappa > 1e-9, np.sqrt(lateral_accel / np.maximum(kappa, 1e-12)), np.inf)
    cap[-1] = 0.0
    for i in range(len(cap) - 2, -1, -1):
        cap[i] = min(cap[i], math.sqrt(cap[i + 1] ** 2 + 2.0 * decel * (ss[i + 1] - ss[i])))
    return cap


def _profile_at(profile, s):
    i = int(s / PROFILE_STEP)
    i = min(max(i, 0), len(profile) - 1)
    j = min(i + 1, len(profile) - 1)
    return min(profile[i], profile[j])


def stop_segment(net, light):
    """Stop line of a light: a lane-wide segment across its controlled edge."""
    sp = net.edges[light.controlled_edge].spline
    s, q, _ = sp.nearest(light.position)
    t = sp.tangent(s)
    n = np.array([-t[1], t[0]]) * net.lane_width / 2.0
    return q - n, q + n, t


def _crossings(guidance: Spline, a, b):
    """Arc lengths where the guidance crosses segment a-b."""
    out = []
    cp = guidance.control_points
    for i in range(len(cp) - 1):
        p, r = cp[i], cp[i + 1] - cp[i]
        q, u = a, b - a
        den = r[0] * u[1] - r[1] * u[0]
        if abs(den) < 1e-12:
            continue
        w = q - p
        t = (w[0] * u[1] - w[1] * u[0]) / den
        v = (w[0] * r[1] - w[1] * r[0]) / den
        if 0.0 <= t <= 1.0 and 0.0 <= v <= 1.0:
            out.append(float(guidance.cumulative_arc_length[i] + t * guidance.seg_len[i]))
    return out


class World:
    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self.p = cfg.params
        self.net = cfg.network
        self.limits = self.p.limits
        self.steer_cfg = SteeringConfig(self.p.smoothing)
        self.router = Router(self.net, cfg.router, seed=cfg.seed) if cfg.agents else None
        self.t = 0.0
        self.tick_index = 0
        self.agents = {}
        self.pending = sorted(cfg.agents, key=lambda a: (a.spawn_time, a.id))
        self.perception = PerceptionSystem()
        self.stop_lines = [stop_segment(self.net, l) for l in self.net.lights]
        segs = [(cp[:-1], cp[1:]) for cp in (e.spline.control_points for e in self.net.edges)]
        self._lane_a = np.vstack([a for a, _ in segs]) if segs else np.zeros((0, 2))
        self._lane_b = np.vstack([b for _, b in segs]) if segs else np.zeros((0, 2))
        self.cost = {"ticks": 0, "agent_updates": 0, "guidance_queries": 0, "plans": 0,
                     "plan_cells_expanded": 0}
        self.sight = SightConfig(self.p.sight_radius, self.p.sight_fov)
        # routes are computed up front so configuration problems surface before ticking
        self._routes = {a.id: self.router.query(a.spawn, a.goal) for a in cfg.agents}

    # guidance

    def _mode(self, spec):
        return spec.mode or self.cfg.mode

    def _set_guidance(self, agent, points_or_spline):
        g = points_or_spline if isinstance(points_or_spline, Spline) else Spline(_dedupe(points_or_spline))
        agent.guidance = g
        agent.progress = 0.0
        agent.profile = speed_profile(g, self.p.lateral_accel, self.p.comfort_decel)
        agent.stop_lines = sorted(
            (s, li) for li, (a, b, _) in enumerate(self.stop_lines) for s in _crossings(g, a, b)
        )

    def _grid(self, agent=None):
        grid = self.net.grid
        if grid is None:
            raise ConfigError("grid mode needs a network with an occupancy grid")
        if agent is not None and agent.known_obstacles:
            r = self.p.vehicle_radius + self.p.obstacle_clearance
            discs = [(self.cfg.obstacles[i][0], self.cfg.obstacles[i][1] + r)
                     for i in sorted(agent.known_obstacles)]
            grid = grid.with_blocked_discs(discs)
        return grid

    def _grid_guidance(self, grid, start, goal):
        stats = {}
        path = grid_plan_points(grid, start, goal, stats)
        self.cost["plans"] += 1
        self.cost["plan_cells_expanded"] += stats.get("expanded", 0)
        return shortcut_path(grid, _dedupe(path.points))

    def spawn_agent(self, spec: AgentSpec) -> Agent:
        route = self._routes.get(spec.id) or self.router.query(spec.spawn, spec.goal)
        mode = self._mode(spec)
        start = self.net.position(spec.spawn)
        goal = self.net.position(spec.goal)
        ids = route.node_sequence
        edges = [self.net.edges[self.net.edge_between(u, v)] for u, v in zip(ids, ids[1:])]
        limit = min((e.speed_limit for e in edges), default=math.inf)
        agent = Agent(spec.id, None, route, None, mode, goal, self.p.parking_tolerance,
                      spawn_time=self.t, speed_limit=limit)
        if mode is Mode.SPLINE:
            if not edges:
                g = Spline([start, start + np.array([1e-3, 0.0])])
            else:
                g = edges[0].spline
                for e in edges[1:]:
                    g = g.concat(e.spline)
            self._set_guidance(agent, g)
        else:
            grid = self._grid()
            if not grid.is_passable(grid.cell_of(start)):
                raise ConfigError(f"agent {spec.id}: spawn point lies in an impassable cell")
            self._set_guidance(agent, self._grid_guidance(grid, start, goal))
        tan = agent.guidance.tangent(0.0)
        agent.state = VehicleState(float(start[0]), float(start[1]), math.atan2(tan[1], tan[0]),
                                   0.0, 0.0, self.p.wheelbase)
        agent.status = Status.STOPPED
        if math.hypot(*(start - goal)) <= agent.tolerance:
            agent.status = Status.PARKED
            agent.end_time = self.t
        else:
            self.perception.register_listener(
                Listener(agent.id, (agent.state.x, agent.state.y), agent.state.heading, [self.sight]))
        return agent

    def _spawn_due(self):
        still = []
        for spec in self.pending:
            if spec.spawn_time <= self.t + 1e-9 and self._spawn_clear(spec):
                self.agents[spec.id] = self.spawn_agent(spec)
            else:
                still.append(spec)
        self.pending = still

    def _spawn_clear(self, spec):
        p = self.net.position(spec.spawn)
        return all(math.hypot(a.state.x - p[0], a.state.y - p[1]) >= self.p.spawn_clearance
                   for a in self.agents.values())

    # per-tick stages

    def _light_states(self):
        return [l.phase_at(self.t) for l in self.net.lights]

    def _stimuli(self, phases):
        st = [Stimulus(a.id, (a.state.x, a.state.y), "vehicle") for a in self._ordered()]
        st += [Stimulus(f"obs:{i}", c, "obstacle", {"radius": r})
               for i, (c, r) in enumerate(self.cfg.obstacles)]
        st += [Stimulus(f"light:{i}", l.position, "traffic_light",
                        {"phase": c.value, "remaining": rem})
               for i, (l, (c, rem)) in enumerate(zip(self.net.lights, phases))]
        return st

    def _ordered(self):
        return [self.agents[k] for k in sorted(self.agents)]

    def _target_speed(self, a: Agent, perceived, snapshot):
        p = self.p
        s = a.progress
        v = a.state.speed
        half = p.vehicle_radius
        vt = min(a.speed_limit, _profile_at(a.profile, s))
        # goal: stop with the center on the end point
        vt = min(vt, math.sqrt(2.0 * p.comfort_decel * max(a.guidance.length - s, 0.0)))
        if p.avoidance:
            for sid in perceived:
                stim = self.perception.stimuli[sid]
                if stim.kind == "vehicle":
                    other = snapshot[sid]
                    r_other = half
                    corridor = p.follow_corridor
                elif stim.kind == "obstacle":
                    r_other = stim.data["radius"]
                    corridor = r_other + half + 0.5
                else:
                    continue
                lo = s + 0.1
                if lo >= a.guidance.length:
                    continue
                so, _, lat = a.guidance.nearest(stim.position, lo, s + p.sight_radius)
                self.cost["guidance_queries"] += 1
                if lat > corridor or so >= a.guidance.length - 1e-9 and lat > 0.5:
                    continue
                gap = so - s - half - r_other
                if stim.kind == "vehicle":
                    gap = min(gap, math.hypot(other.x - a.state.x, other.y - a.state.y) - 2 * half)
                vt = min(vt, max(0.0, (gap - p.min_gap) / p.headway))
        front = s + half
        dt = self.cfg.dt
        for s_line, li in a.stop_lines:
            if s_line < front - 1e-9:
                continue
            sid = f"light:{li}"
            if sid not in perceived:
                break
            data = self.perception.stimuli[sid].data
            d_line = s_line - front
            # distance left after this tick's move, which uses the current speed
            d_stop = max(d_line - p.stop_margin - v * dt, 0.0)
            comfy = v * v <= 2.0 * p.stop_decel * d_stop
            possible = v * v <= 2.0 * p.max_decel * d_stop
            if data["phase"] == Color.RED.value:
                stop = d_line > 0
            else:
                cruise = min(v, _profile_at(a.profile, s_line - half), a.speed_limit)
                eta = d_line / max(cruise, 1.0)
                late = eta + p.amber_margin >= data["remaining"]
                stop = late and (comfy or a.holding == li or (possible and eta >= data["remaining"]))
            if stop:
                a.holding = li
                b = p.stop_decel if comfy else p.max_decel
                vt = min(vt, math.sqrt(2.0 * b * d_stop))
            elif a.holding == li:
                a.holding = None
            break  # only the nearest line ahead governs
        return max(vt, 0.0)

    def _throttle(self, v, vt):
        dt = self.cfg.dt
        if vt >= v:
            return min((vt - v) / (self.p.max_accel * dt), 1.0)
        return max((vt - v) / (self.p.max_decel * dt), -1.0)

    def _steer(self, a: Agent):
        s = a.progress
        if a.mode is Mode.SPLINE:
            return spline_steering(a.state, a.guidance, self.steer_cfg, max(s - 1.0, 0.0),
                                   s + 2.0 * self.p.smoothing + 5.0)
        if self.tick_index % self.p.grid_action_interval and a.steering_hold is not None:
            return a.steering_hold
        return pure_pursuit_steering(a.state, a.guidance, self.p.lookahead, max(s - 1.0, 0.0),
                                     s + 5.0)

    def _replan(self, a: Agent):
        try:
            pts = self._grid_guidance(self._grid(a), a.state.position, a.goal)
        except (NoPath, ValueError) as exc:
            log.info("agent %s could not replan: %s", a.id, exc)
            return
        self._set_guidance(a, pts)

    def _offroad(self, pos):
        if not len(self._lane_a):
            return 0.0
        d = self._lane_b - self._lane_a
        t = np.clip(((pos - self._lane_a) * d).sum(axis=1) / (d * d).sum(axis=1), 0.0, 1.0)
        q = self._lane_a + d * t[:, None]
        dist = np.hypot(pos[0] - q[:, 0], pos[1] - q[:, 1]).min()
        return max(0.0, float(dist) - self.net.lane_width / 2.0)

    def tick(self):
        """Advance one step; returns the perception events of the tick."""
        dt = self.cfg.dt
        phases = self._light_states()
        snapshot = {k: a.state for k, a in self.agents.items()}
        live = [a for a in self._ordered() if a.live]
        for a in live:
            self.perception.update_pose(a.id, (a.state.x, a.state.y), a.state.heading)
        events = self.perception.tick(self._stimuli(phases), (), self.tick_index)
        for e in events:
            if (e.change is Change.GAINED and str(e.source_id).startswith("obs:")
                    and self.agents[e.listener_id].mode is Mode.GRID and self.p.avoidance):
                a = self.agents[e.listener_id]
                a.known_obstacles.add(int(str(e.source_id)[4:]))
                self._replan(a)
        commands = {}
        for a in live:
            g = a.guidance
            lo = max(a.progress - 1.0, 0.0)
            a.progress, _, _ = g.nearest(a.state.position, lo, a.progress + a.state.speed * dt + 3.0)
            self.cost["guidance_queries"] += 1
            self.cost["agent_updates"] += 1
            perceived = sorted(self.perception.perceived_set(a.id))
            vt = self._target_speed(a, perceived, snapshot)
            steer = self._steer(a)
            a.steering_hold = steer
            commands[a.id] = (self._throttle(a.state.speed, vt), steer)
        for a in live:
            th, st = commands[a.id]
            new = kinematic_step(a.state, th, st, self.limits, dt)
            if new.speed > a.speed_limit:
                new = replace(new, speed=a.speed_limit)
            a.accel_hist.append((new.speed - a.state.speed) / dt)
            a.state = new
        self.tick_index += 1
        self.cost["ticks"] += 1
        self.t = round(self.tick_index * dt, 9)
        self._collisions()
        for a in live:
            if not a.live:
                continue
            a.offroad += self._offroad(a.state.position) * dt
            if math.hypot(*(a.state.position - a.goal)) <= a.tolerance and a.state.speed < 0.1:
                a.status = Status.PARKED
                a.end_time = self.t
                self.perception.unregister_listener(a.id)
            else:
                a.status = Status.STOPPED if a.state.speed < 0.1 else Status.DRIVING
        self._spawn_due()
        return events

    def _collisions(self):
        r = self.p.vehicle_radius
        ags = self._ordered()
        hit = set()
        for i, a in enumerate(ags):
            for b in ags[i + 1:]:
                if not (a.live or b.live):
                    continue
                if math.hypot(a.state.x - b.state.x, a.state.y - b.state.y) < 2 * r:
                    a.collisions += 1
                    b.collisions += 1
                    hit.update((a.id, b.id))
            for c, rad in self.cfg.obstacles:
                if a.live and math.hypot(a.state.x - c[0], a.state.y - c[1]) < r + rad:
                    a.collisions += 1
                    hit.add(a.id)
        for k in sorted(hit):
            a = self.agents[k]
            if a.live:
                a.status = Status.COLLIDED
                a.state = replace(a.state, speed=0.0)
                a.end_time = self.t
                self.perception.unregister_listener(a.id)

    def done(self):
        return not self.pending and all(not a.live for a in self.agents.values())

    def record(self, events):
        agents = []
        for a in self._ordered():
            s = a.state
            agents.append({"id": a.id, "x": s.x, "y": s.y, "heading": s.heading, "speed": s.speed,
                           "steering": s.steering, "status": a.status.value})
            a.path_points.append((s.x, s.y))
        lights = [{"index": i, "phase": c.value, "remaining": rem}
                  for i, (c, rem) in enumerate(self._light_states())]
        ev = [{"listener": e.listener_id, "source": e.source_id, "change": e.change.value}
              for e in events]
        return {"schema": SCHEMA, "t": self.t, "agents": agents, "events": ev, "lights": lights}

    def metrics(self):
        per = {}
        for a in self._ordered():
            parked = a.status is Status.PARKED
            acc = np.array(a.accel_hist)
            jerk = np.abs(np.diff(acc)) / self.cfg.dt if len(acc) > 1 else np.zeros(0)
            end = a.end_time if a.end_time is not None else self.t
            per[a.id] = {
                "mode": a.mode.value,
                "status": a.status.value,
                "collision_count": a.collisions,
                "offroad_distance_integral": a.offroad,
                "parking_error": float(math.hypot(*(a.state.position - a.goal))) if parked else None,
                "travel_time": round(end - a.spawn_time, 9),
                "route": list(a.route.node_sequence),
                "mean_abs_jerk": float(jerk.mean()) if len(jerk) else 0.0,
                "max_abs_jerk": float(jerk.max()) if len(jerk) else 0.0,
            }
        for spec in self.pending:
            per[spec.id] = {"mode": self._mode(spec).value, "status": "NotSpawned",
                            "collision_count": 0, "offroad_distance_integral": 0.0,
                            "parking_error": None, "travel_time": 0.0,
                            "route": list(self._routes[spec.id].node_sequence),
                            "mean_abs_jerk": 0.0, "max_abs_jerk": 0.0}
        vals = list(per.values())

        def mean(key, only=None):
            xs = [v[key] for v in vals if v[key] is not None and (only is None or only(v))]
            return float(np.mean(xs)) if xs else None

        aggregate = {
            "agents": len(vals),
            "parked": sum(v["status"] == "Parked" for v in vals),
            "collided": sum(v["status"] == "Collided" for v in vals),
            "collision_count": sum(v["collision_count"] for v in vals),
            "mean_offroad_distance_integral": mean("offroad_distance_integral"),
            "mean_parking_error": mean("parking_error"),
            "mean_travel_time": mean("travel_time", lambda v: v["status"] == "Parked"),
        } if vals else {}
        ticks = max(self.cost["ticks"], 1)
        compute = dict(self.cost)
        compute["ops_per_tick"] = (self.cost["agent_updates"] + self.cost["guidance_queries"]
                                   + self.cost["plan_cells_expanded"]) / ticks
        return {"schema": SCHEMA, "mode": self.cfg.mode.value, "seed": self.cfg.seed,
                "t_end": self.t, "agents": per, "aggregate": aggregate, "compute": compute}


def run(cfg: ScenarioConfig, out_dir=None):
    """Run to ``duration`` or until every agent is terminal; returns
    ``(trace_records, metrics)`` and writes them when ``out_dir`` is given."""
    world = World(cfg)
    records = []
    if cfg.agents:
        world._spawn_due()
        records.append(world.record([]))
        n_ticks = int(round(cfg.duration / cfg.dt))
        while world.tick_index < n_ticks and not world.done():
            events = world.tick()
            records.append(world.record(events))
    metrics = world.metrics() if cfg.agents else {
        "schema": SCHEMA, "mode": cfg.mode.value, "seed": cfg.seed, "t_end": 0.0,
        "agents": {}, "aggregate": {}, "compute": world.cost}
    if out_dir is not None:
        write_outputs(out_dir, records, metrics)
    return records, metrics


def world_tick(world: World):
    events = world.tick()
    return world, world.record(events)


def trajectories(records):
    """Per-agent list of (x, y) from trace records."""
    out = {}
    for r in records:
        for a in r["agents"]:
            out.setdefault(a["id"], []).append((a["x"], a["y"]))
    return out


def evaluate_modes(cfg: ScenarioConfig):
    """Run the same scenario under both guidance modes."""
    report = {"schema": SCHEMA, "seed": cfg.seed, "modes": {}}
    paths = {}
    for mode in (Mode.SPLINE, Mode.GRID):
        records, metrics = run(cfg.with_mode(mode))
        report["modes"][mode.value] = metrics
        paths[mode.value] = trajectories(records)
    return report, paths


def atomic_write(path, text):
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(out_dir, records, metrics):
    out = FsPath(out_dir)
    atomic_write(out / "trace.jsonl", "".join(json.dumps(r) + "\n" for r in records))
    atomic_write(out / "metrics.json", json.dumps(metrics, indent=2) + "\n")


__all__ = [
    "Agent", "AgentSpec", "ConfigError", "Mode", "NetworkError", "ScenarioConfig", "SimParams",
    "Status", "World", "atomic_write", "evaluate_modes", "load_scenario", "run", "speed_profile",
    "stop_segment", "trajectories", "world_tick", "write_outputs",
]
