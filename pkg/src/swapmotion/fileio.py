"""Scenario / graph / plan / trajectory file formats.

Structured text (JSON with sorted keys) for scenario, graph, and plan files
so artifacts stay human-diffable and byte-deterministic; CSV for sampled
trajectories. Every writer has a reader that round-trips exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .conversion import (
    ConversionResult,
    GapCorridor,
    PathCorridor,
    RadialCorridor,
)
from .geometry import Disk, Point2, Polygon, Rect, Workspace
from .planner import LoopRotation, Plan, VacancySwap
from .swap_graph import Occupancy, SwapGraph, VACANT, edge_key
from .trajectory import TrajectorySet, _PackedTrack


@dataclass
class AgentSpec:
    id: int
    start: Point2
    goal: Point2


@dataclass
class ScenarioParams:
    epsilon: Optional[float] = None
    grid_resolution: Optional[float] = None
    k_max: int = 64
    threshold: Optional[int] = None
    dt: float = 0.1
    seed: int = 0


@dataclass
class Scenario:
    name: str
    workspace: Workspace
    r: float
    agents: list[AgentSpec]
    params: ScenarioParams = field(default_factory=ScenarioParams)

    def starts(self) -> list[Point2]:
        return [a.start for a in self.agents]

    def goals(self) -> list[Point2]:
        return [a.goal for a in self.agents]

    def validate(self) -> list[str]:
        """Broken scenario invariants, by name (empty list = valid)."""
        from .geometry import Disk, disk_in_free_space, dist

        out = []
        ids = [a.id for a in self.agents]
        if len(set(ids)) != len(ids):
            out.append("agent ids not distinct")
        starts = self.starts()
        goals = self.goals()
        for k, p in enumerate(starts):
            if not disk_in_free_space(Disk(p, self.r), self.workspace):
                out.append(f"start of agent {ids[k]} not in free space")
        for k, p in enumerate(goals):
            if not disk_in_free_space(Disk(p, self.r), self.workspace):
                out.append(f"goal of agent {ids[k]} not in free space")
        for i in range(len(starts)):
            for j in range(i + 1, len(starts)):
                if dist(starts[i], starts[j]) < 2 * self.r - self.workspace.tol:
                    out.append(f"starts of agents {ids[i]},{ids[j]} closer than 2r")
                if goals[i] == goals[j]:
                    out.append(f"goals of agents {ids[i]},{ids[j]} coincide")
        return out


def workspace_to_dict(w: Workspace) -> dict:
    return {
        "bounds": [w.bounds.xmin, w.bounds.ymin, w.bounds.xmax, w.bounds.ymax],
        "obstacles": [[[p.x, p.y] for p in poly.vertices] for poly in w.obstacles],
    }


def workspace_from_dict(d: dict) -> Workspace:
    return Workspace(
        Rect(*d["bounds"]),
        tuple(Polygon(tuple(Point2(*p) for p in ring)) for ring in d["obstacles"]),
    )


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "workspace": workspace_to_dict(s.workspace),
        "r": s.r,
        "agents": [
            {"id": a.id, "start": [a.start.x, a.start.y], "goal": [a.goal.x, a.goal.y]}
            for a in s.agents
        ],
        "params": {
            "epsilon": s.params.epsilon,
            "grid_resolution": s.params.grid_resolution,
            "k_max": s.params.k_max,
            "threshold": s.params.threshold,
            "dt": s.params.dt,
            "seed": s.params.seed,
        },
    }


def scenario_from_dict(d: dict) -> Scenario:
    p = d.get("params", {})
    return Scenario(
        name=d.get("name", "scenario"),
        workspace=workspace_from_dict(d["workspace"]),
        r=float(d["r"]),
        agents=[
            AgentSpec(int(a["id"]), Point2(*a["start"]), Point2(*a["goal"]))
            for a in d["agents"]
        ],
        params=ScenarioParams(
            epsilon=p.get("epsilon"),
            grid_resolution=p.get("grid_resolution"),
            k_max=p.get("k_max", 64),
            threshold=p.get("threshold"),
            dt=p.get("dt", 0.1),
            seed=p.get("seed", 0),
        ),
    )


def graph_to_dict(res: ConversionResult) -> dict:
    g = res.graph
    kinds = []
    for e in sorted(res.inter_edge_kind):
        k = res.inter_edge_kind[e]
        if isinstance(k, RadialCorridor):
            kinds.append(
                {"edge": list(e), "kind": "radial", "circle": k.circle,
                 "outer_ring": k.outer_ring, "inner_ring": k.inner_ring}
            )
        elif isinstance(k, GapCorridor):
            kinds.append(
                {"edge": list(e), "kind": "gap", "circle_a": k.circle_a,
                 "ring_a": k.ring_a, "circle_b": k.circle_b, "ring_b": k.ring_b}
            )
        else:
            kinds.append(
                {"edge": list(e), "kind": "path", "circle_a": k.circle_a,
                 "ring_a": k.ring_a, "circle_b": k.circle_b, "ring_b": k.ring_b,
                 "waypoints": [[p.x, p.y] for p in k.waypoints]}
            )
    return {
        "r": res.r,
        "circles": [
            {"center": [c.center.x, c.center.y], "radius": c.radius}
            for c in res.circles
        ],
        "vertices": [
            {"id": v, "pos": [g.positions[v].x, g.positions[v].y]}
            for v in g.vertex_ids()
        ],
        "loops": [list(c) for c in g.loops],
        "loop_layer": [list(x) for x in res.loop_layer],
        "inter_edges": [list(e) for e in sorted(g.inter_edges)],
        "vertex_rings": {
            str(v): [[c, k, ang] for c, k, ang in res.vertex_rings[v]]
            for v in g.vertex_ids()
        },
        "edge_kinds": kinds,
    }


def graph_from_dict(d: dict) -> ConversionResult:
    positions = {int(v["id"]): Point2(*v["pos"]) for v in d["vertices"]}
    g = SwapGraph(
        positions=positions,
        loops=[list(c) for c in d["loops"]],
        inter_edges=[tuple(e) for e in d["inter_edges"]],
    )
    kinds = {}
    for item in d["edge_kinds"]:
        e = edge_key(*item["edge"])
        if item["kind"] == "radial":
            kinds[e] = RadialCorridor(item["circle"], item["outer_ring"], item["inner_ring"])
        elif item["kind"] == "gap":
            kinds[e] = GapCorridor(
                item["circle_a"], item["ring_a"], item["circle_b"], item["ring_b"]
            )
        else:
            kinds[e] = PathCorridor(
                item["circle_a"],
                item["ring_a"],
                item["circle_b"],
                item["ring_b"],
                tuple(Point2(*p) for p in item["waypoints"]),
            )
    return ConversionResult(
        graph=g,
        circles=[Disk(Point2(*c["center"]), c["radius"]) for c in d["circles"]],
        r=float(d["r"]),
        loop_layer=[tuple(x) for x in d["loop_layer"]],
        vertex_rings={
            int(v): [(int(c), int(k), float(a)) for c, k, a in rings]
            for v, rings in d["vertex_rings"].items()
        },
        inter_edge_kind=kinds,
    )


def occupancy_to_dict(occ: Occupancy) -> dict:
    return {str(v): a for v, a in sorted(occ.mapping.items())}


def occupancy_from_dict(d: dict) -> Occupancy:
    return Occupancy({int(v): a for v, a in d.items()})


def plan_to_dict(plan: Plan) -> dict:
    ops = []
    for op in plan.ops:
        if isinstance(op, LoopRotation):
            ops.append({"op": "rot", "loop": op.loop, "steps": op.steps})
        else:
            ops.append({"op": "swap", "u": op.u, "v": op.v})
    return {
        "ops": ops,
        "start": occupancy_to_dict(plan.start),
        "goal": occupancy_to_dict(plan.goal),
    }


def plan_from_dict(d: dict) -> Plan:
    ops = []
    for item in d["ops"]:
        if item["op"] == "rot":
            ops.append(LoopRotation(item["loop"], item["steps"]))
        else:
            ops.append(VacancySwap(item["u"], item["v"]))
    return Plan(
        ops=ops,
        start=occupancy_from_dict(d["start"]),
        goal=occupancy_from_dict(d["goal"]),
    )


def dump_json(data: dict, path) -> None:
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=1) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def trajectory_to_csv(ts: TrajectorySet, path, sample_dt: float) -> None:
    """Sampled trajectory table: one row per (time, agent)."""
    times = np.arange(0.0, ts.horizon + 0.5 * sample_dt, sample_dt)
    if len(times) == 0 or times[-1] < ts.horizon:
        times = np.append(times, ts.horizon)
    lines = ["t,agent,x,y"]
    for a in ts.agents():
        track = _PackedTrack(ts.segments[a])
        pts = track.sample(times)
        for t, (x, y) in zip(times, pts):
            lines.append(f"{float(t)!r},{a},{float(x)!r},{float(y)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def trajectory_from_csv(path) -> dict:
    """Parsed samples: agent -> list of (t, x, y)."""
    out: dict = {}
    rows = Path(path).read_text().strip().split("\n")[1:]
    for row in rows:
        t, a, x, y = row.split(",")
        out.setdefault(a, []).append((float(t), float(x), float(y)))
    return out
