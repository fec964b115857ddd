"""End-to-end pipeline: convert, assign, plan, realize, verify; bench harness."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .assignment import Assignment, navigate, optimal_assignment
from .conversion import ConversionResult, greedy_convert
from .errors import (
    AssignmentFailure,
    InsufficientCapacity,
    NavigationFailure,
)
from .fileio import (
    Scenario,
    dump_json,
    graph_to_dict,
    plan_to_dict,
    scenario_to_dict,
    trajectory_to_csv,
)
from .geometry import Point2, Workspace, dist, disk_in_free_space, Disk, points_in_free_space, boundary_distance_many
from .planner import Plan, plan_permutation
from .render_svg import render_scene
from .swap_graph import Occupancy, VACANT
from .trajectory import (
    Hold,
    MotionSegment,
    TrajectorySet,
    VerificationReport,
    realize_plan,
    verify_trajectories,
)


@dataclass
class RunReport:
    scenario: str
    n_agents: int
    num_vertices: int
    op_count: int
    horizon: float
    density: float
    timings: dict[str, float]
    min_pairwise: float
    min_clearance: float
    violations: int
    success: bool

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "n_agents": self.n_agents,
            "num_vertices": self.num_vertices,
            "op_count": self.op_count,
            "horizon": self.horizon,
            "density": self.density,
            "timings": self.timings,
            "min_pairwise": self.min_pairwise,
            "min_clearance": self.min_clearance,
            "violations": self.violations,
            "success": self.success,
        }


@dataclass
class RunArtifacts:
    conversion: ConversionResult
    start_occ: Occupancy
    goal_occ: Occupancy
    plan: Plan
    trajectory: TrajectorySet
    verification: VerificationReport


def concat_trajectories(parts: list[TrajectorySet]) -> TrajectorySet:
    """Stitch trajectory sets end to end (agents must match up)."""
    parts = [p for p in parts if p is not None]
    agents = set()
    for p in parts:
        agents |= set(p.segments)
    segments: dict[object, list[MotionSegment]] = {a: [] for a in agents}
    t = 0.0
    for p in parts:
        for a in agents:
            segs = p.segments.get(a)
            if segs is None:
                prev = segments[a][-1] if segments[a] else None
                pos = prev.end_position() if prev else Point2(0.0, 0.0)
                segments[a].append(
                    MotionSegment(a, t, t + p.horizon, Hold(pos))
                )
            else:
                for s in segs:
                    segments[a].append(
                        MotionSegment(a, s.t0 + t, s.t1 + t, s.path)
                    )
        t += p.horizon
    return TrajectorySet(segments, t)


def scenario_density(s: Scenario) -> float:
    return len(s.agents) * math.pi * s.r**2 / s.workspace.free_area()


def run_pipeline(
    s: Scenario, out_dir: Optional[str] = None
) -> tuple[RunReport, RunArtifacts]:
    """Full run: convert -> assign -> plan -> realize -> verify (+ artifacts).

    Raises InsufficientCapacity / AssignmentFailure / NavigationFailure with
    the failing stage; any violation found by the final verification also
    fails the run (reflected in the report's success flag).
    """
    w = s.workspace
    n = len(s.agents)
    problems = s.validate()
    if problems:
        raise ValueError(f"scenario: {problems[0]} (+{len(problems) - 1} more)"
                         if len(problems) > 1 else f"scenario: {problems[0]}")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    res = greedy_convert(
        w,
        s.r,
        threshold=s.params.threshold if s.params.threshold is not None else n + 1,
        starts=s.starts(),
        epsilon=s.params.epsilon,
        grid_resolution=s.params.grid_resolution,
        k_max=s.params.k_max,
    )
    timings["convert"] = time.perf_counter() - t0
    g = res.graph
    if g.num_vertices() < n + 1:
        raise InsufficientCapacity(
            f"convert: graph has {g.num_vertices()} vertices for {n} agents"
        )

    t0 = time.perf_counter()
    vids = g.vertex_ids()
    slots = [g.positions[v] for v in vids]
    try:
        asg_start = optimal_assignment(s.starts(), slots)
        asg_goal = optimal_assignment(s.goals(), slots)
    except Exception as e:  # noqa: BLE001 - reported as stage failure
        raise AssignmentFailure(f"assign: {e}") from e
    timings["assign"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    # navigate both endpoints before planning; a stuck agent is retried on a
    # spare slot (the graph always has at least one more vertex than agents)
    prologue, asg_start = _navigate_with_retries(
        s, res, vids, asg_start, outbound=False
    )
    if not prologue.ok:
        raise NavigationFailure(prologue.stuck_agents, "realize: start navigation stuck")
    epilogue, asg_goal = _navigate_with_retries(s, res, vids, asg_goal, outbound=True)
    if not epilogue.ok:
        raise NavigationFailure(epilogue.stuck_agents, "realize: goal navigation stuck")
    start_occ = _occupancy_from_assignment(vids, asg_start, n)
    goal_occ = _occupancy_from_assignment(vids, asg_goal, n)
    timings["navigate"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    from .conversion import realization_edge_cost

    plan = plan_permutation(g, start_occ, goal_occ, realization_edge_cost(res))
    timings["plan"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    main = realize_plan(res, plan)
    full = concat_trajectories([prologue.trajectory, main, epilogue.trajectory])
    timings["realize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    report = verify_trajectories(full, w, s.r, s.params.dt)
    timings["verify"] = time.perf_counter() - t0

    run = RunReport(
        scenario=s.name,
        n_agents=n,
        num_vertices=g.num_vertices(),
        op_count=len(plan.ops),
        horizon=full.horizon,
        density=scenario_density(s),
        timings={k: round(v, 4) for k, v in timings.items()},
        min_pairwise=report.min_pairwise,
        min_clearance=report.min_clearance,
        violations=len(report.violations),
        success=report.ok,
    )
    artifacts = RunArtifacts(res, start_occ, goal_occ, plan, full, report)
    if out_dir is not None:
        _write_artifacts(out_dir, s, run, artifacts)
    return run, artifacts


def _occupancy_from_assignment(vids, asg: Assignment, n: int) -> Occupancy:
    mapping = {v: VACANT for v in vids}
    for agent, slot in asg.agent_to_slot.items():
        mapping[vids[slot]] = agent
    return Occupancy(mapping)


def _navigate_with_retries(s: Scenario, res, vids, asg: Assignment, outbound: bool):
    """Run one navigation leg, moving stuck agents onto spare slots.

    Inbound legs move agents from scenario starts to their assigned slots;
    outbound legs move them from slots to goals. On a stall the stuck agent's
    slot is swapped for the nearest free spare and the leg is retried.
    """
    from .assignment import radial_hints

    g = res.graph
    asg = Assignment(dict(asg.agent_to_slot), asg.total_cost)
    points = {a.id: (a.goal if outbound else a.start) for a in s.agents}
    for _ in range(4):
        def slot_pos(agent):
            return g.positions[vids[asg.agent_to_slot[agent]]]

        def slot_ring(agent):
            vid = vids[asg.agent_to_slot[agent]]
            return min(k for _, k, _ in res.vertex_rings[vid])

        hints = {
            a.id: radial_hints(res, vids[asg.agent_to_slot[a.id]], s.r)
            for a in s.agents
        }
        if outbound:
            # draining only opens space, so no phase barrier; outer rings are
            # merely tried first via the cost ordering
            result = navigate(
                {i: slot_pos(i) for i in points},
                points,
                s.workspace,
                s.r,
                order_cost={
                    i: -1000.0 * slot_ring(i)
                    + dist(slot_pos(i), points[i])
                    for i in points
                },
                via_hints=hints,
            )
        else:
            result = navigate(
                points,
                {i: slot_pos(i) for i in points},
                s.workspace,
                s.r,
                via_hints=hints,
                phases={i: slot_ring(i) for i in points},
            )
        if result.ok:
            return result, asg
        used = set(asg.agent_to_slot.values())
        spares = [j for j in range(len(vids)) if j not in used]
        if not spares:
            return result, asg
        changed = False
        for agent in result.stuck_agents:
            p = points[agent]
            spares.sort(key=lambda j: dist(p, g.positions[vids[j]]))
            for j in spares:
                if j not in used:
                    used.discard(asg.agent_to_slot[agent])
                    asg.agent_to_slot[agent] = j
                    used.add(j)
                    spares.remove(j)
                    changed = True
                    break
        if not changed:
            return result, asg
    return result, asg


def _write_artifacts(out_dir, s: Scenario, run: RunReport, art: RunArtifacts):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dump_json(scenario_to_dict(s), out / "scenario.json")
    dump_json(graph_to_dict(art.conversion), out / "graph.json")
    dump_json(plan_to_dict(art.plan), out / "plan.json")
    dump_json(run.to_dict(), out / "report.json")
    trajectory_to_csv(
        art.trajectory, out / "trajectory.csv", sample_dt=max(10 * s.params.dt, 0.5 * s.r)
    )
    svg = render_scene(
        s.workspace,
        res=art.conversion,
        trajectories=art.trajectory,
        agents={a.id: a.start for a in s.agents},
        goals={a.id: a.goal for a in s.agents},
        r=s.r,
    )
    (out / "scene.svg").write_text(svg)


def sample_free_positions(
    w: Workspace, r: float, n: int, rng: np.random.Generator, min_sep: float
) -> list[Point2]:
    """Rejection-sample n positions with disks in free space, pairwise spaced."""
    out: list[Point2] = []
    b = w.bounds
    attempts = 0
    while len(out) < n:
        attempts += 1
        if attempts > 20000 * n:
            raise ValueError(f"could not sample {n} positions (placed {len(out)})")
        x = rng.uniform(b.xmin + r, b.xmax - r)
        y = rng.uniform(b.ymin + r, b.ymax - r)
        p = Point2(float(x), float(y))
        if not disk_in_free_space(Disk(p, r), w):
            continue
        if any(dist(p, q) < min_sep for q in out):
            continue
        out.append(p)
    return out


def randomize_scenario(s: Scenario, trial_seed: int) -> Scenario:
    """Fresh random starts/goals for one bench trial of a scenario."""
    from .fileio import AgentSpec

    rng = np.random.default_rng(trial_seed)
    n = len(s.agents)
    starts = sample_free_positions(s.workspace, s.r, n, rng, 2.0 * s.r)
    goals = sample_free_positions(s.workspace, s.r, n, rng, 2.0 * s.r)
    return Scenario(
        name=s.name,
        workspace=s.workspace,
        r=s.r,
        agents=[AgentSpec(i, starts[i], goals[i]) for i in range(n)],
        params=s.params,
    )


def bench(
    suite: list[Scenario], trials: int, seed: int
) -> list[dict]:
    """Run each scenario `trials` times with fresh random starts and goals."""
    rows = []
    for idx, base in enumerate(suite):
        for trial in range(trials):
            scen = randomize_scenario(base, seed + 1000 * idx + trial)
            t0 = time.perf_counter()
            try:
                run, _ = run_pipeline(scen)
                ok = run.success
                row = run.to_dict()
            except Exception as e:  # noqa: BLE001 - bench reports failures as data
                ok = False
                row = {
                    "scenario": base.name,
                    "n_agents": len(base.agents),
                    "error": f"{type(e).__name__}: {e}",
                }
            row["trial"] = trial
            row["wall_time"] = round(time.perf_counter() - t0, 3)
            row["success"] = ok
            rows.append(row)
    return rows


def bench_table(rows: list[dict]) -> str:
    by_scenario: dict[str, list[dict]] = {}
    for row in rows:
        by_scenario.setdefault(row["scenario"], []).append(row)
    lines = [
        f"{'scenario':<20} {'N':>4} {'trials':>6} {'success':>8} "
        f"{'med_time':>9} {'max_time':>9} {'med_ops':>8} {'density':>8}"
    ]
    for name, group in sorted(by_scenario.items()):
        n = group[0].get("n_agents", 0)
        succ = sum(1 for g in group if g["success"])
        times = sorted(g["wall_time"] for g in group)
        med_t = times[len(times) // 2]
        ops = sorted(g.get("op_count", 0) for g in group)
        med_ops = ops[len(ops) // 2]
        dens = group[0].get("density", float("nan"))
        lines.append(
            f"{name:<20} {n:>4} {len(group):>6} {succ:>3}/{len(group):<4} "
            f"{med_t:>9.2f} {times[-1]:>9.2f} {med_ops:>8} {dens:>8.3f}"
        )
    return "\n".join(lines)
