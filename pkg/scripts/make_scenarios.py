"""Generate the shipped benchmark scenario files (run from the repo root).

Geometry for the obstacle and maple workspaces is hand-traced at desk scale;
the maple outline is an approximation and labeled as such in the name.
"""

import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, "src")

from swapmotion.fileio import (
    AgentSpec,
    Scenario,
    ScenarioParams,
    dump_json,
    scenario_to_dict,
)
from swapmotion.geometry import Point2, Polygon, Rect, Workspace, rectangle_workspace
from swapmotion.pipeline import run_pipeline, sample_free_positions


def agents_for(w, r, n, seed):
    rng = np.random.default_rng(seed)
    starts = sample_free_positions(w, r, n, rng, 2.0 * r)
    goals = sample_free_positions(w, r, n, rng, 2.0 * r)
    return [AgentSpec(i, starts[i], goals[i]) for i in range(n)]


def poly(*pts):
    return Polygon(tuple(Point2(float(x), float(y)) for x, y in pts))


def obstacles_workspace():
    return Workspace(
        Rect(0, 0, 52, 26),
        (
            poly((14, 0.0), (18, 0.0), (18, 9), (14, 9)),
            poly((30, 17), (36, 17), (36, 26.0), (30, 26.0)),
            poly((24, 6), (31, 10), (24, 14)),
        ),
    )


def maple_workspace():
    # rough leaf silhouette: corner wedges and two notches carve the lobes
    return Workspace(
        Rect(0, 0, 44, 40),
        (
            poly((0, 0), (16, 0), (0, 12)),
            poly((28, 0), (44, 0), (44, 12)),
            poly((0, 28), (6, 40), (0, 40)),
            poly((44, 28), (44, 40), (38, 40)),
            poly((19, 40), (22, 30), (25, 40)),
            poly((0, 18), (7, 20), (0, 22)),
            poly((44, 18), (44, 22), (37, 20)),
        ),
    )


def grid_workspace():
    pillars = []
    for i in range(3):
        for j in range(2):
            x = 10 + i * 12
            y = 7 + j * 10
            pillars.append(poly((x, y), (x + 4, y), (x + 4, y + 4), (x, y + 4)))
    return Workspace(Rect(0, 0, 46, 26), tuple(pillars))


def build(name, w, r, n, seed, params):
    s = Scenario(name, w, r, agents_for(w, r, n, seed), params)
    t0 = time.time()
    run, _ = run_pipeline(s)
    wall = time.time() - t0
    print(
        f"{name}: seed={seed} wall={wall:.1f}s V={run.num_vertices} "
        f"ops={run.op_count} horizon={run.horizon:.0f} violations={run.violations}"
    )
    assert run.success, f"{name} failed"
    dump_json(scenario_to_dict(s), Path("scenarios") / f"{name}.json")
    return s


def main():
    Path("scenarios").mkdir(exist_ok=True)
    build(
        "rect_12", rectangle_workspace(30, 18), 1.0, 12, 7,
        ScenarioParams(dt=0.25, threshold=60, seed=7),
    )
    build(
        "rect_50", rectangle_workspace(64, 24), 1.0, 50, 1,
        ScenarioParams(dt=0.25, threshold=150, seed=1),
    )
    build(
        "rect_100", rectangle_workspace(88, 26), 1.0, 100, 1,
        ScenarioParams(dt=0.25, threshold=300, seed=1),
    )
    build(
        "obstacles_30", obstacles_workspace(), 1.0, 30, 3,
        ScenarioParams(dt=0.25, threshold=120, seed=3),
    )
    build(
        "maple_approx_24", maple_workspace(), 1.0, 24, 2,
        ScenarioParams(dt=0.25, threshold=100, seed=2),
    )
    build(
        "grid_20", grid_workspace(), 1.0, 20, 4,
        ScenarioParams(dt=0.25, threshold=90, seed=4, epsilon=2.0, k_max=32),
    )
    # negative capacity case: a corridor too narrow for two agent rings
    w = rectangle_workspace(40, 4)
    s = Scenario(
        "corridor_narrow_4",
        w,
        1.0,
        agents_for(w, 1.0, 4, 9),
        ScenarioParams(dt=0.25, seed=9),
    )
    dump_json(scenario_to_dict(s), Path("scenarios") / "corridor_narrow_4.json")
    print("corridor_narrow_4: written (expected to fail with InsufficientCapacity)")


if __name__ == "__main__":
    main()
