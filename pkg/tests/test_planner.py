import itertools
import math
import random

import pytest

from graph_fixtures import (
    four_loop_example,
    loop_chain,
    random_graph,
    random_occupancy,
    shuffled_goal,
    two_triangles,
)
from swapmotion.errors import AssignmentMismatch, IllegalOp, PlannerError
from swapmotion.planner import (
    LoopRotation,
    VacancySwap,
    apply_op,
    apply_ops,
    exchange,
    exchange_connected_loops,
    exchange_same_loop,
    execute,
    move_vacancy,
    plan_permutation,
    reverse_ops,
)
from swapmotion.swap_graph import Occupancy


def occupancy_with_hole(g, hole):
    return Occupancy({v: (None if v == hole else 100 + v) for v in g.vertex_ids()})


class TestApplyOp:
    def test_full_rotation_is_identity(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        out = apply_op(occ, g, LoopRotation(0, 4))
        assert out.mapping == occ.mapping

    def test_swap_with_vacancy(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        out = apply_op(occ, g, VacancySwap(1, 2))
        assert out.mapping[1] == 102 and out.mapping[2] is None

    def test_swap_two_occupied_is_illegal(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        with pytest.raises(IllegalOp):
            apply_op(occ, g, VacancySwap(2, 3))

    def test_swap_missing_edge_is_illegal(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        with pytest.raises(IllegalOp):
            apply_op(occ, g, VacancySwap(1, 17))


class TestMoveVacancy:
    def test_noop(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 3)
        assert move_vacancy(g, occ, 3) == []

    def test_two_step_chain_along_first_loop(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        ops = move_vacancy(g, occ, 3)
        assert len(ops) == 2
        assert all(isinstance(op, VacancySwap) for op in ops)
        out = apply_ops(occ, g, ops)
        assert out.mapping[3] is None

    def test_random_targets(self):
        rng = random.Random(8)
        for _ in range(40):
            g = random_graph(rng, max_vertices=25)
            occ = random_occupancy(rng, g)
            target = rng.choice(g.vertex_ids())
            out = apply_ops(occ, g, move_vacancy(g, occ, target))
            assert out.mapping[target] is None


class TestExchanges:
    def test_exchange_self_is_empty(self):
        g = two_triangles()
        occ = occupancy_with_hole(g, 4)
        assert exchange(g, occ, 1, 1) == []

    def test_exhaustive_small_graphs(self):
        for g in (two_triangles(), loop_chain(3)):
            verts = g.vertex_ids()
            for hole in verts:
                occ = occupancy_with_hole(g, hole)
                for v, v2 in itertools.combinations(
                    [x for x in verts if x != hole], 2
                ):
                    out = apply_ops(occ, g, exchange(g, occ, v, v2))
                    expect = dict(occ.mapping)
                    expect[v], expect[v2] = expect[v2], expect[v]
                    assert out.mapping == expect

    def test_same_loop_contract(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 16)
        out = apply_ops(occ, g, exchange_same_loop(g, occ, 6, 8))
        expect = dict(occ.mapping)
        expect[6], expect[8] = expect[8], expect[6]
        assert out.mapping == expect

    def test_connected_loops_contract(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 2)
        out = apply_ops(occ, g, exchange_connected_loops(g, occ, 12, 15))
        expect = dict(occ.mapping)
        expect[12], expect[15] = expect[15], expect[12]
        assert out.mapping == expect

    def test_far_pair_on_figure_graph(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 11)
        out = apply_ops(occ, g, exchange(g, occ, 2, 16))
        expect = dict(occ.mapping)
        expect[2], expect[16] = expect[16], expect[2]
        assert out.mapping == expect

    def test_random_locality_and_envelope(self):
        rng = random.Random(10)
        worst = 0.0
        for _ in range(200):
            g = random_graph(rng, max_vertices=rng.randint(8, 40))
            occ = random_occupancy(rng, g)
            occupied = [v for v in g.vertex_ids() if occ.mapping[v] is not None]
            v, v2 = rng.sample(occupied, 2)
            ops = exchange(g, occ, v, v2)
            out = apply_ops(occ, g, ops)
            diff = [x for x in g.vertex_ids() if out.mapping[x] != occ.mapping[x]]
            assert sorted(diff) == sorted([v, v2])
            worst = max(worst, len(ops) / g.num_vertices())
        # measured envelope constant for exchange op counts (with margin)
        assert worst <= 40.0

    def test_hub_pair_separating_the_vacancy(self):
        # three loops pairwise joined at single hub vertices: exchanging the
        # two hubs of an edge separates the vacancy from every staging seat
        from swapmotion.geometry import Point2
        from swapmotion.swap_graph import SwapGraph

        loops = [[0, 1, 2, 3, 4, 5], [6, 7, 8, 9, 10, 11], [12, 13, 14, 15, 16, 17]]
        pos = {}
        centers = [(0.0, 0.0), (10.0, 0.0), (5.0, 9.0)]
        for li, cyc in enumerate(loops):
            for k, v in enumerate(cyc):
                t = 2 * math.pi * k / 6
                pos[v] = Point2(
                    centers[li][0] + 2 * math.cos(t), centers[li][1] + 2 * math.sin(t)
                )
        g = SwapGraph(positions=pos, loops=loops,
                      inter_edges=[(0, 6), (0, 12), (6, 12)])
        assert not g.violations()
        for hole in (14, 15, 3, 9):
            occ = occupancy_with_hole(g, hole)
            for v, v2 in [(0, 6), (6, 12), (0, 12)]:
                if hole in (v, v2):
                    continue
                out = apply_ops(occ, g, exchange(g, occ, v, v2))
                expect = dict(occ.mapping)
                expect[v], expect[v2] = expect[v2], expect[v]
                assert out.mapping == expect, (hole, v, v2)

    def test_vacant_endpoint_rejected(self):
        g = two_triangles()
        occ = occupancy_with_hole(g, 4)
        with pytest.raises(PlannerError):
            exchange(g, occ, 4, 1)


class TestPlanPermutation:
    def test_identity_plan(self):
        g = four_loop_example()
        occ = occupancy_with_hole(g, 1)
        plan = plan_permutation(g, occ, occ.copy())
        assert execute(plan, g).mapping == occ.mapping

    def test_transposition_on_minimal_graph(self):
        g = two_triangles()
        start = occupancy_with_hole(g, 4)
        goal = start.copy()
        goal.mapping[1], goal.mapping[2] = goal.mapping[2], goal.mapping[1]
        plan = plan_permutation(g, start, goal)
        assert execute(plan, g).mapping == goal.mapping

    def test_mismatched_agents_rejected(self):
        g = two_triangles()
        start = occupancy_with_hole(g, 4)
        goal = Occupancy({v: (None if v == 4 else 900 + v) for v in g.vertex_ids()})
        with pytest.raises(AssignmentMismatch):
            plan_permutation(g, start, goal)

    def test_reversibility(self):
        rng = random.Random(12)
        for _ in range(25):
            g = random_graph(rng, max_vertices=24)
            start = random_occupancy(rng, g)
            goal = shuffled_goal(rng, g, start)
            plan = plan_permutation(g, start, goal)
            back = apply_ops(
                execute(plan, g), g, reverse_ops(plan.ops)
            )
            assert back.mapping == start.mapping

    def test_multi_vacancy_reduction(self):
        rng = random.Random(13)
        for _ in range(25):
            g = random_graph(rng, max_vertices=20)
            start = random_occupancy(rng, g, n_vacant=rng.randint(2, 4))
            goal = shuffled_goal(rng, g, start)
            plan = plan_permutation(g, start, goal)
            assert execute(plan, g).mapping == goal.mapping


def loopwise_reversal_instance(q):
    """Chain of q 3-loops; every agent mirrors to the opposite loop."""
    g = loop_chain(q)
    verts = g.vertex_ids()
    mapping = {v: (None if v == 0 else v) for v in verts}
    start = Occupancy(mapping)
    goal_map = {}
    for li in range(q):
        for s in range(3):
            goal_map[3 * (q - 1 - li) + s] = mapping[3 * li + s]
    return g, start, Occupancy(goal_map)


class TestWorstCaseFamily:
    def test_loopwise_reversal_grows_quadratically(self):
        import numpy as np

        xs, ys = [], []
        for q in (4, 8, 12, 16, 20):
            g, start, goal = loopwise_reversal_instance(q)
            plan = plan_permutation(g, start, goal)
            assert execute(plan, g).mapping == goal.mapping
            xs.append(math.log(3 * q))
            ys.append(math.log(len(plan.ops)))
        slope = np.polyfit(xs, ys, 1)[0]
        assert slope >= 1.8
