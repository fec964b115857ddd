"""Closest-assignment of agents to graph slots, and local navigation.

Assignment solves the min-total-distance matching exactly (the LP relaxation
of the matching program is integral, so a combinatorial solver returns the
optimum). Navigation moves agents one at a time, in assignment-cost order,
along straight free segments with a single via-point detour fallback; making
it sequential keeps verification trivial and failures honest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import TooFewSlots
from .geometry import (
    Capsule,
    Disk,
    Point2,
    Workspace,
    capsule_free,
    dist,
    points_in_free_space,
    boundary_distance_many,
)
from .trajectory import Hold, Line, MotionSegment, TrajectorySet, SPEED


@dataclass
class Assignment:
    """Bijection from agent index into slot indices, with its total cost."""

    agent_to_slot: dict[int, int]
    total_cost: float


def optimal_assignment(starts: Sequence[Point2], slots: Sequence[Point2]) -> Assignment:
    """Minimum-total-Euclidean-distance assignment of starts into slots."""
    if len(starts) > len(slots):
        raise TooFewSlots(f"{len(starts)} agents but only {len(slots)} slots")
    if not starts:
        return Assignment({}, 0.0)
    S = np.asarray(starts, dtype=float)
    T = np.asarray(slots, dtype=float)
    cost = np.linalg.norm(S[:, None, :] - T[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    mapping = {int(i): int(j) for i, j in zip(rows, cols)}
    return Assignment(mapping, float(cost[rows, cols].sum()))


@dataclass
class NavigationResult:
    trajectory: TrajectorySet
    stuck_agents: list

    @property
    def ok(self) -> bool:
        return not self.stuck_agents


def _via_candidates(w: Workspace, r: float, spacing: float) -> list[Point2]:
    b = w.bounds
    xs = np.arange(b.xmin + 2 * r, b.xmax - 2 * r + 1e-9, spacing)
    ys = np.arange(b.ymin + 2 * r, b.ymax - 2 * r + 1e-9, spacing)
    if len(xs) == 0 or len(ys) == 0:
        return []
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    ok = points_in_free_space(pts, w)
    ok &= boundary_distance_many(pts, w) >= r
    return [Point2(float(x), float(y)) for x, y in pts[ok]]


def navigate(
    current: dict[object, Point2],
    targets: dict[object, Point2],
    w: Workspace,
    r: float,
    order_cost: Optional[dict[object, float]] = None,
    via_hints: Optional[dict[object, list[Point2]]] = None,
    phases: Optional[dict[object, int]] = None,
) -> NavigationResult:
    """Move each agent from its current point to its target, one at a time.

    Agents are grouped into phases (e.g. inner rings first); a phase must
    finish before the next starts, so earlier arrivals never seal off later
    targets. Within a phase agents are retried over multiple passes; on a
    stall, a waiting agent crowding a blocked route is sidestepped to a free
    spot. `via_hints` supplies agent-specific staging points.
    """
    pos = dict(current)
    if order_cost is None:
        order_cost = {a: dist(pos[a], targets[a]) for a in targets}
    if phases is None:
        phases = {a: 0 for a in targets}
    via_hints = via_hints or {}
    vias = None
    t = 0.0
    moves: dict[object, list[MotionSegment]] = {a: [] for a in current}
    stuck: list = []
    budget = 6 * len(targets) + 12

    def emit(a, route):
        nonlocal t
        for p, q in zip(route, route[1:]):
            d = dist(p, q) / SPEED
            if d > 0:
                moves[a].append(MotionSegment(a, t, t + d, Line(p, q)))
                t += d
        pos[a] = route[-1]

    thorough_budget = {a: 8 for a in targets}

    def try_move(a, thorough=False) -> bool:
        nonlocal vias
        others = [Disk(p, r) for x, p in pos.items() if x != a]
        route = _find_route(pos[a], targets[a], w, r, others)
        if route is None and a in via_hints:
            route = _detour_route(pos[a], targets[a], w, r, others, via_hints[a])
        if route is None:
            if vias is None:
                vias = _via_candidates(w, r, max(2.5 * r, w.bounds.diameter() / 24))
            route = _detour_route(pos[a], targets[a], w, r, others, vias)
        if route is None and a in via_hints:
            route = _two_leg_route(pos[a], targets[a], w, r, others, via_hints[a], vias)
        if route is None and thorough and thorough_budget[a] > 0:
            thorough_budget[a] -= 1
            route = _grid_route(pos[a], targets[a], w, r, others)
        if route is None:
            return False
        emit(a, route)
        return True

    order = sorted(targets, key=lambda a: (phases[a], order_cost[a], repr(a)))
    remaining_all = [a for a in order if dist(pos[a], targets[a]) > 1e-12]
    while remaining_all:
        min_phase = min(phases[a] for a in remaining_all)
        active = [a for a in remaining_all if phases[a] == min_phase]
        moved = [a for a in active if try_move(a)]
        if not moved:
            moved = [a for a in active if try_move(a, thorough=True)]
        if moved:
            remaining_all = [a for a in remaining_all if a not in moved]
            continue
        nudged = None
        if budget > 0:
            nudged = _clear_crowd(active, pos, targets, w, r, vias or [], emit)
            budget -= 1
        if nudged is None:
            stuck = active
            break
        if nudged not in remaining_all:
            remaining_all.append(nudged)
            remaining_all.sort(key=lambda a: (phases[a], order_cost[a], repr(a)))
    segments: dict[object, list[MotionSegment]] = {}
    for a in current:
        segs = []
        cur = current[a]
        tt = 0.0
        for s in moves[a]:
            if s.t0 > tt:
                segs.append(MotionSegment(a, tt, s.t0, Hold(cur)))
            segs.append(s)
            tt = s.t1
            cur = s.end_position()
        if tt < t or not segs:
            segs.append(MotionSegment(a, tt, t, Hold(cur)))
        segments[a] = segs
    return NavigationResult(TrajectorySet(segments, t), stuck)


def _find_route(a: Point2, b: Point2, w, r, others) -> Optional[list[Point2]]:
    if dist(a, b) <= 1e-12:
        return [a, b]
    if capsule_free(Capsule(a, b, r), w, others):
        return [a, b]
    return None


def _grid_route(a: Point2, b: Point2, w, r, others) -> Optional[list[Point2]]:
    """Complete single-agent router: BFS over a grid that treats the other
    agents as obstacles, then string-pulled into a short polyline."""
    from collections import deque

    cell = 0.5 * r
    bx = w.bounds
    nx = max(2, int(bx.width / cell))
    ny = max(2, int(bx.height / cell))
    xs = bx.xmin + (np.arange(nx) + 0.5) * (bx.width / nx)
    ys = bx.ymin + (np.arange(ny) + 0.5) * (bx.height / ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
    ok = boundary_distance_many(pts, w) >= r - 1e-9
    ok &= points_in_free_space(pts, w)
    if others:
        oc = np.array([o.center for o in others])
        orad = np.array([o.radius for o in others])
        d = np.linalg.norm(pts[:, None, :] - oc[None, :, :], axis=2)
        ok &= (d >= (orad[None, :] + r) * (1 - 1e-9)).all(axis=1)
    free = ok.reshape(nx, ny)

    def cell_of(p):
        i = int(np.clip((p[0] - bx.xmin) / (bx.width / nx), 0, nx - 1))
        j = int(np.clip((p[1] - bx.ymin) / (bx.height / ny), 0, ny - 1))
        return i, j

    def near_free(p):
        i0, j0 = cell_of(p)
        best = None
        for di in range(-3, 4):
            for dj in range(-3, 4):
                i, j = i0 + di, j0 + dj
                if 0 <= i < nx and 0 <= j < ny and free[i, j]:
                    d = (xs[i] - p[0]) ** 2 + (ys[j] - p[1]) ** 2
                    if best is None or d < best[0]:
                        best = (d, (i, j))
        return None if best is None else best[1]

    src = near_free(a)
    dst = near_free(b)
    if src is None or dst is None:
        return None
    prev = {src: None}
    q = deque([src])
    found = False
    while q:
        cur = q.popleft()
        if cur == dst:
            found = True
            break
        ci, cj = cur
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)):
            i, j = ci + di, cj + dj
            if 0 <= i < nx and 0 <= j < ny and free[i, j] and (i, j) not in prev:
                prev[(i, j)] = cur
                q.append((i, j))
    if not found:
        return None
    chain = [dst]
    while prev[chain[-1]] is not None:
        chain.append(prev[chain[-1]])
    chain.reverse()
    waypoints = [a] + [Point2(float(xs[i]), float(ys[j])) for i, j in chain] + [b]
    return _string_pull(waypoints, w, r, others)


def _string_pull(waypoints, w, r, others) -> Optional[list[Point2]]:
    out = [waypoints[0]]
    k = 0
    guard = 0
    while k < len(waypoints) - 1 and guard < 10 * len(waypoints):
        guard += 1
        nxt = k + 1
        for j in range(len(waypoints) - 1, k, -1):
            if dist(out[-1], waypoints[j]) <= 1e-12 or capsule_free(
                Capsule(out[-1], waypoints[j], r), w, others
            ):
                nxt = j
                break
        else:
            return None
        out.append(waypoints[nxt])
        k = nxt
    if k < len(waypoints) - 1:
        return None
    return out


def _free_sidestep(p, away_from, w, r, others, vias) -> Optional[Point2]:
    """Nearest reachable via spot that steps clear of the given segment."""
    best = None
    for v in vias:
        d = dist(p, v)
        if d < 2 * r:
            continue
        seg_clear = _seg_point_dist(away_from[0], away_from[1], v)
        if seg_clear < 2.5 * r:
            continue
        score = d - 0.1 * seg_clear
        if best is not None and score >= best[0]:
            continue
        if all(dist(v, o.center) >= 2 * r for o in others) and capsule_free(
            Capsule(p, v, r), w, others
        ):
            best = (score, v)
    return None if best is None else best[1]


def _seg_point_dist(a, b, p) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = min(1.0, max(0.0, ((p[0] - ax) * dx + (p[1] - ay) * dy) / seg2))
    return math.hypot(p[0] - ax - t * dx, p[1] - ay - t * dy)


def _clear_crowd(blocked, pos, targets, w, r, vias, emit):
    """Sidestep one agent crowding a blocked agent's direct route.

    Prefers agents still waiting to move; a parked agent is nudged only as a
    last resort (the caller re-queues it). Returns the nudged agent or None.
    """
    for parked_ok in (False, True):
        for a in blocked:
            seg = (pos[a], targets[a])
            crowd = sorted(
                (
                    x
                    for x in pos
                    if x != a and _seg_point_dist(seg[0], seg[1], pos[x]) < 2.2 * r
                ),
                key=lambda x: (_seg_point_dist(seg[0], seg[1], pos[x]), repr(x)),
            )
            for b in crowd:
                parked = dist(pos[b], targets.get(b, pos[b])) <= 1e-12
                if parked and not parked_ok:
                    continue
                others = [Disk(p, r) for x, p in pos.items() if x != b]
                spot = _free_sidestep(pos[b], seg, w, r, others, vias)
                if spot is not None:
                    emit(b, [pos[b], spot])
                    return b
    return None


def _detour_route(a, b, w, r, others, vias) -> Optional[list[Point2]]:
    best = None
    for v in vias:
        extra = dist(a, v) + dist(v, b)
        if best is not None and extra >= best[0]:
            continue
        if dist(a, v) < 1e-12 or dist(v, b) < 1e-12:
            continue
        if capsule_free(Capsule(a, v, r), w, others) and capsule_free(
            Capsule(v, b, r), w, others
        ):
            best = (extra, v)
    if best is None:
        return None
    return [a, best[1], b]


def _two_leg_route(a, b, w, r, others, hints, vias) -> Optional[list[Point2]]:
    """Route a -> grid via -> hint -> b for targets needing a staged approach."""
    for h in hints:
        if dist(h, b) < 1e-12 or not capsule_free(Capsule(h, b, r), w, others):
            continue
        if capsule_free(Capsule(a, h, r), w, others):
            return [a, h, b]
        for v in vias or []:
            if dist(a, v) < 1e-12 or dist(v, h) < 1e-12:
                continue
            if capsule_free(Capsule(a, v, r), w, others) and capsule_free(
                Capsule(v, h, r), w, others
            ):
                return [a, v, h, b]
    return None


def radial_hints(res, vid: int, r: float) -> list[Point2]:
    """Staging points on the outward radial of a slot, for threading into a
    ring whose neighboring slots are already occupied."""
    out = []
    for circle, ring, ang in res.vertex_rings[vid]:
        c = res.circles[circle].center
        ux, uy = math.cos(ang), math.sin(ang)
        for extra in (2.5, 4.5, 7.0):
            rad = 2.0 * r * ring + extra * r
            out.append(Point2(c.x + rad * ux, c.y + rad * uy))
    return out


def navigate_to_vertices(
    starts: Sequence[Point2],
    asg: Assignment,
    res,
    w: Workspace,
    r: float,
) -> NavigationResult:
    """Best-effort motion of each agent to its assigned graph vertex."""
    vids = res.graph.vertex_ids()
    current = {i: Point2(*starts[i]) for i in asg.agent_to_slot}
    targets = {
        i: res.graph.positions[vids[j]] for i, j in asg.agent_to_slot.items()
    }
    ring_depth = {
        i: min(k for _, k, _ in res.vertex_rings[vids[j]])
        for i, j in asg.agent_to_slot.items()
    }
    costs = {i: dist(current[i], targets[i]) for i in current}
    hints = {
        i: radial_hints(res, vids[j], r) for i, j in asg.agent_to_slot.items()
    }
    return navigate(
        current, targets, w, r, costs, via_hints=hints, phases=ring_depth
    )
