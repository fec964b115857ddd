"""Continuous realization of discrete swap operations, plus verification.

Every discrete op becomes timestamped unit-speed motion: loop rotations are
simultaneous arcs along the ring centerline (angular gaps interpolate
linearly between two legal configurations, so spacing is preserved), vacancy
swaps along ring edges are single arcs into the empty slot, and connector
swaps run in align / traverse / restore phases that rigidly rotate the rings
involved, send the mover through the corridor, and rotate back. Ops execute
strictly one after another.

`verify_trajectories` is the independent oracle: it samples every agent on a
fixed time grid and reports minimum pairwise distance, minimum boundary
clearance, and all violation intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .conversion import (
    ConversionResult,
    GapCorridor,
    PathCorridor,
    RadialCorridor,
    corridor_polyline,
)
from .errors import UnrealizableOp
from .geometry import Point2, Workspace, boundary_distance_many, dist
from .planner import LoopRotation, Plan, SwapOp, VacancySwap
from .swap_graph import VACANT, Occupancy, edge_key

SPEED = 1.0


@dataclass(frozen=True)
class Hold:
    p: Point2


@dataclass(frozen=True)
class Line:
    a: Point2
    b: Point2

    def length(self) -> float:
        return dist(self.a, self.b)


@dataclass(frozen=True)
class Arc:
    center: Point2
    radius: float
    angle0: float
    angle1: float

    def length(self) -> float:
        return abs(self.angle1 - self.angle0) * self.radius


PathShape = Union[Hold, Line, Arc]


@dataclass(frozen=True)
class MotionSegment:
    agent: object
    t0: float
    t1: float
    path: PathShape

    def position(self, t: float) -> Point2:
        if self.t1 > self.t0:
            s = min(1.0, max(0.0, (t - self.t0) / (self.t1 - self.t0)))
        else:
            s = 1.0
        return _shape_position(self.path, s)

    def end_position(self) -> Point2:
        return _shape_position(self.path, 1.0)


def _shape_position(path: PathShape, s: float) -> Point2:
    if isinstance(path, Hold):
        return path.p
    if isinstance(path, Line):
        return Point2(
            path.a.x + s * (path.b.x - path.a.x), path.a.y + s * (path.b.y - path.a.y)
        )
    ang = path.angle0 + s * (path.angle1 - path.angle0)
    return Point2(
        path.center.x + path.radius * math.cos(ang),
        path.center.y + path.radius * math.sin(ang),
    )


@dataclass
class TrajectorySet:
    """Per-agent motion segments tiling [0, horizon] without gaps."""

    segments: dict[object, list[MotionSegment]]
    horizon: float

    def position(self, agent, t: float) -> Point2:
        segs = self.segments[agent]
        lo, hi = 0, len(segs) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if segs[mid].t1 < t:
                lo = mid + 1
            else:
                hi = mid
        return segs[lo].position(t)

    def agents(self) -> list:
        return sorted(self.segments, key=repr)


def _signed_short(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


def _slot_point(res: ConversionResult, circle: int, ring: int, angle: float) -> Point2:
    c = res.circles[circle].center
    rad = 2.0 * res.r * ring
    return Point2(c.x + rad * math.cos(angle), c.y + rad * math.sin(angle))


def _arc_phase(res, li, t0, riders):
    """Simultaneous arcs on one ring; riders = (agent, start_angle, sweep)."""
    circle, ring = res.loop_layer[li]
    rad = 2.0 * res.r * ring
    sweeps = [abs(s) for _, _, s in riders]
    if not sweeps or max(sweeps) == 0.0:
        return [], 0.0
    dur = max(sweeps) * rad / SPEED
    center = res.circles[circle].center
    segs = [
        MotionSegment(agent, t0, t0 + dur, Arc(center, rad, a0, a0 + sweep))
        for agent, a0, sweep in riders
        if sweep != 0.0
    ]
    return segs, dur


def _ring_riders(res, occ_map, li, sweep, skip=()):
    """Riders for every occupied slot of a loop, starting at slot angles."""
    circle, ring = res.loop_layer[li]
    out = []
    for x in res.graph.loops[li]:
        if x in skip or occ_map[x] is VACANT:
            continue
        out.append((occ_map[x], res.angle_in(x, circle, ring), sweep))
    return out


def realize_type1(
    res: ConversionResult, op: LoopRotation, occ: Occupancy
) -> list[MotionSegment]:
    """All loop agents sweep to their target slots simultaneously."""
    segs, dur = _type1_motion(res, op, occ.mapping, 0.0)
    return _with_holds(res, occ.mapping, segs, dur)


def _type1_motion(res, op: LoopRotation, occ_map, t0):
    li = op.loop
    if li >= len(res.loop_layer):
        raise UnrealizableOp(f"loop {li} has no ring metadata")
    circle, ring = res.loop_layer[li]
    cyc = res.graph.loops[li]
    m = len(cyc)
    k = op.steps % m
    if k == 0:
        return [], 0.0
    signed = k if k <= m - k else k - m
    angles = [res.angle_in(v, circle, ring) for v in cyc]
    riders = []
    for p, v in enumerate(cyc):
        if occ_map[v] is VACANT:
            continue
        tgt = angles[(p + k) % m]
        if signed > 0:
            dlt = (tgt - angles[p]) % (2 * math.pi)
        else:
            dlt = -((angles[p] - tgt) % (2 * math.pi))
        riders.append((occ_map[v], angles[p], dlt))
    return _arc_phase(res, li, t0, riders)


def realize_type2(
    res: ConversionResult, op: VacancySwap, occ: Occupancy
) -> list[MotionSegment]:
    """Three-phase (align, traverse, restore) motion for a vacancy swap."""
    segs, dur = _type2_motion(res, op, occ.mapping, 0.0)
    return _with_holds(res, occ.mapping, segs, dur)


def _type2_motion(res, op: VacancySwap, occ_map, t0):
    u, v = op.u, op.v
    if occ_map.get(u) is VACANT and occ_map.get(v) is VACANT:
        return [], 0.0
    if occ_map.get(u) is VACANT:
        u, v = v, u  # u = mover side, v = vacant side
    if occ_map.get(v) is not VACANT:
        raise UnrealizableOp(f"swap ({op.u},{op.v}) has no vacant endpoint")
    mover = occ_map[u]
    e = edge_key(op.u, op.v)
    kind = res.inter_edge_kind.get(e)
    if kind is None:
        return _ring_edge_motion(res, u, v, mover, t0)
    if isinstance(kind, RadialCorridor):
        return _radial_motion(res, occ_map, kind, u, v, mover, t0)
    if isinstance(kind, (GapCorridor, PathCorridor)):
        return _corridor_motion(res, occ_map, u, v, mover, t0)
    raise UnrealizableOp(f"edge ({u},{v}) has unknown kind {kind!r}")


def _ring_edge_motion(res, u, v, mover, t0):
    """Slide one agent along the ring arc into the adjacent vacant slot."""
    lis = res.graph.loops_containing_edge(u, v)
    if not lis:
        raise UnrealizableOp(f"edge ({u},{v}) not on any loop")
    li = lis[0]
    circle, ring = res.loop_layer[li]
    cyc = res.graph.loops[li]
    m = len(cyc)
    pu, pv = cyc.index(u), cyc.index(v)
    au = res.angle_in(u, circle, ring)
    av = res.angle_in(v, circle, ring)
    if (pu + 1) % m == pv:
        dlt = (av - au) % (2 * math.pi)
    else:
        dlt = -((au - av) % (2 * math.pi))
    rad = 2.0 * res.r * ring
    dur = abs(dlt) * rad / SPEED
    center = res.circles[circle].center
    return [MotionSegment(mover, t0, t0 + dur, Arc(center, rad, au, au + dlt))], dur


def _radial_motion(res, occ_map, kind: RadialCorridor, u, v, mover, t0):
    """Align the vacant ring under the mover, move radially, rotate back."""
    circle = kind.circle
    ring_u = _ring_on_circle(res, u, circle)
    ring_v = _ring_on_circle(res, v, circle)
    li_v = res.loop_index_of(circle, ring_v)
    ang_u = res.angle_in(u, circle, ring_u)
    ang_v = res.angle_in(v, circle, ring_v)
    delta = _signed_short(ang_u - ang_v)
    segs = []
    t = t0
    riders = _ring_riders(res, occ_map, li_v, delta)
    p, d = _arc_phase(res, li_v, t, riders)
    segs += p
    t += d
    a = _slot_point(res, circle, ring_u, ang_u)
    b = _slot_point(res, circle, ring_v, ang_u)
    d = dist(a, b) / SPEED
    segs.append(MotionSegment(mover, t, t + d, Line(a, b)))
    t += d
    back = [(agent, a0 + delta, -delta) for agent, a0, _ in riders]
    back.append((mover, ang_u, -delta))
    p, d = _arc_phase(res, li_v, t, back)
    segs += p
    t += d
    return segs, t - t0


def _ring_on_circle(res, vid, circle):
    for c, k, _ in res.vertex_rings[vid]:
        if c == circle:
            return k
    raise UnrealizableOp(f"vertex {vid} not on circle {circle}")


def _corridor_motion(res, occ_map, u, v, mover, t0):
    """Send the mover alone through a gap or skeleton-path corridor.

    Connector endpoints are reserved port slots (or wedge-boundary slots for
    gap crossings), so the straight legs clear every parked agent; nobody
    else has to move.
    """
    route = corridor_polyline(res, edge_key(u, v))
    if route is None:
        raise UnrealizableOp(f"edge ({u},{v}) has no corridor route")
    (ru, rv), polyline = route
    if ru != u:
        polyline = list(reversed(polyline))
    segs = []
    t = t0
    for a, b in zip(polyline, polyline[1:]):
        d = dist(a, b) / SPEED
        if d > 0:
            segs.append(MotionSegment(mover, t, t + d, Line(a, b)))
            t += d
    return segs, t - t0


def _with_holds(res, occ_map, segs, dur):
    """Fill every agent's timeline with holds so [0, dur] is tiled."""
    by_agent: dict[object, list[MotionSegment]] = {}
    for s in segs:
        by_agent.setdefault(s.agent, []).append(s)
    out = []
    pos = _positions_of(res, occ_map)
    for agent, p in pos.items():
        mine = sorted(by_agent.get(agent, []), key=lambda s: s.t0)
        t = 0.0
        cur = p
        for s in mine:
            if s.t0 > t:
                out.append(MotionSegment(agent, t, s.t0, Hold(cur)))
            out.append(s)
            t = s.t1
            cur = s.end_position()
        if t < dur or not mine:
            out.append(MotionSegment(agent, t, max(dur, t), Hold(cur)))
    return out


def _positions_of(res, occ_map) -> dict[object, Point2]:
    return {
        a: res.graph.positions[v] for v, a in occ_map.items() if a is not VACANT
    }


def realize_plan(res: ConversionResult, plan: Plan) -> TrajectorySet:
    """Realize all plan ops strictly in sequence from the start occupancy."""
    occ = plan.start.copy()
    per_agent: dict[object, list[MotionSegment]] = {
        a: [] for a in occ.agents()
    }
    cursor: dict[object, Point2] = {}
    for v, a in occ.mapping.items():
        if a is not VACANT:
            cursor[a] = res.graph.positions[v]
    t = 0.0
    from .planner import _apply_inplace

    for op in plan.ops:
        if isinstance(op, LoopRotation):
            segs, dur = _type1_motion(res, op, occ.mapping, t)
        else:
            segs, dur = _type2_motion(res, op, occ.mapping, t)
        for s in sorted(segs, key=lambda s: (repr(s.agent), s.t0)):
            prev_t = per_agent[s.agent][-1].t1 if per_agent[s.agent] else 0.0
            if s.t0 > prev_t:
                per_agent[s.agent].append(
                    MotionSegment(s.agent, prev_t, s.t0, Hold(cursor[s.agent]))
                )
            per_agent[s.agent].append(s)
            cursor[s.agent] = s.end_position()
        t += dur
        _apply_inplace(occ.mapping, res.graph, op)
    for a, segs in per_agent.items():
        last = segs[-1].t1 if segs else 0.0
        if last < t or not segs:
            per_agent[a].append(MotionSegment(a, last, t, Hold(cursor[a])))
    # exact endpoint check against the final occupancy
    for v, a in occ.mapping.items():
        if a is VACANT:
            continue
        end = per_agent[a][-1].end_position()
        tgt = res.graph.positions[v]
        if dist(end, tgt) > 1e-6 * res.r:
            raise UnrealizableOp(
                f"agent {a!r} ends {dist(end, tgt):.2e} away from its vertex"
            )
        if end != tgt:
            per_agent[a][-1] = MotionSegment(
                a, per_agent[a][-1].t0, per_agent[a][-1].t1, _snap(per_agent[a][-1].path, tgt)
            )
    return TrajectorySet(segments=per_agent, horizon=t)


def _snap(path: PathShape, tgt: Point2) -> PathShape:
    if isinstance(path, Hold):
        return Hold(tgt)
    if isinstance(path, Line):
        return Line(path.a, tgt)
    return path


@dataclass
class Violation:
    kind: str  # "pair" or "boundary"
    agents: tuple
    t_start: float
    t_end: float
    worst: float


@dataclass
class VerificationReport:
    min_pairwise: float
    min_clearance: float
    violations: list[Violation]
    samples: int
    dt: float

    @property
    def ok(self) -> bool:
        return not self.violations


class _PackedTrack:
    """Segment list of one agent packed into arrays for fast sampling."""

    def __init__(self, segs: list[MotionSegment]):
        n = len(segs)
        self.t0 = np.array([s.t0 for s in segs])
        self.t1 = np.array([s.t1 for s in segs])
        self.code = np.zeros(n, dtype=np.int8)
        self.par = np.zeros((n, 5))
        for k, s in enumerate(segs):
            p = s.path
            if isinstance(p, Hold):
                self.par[k, :2] = (p.p.x, p.p.y)
            elif isinstance(p, Line):
                self.code[k] = 1
                self.par[k, :4] = (p.a.x, p.a.y, p.b.x, p.b.y)
            else:
                self.code[k] = 2
                self.par[k] = (p.center.x, p.center.y, p.radius, p.angle0, p.angle1)

    def sample(self, times: np.ndarray) -> np.ndarray:
        idx = np.clip(
            np.searchsorted(self.t0, times, side="right") - 1, 0, len(self.t0) - 1
        )
        t0 = self.t0[idx]
        dur = self.t1[idx] - t0
        frac = np.where(dur > 0, np.clip((times - t0) / np.where(dur > 0, dur, 1.0), 0.0, 1.0), 1.0)
        par = self.par[idx]
        code = self.code[idx]
        out = np.empty((len(times), 2))
        m = code == 0
        out[m] = par[m, :2]
        m = code == 1
        if m.any():
            out[m, 0] = par[m, 0] + frac[m] * (par[m, 2] - par[m, 0])
            out[m, 1] = par[m, 1] + frac[m] * (par[m, 3] - par[m, 1])
        m = code == 2
        if m.any():
            ang = par[m, 3] + frac[m] * (par[m, 4] - par[m, 3])
            out[m, 0] = par[m, 0] + par[m, 2] * np.cos(ang)
            out[m, 1] = par[m, 1] + par[m, 2] * np.sin(ang)
        return out


def verify_trajectories(
    ts: TrajectorySet, w: Workspace, r: float, dt: float
) -> VerificationReport:
    """Independent sampling oracle for agent-agent and boundary safety.

    Positions are sampled every `dt`; a pair violates when center distance
    drops below 2r - 1e-6 r, an agent violates the boundary when its disk
    leaves the free space by more than the same tolerance. Pairs of agents
    that both stand still during a chunk are checked once per chunk.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    agents = ts.agents()
    n = len(agents)
    tol = 1e-6 * r
    horizon = ts.horizon
    times = np.arange(0.0, horizon + 0.5 * dt, dt)
    if len(times) == 0 or times[-1] < horizon:
        times = np.append(times, horizon)
    min_pair = math.inf
    min_clear = math.inf
    pair_bad: dict[tuple, list[int]] = {}
    bound_bad: dict[object, list[int]] = {}
    pair_worst: dict[tuple, float] = {}
    bound_worst: dict[object, float] = {}
    tracks = {a: _PackedTrack(ts.segments[a]) for a in agents}
    # sample in large blocks; scan in chunks spanning a few ops so the
    # per-chunk mover set stays small (ops are strictly sequential)
    chunk = max(16, int(round(10.0 / dt)))
    block = chunk * max(64, -(-4096 // chunk))
    lim2 = (2 * r - tol) ** 2
    P_block = None
    block_lo = -1
    for lo in range(0, len(times), chunk):
        if P_block is None or lo >= block_lo + block:
            block_lo = lo
            bt = times[lo : lo + block]
            P_block = np.stack([tracks[a].sample(bt) for a in agents], axis=1)
        tt = times[lo : lo + chunk]
        P = P_block[lo - block_lo : lo - block_lo + len(tt)]
        # (t, n, 2)
        moved = np.ptp(P, axis=0).max(axis=1) > 0.0 if len(tt) > 1 else np.ones(n, bool)
        movers = np.nonzero(moved)[0]
        statics = np.nonzero(~moved)[0]
        if len(statics) > 1:
            S = P[0, statics]
            dx = S[:, None, 0] - S[None, :, 0]
            dy = S[:, None, 1] - S[None, :, 1]
            d2 = dx * dx + dy * dy
            iu = np.triu_indices(len(statics), 1)
            dv = d2[iu]
            if len(dv):
                min_pair = min(min_pair, math.sqrt(float(dv.min())))
                for b in np.nonzero(dv < lim2)[0]:
                    i, j = statics[iu[0][b]], statics[iu[1][b]]
                    key = (agents[i], agents[j])
                    pair_bad.setdefault(key, []).extend(range(lo, lo + len(tt)))
                    pair_worst[key] = min(
                        pair_worst.get(key, math.inf), math.sqrt(float(dv[b]))
                    )
        if len(movers):
            Q = P[:, movers]  # (t, m, 2)
            dx = Q[:, :, None, 0] - P[:, None, :, 0]
            dy = Q[:, :, None, 1] - P[:, None, :, 1]
            d2 = dx * dx + dy * dy
            for mi, gi in enumerate(movers):
                d2[:, mi, gi] = np.inf
            dmin = d2.min(axis=2)
            min_pair = min(min_pair, math.sqrt(float(dmin.min())))
            for bt_, bm in zip(*np.nonzero(dmin < lim2)):
                gj = int(np.argmin(d2[bt_, bm]))
                key = tuple(sorted((agents[movers[bm]], agents[gj]), key=repr))
                pair_bad.setdefault(key, []).append(lo + int(bt_))
                pair_worst[key] = min(
                    pair_worst.get(key, math.inf), math.sqrt(float(dmin[bt_, bm]))
                )
            flat = Q.reshape(-1, 2)
            cl = boundary_distance_many(flat, w).reshape(len(tt), len(movers))
            min_clear = min(min_clear, float(cl.min())) if cl.size else min_clear
            for bt_, bm in zip(*np.nonzero(cl < r - tol)):
                a = agents[movers[bm]]
                bound_bad.setdefault(a, []).append(lo + int(bt_))
                bound_worst[a] = min(bound_worst.get(a, math.inf), float(cl[bt_, bm]))
        if len(statics):
            cl = boundary_distance_many(P[0, statics], w)
            min_clear = min(min_clear, float(cl.min()))
            for k in np.nonzero(cl < r - tol)[0]:
                a = agents[statics[k]]
                bound_bad.setdefault(a, []).extend(range(lo, lo + len(tt)))
                bound_worst[a] = min(bound_worst.get(a, math.inf), float(cl[k]))
    violations = []
    for key, idxs in sorted(pair_bad.items(), key=lambda kv: repr(kv[0])):
        for t0, t1 in _merge_runs(sorted(set(idxs)), times):
            violations.append(Violation("pair", key, t0, t1, pair_worst[key]))
    for a, idxs in sorted(bound_bad.items(), key=lambda kv: repr(kv[0])):
        for t0, t1 in _merge_runs(sorted(set(idxs)), times):
            violations.append(Violation("boundary", (a,), t0, t1, bound_worst[a]))
    return VerificationReport(
        min_pairwise=min_pair,
        min_clearance=min_clear,
        violations=violations,
        samples=len(times),
        dt=dt,
    )


def _merge_runs(idxs: list[int], times: np.ndarray):
    out = []
    if not idxs:
        return out
    start = prev = idxs[0]
    for i in idxs[1:]:
        if i == prev + 1:
            prev = i
            continue
        out.append((float(times[start]), float(times[prev])))
        start = prev = i
    out.append((float(times[start]), float(times[prev])))
    return out
