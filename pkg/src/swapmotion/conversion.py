"""Build swap graphs from inscribed circles of the free space.

Each accepted circle contributes its concentric agent rings as loops. Ring
slots are packed into the angular intervals left free by neighboring circles,
crossing rings of two circles contribute shared slots at the centerline
intersection points, and three kinds of connector edges are added: radial
corridors between consecutive rings of one circle, gap corridors between the
outermost rings of two nearby circles, and skeleton-path corridors between
far circles. A greedy driver admits sampled circles one at a time, keeping a
tentative circle only when the resulting graph is valid and strictly larger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .capacity import (
    PairClass,
    classify_pair,
    free_intervals,
    LayerRef,
    loop_capacity,
    neighbor_reach,
    pack_arc,
    port_gap,
    widen_gaps,
    safe_layer_count,
    slot_pitch,
)
from .errors import EmptyFreeSpace, PreconditionViolated
from .geometry import (
    Capsule,
    Disk,
    Point2,
    Workspace,
    boundary_distance_many,
    capsule_free,
    circle_circle_intersections,
    dist,
)
from .medial_axis import SkeletonGraph, SkeletonPath, sample_circles, skeleton_path
from .medial_axis import extract_medial_axis
from .swap_graph import SwapGraph, edge_key


@dataclass(frozen=True)
class RadialCorridor:
    """Connector between consecutive rings of one circle."""

    circle: int
    outer_ring: int
    inner_ring: int


@dataclass(frozen=True)
class GapCorridor:
    """Connector across the gap between outermost rings of two circles."""

    circle_a: int
    ring_a: int
    circle_b: int
    ring_b: int


@dataclass(frozen=True)
class PathCorridor:
    """Connector along a skeleton sub-path between two far circles."""

    circle_a: int
    ring_a: int
    circle_b: int
    ring_b: int
    waypoints: tuple[Point2, ...]


EdgeKind = RadialCorridor | GapCorridor | PathCorridor


@dataclass
class ConversionResult:
    graph: SwapGraph
    circles: list[Disk]
    r: float
    loop_layer: list[tuple[int, int]]  # loop index -> (circle index, ring index)
    vertex_rings: dict[int, list[tuple[int, int, float]]]  # vid -> (circle, ring, angle)
    inter_edge_kind: dict[tuple[int, int], EdgeKind]
    ring_ports: dict[tuple[int, int], Optional[int]] = field(default_factory=dict)

    def loop_index_of(self, circle: int, ring: int) -> Optional[int]:
        for li, key in enumerate(self.loop_layer):
            if key == (circle, ring):
                return li
        return None

    def angle_in(self, vid: int, circle: int, ring: int) -> float:
        for c, k, ang in self.vertex_rings[vid]:
            if c == circle and k == ring:
                return ang
        raise KeyError((vid, circle, ring))


def _circle_angle(center: Point2, p: Point2) -> float:
    return math.atan2(p.y - center.y, p.x - center.x)


def _signed_angle(x: float) -> float:
    return (x + math.pi) % (2 * math.pi) - math.pi


def _ring_point(circles, r, circle: int, ring: int, angle: float) -> Point2:
    c = circles[circle].center
    rad = 2.0 * r * ring
    return Point2(c.x + rad * math.cos(angle), c.y + rad * math.sin(angle))


def _mid_waypoints(circles, kind: PathCorridor) -> list[Point2]:
    a = circles[kind.circle_a]
    b = circles[kind.circle_b]
    return [
        p
        for p in kind.waypoints
        if dist(p, a.center) > a.radius and dist(p, b.center) > b.radius
    ]


def _route_points(circles, kind: EdgeKind, pu: Point2, pv: Point2) -> list[Point2]:
    """Mover polyline for a connector edge, from slot pu to slot pv."""
    if isinstance(kind, GapCorridor):
        return [pu, pv]
    if isinstance(kind, PathCorridor):
        return [pu] + _mid_waypoints(circles, kind) + [pv]
    return [pu, pv]


def corridor_polyline(res: "ConversionResult", e: tuple[int, int]):
    """Mover route for a gap or skeleton-path connector edge."""
    kind = res.inter_edge_kind.get(e)
    if kind is None or isinstance(kind, RadialCorridor):
        return None
    u, v = e
    ca = kind.circle_a
    if not any(c == ca for c, _, _ in res.vertex_rings[u]):
        u, v = v, u
    return (u, v), _route_points(
        res.circles, kind, res.graph.positions[u], res.graph.positions[v]
    )


def realization_edge_cost(res: "ConversionResult") -> dict[tuple[int, int], float]:
    """Relative cost of swapping along each connector, in ring-step units.

    Used by the planner to keep vacancy traffic off long corridors."""
    out: dict[tuple[int, int], float] = {}
    for e, kind in res.inter_edge_kind.items():
        if isinstance(kind, RadialCorridor):
            out[e] = max(1.0, float(kind.outer_ring - kind.inner_ring))
        else:
            _, poly = corridor_polyline(res, e)
            length = sum(dist(p, q) for p, q in zip(poly, poly[1:]))
            out[e] = max(1.0, length / (2.0 * res.r))
    return out


def _pairwise_center_check(circles: list[Disk], tol: float) -> bool:
    for a in range(len(circles)):
        for b in range(a + 1, len(circles)):
            D = dist(circles[a].center, circles[b].center)
            if D < max(circles[a].radius, circles[b].radius) - tol:
                return False
    return True


def _triple_intersection_empty(circles: list[Disk], tol: float) -> bool:
    n = len(circles)
    for a in range(n):
        for b in range(a + 1, n):
            pts = circle_circle_intersections(
                circles[a].center, circles[a].radius, circles[b].center, circles[b].radius
            )
            if not pts:
                continue
            for c in range(n):
                if c in (a, b):
                    continue
                for p in pts:
                    if dist(p, circles[c].center) < circles[c].radius - tol:
                        return False
    return True


def assumptions_ok(circles: list[Disk], tol: float = 1e-9) -> bool:
    """Center-outside and empty-triple-overlap assumptions for a circle set."""
    scale = max((c.radius for c in circles), default=1.0)
    return _pairwise_center_check(circles, tol * scale) and _triple_intersection_empty(
        circles, tol * scale
    )


TauProvider = Callable[[int, int], Optional[SkeletonPath]]


def _build(
    circles: list[Disk],
    r: float,
    workspace: Optional[Workspace] = None,
    tau_provider: Optional[TauProvider] = None,
) -> Optional[ConversionResult]:
    """Assemble the swap graph for a fixed circle set; None when invalid."""
    tol = 1e-9 * max([c.radius for c in circles] + [r])
    if not _pairwise_center_check(circles, tol):
        raise PreconditionViolated("a circle center lies inside another circle")
    if not _triple_intersection_empty(circles, tol):
        raise PreconditionViolated("three circles share a common point")

    layer_count = [safe_layer_count(c.radius, r) for c in circles]

    # shared slots where rings of two circles cross (classes III and IV)
    shared: dict[tuple[int, int], list[tuple[int, int, Point2]]] = {}
    linked: set[tuple[int, int]] = set()
    for a in range(len(circles)):
        for b in range(a + 1, len(circles)):
            D = dist(circles[a].center, circles[b].center)
            for i in range(1, layer_count[a] + 1):
                for j in range(1, layer_count[b] + 1):
                    cls = classify_pair(
                        LayerRef(circles[a], i), LayerRef(circles[b], j), D, r
                    )
                    if cls not in (PairClass.CASE_III, PairClass.CASE_IV):
                        continue
                    pts = circle_circle_intersections(
                        circles[a].center, 2 * r * i, circles[b].center, 2 * r * j
                    )
                    if len(pts) != 2:
                        return None
                    shared.setdefault((a, i), []).extend(
                        (b, j, p) for p in sorted(pts)
                    )
                    shared.setdefault((b, j), []).extend(
                        (a, i, p) for p in sorted(pts)
                    )
                    linked.add((a, b))

    # which circle pairs get a gap corridor (outermost rings in the gap class)
    gap_pairs: list[tuple[int, int]] = []
    for a in range(len(circles)):
        for b in range(a + 1, len(circles)):
            if layer_count[a] < 1 or layer_count[b] < 1:
                continue
            D = dist(circles[a].center, circles[b].center)
            cls = classify_pair(
                LayerRef(circles[a], layer_count[a]),
                LayerRef(circles[b], layer_count[b]),
                D,
                r,
            )
            if cls is PairClass.CASE_II:
                gap_pairs.append((a, b))
                linked.add((a, b))

    # skeleton paths for pairs with no direct link; their exits become ports
    taus: dict[tuple[int, int], PathCorridor] = {}
    corridor_ports: dict[tuple[int, int], list[float]] = {}
    if tau_provider is not None:
        for a in range(len(circles)):
            for b in range(a + 1, len(circles)):
                if (a, b) in linked:
                    continue
                if layer_count[a] < 1 or layer_count[b] < 1:
                    continue
                tau = tau_provider(a, b)
                if tau is None:
                    continue
                kind = PathCorridor(
                    a, layer_count[a], b, layer_count[b], tuple(tau.waypoints)
                )
                mid = _mid_waypoints(circles, kind)
                if not mid:
                    continue
                taus[(a, b)] = kind
                corridor_ports.setdefault((a, layer_count[a]), []).append(
                    _circle_angle(circles[a].center, mid[0])
                )
                corridor_ports.setdefault((b, layer_count[b]), []).append(
                    _circle_angle(circles[b].center, mid[-1])
                )

    # slot placement per ring
    positions: dict[int, Point2] = {}
    vertex_rings: dict[int, list[tuple[int, int, float]]] = {}
    ring_members: dict[tuple[int, int], list[int]] = {}
    point_vid: dict[tuple[float, float], int] = {}
    vid = 0

    def add_vertex(p: Point2, circle: int, ring: int) -> int:
        nonlocal vid
        key = (round(p.x, 9), round(p.y, 9))
        if key in point_vid:
            v = point_vid[key]
        else:
            v = vid
            vid += 1
            point_vid[key] = v
            positions[v] = p
            vertex_rings[v] = []
        ang = math.atan2(p.y - circles[circle].center.y, p.x - circles[circle].center.x)
        vertex_rings[v].append((circle, ring, ang % (2 * math.pi)))
        return v

    ring_port: dict[tuple[int, int], Optional[int]] = {}
    port_of_angle: dict[tuple[int, int, float], int] = {}
    for a, c in enumerate(circles):
        others = [circles[x] for x in range(len(circles)) if x != a]
        for i in range(1, layer_count[a] + 1):
            members = []
            for (b, j, p) in shared.get((a, i), []):
                members.append(add_vertex(p, a, i))
            rad = 2.0 * r * i
            if others:
                intervals = widen_gaps(
                    free_intervals(c.center, rad, others, r), slot_pitch(i)
                )
            else:
                intervals = [(0.0, 2.0 * math.pi)]
            angles, port_angle, placed_ports = _ring_layout(
                i, intervals, corridor_ports.get((a, i), ())
            )
            port_vid = None
            for t in angles:
                p = Point2(c.center.x + rad * math.cos(t), c.center.y + rad * math.sin(t))
                v = add_vertex(p, a, i)
                members.append(v)
                if port_angle is not None and t == port_angle:
                    port_vid = v
                if t in placed_ports:
                    port_of_angle[(a, i, placed_ports[t])] = v
            ring_port[(a, i)] = port_vid
            members = sorted(set(members), key=lambda v: _ring_angle(vertex_rings, v, a, i))
            if members:
                ring_members[(a, i)] = members

    # reject rings too small to form a loop
    for key, members in ring_members.items():
        if len(members) < 3:
            return None
    if not ring_members:
        return None

    # collision-freeness of the whole slot set
    pts = np.array([positions[v] for v in sorted(positions)], dtype=float)
    if len(pts) > 1:
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
        np.fill_diagonal(d2, np.inf)
        if d2.min() < (2 * r * (1 - 1e-7)) ** 2:
            return None
    for v in sorted(positions):
        owners = {c for c, _, _ in vertex_rings[v]}
        for x, cx in enumerate(circles):
            if x in owners:
                continue
            if dist(positions[v], cx.center) < neighbor_reach(cx.radius, r) - 1e-7 * r:
                return None
    if workspace is not None and len(pts):
        if (boundary_distance_many(pts, workspace) < r - workspace.tol).any():
            return None

    # loops in angular order; connectors
    loops = []
    loop_layer = []
    for key in sorted(ring_members):
        loops.append(ring_members[key])
        loop_layer.append(key)

    inter_edges: list[tuple[int, int]] = []
    edge_kind: dict[tuple[int, int], EdgeKind] = {}

    def add_inter(u: int, v: int, kind: EdgeKind) -> bool:
        e = edge_key(u, v)
        if e in edge_kind or u == v:
            return False
        inter_edges.append(e)
        edge_kind[e] = kind
        return True

    def route_ok(kind: EdgeKind, u: int, v: int) -> bool:
        route = _route_points(circles, kind, positions[u], positions[v])
        static = [positions[x] for x in sorted(positions) if x not in (u, v)]
        for p, q in zip(route, route[1:]):
            if p == q:
                continue
            if workspace is not None and not capsule_free(Capsule(p, q, r), workspace):
                return False
            for s_ in static:
                if _seg_point(p, q, s_) < 2 * r * (1 - 1e-7):
                    return False
        return True

    # radial corridors between consecutive kept rings, anchored at the outer
    # ring's port slot so the descent clears its flanking agents
    for a in range(len(circles)):
        kept = sorted(i for (x, i) in ring_members if x == a)
        for lo, hi in zip(kept, kept[1:]):
            u = ring_port.get((a, hi))
            if u is None:
                continue
            ang = _ring_angle(vertex_rings, u, a, hi)
            v = min(
                ring_members[(a, lo)],
                key=lambda x: (
                    abs(_signed_angle(_ring_angle(vertex_rings, x, a, lo) - ang)),
                    x,
                ),
            )
            add_inter(u, v, RadialCorridor(a, hi, lo))

    # gap corridors: nearest wedge-boundary slots joined by a straight lens
    # crossing, admitted only when the whole segment clears every other slot
    for a, b in gap_pairs:
        ia = max((i for (x, i) in ring_members if x == a), default=0)
        jb = max((i for (x, i) in ring_members if x == b), default=0)
        if ia < 1 or jb < 1:
            continue
        kind = GapCorridor(a, ia, b, jb)
        u, v = _nearest_pair(positions, ring_members[(a, ia)], ring_members[(b, jb)])
        if route_ok(kind, u, v):
            add_inter(u, v, kind)

    # skeleton-path corridors attach at their reserved ports
    for (a, b), kind in sorted(taus.items()):
        mid = _mid_waypoints(circles, kind)
        ang_a = _circle_angle(circles[a].center, mid[0])
        ang_b = _circle_angle(circles[b].center, mid[-1])
        u = port_of_angle.get((a, kind.ring_a, ang_a))
        v = port_of_angle.get((b, kind.ring_b, ang_b))
        if u is None or v is None:
            continue
        if route_ok(kind, u, v):
            add_inter(u, v, kind)

    graph = SwapGraph(positions=positions, loops=loops, inter_edges=inter_edges)
    if graph.violations():
        return None
    return ConversionResult(
        graph=graph,
        circles=list(circles),
        r=r,
        loop_layer=loop_layer,
        vertex_rings=vertex_rings,
        inter_edge_kind=edge_kind,
        ring_ports={k: v for k, v in ring_port.items() if k in ring_members},
    )


def _seg_point(a: Point2, b: Point2, p: Point2) -> float:
    from .medial_axis import _segment_point_distance

    return _segment_point_distance(a, b, p)


def _ring_layout(
    i: int, intervals, corridor_angles=()
) -> tuple[list[float], Optional[float], dict[float, float]]:
    """Slot angles for ring i within its free intervals.

    Returns (angles, radial_port_angle, placed_corridor_ports) where the last
    maps a placed slot angle to the requested corridor exit angle. Ports are
    slots flanked by an extra-wide gap so a radial departure at their angle
    clears the neighboring agents: every requested corridor exit gets one
    when it fits, and rings >= 2 get one more for the corridor to the ring
    below, placed as far from the other ports as possible.
    """
    pitch = slot_pitch(i)
    g = port_gap(i)
    two_pi = 2.0 * math.pi
    full = len(intervals) == 1 and intervals[0][1] - intervals[0][0] >= two_pi - 1e-12
    if i == 1 and full and not corridor_angles:
        n = loop_capacity(1)
        return [two_pi * k / n for k in range(n)], None, {}
    if full and i >= 2 and not corridor_angles:
        angles = [0.0] + _pack_interval(g, two_pi - g, pitch)
        return angles, 0.0, {}

    ports: list[float] = []
    placed: dict[float, float] = {}

    def fits(base, lo, hi, wrap):
        if any(abs(_signed_angle(base - q)) < 2 * g for q in ports):
            return False
        if wrap:
            return True
        return lo + g <= base <= hi - g

    # corridor ports first: their angles are dictated by the route exits
    for ca in sorted(set(corridor_angles)):
        a_ = ca % two_pi
        if full:
            if fits(a_, 0.0, two_pi, True):
                ports.append(a_)
                placed[a_] = ca
            continue
        done = False
        for lo, hi in intervals:
            for base in (a_, a_ + two_pi, a_ - two_pi):
                if lo + g <= base <= hi - g and fits(base, lo, hi, False):
                    ports.append(base)
                    placed[base] = ca
                    done = True
                    break
            if done:
                break

    # radial port in the largest remaining gap
    radial_port = None
    if i >= 2:
        cands = []
        if full:
            if not ports:
                cands = [0.0]
            else:
                ps = sorted(p % two_pi for p in ports)
                for k, p in enumerate(ps):
                    q = ps[(k + 1) % len(ps)] + (two_pi if k == len(ps) - 1 else 0.0)
                    cands.append((0.5 * (p + q)) % two_pi)
        else:
            for lo, hi in sorted(intervals, key=lambda iv: (-(iv[1] - iv[0]), iv[0])):
                inside = sorted([p for p in ports if lo <= p <= hi])
                edges = [lo] + inside + [hi]
                for a_, b_ in zip(edges, edges[1:]):
                    cands.append(0.5 * (a_ + b_))
        for cand in sorted(
            cands,
            key=lambda x: -min(
                (abs(_signed_angle(x - q)) for q in ports), default=two_pi
            ),
        ):
            if full:
                if fits(cand, 0.0, two_pi, True):
                    radial_port = cand
                    ports.append(cand)
                    break
            else:
                ok = any(lo + g <= cand <= hi - g for lo, hi in intervals)
                if ok and fits(cand, 0.0, 0.0, True):
                    radial_port = cand
                    ports.append(cand)
                    break

    angles: list[float] = []
    if full:
        ps = sorted(p % two_pi for p in ports)
        if not ps:
            n = loop_capacity(i) if i >= 2 else loop_capacity(1)
            return [two_pi * k / n for k in range(n)], None, {}
        angles.extend(ps)
        for k, p in enumerate(ps):
            q = ps[(k + 1) % len(ps)] + (two_pi if k == len(ps) - 1 else 0.0)
            angles.extend(_pack_interval(p + g, q - g, pitch))
        placed = {p % two_pi: ca for p, ca in placed.items()}
        if radial_port is not None:
            radial_port %= two_pi
        return angles, radial_port, placed

    for lo, hi in intervals:
        inside = sorted(
            p for p in ports if lo - 1e-12 <= p <= hi + 1e-12
        )
        angles.extend(inside)
        cur = lo
        for p in inside:
            angles.extend(_pack_interval(cur, p - g, pitch))
            cur = p + g
        angles.extend(_pack_interval(cur, hi, pitch))
    return angles, radial_port, placed


def _pack_interval(lo: float, hi: float, pitch: float) -> list[float]:
    n = pack_arc(hi - lo, pitch)
    if n <= 0:
        return []
    if n == 1:
        return [0.5 * (lo + hi)]
    return [lo + k * (hi - lo) / (n - 1) for k in range(n)]


def _ring_angle(vertex_rings, v: int, circle: int, ring: int) -> float:
    for c, k, ang in vertex_rings[v]:
        if c == circle and k == ring:
            return ang
    raise KeyError((v, circle, ring))


def _nearest_pair(positions, group_a: list[int], group_b: list[int]) -> tuple[int, int]:
    best = None
    for u in group_a:
        for v in group_b:
            d = dist(positions[u], positions[v])
            if best is None or (d, u, v) < best:
                best = (d, u, v)
    return best[1], best[2]


def convert_single_circle(c: Disk, r: float) -> Optional[ConversionResult]:
    """Swap graph hosted by one circle, or None if it cannot hold two rings."""
    if safe_layer_count(c.radius, r) < 2:
        return None
    return _build([c], r)


def convert_two_circles(a: Disk, b: Disk, r: float) -> Optional[ConversionResult]:
    """Swap graph hosted by two circles whose centers lie outside each other."""
    return _build([a, b], r)


def convert_circles(
    circles: list[Disk],
    skeleton: Optional[SkeletonGraph],
    r: float,
    w: Optional[Workspace],
) -> Optional[ConversionResult]:
    """Swap graph for a circle set, with skeleton-path connectors when given."""
    provider = None
    if skeleton is not None and w is not None:
        def provider(ai: int, bi: int) -> Optional[SkeletonPath]:
            return skeleton_path(skeleton, circles[ai], circles[bi], circles, r, w)

    return _build(circles, r, workspace=w, tau_provider=provider)


@dataclass
class _TauCache:
    """Caches skeleton paths per circle pair, revalidating against the set."""

    skeleton: SkeletonGraph
    r: float
    w: Workspace
    store: dict = field(default_factory=dict)

    def provider(self, circles: list[Disk]) -> TauProvider:
        from .medial_axis import _path_clear

        def get(ai: int, bi: int) -> Optional[SkeletonPath]:
            a, b = circles[ai], circles[bi]
            key = (a.center, a.radius, b.center, b.radius)
            others = [c for k, c in enumerate(circles) if k not in (ai, bi)]
            if key in self.store:
                tau = self.store[key]
                if tau is not None and _path_clear(tau, a, b, others, self.r, self.w):
                    return SkeletonPath(tau.waypoints, ai, bi)
            tau = skeleton_path(self.skeleton, a, b, circles, self.r, self.w)
            self.store[key] = tau
            return tau

        return get


def greedy_convert(
    w: Workspace,
    r: float,
    threshold: Optional[int] = None,
    starts: list[Point2] = (),
    *,
    epsilon: Optional[float] = None,
    grid_resolution: Optional[float] = None,
    k_max: int = 64,
) -> ConversionResult:
    """Grow a swap graph circle by circle until no circle adds vertices.

    Sampled circles are tried largest first, after promoting circles that
    contain an agent start position. A tentative circle is kept only when the
    assumptions hold, the resulting graph is valid, and the vertex count
    strictly increases. Stops early once `threshold` vertices are reached.
    """
    eps = epsilon if epsilon is not None else 0.5 * r
    grid = grid_resolution if grid_resolution is not None else 0.5 * r
    limit = threshold if threshold is not None else math.inf
    empty = ConversionResult(
        graph=SwapGraph(positions={}, loops=[], inter_edges=[]),
        circles=[],
        r=r,
        loop_layer=[],
        vertex_rings={},
        inter_edge_kind={},
    )
    try:
        skeleton = extract_medial_axis(w, grid)
    except EmptyFreeSpace:
        return empty
    candidates = sample_circles(skeleton, eps, k_max, r)
    if not candidates:
        return empty

    def contains_start(c: Disk) -> bool:
        return any(dist(c.center, p) <= c.radius for p in starts)

    ordered = [c for c in candidates if contains_start(c)] + [
        c for c in candidates if not contains_start(c)
    ]
    cache = _TauCache(skeleton, r, w)
    chosen: list[Disk] = []
    best = empty
    while best.graph.num_vertices() < limit:
        progressed = False
        for c in ordered:
            if c in chosen:
                continue
            tentative = chosen + [c]
            if not assumptions_ok(tentative):
                continue
            res = _build(
                tentative, r, workspace=w, tau_provider=cache.provider(tentative)
            )
            if res is None or res.graph.num_vertices() <= best.graph.num_vertices():
                continue
            chosen = tentative
            best = res
            progressed = True
            if best.graph.num_vertices() >= limit:
                break
        if not progressed:
            break
    return best
