"""Constructive discrete planner: loop rotations, vacancy swaps, exchanges.

Two operation kinds rearrange agents on a swap graph: rotating every agent
of one loop along its cycle, and swapping an agent with the adjacent vacant
vertex. Pairwise exchanges that restore every other vertex (including the
vacancy) are built from small verified op patterns:

* parked core: with the vacancy parked just outside a loop, two consecutive
  slots of that loop are swapped in 6 ops (rotate, 3 vacancy swaps through
  the portal edge, rotate back),
* cross core: two endpoints of a loop-to-loop edge are swapped in 5 ops with
  the vacancy staged on a cycle neighbor,
* bubble chains of parked cores handle arbitrary same-loop pairs, and
* a conjugation chain along a shortest path handles arbitrary pairs.

A full permutation plan moves the vacancy to the one vertex nobody targets,
then realizes each permutation cycle as a chain of exchanges, giving the
quadratic worst-case op bound.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import inf as math_inf
from typing import Optional, Union

from .errors import AssignmentMismatch, IllegalOp, PlannerError
from .swap_graph import VACANT, Occupancy, SwapGraph, edge_key

_MAX_RESTAGE_DEPTH = 8


@dataclass(frozen=True)
class LoopRotation:
    """Cyclic shift of all agents in one loop by `steps` slots."""

    loop: int
    steps: int


@dataclass(frozen=True)
class VacancySwap:
    """Exchange along one edge; one endpoint must be vacant."""

    u: int
    v: int

    @property
    def edge(self) -> tuple[int, int]:
        return edge_key(self.u, self.v)


SwapOp = Union[LoopRotation, VacancySwap]


@dataclass
class Plan:
    ops: list[SwapOp]
    start: Occupancy
    goal: Occupancy


def apply_op(occ: Occupancy, g: SwapGraph, op: SwapOp) -> Occupancy:
    """Apply one operation, returning the new occupancy."""
    new = occ.copy()
    _apply_inplace(new.mapping, g, op)
    return new


def _apply_inplace(mapping: dict, g: SwapGraph, op: SwapOp):
    if isinstance(op, LoopRotation):
        if not 0 <= op.loop < g.K:
            raise IllegalOp(f"no loop {op.loop}")
        cyc = g.loops[op.loop]
        m = len(cyc)
        k = op.steps % m
        if k == 0:
            return
        old = [mapping[v] for v in cyc]
        for p in range(m):
            mapping[cyc[(p + k) % m]] = old[p]
    elif isinstance(op, VacancySwap):
        if not g.has_edge(op.u, op.v):
            raise IllegalOp(f"edge ({op.u},{op.v}) not in graph")
        if mapping[op.u] is not VACANT and mapping[op.v] is not VACANT:
            raise IllegalOp(f"swap ({op.u},{op.v}): neither endpoint vacant")
        mapping[op.u], mapping[op.v] = mapping[op.v], mapping[op.u]
    else:
        raise IllegalOp(f"unknown op {op!r}")


def apply_ops(occ: Occupancy, g: SwapGraph, ops) -> Occupancy:
    cur = occ.copy()
    for op in ops:
        _apply_inplace(cur.mapping, g, op)
    return cur


def reverse_ops(ops) -> list[SwapOp]:
    """Ops undoing a sequence: rotations negated, swaps repeated, reversed."""
    out = []
    for op in reversed(list(ops)):
        if isinstance(op, LoopRotation):
            out.append(LoopRotation(op.loop, -op.steps))
        else:
            out.append(op)
    return out


@dataclass(frozen=True)
class _Phantom:
    """Internal stand-in for a surplus vacancy treated as an inert agent."""

    k: int


class _Machine:
    """Builds op sequences against a live occupancy with legality checks.

    Internally every vacancy except one designated hole is relabeled as a
    phantom agent, so all routines can assume a unique hole. Emitted ops stay
    legal on the real occupancy because phantom vertices really are vacant.
    """

    def __init__(self, g: SwapGraph, occ: Occupancy, edge_cost=None):
        self.g = g
        self.edge_cost = edge_cost or {}
        occ.check(g)
        vacants = occ.vacant_vertices()
        if not vacants:
            raise PlannerError("occupancy has no vacancy")
        self.hole = vacants[0]
        self.state: dict[int, object] = {}
        self.pos: dict[object, int] = {}
        for k, v in enumerate(vacants[1:]):
            self.state[v] = _Phantom(k)
        for v, a in occ.mapping.items():
            if a is not VACANT:
                self.state[v] = a
        self.state[self.hole] = None
        for v, c in self.state.items():
            if c is not None:
                self.pos[c] = v
        self.ops: list[SwapOp] = []

    # --- primitive emission ----------------------------------------------

    def rot(self, li: int, steps: int):
        cyc = self.g.loops[li]
        m = len(cyc)
        k = steps % m
        if k == 0:
            return
        if k > m - k:
            k -= m
        old = [self.state[v] for v in cyc]
        for p in range(m):
            c = old[p]
            tgt = cyc[(p + k) % m]
            self.state[tgt] = c
            if c is None:
                self.hole = tgt
            else:
                self.pos[c] = tgt
        self.ops.append(LoopRotation(li, k))

    def swap(self, u: int, v: int):
        if not self.g.has_edge(u, v):
            raise PlannerError(f"machine swap on non-edge ({u},{v})")
        if self.hole not in (u, v):
            raise PlannerError(f"machine swap ({u},{v}) without the hole")
        cu, cv = self.state[u], self.state[v]
        self.state[u], self.state[v] = cv, cu
        for c, tgt in ((cu, v), (cv, u)):
            if c is None:
                self.hole = tgt
            else:
                self.pos[c] = tgt
        self.ops.append(VacancySwap(u, v))

    def walk(self, path: list[int]):
        for a, b in zip(path, path[1:]):
            self.swap(a, b)

    def emit_reverse(self, ops: list[SwapOp]):
        for op in reverse_ops(ops):
            if isinstance(op, LoopRotation):
                self.rot(op.loop, op.steps)
            else:
                self.swap(op.u, op.v)

    def tail(self, mark: int) -> list[SwapOp]:
        return self.ops[mark:]

    # --- hole routing ------------------------------------------------------

    def cost(self, u: int, v: int) -> float:
        return self.edge_cost.get(edge_key(u, v), 1.0)

    def hole_path(self, targets, avoid=frozenset()) -> Optional[list[int]]:
        """Cheapest hole walk to any target vertex, skipping `avoid`."""
        targets = set(targets)
        if self.hole in targets:
            return [self.hole]
        if not targets:
            return None
        dists = self._walk_distances(targets, avoid=avoid)
        if not dists:
            return None
        best = min(dists, key=lambda w: (dists[w][0], w))
        return dists[best][1]

    # --- parked core and friends -------------------------------------------

    def ring_portals(self, li: int) -> list[tuple[int, int]]:
        ring = set(self.g.loops[li])
        out = []
        for u in self.g.loops[li]:
            for w in self.g.neighbors(u):
                if w not in ring:
                    out.append((u, w))
        return out

    def park_hole(self, li: int, near: int | None = None) -> tuple[int, int, list[SwapOp]]:
        """Move the hole to a seat just outside loop li; returns (u, w, ops).

        `near` is a preferred ring vertex: portals close to it are favored so
        the core's alignment rotations stay short.
        """
        g = self.g
        ring = set(g.loops[li])
        cyc = g.loops[li]
        m = len(cyc)
        mark = len(self.ops)

        def ring_gap(u, v):
            d = (cyc.index(u) - cyc.index(v)) % m
            return min(d, m - d)

        if self.hole in ring:
            portals = self.ring_portals(li)
            if not portals:
                raise PlannerError(f"loop {li} has no edge leaving it")

            def rot_cost(portal):
                # the park rotation drags the ring contents along, so portal
                # choice does not change the later core alignment; the cost is
                # the rotation to reach the portal plus the portal edge itself
                # (crossed multiple times by the core)
                return (ring_gap(portal[0], self.hole) + 4 * self.cost(*portal), portal)

            u, w = min(portals, key=rot_cost)
            self.rot(li, cyc.index(u) - cyc.index(self.hole))
            self.swap(u, w)
        else:
            # walk through the complement of the ring to a seat bordering it
            seats: dict[int, int] = {}
            for u in cyc:
                for w in g.neighbors(u):
                    if w not in ring:
                        if w not in seats or ring_gap(u, near or cyc[0]) < ring_gap(
                            seats[w], near or cyc[0]
                        ):
                            seats[w] = u
            dists = self._walk_distances(set(seats), avoid=ring)
            if not dists:
                raise PlannerError(f"hole cannot reach loop {li} from outside")

            def seat_cost(w):
                cost = dists[w][0] + 4 * self.cost(seats[w], w)
                if near is not None:
                    cost += 2 * ring_gap(seats[w], near)
                return (cost, w)

            w = min(dists, key=seat_cost)
            self.walk(dists[w][1])
            u = seats[w]
        return u, w, self.tail(mark)

    def _walk_distances(self, targets: set, avoid=frozenset()):
        """Cheapest walk paths from the hole to each reachable target vertex.

        Edge costs from `edge_cost` capture realization expense, so routing
        prefers short ring steps over long connector corridors.
        """
        import heapq

        prev: dict[int, Optional[int]] = {}
        best = {self.hole: 0.0}
        heap = [(0.0, self.hole)]
        found: dict[int, tuple[float, list[int]]] = {}
        while heap:
            d, u = heapq.heappop(heap)
            if d > best.get(u, math_inf):
                continue
            if u in targets and u not in found:
                path = [u]
                while path[-1] != self.hole:
                    path.append(prev[path[-1]])
                path.reverse()
                found[u] = (d, path)
                if len(found) == len(targets):
                    break
                continue
            if u in avoid and u != self.hole:
                continue
            for v in self.g.neighbors(u):
                if v in avoid and v not in targets:
                    continue
                nd = d + self.cost(u, v)
                if nd < best.get(v, math_inf):
                    best[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        return found

    def core_consecutive(self, li: int, u: int, w: int, p: int):
        """Swap contents of cycle slots (p, p+1) with the hole parked at w."""
        cyc = self.g.loops[li]
        m = len(cyc)
        a0 = cyc.index(u)
        d = (p - a0) % m
        self.rot(li, -d)
        nxt = cyc[(a0 + 1) % m]
        self.swap(u, w)
        self.swap(u, nxt)
        self.rot(li, -1)
        self.swap(u, w)
        self.rot(li, d + 1)

    def bubble(self, li: int, u: int, w: int, pa: int, pb: int):
        """Swap contents of cycle slots pa, pb via consecutive parked cores."""
        cyc = self.g.loops[li]
        m = len(cyc)
        gap_fwd = (pb - pa) % m
        if gap_fwd <= m - gap_fwd:
            step, gap = 1, gap_fwd
        else:
            step, gap = -1, m - gap_fwd
        pairs = []
        for k in range(gap):
            s = (pa + step * k) % m
            pairs.append(s if step == 1 else (s - 1) % m)
        chain = pairs + pairs[-2::-1]
        for p in chain:
            self.core_consecutive(li, u, w, p)


def _exchange_vertices(m: _Machine, u: int, v: int, depth: int = 0):
    """Swap contents of vertices u, v, restoring every other vertex."""
    if depth > _MAX_RESTAGE_DEPTH:
        raise PlannerError("exchange restaging exceeded depth bound")
    if u == v:
        return
    g = m.g
    if m.hole in (u, v):
        if g.has_edge(u, v):
            m.swap(u, v)
            return
        raise PlannerError("non-adjacent exchange with the vacancy")
    common = g.common_loops(u, v)
    consec = [li for li in g.loops_containing_edge(u, v) if li in common]
    if consec:
        _ring_pair_exchange(m, consec[0], u, v)
    elif common:
        _ring_pair_exchange(m, common[0], u, v)
    elif g.has_edge(u, v):
        _cross_exchange(m, u, v, depth)
    else:
        _chain_exchange(m, u, v, depth)


def _ring_pair_exchange(m: _Machine, li: int, u: int, v: int):
    cu, cv = m.state[u], m.state[v]
    pu, pw, park = m.park_hole(li, near=u)
    cyc = m.g.loops[li]
    pa, pb = cyc.index(m.pos[cu]), cyc.index(m.pos[cv])
    if (pb - pa) % len(cyc) == 1:
        m.core_consecutive(li, pu, pw, pa)
    elif (pa - pb) % len(cyc) == 1:
        m.core_consecutive(li, pu, pw, pb)
    else:
        m.bubble(li, pu, pw, pa, pb)
    m.emit_reverse(park)


def _cross_exchange(m: _Machine, u: int, v: int, depth: int):
    """Swap across a loop-to-loop edge, staging the hole on a cycle neighbor."""
    g = m.g
    cu, cv = m.state[u], m.state[v]
    cands = {}
    for anchor, other in ((u, v), (v, u)):
        for li in g.loops_of(anchor):
            cyc = g.loops[li]
            k = cyc.index(anchor)
            for sigma in (1, -1):
                n = cyc[(k + sigma) % len(cyc)]
                if n not in (u, v):
                    cands.setdefault(n, (anchor, other, li, sigma))
    path = m.hole_path(cands.keys(), avoid={u, v})
    if path is None:
        # rare: the pair separates the hole from every staging seat (both
        # endpoints are connector hubs). Rotate each endpoint's ring so its
        # content steps off the walk path, walk the hole straight through to
        # a seat, redo the exchange on the shifted homes, and unwind.
        path = m.hole_path(cands.keys())
        if path is None:
            raise PlannerError("no staging seat for cross exchange")
        mark = len(m.ops)
        for p in (u, v):
            if p not in path[1:]:
                continue
            li = g.loops_of(p)[0]
            cyc = g.loops[li]
            pos = cyc.index(p)
            on_path = set(path)
            for k in range(1, len(cyc)):
                for signed in (k, -k):
                    if cyc[(pos + signed) % len(cyc)] not in on_path:
                        m.rot(li, signed)
                        break
                else:
                    continue
                break
            else:
                raise PlannerError("cannot shield cross-exchange content")
        m.walk(path)
        shield = m.tail(mark)
        _exchange_vertices(m, m.pos[cu], m.pos[cv], depth + 1)
        m.emit_reverse(shield)
        return
    mark = len(m.ops)
    m.walk(path)
    staged = m.tail(mark)
    anchor, other, li, sigma = cands[path[-1]]
    m.swap(anchor, path[-1])
    m.swap(anchor, other)
    m.rot(li, -sigma)
    m.swap(anchor, other)
    m.rot(li, sigma)
    m.emit_reverse(staged)


def _chain_exchange(m: _Machine, u: int, v: int, depth: int):
    """Swap distant vertices via a chain of directly exchangeable waypoints.

    The shortest path is compressed so each hop is one same-loop exchange or
    one connector-edge exchange; the first hop is exchanged, the rest handled
    recursively with the vacancy advanced along, and the first hop exchanged
    again, which nets out to the endpoint transposition.
    """
    path = _shortest_path(m.g, u, v)
    if path is None:
        raise PlannerError("graph not connected")
    way = _compress_waypoints(m, path)
    step = way[1]
    _exchange_vertices(m, way[0], step, depth)
    # keep the hole near the moving frontier so later steps stay local
    mark = len(m.ops)
    if m.hole not in m.g.neighbors(step) and m.hole != step:
        adv = m.hole_path(
            [x for x in m.g.neighbors(step) if x not in (step, way[-1])],
            avoid={step, way[-1]},
        )
        if adv is not None:
            m.walk(adv)
    advance = m.tail(mark)
    _exchange_vertices(m, step, way[-1], depth)
    m.emit_reverse(advance)
    _exchange_vertices(m, way[0], step, depth)


def _compress_waypoints(m: _Machine, path: list[int]) -> list[int]:
    """Waypoints along a path such that consecutive ones are exchangeable in
    one unit (sharing a loop or an edge); vacancy endpoints stay adjacent."""
    g = m.g
    way = [path[0]]
    k = 0
    n = len(path)
    while k < n - 1:
        if way[-1] == m.hole:
            way.append(path[k + 1])
            k += 1
            continue
        best = k + 1
        j = k + 2
        while j < n:
            if g.common_loops(way[-1], path[j]) or g.has_edge(way[-1], path[j]):
                best = j
                j += 1
            else:
                break
        while (
            path[best] == m.hole
            and best > k + 1
            and not g.has_edge(way[-1], path[best])
        ):
            best -= 1
        way.append(path[best])
        k = best
    return way


def _shortest_path(g: SwapGraph, u: int, v: int) -> Optional[list[int]]:
    if u == v:
        return [u]
    prev = {u: None}
    q = deque([u])
    while q:
        x = q.popleft()
        for w in g.neighbors(x):
            if w in prev:
                continue
            prev[w] = x
            if w == v:
                path = [v]
                while prev[path[-1]] is not None:
                    path.append(prev[path[-1]])
                path.reverse()
                return path
            q.append(w)
    return None


def _run_exchange(
    g: SwapGraph, occ: Occupancy, v: int, v2: int, edge_cost=None
) -> list[SwapOp]:
    occ.check(g)
    if occ.mapping[v] is VACANT or occ.mapping[v2] is VACANT:
        raise PlannerError("exchange endpoints must be occupied")
    m = _Machine(g, occ, edge_cost)
    before = dict(m.state)
    _exchange_vertices(m, v, v2)
    _check_exchange_contract(before, m.state, v, v2)
    return simplify_ops(m.ops, g)


def _check_exchange_contract(before: dict, after: dict, v: int, v2: int):
    for x, c in after.items():
        want = before[x]
        if x == v:
            want = before[v2]
        elif x == v2:
            want = before[v]
        if c != want:
            raise PlannerError(f"exchange contract broken at vertex {x}")


def exchange(
    g: SwapGraph, occ: Occupancy, v: int, v2: int, edge_cost=None
) -> list[SwapOp]:
    """Ops exchanging the agents at v and v2; all other vertices restored."""
    if v == v2:
        return []
    return _run_exchange(g, occ, v, v2, edge_cost)


def exchange_same_loop(g: SwapGraph, occ: Occupancy, v: int, v2: int) -> list[SwapOp]:
    """Exchange two occupied vertices of one loop (restores everything else)."""
    if v == v2:
        return []
    if not g.common_loops(v, v2):
        raise PlannerError("vertices do not share a loop")
    return _run_exchange(g, occ, v, v2)


def exchange_connected_loops(
    g: SwapGraph, occ: Occupancy, v: int, v2: int
) -> list[SwapOp]:
    """Exchange two occupied vertices in connected loops."""
    from .swap_graph import vertex_distance

    if vertex_distance(g, v, v2) != 1:
        raise PlannerError("vertices are not in connected loops")
    return _run_exchange(g, occ, v, v2)


def move_vacancy(g: SwapGraph, occ: Occupancy, target: int) -> list[SwapOp]:
    """Swap chain moving the designated vacancy to `target`."""
    occ.check(g)
    m = _Machine(g, occ)
    if m.hole == target:
        return []
    path = _shortest_path(g, m.hole, target)
    if path is None:
        raise PlannerError("graph not connected")
    m.walk(path)
    return m.ops


def simplify_ops(ops, g: SwapGraph) -> list[SwapOp]:
    """Merge adjacent rotations of one loop and cancel repeated swaps."""
    cur = list(ops)
    while True:
        out: list[SwapOp] = []
        for op in cur:
            if isinstance(op, LoopRotation):
                m = len(g.loops[op.loop])
                k = op.steps % m
                if k > m - k:
                    k -= m
                if k == 0:
                    continue
                if out and isinstance(out[-1], LoopRotation) and out[-1].loop == op.loop:
                    k2 = (out[-1].steps + k) % m
                    if k2 > m - k2:
                        k2 -= m
                    out.pop()
                    if k2 != 0:
                        out.append(LoopRotation(op.loop, k2))
                    continue
                out.append(LoopRotation(op.loop, k))
            else:
                if (
                    out
                    and isinstance(out[-1], VacancySwap)
                    and out[-1].edge == op.edge
                ):
                    out.pop()
                    continue
                out.append(op)
        if len(out) == len(cur):
            return out
        cur = out


def plan_permutation(
    g: SwapGraph, start: Occupancy, goal: Occupancy, edge_cost=None
) -> Plan:
    """Plan reaching `goal` from `start` via exchanges along permutation cycles.

    The vacancy is first routed to the vertex left vacant by the goal, after
    which the remaining rearrangement is a permutation of occupied vertices,
    realized cycle by cycle with pairwise exchanges.
    """
    g.require_valid()
    start.check(g)
    goal.check(g)
    if start.agents() != goal.agents():
        raise AssignmentMismatch(
            f"start agents {sorted(start.agents(), key=repr)} != goal agents "
            f"{sorted(goal.agents(), key=repr)}"
        )
    if not start.vacant_vertices():
        raise AssignmentMismatch("occupancy leaves no vertex vacant")

    m = _Machine(g, start, edge_cost)
    goal_vacants = goal.vacant_vertices()
    goal_hole = goal_vacants[0]
    target_of: dict[object, int] = {}
    for k, vtx in enumerate(goal_vacants[1:]):
        target_of[_Phantom(k)] = vtx
    for vtx, a in goal.mapping.items():
        if a is not VACANT:
            target_of[a] = vtx

    if m.hole != goal_hole:
        path = _shortest_path(g, m.hole, goal_hole)
        if path is None:
            raise PlannerError("graph not connected")
        m.walk(path)

    perm = {}
    for c, tgt in target_of.items():
        cur = m.pos[c]
        if cur != tgt:
            perm[cur] = tgt
    cycles = _permutation_cycles(perm)
    cycles.sort(key=lambda c: (-len(c), c[0]))
    for cyc in cycles:
        for k in range(len(cyc) - 1, 0, -1):
            _exchange_vertices(m, cyc[k], cyc[k - 1])

    for c, tgt in target_of.items():
        if m.pos[c] != tgt:
            raise PlannerError("plan failed to reach the goal occupancy")
    ops = simplify_ops(m.ops, g)
    final = apply_ops(start, g, ops)
    if final.mapping != goal.mapping:
        raise PlannerError("simplified plan does not reach the goal")
    return Plan(ops=ops, start=start.copy(), goal=goal.copy())


def _permutation_cycles(perm: dict[int, int]) -> list[list[int]]:
    seen = set()
    out = []
    for v in sorted(perm):
        if v in seen:
            continue
        cyc = [v]
        seen.add(v)
        nxt = perm[v]
        while nxt != v:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        out.append(cyc)
    return out


def execute(plan: Plan, g: SwapGraph) -> Occupancy:
    """Run a plan from its start occupancy; raises IllegalOp on bad plans."""
    return apply_ops(plan.start, g, plan.ops)
