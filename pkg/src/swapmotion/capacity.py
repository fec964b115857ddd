"""Slot-capacity formulas for concentric agent rings inside inscribed circles.

Ring ``i`` of a circle is the centerline of radius ``2*r*i`` around the circle
center (ring 0 is the degenerate center point). Capacities count agent slots
that keep every pair of agent centers at least ``2r`` apart, with the radial
corridor between consecutive rings kept passable for vacancy swaps.

The closed-form counts are capped at the angular-packing maximum so that every
claimed slot is actually placeable on the centerline; see the packing oracle
in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import CenterContained
from .geometry import Disk

_EPS = 1e-12


class PairClass(Enum):
    CASE_I = "I"  # rings too separated to interact beyond slot loss
    CASE_II = "II"  # disjoint rings with a traversable gap between them
    CASE_III = "III"  # rings cross shallowly: two shared slots, shared edge
    CASE_IV = "IV"  # rings cross deeply: two shared slots, no shared edge
    NESTED = "NESTED"


@dataclass(frozen=True)
class LayerRef:
    circle: Disk
    layer_index: int

    def __post_init__(self):
        if self.layer_index < 0:
            raise ValueError("layer index must be non-negative")


def max_layer_index(circle_radius: float, r: float) -> int:
    """Upper bound on the ring index hosted by a circle of the given radius."""
    if circle_radius <= 0 or r <= 0:
        raise ValueError("radii must be positive")
    return int(math.floor((circle_radius + r) / (2.0 * r) + _EPS))


def safe_layer_count(circle_radius: float, r: float) -> int:
    """Largest ring index whose agents stay inside the circle (2ri + r <= R)."""
    if circle_radius <= 0 or r <= 0:
        raise ValueError("radii must be positive")
    return max(0, int(math.floor((circle_radius - r) / (2.0 * r) + _EPS)))


def slot_pitch(i: int) -> float:
    """Minimum angular spacing between slots on ring i (chord of 2r)."""
    if i < 1:
        raise ValueError("pitch defined for ring index >= 1")
    return 2.0 * math.asin(1.0 / (2.0 * i))


def ring_packing_max(i: int) -> int:
    """Most slots a full ring can hold with pairwise chords >= 2r."""
    return int(math.floor(2.0 * math.pi / slot_pitch(i) + _EPS))


def port_gap(i: int) -> float:
    """Angular clearance each side of a ring's corridor port slot.

    An agent moving radially at the port's angle passes its ring-i flankers
    at perpendicular distance 2ri sin(gap); the gap makes that exactly 2r.
    """
    if i < 1:
        raise ValueError("port gap defined for ring index >= 1")
    return math.asin(1.0 / i)


def loop_capacity(i: int) -> int:
    """Slot count for ring i of an isolated circle.

    Ring 0 holds nothing (a loop needs at least 3 vertices) and ring 1 holds
    the classic 6-around-1 packing. Ring i >= 2 reserves an extra-wide gap
    around one port slot so the radial swap corridor to the ring below stays
    clear of flanking agents: the port plus the packed remainder of the
    circle, capped at the plain angular-packing maximum.
    """
    if i < 0:
        raise ValueError("ring index must be non-negative")
    if i == 0:
        return 0
    if i == 1:
        return 6
    reserved = 2.0 * port_gap(i)
    formula = int(math.floor((2.0 * math.pi - reserved) / slot_pitch(i) + _EPS)) + 2
    return min(formula, ring_packing_max(i))


def classify_pair(a: LayerRef, b: LayerRef, D: float, r: float) -> PairClass:
    """Classify the interaction between ring i of circle a and ring j of b.

    Thresholds are evaluated in order I -> II -> III -> IV; the first that
    holds wins. Requires both circle centers outside the other circle.
    """
    i, j = a.layer_index, b.layer_index
    if i < 1 or j < 1:
        raise ValueError("classification defined for ring indices >= 1")
    max_radius = max(a.circle.radius, b.circle.radius)
    if D < max_radius - _EPS * max(1.0, max_radius):
        raise CenterContained(
            f"center distance {D} smaller than max circle radius {max_radius}"
        )
    t1 = (
        max(
            math.sqrt(i * i - 1.0) + math.sqrt((j + 1.0) ** 2 - 1.0),
            math.sqrt(j * j - 1.0) + math.sqrt((i + 1.0) ** 2 - 1.0),
        )
        * 2.0
        * r
    )
    if D > t1:
        return PairClass.CASE_I
    if D > (2.0 * i + 2.0 * j) * r:
        return PairClass.CASE_II
    if D > (2.0 * i + 2.0 * j - 2.0) * r:
        return PairClass.CASE_III
    return PairClass.CASE_IV


def intersection_capacity(cls: PairClass) -> int:
    """Shared slots hosted by the ring-ring crossing for each class."""
    if cls in (PairClass.CASE_I, PairClass.CASE_II):
        return 0
    if cls in (PairClass.CASE_III, PairClass.CASE_IV):
        return 2
    return 0


def _clamped_acos(x: float) -> float:
    return math.acos(min(1.0, max(-1.0, x)))


def exclusion_half_angle(i: int, D: float, r: float, reach: float) -> float:
    """Half-angle of ring i blotted out by a neighbor of influence `reach`.

    Computed by the triangle relation between the two centers and a ring
    point at distance `reach` from the neighbor center; the argument is
    clamped so boundary geometry stays finite.
    """
    if D <= 0:
        return math.pi
    denom = 2.0 * (2.0 * i * r) * D
    arg = (D * D + (2.0 * i * r) ** 2 - reach * reach) / denom
    return _clamped_acos(arg)


def reduced_capacity(a: LayerRef, b: LayerRef, D: float, r: float, cls: PairClass) -> int:
    """Slots left on ring i of circle a outside the influence of ring j of b.

    Cases I-III share one arc formula; case IV adds the arc that dips inside
    the neighbor ring structure. Results are capped at what the free arc can
    actually pack with 2r spacing.
    """
    i, j = a.layer_index, b.layer_index
    pitch = slot_pitch(i)
    phi = exclusion_half_angle(i, D, r, (2.0 * j + 2.0) * r)
    if phi <= _EPS:
        # no exclusion wedge: the whole ring is free
        return loop_capacity(i)
    free_arc = 2.0 * math.pi - 2.0 * phi
    outer_formula = int(math.floor(free_arc / pitch + _EPS)) + 2
    outer_feasible = int(math.floor(free_arc / pitch + _EPS)) + 1 if free_arc > _EPS else 0
    outer = min(outer_formula, outer_feasible, loop_capacity(i))
    if cls is not PairClass.CASE_IV:
        return outer
    phi_in = exclusion_half_angle(i, D, r, (2.0 * j - 2.0) * r)
    if phi_in <= _EPS:
        inner = 0
    else:
        inner = int(math.floor(2.0 * phi_in / pitch + _EPS)) + 1
    return inner + outer


def neighbor_reach(neighbor_radius: float, r: float) -> float:
    """Distance from a neighbor circle center within which ring slots clash.

    Any point closer than this to the neighbor center is within 2r of one of
    the neighbor's ring centerlines, hence unsafe while that ring rotates.
    """
    return 2.0 * r * (safe_layer_count(neighbor_radius, r) + 1)


def free_intervals(
    center, ring_radius: float, neighbors: list[Disk], r: float
) -> list[tuple[float, float]]:
    """Angular intervals of a ring centerline clear of all neighbor circles.

    Returns a list of (start, end) angle pairs with end > start, measured at
    the ring's own center; an unobstructed ring yields [(0, 2*pi)].
    """
    wedges = []
    for nb in neighbors:
        D = math.hypot(nb.center[0] - center[0], nb.center[1] - center[1])
        reach = neighbor_reach(nb.radius, r)
        denom = 2.0 * ring_radius * D
        if denom <= 0:
            continue
        arg = (D * D + ring_radius * ring_radius - reach * reach) / denom
        if arg >= 1.0:
            continue  # neighbor too far to matter
        axis = math.atan2(nb.center[1] - center[1], nb.center[0] - center[0])
        if arg <= -1.0:
            return []  # whole ring inside the neighbor's influence
        phi = math.acos(arg)
        wedges.append((axis - phi, axis + phi))
    if not wedges:
        return [(0.0, 2.0 * math.pi)]
    return _complement_of_wedges(wedges)


def _complement_of_wedges(wedges: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Complement of angular wedges on the circle, as (start, end) arcs."""
    two_pi = 2.0 * math.pi
    segs = []
    for lo, hi in wedges:
        width = hi - lo
        if width >= two_pi:
            return []
        lo %= two_pi
        segs.append((lo, lo + width))
    segs.sort()
    merged: list[list[float]] = []
    for lo, hi in segs:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    # merge wrap-around overlap
    while len(merged) > 1 and merged[-1][1] >= merged[0][0] + two_pi:
        merged[0][0] = merged[-1][0] - two_pi
        merged[0][1] = max(merged[0][1], merged[-1][1] - two_pi)
        merged.pop()
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= two_pi:
        return []
    free = []
    for k, (lo, hi) in enumerate(merged):
        nxt = merged[(k + 1) % len(merged)][0] + (two_pi if k == len(merged) - 1 else 0.0)
        if nxt - hi > 0.0:
            free.append((hi, nxt))
    return free


def pack_arc(arc: float, pitch: float) -> int:
    """Slots on an inclusive arc with angular spacing >= pitch."""
    if arc < -_EPS:
        return 0
    return int(math.floor(arc / pitch + 1e-9)) + 1


def widen_gaps(intervals: list[tuple[float, float]], pitch: float):
    """Shrink free intervals so every excluded gap between them is >= pitch.

    Interval endpoints host slots; if the cyclic gap between two consecutive
    intervals were narrower than the pitch, the flanking slots would sit
    closer than 2r. Collapsed intervals are dropped.
    """
    two_pi = 2.0 * math.pi
    if not intervals:
        return []
    if len(intervals) == 1 and intervals[0][1] - intervals[0][0] >= two_pi - _EPS:
        return list(intervals)
    ivs = [[lo, hi] for lo, hi in sorted(intervals)]
    n = len(ivs)
    for k in range(n):
        nxt = (k + 1) % n
        gap = ivs[nxt][0] + (two_pi if nxt == 0 else 0.0) - ivs[k][1]
        if gap < pitch:
            need = 0.5 * (pitch - gap)
            ivs[k][1] -= need
            ivs[nxt][0] += need
    return [(lo, hi) for lo, hi in ivs if hi - lo >= -_EPS]


def residual_capacity(a: LayerRef, neighbors: list[Disk], r: float) -> int:
    """Slots left on ring i of circle a against all neighbor circles.

    Tangent positions against each neighbor bound the free gaps; each gap of
    angle theta packs ``floor(theta / pitch) + 1`` slots. With no neighbors
    this equals ``loop_capacity``.
    """
    i = a.layer_index
    if i < 1:
        return 0
    if not neighbors:
        return loop_capacity(i)
    intervals = free_intervals(a.circle.center, 2.0 * r * i, neighbors, r)
    if not intervals:
        return 0
    if len(intervals) == 1 and intervals[0][1] - intervals[0][0] >= 2.0 * math.pi - _EPS:
        return loop_capacity(i)
    pitch = slot_pitch(i)
    intervals = widen_gaps(intervals, pitch)
    return sum(pack_arc(hi - lo, pitch) for lo, hi in intervals)
