"""Intersection layout, per-path merging points, and cross-lane coordinate transforms.

The intersection is a four-approach layout with one or two lanes per approach,
labelled l1..l8 counterclockwise (odd = inner/left lane, even = outer/right
lane).  Paths are polylines of axis-aligned straights plus quarter-circle
arcs: right turns use radius ``r`` into the outer exit lane, left turns use
radius ``r + w`` into the inner exit lane.  Merging points (MPs) are located
by numerically intersecting path centerlines (tolerance 1e-9 m).

Conflict registration follows the per-path inventory of the two-lane layout:

* ``cross``      straight x straight grid crossings (16),
* ``leftcross``  left-turn arc x oncoming inner straight (4),
* ``leftleft``   left-turn arcs of adjacent approaches (4),
* ``leftmerge``  left-turn tangency into the inner exit lane (4, listed for
                 the turning path only; the receiving through stream takes
                 over via the rear-end relation after the merge),
* ``rightmerge`` right-turn tangency into the outer exit lane (4, shared
                 with the receiving outer straight).

This yields exactly 32 fixed MPs and the per-path counts: inner straight 5,
left turn 4, outer straight 5, right turn 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

TOL = 1e-9

# Maneuvers
STRAIGHT = "straight"
LEFT = "left"
RIGHT = "right"
MANEUVERS = (STRAIGHT, LEFT, RIGHT)


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class GeometryConfig:
    """Scalar layout parameters; per-approach overrides support asymmetric cases.

    All lengths in meters.  ``approach_overrides`` maps approach index
    (0..3, counterclockwise starting at the eastbound approach) to a dict
    with any of ``L1``, ``L2``, ``L3``.
    """

    L1: float = 300.0
    L2: float = 50.0
    L3: float = 200.0
    l: float = 0.9378
    w: float = 3.5
    r: float = 4.0
    lanes_per_approach: int = 2
    approach_overrides: dict = field(default_factory=dict)

    def segment(self, approach: int) -> tuple[float, float, float]:
        ov = self.approach_overrides.get(approach, {})
        return (
            float(ov.get("L1", self.L1)),
            float(ov.get("L2", self.L2)),
            float(ov.get("L3", self.L3)),
        )

    def validate(self) -> None:
        for name in ("L1", "L2", "L3", "l", "w", "r"):
            if getattr(self, name) <= 0:
                raise GeometryError(f"{name} must be > 0")
        if self.lanes_per_approach not in (1, 2):
            raise GeometryError("lanes_per_approach must be 1 or 2")
        for a in range(4):
            L1, L2, L3 = self.segment(a)
            if min(L1, L2, L3) <= 0:
                raise GeometryError(f"approach {a}: lengths must be > 0")
            if L2 + L3 > L1 + TOL:
                raise GeometryError(
                    f"approach {a}: lane-change zone extends past the "
                    f"intersection boundary (L2+L3={L2 + L3} > L1={L1})"
                )


# ---------------------------------------------------------------------------
# primitive segments

@dataclass(frozen=True)
class Straight:
    p0: tuple[float, float]
    p1: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.p1[0] - self.p0[0], self.p1[1] - self.p0[1])

    def point_at(self, s: float) -> tuple[float, float]:
        t = s / self.length
        return (
            self.p0[0] + t * (self.p1[0] - self.p0[0]),
            self.p0[1] + t * (self.p1[1] - self.p0[1]),
        )

    def arclength_of(self, pt: tuple[float, float]) -> float | None:
        dx, dy = self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]
        L = self.length
        t = ((pt[0] - self.p0[0]) * dx + (pt[1] - self.p0[1]) * dy) / (L * L)
        if -TOL <= t * L and t * L <= L + TOL:
            px, py = self.point_at(min(max(t, 0.0), 1.0) * L)
            if math.hypot(px - pt[0], py - pt[1]) <= 1e-6:
                return min(max(t * L, 0.0), L)
        return None


@dataclass(frozen=True)
class Arc:
    """Circular arc from angle th0 to th1 (radians); ccw iff th1 > th0."""

    center: tuple[float, float]
    radius: float
    th0: float
    th1: float

    @property
    def length(self) -> float:
        return self.radius * abs(self.th1 - self.th0)

    def point_at(self, s: float) -> tuple[float, float]:
        th = self.th0 + math.copysign(s / self.radius, self.th1 - self.th0)
        return (
            self.center[0] + self.radius * math.cos(th),
            self.center[1] + self.radius * math.sin(th),
        )

    def _contains_angle(self, th: float) -> float | None:
        lo, hi = min(self.th0, self.th1), max(self.th0, self.th1)
        for k in (-1, 0, 1):
            cand = th + 2 * math.pi * k
            if lo - TOL <= cand <= hi + TOL:
                return min(max(cand, lo), hi)
        return None

    def arclength_of(self, pt: tuple[float, float]) -> float | None:
        d = math.hypot(pt[0] - self.center[0], pt[1] - self.center[1])
        if abs(d - self.radius) > 1e-6:
            return None
        th = math.atan2(pt[1] - self.center[1], pt[0] - self.center[0])
        cand = self._contains_angle(th)
        if cand is None:
            return None
        return self.radius * abs(cand - self.th0)


def _seg_intersections(s1, s2) -> list[tuple[float, float]]:
    """All points lying on both primitives (within tolerance)."""
    pts: list[tuple[float, float]] = []
    if isinstance(s1, Straight) and isinstance(s2, Straight):
        x1, y1 = s1.p0
        x2, y2 = s1.p1
        x3, y3 = s2.p0
        x4, y4 = s2.p1
        den = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
        if abs(den) > TOL:
            t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / den
            pts = [(x1 + t * (x2 - x1), y1 + t * (y2 - y1))]
    elif isinstance(s1, Straight) and isinstance(s2, Arc):
        dx, dy = s1.p1[0] - s1.p0[0], s1.p1[1] - s1.p0[1]
        L = s1.length
        ux, uy = dx / L, dy / L
        fx, fy = s1.p0[0] - s2.center[0], s1.p0[1] - s2.center[1]
        b = fx * ux + fy * uy
        c = fx * fx + fy * fy - s2.radius**2
        disc = b * b - c
        if disc >= -TOL:
            disc = max(disc, 0.0)
            for t in (-b - math.sqrt(disc), -b + math.sqrt(disc)):
                pts.append((s1.p0[0] + t * ux, s1.p0[1] + t * uy))
    elif isinstance(s1, Arc) and isinstance(s2, Straight):
        return _seg_intersections(s2, s1)
    else:  # arc x arc
        (cx1, cy1), r1 = s1.center, s1.radius
        (cx2, cy2), r2 = s2.center, s2.radius
        d = math.hypot(cx2 - cx1, cy2 - cy1)
        if d > TOL and abs(r1 - r2) - TOL <= d <= r1 + r2 + TOL:
            a = (d * d + r1 * r1 - r2 * r2) / (2 * d)
            h2 = r1 * r1 - a * a
            if h2 >= -TOL:
                h = math.sqrt(max(h2, 0.0))
                mx = cx1 + a * (cx2 - cx1) / d
                my = cy1 + a * (cy2 - cy1) / d
                ox, oy = -(cy2 - cy1) / d, (cx2 - cx1) / d
                pts = [(mx + h * ox, my + h * oy), (mx - h * ox, my - h * oy)]
    out = []
    for p in pts:
        if s1.arclength_of(p) is not None and s2.arclength_of(p) is not None:
            if all(math.hypot(p[0] - q[0], p[1] - q[1]) > 1e-7 for q in out):
                out.append(p)
    return out


# ---------------------------------------------------------------------------
# merging points and paths

@dataclass(frozen=True)
class MergingPoint:
    id: str  # "M<k>" for fixed, "F<cav>" for floating
    position: tuple[float, float]
    kind: str  # cross | leftcross | leftleft | leftmerge | rightmerge | floating

    @property
    def is_floating(self) -> bool:
        return self.kind == "floating"


@dataclass
class PathSpec:
    """One (origin lane, maneuver) route through the control zone.

    ``ordered_mps`` lists (MergingPoint, odometer distance from the origin).
    Distances on lane-change paths include the fixed extra length ``l`` for
    every point past the floating MP, so they are true odometer readings.
    """

    origin_lane: str
    maneuver: str
    changes_lane: bool
    ordered_mps: list[tuple[MergingPoint, float]]
    total_length: float
    approach: int
    corridor_lane: str  # lane identity after the last merge (exit corridor)
    corridor_entry: float  # odometer distance where current_lane flips
    target_lane: str | None = None  # lane merged into by the floating change
    lc_distance: float | None = None  # odometer position of the floating MP
    passthrough: dict[str, float] = field(default_factory=dict)
    segments: list = field(default_factory=list)
    extra_length: float = 0.0  # l if changes_lane else 0

    @property
    def mp_ids(self) -> list[str]:
        return [mp.id for mp, _ in self.ordered_mps]

    def distance_of(self, mp_id: str) -> float | None:
        """Odometer distance at an MP, including unlisted passthrough points."""
        for mp, d in self.ordered_mps:
            if mp.id == mp_id:
                return d
        d = self.passthrough.get(mp_id)
        if d is None:
            return None
        return d + (self.extra_length if self.lc_distance is not None and d > self.lc_distance else 0.0)

    def lane_position_intervals(self) -> list[tuple[str, float, float, float]]:
        """(lane, lane_pos_lo, lane_pos_hi, odometer_offset) of the approach footprint."""
        if not self.changes_lane:
            return [(self.origin_lane, 0.0, self.total_length, 0.0)]
        d = self.lc_distance if self.lc_distance is not None else 0.0
        return [
            (self.origin_lane, 0.0, d, 0.0),
            (self.target_lane, d, self.total_length, self.extra_length),
        ]

    def odometer_at_lane_position(self, lane: str, pos: float) -> float | None:
        for lane_id, lo, hi, off in self.lane_position_intervals():
            if lane_id == lane and lo - TOL <= pos <= hi + TOL:
                return pos + off
        return None

    def with_lane_change_at(self, distance: float, cav_id) -> "PathSpec":
        """Per-CAV clone with the floating MP pinned at ``distance``."""
        if not self.changes_lane:
            raise GeometryError("path has no lane change")
        mps = []
        for mp, d in self.ordered_mps:
            if mp.is_floating:
                mps.append((replace(mp, id=f"F{cav_id}"), distance))
            else:
                mps.append((mp, d))
        return replace(self, ordered_mps=mps, lc_distance=distance)


@dataclass
class LaneInfo:
    id: str
    approach: int
    slot: str  # inner | outer
    offset: float  # signed lateral offset of the centerline in approach frame
    L1: float
    L2: float
    L3: float
    origin: tuple[float, float]
    heading: tuple[float, float]


def _rot(pt: tuple[float, float], times: int) -> tuple[float, float]:
    x, y = pt
    for _ in range(times % 4):
        x, y = -y, x
    return (x, y)


class IntersectionGeometry:
    """Immutable layout: lanes, paths for every (lane, maneuver), fixed MPs."""

    def __init__(self, config: GeometryConfig):
        config.validate()
        self.config = config
        self.lanes: dict[str, LaneInfo] = {}
        self.paths: dict[tuple[str, str], PathSpec] = {}
        self.mps: dict[str, MergingPoint] = {}
        self._build()

    # -- construction ------------------------------------------------------

    def _lane_name(self, approach: int, slot: str) -> str:
        if self.config.lanes_per_approach == 1:
            return f"l{approach + 1}"
        return f"l{2 * approach + 1}" if slot == "inner" else f"l{2 * approach + 2}"

    def _build(self) -> None:
        cfg = self.config
        w, r = cfg.w, cfg.r
        n = cfg.lanes_per_approach
        B = n * w  # half-size of the intersection box
        self._box = B
        inner_off = -w / 2.0
        outer_off = -w / 2.0 if n == 1 else -3.0 * w / 2.0
        R_left = r + w
        R_right = r

        for a in range(4):
            L1, L2, L3 = cfg.segment(a)
            slots = ("inner",) if n == 1 else ("inner", "outer")
            for slot in slots:
                off = inner_off if slot == "inner" else outer_off
                origin = _rot((-(B + L1), off), a)
                heading = _rot((1.0, 0.0), a)
                self.lanes[self._lane_name(a, slot)] = LaneInfo(
                    self._lane_name(a, slot), a, slot, off, L1, L2, L3, origin, heading
                )

        # raw centerline geometry per (approach, slot-or-turn), in approach-0
        # frame then rotated; tail length past the box keeps exits well defined
        tail = 4.0 * w

        def seg_rot(segs, a):
            out = []
            for s in segs:
                if isinstance(s, Straight):
                    out.append(Straight(_rot(s.p0, a), _rot(s.p1, a)))
                else:
                    out.append(
                        Arc(_rot(s.center, a), s.radius, s.th0 + a * math.pi / 2, s.th1 + a * math.pi / 2)
                    )
            return out

        base: dict[tuple[int, str, str], list] = {}
        for a in range(4):
            L1, _, _ = cfg.segment(a)
            x0 = -(B + L1)
            # straights
            slots = ("inner",) if n == 1 else ("inner", "outer")
            for slot in slots:
                off = inner_off if slot == "inner" else outer_off
                base[(a, slot, STRAIGHT)] = seg_rot(
                    [Straight((x0, off), (B + tail, off))], a
                )
            # left turn from the inner lane into the next approach's inner exit
            xs = -inner_off - R_left  # arc start abscissa (tangency on y=inner_off)
            base[(a, "inner", LEFT)] = seg_rot(
                [
                    Straight((x0, inner_off), (xs, inner_off)),
                    Arc((xs, inner_off + R_left), R_left, -math.pi / 2, 0.0),
                    Straight((xs + R_left, inner_off + R_left), (xs + R_left, inner_off + R_left + tail)),
                ],
                a,
            )
            # right turn from the outer lane into the previous approach's outer exit
            xr = outer_off - R_right
            base[(a, "outer" if n == 2 else "inner", RIGHT)] = seg_rot(
                [
                    Straight((x0, outer_off), (xr, outer_off)),
                    Arc((xr, outer_off - R_right), R_right, math.pi / 2, 0.0),
                    Straight((outer_off, outer_off - R_right), (outer_off, outer_off - R_right - tail)),
                ],
                a,
            )
        self._base_segments = base

        self._register_mps(base)
        self._assemble_paths(base)

    @staticmethod
    def _polyline_arclength(segs, pt) -> float | None:
        acc = 0.0
        for s in segs:
            d = s.arclength_of(pt)
            if d is not None:
                return acc + d
            acc += s.length
        return None

    @staticmethod
    def _polyline_length(segs) -> float:
        return sum(s.length for s in segs)

    def _register_mps(self, base) -> None:
        n = self.config.lanes_per_approach
        slots = ("inner",) if n == 1 else ("inner", "outer")
        right_slot = "outer" if n == 2 else "inner"
        found: list[tuple[str, tuple[float, float], list]] = []

        def cross_pts(k1, k2):
            pts = []
            for s1 in base[k1]:
                for s2 in base[k2]:
                    pts.extend(_seg_intersections(s1, s2))
            return pts

        # cross: straights of perpendicular approaches
        for a in (0, 2):
            for b in (1, 3):
                for s1 in slots:
                    for s2 in slots:
                        k1, k2 = (a, s1, STRAIGHT), (b, s2, STRAIGHT)
                        pts = cross_pts(k1, k2)
                        assert len(pts) == 1
                        found.append(("cross", pts[0], [k1, k2]))
        for a in range(4):
            la = (a, "inner", LEFT)
            # leftcross: left arc x oncoming inner straight
            ko = ((a + 2) % 4, "inner", STRAIGHT)
            pts = cross_pts(la, ko)
            pts = [p for p in pts if self._on_arc(base[la], p)]
            assert len(pts) == 1
            found.append(("leftcross", pts[0], [la, ko]))
            # leftleft: adjacent left arcs (register each unordered pair once)
            lb = ((a + 1) % 4, "inner", LEFT)
            pts = [p for p in cross_pts(la, lb) if self._on_arc(base[la], p) and self._on_arc(base[lb], p)]
            assert len(pts) == 1
            found.append(("leftleft", pts[0], [la, lb]))
            # leftmerge: arc end tangency, turning path only
            arc = next(s for s in base[la] if isinstance(s, Arc))
            found.append(("leftmerge", arc.point_at(arc.length), [la]))
            # rightmerge: arc end tangency, shared with the receiving outer straight
            ra = (a, right_slot, RIGHT)
            arc = next(s for s in base[ra] if isinstance(s, Arc))
            krecv = ((a + 3) % 4, right_slot, STRAIGHT)
            found.append(("rightmerge", arc.point_at(arc.length), [ra, krecv]))

        order = {"cross": 0, "leftcross": 1, "leftleft": 2, "leftmerge": 3, "rightmerge": 4}
        found.sort(key=lambda t: (order[t[0]], round(t[1][0], 6), round(t[1][1], 6)))
        self._mp_registry: dict[str, list] = {}
        for i, (kind, pos, keys) in enumerate(found, start=1):
            mp = MergingPoint(f"M{i}", (round(pos[0], 9), round(pos[1], 9)), kind)
            self.mps[mp.id] = mp
            self._mp_registry[mp.id] = keys

    @staticmethod
    def _on_arc(segs, pt) -> bool:
        return any(isinstance(s, Arc) and s.arclength_of(pt) is not None for s in segs)

    def _assemble_paths(self, base) -> None:
        cfg = self.config
        n = cfg.lanes_per_approach
        B = self._box
        right_slot = "outer" if n == 2 else "inner"

        # listed MPs per base key
        listed: dict[tuple, list[tuple[MergingPoint, float]]] = {k: [] for k in base}
        for mp_id, keys in self._mp_registry.items():
            mp = self.mps[mp_id]
            for k in keys:
                d = self._polyline_arclength(base[k], mp.position)
                assert d is not None, (mp_id, k)
                listed[k].append((mp, d))
        for k in listed:
            listed[k].sort(key=lambda t: t[1])

        # passthrough distances: any base path passing within tolerance of any MP
        passthrough: dict[tuple, dict[str, float]] = {k: {} for k in base}
        for k, segs in base.items():
            for mp in self.mps.values():
                d = self._polyline_arclength(segs, mp.position)
                if d is not None:
                    passthrough[k][mp.id] = d

        def box_exit_distance(segs) -> float:
            # arclength where the polyline last leaves the box |x|,|y| <= B
            total, acc = self._polyline_length(segs), 0.0
            last = 0.0
            for s in segs:
                steps = max(int(s.length), 8)
                for i in range(steps + 1):
                    d = s.length * i / steps
                    x, y = s.point_at(d)
                    if max(abs(x), abs(y)) <= B + TOL:
                        last = acc + d
                acc += s.length
            return min(last, total)

        for (a, slot, man), segs in base.items():
            lane = self._lane_name(a, slot)
            mps = listed[(a, slot, man)]
            exit_d = box_exit_distance(segs)
            last_mp = mps[-1][1] if mps else 0.0
            total = max(exit_d, last_mp + cfg.w)
            if man == STRAIGHT:
                corridor, centry = lane, total
            elif man == LEFT:
                corridor = self._lane_name((a + 1) % 4, "inner")
                centry = last_mp  # flips at the leftmerge MP
            else:
                corridor = self._lane_name((a + 3) % 4, right_slot)
                centry = last_mp
            self.paths[(lane, man)] = PathSpec(
                origin_lane=lane,
                maneuver=man,
                changes_lane=False,
                ordered_mps=mps,
                total_length=total,
                approach=a,
                corridor_lane=corridor,
                corridor_entry=centry,
                passthrough=passthrough[(a, slot, man)],
                segments=segs,
            )

        # lane-change variants (two-lane only): floating MP then the target
        # lane's native path, all subsequent odometer distances shifted by +l
        if n == 2:
            for a in range(4):
                inner = self._lane_name(a, "inner")
                outer = self._lane_name(a, "outer")
                for origin, man, target in ((inner, RIGHT, outer), (outer, LEFT, inner)):
                    nat = self.paths[(target, man)]
                    L1, L2, L3 = cfg.segment(a)
                    d0 = L2 + L3  # default floating position; pinned per CAV later
                    fmp = MergingPoint("F?", self._lane_point(target, d0), "floating")
                    mps = [(fmp, d0)] + [(mp, d + cfg.l) for mp, d in nat.ordered_mps]
                    self.paths[(origin, man)] = PathSpec(
                        origin_lane=origin,
                        maneuver=man,
                        changes_lane=True,
                        ordered_mps=mps,
                        total_length=nat.total_length + cfg.l,
                        approach=a,
                        corridor_lane=nat.corridor_lane,
                        corridor_entry=nat.corridor_entry + cfg.l,
                        target_lane=target,
                        lc_distance=d0,
                        passthrough=dict(nat.passthrough),
                        segments=nat.segments,
                        extra_length=cfg.l,
                    )

    def _lane_point(self, lane: str, distance: float) -> tuple[float, float]:
        info = self.lanes[lane]
        ox, oy = info.origin
        hx, hy = info.heading
        return (ox + hx * distance, oy + hy * distance)

    # -- queries -----------------------------------------------------------

    @property
    def fixed_mp_count(self) -> int:
        return len(self.mps)

    def path_for(self, origin_lane: str, maneuver: str) -> PathSpec:
        if origin_lane not in self.lanes:
            raise GeometryError(f"unknown lane {origin_lane!r}")
        if maneuver not in MANEUVERS:
            raise GeometryError(f"unknown maneuver {maneuver!r}")
        try:
            return self.paths[(origin_lane, maneuver)]
        except KeyError:
            raise GeometryError(f"no path for ({origin_lane}, {maneuver})") from None

    def permitted_native(self, lane: str) -> tuple[str, ...]:
        info = self.lanes[lane]
        if self.config.lanes_per_approach == 1:
            return MANEUVERS
        return (STRAIGHT, LEFT) if info.slot == "inner" else (STRAIGHT, RIGHT)

    def adjacent_lane(self, lane: str) -> str | None:
        info = self.lanes[lane]
        if self.config.lanes_per_approach == 1:
            return None
        other = "outer" if info.slot == "inner" else "inner"
        return self._lane_name(info.approach, other)

    def dump(self) -> dict:
        """JSON-ready description of lanes, MPs, and per-path MP distances."""
        return {
            "config": {
                "L1": self.config.L1,
                "L2": self.config.L2,
                "L3": self.config.L3,
                "l": self.config.l,
                "w": self.config.w,
                "r": self.config.r,
                "lanes_per_approach": self.config.lanes_per_approach,
                "approach_overrides": self.config.approach_overrides,
            },
            "lanes": {
                k: {"approach": v.approach, "slot": v.slot, "origin": list(v.origin),
                    "heading": list(v.heading), "L1": v.L1, "L2": v.L2, "L3": v.L3}
                for k, v in sorted(self.lanes.items())
            },
            "merging_points": {
                mp.id: {"position": list(mp.position), "kind": mp.kind}
                for mp in self.mps.values()
            },
            "paths": {
                f"{lane}:{man}": {
                    "changes_lane": p.changes_lane,
                    "total_length": p.total_length,
                    "corridor_lane": p.corridor_lane,
                    "mps": [[mp.id, d] for mp, d in p.ordered_mps],
                }
                for (lane, man), p in sorted(self.paths.items())
            },
        }

    def dump_json(self, **kw) -> str:
        return json.dumps(self.dump(), indent=2, sort_keys=True, **kw)


def build_intersection(config: GeometryConfig) -> IntersectionGeometry:
    return IntersectionGeometry(config)


def transform_position(
    x_j: float,
    L_ik: float,
    L_jk: float,
    i_changes_lane: bool,
    j_changes_lane: bool,
    l: float = 0.9378,
) -> float:
    """Map CAV j's position into CAV i's coordinate frame via a shared MP.

    ``L_ik`` and ``L_jk`` are the lane-geometric distances of the shared MP
    from i's and j's origins; a lane change adds the fixed extra length ``l``
    to the odometer of whichever vehicle performs it.
    """
    if i_changes_lane and not j_changes_lane:
        return x_j + L_ik - L_jk + l
    if j_changes_lane and not i_changes_lane:
        return x_j + L_ik - L_jk - l
    return x_j + L_ik - L_jk


def transform_odometer(x_j: float, D_ik: float, D_jk: float) -> float:
    """Transform using odometer MP distances (lane-change length folded in)."""
    return x_j + D_ik - D_jk
