"""Compact sets in the complex plane.

Declarative set specifications (disks, segments, starlike unions of spokes,
polygons, finite point sets, unions, affine images), exact Euclidean distance
functions, deterministic meshes of the set / its boundary / distance-t shells /
closed neighborhoods, origin-anchored square covers with oriented boundary
polylines, and closed-form Green's function oracles for the model sets.

All objects are immutable after construction and all operations are pure
functions of their inputs, so values can be shared freely across tasks.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import OracleUnavailableError, SpecValidationError

__all__ = [
    "CompactSet",
    "Disk",
    "Segment",
    "Star",
    "Polygon",
    "Points",
    "UnionSet",
    "AffineImage",
    "tangent_disks",
    "MeshRole",
    "Mesh",
    "SquareCover",
    "build_mesh",
    "distance",
    "square_cover",
    "green_oracle",
    "log_green_oracle",
]

# Mesh points closer than resolution/DEDUP_FACTOR are merged.
DEDUP_FACTOR = 100.0


def _as_points(z) -> np.ndarray:
    return np.atleast_1d(np.asarray(z, dtype=complex))


def _segment_distance(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    """Exact distance from each z to the closed segment [a, b]."""
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0.0:
        return np.abs(z - a)
    t = np.clip(((z - a) * np.conj(ab)).real / denom, 0.0, 1.0)
    return np.abs(z - (a + t * ab))


def _sample_segment(a: complex, b: complex, step: float) -> np.ndarray:
    n = max(1, math.ceil(abs(b - a) / step))
    t = np.arange(n + 1) / n
    return a + t * (b - a)


def _sample_arc(c: complex, r: float, th0: float, th1: float, step: float) -> np.ndarray:
    """Closed arc from angle th0 to th1 (counterclockwise), endpoints included."""
    sweep = th1 - th0
    n = max(1, math.ceil(abs(sweep) * r / step))
    th = th0 + sweep * np.arange(n + 1) / n
    return c + r * np.exp(1j * th)


def _sample_circle(c: complex, r: float, step: float) -> np.ndarray:
    n = max(8, math.ceil(2.0 * math.pi * r / step))
    th = 2.0 * math.pi * np.arange(n) / n
    return c + r * np.exp(1j * th)


def _point_in_polygon(vertices: Sequence[complex], z: complex) -> bool:
    """Even-odd crossing test; points on edges count as inside."""
    x, y = z.real, z.imag
    inside = False
    n = len(vertices)
    for k in range(n):
        p, q = vertices[k], vertices[(k + 1) % n]
        if _segment_distance(p, q, np.array([z]))[0] <= 1e-13:
            return True
        if (p.imag > y) != (q.imag > y):
            xc = p.real + (y - p.imag) * (q.real - p.real) / (q.imag - p.imag)
            if x < xc:
                inside = not inside
    return inside


def _rect_point_distance(x0, y0, x1, y1, z: complex) -> float:
    dx = max(x0 - z.real, 0.0, z.real - x1)
    dy = max(y0 - z.imag, 0.0, z.imag - y1)
    return math.hypot(dx, dy)


def _rect_segment_distance(x0, y0, x1, y1, a: complex, b: complex) -> float:
    """Exact distance between a closed axis-aligned rectangle and a segment."""
    # Endpoint inside the rectangle => they intersect.
    for p in (a, b):
        if x0 <= p.real <= x1 and y0 <= p.imag <= y1:
            return 0.0
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    best = math.inf
    for k in range(4):
        p, q = corners[k], corners[(k + 1) % 4]
        best = min(best, _segment_segment_distance(a, b, p, q))
        if best == 0.0:
            return 0.0
    return best


def _segment_segment_distance(a: complex, b: complex, p: complex, q: complex) -> float:
    d1 = b - a
    d2 = q - p
    cross = (d1.real * d2.imag - d1.imag * d2.real)
    w = p - a
    if cross != 0.0:
        t = (w.real * d2.imag - w.imag * d2.real) / cross
        s = (w.real * d1.imag - w.imag * d1.real) / cross
        if 0.0 <= t <= 1.0 and 0.0 <= s <= 1.0:
            return 0.0
    ends = np.array([p, q, a, b])
    return min(
        _segment_distance(a, b, ends[:2]).min(),
        _segment_distance(p, q, ends[2:]).min(),
    )


class CompactSet:
    """Base class for compact subsets of the complex plane.

    Subclasses provide exact distance, boundary parametrizations, offset
    (distance-t) candidate curves, interior tests and Green's oracles.
    """

    oracle: str | None = None

    def distance(self, z) -> np.ndarray:
        raise NotImplementedError

    def diameter(self) -> float:
        raise NotImplementedError

    def bbox(self) -> tuple[float, float, float, float]:
        raise NotImplementedError

    def boundary_points(self, step: float) -> np.ndarray:
        raise NotImplementedError

    def offset_curves(self, t: float, step: float) -> list[np.ndarray]:
        """Candidate curves containing every point at exact distance t."""
        raise NotImplementedError

    def strict_interior(self, z) -> np.ndarray:
        """Boolean mask: z in the topological interior of the set."""
        z = _as_points(z)
        return np.zeros(z.shape, dtype=bool)

    def hull_interior(self, z) -> np.ndarray:
        """Boolean mask: z in the interior of the polynomial hull."""
        return self.strict_interior(z)

    def rect_distance(self, x0: float, y0: float, x1: float, y1: float) -> float:
        """Exact distance from the set to a closed axis-aligned rectangle."""
        raise NotImplementedError

    def feature_size(self) -> float:
        return self.diameter()

    def is_finite_points(self) -> bool:
        return False

    def hull_candidates(self) -> list[complex] | None:
        """Finite point set whose pairwise distances realize the diameter.

        None means the set needs special handling (disks).
        """
        return None

    def farthest(self, q: complex) -> float:
        """Exact max distance from q to the set."""
        cand = self.hull_candidates()
        if cand is None:
            raise NotImplementedError
        return max(abs(p - q) for p in cand)

    def polynomially_convex(self) -> bool:
        return True

    def primitives(self) -> Iterable["CompactSet"]:
        yield self

    def interior_seed_points(self, step: float) -> np.ndarray:
        """Grid points in the interior, used for interior-fill meshes."""
        return np.empty(0, dtype=complex)

    def to_dict(self) -> dict:
        raise NotImplementedError

    # -- shared helpers -------------------------------------------------

    def validate(self) -> None:
        if self.diameter() <= 0.0 and not self.is_finite_points():
            raise SpecValidationError(f"{type(self).__name__} has zero diameter")

    def _grid(self, pad: float, step: float) -> np.ndarray:
        x0, y0, x1, y1 = self.bbox()
        xs = np.arange(x0 - pad, x1 + pad + step, step)
        ys = np.arange(y0 - pad, y1 + pad + step, step)
        return (xs[None, :] + 1j * ys[:, None]).ravel()


@dataclass(frozen=True)
class Disk(CompactSet):
    center: complex
    radius: float
    oracle: str | None = "disk"

    def __post_init__(self):
        if self.radius <= 0:
            raise SpecValidationError("disk radius must be positive")

    def distance(self, z):
        return np.maximum(np.abs(_as_points(z) - self.center) - self.radius, 0.0)

    def diameter(self):
        return 2.0 * self.radius

    def bbox(self):
        c, r = self.center, self.radius
        return (c.real - r, c.imag - r, c.real + r, c.imag + r)

    def boundary_points(self, step):
        return _sample_circle(self.center, self.radius, step)

    def offset_curves(self, t, step):
        return [_sample_circle(self.center, self.radius + t, step)]

    def strict_interior(self, z):
        return np.abs(_as_points(z) - self.center) < self.radius * (1.0 - 1e-14)

    def rect_distance(self, x0, y0, x1, y1):
        return max(0.0, _rect_point_distance(x0, y0, x1, y1, self.center) - self.radius)

    def farthest(self, q):
        return abs(q - self.center) + self.radius

    def feature_size(self):
        return self.radius

    def interior_seed_points(self, step):
        g = self._grid(0.0, step)
        return g[np.abs(g - self.center) <= self.radius]

    def to_dict(self):
        return {"kind": "disk", "center": [self.center.real, self.center.imag],
                "radius": self.radius, "oracle": self.oracle}


@dataclass(frozen=True)
class Segment(CompactSet):
    a: complex
    b: complex
    oracle: str | None = "segment"

    def __post_init__(self):
        if self.a == self.b:
            raise SpecValidationError("segment endpoints must differ")

    def distance(self, z):
        return _segment_distance(self.a, self.b, _as_points(z))

    def diameter(self):
        return abs(self.b - self.a)

    def bbox(self):
        return (min(self.a.real, self.b.real), min(self.a.imag, self.b.imag),
                max(self.a.real, self.b.real), max(self.a.imag, self.b.imag))

    def boundary_points(self, step):
        return _sample_segment(self.a, self.b, step)

    def offset_curves(self, t, step):
        # Stadium curve: two straight sides plus two end caps.
        u = (self.b - self.a) / abs(self.b - self.a)
        n = 1j * u
        th = math.atan2(u.imag, u.real)
        return [
            _sample_segment(self.a + t * n, self.b + t * n, step),
            _sample_segment(self.a - t * n, self.b - t * n, step),
            _sample_arc(self.b, t, th - math.pi / 2, th + math.pi / 2, step),
            _sample_arc(self.a, t, th + math.pi / 2, th + 3 * math.pi / 2, step),
        ]

    def rect_distance(self, x0, y0, x1, y1):
        return _rect_segment_distance(x0, y0, x1, y1, self.a, self.b)

    def hull_candidates(self):
        return [self.a, self.b]

    def to_dict(self):
        return {"kind": "segment", "a": [self.a.real, self.a.imag],
                "b": [self.b.real, self.b.imag], "oracle": self.oracle}


@dataclass(frozen=True)
class Star(CompactSet):
    """n unit spokes from the origin at angles 2*pi*j/n, j = 1..n."""

    n: int
    oracle: str | None = "star"

    def __post_init__(self):
        if self.n < 2:
            raise SpecValidationError("star needs at least 2 spokes")

    def _tips(self) -> list[complex]:
        return [cmath.exp(2j * math.pi * j / self.n) for j in range(1, self.n + 1)]

    def distance(self, z):
        z = _as_points(z)
        d = np.full(z.shape, np.inf)
        for tip in self._tips():
            d = np.minimum(d, _segment_distance(0.0, tip, z))
        return d

    def diameter(self):
        if self.n == 2:
            return 2.0
        # Largest tip-to-tip chord, at least the spoke length 1.
        return max(1.0, 2.0 * math.sin(math.pi * (self.n // 2) / self.n))

    def bbox(self):
        tips = self._tips()
        xs = [0.0] + [t.real for t in tips]
        ys = [0.0] + [t.imag for t in tips]
        return (min(xs), min(ys), max(xs), max(ys))

    def boundary_points(self, step):
        pts = [_sample_segment(0.0, tip, step) for tip in self._tips()]
        return np.concatenate(pts)

    def offset_curves(self, t, step):
        curves = []
        for tip in self._tips():
            curves.extend(Segment(0.0, tip, oracle=None).offset_curves(t, step))
        return curves

    def rect_distance(self, x0, y0, x1, y1):
        return min(_rect_segment_distance(x0, y0, x1, y1, 0.0, tip) for tip in self._tips())

    def hull_candidates(self):
        return [0.0 + 0.0j] + self._tips()

    def feature_size(self):
        return math.sin(math.pi / self.n)

    def to_dict(self):
        return {"kind": "star", "n": self.n, "oracle": self.oracle}


@dataclass(frozen=True)
class Polygon(CompactSet):
    vertices: tuple
    filled: bool = True
    oracle: str | None = None

    def __post_init__(self):
        if len(self.vertices) < 3:
            raise SpecValidationError("polygon needs at least 3 vertices")
        object.__setattr__(self, "vertices", tuple(complex(v) for v in self.vertices))

    def _edges(self):
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    def distance(self, z):
        z = _as_points(z)
        d = np.full(z.shape, np.inf)
        for a, b in self._edges():
            d = np.minimum(d, _segment_distance(a, b, z))
        if self.filled:
            inside = np.array([_point_in_polygon(self.vertices, w) for w in z])
            d = np.where(inside, 0.0, d)
        return d

    def diameter(self):
        v = np.asarray(self.vertices)
        return max(abs(p - q) for p in v for q in v)

    def bbox(self):
        xs = [v.real for v in self.vertices]
        ys = [v.imag for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def boundary_points(self, step):
        return np.concatenate([_sample_segment(a, b, step) for a, b in self._edges()])

    def offset_curves(self, t, step):
        curves = []
        for a, b in self._edges():
            curves.extend(Segment(a, b, oracle=None).offset_curves(t, step))
        return curves

    def strict_interior(self, z):
        z = _as_points(z)
        if not self.filled:
            return np.zeros(z.shape, dtype=bool)
        edge = np.full(z.shape, np.inf)
        for a, b in self._edges():
            edge = np.minimum(edge, _segment_distance(a, b, z))
        inside = np.array([_point_in_polygon(self.vertices, w) for w in z])
        return inside & (edge > 1e-13)

    def rect_distance(self, x0, y0, x1, y1):
        d = min(_rect_segment_distance(x0, y0, x1, y1, a, b) for a, b in self._edges())
        if d > 0.0 and self.filled:
            # Rectangle might be strictly inside the polygon.
            if _point_in_polygon(self.vertices, complex((x0 + x1) / 2, (y0 + y1) / 2)):
                return 0.0
        return d

    def feature_size(self):
        return min(abs(b - a) for a, b in self._edges())

    def hull_candidates(self):
        return list(self.vertices)

    def polynomially_convex(self):
        return self.filled

    def interior_seed_points(self, step):
        if not self.filled:
            return np.empty(0, dtype=complex)
        g = self._grid(0.0, step)
        mask = np.array([_point_in_polygon(self.vertices, w) for w in g])
        return g[mask]

    def to_dict(self):
        return {"kind": "polygon", "vertices": [[v.real, v.imag] for v in self.vertices],
                "filled": self.filled, "oracle": self.oracle}


@dataclass(frozen=True)
class Points(CompactSet):
    """Finite point set; the degenerate case with extremal function +inf."""

    pts: tuple
    oracle: str | None = None

    def __post_init__(self):
        if len(self.pts) == 0:
            raise SpecValidationError("empty point set")
        object.__setattr__(self, "pts", tuple(complex(p) for p in self.pts))

    def distance(self, z):
        z = _as_points(z)
        return np.min(np.abs(z[:, None] - np.asarray(self.pts)[None, :]), axis=1)

    def diameter(self):
        if len(self.pts) == 1:
            return 0.0
        return max(abs(p - q) for p in self.pts for q in self.pts)

    def bbox(self):
        xs = [p.real for p in self.pts]
        ys = [p.imag for p in self.pts]
        return (min(xs), min(ys), max(xs), max(ys))

    def boundary_points(self, step):
        return np.asarray(self.pts, dtype=complex)

    def offset_curves(self, t, step):
        return [_sample_circle(p, t, step) for p in self.pts]

    def rect_distance(self, x0, y0, x1, y1):
        return min(_rect_point_distance(x0, y0, x1, y1, p) for p in self.pts)

    def hull_candidates(self):
        return list(self.pts)

    def is_finite_points(self):
        return True

    def validate(self):
        pass

    def to_dict(self):
        return {"kind": "points", "pts": [[p.real, p.imag] for p in self.pts],
                "oracle": self.oracle}


@dataclass(frozen=True)
class UnionSet(CompactSet):
    members: tuple
    oracle: str | None = None

    def __post_init__(self):
        if len(self.members) == 0:
            raise SpecValidationError("empty union")
        object.__setattr__(self, "members", tuple(self.members))
        for m in self.members:
            m.validate()

    def distance(self, z):
        z = _as_points(z)
        d = np.full(z.shape, np.inf)
        for m in self.members:
            d = np.minimum(d, m.distance(z))
        return d

    def diameter(self):
        # Exact: max of primitive diameters and pairwise cross distances.
        prim = list(self.primitives())
        best = max(m.diameter() for m in prim)
        for i in range(len(prim)):
            for j in range(i + 1, len(prim)):
                best = max(best, _cross_distance(prim[i], prim[j]))
        return best

    def bbox(self):
        boxes = [m.bbox() for m in self.members]
        return (min(b[0] for b in boxes), min(b[1] for b in boxes),
                max(b[2] for b in boxes), max(b[3] for b in boxes))

    def boundary_points(self, step):
        kept = []
        for i, m in enumerate(self.members):
            pts = m.boundary_points(step)
            others = [o for j, o in enumerate(self.members) if j != i]
            mask = np.ones(len(pts), dtype=bool)
            for o in others:
                mask &= ~o.strict_interior(pts)
            kept.append(pts[mask])
        return np.concatenate(kept)

    def offset_curves(self, t, step):
        curves = []
        for m in self.members:
            curves.extend(m.offset_curves(t, step))
        return curves

    def strict_interior(self, z):
        z = _as_points(z)
        mask = np.zeros(z.shape, dtype=bool)
        for m in self.members:
            mask |= m.strict_interior(z)
        return mask

    def rect_distance(self, x0, y0, x1, y1):
        return min(m.rect_distance(x0, y0, x1, y1) for m in self.members)

    def feature_size(self):
        return min(m.feature_size() for m in self.members)

    def polynomially_convex(self):
        return all(m.polynomially_convex() for m in self.members)

    def primitives(self):
        for m in self.members:
            yield from m.primitives()

    def interior_seed_points(self, step):
        seeds = [m.interior_seed_points(step) for m in self.members]
        seeds = [s for s in seeds if len(s)]
        return np.concatenate(seeds) if seeds else np.empty(0, dtype=complex)

    def to_dict(self):
        return {"kind": "union", "members": [m.to_dict() for m in self.members],
                "oracle": self.oracle}


@dataclass(frozen=True)
class AffineImage(CompactSet):
    """The image a*E + b of a base set under an affine map, a != 0.

    Green's functions are invariant under affine changes of variable, so the
    base oracle pulls back exactly; distances scale by |a|.
    """

    base: CompactSet
    a: complex
    b: complex

    def __post_init__(self):
        if self.a == 0:
            raise SpecValidationError("affine scale must be nonzero")

    @property
    def oracle(self):  # type: ignore[override]
        return self.base.oracle

    def _pull(self, z):
        return (_as_points(z) - self.b) / self.a

    def distance(self, z):
        return abs(self.a) * self.base.distance(self._pull(z))

    def diameter(self):
        return abs(self.a) * self.base.diameter()

    def bbox(self):
        x0, y0, x1, y1 = self.base.bbox()
        corners = np.array([complex(x0, y0), complex(x1, y0),
                            complex(x1, y1), complex(x0, y1)]) * self.a + self.b
        return (corners.real.min(), corners.imag.min(),
                corners.real.max(), corners.imag.max())

    def boundary_points(self, step):
        return self.base.boundary_points(step / abs(self.a)) * self.a + self.b

    def offset_curves(self, t, step):
        s = abs(self.a)
        return [c * self.a + self.b for c in self.base.offset_curves(t / s, step / s)]

    def strict_interior(self, z):
        return self.base.strict_interior(self._pull(z))

    def feature_size(self):
        return abs(self.a) * self.base.feature_size()

    def polynomially_convex(self):
        return self.base.polynomially_convex()

    def interior_seed_points(self, step):
        return self.base.interior_seed_points(step / abs(self.a)) * self.a + self.b

    def hull_candidates(self):
        cand = self.base.hull_candidates()
        if cand is None:
            return None
        return [p * self.a + self.b for p in cand]

    def to_dict(self):
        return {"kind": "affine", "base": self.base.to_dict(),
                "a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag]}


def _cross_distance(A: CompactSet, B: CompactSet) -> float:
    """Exact max_{p in A, q in B} |p - q| for the supported primitives."""
    if isinstance(A, Disk) and isinstance(B, Disk):
        return abs(A.center - B.center) + A.radius + B.radius
    if isinstance(A, Disk):
        A, B = B, A
    if isinstance(B, Disk):
        cand = A.hull_candidates()
        if cand is None:
            raise NotImplementedError(f"diameter of union with {type(A).__name__}")
        return max(abs(p - B.center) for p in cand) + B.radius
    ca, cb = A.hull_candidates(), B.hull_candidates()
    if ca is None or cb is None:
        raise NotImplementedError("diameter of union with unsupported member")
    return max(abs(p - q) for p in ca for q in cb)


def tangent_disks() -> UnionSet:
    """The two closed unit disks tangent at the origin."""
    return UnionSet((Disk(-1.0, 1.0), Disk(1.0, 1.0)), oracle="tangent-disks")


def from_dict(d: dict) -> CompactSet:
    kind = d["kind"]
    oracle = d.get("oracle", _DEFAULT_ORACLE.get(kind))
    if kind == "disk":
        return Disk(complex(*d["center"]), float(d["radius"]), oracle=oracle)
    if kind == "segment":
        return Segment(complex(*d["a"]), complex(*d["b"]), oracle=oracle)
    if kind == "star":
        return Star(int(d["n"]), oracle=oracle)
    if kind == "polygon":
        return Polygon(tuple(complex(*v) for v in d["vertices"]),
                       filled=bool(d.get("filled", True)), oracle=oracle)
    if kind == "points":
        return Points(tuple(complex(*p) for p in d["pts"]), oracle=oracle)
    if kind == "union":
        return UnionSet(tuple(from_dict(m) for m in d["members"]), oracle=oracle)
    if kind == "affine":
        return AffineImage(from_dict(d["base"]), complex(*d["a"]), complex(*d["b"]))
    raise SpecValidationError(f"unknown set kind {kind!r}")


_DEFAULT_ORACLE = {"disk": "disk", "segment": "segment", "star": "star"}


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeshRole:
    kind: str  # interior-fill | boundary | shell | neighborhood
    param: float | None = None

    @staticmethod
    def boundary() -> "MeshRole":
        return MeshRole("boundary")

    @staticmethod
    def interior() -> "MeshRole":
        return MeshRole("interior-fill")

    @staticmethod
    def shell(t: float) -> "MeshRole":
        return MeshRole("shell", float(t))

    @staticmethod
    def neighborhood(delta: float) -> "MeshRole":
        return MeshRole("neighborhood", float(delta))


@dataclass(frozen=True)
class Mesh:
    points: np.ndarray  # complex, deduplicated, deterministic order
    role: MeshRole
    resolution: float
    parent: CompactSet
    warning: str | None = None

    def __len__(self):
        return len(self.points)


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    """Drop points closer than tol to an earlier point; keeps first occurrences."""
    if len(points) == 0:
        return points
    seen: dict[tuple[int, int], complex] = {}
    out = []
    for z in points:
        key = (round(z.real / tol), round(z.imag / tol))
        hit = False
        # Check the 3x3 key neighborhood so near-boundary rounding cannot split.
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                w = seen.get((key[0] + di, key[1] + dj))
                if w is not None and abs(w - z) < tol:
                    hit = True
                    break
            if hit:
                break
        if not hit:
            seen[key] = z
            out.append(z)
    return np.asarray(out, dtype=complex)


def build_mesh(spec: CompactSet, role: MeshRole, resolution: float) -> Mesh:
    """Deterministic point cloud sampling the set in the requested role.

    boundary        points on the outer boundary of E (on E itself for arcs),
                    gap between consecutive parameter samples <= resolution;
    interior-fill   boundary plus an interior grid of pitch resolution;
    shell(t)        points z with dist(z, E) = t, built from exact per-primitive
                    offset curves filtered against the whole set;
    neighborhood(d) grid fill of E_d together with boundary and shell(d) points.
    """
    if resolution <= 0:
        raise SpecValidationError("resolution must be positive")
    spec.validate()
    warning = None
    if not spec.is_finite_points() and resolution > spec.feature_size() / 4.0:
        warning = (f"resolution {resolution:g} coarser than feature size "
                   f"{spec.feature_size():g}/4")

    if role.kind == "boundary":
        pts = spec.boundary_points(resolution)
    elif role.kind == "interior-fill":
        pts = np.concatenate([spec.boundary_points(resolution),
                              spec.interior_seed_points(resolution)])
    elif role.kind == "shell":
        t = role.param
        if t is None or t <= 0:
            raise SpecValidationError("shell role needs t > 0")
        keep = []
        for curve in spec.offset_curves(t, resolution / 2.0):
            d = spec.distance(curve)
            keep.append(curve[d >= t * (1.0 - 1e-9)])
        pts = np.concatenate(keep) if keep else np.empty(0, dtype=complex)
        if len(pts) == 0:
            raise SpecValidationError(f"empty shell at t={t:g}")
    elif role.kind == "neighborhood":
        d = role.param
        if d is None or d <= 0:
            raise SpecValidationError("neighborhood role needs delta > 0")
        grid = spec._grid(d, resolution)
        fill = grid[spec.distance(grid) <= d]
        shell = build_mesh(spec, MeshRole.shell(d), resolution).points
        pts = np.concatenate([spec.boundary_points(resolution), shell, fill])
    else:
        raise SpecValidationError(f"unknown mesh role {role.kind!r}")

    pts = _dedup(pts, resolution / DEDUP_FACTOR)
    if len(pts) < 2 and not spec.is_finite_points():
        raise SpecValidationError("mesh degenerated to fewer than 2 points")
    return Mesh(points=pts, role=role, resolution=resolution, parent=spec,
                warning=warning)


def distance(spec: CompactSet, z) -> float | np.ndarray:
    """Exact Euclidean distance from z (scalar or array) to the set."""
    d = spec.distance(z)
    return float(d[0]) if np.isscalar(z) or np.asarray(z).ndim == 0 else d


# ---------------------------------------------------------------------------
# Square covers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SquareCover:
    """Union of origin-anchored delta-grid squares meeting the (inflated) set."""

    delta: float
    squares: tuple  # sorted (i, j) pairs: square [i*d,(i+1)*d] x [j*d,(j+1)*d]
    boundary_loops: tuple  # closed oriented polylines (complex ndarrays)

    @property
    def boundary_length(self) -> float:
        return float(sum((len(loop) - 1) * self.delta for loop in self.boundary_loops))

    def boundary_polyline(self) -> np.ndarray:
        return np.concatenate(self.boundary_loops)


def square_cover(spec: CompactSet, delta: float, inflate: float = 0.0) -> SquareCover:
    """Cover of the inflated set E_inflate by origin-anchored delta-squares.

    Square selection uses exact rectangle-to-set distances, so the cover
    contains every square that meets E_inflate and no others.
    """
    if delta <= 0:
        raise SpecValidationError("delta must be positive")
    spec.validate()
    x0, y0, x1, y1 = spec.bbox()
    pad = inflate + delta
    i_lo = math.floor((x0 - pad) / delta)
    i_hi = math.ceil((x1 + pad) / delta)
    j_lo = math.floor((y0 - pad) / delta)
    j_hi = math.ceil((y1 + pad) / delta)
    tol = 1e-12 * max(1.0, abs(x0), abs(x1), abs(y0), abs(y1))
    chosen = []
    for i in range(i_lo, i_hi + 1):
        for j in range(j_lo, j_hi + 1):
            d = spec.rect_distance(i * delta, j * delta, (i + 1) * delta, (j + 1) * delta)
            if d <= inflate + tol:
                chosen.append((i, j))
    chosen.sort()
    loops = _boundary_loops(set(chosen), delta)
    return SquareCover(delta=delta, squares=tuple(chosen), boundary_loops=tuple(loops))


def _boundary_loops(squares: set, delta: float) -> list[np.ndarray]:
    """Chain exposed square edges into closed loops, interior on the left."""
    # Directed edges in integer vertex coordinates.
    edges: dict[tuple, list[tuple]] = {}

    def add(a, b):
        edges.setdefault(a, []).append(b)

    for (i, j) in squares:
        if (i, j - 1) not in squares:
            add((i, j), (i + 1, j))          # bottom, rightward
        if (i + 1, j) not in squares:
            add((i + 1, j), (i + 1, j + 1))  # right, upward
        if (i, j + 1) not in squares:
            add((i + 1, j + 1), (i, j + 1))  # top, leftward
        if (i - 1, j) not in squares:
            add((i, j + 1), (i, j))          # left, downward

    for v in edges.values():
        v.sort()

    loops = []
    starts = sorted(edges.keys())
    used: set[tuple] = set()
    for start in starts:
        for first in edges[start]:
            if (start, first) in used:
                continue
            loop = [start]
            a, b = start, first
            while True:
                used.add((a, b))
                loop.append(b)
                if b == start and len(loop) > 1:
                    break
                incoming = (b[0] - a[0], b[1] - a[1])
                nxts = [c for c in edges.get(b, []) if (b, c) not in used or c == start]
                if not nxts:
                    break
                # Rightmost turn first: keeps corner-touching regions separate.
                def turn(c):
                    out = (c[0] - b[0], c[1] - b[1])
                    cross = incoming[0] * out[1] - incoming[1] * out[0]
                    dot = incoming[0] * out[0] + incoming[1] * out[1]
                    return math.atan2(cross, dot)
                nxts.sort(key=turn)
                a, b = b, nxts[0]
            loops.append(np.array([delta * complex(x, y) for (x, y) in loop]))
    return loops


# ---------------------------------------------------------------------------
# Green's function oracles
# ---------------------------------------------------------------------------

def _green_disk(center: complex, radius: float, z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        g = np.log(np.abs(z - center) / radius)
    return np.maximum(g, 0.0)


def _green_segment(a: complex, b: complex, z: np.ndarray) -> np.ndarray:
    # Map the segment onto [-1, 1]; the Green's function is invariant.
    w = (2.0 * z - (a + b)) / (b - a)
    s = np.sqrt(w - 1.0) * np.sqrt(w + 1.0)  # branch cut exactly on [-1, 1]
    g = np.log(np.abs(w + s))
    return np.maximum(g, 0.0)


def _green_star(n: int, z: np.ndarray) -> np.ndarray:
    return _green_segment(0.0, 1.0, z ** n) / n


def _tangent_disk_uv(z: np.ndarray):
    """Stable ingredients for the tangent-disk Green's function.

    With w = pi/(2 z), returns (r, c) where r = exp(-2|Im w|) and c = cos(2 Re w);
    the Green's function is artanh(2 r c / (1 + r^2)).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (math.pi / 2.0) / z
    x = np.real(w)
    y = np.abs(np.imag(w))
    r = np.exp(-2.0 * y)
    c = np.cos(2.0 * x)
    return r, c


def _green_tangent_disks(z: np.ndarray) -> np.ndarray:
    z = _as_points(z)
    g = np.zeros(z.shape)
    mask = (np.abs(z - 1.0) > 1.0) & (np.abs(z + 1.0) > 1.0) & (z != 0)
    if mask.any():
        r, c = _tangent_disk_uv(z[mask])
        v = 2.0 * r * c / (1.0 + r * r)
        g[mask] = np.maximum(np.arctanh(np.clip(v, -1 + 1e-300, 1 - 1e-16)), 0.0)
    return g


def _log_green_tangent_disks(z: np.ndarray) -> np.ndarray:
    """log g for the tangent disks, stable where g underflows to zero."""
    z = _as_points(z)
    out = np.full(z.shape, -np.inf)
    mask = (np.abs(z - 1.0) > 1.0) & (np.abs(z + 1.0) > 1.0) & (z != 0)
    if not mask.any():
        return out
    r, c = _tangent_disk_uv(z[mask])
    w = (math.pi / 2.0) / z[mask]
    y = np.abs(np.imag(w))
    vals = np.full(r.shape, -np.inf)
    small = r < 1e-150
    big = ~small
    if big.any():
        v = 2.0 * r[big] * c[big] / (1.0 + r[big] ** 2)
        g = np.arctanh(np.clip(v, -1 + 1e-300, 1 - 1e-16))
        with np.errstate(divide="ignore"):
            vals[big] = np.where(g > 0, np.log(g), -np.inf)
    if small.any():
        # artanh(v) = v within double precision here; log v in log space.
        cg = np.maximum(c[small], 1e-300)
        vals[small] = math.log(2.0) + np.log(cg) - 2.0 * y[small]
    out[mask] = vals
    return out


def green_oracle(spec: CompactSet, z) -> float | np.ndarray:
    """Closed-form Green's function with pole at infinity, 0 on the hull."""
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    pts = _as_points(z)
    g = _green_oracle_array(spec, pts)
    return float(g[0]) if scalar else g


def _green_oracle_array(spec: CompactSet, pts: np.ndarray) -> np.ndarray:
    if isinstance(spec, AffineImage):
        return _green_oracle_array(spec.base, (pts - spec.b) / spec.a)
    if spec.oracle is None:
        raise OracleUnavailableError(
            f"no closed-form Green's oracle for {type(spec).__name__}; "
            "use extremal.green_estimate")
    if spec.oracle == "disk":
        assert isinstance(spec, Disk)
        return _green_disk(spec.center, spec.radius, pts)
    if spec.oracle == "segment":
        assert isinstance(spec, Segment)
        return _green_segment(spec.a, spec.b, pts)
    if spec.oracle == "star":
        assert isinstance(spec, Star)
        return _green_star(spec.n, pts)
    if spec.oracle == "tangent-disks":
        return _green_tangent_disks(pts)
    raise OracleUnavailableError(f"unknown oracle tag {spec.oracle!r}")


def log_green_oracle(spec: CompactSet, z) -> float | np.ndarray:
    """log of the Green's oracle, computed stably for very small values.

    Returns -inf on the hull. Needed by exponent fits at scales where the
    tangent-disk Green's function underflows double precision.
    """
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    pts = _as_points(z)
    if isinstance(spec, AffineImage):
        out = log_green_oracle(spec.base, (pts - spec.b) / spec.a)
        out = _as_points(out) if np.isscalar(out) else out
        return float(out[0]) if scalar else out
    if spec.oracle == "tangent-disks":
        out = _log_green_tangent_disks(pts)
    else:
        g = _green_oracle_array(spec, pts)
        with np.errstate(divide="ignore"):
            out = np.where(g > 0, np.log(np.maximum(g, 1e-320)), -np.inf)
    return float(out[0]) if scalar else out
