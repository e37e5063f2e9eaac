"""Planar domains, S^1-valued boundary data, graded meshes and winding utilities.

Orientation convention: nu is the outward normal of the domain and
tau = nu^perp, so det(nu, tau) = 1. The outer loop is traversed
counter-clockwise, inner loops clockwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from matplotlib.path import Path
from matplotlib.tri import Triangulation, TrapezoidMapTriFinder
from scipy.spatial import Delaunay

from .errors import AmbiguousLift, InvalidConfig, InvalidDomain, OutOfDomain

GRADING = 0.3


def perp(v):
    """Rotate 2-vectors (last axis) by +90 degrees: (h1, h2) -> (-h2, h1)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _segment_distance(pts, a, b):
    ab = b - a
    t = np.clip(((pts - a) @ ab) / (ab @ ab), 0.0, 1.0)
    return np.linalg.norm(pts - (a + t[:, None] * ab), axis=1)


def _segments_cross(p1, p2, q1, q2):
    def orient(a, b, c):
        return np.sign((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))

    return (orient(p1, p2, q1) * orient(p1, p2, q2) < 0) and (orient(q1, q2, p1) * orient(q1, q2, p2) < 0)


@dataclass(frozen=True)
class Domain:
    """Unit disk, annulus r_inner < |x| < 1, or a simply connected polygon."""

    kind: str
    r_inner: float = 0.0
    vertices: tuple = ()

    def __post_init__(self):
        if self.kind == "disk":
            return
        if self.kind == "annulus":
            if not 0.0 < self.r_inner < 1.0:
                raise InvalidDomain(f"annulus needs 0 < r_inner < 1, got {self.r_inner}")
            return
        if self.kind != "polygon":
            raise InvalidDomain(f"unknown domain kind {self.kind!r}")
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise InvalidDomain("polygon needs at least three (x, y) vertices")
        x, y = v[:, 0], v[:, 1]
        area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
        if abs(area) < 1e-12:
            raise InvalidDomain("polygon has zero area")
        edges = [(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
        for i in range(len(v)):
            if np.linalg.norm(edges[i][1] - edges[i][0]) < 1e-12:
                raise InvalidDomain("polygon has a repeated vertex")
            for k in range(i + 2, len(v)):
                if i == 0 and k == len(v) - 1:
                    continue
                if _segments_cross(*edges[i], *edges[k]):
                    raise InvalidDomain("polygon edges intersect")
        if area < 0:
            v = v[::-1]
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))
        c = self.center(0)
        rel = v - c
        cross = rel[:, 0] * np.roll(rel[:, 1], -1) - rel[:, 1] * np.roll(rel[:, 0], -1)
        if np.any(cross <= 0):
            raise InvalidDomain("polygon must be star-shaped about its centroid")

    @classmethod
    def disk(cls):
        return cls("disk")

    @classmethod
    def annulus(cls, r_inner):
        return cls("annulus", r_inner=float(r_inner))

    @classmethod
    def polygon(cls, vertices):
        return cls("polygon", vertices=tuple(map(tuple, np.asarray(vertices, float).tolist())))

    @property
    def n_components(self):
        return 2 if self.kind == "annulus" else 1

    @property
    def anchors(self):
        """One point inside each inner boundary loop (the hole centroid)."""
        return np.zeros((1, 2)) if self.kind == "annulus" else np.zeros((0, 2))

    def center(self, ell):
        """Reference point used to parameterize boundary loop ell by angle."""
        if self.kind != "polygon":
            return np.zeros(2)
        v = np.asarray(self.vertices, dtype=float)
        x, y = v[:, 0], v[:, 1]
        cr = x * np.roll(y, -1) - np.roll(x, -1) * y
        a = 0.5 * cr.sum()
        cx = np.sum((x + np.roll(x, -1)) * cr) / (6 * a)
        cy = np.sum((y + np.roll(y, -1)) * cr) / (6 * a)
        return np.array([cx, cy])

    def sdf(self, pts):
        """Signed distance to the boundary, negative inside."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.hypot(pts[:, 0], pts[:, 1])
        if self.kind == "disk":
            return r - 1.0
        if self.kind == "annulus":
            return np.maximum(r - 1.0, self.r_inner - r)
        v = np.asarray(self.vertices, dtype=float)
        d = np.min([_segment_distance(pts, v[i], v[(i + 1) % len(v)]) for i in range(len(v))], axis=0)
        inside = Path(v).contains_points(pts)
        return np.where(inside, -d, d)

    def contains(self, pts, margin=0.0):
        return self.sdf(pts) < -margin

    def corners(self):
        if self.kind == "polygon":
            return np.asarray(self.vertices, dtype=float)
        return np.zeros((0, 2))

    def component_of(self, pts):
        """Index of the boundary component nearest to each point."""
        pts = np.atleast_2d(pts)
        if self.kind != "annulus":
            return np.zeros(len(pts), dtype=int)
        r = np.hypot(pts[:, 0], pts[:, 1])
        return (np.abs(r - self.r_inner) < np.abs(r - 1.0)).astype(int)

    def loop_samples(self, ell, size, n_fine=4096):
        """Points along boundary loop ell spaced according to the size function."""
        if self.kind == "polygon":
            v = np.asarray(self.vertices, dtype=float)
            out = []
            for i in range(len(v)):
                a, b = v[i], v[(i + 1) % len(v)]
                t = np.linspace(0.0, 1.0, n_fine)
                seg = a + t[:, None] * (b - a)
                out.append(_equidistribute(seg, size, closed=False)[:-1])
            return np.vstack(out)
        radius = 1.0 if ell == 0 else self.r_inner
        t = np.linspace(0.0, 2 * np.pi, n_fine, endpoint=False)
        circ = radius * np.column_stack([np.cos(t), np.sin(t)])
        return _equidistribute(circ, size, closed=True)

    def to_dict(self):
        if self.kind == "disk":
            return {"kind": "disk"}
        if self.kind == "annulus":
            return {"kind": "annulus", "r_inner": self.r_inner}
        return {"kind": "polygon", "vertices": [list(v) for v in self.vertices]}


def _equidistribute(curve, size, closed):
    pts = curve if not closed else np.vstack([curve, curve[:1]])
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    mids = 0.5 * (pts[1:] + pts[:-1])
    density = seg / size(mids)
    cum = np.concatenate([[0.0], np.cumsum(density)])
    n = max(3 if closed else 1, int(np.ceil(cum[-1] - 1e-9)))
    targets = np.linspace(0.0, cum[-1], n + 1)
    if closed:
        targets = targets[:-1]
    x = np.interp(targets, cum, pts[:, 0])
    y = np.interp(targets, cum, pts[:, 1])
    return np.column_stack([x, y])


@dataclass(frozen=True)
class ComponentPhase:
    """Phase of g on one boundary loop: winding*theta + offset + trigonometric residual."""

    winding: int
    cos: tuple = ()
    sin: tuple = ()
    offset: float = 0.0

    def phase(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = self.winding * theta + self.offset
        for k, a in enumerate(self.cos, start=1):
            out = out + a * np.cos(k * theta)
        for k, b in enumerate(self.sin, start=1):
            out = out + b * np.sin(k * theta)
        return out

    def dphase(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.full_like(theta, float(self.winding))
        for k, a in enumerate(self.cos, start=1):
            out = out - k * a * np.sin(k * theta)
        for k, b in enumerate(self.sin, start=1):
            out = out + k * b * np.cos(k * theta)
        return out


@dataclass(frozen=True)
class BoundaryDatum:
    """g = exp(i * phase) on each boundary component; |g| = 1 by construction."""

    components: tuple

    @classmethod
    def from_windings(cls, *windings):
        return cls(tuple(ComponentPhase(int(w)) for w in windings))

    def degree(self, ell):
        return self.components[ell].winding

    def _angle(self, domain, ell, pts):
        rel = np.atleast_2d(pts) - domain.center(ell)
        return np.arctan2(rel[:, 1], rel[:, 0]), rel

    def phase(self, domain, ell, pts):
        theta, _ = self._angle(domain, ell, pts)
        return self.components[ell].phase(theta)

    def value(self, domain, ell, pts):
        return np.exp(1j * self.phase(domain, ell, pts))

    def phase_speed(self, domain, ell, pts, tangents):
        """-i g^{-1} d_tau g: derivative of the phase along the given unit tangents."""
        theta, rel = self._angle(domain, ell, pts)
        dtheta = np.einsum("ij,ij->i", np.atleast_2d(tangents), perp(rel)) / np.einsum("ij,ij->i", rel, rel)
        return self.components[ell].dphase(theta) * dtheta

    def to_list(self):
        return [
            {"winding": c.winding, "cos": list(c.cos), "sin": list(c.sin), "offset": c.offset}
            for c in self.components
        ]


def unwrap_phase(samples):
    """Continuous lift of S^1-valued samples; out[0] lies in (-pi, pi]."""
    s = np.asarray(samples, dtype=complex)
    if s.size == 0:
        return np.zeros(0)
    if np.any(np.abs(s) == 0):
        raise AmbiguousLift("zero sample has no phase")
    steps = np.angle(s[1:] / s[:-1])
    if np.any(np.abs(steps) >= np.pi * (1 - 1e-12)):
        raise AmbiguousLift("consecutive samples are pi apart or more")
    first = np.angle(s[0])
    return first + np.concatenate([[0.0], np.cumsum(steps)])


def winding_of_loop(samples, return_residual=False):
    """Winding number of a closed loop of samples (last sample connects to first)."""
    s = np.asarray(samples, dtype=complex)
    lift = unwrap_phase(np.concatenate([s, s[:1]]))
    turns = (lift[-1] - lift[0]) / (2 * np.pi)
    w = int(np.rint(turns))
    if return_residual:
        return w, abs(turns - w)
    return w


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming triangulation with boundary edges oriented so the interior lies on the left."""

    points: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: np.ndarray
    grading_radius: np.ndarray
    h_far: float
    h_near: float

    def __post_init__(self):
        for name in ("points", "triangles", "boundary_edges", "boundary_tags", "grading_radius"):
            getattr(self, name).setflags(write=False)

    @property
    def n_vertices(self):
        return len(self.points)

    @cached_property
    def areas(self):
        p = self.points[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def basis_gradients(self):
        """Gradients of the three barycentric functions per triangle, shape (T, 3, 2)."""
        p = self.points[self.triangles]
        # grad lambda_a = perp(p_c - p_b) / (2 area), with (a, b, c) cyclic
        g = np.empty((len(p), 3, 2))
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            e = p[:, c] - p[:, b]
            g[:, a, 0] = -e[:, 1]
            g[:, a, 1] = e[:, 0]
        return g / (2 * self.areas)[:, None, None]

    @cached_property
    def centroids(self):
        return self.points[self.triangles].mean(axis=1)

    @cached_property
    def diameters(self):
        p = self.points[self.triangles]
        return np.max([np.linalg.norm(p[:, i] - p[:, (i + 1) % 3], axis=1) for i in range(3)], axis=0)

    @cached_property
    def edges(self):
        e = np.sort(np.vstack([self.triangles[:, [0, 1]], self.triangles[:, [1, 2]], self.triangles[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0)

    @cached_property
    def boundary_vertices(self):
        return np.unique(self.boundary_edges)

    @cached_property
    def interior_vertices(self):
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_vertices] = False
        return np.flatnonzero(mask)

    @cached_property
    def loops(self):
        """Ordered vertex cycle per boundary tag, following the edge orientation."""
        out = {}
        for tag in np.unique(self.boundary_tags):
            e = self.boundary_edges[self.boundary_tags == tag]
            nxt = dict(zip(e[:, 0].tolist(), e[:, 1].tolist()))
            start = int(e[0, 0])
            cyc = [start]
            while True:
                v = nxt[cyc[-1]]
                if v == start:
                    break
                cyc.append(v)
                if len(cyc) > len(e):
                    raise InvalidDomain("boundary edges do not form a simple loop")
            if len(cyc) != len(e):
                raise InvalidDomain(f"boundary component {tag} splits into several loops")
            out[int(tag)] = np.array(cyc)
        return out

    @cached_property
    def _trifinder(self):
        tri = Triangulation(self.points[:, 0], self.points[:, 1], self.triangles)
        return TrapezoidMapTriFinder(tri)

    def locate(self, pts):
        """Containing triangle index (-1 outside) and barycentric coordinates."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        idx = np.asarray(self._trifinder(pts[:, 0], pts[:, 1]), dtype=int)
        bary = np.zeros((len(pts), 3))
        ok = idx >= 0
        if np.any(ok):
            bary[ok] = self.barycentric(idx[ok], pts[ok])
        return idx, bary

    def barycentric(self, tri, pts):
        p0 = self.points[self.triangles[tri, 0]]
        g = self.basis_gradients[tri]
        l1 = np.einsum("ij,ij->i", g[:, 1], pts - p0)
        l2 = np.einsum("ij,ij->i", g[:, 2], pts - p0)
        return np.column_stack([1 - l1 - l2, l1, l2])

    def min_angle(self):
        p = self.points[self.triangles]
        angles = []
        for a in range(3):
            u = p[:, (a + 1) % 3] - p[:, a]
            v = p[:, (a + 2) % 3] - p[:, a]
            c = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            angles.append(np.degrees(np.arccos(np.clip(c, -1, 1))))
        return float(np.min(angles))

    def euler_characteristic(self):
        return self.n_vertices - len(self.edges) + len(self.triangles)


def size_function(vortices, h_far, h_near, grading=GRADING):
    vortices = np.asarray(vortices, dtype=float).reshape(-1, 2)

    def h(pts):
        pts = np.atleast_2d(pts)
        if len(vortices) == 0:
            return np.full(len(pts), h_far)
        d = np.min(np.linalg.norm(pts[:, None, :] - vortices[None], axis=2), axis=1)
        return np.clip(grading * d, h_near, h_far)

    return h


def _hex_lattice(lo, hi, s):
    dy = s * np.sqrt(3) / 2
    ys = np.arange(lo[1], hi[1] + dy, dy)
    rows = []
    for k, y in enumerate(ys):
        xs = np.arange(lo[0] + (s / 2) * (k % 2), hi[0] + s, s)
        rows.append(np.column_stack([xs, np.full_like(xs, y)]))
    return np.vstack(rows)


def _initial_points(domain, vortices, h, h_far, h_near, grading, rng):
    """Hierarchical hex lattices, one level per halving of the size, thinned to density 1/h^2."""
    lo, hi = np.array([-1.0, -1.0]), np.array([1.0, 1.0])
    if domain.kind == "polygon":
        v = np.asarray(domain.vertices)
        lo, hi = v.min(axis=0), v.max(axis=0)
    out = []
    s = h_far
    top = True
    while True:
        if top:
            cand = _hex_lattice(lo, hi, s)
        else:
            reach = 2 * s / grading
            cand = np.vstack([_hex_lattice(x - reach, x + reach, s) for x in vortices])
            # boxes around neighbouring vortices overlap
            _, first = np.unique(np.round(cand / (1e-3 * s)).astype(np.int64), axis=0, return_index=True)
            cand = cand[np.sort(first)]
        hc = h(cand)
        keep = hc >= s * (1 - 1e-12)
        if not top:
            keep &= hc < 2 * s
        cand, hc = cand[keep], hc[keep]
        out.append(cand[rng.random(len(cand)) < (s / hc) ** 2])
        top = False
        if s <= h_near or len(vortices) == 0:
            break
        s = s / 2
    return np.vstack(out)


def _sdf_grad(sdf, pts, eps):
    dx = (sdf(pts + [eps, 0]) - sdf(pts - [eps, 0])) / (2 * eps)
    dy = (sdf(pts + [0, eps]) - sdf(pts - [0, eps])) / (2 * eps)
    return np.column_stack([dx, dy])


def _bars(tri):
    e = np.sort(np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1)
    return np.unique(e, axis=0)


def _keep_inside(sdf, p, tri, geps):
    inside = sdf(p[tri].mean(axis=1)) < -geps
    for a, b in ((0, 1), (1, 2), (2, 0)):
        # chords of concave boundary arcs bulge outward by about L^2 / 8R
        length = np.linalg.norm(p[tri[:, a]] - p[tri[:, b]], axis=1)
        inside &= sdf(0.5 * (p[tri[:, a]] + p[tri[:, b]])) < geps + 0.2 * length
    return tri[inside]


def _distmesh(sdf, h, p, nfix, hmin, maxiter=600, dptol=1e-3, ttol=0.1, fscale=1.2, deltat=0.2):
    geps = 1e-3 * hmin
    deps = np.sqrt(np.finfo(float).eps) * hmin
    pold = np.full_like(p, np.inf)
    tri = bars = None
    for _ in range(maxiter):
        hp = h(p)
        if np.max(np.linalg.norm(p - pold, axis=1) / hp) > ttol:
            pold = p.copy()
            tri = _keep_inside(sdf, p, Delaunay(p).simplices, geps)
            bars = _bars(tri)
        barvec = p[bars[:, 0]] - p[bars[:, 1]]
        L = np.linalg.norm(barvec, axis=1)
        hb = h(0.5 * (p[bars[:, 0]] + p[bars[:, 1]]))
        L0 = hb * fscale * np.sqrt(np.sum(L**2) / np.sum(hb**2))
        F = np.maximum(L0 - L, 0.0)
        fvec = (F / L)[:, None] * barvec
        ftot = np.zeros_like(p)
        np.add.at(ftot, bars[:, 0], fvec)
        np.add.at(ftot, bars[:, 1], -fvec)
        ftot[:nfix] = 0.0
        prev = p
        p = p + deltat * ftot
        d = sdf(p)
        out = d > 0
        if np.any(out):
            p[out] -= d[out, None] * _sdf_grad(sdf, p[out], deps)
        move = np.linalg.norm(p - prev, axis=1) / hp
        if np.max(move) < dptol:
            break
    return p


def _triad(center, side, angle):
    r = side / np.sqrt(3)
    a = angle + 2 * np.pi * np.arange(3) / 3
    return center + r * np.column_stack([np.cos(a), np.sin(a)])


def build_mesh(domain, vortices=(), h_far=0.1, h_near=None, grading=GRADING, seed=0):
    """Graded triangulation whose local size is clip(grading*dist(x, vortices), h_near, h_far).

    Each vortex sits at the centroid of a fixed equilateral triangle of side h_near,
    so vortices are never mesh vertices.
    """
    vortices = np.asarray(vortices, dtype=float).reshape(-1, 2)
    if h_near is None:
        h_near = h_far / 20
    if not (0 < h_near <= h_far):
        raise InvalidConfig(f"need 0 < h_near <= h_far, got {h_near}, {h_far}")
    for i, x in enumerate(vortices):
        if domain.sdf(x[None])[0] > -h_near:
            raise InvalidConfig(f"vortex {i} at ({x[0]:g}, {x[1]:g}) is not strictly inside the domain")
    for i in range(len(vortices)):
        for k in range(i):
            if np.linalg.norm(vortices[i] - vortices[k]) < 2 * h_near:
                raise InvalidConfig(f"vortices {k} and {i} coincide at mesh resolution")
    h = size_function(vortices, h_far, h_near, grading)
    for attempt in range(4):
        rng = np.random.default_rng(seed + attempt)
        angle = 0.3 + 0.7 * attempt
        fixed = [domain.corners()] + [_triad(x, h_near, angle) for x in vortices]
        fixed = np.vstack(fixed) if fixed else np.zeros((0, 2))
        bnd = np.vstack([domain.loop_samples(ell, h) for ell in range(domain.n_components)])
        if len(fixed):
            far = np.min(np.linalg.norm(bnd[:, None] - fixed[None], axis=2), axis=1) > 0.5 * h(bnd)
            bnd = bnd[far]
        inner = _initial_points(domain, vortices, h, h_far, h_near, grading, rng)
        inner = inner[domain.sdf(inner) < -0.5 * h(inner)]
        if len(fixed):
            inner = inner[np.min(np.linalg.norm(inner[:, None] - fixed[None], axis=2), axis=1) > 0.6 * h(inner)]
        p0 = np.vstack([fixed, bnd, inner])
        p = _distmesh(domain.sdf, h, p0, len(fixed), h_near)
        mesh = _finalize(domain, p, vortices, h_far, h_near, geps=1e-3 * h_near)
        if mesh is not None and mesh.min_angle() >= 20.0:
            return mesh
    if mesh is None:
        raise InvalidDomain("mesh generation failed to place vortices inside triangles")
    return mesh


def _finalize(domain, p, vortices, h_far, h_near, geps):
    tri = _keep_inside(domain.sdf, p, Delaunay(p).simplices, geps)
    onb = np.abs(domain.sdf(p)) < 1e3 * geps
    # drop flat boundary slivers (three boundary vertices, tiny angle)
    while True:
        mesh_tmp = _orient(p, tri)
        pts = p[mesh_tmp]
        ang = []
        for a in range(3):
            u = pts[:, (a + 1) % 3] - pts[:, a]
            v = pts[:, (a + 2) % 3] - pts[:, a]
            c = np.einsum("ij,ij->i", u, v) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
            ang.append(np.degrees(np.arccos(np.clip(c, -1, 1))))
        minang = np.min(ang, axis=0)
        bad = np.all(onb[mesh_tmp], axis=1) & (minang < 15.0)
        if not np.any(bad):
            tri = mesh_tmp
            break
        tri = mesh_tmp[~bad]
    used = np.unique(tri)
    remap = -np.ones(len(p), dtype=int)
    remap[used] = np.arange(len(used))
    p = p[used]
    tri = remap[tri]
    edges = np.vstack([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
    key = np.sort(edges, axis=1)
    _, inv, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    if np.any(counts > 2):
        raise InvalidDomain("non-conforming triangulation")
    bedges = edges[counts[inv] == 1]
    tags = domain.component_of(0.5 * (p[bedges[:, 0]] + p[bedges[:, 1]]))
    if len(vortices):
        d = np.min(np.linalg.norm(p[:, None] - vortices[None], axis=2), axis=1)
    else:
        d = np.full(len(p), np.inf)
    mesh = Mesh(p, tri, bedges, tags, d, float(h_far), float(h_near))
    if len(vortices):
        idx, bary = mesh.locate(vortices)
        if np.any(idx < 0) or np.any(bary.min(axis=1) < 1e-3):
            return None
    _ = mesh.loops
    return mesh


def _orient(p, tri):
    e1 = p[tri[:, 1]] - p[tri[:, 0]]
    e2 = p[tri[:, 2]] - p[tri[:, 0]]
    neg = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    tri = tri.copy()
    tri[neg] = tri[neg][:, [0, 2, 1]]
    return tri


def write_mesh(path, mesh):
    with open(path, "w") as f:
        f.write(f"{mesh.n_vertices} {len(mesh.boundary_edges)} {len(mesh.triangles)}\n")
        for x, y in mesh.points:
            f.write(f"{x:.17g} {y:.17g}\n")
        for i, j, k in mesh.triangles:
            f.write(f"{i} {j} {k}\n")
        for (i, j), t in zip(mesh.boundary_edges, mesh.boundary_tags):
            f.write(f"{i} {j} {t}\n")


def read_mesh(path, h_far=np.nan, h_near=np.nan):
    with open(path) as f:
        nv, ne, nt = map(int, f.readline().split())
        rows = [f.readline().split() for _ in range(nv + nt + ne)]
    pts = np.array(rows[:nv], dtype=float)
    tri = np.array(rows[nv : nv + nt], dtype=int)
    b = np.array(rows[nv + nt :], dtype=int).reshape(-1, 3)
    return Mesh(pts, tri, b[:, :2].copy(), b[:, 2].copy(), np.full(nv, np.inf), h_far, h_near)


def check_inside(domain, points, what="point"):
    for i, x in enumerate(np.atleast_2d(points)):
        if domain.sdf(np.asarray(x)[None])[0] >= 0:
            raise OutOfDomain(f"{what} {i} at ({x[0]:g}, {x[1]:g}) lies outside the domain")
