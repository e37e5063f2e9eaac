"""Vortex configurations, canonical singular harmonic maps and their currents.

The canonical map is u_x = exp(i phi) * w_x where w_x is the product of the vortex
factors ((y - x_j)/|y - x_j|)^{d_j} (and, on the annulus, an anchor factor placed in
the hole) and phi is the discrete harmonic extension of the boundary phase of
g * conj(w_x). Its current j u_x = w-current (closed form) + grad phi.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .errors import IncompatibleDegrees, InvalidConfig, SingularPoint, TransportTooFar
from .geometry import perp, unwrap_phase, winding_of_loop
from .laplace import ScalarField, normal_flux, solve_dirichlet
from .quadrature import singular_kernel


@dataclass(frozen=True, eq=False)
class VortexConfig:
    points: np.ndarray
    degrees: np.ndarray
    domain: object = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        deg = np.array(self.degrees, dtype=int).reshape(-1)
        if len(pts) == 0:
            raise InvalidConfig("a configuration needs at least one vortex")
        if len(deg) != len(pts):
            raise InvalidConfig("one degree per vortex is required")
        if not np.all(np.isfinite(pts)):
            raise InvalidConfig("vortex coordinates must be finite")
        pts.setflags(write=False)
        deg.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "degrees", deg)
        for i in range(len(pts)):
            for k in range(i):
                if np.linalg.norm(pts[i] - pts[k]) < 1e-12:
                    raise InvalidConfig(f"vortex {i} coincides with vortex {k}")
        if self.domain is not None:
            sd = self.domain.sdf(pts)
            bad = np.flatnonzero(sd >= 0)
            if len(bad):
                i = int(bad[0])
                raise InvalidConfig(f"vortex {i} at ({pts[i, 0]:g}, {pts[i, 1]:g}) is not strictly inside the domain")

    @property
    def n(self):
        return len(self.points)

    @cached_property
    def min_separation(self):
        if self.n < 2:
            return np.inf
        d = np.linalg.norm(self.points[:, None] - self.points[None], axis=2)
        return float(d[np.triu_indices(self.n, 1)].min())

    @cached_property
    def boundary_distance(self):
        if self.domain is None:
            return np.inf
        return float(-self.domain.sdf(self.points).max())

    @property
    def safe_radius(self):
        """Half the smallest pairwise or boundary distance."""
        return 0.5 * min(self.min_separation, self.boundary_distance)

    def moved(self, new_points):
        return VortexConfig(np.asarray(new_points, dtype=float).reshape(-1, 2), self.degrees, self.domain)

    @property
    def flat(self):
        return self.points.ravel().copy()


@dataclass(frozen=True)
class CompatibilityReport:
    ok: bool
    outer_degree: int
    vortex_sum: int
    inner_degrees: tuple

    def __bool__(self):
        return self.ok

    def __str__(self):
        rhs = " + ".join([str(self.vortex_sum)] + [str(e) for e in self.inner_degrees])
        return f"deg g|outer = {self.outer_degree} {'=' if self.ok else '!='} {rhs}"


def check_compatibility(domain, g, config):
    """deg(g|outer) == sum(d_j) + sum over inner loops of deg(g|loop)."""
    inner = tuple(g.degree(ell) for ell in range(1, domain.n_components))
    outer = g.degree(0)
    s = int(np.sum(config.degrees))
    return CompatibilityReport(outer == s + sum(inner), outer, s, inner)


def singular_current(config, point):
    point = np.asarray(point, dtype=float).reshape(2)
    if np.min(np.linalg.norm(config.points - point, axis=1)) < 1e-12:
        raise SingularPoint(f"point ({point[0]:g}, {point[1]:g}) is a vortex")
    return singular_kernel(point[None], config.points, config.degrees)[0]


def vortex_factor(pts, sources, degrees):
    """prod_s ((y - v_s)/|y - v_s|)^{d_s} as complex numbers."""
    pts = np.atleast_2d(pts)
    z = np.ones(len(pts), dtype=complex)
    for v, d in zip(np.atleast_2d(sources), degrees):
        h = (pts[:, 0] - v[0]) + 1j * (pts[:, 1] - v[1])
        z *= (h / np.abs(h)) ** int(d)
    return z


@dataclass(frozen=True, eq=False)
class CurrentField:
    """j = sum_s d_s (y - v_s)^perp/|y - v_s|^2 + grad(regular), regular piecewise linear."""

    mesh: object
    sources: np.ndarray
    degrees: np.ndarray
    regular: np.ndarray

    @cached_property
    def regular_gradients(self):
        return ScalarField(self.mesh, self.regular).gradients

    def singular_part(self, pts):
        return singular_kernel(np.atleast_2d(pts), self.sources, self.degrees)

    def regular_part(self, pts):
        idx, _ = self.mesh.locate(np.atleast_2d(pts))
        if np.any(idx < 0):
            from .errors import OutOfDomain

            raise OutOfDomain("current evaluated outside the mesh")
        return self.regular_gradients[idx]

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = np.linalg.norm(pts[:, None] - self.sources[None], axis=2)
        if d.size and d.min() < 1e-12:
            raise SingularPoint("current evaluated at a vortex")
        return self.singular_part(pts) + self.regular_part(pts)

    def smoothed(self, pts):
        """Singular part plus the continuous recovered gradient of the regular part."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.singular_part(pts) + ScalarField(self.mesh, self.regular).recovered_gradient_at(pts)

    def potential(self, pts):
        return ScalarField(self.mesh, self.regular)(pts)

    def with_correction(self, phi_values):
        return replace(self, regular=self.regular + np.asarray(phi_values, dtype=float))

    def write_csv(self, path, pts):
        j = self(pts)
        with open(path, "w") as f:
            f.write("x,y,jx,jy\n")
            for (x, y), (a, b) in zip(np.atleast_2d(pts), j):
                f.write(f"{x:.17g},{y:.17g},{a:.17g},{b:.17g}\n")


@dataclass(frozen=True, eq=False)
class CanonicalMap:
    domain: object
    datum: object
    config: VortexConfig
    mesh: object
    anchors: np.ndarray
    anchor_degrees: np.ndarray
    phase: ScalarField

    @property
    def sources(self):
        return np.vstack([self.config.points, self.anchors])

    @property
    def source_degrees(self):
        return np.concatenate([self.config.degrees, self.anchor_degrees]).astype(float)

    def current(self, correction=None):
        reg = self.phase.values if correction is None else self.phase.values + correction
        return CurrentField(self.mesh, self.sources, self.source_degrees, reg)

    def evaluate(self, pts, correction=None):
        """u(y) = exp(i (phi + correction)(y)) * w_x(y)."""
        pts = np.atleast_2d(pts)
        reg = self.phase.values if correction is None else self.phase.values + correction
        return np.exp(1j * ScalarField(self.mesh, reg)(pts)) * vortex_factor(pts, self.sources, self.source_degrees)

    @cached_property
    def theta_flux(self):
        """Flux of grad phi through each inner loop (the vortex terms carry no flux)."""
        return tuple(normal_flux(self.phase, tag=ell) for ell in range(1, self.domain.n_components))


def _boundary_defect(domain, g, mesh, sources, degrees):
    """Continuous lift of arg(g * conj(w)) on every boundary loop, aligned with mesh.boundary_vertices."""
    values = np.zeros(mesh.n_vertices)
    for ell, loop in mesh.loops.items():
        pts = mesh.points[loop]
        s = g.value(domain, ell, pts) * np.conj(vortex_factor(pts, sources, degrees))
        w = winding_of_loop(s)
        if w != 0:
            raise IncompatibleDegrees(f"boundary phase defect winds {w} times on component {ell}")
        values[loop] = unwrap_phase(s)
    return values[mesh.boundary_vertices]


def build_canonical_map(domain, g, config, mesh):
    report = check_compatibility(domain, g, config)
    if not report:
        raise IncompatibleDegrees(str(report))
    anchors = domain.anchors
    anchor_degrees = np.array([g.degree(ell) for ell in range(1, domain.n_components)], dtype=float)
    sources = np.vstack([config.points, anchors])
    degrees = np.concatenate([config.degrees, anchor_degrees])
    bv = _boundary_defect(domain, g, mesh, sources, degrees)
    phi = solve_dirichlet(mesh, bv)
    if domain.n_components == 2:
        # the lift on the inner loop is fixed up to 2*pi*k; pick the k with the smallest flux
        inner = np.zeros(mesh.n_vertices)
        inner[mesh.loops[1]] = 1.0
        omega = solve_dirichlet(mesh, inner[mesh.boundary_vertices])
        k = np.rint(-normal_flux(phi, 1) / (2 * np.pi * normal_flux(omega, 1)))
        if k != 0:
            phi = ScalarField(mesh, phi.values + 2 * np.pi * k * omega.values)
    return CanonicalMap(domain, g, config, mesh, anchors, anchor_degrees, phi)


def transport_config(base, new_points):
    """Canonical map for moved vortices on the same mesh, keeping the boundary datum and gauge."""
    new_points = np.asarray(new_points, dtype=float).reshape(base.config.points.shape)
    if np.array_equal(new_points, base.config.points):
        return base
    cfg = base.config
    limit = cfg.safe_radius
    shift = np.linalg.norm(new_points - cfg.points, axis=1)
    if np.any(shift > limit):
        j = int(np.argmax(shift - limit))
        raise TransportTooFar(f"vortex {j} moves {shift[j]:.3g} > {limit:.3g}")
    new_cfg = cfg.moved(new_points)
    mesh = base.mesh
    bpts = mesh.points[mesh.boundary_vertices]
    theta = np.zeros(len(bpts))
    for xo, xn, d in zip(cfg.points, new_points, cfg.degrees):
        zo = (bpts[:, 0] - xo[0]) + 1j * (bpts[:, 1] - xo[1])
        zn = (bpts[:, 0] - xn[0]) + 1j * (bpts[:, 1] - xn[1])
        ang = np.angle(zo / zn)
        if np.max(np.abs(ang)) >= np.pi / 2:
            raise TransportTooFar("boundary correction loop is not small")
        theta += d * ang
    for ell, loop in mesh.loops.items():
        pos = np.searchsorted(mesh.boundary_vertices, loop)
        if winding_of_loop(np.exp(1j * theta[pos])) != 0:
            raise TransportTooFar(f"correction winds around component {ell}")
    corr = solve_dirichlet(mesh, theta)
    phase = ScalarField(mesh, base.phase.values + corr.values)
    return replace(base, config=new_cfg, phase=phase)


def circulation(current, center, radius, n_points=256):
    """Trapezoidal line integral of j . tau around a circle (counter-clockwise)."""
    center = np.asarray(center, dtype=float).reshape(2)
    dist = np.linalg.norm(current.sources - center, axis=1)
    if np.any(np.abs(dist - radius) < 1e-12):
        raise SingularPoint("circle passes through a vortex")
    t = 2 * np.pi * np.arange(n_points) / n_points
    u = np.column_stack([np.cos(t), np.sin(t)])
    pts = center + radius * u
    js = current.singular_part(pts)
    sing = np.sum(np.einsum("ij,ij->i", js, perp(u))) * radius * 2 * np.pi / n_points
    # the regular part is a gradient: its line integral along the sampled polygon telescopes
    pot = current.potential(pts)
    reg = np.sum(np.diff(np.concatenate([pot, pot[:1]])))
    return float(sing + reg)
