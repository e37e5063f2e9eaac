"""P1 finite elements for the scalar Laplacian: assembly, Dirichlet/Neumann solves, disk oracle."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .errors import OutOfDomain, SolveFailure

# 4-point Gauss-Legendre on [0, 1] for boundary edges
_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)
EDGE_NODES = 0.5 * (_GL_X + 1.0)
EDGE_WEIGHTS = 0.5 * _GL_W


def _cached(mesh, key, factory):
    store = mesh.__dict__.setdefault("_solver_cache", {})
    if key not in store:
        store[key] = factory()
    return store[key]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Piecewise-linear field given by its vertex values."""

    mesh: object
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def gradients(self):
        """Constant gradient on each triangle, shape (T, 2)."""
        return np.einsum("tk,tkd->td", self.values[self.mesh.triangles], self.mesh.basis_gradients)

    def __call__(self, pts):
        pts = np.atleast_2d(pts)
        idx, bary = self.mesh.locate(pts)
        if np.any(idx < 0):
            raise OutOfDomain("evaluation point outside the mesh")
        return np.einsum("ik,ik->i", self.values[self.mesh.triangles[idx]], bary)

    @cached_property
    def recovered_gradient(self):
        """Vertex gradients by area-weighted averaging of the adjacent triangle gradients."""
        m = self.mesh
        acc = np.zeros((m.n_vertices, 2))
        wsum = np.zeros(m.n_vertices)
        for a in range(3):
            np.add.at(acc, m.triangles[:, a], m.areas[:, None] * self.gradients)
            np.add.at(wsum, m.triangles[:, a], m.areas)
        return acc / wsum[:, None]

    def recovered_gradient_at(self, pts):
        """Continuous gradient: P1 interpolation of the recovered vertex gradients."""
        pts = np.atleast_2d(pts)
        idx, bary = self.mesh.locate(pts)
        if np.any(idx < 0):
            raise OutOfDomain("evaluation point outside the mesh")
        return np.einsum("ik,ikd->id", bary, self.recovered_gradient[self.mesh.triangles[idx]])


def gradient_at(field, point, tol=1e-10):
    """Gradient of the containing triangle; averaged over neighbours on edges and at vertices."""
    point = np.asarray(point, dtype=float).reshape(2)
    m = field.mesh
    idx, bary = m.locate(point[None])
    if idx[0] < 0:
        raise OutOfDomain(f"point ({point[0]:g}, {point[1]:g}) outside the mesh")
    if bary.min() > tol:
        return field.gradients[idx[0]].copy()
    near = np.flatnonzero(np.linalg.norm(m.centroids - point, axis=1) <= m.diameters + tol)
    b = m.barycentric(near, np.repeat(point[None], len(near), axis=0))
    touching = near[b.min(axis=1) >= -tol]
    w = m.areas[touching]
    return (w[:, None] * field.gradients[touching]).sum(axis=0) / w.sum()


def stiffness(mesh, weights=None):
    """Sum over triangles of area * grad(l_a) . A grad(l_b).

    weights: None (identity), per-triangle scalars (T,) or per-triangle tensors (T, 2, 2).
    """
    g = mesh.basis_gradients
    if weights is None:
        local = np.einsum("tad,tbd->tab", g, g)
    else:
        weights = np.asarray(weights)
        if weights.ndim == 1:
            local = weights[:, None, None] * np.einsum("tad,tbd->tab", g, g)
        else:
            local = np.einsum("tad,tde,tbe->tab", g, weights, g)
    local = local * mesh.areas[:, None, None]
    tri = mesh.triangles
    rows = np.repeat(tri, 3, axis=1).ravel()
    cols = np.tile(tri, (1, 3)).ravel()
    n = mesh.n_vertices
    return sp.csc_matrix((local.ravel(), (rows, cols)), shape=(n, n))


def gradient_operator(mesh):
    """Sparse map from vertex values to stacked triangle gradients (gx_0, gy_0, gx_1, ...)."""

    def build():
        g = mesh.basis_gradients
        T = len(mesh.triangles)
        rows = (2 * np.arange(T)[:, None, None] + np.arange(2)[None, None, :]).repeat(3, axis=1)
        cols = np.repeat(mesh.triangles[:, :, None], 2, axis=2)
        return sp.csr_matrix((g.ravel(), (rows.ravel(), cols.ravel())), shape=(2 * T, mesh.n_vertices))

    return _cached(mesh, "gradient_operator", build)


class DirichletSolver:
    """Factorization of the interior block of a (weighted) stiffness matrix."""

    def __init__(self, mesh, K=None):
        self.mesh = mesh
        self.K = stiffness(mesh) if K is None else K.tocsc()
        self.inner = mesh.interior_vertices
        self.bnd = mesh.boundary_vertices
        self.K_ii = self.K[self.inner][:, self.inner].tocsc()
        self.K_ib = self.K[self.inner][:, self.bnd].tocsc()
        try:
            self.lu = splu(self.K_ii, permc_spec="COLAMD")
        except RuntimeError as exc:
            raise SolveFailure(f"stiffness factorization failed: {exc}") from exc

    def solve_interior(self, rhs):
        x = self.lu.solve(np.asarray(rhs, dtype=float))
        if not np.all(np.isfinite(x)):
            raise SolveFailure("non-finite solution")
        return x

    def extend(self, boundary_values, rhs=None):
        """Vertex values with the given trace and K_ii x = rhs - K_ib g."""
        b = -self.K_ib @ boundary_values
        if rhs is not None:
            b = b + rhs
        x = self.solve_interior(b)
        out = np.zeros(self.mesh.n_vertices)
        out[self.bnd] = boundary_values
        out[self.inner] = x
        res = np.linalg.norm(self.K_ii @ x - b)
        if res > 1e-10 * max(1.0, np.linalg.norm(b)):
            raise SolveFailure(f"linear residual {res:.3e} too large")
        return out

    def dual_norm(self, r):
        """sqrt(r . K_ii^{-1} r) for an interior residual vector."""
        return float(np.sqrt(max(r @ self.lu.solve(r), 0.0)))


def laplace_solver(mesh):
    return _cached(mesh, "dirichlet", lambda: DirichletSolver(mesh))


def solve_dirichlet(mesh, boundary_values):
    """Discrete harmonic extension; boundary_values align with mesh.boundary_vertices or have length V."""
    bv = np.asarray(boundary_values, dtype=float)
    if bv.shape == (mesh.n_vertices,):
        bv = bv[mesh.boundary_vertices]
    if bv.shape != (len(mesh.boundary_vertices),):
        raise ValueError("boundary values must be given on every boundary vertex")
    return ScalarField(mesh, laplace_solver(mesh).extend(bv))


class NeumannSolver:
    def __init__(self, mesh):
        self.mesh = mesh
        K = stiffness(mesh).tocsc()
        keep = np.arange(1, mesh.n_vertices)
        self.lu = splu(K[keep][:, keep].tocsc(), permc_spec="COLAMD")
        self.K = K

    def solve(self, load):
        """Solution of K u = load (load projected onto the compatible subspace), u[0] = 0."""
        load = np.asarray(load, dtype=float)
        m = self.mesh
        bmass = boundary_mass(m)
        load = load - load.sum() * bmass / bmass.sum()
        u = np.zeros(m.n_vertices)
        u[1:] = self.lu.solve(load[1:])
        res = np.linalg.norm(self.K @ u - load)
        if res > 1e-9 * max(1.0, np.linalg.norm(load)):
            raise SolveFailure(f"Neumann residual {res:.3e} too large")
        return u


def solve_neumann(mesh, load):
    return _cached(mesh, "neumann", lambda: NeumannSolver(mesh)).solve(load)


@dataclass(frozen=True)
class BoundaryQuadrature:
    """Gauss points on boundary edges; tangents follow the edge orientation (interior on the left)."""

    points: np.ndarray
    weights: np.ndarray
    edge: np.ndarray
    local: np.ndarray
    tangents: np.ndarray
    normals: np.ndarray
    tags: np.ndarray


def boundary_quadrature(mesh):
    def build():
        e = mesh.boundary_edges
        a, b = mesh.points[e[:, 0]], mesh.points[e[:, 1]]
        length = np.linalg.norm(b - a, axis=1)
        t = (b - a) / length[:, None]
        n = np.column_stack([t[:, 1], -t[:, 0]])
        s = EDGE_NODES
        pts = a[:, None, :] + s[None, :, None] * (b - a)[:, None, :]
        w = length[:, None] * EDGE_WEIGHTS[None, :]
        k = len(s)
        return BoundaryQuadrature(
            points=pts.reshape(-1, 2),
            weights=w.ravel(),
            edge=np.repeat(np.arange(len(e)), k),
            local=np.tile(np.column_stack([1 - s, s]), (len(e), 1)),
            tangents=np.repeat(t, k, axis=0),
            normals=np.repeat(n, k, axis=0),
            tags=np.repeat(mesh.boundary_tags, k),
        )

    return _cached(mesh, "boundary_quadrature", build)


def boundary_load(mesh, values):
    """Vector of integrals of values * psi_i over the boundary, values given at boundary Gauss points."""
    bq = boundary_quadrature(mesh)
    e = mesh.boundary_edges[bq.edge]
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, e[:, 0], bq.weights * values * bq.local[:, 0])
    np.add.at(out, e[:, 1], bq.weights * values * bq.local[:, 1])
    return out


def boundary_mass(mesh):
    e = mesh.boundary_edges
    length = np.linalg.norm(mesh.points[e[:, 1]] - mesh.points[e[:, 0]], axis=1)
    out = np.zeros(mesh.n_vertices)
    np.add.at(out, e[:, 0], 0.5 * length)
    np.add.at(out, e[:, 1], 0.5 * length)
    return out


def boundary_trace(field_values, mesh):
    """P1 values of a vertex field at the boundary Gauss points."""
    bq = boundary_quadrature(mesh)
    e = mesh.boundary_edges[bq.edge]
    return field_values[e[:, 0]] * bq.local[:, 0] + field_values[e[:, 1]] * bq.local[:, 1]


def normal_flux(field, tag=None):
    """Consistent Galerkin flux: sum over boundary vertices of (K u)_i, optionally one component."""
    m = field.mesh
    r = laplace_solver(m).K @ field.values
    verts = m.boundary_vertices if tag is None else np.unique(m.boundary_edges[m.boundary_tags == tag])
    return float(r[verts].sum())


def poisson_disk_oracle(boundary, point, n_nodes=2048):
    """Harmonic extension into the unit disk by the trapezoidal Poisson-kernel rule.

    boundary: callable of the angle, or samples at angles 2*pi*k/N.
    Spectrally accurate for smooth data.
    """
    point = np.asarray(point, dtype=float).reshape(2)
    r = np.hypot(*point)
    if r >= 1.0:
        raise OutOfDomain(f"point ({point[0]:g}, {point[1]:g}) not inside the unit disk")
    if callable(boundary):
        t = 2 * np.pi * np.arange(n_nodes) / n_nodes
        f = np.asarray(boundary(t), dtype=float)
    else:
        f = np.asarray(boundary, dtype=float)
        t = 2 * np.pi * np.arange(len(f)) / len(f)
    phi = np.arctan2(point[1], point[0])
    kernel = (1 - r * r) / (1 - 2 * r * np.cos(t - phi) + r * r)
    return float(np.mean(kernel * f))
