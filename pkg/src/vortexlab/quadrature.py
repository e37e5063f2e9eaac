"""Quadrature for integrands built from currents with point singularities.

A current is j(x) = c_T + sum_s d_s (x - v_s)^perp / |x - v_s|^2 with c_T constant on
each triangle. Triangles far from every source get a degree-5 Gauss rule, triangles
at intermediate distance get the same rule on four children, and triangles next to
a source are split into a signed fan about it and integrated in polar coordinates
with Gauss-Jacobi weights matching the r^{-p} growth. Per triangle the weights sum
to the area exactly and the singular current is shifted so that its weighted sum
equals its exact integral (a boundary integral of d ln|x - v|); this keeps the p = 2
problem exactly solved by the zero correction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi

from .geometry import perp

# Dunavant degree-5 rule, barycentric coordinates and weights (sum to 1)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
DUNAVANT5_BARY = np.array(
    [
        [1 / 3, 1 / 3, 1 / 3],
        [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
        [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
    ]
)
DUNAVANT5_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)

NEAR_FACTOR = 1.5
MID_FACTOR = 4.0


def singular_kernel(pts, sources, degrees):
    """sum_s d_s (x - v_s)^perp / |x - v_s|^2 evaluated at pts, shape (Q, 2)."""
    pts = np.atleast_2d(pts)
    out = np.zeros_like(pts, dtype=float)
    for v, d in zip(np.atleast_2d(sources), degrees):
        h = pts - v
        out += d * perp(h) / np.einsum("ij,ij->i", h, h)[:, None]
    return out


def _log_edge_integral(a, b, v):
    """Exact integral of ln|x - v| over the segment [a, b] (vectorized over rows)."""
    ab = b - a
    L = np.linalg.norm(ab, axis=-1)
    t = ab / L[..., None]
    w = v - a
    s0 = np.einsum("...i,...i->...", w, t)
    h = np.abs(t[..., 0] * w[..., 1] - t[..., 1] * w[..., 0])

    def F(u):
        r2 = u * u + h * h
        lg = np.where(r2 > 0, u * np.log(np.where(r2 > 0, r2, 1.0)), 0.0)
        at = np.where(h > 0, 2 * h * np.arctan2(u, np.where(h > 0, h, 1.0)), 0.0)
        return 0.5 * (lg - 2 * u + at)

    return F(L - s0) - F(-s0)


def exact_singular_means(mesh, sources, degrees, tri=None):
    """Exact integral over each triangle of the singular current, shape (T, 2)."""
    tri = mesh.triangles if tri is None else mesh.triangles[tri]
    p = mesh.points[tri]
    out = np.zeros((len(tri), 2))
    for v, d in zip(np.atleast_2d(sources), degrees):
        for a in range(3):
            A, B = p[:, a], p[:, (a + 1) % 3]
            t = (B - A) / np.linalg.norm(B - A, axis=1)[:, None]
            out += d * t * _log_edge_integral(A, B, v)[:, None]
    return out


@dataclass(frozen=True, eq=False)
class CurrentQuadrature:
    n_tri: int
    tri: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    singular: np.ndarray

    def per_triangle(self, values):
        """Sum of weight * value over the points of each triangle."""
        return np.bincount(self.tri, weights=self.weights * values, minlength=self.n_tri)


def _gauss_rule(corners):
    """Degree-5 rule on triangles given by corners (K, 3, 2): points (K, 7, 2), weights (K, 7)."""
    pts = np.einsum("qk,tkd->tqd", DUNAVANT5_BARY, corners)
    e1, e2 = corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    return pts, area[:, None] * DUNAVANT5_W[None, :]


def _children(corners):
    a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
    ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
    return np.concatenate(
        [np.stack(t, axis=1) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))], axis=0
    )


class _PolarRule:
    def __init__(self, p, n_r=8, n_theta=6, max_arc=np.pi / 6):
        beta = 1.0 - p if p < 2.0 else 0.0
        x, w = roots_jacobi(n_r, 0.0, beta)
        self.beta = beta
        self.xr = 0.5 * (x + 1.0)  # nodes on [0, 1]
        self.wr = w * 0.5 ** (1 + beta) * self.xr ** (1 - beta)
        gx, gw = np.polynomial.legendre.leggauss(n_theta)
        self.xt, self.wt = 0.5 * (gx + 1.0), 0.5 * gw
        self.max_arc = max_arc

    def _side(self, a, b):
        """Increasing breakpoints on [a, b] within [0, pi/2), graded toward b."""
        s_start, s_end = np.pi / 2 - a, np.pi / 2 - b
        s = [s_end]
        while s[-1] < s_start:
            s.append(min(s_start, s[-1] * 4.0, s[-1] + self.max_arc))
        return np.pi / 2 - np.array(s[::-1])

    def _breaks(self, lo, hi):
        if lo >= 0:
            return self._side(lo, hi)
        if hi <= 0:
            return -self._side(-hi, -lo)[::-1]
        return np.concatenate([-self._side(0.0, -lo)[::-1], self._side(0.0, hi)[1:]])

    def fan(self, corners, v):
        """Points and signed weights integrating over a triangle via the fan about v."""
        pts, wts = [], []
        for k in range(3):
            a, b = corners[k], corners[(k + 1) % 3]
            ra, rb = a - v, b - v
            cross = ra[0] * rb[1] - ra[1] * rb[0]
            if abs(cross) < 1e-14 * max(ra @ ra, rb @ rb):
                continue
            ab = b - a
            nrm = np.array([ab[1], -ab[0]]) / np.linalg.norm(ab)
            h = ra @ nrm
            foot = nrm if h > 0 else -nrm  # unit direction from v to the line through a, b
            h = abs(h)
            fa = np.arctan2(foot[0] * ra[1] - foot[1] * ra[0], foot @ ra)
            fb = np.arctan2(foot[0] * rb[1] - foot[1] * rb[0], foot @ rb)
            sgn = 1.0 if fb > fa else -1.0
            lo, hi = min(fa, fb), max(fa, fb)
            br = self._breaks(lo, hi)
            left, right = br[:-1], br[1:]
            phi = (left[:, None] + (right - left)[:, None] * self.xt[None, :]).ravel()
            wphi = ((right - left)[:, None] * self.wt[None, :]).ravel() * sgn
            c, s = np.cos(phi), np.sin(phi)
            u = np.column_stack([foot[0] * c - foot[1] * s, foot[0] * s + foot[1] * c])
            R = h / c
            r = R[:, None] * self.xr[None, :]
            # (R/2)^{1+beta} w_k r_k^{1-beta} with r_k = R x_k collapses to R^2 * wr
            w = wphi[:, None] * R[:, None] ** 2 * self.wr[None, :]
            pts.append((v[None, None, :] + r[:, :, None] * u[:, None, :]).reshape(-1, 2))
            wts.append(w.ravel())
        return np.vstack(pts), np.concatenate(wts)


def build_current_quadrature(mesh, sources, degrees, p):
    """Quadrature points, weights and mean-corrected singular current for exponent p."""
    sources = np.asarray(sources, dtype=float).reshape(-1, 2)
    degrees = np.asarray(degrees, dtype=float)
    T = len(mesh.triangles)
    corners = mesh.points[mesh.triangles]
    ratio = np.full(T, np.inf)
    nearest = np.full(T, -1)
    n_near = np.zeros(T, dtype=int)
    for s, v in enumerate(sources):
        rs = np.linalg.norm(mesh.centroids - v, axis=1) / mesh.diameters
        n_near += rs < NEAR_FACTOR
        closer = rs < ratio
        nearest[closer] = s
        ratio[closer] = rs[closer]

    tris, pts, wts = [], [], []
    far = np.flatnonzero(ratio >= MID_FACTOR)
    P, W = _gauss_rule(corners[far])
    tris.append(np.repeat(far, P.shape[1]))
    pts.append(P.reshape(-1, 2))
    wts.append(W.ravel())

    mid = np.flatnonzero((ratio < MID_FACTOR) & (ratio >= NEAR_FACTOR))
    if len(mid):
        P, W = _gauss_rule(_children(corners[mid]))
        k = len(mid)
        P = P.reshape(4, k, -1, 2).transpose(1, 0, 2, 3).reshape(k, -1, 2)
        W = W.reshape(4, k, -1).transpose(1, 0, 2).reshape(k, -1)
        tris.append(np.repeat(mid, P.shape[1]))
        pts.append(P.reshape(-1, 2))
        wts.append(W.ravel())

    near = np.flatnonzero(ratio < NEAR_FACTOR)
    if len(near):
        rule = _PolarRule(p)
        for t in near:
            P, W = _near_rule(rule, corners[t], sources, depth=0)
            tris.append(np.full(len(W), t))
            pts.append(P)
            wts.append(W)

    tri = np.concatenate(tris)
    order = np.argsort(tri, kind="stable")
    tri = tri[order]
    points = np.vstack(pts)[order]
    weights = np.concatenate(wts)[order]

    # weights sum to the triangle area exactly
    wsum = np.bincount(tri, weights=weights, minlength=T)
    weights = weights * (mesh.areas / wsum)[tri]

    singular = singular_kernel(points, sources, degrees) if len(sources) else np.zeros_like(points)
    if len(sources):
        exact = exact_singular_means(mesh, sources, degrees)
        approx = np.column_stack([np.bincount(tri, weights=weights * singular[:, k], minlength=T) for k in range(2)])
        singular = singular + ((exact - approx) / mesh.areas[:, None])[tri]
    return CurrentQuadrature(T, tri, points, weights, singular)


def _near_rule(rule, corners, sources, depth):
    diam = max(np.linalg.norm(corners[i] - corners[(i + 1) % 3]) for i in range(3))
    c = corners.mean(axis=0)
    dist = np.linalg.norm(sources - c, axis=1) / diam
    close = np.flatnonzero(dist < NEAR_FACTOR)
    if len(close) == 0:
        P, W = _gauss_rule(_children(corners[None]))
        return P.reshape(-1, 2), W.ravel()
    if len(close) == 1 or depth >= 4:
        return rule.fan(corners, sources[np.argmin(dist)])
    pts, wts = [], []
    for child in _children(corners[None]):
        P, W = _near_rule(rule, child, sources, depth + 1)
        pts.append(P)
        wts.append(W)
    return np.vstack(pts), np.concatenate(wts)
