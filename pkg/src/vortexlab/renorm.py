"""Renormalized energy W(x) and its gradient.

Two independent evaluations of W:
  * rho-limit: the excised Dirichlet energy of the canonical current minus
    2 pi sum d_j^2 ln(1/rho), computed for several rho and extrapolated to rho = 0;
  * green: the Neumann problem for Phi (grad^perp Phi + grad Theta = j u) and the formula
        W = sum_{i != j} 2 pi d_i d_j ln(1/|x_i - x_j|) + int_dOmega Phi q
            - sum_j 2 pi d_j H_*(x_j) + int_dOmega Theta d_nu Theta,
    with q = -i g^{-1} d_tau g the phase speed of g.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadSchedule, IncompatibleDegrees
from .geometry import perp
from .laplace import (
    ScalarField,
    boundary_load,
    boundary_quadrature,
    boundary_trace,
    solve_neumann,
)
from .quadrature import build_current_quadrature, singular_kernel
from .vortex import build_canonical_map, check_compatibility


@dataclass
class EnergyReport:
    value: float
    method: str
    terms: dict = field(default_factory=dict)
    error_estimate: float = 0.0
    extras: dict = field(default_factory=dict)

    def lines(self):
        out = [f"method = {self.method}", f"W = {self.value:.17g}"]
        out += [f"{k} = {v:.17g}" for k, v in self.terms.items()]
        out.append(f"error_estimate = {self.error_estimate:.17g}")
        for k, v in self.extras.items():
            if np.ndim(v) == 0:
                out.append(f"{k} = {v:.17g}")
            else:
                out.append(f"{k} = " + " ".join(f"{x:.17g}" for x in np.ravel(v)))
        return out


@dataclass(frozen=True, eq=False)
class GreenData:
    domain: object
    datum: object
    config: object
    mesh: object
    H: ScalarField
    theta_alpha: float
    phase_speed: np.ndarray  # q at the boundary Gauss points

    def log_part(self, pts):
        pts = np.atleast_2d(pts)
        out = np.zeros(len(pts))
        for v, d in zip(self.config.points, self.config.degrees):
            out += d * np.log(np.linalg.norm(pts - v, axis=1))
        return out

    def Phi(self, pts):
        return self.H(pts) + self.log_part(pts)

    def theta(self, pts):
        pts = np.atleast_2d(pts)
        if self.theta_alpha == 0.0:
            return np.zeros(len(pts))
        return self.theta_alpha * np.log(np.hypot(pts[:, 0], pts[:, 1]))

    def theta_gradient(self, pts):
        pts = np.atleast_2d(pts)
        if self.theta_alpha == 0.0:
            return np.zeros_like(pts)
        return self.theta_alpha * pts / np.einsum("ij,ij->i", pts, pts)[:, None]

    def current(self, pts):
        """-(grad^perp Phi + grad Theta) reconstructed from the Green data, with sign flipped back."""
        pts = np.atleast_2d(pts)
        grad_h = self.H.gradients[self.mesh.locate(pts)[0]]
        sing = singular_kernel(pts, self.config.points, self.config.degrees)
        return perp(grad_h) + sing + self.theta_gradient(pts)


def boundary_phase_speed(domain, g, mesh):
    bq = boundary_quadrature(mesh)
    q = np.zeros(len(bq.weights))
    for ell in range(domain.n_components):
        sel = bq.tags == ell
        q[sel] = g.phase_speed(domain, ell, bq.points[sel], bq.tangents[sel])
    return q


def solve_linear_singular_problem(domain, g, config, mesh, canonical=None):
    """Neumann problem for H_* = Phi - sum d_j ln|x - x_j| and the annulus Theta = alpha ln r.

    alpha matches the flux of the canonical map through the inner loop, so that
    grad^perp Phi + grad Theta reproduces j u_x of that map.
    """
    if not check_compatibility(domain, g, config):
        raise IncompatibleDegrees(str(check_compatibility(domain, g, config)))
    bq = boundary_quadrature(mesh)
    q = boundary_phase_speed(domain, g, mesh)
    dnu_log = np.zeros(len(q))
    for v, d in zip(config.points, config.degrees):
        h = bq.points - v
        dnu_log += d * np.einsum("ij,ij->i", h, bq.normals) / np.einsum("ij,ij->i", h, h)
    H = solve_neumann(mesh, boundary_load(mesh, q - dnu_log))
    alpha = 0.0
    if domain.n_components == 2:
        if canonical is None:
            canonical = build_canonical_map(domain, g, config, mesh)
        # Theta = alpha ln r has flux -2 pi alpha through the inner loop
        alpha = -canonical.theta_flux[0] / (2 * np.pi)
    green = GreenData(domain, g, config, mesh, ScalarField(mesh, H), alpha, q)
    # fix the free constant: Phi has zero boundary mean
    phi_b = boundary_trace(H, mesh) + green.log_part(bq.points)
    shift = np.sum(bq.weights * phi_b) / np.sum(bq.weights)
    return GreenData(domain, g, config, mesh, ScalarField(mesh, H - shift), alpha, q)


def renorm_energy_green(green, g=None, config=None):
    cfg = green.config
    mesh = green.mesh
    bq = boundary_quadrature(mesh)
    pts, d = cfg.points, cfg.degrees.astype(float)
    pair = 0.0
    for i in range(cfg.n):
        for k in range(cfg.n):
            if i != k:
                pair += 2 * np.pi * d[i] * d[k] * np.log(1.0 / np.linalg.norm(pts[i] - pts[k]))
    phi_b = boundary_trace(green.H.values, mesh) + green.log_part(bq.points)
    boundary = float(np.sum(bq.weights * phi_b * green.phase_speed))
    self_term = -float(np.sum(2 * np.pi * d * green.H(pts)))
    theta_term = 0.0
    if green.theta_alpha != 0.0:
        dnu = np.einsum("ij,ij->i", green.theta_gradient(bq.points), bq.normals)
        theta_term = float(np.sum(bq.weights * green.theta(bq.points) * dnu))
    terms = {"pairwise": pair, "boundary": boundary, "self": self_term, "theta": theta_term}
    value = pair + boundary + self_term + theta_term
    return EnergyReport(value, "green", terms, error_estimate=mesh.h_far**2 * (1 + abs(value)))


def grad_W_phase(cmap):
    """4 pi d_j (j u_j)(x_j)^perp with u_j the map stripped of its own vortex factor."""
    cfg = cmap.config
    src, deg = cmap.sources, cmap.source_degrees
    grad_phi = cmap.phase.recovered_gradient_at(cfg.points)
    out = np.zeros((cfg.n, 2))
    for j in range(cfg.n):
        others = np.arange(len(src)) != j
        ju = grad_phi[j] + singular_kernel(cfg.points[j][None], src[others], deg[others])[0]
        out[j] = 4 * np.pi * cfg.degrees[j] * perp(ju)
    return out.ravel()


def grad_W_green(green, config=None):
    """-4 pi d_j (grad H_j(x_j) - grad^perp Theta(x_j)) with recovered vertex gradients."""
    cfg = green.config
    pts, d = cfg.points, cfg.degrees.astype(float)
    gH = green.H.recovered_gradient_at(pts)
    gT = green.theta_gradient(pts)
    out = np.zeros((cfg.n, 2))
    for j in range(cfg.n):
        gHj = gH[j].copy()
        for k in range(cfg.n):
            if k != j:
                h = pts[j] - pts[k]
                gHj += d[k] * h / (h @ h)
        out[j] = -4 * np.pi * d[j] * (gHj - perp(gT[j]))
    return out.ravel()


def _cutoff(t):
    """1 for t <= 0, 0 for t >= 1, C^2 quintic in between."""
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t * t)


def default_rho_schedule(cmap, n=5):
    cfg = cmap.config
    rho_max = min(0.1, 0.4 * cfg.safe_radius)
    rho_min = max(rho_max / 16, 3 * cmap.mesh.h_near)
    return np.geomspace(rho_max, rho_min, n)


def renorm_energy_rho_limit(cmap, rho_schedule=None, n_theta=256, n_r=48):
    """W from the excised energy int_{Omega minus balls B_rho} |j u|^2 - 2 pi sum d^2 ln(1/rho), rho -> 0.

    j = s + r with s the vortex kernels and r = grad phi + anchor kernels (bounded).
    The bounded and mixed parts are integrated over the mesh; the s-s part uses a
    partition of unity with polar quadrature around each vortex. The own-vortex
    kernel times grad phi integrates to zero on every circle because phi is
    continuous and single valued; that identity replaces sampling the piecewise
    constant gradient near the vortex.
    """
    cfg = cmap.config
    mesh = cmap.mesh
    rho = default_rho_schedule(cmap) if rho_schedule is None else np.asarray(rho_schedule, dtype=float)
    if len(rho) < 4 or np.any(np.diff(rho) >= 0):
        raise BadSchedule("need at least four strictly decreasing radii")
    if rho.min() <= 2 * mesh.h_near:
        raise BadSchedule(f"smallest radius {rho.min():.3g} must exceed 2*h_near = {2 * mesh.h_near:.3g}")
    safe = cfg.safe_radius
    if rho.max() >= safe:
        raise BadSchedule(f"largest radius {rho.max():.3g} must be below {safe:.3g}")
    pts, d = cfg.points, cfg.degrees.astype(float)
    anchors, adeg = cmap.anchors, cmap.anchor_degrees

    def regular(x):
        idx, _ = mesh.locate(x)
        out = cmap.phase.gradients[idx]
        if len(anchors):
            out = out + singular_kernel(x, anchors, adeg)
        return out

    quad = build_current_quadrature(mesh, pts, d, 2.0)
    w, x = quad.weights, quad.points
    r_q = cmap.phase.gradients[quad.tri] + (singular_kernel(x, anchors, adeg) if len(anchors) else 0.0)
    A = float(np.sum(w * np.einsum("ij,ij->i", r_q, r_q)))
    # mean-corrected singular values make the grad-phi part of this exact
    B = float(np.sum(w * np.einsum("ij,ij->i", quad.singular, r_q)))

    R = 0.9 * min(cfg.min_separation / 2, cfg.boundary_distance)
    s_q = singular_kernel(x, pts, d)
    chi = np.zeros(len(x))
    for v in pts:
        chi += _cutoff((np.linalg.norm(x - v, axis=1) - R / 2) / (R / 2))
    C_far = float(np.sum(w * (1 - chi) * np.einsum("ij,ij->i", s_q, s_q)))

    th = 2 * np.pi * np.arange(n_theta) / n_theta
    u = np.column_stack([np.cos(th), np.sin(th)])
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_r)

    def log_nodes(a, b):
        t = 0.5 * (gl_x + 1) * (np.log(b) - np.log(a)) + np.log(a)
        return np.exp(t), 0.5 * gl_w * (np.log(b) - np.log(a))

    def polar(center, a, b, f, radial_weight=None):
        """int over a < |y - center| < b of f(y) dy, log-spaced Gauss in r, trapezoid in theta."""
        r, wt = log_nodes(a, b)
        y = center[None, None, :] + r[:, None, None] * u[None, :, :]
        vals = f(y.reshape(-1, 2)).reshape(len(r), n_theta)
        rw = r**2 * wt * (1.0 if radial_weight is None else radial_weight(r))
        return float(np.sum(rw[:, None] * vals) * 2 * np.pi / n_theta)

    def ss(y):
        s = singular_kernel(y, pts, d)
        return np.einsum("ij,ij->i", s, s)

    values = []
    for rh in rho:
        C = C_far
        D = 0.0
        for j, v in enumerate(pts):
            C += polar(v, rh, R / 2, ss)
            C += polar(v, R / 2, R, ss, radial_weight=lambda r: _cutoff((r - R / 2) / (R / 2)))
            others = np.arange(cfg.n) != j

            def ball(y, j=j, others=others):
                # |r|^2 + 2 s.r without the own-kernel . grad phi part (zero on every circle)
                rr = regular(y)
                val = np.einsum("ij,ij->i", rr, rr)
                if np.any(others):
                    val += 2 * np.einsum("ij,ij->i", singular_kernel(y, pts[others], d[others]), rr)
                if len(anchors):
                    own = singular_kernel(y, pts[j][None], d[j : j + 1])
                    val += 2 * np.einsum("ij,ij->i", own, singular_kernel(y, anchors, adeg))
                return val

            # r -> 0 inside the ball is regular; a tiny inner radius avoids evaluating at the vortex
            D += polar(v, 1e-9 * rh, rh, ball)
        excised = A + 2 * B + C - D
        values.append(excised - 2 * np.pi * np.sum(d * d) * np.log(1.0 / rh))
    values = np.array(values)
    V = np.column_stack([np.ones_like(rho), rho, rho**2])
    coef, *_ = np.linalg.lstsq(V, values, rcond=None)
    resid = float(np.max(np.abs(V @ coef - values)))
    return EnergyReport(
        float(coef[0]),
        "rho-limit",
        {},
        error_estimate=resid + abs(coef[1]) * rho.min(),
        extras={"rho": rho, "W_rho": values, "fit_residual": resid},
    )
