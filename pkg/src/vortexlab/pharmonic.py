"""Convex phase correction: minimize F(phi) = int |grad phi + j u_x|^p over phi with zero trace.

The minimizer gives the weakly p-harmonic map u_p = exp(i phi) u_x. We solve the
epsilon-regularized problem with weights (|v|^2 + eps^2)^{(p-2)/2} by iteratively
reweighted least squares (a majorize-minimize scheme for p <= 2, so the
regularized energy never increases), falling back to damped Newton with an
Armijo line search when IRLS contracts slowly. Eps follows a geometric schedule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadExponent, SolverStalled
from .laplace import ScalarField, gradient_operator, laplace_solver, stiffness
from .quadrature import build_current_quadrature


@dataclass(frozen=True)
class SolverParams:
    eps0_factor: float = 0.1
    eps_ratio: float = 0.25
    eps_min_factor: float = 1e-6
    max_iter: int = 60
    energy_tol: float = 1e-12
    residual_rtol: float = 1e-8
    residual_atol: float = 1e-12
    stall_ratio: float = 0.5

    def __post_init__(self):
        if not (self.eps0_factor > 0 and self.eps_min_factor > 0 and self.eps_min_factor <= self.eps0_factor):
            raise ValueError("need 0 < eps_min_factor <= eps0_factor")
        if not 0 < self.eps_ratio < 1:
            raise ValueError("eps_ratio must lie in (0, 1)")
        if self.energy_tol <= 0 or self.residual_rtol <= 0 or self.residual_atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")

    def schedule(self, scale):
        eps = [self.eps0_factor * scale]
        while eps[-1] > self.eps_min_factor * scale * (1 + 1e-12):
            eps.append(max(eps[-1] * self.eps_ratio, self.eps_min_factor * scale))
        return eps


class PhaseProblem:
    """Discrete functional for a fixed exponent and canonical map."""

    def __init__(self, p, cmap):
        self.p = float(p)
        self.cmap = cmap
        mesh = cmap.mesh
        self.mesh = mesh
        self.quad = build_current_quadrature(mesh, cmap.sources, cmap.source_degrees, self.p)
        q = self.quad
        self.base = cmap.phase.gradients[q.tri] + q.singular
        self.G = gradient_operator(mesh)
        self.inner = mesh.interior_vertices
        self.lap = laplace_solver(mesh)
        # triangle means of the current; vortices sit at centroids, so point values there are undefined
        mean_j = np.column_stack([q.per_triangle(self.base[:, k]) for k in range(2)]) / mesh.areas[:, None]
        self.scale = float(np.median(np.linalg.norm(mean_j, axis=1)))

    def current(self, phi):
        g = (self.G @ phi).reshape(-1, 2)
        return self.base + g[self.quad.tri]

    def energy(self, phi, eps=0.0):
        v = self.current(phi)
        s2 = np.einsum("ij,ij->i", v, v) + eps * eps
        return float(np.sum(self.quad.weights * s2 ** (self.p / 2)))

    def _tri_sum(self, vals):
        return np.bincount(self.quad.tri, weights=vals, minlength=self.quad.n_tri)

    def residual(self, phi, eps):
        """Interior part of dF_eps/dphi."""
        v = self.current(phi)
        s2 = np.einsum("ij,ij->i", v, v) + eps * eps
        a = self.quad.weights * self.p * s2 ** (self.p / 2 - 1)
        t = np.column_stack([self._tri_sum(a * v[:, 0]), self._tri_sum(a * v[:, 1])])
        return (self.G.T @ t.ravel())[self.inner]

    def irls_step(self, phi, eps):
        v = self.current(phi)
        s2 = np.einsum("ij,ij->i", v, v) + eps * eps
        a = self.quad.weights * s2 ** (self.p / 2 - 1)
        A = self._tri_sum(a)
        b = np.column_stack([self._tri_sum(a * self.base[:, 0]), self._tri_sum(a * self.base[:, 1])])
        K = stiffness(self.mesh, A / self.mesh.areas)
        rhs = -(self.G.T @ b.ravel())[self.inner]
        new = np.zeros_like(phi)
        new[self.inner] = _solve(K, self.inner, rhs)
        return new

    def newton_direction(self, phi, eps, r):
        v = self.current(phi)
        s2 = np.einsum("ij,ij->i", v, v) + eps * eps
        w = self.quad.weights * self.p * s2 ** (self.p / 2 - 1)
        c = w * (self.p - 2) / s2
        M = np.zeros((self.quad.n_tri, 2, 2))
        for k in range(2):
            for m in range(2):
                M[:, k, m] = self._tri_sum(c * v[:, k] * v[:, m] + (w if k == m else 0.0))
        K = stiffness(self.mesh, M / self.mesh.areas[:, None, None])
        step = np.zeros(self.mesh.n_vertices)
        step[self.inner] = _solve(K, self.inner, -r)
        return step


def _solve(K, inner, rhs):
    from scipy.sparse.linalg import splu

    return splu(K[inner][:, inner].tocsc(), permc_spec="COLAMD").solve(rhs)


@dataclass(frozen=True, eq=False)
class PharmonicSolution:
    p: float
    base: object
    phi: ScalarField
    energy: float
    energy_at_zero: float
    residual: float
    eps_min: float
    log: list = field(default_factory=list)
    problem: object = None

    def current(self):
        return self.base.current(correction=self.phi.values)

    def correction_energy(self):
        """int |grad phi|^p (exact for piecewise-linear phi)."""
        g = np.linalg.norm(self.phi.gradients, axis=1)
        return float(np.sum(self.phi.mesh.areas * g**self.p))

    def write_log(self, path):
        with open(path, "w") as f:
            f.write("sweep,iter,eps,energy,residual\n")
            for row in self.log:
                f.write("{},{},{:.17g},{:.17g},{:.17g}\n".format(*row))


def minimize_phase(p, cmap, mesh=None, params=None, phi0=None):
    """Minimize int |grad phi + j u_x|^p over zero-trace piecewise-linear phi."""
    if not (1.0 < p <= 2.0):
        raise BadExponent(f"exponent p = {p} outside (1, 2]")
    if mesh is not None and mesh is not cmap.mesh:
        raise ValueError("the canonical map must be built on the given mesh")
    params = params or SolverParams()
    prob = PhaseProblem(p, cmap)
    n = cmap.mesh.n_vertices
    phi = np.zeros(n) if phi0 is None else np.array(phi0, dtype=float)
    phi[cmap.mesh.boundary_vertices] = 0.0
    e_zero = prob.energy(np.zeros(n))
    log = []
    schedule = [params.eps_min_factor * prob.scale] if p == 2.0 else params.schedule(prob.scale)
    r0 = prob.lap.dual_norm(prob.residual(np.zeros(n), schedule[-1]))
    final_tol = params.residual_rtol * r0 + params.residual_atol
    res = np.inf
    for sweep, eps in enumerate(schedule):
        last = sweep == len(schedule) - 1
        tol = final_tol if last else max(final_tol, 1e-4 * r0)
        newton = False
        prev_res = np.inf
        slow = 0
        converged = False
        for it in range(params.max_iter + 1):
            r = prob.residual(phi, eps)
            res = prob.lap.dual_norm(r)
            F = prob.energy(phi, eps)
            log.append((sweep, it, eps, F, res))
            if res <= tol:
                converged = True
                break
            if it == params.max_iter:
                break
            if res > params.stall_ratio * prev_res:
                slow += 1
                if slow >= 2:
                    newton = True
            prev_res = res
            if not newton:
                phi = prob.irls_step(phi, eps)
                continue
            step = prob.newton_direction(phi, eps, r)
            slope = float(r @ step[prob.inner])
            t = 1.0
            while t > 1e-10:
                trial = phi + t * step
                if prob.energy(trial, eps) <= F + 1e-4 * t * slope:
                    break
                t *= 0.5
            else:
                break
            phi = trial
            if abs(prob.energy(phi, eps) - F) <= params.energy_tol * max(1.0, abs(F)) and res <= 10 * tol:
                converged = True
                break
        if last and not converged:
            raise SolverStalled(f"p = {p}: residual {res:.3e} above tolerance {tol:.3e}", log)
    return PharmonicSolution(
        p=float(p),
        base=cmap,
        phi=ScalarField(cmap.mesh, phi),
        energy=prob.energy(phi),
        energy_at_zero=e_zero,
        residual=res,
        eps_min=schedule[-1],
        log=log,
        problem=prob,
    )


def p_energy(solution):
    return solution.energy


def correction_scaling_report(p_list, cmap, mesh=None, params=None):
    """Rows (p, int |grad phi_p|^p, that / (2 - p)) and whether the ratios stay within a factor 4."""
    p_list = list(p_list)
    if any(not (1 < p < 2) for p in p_list) or any(b <= a for a, b in zip(p_list, p_list[1:])):
        raise BadExponent("p_list must increase inside (1, 2)")
    rows = []
    phi0 = None
    for p in p_list:
        sol = minimize_phase(p, cmap, mesh, params, phi0=phi0)
        phi0 = sol.phi.values
        c = sol.correction_energy()
        rows.append({"p": p, "correction": c, "ratio": c / (2 - p)})
    ratios = np.array([r["ratio"] for r in rows])
    bounded = bool(ratios.max() < 4 * ratios.min()) if ratios.min() > 0 else bool(ratios.max() == 0)
    return {"rows": rows, "bounded": bounded}
