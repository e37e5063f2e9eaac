"""Stress-energy tensor of phase maps and the defect coefficients c_j(p, x).

For u with current v = j u, |grad u| = |v| and grad u (x) grad u = v (x) v, so
S_p = p |v|^{p-2} v (x) v - |v|^p I. The coefficient for vortex j and direction l is
minus the pairing of S_p with DX where X = chi(|y - x_j|/delta) e_l; DX lives on the
annulus delta <= |y - x_j| <= 2 delta, which contains no singularity. The regular part
of the current is taken from recovered vertex gradients, so the pairing is continuous
in the vortex positions (a fixed polar grid over piecewise constant gradients is not).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadRadius

N_RADIAL = 24
N_ANGULAR = 384


def stress_tensor(p, v):
    """S_p for one current value (2,) or a batch (Q, 2); returns (2, 2) or (Q, 2, 2)."""
    v = np.asarray(v, dtype=float)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    s = np.linalg.norm(v, axis=1)
    # |v|^{p-2} v v^T -> 0 as v -> 0 for p > 0, so zero is the continuous value there
    with np.errstate(divide="ignore", invalid="ignore"):
        coef = np.where(s > 0, p * s ** (p - 2), 0.0)
    S = coef[:, None, None] * v[:, :, None] * v[:, None, :] - (s**p)[:, None, None] * np.eye(2)
    return S[0] if single else S


def cutoff(t):
    """C^2 quintic bump: 1 for t <= 1, 0 for t >= 2."""
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - s**3 * (10 - 15 * s + 6 * s * s)


def cutoff_derivative(t):
    s = np.clip(np.asarray(t, dtype=float) - 1.0, 0.0, 1.0)
    return -30.0 * s * s * (1 - s) ** 2


@dataclass(frozen=True)
class TestField:
    """X = chi(|y - center| / delta) e_l, with l in {0, 1}."""

    __test__ = False  # not a pytest class

    center: np.ndarray
    delta: float
    direction: int

    def __call__(self, pts):
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts - self.center, axis=1)
        out = np.zeros_like(pts, dtype=float)
        out[:, self.direction] = cutoff(r / self.delta)
        return out

    def jacobian(self, pts):
        """DX[a, b] = d X_a / d y_b, shape (Q, 2, 2)."""
        pts = np.atleast_2d(pts)
        h = pts - self.center
        r = np.linalg.norm(h, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            grad = np.where(r[:, None] > 0, (cutoff_derivative(r / self.delta) / (self.delta * r))[:, None] * h, 0.0)
        out = np.zeros((len(pts), 2, 2))
        out[:, self.direction, :] = grad
        return out


@dataclass(frozen=True, eq=False)
class StressCoefficients:
    p: float
    config: object
    c: np.ndarray
    error_estimate: float
    delta: float

    @property
    def pairs(self):
        return self.c.reshape(-1, 2)

    def csv_rows(self):
        return [(self.p, j, a, b, self.delta, self.error_estimate) for j, (a, b) in enumerate(self.pairs)]


def _annulus_rule(center, delta, n_r, n_t):
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = delta * (1.5 + 0.5 * x)
    wr = 0.5 * delta * w * r
    t = 2 * np.pi * (np.arange(n_t) + 0.5) / n_t
    u = np.column_stack([np.cos(t), np.sin(t)])
    pts = center + (r[:, None, None] * u[None]).reshape(-1, 2)
    wts = (wr[:, None] * np.full(n_t, 2 * np.pi / n_t)[None]).ravel()
    return pts, wts, u, r


def _source_of(solution):
    """(current field, config) from a PharmonicSolution or a CanonicalMap (zero correction)."""
    if hasattr(solution, "phi"):
        return solution.current(), solution.base.config
    return solution.current(), solution.config


def _check_delta(config, delta):
    limit = config.safe_radius
    if not (0 < delta < limit):
        raise BadRadius(f"delta = {delta:.4g} must lie in (0, {limit:.4g})")


def default_delta(config):
    return 0.25 * min(config.min_separation, config.boundary_distance)


def _pairing(p, current, center, delta, n_r, n_t):
    """minus int S_p grad chi over the annulus: the two components (l = 0, 1)."""
    pts, wts, u, r = _annulus_rule(center, delta, n_r, n_t)
    S = stress_tensor(p, current.smoothed(pts))
    rr = np.repeat(r, len(u))
    grad_chi = (cutoff_derivative(rr / delta) / delta)[:, None] * np.tile(u, (len(r), 1))
    return -np.einsum("q,qab,qb->a", wts, S, grad_chi)


def coefficients(p, solution, delta=None, n_r=N_RADIAL, n_theta=N_ANGULAR):
    current, config = _source_of(solution)
    delta = default_delta(config) if delta is None else float(delta)
    _check_delta(config, delta)
    c = np.array([_pairing(p, current, x, delta, n_r, n_theta) for x in config.points])
    coarse = np.array([_pairing(p, current, x, delta, n_r // 2, n_theta // 2) for x in config.points])
    return StressCoefficients(float(p), config, c.ravel(), float(np.abs(c - coarse).max()), delta)


def pairing_with_field(p, solution, h, delta=None, n_r=N_RADIAL, n_theta=N_ANGULAR):
    """minus int <S_p, DX_h> for X_h = sum_j chi_j h_j, integrated directly over the union of annuli."""
    current, config = _source_of(solution)
    delta = default_delta(config) if delta is None else float(delta)
    _check_delta(config, delta)
    if 4 * delta >= config.min_separation:
        raise BadRadius("annuli overlap; need 4 delta below the vortex separation")
    h = np.asarray(h, dtype=float).reshape(-1, 2)
    total = 0.0
    for x in config.points:
        pts, wts, _, _ = _annulus_rule(x, delta, n_r, n_theta)
        DX = np.zeros((len(pts), 2, 2))
        for j, xj in enumerate(config.points):
            for ell in range(2):
                DX += h[j, ell] * TestField(xj, delta, ell).jacobian(pts)
        S = stress_tensor(p, current.smoothed(pts))
        total -= float(np.einsum("q,qab,qab->", wts, S, DX))
    return total


def delta_independence_check(p, solution, delta_list, tol=5e-3, relative=False):
    """Spread of c over the cutoff radii against tol (times 1 + |c| when relative)."""
    results = [coefficients(p, solution, d) for d in delta_list]
    cs = np.array([r.c for r in results])
    spread = float((cs.max(axis=0) - cs.min(axis=0)).max())
    threshold = tol * (1.0 + float(np.linalg.norm(cs.mean(axis=0)))) if relative else tol
    return {
        "deltas": list(map(float, delta_list)),
        "coefficients": cs,
        "spread": spread,
        "threshold": threshold,
        "passed": spread < threshold,
    }
