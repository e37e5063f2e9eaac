"""Stationary configurations: Newton on grad W, Brouwer degrees, and root finding for c(p, .).

All evaluations for moving vortices reuse one mesh and transport the canonical map,
so c(p, x) and grad W(x) vary continuously with x and finite differences are meaningful.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegreeUndefined,
    NoCriticalPoint,
    SolverStalled,
    TransportTooFar,
    TrustViolation,
    VortexLabError,
)
from .geometry import build_mesh
from .pharmonic import SolverParams, minimize_phase
from .renorm import grad_W_phase
from .stress import coefficients
from .vortex import VortexConfig, build_canonical_map, transport_config


@dataclass(frozen=True)
class MeshParams:
    h_far: float = 0.05
    h_near: float = 0.005
    grading: float = 0.3
    seed: int = 0


class Setup:
    """A domain, boundary datum and vortex degrees on one mesh graded at reference points."""

    def __init__(self, domain, datum, degrees, points, mesh_params=None, solver=None, delta=None):
        self.domain = domain
        self.datum = datum
        self.degrees = np.asarray(degrees, dtype=int)
        self.mesh_params = mesh_params or MeshParams()
        self.solver = solver or SolverParams()
        self.reference = VortexConfig(points, self.degrees, domain)
        mp = self.mesh_params
        self.mesh = build_mesh(domain, self.reference.points, mp.h_far, mp.h_near, mp.grading, mp.seed)
        self.base = build_canonical_map(domain, datum, self.reference, self.mesh)
        self.delta = delta
        self.n_evals = 0

    @property
    def dim(self):
        return 2 * len(self.degrees)

    def regraded(self, points):
        return Setup(self.domain, self.datum, self.degrees, points, self.mesh_params, self.solver, self.delta)

    def canonical(self, x):
        x = np.asarray(x, dtype=float).reshape(-1, 2)
        try:
            VortexConfig(x, self.degrees, self.domain)
            return transport_config(self.base, x)
        except (TransportTooFar, VortexLabError) as exc:
            raise TransportTooFar(str(exc)) from exc

    def grad_W(self, x):
        return grad_W_phase(self.canonical(x))

    def stress(self, p, x, phi0=None):
        """(c(p, x), solution); p = 2 uses the canonical map directly."""
        self.n_evals += 1
        cmap = self.canonical(x)
        if p == 2.0:
            return coefficients(2.0, cmap, self.delta).c, None
        sol = minimize_phase(p, cmap, params=self.solver, phi0=phi0)
        return coefficients(p, sol, self.delta).c, sol


def _central_jacobian(F, x, step):
    n = len(x)
    J = np.zeros((n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = step
        J[:, k] = (F(x + e) - F(x - e)) / (2 * step)
    return J


def find_critical_point_W(setup, x_init, tol=1e-8, max_iter=30, remesh_rounds=8, fd_step=None):
    """Newton on grad W with central-difference Jacobians.

    Newton runs on a fixed mesh with transported maps. When it converges, or a step
    would move the vortices beyond the transport range, the mesh is regraded at the
    current point and Newton resumes; it stops once a converged point moves less than
    a tenth of the near-vortex mesh size (regrading noise sits below that).
    Returns (points (n, 2), setup graded at them, info).
    """
    x = np.asarray(x_init, dtype=float).ravel()
    info = {"steps": 0, "rounds": 0}
    for rnd in range(remesh_rounds):
        if rnd > 0:
            setup = setup.regraded(x.reshape(-1, 2))
        try:
            g0 = setup.grad_W(x)
        except TransportTooFar as exc:
            raise NoCriticalPoint(f"start point invalid: {exc}") from exc
        if rnd == 0:
            tol_abs = tol * max(1.0, float(np.linalg.norm(g0)))
        x_new, done = _newton_W(setup, x, tol_abs, max_iter, fd_step, info)
        info["rounds"] = rnd + 1
        moved = float(np.linalg.norm(x_new - x))
        x = x_new
        if done and moved < 0.1 * setup.mesh_params.h_near:
            break
    else:
        raise NoCriticalPoint(f"no convergence after {remesh_rounds} regradings")
    info["grad_norm"] = float(np.linalg.norm(setup.grad_W(x)))
    return x.reshape(-1, 2), setup, info


def _newton_W(setup, x, tol, max_iter, fd_step, info):
    """Returns (x, converged); converged is False when a step needs a regraded mesh."""
    F = setup.grad_W
    step = fd_step or 1e-4 * setup.reference.safe_radius
    g = F(x)
    for _ in range(max_iter):
        if np.linalg.norm(g) < tol:
            return x, True
        J = _central_jacobian(F, x, step)
        dx = np.linalg.lstsq(J, -g, rcond=None)[0]
        t, g_new, blocked = 1.0, None, False
        while t >= 1e-3:
            try:
                g_new = F(x + t * dx)
                if np.linalg.norm(g_new) < np.linalg.norm(g):
                    break
            except TransportTooFar:
                blocked = True
            g_new = None
            t *= 0.5
        if g_new is None:
            if blocked:
                # move as far as transport allows, then let the caller regrade
                return x + _admissible_step(setup, x, dx), False
            raise NoCriticalPoint(f"Newton stalled at |grad W| = {np.linalg.norm(g):.3e}")
        x, g = x + t * dx, g_new
        info["steps"] += 1
    if np.linalg.norm(g) < tol:
        return x, True
    raise NoCriticalPoint(f"no convergence: |grad W| = {np.linalg.norm(g):.3e}")


def _admissible_step(setup, x, dx):
    t = 1.0
    while t > 1e-6:
        try:
            setup.canonical(x + t * dx)
            return t * dx
        except TransportTooFar:
            t *= 0.5
    raise NoCriticalPoint("Newton direction leaves the admissible set immediately")


@dataclass(frozen=True)
class DegreeCertificate:
    map_id: str
    center: np.ndarray
    radius: float
    samples: int
    degree: int
    min_norm: float
    directions: tuple = ()

    def __str__(self):
        return (
            f"deg({self.map_id}) = {self.degree} on the product ball of radius {self.radius:g}"
            f" ({self.samples} boundary samples, min |F| = {self.min_norm:.3e})"
        )


def _square_to_disk(q):
    """Radial homeomorphism of [-1, 1]^2 onto the unit disk, applied to pairs of columns."""
    out = q.copy()
    for k in range(0, q.shape[1], 2):
        a = q[:, k : k + 2]
        r = np.linalg.norm(a, axis=1)
        m = np.abs(a).max(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            out[:, k : k + 2] = np.where(r[:, None] > 0, a * (m / r)[:, None], 0.0)
    return out


def _boundary_grid(m):
    """Vertices of the boundary of [-1, 1]^4 on a grid with m cells per side, and Kuhn tetrahedra with signs."""
    ticks = np.linspace(-1, 1, m + 1)
    index = {}
    verts = []

    def vid(c):
        key = tuple(int(i) for i in c)
        if key not in index:
            index[key] = len(verts)
            verts.append(ticks[list(key)])
        return index[key]

    tets, signs = [], []
    perms = list(itertools.permutations(range(3)))
    parity = [np.linalg.det(np.eye(3)[list(p)]) for p in perms]
    for k in range(4):
        free = [a for a in range(4) if a != k]
        for s, fixed in ((1, m), (-1, 0)):
            orient = s * (-1) ** k
            for base in itertools.product(range(m), repeat=3):
                for perm, par in zip(perms, parity):
                    c3 = np.array(base)
                    chain = [c3.copy()]
                    for a in perm:
                        c3 = c3.copy()
                        c3[a] += 1
                        chain.append(c3)
                    ids = []
                    for c in chain:
                        c4 = np.zeros(4, dtype=int)
                        c4[k] = fixed
                        c4[free] = c
                        ids.append(vid(c4))
                    tets.append(ids)
                    signs.append(orient * par)
    return np.array(verts), np.array(tets), np.array(signs, dtype=float)


def _directions(dim, count=2):
    rng = np.random.default_rng(12345)
    out = rng.normal(size=(count, dim))
    return out / np.linalg.norm(out, axis=1)[:, None]


def brouwer_degree(field, center, radius, samples_per_dim=4, noise_floor=0.0, map_id="F", max_refine=1):
    """Degree of field on the product ball B_radius(x_1) x ... around center (dimension 2 or 4).

    The boundary is sampled, field values are normalized to the sphere, and the degree is
    the signed count of simplices whose spherical image contains a fixed direction
    (two directions must agree). Raises DegreeUndefined when the field is too small on the
    boundary or the sampling cannot resolve it.
    """
    center = np.asarray(center, dtype=float).ravel()
    dim = len(center)
    if dim not in (2, 4):
        raise DegreeUndefined("certified degrees are available in dimension 2 and 4 only")
    m = samples_per_dim
    cache = {}

    def eval_at(z):
        key = tuple(np.round(z, 12))
        if key not in cache:
            cache[key] = np.asarray(field(center + radius * z), dtype=float)
        return cache[key]

    for _ in range(max_refine + 1):
        if dim == 2:
            n = 8 * m
            t = 2 * np.pi * np.arange(n) / n
            Z = np.column_stack([np.cos(t), np.sin(t)])
        else:
            verts, tets, signs = _boundary_grid(m)
            Z = _square_to_disk(verts)
        vals = np.array([eval_at(z) for z in Z])
        norms = np.linalg.norm(vals, axis=1)
        min_norm = float(norms.min())
        if not min_norm > 10 * noise_floor or min_norm == 0.0:
            raise DegreeUndefined(f"|{map_id}| = {min_norm:.3e} on the boundary is below 10x the noise floor")
        Y = vals / norms[:, None]
        try:
            if dim == 2:
                deg = _winding(Y)
                dirs = ()
            else:
                deg, dirs = _degree_4d(Y, tets, signs)
            return DegreeCertificate(map_id, center, float(radius), len(Z), deg, min_norm, dirs)
        except _Unresolved:
            m *= 2
    raise DegreeUndefined(f"boundary sampling of {map_id} too coarse to resolve the degree")


class _Unresolved(Exception):
    pass


def _winding(Y):
    z = Y[:, 0] + 1j * Y[:, 1]
    steps = np.angle(np.roll(z, -1) / z)
    if np.abs(steps).max() >= np.pi / 2:
        raise _Unresolved
    return int(np.rint(steps.sum() / (2 * np.pi)))


def _degree_4d(Y, tets, signs):
    imgs = Y[tets]  # (K, 4, 4), rows are vertex images
    # each spherical simplex must sit in an open hemisphere (around its vertex mean)
    axis = imgs.sum(axis=1)
    if np.einsum("kad,kd->ka", imgs, axis).min() <= 1e-9 * np.abs(axis).max():
        raise _Unresolved
    dets = np.linalg.det(imgs)
    results = []
    for e in _directions(4):
        lam = np.linalg.solve(np.transpose(imgs, (0, 2, 1)), np.broadcast_to(e, (len(imgs), 4))[..., None])[..., 0]
        hit = np.all(lam > 0, axis=1)
        count = float(np.sum(signs[hit] * np.sign(dets[hit])))
        results.append(int(np.rint(count)))
    if len(set(results)) != 1:
        raise _Unresolved
    return results[0], tuple(results)


def jacobian_sign(F, x, step):
    J = _central_jacobian(F, np.asarray(x, dtype=float).ravel(), step)
    return int(np.sign(np.linalg.det(J))), J


@dataclass
class StationaryResult:
    x: np.ndarray
    c_norm: float
    evals: int
    iterations: int
    jacobian: np.ndarray
    solution: object = None


def find_stationary(setup, p, x_init, delta_trust, center=None, tol=None, jacobian=None, phi0=None, max_iter=30):
    """Broyden iteration for c(p, x) = 0 inside the ball of radius delta_trust around center.

    Forward differences with step 1e-3 * delta_trust give fresh Jacobians; a Jacobian passed in
    (a warm start) is used until progress stalls.
    """
    if not (1.5 <= p < 2.0):
        raise ValueError(f"p = {p} outside [1.5, 2)")
    x = np.asarray(x_init, dtype=float).ravel()
    center = x.copy() if center is None else np.asarray(center, dtype=float).ravel()
    if tol is None:
        tol = root_tolerance(setup, center, delta_trust)
    evals = 0
    warm = {"phi": phi0}

    def C(y):
        nonlocal evals
        if np.linalg.norm(y - center) > delta_trust:
            raise TrustViolation(f"iterate at distance {np.linalg.norm(y - center):.3g} > {delta_trust:.3g}")
        evals += 1
        c, sol = setup.stress(p, y, warm["phi"])
        if sol is not None:
            warm["phi"] = sol.phi.values
        return c, sol

    c, sol = C(x)
    J = None if jacobian is None else np.array(jacobian, dtype=float)
    fresh = False
    for it in range(max_iter + 1):
        if np.linalg.norm(c) < tol:
            return StationaryResult(x.reshape(-1, 2), float(np.linalg.norm(c)), evals, it, J, sol)
        if it == max_iter:
            break
        if J is None:
            h = 1e-3 * delta_trust
            J = np.zeros((len(x), len(x)))
            for k in range(len(x)):
                e = np.zeros(len(x))
                e[k] = h
                J[:, k] = (C(x + e)[0] - c) / h
            fresh = True
        dx = np.linalg.lstsq(J, -c, rcond=None)[0]
        x_new = x + dx
        c_new, sol_new = C(x_new)
        if np.linalg.norm(c_new) > 0.9 * np.linalg.norm(c) and not fresh:
            J = None  # stale secant model: rebuild from differences
            continue
        dc = c_new - c
        J = J + np.outer(dc - J @ dx, dx) / (dx @ dx)
        fresh = False
        x, c, sol = x_new, c_new, sol_new
    raise SolverStalled(f"|c| = {np.linalg.norm(c):.3e} above root tolerance {tol:.3e}", [])


def root_tolerance(setup, center, delta_trust, factor=1e-4):
    """factor * mean |grad W| over probes on the trust-ball boundary."""
    center = np.asarray(center, dtype=float).ravel()
    probes = []
    for k in range(len(center)):
        for s in (1, -1):
            e = np.zeros(len(center))
            e[k] = s * delta_trust
            try:
                probes.append(np.linalg.norm(setup.grad_W(center + e)))
            except TransportTooFar:
                pass
    scale = float(np.mean(probes)) if probes else 1.0
    return factor * scale


@dataclass
class ContinuationResult:
    p_schedule: list
    x_star: np.ndarray = None
    xs: list = field(default_factory=list)
    c_norms: list = field(default_factory=list)
    evals: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    certificate_W: DegreeCertificate = None
    certificate_c: DegreeCertificate = None
    certified: bool = False
    tol: float = None
    status: str = "incomplete"
    messages: list = field(default_factory=list)

    def rows(self):
        return [
            (p, *np.ravel(x), cn, ev)
            for p, x, cn, ev in zip(self.p_schedule, self.xs, self.c_norms, self.evals)
        ]

    def summary(self):
        out = {"status": self.status, "certified": self.certified}
        if self.x_star is not None:
            out["x_star"] = " ".join(f"{v:.17g}" for v in np.ravel(self.x_star))
        if self.tol is not None:
            out["root_tolerance"] = f"{self.tol:.17g}"
        if self.certificate_W is not None:
            out["degree_gradW"] = self.certificate_W.degree
        if self.certificate_c is not None:
            out["degree_c"] = self.certificate_c.degree
        for k, d in enumerate(self.distances):
            out[f"distance_{k}"] = f"{d:.17g}"
        return out


def continuation(setup, p_schedule, x_init, delta_trust, samples_per_dim=3, certify=True, tol=None):
    """Warm-started chain of stationary solves toward the critical point of W near x_init.

    Certification: the degree of grad W and of c(p_0, .) on the product ball of radius
    delta_trust around x_* must agree and be nonzero. Failures are recorded, not raised.
    """
    p_schedule = [float(p) for p in p_schedule]
    res = ContinuationResult(p_schedule)
    if any(b <= a for a, b in zip(p_schedule, p_schedule[1:])):
        res.status = "invalid schedule"
        res.messages.append("p schedule must increase")
        return res
    try:
        x_star, setup, _ = find_critical_point_W(setup, x_init)
    except NoCriticalPoint as exc:
        res.status = "failed to certify"
        res.messages.append(f"no critical point of W: {exc}")
        return res
    res.x_star = x_star
    xs = x_star.ravel()
    if tol is None:
        tol = root_tolerance(setup, xs, delta_trust)
    res.tol = float(tol)
    dim = setup.dim
    if certify and dim <= 4:
        try:
            res.certificate_W = brouwer_degree(setup.grad_W, xs, delta_trust, samples_per_dim, map_id="grad W")
            p0 = p_schedule[0]
            res.certificate_c = brouwer_degree(
                lambda y: setup.stress(p0, y)[0], xs, delta_trust, samples_per_dim, noise_floor=tol, map_id=f"c({p0:g}, .)"
            )
        except (DegreeUndefined, TransportTooFar, SolverStalled) as exc:
            res.messages.append(f"degree certificate unavailable: {exc}")
        dW = None if res.certificate_W is None else res.certificate_W.degree
        dc = None if res.certificate_c is None else res.certificate_c.degree
        res.certified = dW is not None and dW != 0 and dW == dc
        if not res.certified:
            res.status = "failed to certify"
            if dW == 0:
                res.messages.append("degree of grad W is zero")
            elif dW is not None and dc is not None and dW != dc:
                res.messages.append(f"degree mismatch: grad W {dW}, c {dc}")
            return res
    elif dim > 4:
        res.messages.append("dimension above 4: Newton evidence only, uncertified")
    x, J, phi = xs.copy(), None, None
    for p in p_schedule:
        try:
            out = find_stationary(setup, p, x, delta_trust, center=xs, tol=tol, jacobian=J, phi0=phi)
        except (TrustViolation, SolverStalled, TransportTooFar) as exc:
            res.messages.append(f"p = {p:g}: {exc}")
            res.status = "partial"
            return res
        x, J = out.x.ravel(), out.jacobian
        phi = out.solution.phi.values if out.solution is not None else None
        res.xs.append(out.x)
        res.c_norms.append(out.c_norm)
        res.evals.append(out.evals)
        res.distances.append(float(np.linalg.norm(x - xs)))
    res.status = "converged" if res.certified else "converged (uncertified)"
    return res
