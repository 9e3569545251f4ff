"""
Fixed points of u -> r grad f(u) on the ball B_r, and resolvent points
solving u + r grad f(u) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..numcore import (
    Ball,
    ConvergenceError,
    Tolerances,
    gradient,
    make_rng,
    sample_points,
)


@dataclass
class FixedPointResult:
    point: np.ndarray
    radius: float
    residual: float
    iterations: int
    converged: bool
    # distance between solutions reached from different starts (resolvent only)
    start_spread: float = 0.0

    def as_dict(self):
        return {
            "radius": self.radius,
            "point": self.point.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "start_spread": self.start_spread,
        }


def _gradient_jacobian(field, u):
    """Central-difference Jacobian of grad f (the Hessian of f)."""
    h = (1e-6 if field.grad is not None else 1e-3) * (1.0 + np.linalg.norm(u))
    n = u.size
    J = np.empty((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (gradient(field, u + e) - gradient(field, u - e)) / (2 * h)
    return 0.5 * (J + J.T)


def _project_ball(u, r):
    nu = np.linalg.norm(u)
    return u if nu <= r else u * (r / nu)


def brouwer_fixed_point(field, r, tol=None, seed=0, n_starts=4, max_iter=200):
    """Fixed point of ``u -> r grad f(u)`` in the closed ball of radius ``r``.

    The map is only continuous, not a contraction, so the point is found by
    minimizing ``|u - r grad f(u)|^2`` over the ball: projected
    Levenberg-Marquardt steps from the origin, from ``r grad f(0)`` and from
    ``n_starts`` seeded points. The best candidate is returned even when it
    misses ``tol.tol_residual`` (then ``converged`` is False).
    """
    tol = tol or Tolerances()
    r = float(r)
    if not r > 0:
        raise ValueError("radius must be positive")
    if not field.differentiable:
        raise ValueError(f"{field.label or 'field'} is not claimed differentiable")
    n = field.dim
    eye = np.eye(n)

    def residual_map(u):
        return u - r * gradient(field, u)

    origin = np.zeros(n)
    starts = [origin, _project_ball(r * gradient(field, origin), r)]
    starts += list(sample_points(Ball(origin, r), n_starts, seed))

    best = None
    total_iter = 0
    for start in starts:
        u = start.copy()
        F = residual_map(u)
        res = np.linalg.norm(F)
        lam = 1e-6
        for _ in range(max_iter):
            if res <= 1e-3 * tol.tol_residual:
                break
            total_iter += 1
            J = eye - r * _gradient_jacobian(field, u)
            step = np.linalg.solve(J.T @ J + lam * eye, -J.T @ F)
            cand = _project_ball(u + step, r)
            Fc = residual_map(cand)
            rc = np.linalg.norm(Fc)
            if rc < res:
                u, F, res = cand, Fc, rc
                lam = max(lam / 10.0, 1e-12)
            else:
                lam *= 10.0
                if lam > 1e12:
                    break
        if best is None or res < best[1]:
            best = (u, res)
        if best[1] <= tol.tol_residual:
            break
    point, res = best
    return FixedPointResult(
        point=point,
        radius=r,
        residual=float(res),
        iterations=total_iter,
        converged=bool(res <= tol.tol_residual),
    )


def estimate_gradient_lipschitz(field, radius, seed=0, n_pairs=64):
    """Largest observed |grad f(a) - grad f(b)| / |a - b| on seeded pairs.

    Half the pairs are far apart inside the ball, half are 1e-3 apart, so
    sharp local curvature is not missed.
    """
    n = field.dim
    ball = Ball(np.zeros(n), radius)
    a = sample_points(ball, n_pairs, seed)
    b = sample_points(ball, n_pairs, seed + 1)
    rng = make_rng(seed + 2)
    near = a + 1e-3 * rng.standard_normal(a.shape)
    near = np.vstack([near, 1e-3 * rng.standard_normal((4, n))])
    a_near = np.vstack([a, np.zeros((4, n))])
    best = 0.0
    for x, y in list(zip(a, b)) + list(zip(a_near, near)):
        d = np.linalg.norm(x - y)
        if d > 0:
            best = max(best, np.linalg.norm(gradient(field, x) - gradient(field, y)) / d)
    return best


def _resolvent_iterate(field, r, start, tau, tol, max_iter):
    u = start.copy()
    T = u + r * gradient(field, u)
    res = np.linalg.norm(T)
    best_res = res
    it = 0
    for it in range(1, max_iter + 1):
        if res <= 1e-2 * tol.tol_residual:
            break
        u = u - tau * T
        T = u + r * gradient(field, u)
        res = np.linalg.norm(T)
        if res > 10.0 * best_res:
            # the Lipschitz estimate was too small
            tau *= 0.5
        best_res = min(best_res, res)
    return u, float(res), it


def resolvent_point(field, r, tol=None, seed=0, max_iter=20000):
    """Solve ``u + r grad f(u) = 0`` for a convex differentiable field.

    The map ``u -> u + r grad f(u)`` is strongly monotone, so the iteration
    ``u <- u - tau (u + r grad f(u))`` with ``tau = 1 / (1 + r L)`` contracts,
    L being a sampled Lipschitz bound of the gradient. It is run from the
    origin and from a seeded start; ``start_spread`` records how far apart
    the two limits are.
    """
    tol = tol or Tolerances()
    r = float(r)
    if not r > 0:
        raise ValueError("radius must be positive")
    if not (field.convex and field.differentiable):
        raise ValueError(f"{field.label or 'field'} is not claimed convex and differentiable")
    n = field.dim
    g0 = np.linalg.norm(gradient(field, np.zeros(n)))
    reach = 1.0 + 2.0 * r * max(g0, 1.0)
    lip = 2.0 * estimate_gradient_lipschitz(field, reach, seed)
    tau = 1.0 / (1.0 + r * lip)

    other = sample_points(Ball(np.zeros(n), reach), 1, seed + 7)[0]
    runs = [_resolvent_iterate(field, r, s, tau, tol, max_iter) for s in (np.zeros(n), other)]
    (p, res, it), (q, res_q, it_q) = runs
    return FixedPointResult(
        point=p,
        radius=r,
        residual=res,
        iterations=it + it_q,
        converged=bool(res <= tol.tol_residual and res_q <= tol.tol_residual),
        start_spread=float(np.linalg.norm(p - q)),
    )


@dataclass
class LimitDirection:
    direction: np.ndarray
    radii: List[float]
    ratios: List[np.ndarray] = field(default_factory=list)
    results: List[FixedPointResult] = field(default_factory=list)


def limit_direction(field, radii, variant="brouwer", tol=None, seed=0):
    """Estimate grad f(0) as the limit of u_r / r for shrinking radii.

    With ``variant="resolvent"`` the points solve u_r + r grad f(u_r) = 0 and
    the estimate is -u_r / r. Raises ``ConvergenceError`` if any radius fails.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly decreasing")
    if radii[-1] > 1e-3:
        raise ValueError("the smallest radius must be at most 1e-3")
    if variant == "brouwer":
        solve, sign = brouwer_fixed_point, 1.0
    elif variant == "resolvent":
        solve, sign = resolvent_point, -1.0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = LimitDirection(direction=np.zeros(field.dim), radii=radii)
    for r in radii:
        res = solve(field, r, tol=tol, seed=seed)
        if not res.converged:
            raise ConvergenceError(f"{variant} point at r={r} did not converge (residual {res.residual:.3e})")
        out.results.append(res)
        out.ratios.append(sign * res.point / r)
    out.direction = out.ratios[-1]
    return out
