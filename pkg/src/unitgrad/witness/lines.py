"""
Closest points between two lines, and the gradient-line pair check.

For a constant-norm convex field the lines u + s grad f(u) carry a
constant gradient; at the closest pair (u0, v0) of two such lines the
values and gradients must agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numcore import DimensionError, Tolerances, as_vec, gradient, rescale
from .probes import ray_deviation

PARALLEL_COS = 1.0 - 1e-12


@dataclass(frozen=True)
class Line:
    base: np.ndarray
    dir: np.ndarray

    def __post_init__(self):
        base = as_vec(self.base)
        d = as_vec(self.dir, base.size)
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValueError("line direction must be a unit vector; use Line.through")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "dir", d)

    @classmethod
    def through(cls, base, direction):
        d = as_vec(direction)
        nd = np.linalg.norm(d)
        if nd == 0:
            raise ValueError("zero direction")
        return cls(base, d / nd)

    def at(self, s):
        return self.base + s * self.dir


@dataclass
class LineGapResult:
    s_star: float
    t_star: float
    gap: float
    diff: np.ndarray
    parallel: bool

    def orthogonality(self, l1, l2):
        return abs(float(self.diff @ l1.dir)), abs(float(self.diff @ l2.dir))

    def as_dict(self):
        return {
            "s_star": self.s_star,
            "t_star": self.t_star,
            "gap": self.gap,
            "diff": self.diff.tolist(),
            "parallel": self.parallel,
        }


def closest_points_between_lines(l1, l2):
    """Closest pair l1(s*), l2(t*) from the 2x2 normal equations.

    Parallel lines (|<d1, d2>| >= 1 - 1e-12) take s* = 0 and t* the
    projection of l1.base onto l2.
    """
    if l1.base.size != l2.base.size:
        raise DimensionError("lines live in different dimensions")
    d1, d2 = l1.dir, l2.dir
    w = l1.base - l2.base
    c = float(d1 @ d2)
    if abs(c) >= PARALLEL_COS:
        s, t = 0.0, float(d2 @ w)
        parallel = True
    else:
        # stationarity of |w + s d1 - t d2|^2:  s - c t = -<w,d1>,  c s - t = -<w,d2>
        M = np.array([[1.0, -c], [c, -1.0]])
        st = np.linalg.solve(M, [-(d1 @ w), -(d2 @ w)])
        for _ in range(2):
            e = w + st[0] * d1 - st[1] * d2
            st = st + np.linalg.solve(M, [-(d1 @ e), -(d2 @ e)])
        s, t = float(st[0]), float(st[1])
        parallel = False
    diff = l2.at(t) - l1.at(s)
    return LineGapResult(s_star=s, t_star=t, gap=float(np.linalg.norm(diff)), diff=diff, parallel=parallel)


@dataclass
class LinePairWitness:
    u0: np.ndarray
    v0: np.ndarray
    lines: LineGapResult
    common_norm: float
    hypotheses_met: bool
    orthogonality: tuple
    value_difference: float
    gradient_difference: float
    inner_product_defect: float
    line_drift: float
    ray_deviation_u0: float
    ray_deviation_v0: float
    ok: bool

    def as_dict(self):
        return {
            "u0": self.u0.tolist(),
            "v0": self.v0.tolist(),
            "lines": self.lines.as_dict(),
            "common_norm": self.common_norm,
            "hypotheses_met": self.hypotheses_met,
            "orthogonality": list(self.orthogonality),
            "value_difference": self.value_difference,
            "gradient_difference": self.gradient_difference,
            "inner_product_defect": self.inner_product_defect,
            "line_drift": self.line_drift,
            "ray_deviation_u0": self.ray_deviation_u0,
            "ray_deviation_v0": self.ray_deviation_v0,
            "ok": self.ok,
        }


def line_pair_witness(field, u, v, tol=None, strict=True, s_range=(-10.0, 10.0), samples=41):
    """Check the gradient lines through ``u`` and ``v`` at their closest pair.

    The field is first divided by its common gradient norm so the gradient
    has unit length. With ``strict`` the gradient norms at ``u`` and ``v``
    must agree within ``tol.tol_grad_norm``; otherwise the mismatch is only
    recorded in ``hypotheses_met``.
    """
    tol = tol or Tolerances()
    u = as_vec(u, field.dim)
    v = as_vec(v, field.dim)
    gu, gv = gradient(field, u), gradient(field, v)
    nu, nv = np.linalg.norm(gu), np.linalg.norm(gv)
    if min(nu, nv) <= tol.tol_grad_norm:
        raise ValueError("gradient vanishes at a base point; gradient lines are undefined")
    met = abs(nu - nv) <= tol.tol_grad_norm and field.convex and field.differentiable
    if strict and not met:
        raise ValueError(
            f"hypotheses fail: gradient norms {nu:.6g} and {nv:.6g}, "
            f"convex={field.convex}, differentiable={field.differentiable}"
        )
    kappa = 0.5 * (nu + nv)
    unit = rescale(field, 1.0 / kappa)
    l1, l2 = Line.through(u, gu), Line.through(v, gv)
    gap = closest_points_between_lines(l1, l2)
    u0, v0 = l1.at(gap.s_star), l2.at(gap.t_star)
    a, b = gradient(unit, u0), gradient(unit, v0)

    value_diff = abs(unit(u0) - unit(v0))
    grad_diff = float(np.linalg.norm(a - b))
    inner = abs(1.0 - float(a @ b))
    drift = max(float(np.linalg.norm(a - gu / kappa)), float(np.linalg.norm(b - gv / kappa)))
    ray_u = ray_deviation(unit, u0, *s_range, samples)
    ray_v = ray_deviation(unit, v0, *s_range, samples)
    ortho = gap.orthogonality(l1, l2)
    if gap.parallel:
        ok = grad_diff <= tol.tol_equal
    else:
        checks = (value_diff, grad_diff, inner, drift, ray_u, ray_v) + ortho
        ok = max(checks) <= tol.tol_equal
    return LinePairWitness(
        u0=u0,
        v0=v0,
        lines=gap,
        common_norm=float(kappa),
        hypotheses_met=bool(met),
        orthogonality=ortho,
        value_difference=float(value_diff),
        gradient_difference=grad_diff,
        inner_product_defect=inner,
        line_drift=drift,
        ray_deviation_u0=float(ray_u),
        ray_deviation_v0=float(ray_v),
        ok=bool(ok),
    )
