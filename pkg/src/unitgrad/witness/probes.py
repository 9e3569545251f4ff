"""Pointwise probes: ray identity, gradient drift along rays, convexity gaps."""

from __future__ import annotations

import numpy as np

from ..numcore import as_vec, gradient


def _ray_params(s_min, s_max, samples):
    if not s_min < s_max:
        raise ValueError("need s_min < s_max")
    if samples < 2:
        raise ValueError("need at least two samples")
    return np.linspace(s_min, s_max, samples)


def ray_deviation(field, u, s_min=-10.0, s_max=10.0, samples=101):
    """max_s |f(u + s grad f(u)) - s - f(u)| over evenly spaced s."""
    u = as_vec(u, field.dim)
    g = gradient(field, u)
    fu = field(u)
    return max(abs(field(u + s * g) - s - fu) for s in _ray_params(s_min, s_max, samples))


def ray_gradient_drift(field, u, s_min=-10.0, s_max=10.0, samples=101):
    """max_s |grad f(u + s grad f(u)) - grad f(u)| over evenly spaced s."""
    u = as_vec(u, field.dim)
    g = gradient(field, u)
    return max(
        float(np.linalg.norm(gradient(field, u + s * g) - g)) for s in _ray_params(s_min, s_max, samples)
    )


def first_order_gap(field, u, v):
    """f(v) - f(u) - <grad f(u), v - u>; nonnegative for convex fields."""
    u = as_vec(u, field.dim)
    v = as_vec(v, field.dim)
    return field(v) - field(u) - float(gradient(field, u) @ (v - u))


def monotonicity_gap(field, u, v):
    """<grad f(u) - grad f(v), u - v>; nonnegative for convex fields."""
    u = as_vec(u, field.dim)
    v = as_vec(v, field.dim)
    return float((gradient(field, u) - gradient(field, v)) @ (u - v))
