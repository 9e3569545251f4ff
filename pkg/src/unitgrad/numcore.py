"""
Numerical core: vectors, differentiable scalar fields, finite differences,
seeded sampling and a small zoo of test fields.

Points are plain 1-D float64 numpy arrays. A ``ScalarField`` bundles an
evaluator with either an analytic gradient or a central-difference step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np


class DimensionError(ValueError):
    """Input vector does not match the dimension of the field or domain."""


class NonFiniteError(ArithmeticError):
    """A field evaluation or gradient produced NaN or Inf."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.array(point, dtype=float)


def as_vec(u, dim=None):
    """Coerce ``u`` to a finite 1-D float array, optionally of length ``dim``."""
    v = np.atleast_1d(np.asarray(u, dtype=float))
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteError(f"non-finite coordinates {v}", v)
    return v


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget without meeting its tolerance."""


@dataclass(frozen=True)
class Tolerances:
    tol_grad_norm: float = 1e-6
    tol_residual: float = 1e-10
    tol_equal: float = 1e-9
    fd_step: float = 1e-5
    singular_margin: float = 1e-3

    def __post_init__(self):
        for name, val in self.as_dict().items():
            if not (np.isfinite(val) and val > 0):
                raise ValueError(f"tolerance {name} must be a positive finite number, got {val}")

    def as_dict(self):
        return {
            "tol_grad_norm": self.tol_grad_norm,
            "tol_residual": self.tol_residual,
            "tol_equal": self.tol_equal,
            "fd_step": self.fd_step,
            "singular_margin": self.singular_margin,
        }


@dataclass
class ScalarField:
    """A scalar field on R^dim.

    ``grad`` is the analytic gradient; when it is ``None`` the gradient is
    taken by central differences with step ``fd_step``.
    """

    dim: int
    func: Callable[[np.ndarray], float]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    fd_step: float = 1e-5
    convex: bool = False
    concave: bool = False
    differentiable: bool = True
    label: str = ""

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError("dim must be a positive integer")
        self.dim = int(self.dim)
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")

    @property
    def grad_mode(self):
        return "analytic" if self.grad is not None else "finite_difference"

    def __call__(self, u):
        u = as_vec(u, self.dim)
        val = float(self.func(u))
        if not np.isfinite(val):
            raise NonFiniteError(f"{self.label or 'field'} is not finite at {u}", u)
        return val


def fd_gradient(field, u, step):
    """Central-difference gradient of ``field`` at ``u``.

    Component i is ``(f(u + step e_i) - f(u - step e_i)) / (2 step)``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    u = as_vec(u, field.dim)
    out = np.empty(field.dim)
    for i in range(field.dim):
        e = np.zeros(field.dim)
        e[i] = step
        out[i] = (field(u + e) - field(u - e)) / (2.0 * step)
    return out


def fd_gradient_batch(func, points, step):
    """Central differences for a vectorized ``func`` mapping (N, dim) -> (N,)."""
    points = np.asarray(points, dtype=float)
    n, dim = points.shape
    out = np.empty((n, dim))
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        out[:, i] = (func(points + e) - func(points - e)) / (2.0 * step)
    return out


def gradient(field, u):
    """Gradient of ``field`` at ``u`` (analytic if available, else central FD)."""
    u = as_vec(u, field.dim)
    if field.grad is not None:
        g = np.asarray(field.grad(u), dtype=float).reshape(-1)
        if g.size != field.dim:
            raise DimensionError(f"gradient has {g.size} components, expected {field.dim}")
    else:
        g = fd_gradient(field, u, field.fd_step)
    if not np.all(np.isfinite(g)):
        raise NonFiniteError(f"non-finite gradient of {field.label or 'field'} at {u}", u)
    return g


# --- field transforms -------------------------------------------------------

def negate(field):
    """The field ``-f`` with convex/concave claims swapped."""
    grad = None if field.grad is None else (lambda u, g=field.grad: -np.asarray(g(u), dtype=float))
    return replace(
        field,
        func=lambda u, f=field.func: -f(u),
        grad=grad,
        convex=field.concave,
        concave=field.convex,
        label=f"-({field.label})",
    )


def rescale(field, factor):
    """The field ``factor * f``; a positive factor keeps convexity claims."""
    factor = float(factor)
    if not factor > 0:
        raise ValueError("rescale factor must be positive")
    grad = None if field.grad is None else (lambda u, g=field.grad: factor * np.asarray(g(u), dtype=float))
    return replace(field, func=lambda u, f=field.func: factor * f(u), grad=grad)


def shift(field, a, b=0.0):
    """The field ``u -> f(u + a) + b`` (origin moved to ``a``, vertical shift ``b``)."""
    a = as_vec(a, field.dim)
    grad = None if field.grad is None else (lambda u, g=field.grad: g(u + a))
    return replace(
        field,
        func=lambda u, f=field.func: f(u + a) + b,
        grad=grad,
        label=f"shift({field.label})",
    )


# --- domains and sampling ---------------------------------------------------

@dataclass(frozen=True)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = as_vec(self.lo), as_vec(self.hi)
        if lo.size != hi.size:
            raise DimensionError("box corners differ in dimension")
        if not np.all(lo < hi):
            raise ValueError("box requires lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.size

    @property
    def center(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def min_extent(self):
        return float(np.min(self.hi - self.lo))

    def contains(self, u):
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec(self.center))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.size

    @property
    def min_extent(self):
        return self.radius

    def contains(self, u):
        return bool(np.linalg.norm(np.asarray(u, dtype=float) - self.center) <= self.radius)


Domain = Union[Box, Ball]


def make_rng(seed):
    """Counter-based (Philox) generator keyed by ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))


def sample_points(domain, count, seed):
    """Seeded uniform samples from ``domain`` as a (count, dim) array."""
    if int(count) < 1:
        raise ValueError("count must be at least 1")
    rng = make_rng(seed)
    if isinstance(domain, Box):
        t = rng.random((count, domain.dim))
        return domain.lo + t * (domain.hi - domain.lo)
    if isinstance(domain, Ball):
        z = rng.standard_normal((count, domain.dim))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        rad = domain.radius * rng.random((count, 1)) ** (1.0 / domain.dim)
        pts = z / norms * rad
        # rounding can push |pts| one ulp past the radius
        over = np.linalg.norm(pts, axis=1) > domain.radius
        pts[over] *= (1 - 1e-15) * domain.radius / np.linalg.norm(pts[over], axis=1, keepdims=True)
        return domain.center + pts
    raise TypeError(f"unsupported domain {domain!r}")


# --- zoo --------------------------------------------------------------------

def _affine(c1, c0=0.0):
    c1 = as_vec(c1)
    c0 = float(c0)
    return ScalarField(
        dim=c1.size,
        func=lambda u: float(c1 @ u) + c0,
        grad=lambda u: c1.copy(),
        convex=True,
        concave=True,
        label=f"affine({[float(x) for x in c1]}, {c0})",
    )


def _constant(c0=0.0, dim=2):
    return ScalarField(
        dim=dim,
        func=lambda u: float(c0),
        grad=lambda u: np.zeros(dim),
        convex=True,
        concave=True,
        label=f"constant({float(c0)})",
    )


def _norm(c0=0.0, dim=2):
    def grad(u):
        r = np.linalg.norm(u)
        return u / r if r > 0 else np.full(dim, np.nan)

    return ScalarField(
        dim=dim,
        func=lambda u: float(np.linalg.norm(u)) + c0,
        grad=grad,
        convex=True,
        differentiable=False,
        label=f"norm({float(c0)})",
    )


def _smoothed_norm(eps, c0=0.0, dim=2):
    eps = float(eps)
    if not eps > 0:
        raise ValueError("smoothed_norm requires eps > 0")
    return ScalarField(
        dim=dim,
        func=lambda u: float(np.sqrt(eps * eps + u @ u)) + c0,
        grad=lambda u: u / np.sqrt(eps * eps + u @ u),
        convex=True,
        label=f"smoothed_norm({eps}, {float(c0)})",
    )


def _quadratic(Q):
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if Q.shape[0] != Q.shape[1]:
        raise DimensionError(f"quadratic form must be square, got {Q.shape}")
    Q = 0.5 * (Q + Q.T)
    if np.min(np.linalg.eigvalsh(Q)) < -1e-12 * max(1.0, np.abs(Q).max()):
        raise ValueError("quadratic form must be positive semidefinite")
    return ScalarField(
        dim=Q.shape[0],
        func=lambda u: 0.5 * float(u @ Q @ u),
        grad=lambda u: Q @ u,
        convex=True,
        label="quadratic",
    )


def _parabola_distance():
    # local import: distfield depends on this module
    from .distfield import parabola_distance_field

    return parabola_distance_field()


ZOO = {
    "affine": "affine:c1_1,...,c1_n:c0   <c1, u> + c0",
    "constant": "constant:c0               c0",
    "norm": "norm:c0                   |u| + c0, not differentiable at 0",
    "smoothed_norm": "smoothed_norm:eps:c0      sqrt(eps^2 + |u|^2) + c0",
    "sqrt_quadratic": "sqrt_quadratic            sqrt(1 + |u|^2)",
    "quadratic": "quadratic:q11,q12,...     u^T Q u / 2, Q row-major and PSD",
    "parabola_distance": "parabola_distance         distance to the graph of x^2 (2-D)",
}


def make_zoo_field(name, *, dim=2, **params):
    """Build one of the zoo fields by name.

    >>> f = make_zoo_field("affine", c1=[0.6, 0.8], c0=1.0)
    >>> float(gradient(f, [7.0, -2.0])[1])
    0.8
    """
    if name == "affine":
        return _affine(params["c1"], params.get("c0", 0.0))
    if name == "constant":
        return _constant(params.get("c0", 0.0), dim)
    if name == "norm":
        return _norm(params.get("c0", 0.0), dim)
    if name == "smoothed_norm":
        return _smoothed_norm(params.get("eps", 0.1), params.get("c0", 0.0), dim)
    if name == "sqrt_quadratic":
        f = _smoothed_norm(1.0, 0.0, dim)
        f.label = "sqrt_quadratic"
        return f
    if name == "quadratic":
        Q = params.get("Q")
        return _quadratic(np.eye(dim) if Q is None else Q)
    if name == "parabola_distance":
        if dim != 2:
            raise DimensionError("parabola_distance is only defined in dimension 2")
        return _parabola_distance()
    raise ValueError(f"unknown zoo field {name!r}; choose from {sorted(ZOO)}")


def parse_field_spec(text, dim=None):
    """Parse colon-delimited specs such as ``"affine:0.6,0.8:1.0"``.

    ``dim`` supplies the dimension for fields whose parameters do not fix it.
    """
    parts = [p.strip() for p in text.strip().split(":")]
    name, args = parts[0], parts[1:]

    def floats(s):
        return [float(x) for x in s.split(",") if x.strip()]

    def scalar(i, default):
        return float(args[i]) if len(args) > i and args[i] != "" else default

    try:
        if name == "affine":
            if not args:
                raise ValueError("affine needs coefficients")
            c1 = floats(args[0])
            field = make_zoo_field("affine", c1=c1, c0=scalar(1, 0.0))
        elif name == "quadratic":
            if args:
                q = floats(args[0])
                n = int(round(np.sqrt(len(q))))
                if n * n != len(q):
                    raise ValueError("quadratic needs n*n entries")
                field = make_zoo_field("quadratic", Q=np.reshape(q, (n, n)))
            else:
                field = make_zoo_field("quadratic", dim=dim or 2)
        elif name in ("constant", "norm"):
            field = make_zoo_field(name, dim=dim or 2, c0=scalar(0, 0.0))
        elif name == "smoothed_norm":
            field = make_zoo_field(name, dim=dim or 2, eps=scalar(0, 0.1), c0=scalar(1, 0.0))
        elif name in ("sqrt_quadratic", "parabola_distance"):
            field = make_zoo_field(name, dim=dim or 2)
        else:
            raise ValueError(f"unknown zoo field {name!r}; choose from {sorted(ZOO)}")
    except (IndexError, KeyError) as exc:
        raise ValueError(f"malformed field spec {text!r}") from exc
    if dim is not None and field.dim != dim:
        raise DimensionError(f"field {text!r} has dimension {field.dim}, domain has {dim}")
    return field
