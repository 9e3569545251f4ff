"""
Distance functions to graphs of smooth functions g: R^(n-1) -> R.

The distance f(u) = min_x |(x, g(x)) - u| is computed by a multi-start
damped Newton method on the stationarity system

    (g(x) - u_n) D_k g(x) + x_k - u_k = 0,   k = 1..n-1,

and its gradient by the projection identity grad f(u) = (u - foot) / f(u).
For the parabola g(x) = x^2 the minimizer also has a closed form (Cardano),
which is kept as an independent check of the numeric projection.

Graph callables are vectorized: ``g`` maps (..., n-1) -> (...), ``dg`` maps
(..., n-1) -> (..., n-1) and the optional ``d2g`` maps to (..., n-1, n-1).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .numcore import (
    ConvergenceError,
    DimensionError,
    ScalarField,
    Tolerances,
    as_vec,
    make_rng,
)

N_PERTURBED_STARTS = 8
CLOSED_FORM_MARGIN = 1e-9


class SingularPointError(ValueError):
    """The distance field has no well-defined gradient at the query point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class OnGraphError(SingularPointError):
    pass


class AmbiguousProjectionError(SingularPointError):
    pass


class DiscriminantNotPositive(ValueError):
    pass


class SingularClass(str, enum.Enum):
    ON_GRAPH = "OnGraph"
    MULTI_ROOT = "MultiRoot"
    CUSP_CONDITION = "CuspCondition"
    REGULAR = "Regular"

    def __str__(self):
        return self.value


@dataclass
class GraphSpec:
    ambient_dim: int
    g: Callable
    dg: Optional[Callable] = None
    d2g: Optional[Callable] = None
    label: str = ""
    # optional (U, values, margin) -> array of SingularClass values
    classifier: Optional[Callable] = None

    def __post_init__(self):
        if self.ambient_dim < 2:
            raise ValueError("graph distance needs ambient dimension n >= 2")

    @property
    def m(self):
        return self.ambient_dim - 1

    def grad_g(self, X):
        if self.dg is not None:
            return np.asarray(self.dg(X), dtype=float)
        h = 1e-6
        out = np.empty(X.shape)
        for k in range(self.m):
            e = np.zeros(self.m)
            e[k] = h
            out[..., k] = (self.g(X + e) - self.g(X - e)) / (2 * h)
        return out

    def hess_g(self, X):
        if self.d2g is not None:
            return np.asarray(self.d2g(X), dtype=float).reshape(X.shape + (self.m,))
        h = 1e-5
        out = np.empty(X.shape + (self.m,))
        for k in range(self.m):
            e = np.zeros(self.m)
            e[k] = h
            out[..., k] = (self.grad_g(X + e) - self.grad_g(X - e)) / (2 * h)
        return 0.5 * (out + np.swapaxes(out, -1, -2))


@dataclass
class ProjectionResult:
    minimizer: np.ndarray
    foot: np.ndarray
    value: float
    stationarity_residual: float
    multiple: bool
    converged: bool = True


@dataclass
class FieldSample:
    value: float
    grad: np.ndarray
    projection: ProjectionResult


@dataclass
class BatchProjection:
    """Column-wise projection results for N query points."""

    minimizer: np.ndarray  # (N, n-1)
    foot: np.ndarray  # (N, n)
    value: np.ndarray  # (N,)
    residual: np.ndarray  # (N,)
    multiple: np.ndarray  # (N,) bool
    converged: np.ndarray  # (N,) bool

    def __getitem__(self, i):
        return ProjectionResult(
            minimizer=self.minimizer[i].copy(),
            foot=self.foot[i].copy(),
            value=float(self.value[i]),
            stationarity_residual=float(self.residual[i]),
            multiple=bool(self.multiple[i]),
            converged=bool(self.converged[i]),
        )


def _start_offsets(m, seed):
    half = N_PERTURBED_STARTS // 2
    z = make_rng(seed).standard_normal((half, m))
    # antithetic pairs cover both sides of symmetric graphs
    return np.concatenate([np.zeros((1, m)), z, -z])


def project_batch(graph, U, tol=None, seed=0, max_iter=100):
    """Project N query points onto the graph; returns a ``BatchProjection``.

    Every query is started from its first n-1 coordinates plus eight seeded
    perturbations scaled by ``1 + |u|``. All starts are advanced together.
    """
    tol = tol or Tolerances()
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != graph.ambient_dim:
        raise DimensionError(f"expected points of dimension {graph.ambient_dim}, got {U.shape[1]}")
    m = graph.m
    n_q = U.shape[0]
    offsets = _start_offsets(m, seed)
    n_s = offsets.shape[0]
    scale_q = 1.0 + np.linalg.norm(U, axis=1)
    # one row per (query, start) pair
    Up = np.repeat(U[:, :m], n_s, axis=0)
    un = np.repeat(U[:, m], n_s)
    scale = np.repeat(scale_q, n_s)
    X = Up + scale[:, None] * np.tile(offsets, (n_q, 1))

    active = np.arange(X.shape[0])
    for _ in range(max_iter):
        if active.size == 0:
            break
        x, up, c, sc = X[active], Up[active], un[active], scale[active]
        r = graph.g(x) - c
        dgv = graph.grad_g(x)
        G = x - up + r[:, None] * dgv
        moving = np.max(np.abs(G), axis=1) > 1e-15 * sc
        active, x, up, c, sc, r, dgv, G = (
            t[moving] for t in (active, x, up, c, sc, r, dgv, G)
        )
        if active.size == 0:
            break
        H = np.eye(m) + dgv[:, :, None] * dgv[:, None, :] + r[:, None, None] * graph.hess_g(x)
        if m == 1:
            step = -G / np.maximum(np.abs(H[:, 0, 0]), 1e-12)[:, None]
        else:
            # absolute-eigenvalue modification keeps the step a descent direction
            w, V = np.linalg.eigh(H)
            w = np.maximum(np.abs(w), 1e-12)
            step = -np.einsum("kij,kj->ki", V, np.einsum("kji,kj->ki", V, G) / w)
        slen = np.linalg.norm(step, axis=1)
        step *= np.minimum(1.0, 10.0 * sc / np.maximum(slen, 1e-300))[:, None]

        phi0 = 0.5 * (np.sum((x - up) ** 2, axis=1) + r * r)
        slope = np.sum(G * step, axis=1)
        gnorm = np.max(np.abs(G), axis=1)
        # below rounding the objective cannot rank candidates; use |G| instead
        flat = np.abs(slope) <= 1e-13 * (phi0 + 1e-300)
        alpha = np.ones(active.size)
        accepted = np.zeros(active.size, dtype=bool)
        todo = np.arange(active.size)
        for _ in range(50):
            cand = x[todo] + alpha[todo, None] * step[todo]
            rc = graph.g(cand) - c[todo]
            phic = 0.5 * (np.sum((cand - up[todo]) ** 2, axis=1) + rc * rc)
            ok = phic <= phi0[todo] + 1e-4 * alpha[todo] * slope[todo]
            fl = flat[todo]
            if fl.any():
                Gc = cand[fl] - up[todo][fl] + rc[fl, None] * graph.grad_g(cand[fl])
                ok[fl] |= np.max(np.abs(Gc), axis=1) < gnorm[todo][fl]
            X[active[todo[ok]]] = cand[ok]
            accepted[todo[ok]] = True
            todo = todo[~ok]
            if todo.size == 0:
                break
            alpha[todo] *= 0.5
        # a rejected or negligible step means the start has stalled at rounding level
        tiny = alpha * np.linalg.norm(step, axis=1) <= 1e-16 * sc
        active = active[accepted & ~tiny]

    r = graph.g(X) - un
    G = X - Up + r[:, None] * graph.grad_g(X)
    residual = np.max(np.abs(G), axis=1).reshape(n_q, n_s)
    values = np.sqrt(np.sum((X - Up) ** 2, axis=1) + r * r).reshape(n_q, n_s)
    X = X.reshape(n_q, n_s, m)

    best = np.argmin(values, axis=1)
    idx = np.arange(n_q)
    x_best = X[idx, best]
    feet_all = np.concatenate([X, graph.g(X)[..., None]], axis=-1)
    foot = feet_all[idx, best]
    v_best = values[idx, best]
    res_best = residual[idx, best]

    foot_gap = np.linalg.norm(feet_all - foot[:, None, :], axis=-1)
    rivals = (
        (np.abs(values - v_best[:, None]) <= tol.tol_equal)
        & (foot_gap > tol.tol_equal)
        & (residual <= tol.tol_residual)
    )
    return BatchProjection(
        minimizer=x_best,
        foot=foot,
        value=v_best,
        residual=res_best,
        multiple=rivals.any(axis=1),
        converged=res_best <= tol.tol_residual,
    )


def project_to_graph(graph, u, tol=None, seed=0, max_iter=100):
    """Nearest point on the graph of ``graph.g`` to ``u``.

    Raises ``ConvergenceError`` when no start reaches the stationarity
    tolerance within ``max_iter`` Newton steps.
    """
    u = as_vec(u, graph.ambient_dim)
    res = project_batch(graph, u[None, :], tol=tol, seed=seed, max_iter=max_iter)[0]
    if not res.converged:
        raise ConvergenceError(
            f"projection of {u} did not converge: stationarity residual {res.stationarity_residual:.3e}"
        )
    return res


def distance_values(graph, U, tol=None, seed=0):
    """Vectorized distance values for an (N, n) array of points."""
    return project_batch(graph, U, tol=tol, seed=seed).value


def gradient_from_projection(u, foot, value):
    """Gradient of the distance from its nearest foot point.

    D_i f = -(pi_i(u) - u_i) / f(u) for i < n and D_n f = -(g(pi(u)) - u_n) / f(u);
    both read off the foot coordinates, so the result is (u - foot) / f(u).
    """
    u = np.asarray(u, dtype=float)
    foot = np.asarray(foot, dtype=float)
    return -(foot - u) / np.asarray(value, dtype=float)[..., None]


def evaluate_distance_field(graph, u, tol=None, seed=0):
    """Distance value and gradient at ``u``.

    Raises ``OnGraphError`` when the distance is within ``singular_margin``
    of zero and ``AmbiguousProjectionError`` when several nearest feet exist.
    """
    tol = tol or Tolerances()
    u = as_vec(u, graph.ambient_dim)
    proj = project_to_graph(graph, u, tol=tol, seed=seed)
    if proj.value <= tol.singular_margin:
        raise OnGraphError(f"{u} lies on the graph (distance {proj.value:.3e})", u)
    if proj.multiple:
        raise AmbiguousProjectionError(f"{u} has several nearest points; gradient undefined", u)
    grad = gradient_from_projection(u, proj.foot, proj.value)
    return FieldSample(value=proj.value, grad=grad, projection=proj)


# --- the parabola g(x) = x^2 -------------------------------------------------

def parabola_discriminant(u):
    """D(u) = u1^2/16 + (1/2 - u2)^3 / 27; positive means one real root."""
    u = np.asarray(u, dtype=float)
    u1, u2 = u[..., 0], u[..., 1]
    return u1 * u1 / 16.0 + (0.5 - u2) ** 3 / 27.0


def parabola_cubic(x, u):
    """x^3 + (1/2 - u2) x - u1/2, whose real roots are the stationary points."""
    return x**3 + (0.5 - u[1]) * x - 0.5 * u[0]


def parabola_projection(u, margin=CLOSED_FORM_MARGIN):
    """Closed-form nearest-point abscissa on y = x^2 when D(u) > margin.

    Cardano: x = cbrt(u1/4 + sqrt D) + cbrt(u1/4 - sqrt D), using real cube
    roots. The smaller cube root is recovered from the product of the two,
    cbrt(u1/4 + sqrt D) * cbrt(u1/4 - sqrt D) = -(1/2 - u2)/3, which avoids
    cancellation near u2 = 1/2.
    """
    u = as_vec(u, 2)
    D = float(parabola_discriminant(u))
    if not D > margin:
        raise DiscriminantNotPositive(f"D(u) = {D:.6g} is not positive at u = {u}")
    a = u[0] / 4.0
    sd = np.sqrt(D)
    big = float(np.cbrt(a + sd if a >= 0 else a - sd))
    p = 0.5 - u[1]
    small = -p / (3.0 * big)
    return big + small


def _class_array(n):
    out = np.empty(n, dtype=object)
    out[:] = [SingularClass.REGULAR] * n
    return out


def _classify_parabola(U, values, margin):
    U = np.atleast_2d(U)
    D = parabola_discriminant(U)
    cusp_gap = np.abs(np.abs(U[:, 0]) - 4.0 * np.sqrt(np.maximum(D, 0.0)))
    out = _class_array(U.shape[0])
    out[(D > 0) & (cusp_gap <= margin)] = SingularClass.CUSP_CONDITION
    out[D <= margin] = SingularClass.MULTI_ROOT
    out[np.asarray(values) <= margin] = SingularClass.ON_GRAPH
    return out


def classify_singularity(u, value=None, margin=1e-3):
    """Singular-locus class of a point for the parabola distance field.

    ``value`` is the distance at ``u``; it is computed by projection when
    omitted.
    """
    u = as_vec(u, 2)
    if value is None:
        value = project_to_graph(parabola_graph(), u).value
    return _classify_parabola(u[None, :], [value], margin)[0]


def _g_parabola(X):
    return X[..., 0] ** 2


def _dg_parabola(X):
    return 2.0 * X


def _d2g_parabola(X):
    return np.full(X.shape + (1,), 2.0)


def parabola_graph():
    return GraphSpec(
        ambient_dim=2,
        g=_g_parabola,
        dg=_dg_parabola,
        d2g=_d2g_parabola,
        label="parabola",
        classifier=_classify_parabola,
    )


def distance_field(graph, tol=None, label=None):
    """Wrap a graph distance as a ``ScalarField``.

    The gradient uses the projection identity at the best foot found, even
    on the medial axis, and is NaN on the graph itself.
    """
    tol = tol or Tolerances()

    def func(u):
        return float(project_to_graph(graph, u, tol=tol).value)

    def grad(u):
        proj = project_to_graph(graph, u, tol=tol)
        if proj.value == 0.0:
            return np.full(graph.ambient_dim, np.nan)
        return gradient_from_projection(u, proj.foot, proj.value)

    return ScalarField(
        dim=graph.ambient_dim,
        func=func,
        grad=grad,
        convex=False,
        differentiable=False,
        label=label or f"distance({graph.label})",
    )


def parabola_distance_field(tol=None):
    return distance_field(parabola_graph(), tol=tol, label="parabola_distance")


# --- grid emission ------------------------------------------------------------

CSV_HEADER = "u1,u2,value,gradnorm,class"


@dataclass
class GridArtifact:
    nx: int
    ny: int
    points: np.ndarray  # (nx*ny, 2), row-major with u1 fastest
    value: np.ndarray
    gradnorm: np.ndarray
    classes: np.ndarray

    def column(self, name):
        if name == "value":
            return self.value
        if name == "gradnorm":
            return self.gradnorm
        raise ValueError(f"no scalar column {name!r}")

    def to_csv(self):
        lines = [CSV_HEADER]
        for (u1, u2), v, gn, c in zip(self.points, self.value, self.gradnorm, self.classes):
            lines.append(f"{u1:.17g},{u2:.17g},{v:.17g},{gn:.17g},{c.value}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.to_csv())
        except OSError as exc:
            raise OSError(f"cannot write grid CSV to {path}: {exc}") from exc

    def to_pgm(self, column="value"):
        """8-bit binary PGM of a scalar column, min-max normalized; row 0 is max u2."""
        data = np.asarray(self.column(column), dtype=float).reshape(self.ny, self.nx)[::-1]
        finite = np.isfinite(data)
        img = np.zeros(data.shape, dtype=np.uint8)
        if finite.any():
            lo, hi = data[finite].min(), data[finite].max()
            span = hi - lo if hi > lo else 1.0
            img[finite] = np.rint(255.0 * (data[finite] - lo) / span).astype(np.uint8)
        header = f"P5\n{self.nx} {self.ny}\n255\n".encode("ascii")
        return header + img.tobytes()

    def write_pgm(self, path, column="value"):
        try:
            with open(path, "wb") as fh:
                fh.write(self.to_pgm(column))
        except OSError as exc:
            raise OSError(f"cannot write grid PGM to {path}: {exc}") from exc


def _generic_classes(values, multiple, margin):
    out = _class_array(values.shape[0])
    out[multiple] = SingularClass.MULTI_ROOT
    out[values <= margin] = SingularClass.ON_GRAPH
    return out


def emit_grid(graph, lo, hi, nx, ny, tol=None, seed=0):
    """Sample the distance field on an nx-by-ny lattice over the box [lo, hi].

    Records are ordered row by row (u2 ascending), u1 fastest. The gradient
    norm is NaN where the gradient is undefined (on the graph or where the
    nearest point is ambiguous).
    """
    tol = tol or Tolerances()
    if graph.ambient_dim != 2:
        raise DimensionError("grid emission is only defined for 2-D graphs")
    if nx < 2 or ny < 2:
        raise ValueError("grid needs nx, ny >= 2")
    lo = as_vec(lo, 2)
    hi = as_vec(hi, 2)
    u1 = np.linspace(lo[0], hi[0], nx)
    u2 = np.linspace(lo[1], hi[1], ny)
    g1, g2 = np.meshgrid(u1, u2)
    pts = np.column_stack([g1.ravel(), g2.ravel()])

    proj = project_batch(graph, pts, tol=tol, seed=seed)
    margin = tol.singular_margin
    defined = (proj.value > margin) & ~proj.multiple
    gradnorm = np.full(pts.shape[0], np.nan)
    grads = (pts[defined] - proj.foot[defined]) / proj.value[defined, None]
    gradnorm[defined] = np.linalg.norm(grads, axis=1)
    if graph.classifier is not None:
        classes = graph.classifier(pts, proj.value, margin)
    else:
        classes = _generic_classes(proj.value, proj.multiple, margin)
    return GridArtifact(nx=nx, ny=ny, points=pts, value=proj.value, gradnorm=gradnorm, classes=classes)
