"""
Verdict engine: decides whether a sampled field is affine or constant,
and otherwise names the hypothesis it visibly violates.

Pipeline for ``classify_field`` in convex mode:

1. gradient norms at the domain center plus seeded samples; points whose
   finite differences are unstable are set aside as non-smooth suspects;
   a norm spread above ``10 * tol_grad_norm`` gives ``NotConstantNorm``;
2. seeded first-order gaps f(v) - f(u) - <grad f(u), v - u>; one below
   ``-tol_equal`` gives ``NotConvex`` (skipped in dimension 1, where a
   continuous derivative of constant modulus is already constant);
3. any suspect gives ``NotDifferentiable`` at the worst one;
4. a vanishing common norm gives ``Constant``;
5. otherwise c1 = mean gradient, c0 = mean of f(u) - <c1, u>, checked on
   fresh samples; a residual above ``tol_equal`` is reported as
   ``NotConstantNorm`` with the residual as evidence.

Concave mode classifies -f and negates the affine parameters.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import ClassVar, Optional

import numpy as np

from ..numcore import (
    DimensionError,
    NonFiniteError,
    Tolerances,
    gradient,
    make_rng,
    negate,
    sample_points,
)
from .fixed_points import brouwer_fixed_point, resolvent_point
from .lines import line_pair_witness
from .probes import ray_deviation, ray_gradient_drift


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


@dataclass
class WitnessReport:
    gradnorm: dict = field(default_factory=dict)
    fixed_points: list = field(default_factory=list)
    rays: list = field(default_factory=list)
    line_gaps: list = field(default_factory=list)
    convexity: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(
            {
                "meta": self.meta,
                "gradnorm": self.gradnorm,
                "fixed_points": self.fixed_points,
                "rays": self.rays,
                "line_gaps": self.line_gaps,
                "convexity": self.convexity,
                "verdict": self.verdict,
            }
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"


@dataclass(kw_only=True)
class Verdict:
    kind: ClassVar[str] = "Verdict"
    report: Optional[WitnessReport] = field(default=None, repr=False, compare=False)

    def params(self):
        return {}

    def evidence_dict(self):
        return {}

    def negated(self):
        return self

    def summary(self):
        return {"kind": self.kind, "params": self.params(), "evidence": self.evidence_dict()}


@dataclass(kw_only=True)
class Affine(Verdict):
    kind: ClassVar[str] = "Affine"
    c1: np.ndarray
    c0: float
    max_residual: float = 0.0

    def params(self):
        return {"c1": self.c1, "c0": self.c0}

    def evidence_dict(self):
        return {"max_affine_residual": self.max_residual, "gradnorm": float(np.linalg.norm(self.c1))}

    def negated(self):
        return Affine(c1=-self.c1, c0=-self.c0, max_residual=self.max_residual, report=self.report)


@dataclass(kw_only=True)
class Constant(Verdict):
    kind: ClassVar[str] = "Constant"
    c0: float
    max_gradnorm: float = 0.0

    def params(self):
        return {"c0": self.c0}

    def evidence_dict(self):
        return {"max_gradnorm": self.max_gradnorm}

    def negated(self):
        return Constant(c0=-self.c0, max_gradnorm=self.max_gradnorm, report=self.report)


@dataclass(kw_only=True)
class NotConstantNorm(Verdict):
    kind: ClassVar[str] = "NotConstantNorm"
    spread: float
    min: float
    max: float
    affine_residual: Optional[float] = None

    def params(self):
        return {"spread": self.spread, "min": self.min, "max": self.max}

    def evidence_dict(self):
        out = {"spread": self.spread}
        if self.affine_residual is not None:
            out["affine_residual"] = self.affine_residual
        return out


@dataclass(kw_only=True)
class NotConvex(Verdict):
    kind: ClassVar[str] = "NotConvex"
    u: np.ndarray
    v: np.ndarray
    gap: float

    def params(self):
        return {"u": self.u, "v": self.v, "gap": self.gap}

    def evidence_dict(self):
        return {"first_order_gap": self.gap}


@dataclass(kw_only=True)
class NotDifferentiable(Verdict):
    kind: ClassVar[str] = "NotDifferentiable"
    point: np.ndarray
    evidence: float

    def params(self):
        return {"point": self.point, "evidence": self.evidence}

    def evidence_dict(self):
        return {"fd_instability": self.evidence}


def smoothness_defect(field, u, grad, tol):
    """Finite-difference instability at ``u``; returns ``(flagged, evidence)``.

    Flags the point when the central differences at steps h and h/10 differ
    by more than ``100 * tol_grad_norm``, when the analytic gradient is
    missing (non-finite) or disagrees with them by that much, or when the
    one-sided jump (f(u+h) - 2 f(u) + f(u-h)) / h fails to shrink with h,
    which is the signature of a kink.
    """
    h = tol.fd_step
    thr = 100.0 * tol.tol_grad_norm
    f0 = field(u)
    central, jump = [], []
    for step in (h, h / 10.0):
        c = np.empty(field.dim)
        j = np.empty(field.dim)
        for i in range(field.dim):
            e = np.zeros(field.dim)
            e[i] = step
            fp, fm = field(u + e), field(u - e)
            c[i] = (fp - fm) / (2.0 * step)
            j[i] = (fp - 2.0 * f0 + fm) / step
        central.append(c)
        jump.append(np.max(np.abs(j)))
    d_steps = float(np.max(np.abs(central[0] - central[1])))
    d_analytic = 0.0
    if grad is not None and field.grad is not None:
        d_analytic = float(np.max(np.abs(grad - central[0])))
    kink = jump[0] > thr and jump[1] > 0.5 * jump[0]
    flagged = grad is None or d_steps > thr or d_analytic > thr or kink
    return bool(flagged), max(d_steps, d_analytic, float(jump[0]))


def _sample_set(domain, n_samples, seed):
    return np.vstack([domain.center[None, :], sample_points(domain, n_samples, seed)])


def classify_field(field, domain, tol=None, mode="convex", seed=0, n_samples=256, n_pairs=2048):
    """Classify ``field`` on ``domain`` as Affine or Constant, else name the failed hypothesis.

    Returns a ``Verdict`` whose ``report`` holds the gradient-norm and
    convexity statistics gathered on the way.
    """
    tol = tol or Tolerances()
    if mode == "concave":
        verdict = classify_field(negate(field), domain, tol, "convex", seed, n_samples, n_pairs)
        out = verdict.negated()
        out.report = verdict.report
        out.report.meta["mode"] = "concave"
        out.report.verdict = out.summary()
        return out
    if mode != "convex":
        raise ValueError(f"mode must be 'convex' or 'concave', got {mode!r}")
    if domain.dim != field.dim:
        raise DimensionError(f"domain has dimension {domain.dim}, field has {field.dim}")
    if domain.min_extent < 10.0 * tol.fd_step:
        raise ValueError("domain is degenerate at the finite-difference scale")

    report = WitnessReport(
        meta={
            "field": field.label,
            "dim": field.dim,
            "mode": "convex",
            "path": "single-variable" if field.dim == 1 else "multivariate",
            "seed": seed,
            "n_samples": n_samples,
            "tolerances": tol.as_dict(),
        }
    )

    def finish(verdict):
        verdict.report = report
        report.verdict = verdict.summary()
        return verdict

    pts = _sample_set(domain, n_samples, seed)
    values = np.array([field(p) for p in pts])
    grads = np.full(pts.shape, np.nan)
    suspect = np.zeros(len(pts), dtype=bool)
    evidence = np.zeros(len(pts))
    for k, p in enumerate(pts):
        try:
            g = gradient(field, p)
            grads[k] = g
        except NonFiniteError:
            g = None
        suspect[k], evidence[k] = smoothness_defect(field, p, g, tol)

    # step 1: gradient norms on the smooth points
    smooth = np.flatnonzero(~suspect)
    if smooth.size == 0:
        k = int(np.argmax(evidence))
        return finish(NotDifferentiable(point=pts[k], evidence=float(evidence[k])))
    norms = np.linalg.norm(grads[smooth], axis=1)
    gmin, gmax, gmean = float(norms.min()), float(norms.max()), float(norms.mean())
    spread = gmax - gmin
    report.gradnorm = {"min": gmin, "max": gmax, "mean": gmean, "spread": spread, "count": int(smooth.size)}
    if spread > 10.0 * tol.tol_grad_norm:
        return finish(NotConstantNorm(spread=spread, min=gmin, max=gmax))

    # step 2: first-order convexity gaps on seeded pairs
    rng = make_rng(seed + 1)
    i = smooth[rng.integers(0, smooth.size, n_pairs)]
    j = smooth[rng.integers(0, smooth.size, n_pairs)]
    keep = i != j
    i, j = i[keep], j[keep]
    if i.size:
        d = pts[j] - pts[i]
        gaps = values[j] - values[i] - np.einsum("kd,kd->k", grads[i], d)
        mono = np.einsum("kd,kd->k", grads[i] - grads[j], -d)
        worst = int(np.argmin(gaps))
        report.convexity = {"min_first_order_gap": float(gaps[worst]), "min_monotonicity": float(mono.min())}
        if field.dim > 1 and gaps[worst] < -tol.tol_equal:
            return finish(NotConvex(u=pts[i[worst]], v=pts[j[worst]], gap=float(gaps[worst])))

    # step 3: non-smooth suspects
    if suspect.any():
        k = int(np.argmax(np.where(suspect, evidence, -np.inf)))
        return finish(NotDifferentiable(point=pts[k], evidence=float(evidence[k])))

    # step 4: zero gradient
    if gmean <= tol.tol_grad_norm:
        return finish(Constant(c0=float(values[0]), max_gradnorm=gmax))

    # step 5: affine fit, checked on fresh samples
    c1 = grads[smooth].mean(axis=0)
    c0 = float(np.mean(values[smooth] - pts[smooth] @ c1))
    fresh = sample_points(domain, n_samples, seed + 2)
    resid = max(abs(field(p) - float(c1 @ p) - c0) for p in fresh)
    if resid <= tol.tol_equal:
        return finish(Affine(c1=c1, c0=c0, max_residual=float(resid)))
    return finish(NotConstantNorm(spread=spread, min=gmin, max=gmax, affine_residual=float(resid)))


def contradicts_claims(field, kind, mode="convex"):
    """True when a verdict of ``kind`` refutes a property the field claims."""
    if kind == "NotConvex":
        return field.concave if mode == "concave" else field.convex
    if kind == "NotDifferentiable":
        return field.differentiable
    return False


def witness_report(field, domain, radii=(1.0,), tol=None, mode="convex", seed=0, n_rays=3, n_samples=256):
    """Run the verdict engine and every proof-step probe; returns a ``WitnessReport``."""
    tol = tol or Tolerances()
    verdict = classify_field(field, domain, tol, mode=mode, seed=seed, n_samples=n_samples)
    report = verdict.report

    for r in radii:
        if field.differentiable:
            res = brouwer_fixed_point(field, r, tol=tol, seed=seed)
            entry = {"kind": "brouwer", **res.as_dict()}
            entry["sphere_gap"] = abs(float(np.linalg.norm(res.point)) - r * report.gradnorm.get("mean", np.nan))
            report.fixed_points.append(entry)
        if field.convex and field.differentiable:
            res = resolvent_point(field, r, tol=tol, seed=seed)
            report.fixed_points.append({"kind": "resolvent", **res.as_dict()})

    bases = _sample_set(domain, max(n_rays - 1, 1), seed + 3)[:n_rays]
    for u in bases:
        try:
            report.rays.append(
                {
                    "base": u,
                    "s_min": -10.0,
                    "s_max": 10.0,
                    "deviation": ray_deviation(field, u),
                    "gradient_drift": ray_gradient_drift(field, u),
                }
            )
        except NonFiniteError as exc:
            report.rays.append({"base": u, "error": str(exc)})

    pair = sample_points(domain, 2, seed + 4)
    try:
        w = line_pair_witness(field, pair[0], pair[1], tol=tol, strict=False)
        report.line_gaps.append({"u": pair[0], "v": pair[1], **w.as_dict()})
    except (ValueError, NonFiniteError) as exc:
        report.line_gaps.append({"u": pair[0], "v": pair[1], "skipped": str(exc)})
    return report
