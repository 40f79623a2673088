"""Horizontal calculus on catalog Carnot groups.

Norms and their horizontal gradients are closed-form and vectorized over
point batches; differential operators (vector fields, sub-p-Laplacian,
infinity-Laplacian, commutators) are second-order central differences
along the left-invariant frame, using a field's analytic gradient for
inner evaluations whenever one is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameterError, SingularPointError
from .groups import CarnotGroup, GroupKind

__all__ = [
    "FDScheme",
    "ScalarField",
    "frame",
    "apply_vector_field",
    "horizontal_gradient",
    "commutator_apply",
    "homogeneous_norm",
    "norm_gradient",
    "norm_gradient_magnitude",
    "hardy_weight",
    "sub_p_laplacian",
    "infinity_laplacian",
    "fundamental_profile",
    "norm_field",
    "fundamental_solution_field",
    "radial_field",
    "subquadratic_convexity_ratio",
    "superquadratic_convexity_ratio",
    "elementary_inequality_margin",
]


@dataclass(frozen=True)
class FDScheme:
    """Finite-difference parameters: step h and gradient regularizer eta."""

    h: float = 1e-3
    eta: float = 0.0

    def __post_init__(self):
        if self.h <= 0:
            raise InvalidParameterError(f"step must be positive, got {self.h}")
        if self.eta < 0:
            raise InvalidParameterError(f"eta must be nonnegative, got {self.eta}")


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of group points.

    ``evaluate`` maps a (k, n) batch of points to (k,) values; ``gradient``,
    when present, maps the batch to the (k, m) horizontal gradient along
    the frame X_1..X_m.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return self.evaluate(np.atleast_2d(np.asarray(pts, dtype=float)))


def _batched(x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return x[None, :], True
    return x, False


def frame(g: CarnotGroup, x: np.ndarray) -> np.ndarray:
    """Direction vectors of X_1..X_m at each point: shape (k, m, n)."""
    pts, _ = _batched(x)
    k, n = pts.shape
    m = g.horizontal_dim
    out = np.zeros((k, m, n))
    out[:, np.arange(m), np.arange(m)] = 1.0
    if g.kind is GroupKind.HEISENBERG:
        nh = g.heisenberg_n
        # X_j = d/dx_j + 2 y_j d/dell, Y_j = d/dy_j - 2 x_j d/dell
        out[:, :nh, -1] = 2.0 * pts[:, nh:2 * nh]
        out[:, nh:2 * nh, -1] = -2.0 * pts[:, :nh]
    elif g.kind is GroupKind.HTYPE:
        v = pts[:, :m]
        for s, Js in enumerate(g.htype_structure):
            # X_i = d/dv_i + (1/2) sum_s (J^s v)_i d/dz_s
            out[:, :, m + s] = 0.5 * (v @ Js.T)
    return out


def apply_vector_field(g: CarnotGroup, j: int, f: ScalarField, x: np.ndarray,
                       s: FDScheme = FDScheme()) -> float:
    """(X_j f)(x) for the 1-based generator index j."""
    m = g.horizontal_dim
    if not 1 <= j <= m:
        raise InvalidParameterError(f"generator index {j} outside 1..{m}")
    pts, single = _batched(g.check_point(x))
    if f.gradient is not None:
        vals = np.asarray(f.gradient(pts))[:, j - 1]
    else:
        v = frame(g, pts)[:, j - 1, :]
        vals = (f(pts + s.h * v) - f(pts - s.h * v)) / (2.0 * s.h)
    return float(vals[0]) if single else vals


def horizontal_gradient(g: CarnotGroup, f: ScalarField, x: np.ndarray,
                        s: FDScheme = FDScheme()) -> np.ndarray:
    """Horizontal gradient (X_1 f, ..., X_m f) at x; batches to (k, m)."""
    pts, single = _batched(g.check_point(x))
    if f.gradient is not None:
        grad = np.asarray(f.gradient(pts))
    else:
        vecs = frame(g, pts)
        grad = np.stack(
            [(f(pts + s.h * vecs[:, j]) - f(pts - s.h * vecs[:, j])) / (2.0 * s.h)
             for j in range(g.horizontal_dim)],
            axis=-1,
        )
    return grad[0] if single else grad


def commutator_apply(g: CarnotGroup, i: int, j: int, f: ScalarField, x: np.ndarray,
                     s: FDScheme = FDScheme()) -> float:
    """([X_i, X_j] f)(x) by nested central differencing."""
    m = g.horizontal_dim
    for idx in (i, j):
        if not 1 <= idx <= m:
            raise InvalidParameterError(f"generator index {idx} outside 1..{m}")

    def once(a: int, pts: np.ndarray) -> np.ndarray:
        v = frame(g, pts)[:, a - 1, :]
        return (f(pts + s.h * v) - f(pts - s.h * v)) / (2.0 * s.h)

    def nested(a: int, b: int, pts: np.ndarray) -> np.ndarray:
        v = frame(g, pts)[:, a - 1, :]
        return (once(b, pts + s.h * v) - once(b, pts - s.h * v)) / (2.0 * s.h)

    pts, single = _batched(g.check_point(x))
    vals = nested(i, j, pts) - nested(j, i, pts)
    return float(vals[0]) if single else vals


# ----------------------------------------------------------------------
# Homogeneous norms and weights
# ----------------------------------------------------------------------

def homogeneous_norm(g: CarnotGroup, x: np.ndarray) -> np.ndarray:
    """Folland-type homogeneous norm: |x|, Koranyi, or Kaplan."""
    pts, single = _batched(g.check_point(x))
    if g.kind is GroupKind.EUCLIDEAN:
        vals = np.linalg.norm(pts, axis=-1)
    elif g.kind is GroupKind.HEISENBERG:
        nh = g.heisenberg_n
        z2 = np.sum(pts[:, :2 * nh] ** 2, axis=-1)
        vals = (z2 ** 2 + pts[:, -1] ** 2) ** 0.25
    else:
        m = g.horizontal_dim
        v2 = np.sum(pts[:, :m] ** 2, axis=-1)
        z2 = np.sum(pts[:, m:] ** 2, axis=-1)
        vals = (v2 ** 2 + g.norm_kappa * z2) ** 0.25
    return float(vals[0]) if single else vals


def _require_nonsingular(pts: np.ndarray) -> None:
    if np.any(np.all(pts == 0.0, axis=-1)):
        raise SingularPointError("quantity is singular at the group origin")


def norm_gradient(g: CarnotGroup, x: np.ndarray) -> np.ndarray:
    """Closed-form horizontal gradient of the homogeneous norm, (k, m)."""
    pts, single = _batched(g.check_point(x))
    _require_nonsingular(pts)
    if g.kind is GroupKind.EUCLIDEAN:
        grad = pts / np.linalg.norm(pts, axis=-1, keepdims=True)
    elif g.kind is GroupKind.HEISENBERG:
        nh = g.heisenberg_n
        xx, yy, ell = pts[:, :nh], pts[:, nh:2 * nh], pts[:, -1:]
        z2 = np.sum(pts[:, :2 * nh] ** 2, axis=-1, keepdims=True)
        rho3 = ((z2 ** 2 + ell ** 2) ** 0.75)
        grad = np.concatenate([(z2 * xx + ell * yy) / rho3,
                               (z2 * yy - ell * xx) / rho3], axis=-1)
    else:
        m = g.horizontal_dim
        v = pts[:, :m]
        z = pts[:, m:]
        v2 = np.sum(v ** 2, axis=-1, keepdims=True)
        K3 = homogeneous_norm(g, pts)[:, None] ** 3
        Jzv = np.zeros_like(v)
        for s, Js in enumerate(g.htype_structure):
            Jzv += z[:, s:s + 1] * (v @ Js.T)
        grad = (v2 * v + 0.25 * g.norm_kappa * Jzv) / K3
    return grad[0] if single else grad


def norm_gradient_magnitude(g: CarnotGroup, x: np.ndarray) -> np.ndarray:
    """|grad N| in closed form: 1, |z|/rho, or |v|/K (at kappa = 16)."""
    pts, single = _batched(g.check_point(x))
    _require_nonsingular(pts)
    if g.kind is GroupKind.EUCLIDEAN:
        vals = np.ones(pts.shape[0])
    elif g.kind is GroupKind.HEISENBERG:
        nh = g.heisenberg_n
        z = np.sqrt(np.sum(pts[:, :2 * nh] ** 2, axis=-1))
        vals = z / homogeneous_norm(g, pts)
    else:
        m = g.horizontal_dim
        v2 = np.sum(pts[:, :m] ** 2, axis=-1)
        z2 = np.sum(pts[:, m:] ** 2, axis=-1)
        K = (v2 ** 2 + g.norm_kappa * z2) ** 0.25
        # general-kappa form; reduces to |v|/K exactly when kappa = 16
        vals = np.sqrt(v2 * (16.0 * v2 ** 2 + g.norm_kappa ** 2 * z2)) / (4.0 * K ** 3)
    return float(vals[0]) if single else vals


def hardy_weight(g: CarnotGroup, p: float, x: np.ndarray) -> np.ndarray:
    """The Hardy weight (|grad N| / N)^p; on H^n equals |z|^p/(|z|^4+ell^2)^(p/2)."""
    if p <= 1:
        raise InvalidParameterError(f"need p > 1, got {p}")
    pts, single = _batched(g.check_point(x))
    _require_nonsingular(pts)
    vals = (norm_gradient_magnitude(g, pts) / homogeneous_norm(g, pts)) ** p
    return float(vals[0]) if single else vals


# ----------------------------------------------------------------------
# Nonlinear operators
# ----------------------------------------------------------------------

def _grad_at(g: CarnotGroup, f: ScalarField, pts: np.ndarray, h: float) -> np.ndarray:
    if f.gradient is not None:
        return np.asarray(f.gradient(pts))
    vecs = frame(g, pts)
    return np.stack(
        [(f(pts + h * vecs[:, j]) - f(pts - h * vecs[:, j])) / (2.0 * h)
         for j in range(g.horizontal_dim)],
        axis=-1,
    )


def sub_p_laplacian(g: CarnotGroup, p: float, f: ScalarField, x: np.ndarray,
                    s: FDScheme = FDScheme()) -> float:
    """Discrete div(|grad f|^(p-2) grad f) along the frame.

    The flux components are evaluated at x +- h v_j(x) with the same step
    at both differencing levels; eta regularizes |grad f|^(p-2) for p < 2.
    """
    pts, single = _batched(g.check_point(x))
    m = g.horizontal_dim
    vecs = frame(g, pts)

    def flux(q: np.ndarray, j: int) -> np.ndarray:
        grad = _grad_at(g, f, q, s.h)
        mag2 = np.sum(grad ** 2, axis=-1) + s.eta ** 2
        return mag2 ** ((p - 2.0) / 2.0) * grad[:, j]

    vals = np.zeros(pts.shape[0])
    for j in range(m):
        vj = vecs[:, j]
        vals += (flux(pts + s.h * vj, j) - flux(pts - s.h * vj, j)) / (2.0 * s.h)
    return float(vals[0]) if single else vals


def infinity_laplacian(g: CarnotGroup, f: ScalarField, x: np.ndarray,
                       s: FDScheme = FDScheme()) -> float:
    """(1/2) <grad(|grad f|^2), grad f> by differencing along the frame."""
    pts, single = _batched(g.check_point(x))
    vecs = frame(g, pts)
    grad = _grad_at(g, f, pts, s.h)

    def sq(q: np.ndarray) -> np.ndarray:
        gg = _grad_at(g, f, q, s.h)
        return np.sum(gg ** 2, axis=-1)

    vals = np.zeros(pts.shape[0])
    for j in range(g.horizontal_dim):
        vj = vecs[:, j]
        vals += 0.5 * grad[:, j] * (sq(pts + s.h * vj) - sq(pts - s.h * vj)) / (2.0 * s.h)
    return float(vals[0]) if single else vals


# ----------------------------------------------------------------------
# Profiles and named fields
# ----------------------------------------------------------------------

def fundamental_profile(g: CarnotGroup, p: float, x: np.ndarray) -> np.ndarray:
    """Fundamental-solution profile: N^((p-Q)/(p-1)), or -log N when p = Q."""
    if p <= 1:
        raise InvalidParameterError(f"need p > 1, got {p}")
    pts, single = _batched(g.check_point(x))
    _require_nonsingular(pts)
    N = homogeneous_norm(g, pts)
    Q = g.homogeneous_dim
    vals = -np.log(N) if p == Q else N ** ((p - Q) / (p - 1.0))
    return float(vals[0]) if single else vals


def norm_field(g: CarnotGroup) -> ScalarField:
    """The homogeneous norm as a field with its analytic gradient."""
    return ScalarField(
        evaluate=lambda pts: homogeneous_norm(g, pts),
        gradient=lambda pts: norm_gradient(g, pts),
    )


def radial_field(g: CarnotGroup, profile: Callable[[np.ndarray], np.ndarray],
                 derivative: Callable[[np.ndarray], np.ndarray]) -> ScalarField:
    """Field f(x) = profile(N(x)) with gradient profile'(N) grad N."""
    def ev(pts):
        return profile(homogeneous_norm(g, np.atleast_2d(pts)))

    def gr(pts):
        pts = np.atleast_2d(pts)
        return derivative(homogeneous_norm(g, pts))[:, None] * norm_gradient(g, pts)

    return ScalarField(evaluate=ev, gradient=gr)


def fundamental_solution_field(g: CarnotGroup, p: float) -> ScalarField:
    """fundamental_profile as a field (analytic gradient included)."""
    Q = g.homogeneous_dim
    if p == Q:
        return radial_field(g, lambda r: -np.log(r), lambda r: -1.0 / r)
    a = (p - Q) / (p - 1.0)
    return radial_field(g, lambda r: r ** a, lambda r: a * r ** (a - 1.0))


def random_annulus_points(g: CarnotGroup, rng: np.random.Generator, count: int,
                          r_lo: float, r_hi: float) -> np.ndarray:
    """Random points with homogeneous norm uniformly in [r_lo, r_hi],
    obtained by dilating box samples onto the target norm."""
    pts = rng.uniform(-1.0, 1.0, size=(count, g.ambient_dim))
    N = np.maximum(homogeneous_norm(g, pts), 1e-9)
    lam = rng.uniform(r_lo, r_hi, count) / N
    scale = lam[:, None] ** np.asarray(g.dilation_exponents, dtype=float)[None, :]
    return pts * scale


# ----------------------------------------------------------------------
# Elementary convexity inequalities for |.|^p
# ----------------------------------------------------------------------

def _expand_terms(p: float, a: np.ndarray, b: np.ndarray):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if nb == 0:
        raise InvalidParameterError("b must be nonzero")
    # convention: |a|^(p-2) a = 0 at a = 0
    cross = 0.0 if na == 0 else p * na ** (p - 2.0) * float(np.dot(a, b))
    lhs = np.linalg.norm(a + b) ** p - na ** p - cross
    return lhs, na, nb


def subquadratic_convexity_ratio(p: float, a: np.ndarray, b: np.ndarray) -> float:
    """Admissible constant for the 1 < p < 2 vector inequality at (a, b)."""
    if not 1 < p < 2:
        raise InvalidParameterError(f"need 1 < p < 2, got {p}")
    lhs, na, nb = _expand_terms(p, a, b)
    return lhs * (na + nb) ** (2.0 - p) / nb ** 2


def superquadratic_convexity_ratio(p: float, a: np.ndarray, b: np.ndarray) -> float:
    """Admissible constant for the p > 2 vector inequality at (a, b)."""
    if p <= 2:
        raise InvalidParameterError(f"need p > 2, got {p}")
    lhs, _, nb = _expand_terms(p, a, b)
    return lhs / nb ** p


def elementary_inequality_margin(p: float, w1: float, w2: float) -> float:
    """w1^p - w2^p - p w2^(p-1) (w1 - w2), strictly positive for w1 != w2."""
    if p <= 1:
        raise InvalidParameterError(f"need p > 1, got {p}")
    if w1 <= 0 or w2 <= 0:
        raise InvalidParameterError("w1 and w2 must be positive")
    if w1 == w2:
        raise InvalidParameterError("degenerate case w1 == w2 has zero margin")
    return w1 ** p - w2 ** p - p * w2 ** (p - 1.0) * (w1 - w2)
