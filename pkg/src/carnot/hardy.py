"""Hardy-inequality machinery.

Evaluates the singular potentials, the normalized p-energy quotient,
the extremal family demonstrating sharpness of ((Q-p)/p)^p, and the
concentrating family that drives the quotient to -infinity for
supercritical potential strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    DegenerateTestFunctionError,
    InvalidParameterError,
    OutOfRangeError,
    ResolutionError,
)
from .groups import CarnotGroup
from .calculus import (
    FDScheme,
    ScalarField,
    frame,
    hardy_weight,
    homogeneous_norm,
    horizontal_gradient,
    norm_gradient,
    radial_field,
)
from .quadrature import AnnularMesh, build_annular_mesh

__all__ = [
    "PotentialKind",
    "PotentialSpec",
    "ExtremalFamilySpec",
    "ConcentratingFamilySpec",
    "evaluate_potential",
    "hardy_constant",
    "rayleigh_parts",
    "rayleigh_quotient",
    "make_extremal",
    "extremal_profile",
    "sharpness_scan",
    "radial_sharpness_scan",
    "concentrating_profile",
    "sigma_inf_probe",
    "radial_sigma_inf_probe",
    "sobolev_quotient",
    "random_test_fields",
]


class PotentialKind(str, Enum):
    HARDY_PURE = "HardyPure"
    HARDY_OSCILLATING = "HardyOscillating"


@dataclass(frozen=True)
class PotentialSpec:
    """Parameters of the singular potentials lam*W and lam*W + beta*W*sin(N^-alpha)."""

    kind: PotentialKind
    lam: float
    beta: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.lam <= 0:
            raise InvalidParameterError(f"lambda must be positive, got {self.lam}")
        if self.kind is PotentialKind.HARDY_OSCILLATING and self.beta == 0:
            raise InvalidParameterError("oscillating potential requires beta != 0")


def evaluate_potential(g: CarnotGroup, spec: PotentialSpec, p: float,
                       x: np.ndarray) -> np.ndarray:
    """V(x) at the weight exponent p used by the caller."""
    W = hardy_weight(g, p, x)
    if spec.kind is PotentialKind.HARDY_PURE:
        return spec.lam * W
    N = homogeneous_norm(g, x)
    return spec.lam * W + spec.beta * W * np.sin(N ** (-spec.alpha))


def hardy_constant(g: CarnotGroup, p: float) -> float:
    """The sharp constant ((Q-p)/p)^p, defined for 1 < p < Q."""
    Q = g.homogeneous_dim
    if not 1 < p < Q:
        raise OutOfRangeError(f"need 1 < p < Q = {Q}, got p = {p}")
    return ((Q - p) / p) ** p


# ----------------------------------------------------------------------
# Rayleigh quotient of the normalized p-energy form
# ----------------------------------------------------------------------

def rayleigh_parts(g: CarnotGroup, p: float, V: Optional[PotentialSpec],
                   phi: ScalarField, mesh: AnnularMesh,
                   fd: FDScheme = FDScheme(h=1e-4)) -> dict:
    """Energy, potential term, mass, and quotient of phi on the mesh."""
    if p <= 1:
        raise InvalidParameterError(f"need p > 1, got {p}")
    pts, w = mesh.nodes, mesh.weights
    vals = np.abs(np.asarray(phi.evaluate(pts), dtype=float)) ** p
    grads = horizontal_gradient(g, phi, pts, fd)
    gmag = np.sqrt(np.sum(np.asarray(grads) ** 2, axis=-1))
    num = float(np.dot(w, gmag ** p))
    den = float(np.dot(w, vals))
    if den <= 1e-300:
        raise DegenerateTestFunctionError("test function vanishes on the mesh")
    pot = float(np.dot(w, evaluate_potential(g, V, p, pts) * vals)) if V is not None else 0.0
    return {
        "numerator_energy": num,
        "potential_term": pot,
        "denominator": den,
        "quotient": (num - pot) / den,
    }


def rayleigh_quotient(g: CarnotGroup, p: float, V: Optional[PotentialSpec],
                      phi: ScalarField, mesh: AnnularMesh,
                      fd: FDScheme = FDScheme(h=1e-4)) -> float:
    return rayleigh_parts(g, p, V, phi, mesh, fd)["quotient"]


def sobolev_quotient(g: CarnotGroup, p: float, phi: ScalarField,
                     mesh: AnnularMesh, fd: FDScheme = FDScheme(h=1e-4)) -> float:
    """(int |grad phi|^p)^(1/p) / (int |phi|^q)^(1/q) with q = Qp/(Q-p)."""
    Q = g.homogeneous_dim
    if not 1 <= p < Q:
        raise OutOfRangeError(f"need 1 <= p < Q = {Q}, got p = {p}")
    q = Q * p / (Q - p)
    pts, w = mesh.nodes, mesh.weights
    grads = np.asarray(horizontal_gradient(g, phi, pts, fd))
    gmag = np.sqrt(np.sum(grads ** 2, axis=-1))
    den = float(np.dot(w, np.abs(np.asarray(phi.evaluate(pts))) ** q))
    if den <= 1e-300:
        raise DegenerateTestFunctionError("test function vanishes on the mesh")
    return float(np.dot(w, gmag ** p)) ** (1.0 / p) / den ** (1.0 / q)


# ----------------------------------------------------------------------
# Extremal family (sharpness)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExtremalFamilySpec:
    """Near-extremal profile: 1 inside the unit ball, N^-((Q-p)/p + eps)
    outside, C1-mollified at N = 1 and cut off smoothly at r_out."""

    epsilon: float
    r_out: float = 50.0
    mollify_width: float = 0.05

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidParameterError("epsilon must be positive")
        if not 0 < self.mollify_width < 1:
            raise InvalidParameterError("mollify_width must lie in (0, 1)")
        if self.r_out <= 1 + self.mollify_width:
            raise InvalidParameterError("r_out must exceed 1 + mollify_width")


def _hermite(x0, y0, d0, x1, y1, d1):
    """Cubic Hermite blend on [x0, x1]; returns (value_fn, deriv_fn)."""
    h = x1 - x0

    def val(r):
        t = (r - x0) / h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1

    def der(r):
        t = (r - x0) / h
        dh00 = 6 * t * (t - 1)
        dh10 = (1 - t) * (1 - 3 * t)
        dh01 = -6 * t * (t - 1)
        dh11 = t * (3 * t - 2)
        return (dh00 * y0 / h + dh10 * d0 + dh01 * y1 / h + dh11 * d1)

    return val, der


def extremal_profile(g: CarnotGroup, p: float, spec: ExtremalFamilySpec):
    """Radial profile and derivative of the mollified extremal function."""
    Q = g.homogeneous_dim
    if not 1 < p < Q:
        raise OutOfRangeError(f"need 1 < p < Q = {Q}, got p = {p}")
    gam = (Q - p) / p + spec.epsilon
    w = spec.mollify_width
    r_cut0 = 0.5 * spec.r_out
    if 1 + w >= r_cut0:
        raise InvalidParameterError("mollified zone overlaps the outer cutoff")
    blend_v, blend_d = _hermite(
        1 - w, 1.0, 0.0,
        1 + w, (1 + w) ** (-gam), -gam * (1 + w) ** (-gam - 1.0),
    )

    def cut(r):
        # quintic smoothstep from 1 at r_out/2 down to 0 at r_out
        t = np.clip((r - r_cut0) / (spec.r_out - r_cut0), 0.0, 1.0)
        return 1.0 - t ** 3 * (10 - 15 * t + 6 * t * t)

    def dcut(r):
        t = np.clip((r - r_cut0) / (spec.r_out - r_cut0), 0.0, 1.0)
        return -30.0 * t ** 2 * (1 - t) ** 2 / (spec.r_out - r_cut0)

    def profile(r):
        r = np.asarray(r, dtype=float)
        out = np.ones_like(r)
        mid = (r > 1 - w) & (r < 1 + w)
        outr = r >= 1 + w
        out[mid] = blend_v(r[mid])
        out[outr] = r[outr] ** (-gam) * cut(r[outr])
        return out

    def derivative(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        mid = (r > 1 - w) & (r < 1 + w)
        outr = r >= 1 + w
        out[mid] = blend_d(r[mid])
        out[outr] = (-gam * r[outr] ** (-gam - 1.0) * cut(r[outr])
                     + r[outr] ** (-gam) * dcut(r[outr]))
        return out

    return profile, derivative


def make_extremal(g: CarnotGroup, p: float, spec: ExtremalFamilySpec) -> ScalarField:
    """The extremal family member as a field with analytic gradient."""
    profile, derivative = extremal_profile(g, p, spec)
    return radial_field(g, profile, derivative)


def _scan_mesh(g: CarnotGroup, r_min: float, r_max: float,
               shells_per_decade: int, cells_per_dim: int) -> AnnularMesh:
    decades = math.log10(r_max / r_min)
    levels = max(4, int(math.ceil(decades * shells_per_decade)))
    return build_annular_mesh(g, r_min, r_max, levels, cells_per_dim)


def sharpness_scan(g: CarnotGroup, p: float, epsilons: Sequence[float],
                   base_spec: ExtremalFamilySpec, lam: Optional[float] = None,
                   r_out_over_eps: float = 10.0, r_min: float = 0.02,
                   shells_per_decade: int = 10, cells_per_dim: int = 14) -> list[dict]:
    """Quotient of the extremal family against lam * (Hardy weight), for a
    decreasing epsilon list; r_out scales as 1/epsilon to keep the tail
    resolved.  Sharpness: with lam at the Hardy constant the quotients
    decrease toward zero."""
    if list(epsilons) != sorted(epsilons, reverse=True):
        raise InvalidParameterError("epsilons must be a decreasing list")
    lam = hardy_constant(g, p) if lam is None else lam
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=lam)
    rows = []
    for eps in epsilons:
        spec = replace(base_spec, epsilon=eps, r_out=r_out_over_eps / eps)
        mesh = _scan_mesh(g, r_min, spec.r_out, shells_per_decade, cells_per_dim)
        phi = make_extremal(g, p, spec)
        parts = rayleigh_parts(g, p, V, phi, mesh)
        parts["parameter"] = eps
        rows.append(parts)
    return rows


def radial_sharpness_scan(g: CarnotGroup, p: float, epsilons: Sequence[float],
                          base_spec: ExtremalFamilySpec, lam: Optional[float] = None,
                          r_out_over_eps: float = 10.0, r_min: float = 1e-6,
                          n_points: int = 4000) -> list[dict]:
    """1-D radial oracle for the scan; exact on Euclidean groups where the
    angular factors of energy and mass coincide (|grad N| = 1)."""
    lam = hardy_constant(g, p) if lam is None else lam
    Q = g.homogeneous_dim
    rows = []
    for eps in epsilons:
        spec = replace(base_spec, epsilon=eps, r_out=r_out_over_eps / eps)
        profile, derivative = extremal_profile(g, p, spec)
        rs, ws = _radial_nodes(r_min, spec.r_out, n_points)
        meas = ws * rs ** (Q - 1)
        num = float(np.dot(meas, np.abs(derivative(rs)) ** p))
        pot = float(np.dot(meas, lam * profile(rs) ** p / rs ** p))
        den = float(np.dot(meas, profile(rs) ** p))
        rows.append({
            "parameter": eps,
            "numerator_energy": num,
            "potential_term": pot,
            "denominator": den,
            "quotient": (num - pot) / den,
        })
    return rows


def _radial_nodes(r_min: float, r_max: float, n_points: int):
    from .quadrature import _gauss_panels

    return _gauss_panels(r_min, r_max, n_points)


_GAUSS8 = np.polynomial.legendre.leggauss(8)


def _oscillatory_sin_integral(f: Callable[[np.ndarray], np.ndarray],
                              r_lo: float, r_hi: float, alpha: float) -> float:
    """Integral of f(r)*sin(r^-alpha) over [r_lo, r_hi].

    Midpoint meshes cannot resolve sin(r^-alpha) near the origin, so the
    integral is computed after the substitution u = r^-alpha: 8-point
    Gauss on each half-period of sin(u), truncated once u exceeds a cap.
    The neglected tail is an alternating series whose terms are bounded
    by the (decaying) envelope at the cap.
    """
    if not 0 < r_lo < r_hi or alpha <= 0:
        raise InvalidParameterError("need 0 < r_lo < r_hi and alpha > 0")
    u_lo = r_hi ** (-alpha)
    u_hi = r_lo ** (-alpha)
    u_cap = min(u_hi, max(1e5, 1e3 * u_lo))
    k0 = math.ceil(u_lo / math.pi + 1e-12)
    k1 = math.floor(u_cap / math.pi)
    interior = math.pi * np.arange(k0, k1 + 1)
    edges = np.concatenate(([u_lo], interior, [u_cap]))
    edges = edges[np.concatenate(([True], np.diff(edges) > 0))]
    if len(edges) < 33:
        # slow-oscillation regime: half-periods alone leave panels too
        # wide for the non-trigonometric factor, so subdivide
        splits = [np.linspace(a, b, 33)[:-1] for a, b in zip(edges, edges[1:])]
        edges = np.concatenate(splits + [edges[-1:]])
    lo, hi = edges[:-1, None], edges[1:, None]
    xg, wg = _GAUSS8
    u = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xg[None, :]
    w = 0.5 * (hi - lo) * wg[None, :]
    r = u ** (-1.0 / alpha)
    vals = f(r) * (1.0 / alpha) * u ** (-1.0 - 1.0 / alpha) * np.sin(u)
    return float(np.sum(vals * w))


# ----------------------------------------------------------------------
# Concentrating family (supercritical divergence)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConcentratingFamilySpec:
    """Radial test sequence concentrating at the origin.

    Member n is supported on [a_n^2, 2b]: a log-linear ramp from zero on
    [a_n^2, a_n], the Hardy-extremal power (r/b)^-(Q-p)/p on [a_n, b]
    (profile "hardy_power"; "flat" uses the constant 1 instead), and a
    linear decay to zero on [b, 2b].
    """

    inner_radii: tuple[float, ...]
    plateau_radius: float
    profile: str = "hardy_power"

    def __post_init__(self):
        b = self.plateau_radius
        radii = self.inner_radii
        if not radii or any(a2 >= a1 for a1, a2 in zip(radii, radii[1:])):
            raise InvalidParameterError("inner radii must be strictly decreasing")
        if radii[0] >= b or b <= 0 or radii[0] >= 1:
            raise InvalidParameterError("need a_1 < min(b, 1)")
        if self.profile not in ("hardy_power", "flat"):
            raise InvalidParameterError(f"unknown profile {self.profile!r}")

    @classmethod
    def geometric(cls, b: float = 0.05, first: float = 0.005, ratio: float = 0.35,
                  n_max: int = 12, profile: str = "hardy_power"):
        radii = tuple(first * ratio ** i for i in range(n_max))
        return cls(inner_radii=radii, plateau_radius=b, profile=profile)


def concentrating_profile(g: CarnotGroup, p: float, fam: ConcentratingFamilySpec,
                          n: int):
    """Radial profile and derivative of family member n (1-based)."""
    if not 1 <= n <= len(fam.inner_radii):
        raise InvalidParameterError(f"n = {n} outside 1..{len(fam.inner_radii)}")
    a = fam.inner_radii[n - 1]
    b = fam.plateau_radius
    Q = g.homogeneous_dim
    gam = (Q - p) / p if fam.profile == "hardy_power" else 0.0
    M = (a / b) ** (-gam)
    L = math.log(1.0 / a)

    def profile(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        ramp = (r > a * a) & (r < a)
        body = (r >= a) & (r <= b)
        decay = (r > b) & (r < 2 * b)
        out[ramp] = M * np.log(r[ramp] / (a * a)) / L
        out[body] = (r[body] / b) ** (-gam)
        out[decay] = (2 * b - r[decay]) / b
        return out

    def derivative(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        ramp = (r > a * a) & (r < a)
        body = (r >= a) & (r <= b)
        decay = (r > b) & (r < 2 * b)
        out[ramp] = M / (r[ramp] * L)
        out[body] = -gam / b * (r[body] / b) ** (-gam - 1.0)
        out[decay] = -1.0 / b
        return out

    return profile, derivative


def sigma_inf_probe(g: CarnotGroup, p: float, V: PotentialSpec,
                    fam: ConcentratingFamilySpec, n_max: int,
                    shells_per_decade: int = 10, cells_per_dim: int = 12) -> list[dict]:
    """Rayleigh quotients of the concentrating family against V.

    All members are integrated on one shared mesh (covering the deepest
    support) so successive quotients differ only through the family, not
    through re-meshing.  Supercritical lam drives the sequence to large
    negative values; subcritical lam keeps it bounded.
    """
    if n_max > len(fam.inner_radii):
        raise InvalidParameterError(f"n_max = {n_max} exceeds family size")
    if shells_per_decade < 6:
        raise ResolutionError("shell-count heuristic: need >= 6 shells per decade")
    a_min = fam.inner_radii[n_max - 1]
    r_min = 0.9 * a_min * a_min
    r_max = 2.0 * fam.plateau_radius
    mesh = _scan_mesh(g, r_min, r_max, shells_per_decade, cells_per_dim)
    oscillating = V.kind is PotentialKind.HARDY_OSCILLATING
    V_pure = PotentialSpec(PotentialKind.HARDY_PURE, lam=V.lam) if oscillating else V
    Q = g.homogeneous_dim
    rows = []
    for n in range(1, n_max + 1):
        profile, derivative = concentrating_profile(g, p, fam, n)
        phi = radial_field(g, profile, derivative)
        parts = rayleigh_parts(g, p, V_pure, phi, mesh)
        if oscillating:
            # For a radial test function the oscillating term carries the
            # same angular factor as the plain Hardy term, so their ratio
            # reduces exactly to a ratio of 1-D radial integrals; the
            # oscillatory one needs the substitution rule, not the mesh.
            a = fam.inner_radii[n - 1]
            f = lambda r: profile(r) ** p * r ** (Q - 1.0 - p)
            rs, ws = _radial_nodes(0.9 * a * a, r_max, 4000)
            t_pure = float(np.dot(ws, f(rs)))
            t_osc = _oscillatory_sin_integral(f, 0.9 * a * a, r_max, V.alpha)
            parts["potential_term"] *= 1.0 + (V.beta / V.lam) * (t_osc / t_pure)
            parts["quotient"] = (parts["numerator_energy"] - parts["potential_term"]) \
                / parts["denominator"]
        parts["parameter"] = n
        rows.append(parts)
    return rows


def radial_sigma_inf_probe(g: CarnotGroup, p: float, V: PotentialSpec,
                           fam: ConcentratingFamilySpec, n_max: int,
                           n_points: int = 6000, angular_ratio: float = 1.0) -> list[dict]:
    """1-D oracle for the probe.

    ``angular_ratio`` is the ratio of the |grad N|^p angular factor
    (shared by energy and potential term) to the plain angular measure of
    the mass; 1.0 on Euclidean groups.  The divergence signature does not
    depend on it.
    """
    Q = g.homogeneous_dim
    rows = []
    for n in range(1, n_max + 1):
        a = fam.inner_radii[n - 1]
        profile, derivative = concentrating_profile(g, p, fam, n)
        rs, ws = _radial_nodes(0.9 * a * a, 2.0 * fam.plateau_radius, n_points)
        meas = ws * rs ** (Q - 1)
        vals = profile(rs) ** p
        num = float(np.dot(meas, np.abs(derivative(rs)) ** p))
        pot = float(np.dot(meas, V.lam / rs ** p * vals))
        if V.kind is PotentialKind.HARDY_OSCILLATING:
            f = lambda r: profile(r) ** p * r ** (Q - 1.0 - p)
            pot += V.beta * _oscillatory_sin_integral(
                f, 0.9 * a * a, 2.0 * fam.plateau_radius, V.alpha)
        den = float(np.dot(meas, vals))
        rows.append({
            "parameter": n,
            "numerator_energy": num * angular_ratio,
            "potential_term": pot * angular_ratio,
            "denominator": den,
            "quotient": angular_ratio * (num - pot) / den,
        })
    return rows


# ----------------------------------------------------------------------
# Randomized compactly supported test fields
# ----------------------------------------------------------------------

def _annulus_bump(r0: float, r1: float):
    """Smooth bump supported on (r0, r1), peak value exp(-1)."""
    mid, half = 0.5 * (r0 + r1), 0.5 * (r1 - r0)

    def val(r):
        t = (np.asarray(r, dtype=float) - mid) / half
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        ti = t[inside]
        out[inside] = np.exp(-1.0 / (1.0 - ti * ti))
        return out

    def der(r):
        t = (np.asarray(r, dtype=float) - mid) / half
        out = np.zeros_like(t)
        inside = np.abs(t) < 1
        ti = t[inside]
        s = 1.0 - ti * ti
        out[inside] = np.exp(-1.0 / s) * (-2.0 * ti / (s * s)) / half
        return out

    return val, der


def random_test_fields(g: CarnotGroup, rng: np.random.Generator, count: int,
                       r_support: tuple[float, float] = (0.3, 3.0)) -> list[ScalarField]:
    """Random smooth fields supported in a norm annulus; half radial, half
    modulated by a plane wave in the coordinates (analytic gradients)."""
    fields = []
    lo, hi = r_support
    for i in range(count):
        r0 = rng.uniform(lo, lo + 0.3 * (hi - lo))
        r1 = rng.uniform(lo + 0.6 * (hi - lo), hi)
        chi, dchi = _annulus_bump(r0, r1)
        if i % 2 == 0:
            fields.append(radial_field(g, chi, dchi))
            continue
        wvec = rng.normal(0.0, 0.7, size=g.ambient_dim)
        phase = rng.uniform(0.0, 2 * np.pi)
        amp = rng.uniform(0.2, 0.8)

        def ev(pts, chi=chi, wvec=wvec, phase=phase, amp=amp):
            pts = np.atleast_2d(pts)
            return chi(homogeneous_norm(g, pts)) * (1.0 + amp * np.sin(pts @ wvec + phase))

        def gr(pts, chi=chi, dchi=dchi, wvec=wvec, phase=phase, amp=amp):
            pts = np.atleast_2d(pts)
            N = homogeneous_norm(g, pts)
            base = 1.0 + amp * np.sin(pts @ wvec + phase)
            dbase = amp * np.cos(pts @ wvec + phase)
            fr = frame(g, pts)
            horiz_w = np.einsum("kji,i->kj", fr, wvec)
            return (dchi(N) * base)[:, None] * norm_gradient(g, pts) \
                + (chi(N) * dbase)[:, None] * horiz_w

        fields.append(ScalarField(evaluate=ev, gradient=gr))
    return fields
