"""Quadrature over group domains.

Singular radial weights are integrated on geometrically graded annular
meshes in the homogeneous norm: each shell [r q^i, r q^(i+1)] is covered
by a Cartesian midpoint grid over its dilation-adapted bounding box and
cells are kept when their center lies in the shell.  Summation order is
fixed (ascending node index) so results are bit-reproducible.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EvaluationError, InvalidParameterError
from .groups import CarnotGroup, GroupKind
from .calculus import homogeneous_norm

__all__ = [
    "BoxMesh",
    "AnnularMesh",
    "build_box_mesh",
    "build_annular_mesh",
    "integrate",
    "unit_ball_volume",
    "radial_integrate",
]


@dataclass(frozen=True)
class BoxMesh:
    """Tensor-product midpoint mesh over an axis-aligned box."""

    nodes: np.ndarray  # (k, n)
    weights: np.ndarray  # (k,)
    bounds: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class AnnularMesh:
    """Graded midpoint mesh over {r_min <= N <= r_max}."""

    group: CarnotGroup
    nodes: np.ndarray
    weights: np.ndarray
    r_min: float
    r_max: float
    levels: int
    cells_per_dim: int

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i}" for i in range(self.nodes.shape[1])] + ["weight"])
            for node, w in zip(self.nodes, self.weights):
                writer.writerow([repr(float(v)) for v in node] + [repr(float(w))])


def build_box_mesh(bounds, counts) -> BoxMesh:
    """Midpoint mesh; weights sum to the box volume exactly."""
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    counts = tuple(int(c) for c in counts)
    if len(bounds) != len(counts):
        raise InvalidParameterError("bounds and counts must have equal length")
    axes = []
    vol = 1.0
    for (lo, hi), c in zip(bounds, counts):
        if hi <= lo or c < 1:
            raise InvalidParameterError(f"bad axis spec ({lo}, {hi}) x {c}")
        h = (hi - lo) / c
        axes.append(lo + h * (np.arange(c) + 0.5))
        vol *= h
    grids = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([a.ravel() for a in grids], axis=-1)
    weights = np.full(nodes.shape[0], vol)
    return BoxMesh(nodes=nodes, weights=weights, bounds=bounds)


def _shell_halfwidths(g: CarnotGroup, r: float) -> np.ndarray:
    """Per-coordinate bounding half-widths of the ball {N <= r}."""
    widths = np.empty(g.ambient_dim)
    m = g.horizontal_dim
    widths[:m] = r
    if g.kind is GroupKind.HEISENBERG:
        widths[m:] = r ** 2
    elif g.kind is GroupKind.HTYPE:
        widths[m:] = r ** 2 / np.sqrt(g.norm_kappa)
    return widths


def build_annular_mesh(g: CarnotGroup, r_min: float, r_max: float,
                       levels: int, cells_per_dim: int) -> AnnularMesh:
    """Geometric shells r_min q^i, q = (r_max/r_min)^(1/levels), each
    covered by a cells_per_dim^n midpoint grid over its bounding box."""
    if not 0 < r_min < r_max:
        raise InvalidParameterError(f"need 0 < r_min < r_max, got ({r_min}, {r_max})")
    if levels < 1 or cells_per_dim < 2:
        raise InvalidParameterError("need levels >= 1 and cells_per_dim >= 2")
    q = (r_max / r_min) ** (1.0 / levels)
    node_chunks = []
    weight_chunks = []
    for i in range(levels):
        lo, hi = r_min * q ** i, r_min * q ** (i + 1)
        box = _shell_halfwidths(g, hi)
        mesh = build_box_mesh([(-w, w) for w in box], [cells_per_dim] * g.ambient_dim)
        N = homogeneous_norm(g, mesh.nodes)
        keep = (N >= lo) & (N < hi) if i < levels - 1 else (N >= lo) & (N <= hi)
        if np.any(keep):
            node_chunks.append(mesh.nodes[keep])
            weight_chunks.append(mesh.weights[keep])
    if not node_chunks:
        raise InvalidParameterError("mesh is empty; increase cells_per_dim")
    return AnnularMesh(
        group=g,
        nodes=np.concatenate(node_chunks),
        weights=np.concatenate(weight_chunks),
        r_min=r_min,
        r_max=r_max,
        levels=levels,
        cells_per_dim=cells_per_dim,
    )


def integrate(mesh, integrand) -> float:
    """Sum of weight * integrand(node) in fixed node order."""
    f = integrand if callable(integrand) else integrand.evaluate
    vals = np.asarray(f(mesh.nodes), dtype=float)
    if vals.shape != (mesh.nodes.shape[0],):
        raise EvaluationError(f"integrand returned shape {vals.shape}")
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise EvaluationError(
            f"non-finite integrand value at node {idx}: {mesh.nodes[idx].tolist()}"
        )
    return float(np.dot(mesh.weights, vals))


_BALL_VOLUME_CACHE: dict[tuple, float] = {}


def unit_ball_volume(g: CarnotGroup, resolution: int = 120) -> float:
    """Volume of {N <= 1} by midpoint counting on the bounding-box grid."""
    if resolution < 10:
        raise InvalidParameterError(f"resolution must be >= 10, got {resolution}")
    from .groups import group_to_json

    key = (group_to_json(g), resolution)
    if key in _BALL_VOLUME_CACHE:
        return _BALL_VOLUME_CACHE[key]
    widths = _shell_halfwidths(g, 1.0)
    axes = [(-w + 2 * w * (np.arange(resolution) + 0.5) / resolution) for w in widths]
    cell_vol = float(np.prod(2 * widths / resolution))
    # chunk along the first axis to bound memory in high ambient dimension
    count = 0
    rest = axes[1:]
    grids = np.meshgrid(*rest, indexing="ij") if rest else []
    tail = np.stack([a.ravel() for a in grids], axis=-1) if rest else np.zeros((1, 0))
    for x0 in axes[0]:
        pts = np.concatenate([np.full((tail.shape[0], 1), x0), tail], axis=1)
        count += int(np.count_nonzero(homogeneous_norm(g, pts) <= 1.0))
    vol = count * cell_vol
    _BALL_VOLUME_CACHE[key] = vol
    return vol


def _gauss_panels(r_min: float, r_max: float, n_points: int):
    """Geometrically graded Gauss-Legendre panels on [r_min, r_max]."""
    if r_min <= 0:
        r_min = r_max * 1e-12
    n_panels = max(4, int(np.ceil(np.log2(r_max / r_min))) + 1)
    per_panel = max(8, n_points // n_panels)
    edges = np.geomspace(r_min, r_max, n_panels + 1)
    xg, wg = np.polynomial.legendre.leggauss(per_panel)
    rs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        rs.append(mid + half * xg)
        ws.append(half * wg)
    return np.concatenate(rs), np.concatenate(ws)


def radial_integrate(g: CarnotGroup, radial_profile: Callable[[np.ndarray], np.ndarray],
                     r_min: float, r_max: float, n_points: int = 256,
                     ball_resolution: int = 120) -> float:
    """Polar-coordinate integral Q |B_N(1)| * int f(r) r^(Q-1) dr for a
    radial integrand f(N)."""
    if r_max <= max(r_min, 0.0):
        raise InvalidParameterError("need r_max > r_min >= 0")
    Q = g.homogeneous_dim
    rs, ws = _gauss_panels(r_min, r_max, n_points)
    vals = np.asarray(radial_profile(rs), dtype=float)
    inner = float(np.dot(ws, vals * rs ** (Q - 1)))
    return Q * unit_ball_volume(g, ball_resolution) * inner
