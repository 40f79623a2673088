"""Catalog Carnot groups in exponential coordinates.

Three families are supported: Euclidean R^n (trivial, one layer),
Heisenberg H^n in the classical chart (z, ell) with vertical twist
2*Im(z conj(z')), and step-2 H-type groups in BCH coordinates with
bracket (1/2)<J^s v, v'>.  The two Heisenberg charts differ by a
dilation of the center and are deliberately not auto-converted.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidParameterError, NotHTypeError

__all__ = [
    "GroupKind",
    "CarnotGroup",
    "make_euclidean",
    "make_heisenberg",
    "make_htype",
    "make_quaternionic_htype",
    "multiply",
    "inverse",
    "dilate",
    "homogeneous_dimension",
    "group_to_json",
    "group_from_json",
]

# A group element is just its exponential-coordinate vector.
GroupPoint = np.ndarray

_HTYPE_TOL = 1e-12


class GroupKind(str, Enum):
    EUCLIDEAN = "Euclidean"
    HEISENBERG = "Heisenberg"
    HTYPE = "HType"


@dataclass(frozen=True)
class CarnotGroup:
    """Immutable descriptor of a catalog Carnot group.

    ``dilation_exponents[i]`` is the layer index of coordinate ``i``;
    ``htype_structure`` holds the k skew maps J^s (H-type only).
    """

    kind: GroupKind
    ambient_dim: int
    layer_dims: tuple[int, ...]
    dilation_exponents: tuple[int, ...]
    htype_structure: tuple[np.ndarray, ...] = ()
    norm_kappa: float = 16.0
    heisenberg_n: int = 0
    label: str = field(default="", compare=False)

    @property
    def horizontal_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def homogeneous_dim(self) -> int:
        return sum((j + 1) * d for j, d in enumerate(self.layer_dims))

    def check_point(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise InvalidParameterError(
                f"point has dimension {x.shape[-1]}, group needs {self.ambient_dim}"
            )
        return x

    def __repr__(self) -> str:  # keep frozen dataclass repr short
        return f"CarnotGroup({self.label or self.kind.value}, Q={self.homogeneous_dim})"


def make_euclidean(n: int) -> CarnotGroup:
    """Abelian R^n: one layer, vector addition, Q = n."""
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    return CarnotGroup(
        kind=GroupKind.EUCLIDEAN,
        ambient_dim=n,
        layer_dims=(n,),
        dilation_exponents=(1,) * n,
        label=f"R^{n}",
    )


def make_heisenberg(n: int) -> CarnotGroup:
    """Heisenberg group H^n with coordinates (x_1..x_n, y_1..y_n, ell).

    Group law (z, ell)(z', ell') = (z + z', ell + ell' + 2 sum Im(z_j conj z'_j)),
    homogeneous dimension Q = 2n + 2.
    """
    if n < 1:
        raise InvalidParameterError(f"need n >= 1, got {n}")
    return CarnotGroup(
        kind=GroupKind.HEISENBERG,
        ambient_dim=2 * n + 1,
        layer_dims=(2 * n, 1),
        dilation_exponents=(1,) * (2 * n) + (2,),
        heisenberg_n=n,
        label=f"H^{n}",
    )


def _validate_htype_maps(m: int, k: int, J: tuple[np.ndarray, ...], rng) -> None:
    for s, Js in enumerate(J):
        if Js.shape != (m, m):
            raise InvalidParameterError(f"J^{s} has shape {Js.shape}, expected ({m},{m})")
        if np.max(np.abs(Js + Js.T)) > _HTYPE_TOL:
            raise NotHTypeError(f"J^{s} is not skew-symmetric")
    eye = np.eye(m)
    for _ in range(32):
        z = rng.standard_normal(k)
        Jz = sum(z[s] * J[s] for s in range(k))
        if np.max(np.abs(Jz @ Jz + np.dot(z, z) * eye)) > _HTYPE_TOL * max(1.0, np.dot(z, z)):
            raise NotHTypeError("J_z^2 = -|z|^2 Id fails; the maps do not define an H-type group")


def make_htype(m: int, k: int, J: list[np.ndarray], norm_kappa: float = 16.0,
               label: str = "") -> CarnotGroup:
    """Step-2 H-type group with horizontal dim m and center dim k.

    The J maps are checked numerically for skew-symmetry and the
    identity J_z^2 = -|z|^2 Id on random z.  Q = m + 2k.
    """
    if m < 1 or k < 1:
        raise InvalidParameterError(f"need m, k >= 1, got m={m}, k={k}")
    if len(J) != k:
        raise InvalidParameterError(f"need {k} J matrices, got {len(J)}")
    maps = tuple(np.array(Js, dtype=float) for Js in J)
    _validate_htype_maps(m, k, maps, np.random.default_rng(20260826))
    for Js in maps:
        Js.setflags(write=False)
    return CarnotGroup(
        kind=GroupKind.HTYPE,
        ambient_dim=m + k,
        layer_dims=(m, k),
        dilation_exponents=(1,) * m + (2,) * k,
        htype_structure=maps,
        norm_kappa=float(norm_kappa),
        label=label or f"HType({m},{k})",
    )


def make_quaternionic_htype(norm_kappa: float = 16.0) -> CarnotGroup:
    """The canonical non-Heisenberg example: m=4, k=3, J from left
    quaternion multiplication by i, j, k.  Q = 10."""
    Ji = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
    Jj = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
    Jk = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
    return make_htype(4, 3, [Ji, Jj, Jk], norm_kappa=norm_kappa, label="Quaternionic")


def multiply(g: CarnotGroup, x: GroupPoint, y: GroupPoint) -> GroupPoint:
    """Group product x * y; broadcasts over leading axes."""
    x = g.check_point(x)
    y = g.check_point(y)
    if g.kind is GroupKind.EUCLIDEAN:
        return x + y
    out = x + y
    if g.kind is GroupKind.HEISENBERG:
        n = g.heisenberg_n
        xx, xy = x[..., :n], x[..., n:2 * n]
        yx, yy = y[..., :n], y[..., n:2 * n]
        # 2 sum Im(z_j conj z'_j) = 2 sum (x_j' y_j - x_j y_j')
        out = out.copy()
        out[..., -1] += 2.0 * np.sum(yx * xy - xx * yy, axis=-1)
        return out
    m = g.horizontal_dim
    v, w = x[..., :m], y[..., :m]
    out = out.copy()
    for s, Js in enumerate(g.htype_structure):
        out[..., m + s] += 0.5 * np.sum((v @ Js.T) * w, axis=-1)
    return out


def inverse(g: CarnotGroup, x: GroupPoint) -> GroupPoint:
    """Group inverse: coordinatewise negation in exponential coordinates."""
    return -g.check_point(x)


def dilate(g: CarnotGroup, lam, x: GroupPoint) -> GroupPoint:
    """Anisotropic dilation: coordinate i scales by lam^alpha_i.

    lam may be a scalar or an array broadcastable against the batch."""
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise InvalidParameterError("dilation factor must be positive")
    x = g.check_point(x)
    alphas = np.asarray(g.dilation_exponents, dtype=float)
    return x * lam[..., None] ** alphas if lam.ndim else x * lam ** alphas


def homogeneous_dimension(g: CarnotGroup) -> int:
    return g.homogeneous_dim


def origin(g: CarnotGroup) -> GroupPoint:
    return np.zeros(g.ambient_dim)


def group_to_json(g: CarnotGroup) -> str:
    """Serialize the descriptor to a JSON document."""
    doc: dict = {"kind": g.kind.value, "norm_kappa": g.norm_kappa}
    if g.kind is GroupKind.EUCLIDEAN:
        doc["n"] = g.ambient_dim
    elif g.kind is GroupKind.HEISENBERG:
        doc["n"] = g.heisenberg_n
    else:
        doc["m"] = g.horizontal_dim
        doc["k"] = g.layer_dims[1]
        doc["J"] = [Js.ravel().tolist() for Js in g.htype_structure]
    return json.dumps(doc, sort_keys=True)


def group_from_json(doc: str | dict) -> CarnotGroup:
    """Rebuild a group from :func:`group_to_json` output (or a parsed dict)."""
    if isinstance(doc, str):
        doc = json.loads(doc)
    kind = doc["kind"]
    if kind == GroupKind.EUCLIDEAN.value:
        return make_euclidean(int(doc["n"]))
    if kind == GroupKind.HEISENBERG.value:
        return make_heisenberg(int(doc["n"]))
    if kind == GroupKind.HTYPE.value:
        m, k = int(doc["m"]), int(doc["k"])
        J = [np.array(row, dtype=float).reshape(m, m) for row in doc["J"]]
        return make_htype(m, k, J, norm_kappa=float(doc.get("norm_kappa", 16.0)))
    raise InvalidParameterError(f"unknown group kind {kind!r}")
