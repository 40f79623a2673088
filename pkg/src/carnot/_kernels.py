"""Hot kernels for the explicit Heisenberg p-Laplacian step.

The operator div_H(phi grad_H u) with grad_H u = (Xu, Yu), X = dx + 2y dl,
Y = dy - 2x dl is discretized in conservation form as the Euclidean
divergence of the flux vector (F1, F2, 2y F1 - 2x F2): the x and y
components are staggered onto cell faces (which keeps the diffusion part
positivity-preserving), the l component is a central difference of the
node-centered combination G = 2y F1 - 2x F2.

Two interchangeable implementations: a numba-jitted loop nest and a pure
numpy vectorized fallback.  The backend is chosen per call, defaulting to
the CARNOT_KERNEL_BACKEND environment variable ("numba", "numpy", or
"auto"; auto prefers numba when importable).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidParameterError

__all__ = ["available_backends", "default_backend", "step_grid", "gradient_grid"]

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco

    prange = range


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def default_backend() -> str:
    env = os.environ.get("CARNOT_KERNEL_BACKEND", "auto").lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        if not _HAVE_NUMBA:
            raise InvalidParameterError("CARNOT_KERNEL_BACKEND=numba but numba is unavailable")
        return "numba"
    if env != "auto":
        raise InvalidParameterError(f"unknown CARNOT_KERNEL_BACKEND {env!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


@njit(cache=True, parallel=True)
def _node_pass_numba(u, xs, ys, inv2hx, inv2hl, pm22, eta2, dmax, dux, duy, dul, G):
    nx, ny, nl = u.shape
    for i in prange(nx):
        for j in range(ny):
            y2 = 2.0 * ys[j]
            x2 = 2.0 * xs[i]
            for k in range(nl):
                uxp = u[i + 1, j, k] if i + 1 < nx else 0.0
                uxm = u[i - 1, j, k] if i - 1 >= 0 else 0.0
                uyp = u[i, j + 1, k] if j + 1 < ny else 0.0
                uym = u[i, j - 1, k] if j - 1 >= 0 else 0.0
                ulp = u[i, j, k + 1] if k + 1 < nl else 0.0
                ulm = u[i, j, k - 1] if k - 1 >= 0 else 0.0
                dx = (uxp - uxm) * inv2hx
                dy = (uyp - uym) * inv2hx
                dl = (ulp - ulm) * inv2hl
                dux[i, j, k] = dx
                duy[i, j, k] = dy
                dul[i, j, k] = dl
                gx = dx + y2 * dl
                gy = dy - x2 * dl
                phi = (gx * gx + gy * gy + eta2) ** pm22
                if phi > dmax:
                    phi = dmax
                G[i, j, k] = phi * (y2 * gx - x2 * gy)


@njit(cache=True, parallel=True)
def _face_pass_numba(u, xs, ys, invhx, pm22, eta2, dmax, dux, duy, dul, F1x, F2y):
    nx, ny, nl = u.shape
    hxh = 0.5 / invhx
    for i in prange(nx):
        for j in range(ny):
            for k in range(nl):
                if i + 1 < nx:
                    dl = 0.5 * (dul[i, j, k] + dul[i + 1, j, k])
                    xu = (u[i + 1, j, k] - u[i, j, k]) * invhx + 2.0 * ys[j] * dl
                    yu = 0.5 * (duy[i, j, k] + duy[i + 1, j, k]) \
                        - 2.0 * (xs[i] + hxh) * dl
                    phi = (xu * xu + yu * yu + eta2) ** pm22
                    if phi > dmax:
                        phi = dmax
                    F1x[i, j, k] = phi * xu
                else:
                    F1x[i, j, k] = 0.0
                if j + 1 < ny:
                    dl = 0.5 * (dul[i, j, k] + dul[i, j + 1, k])
                    yv = (u[i, j + 1, k] - u[i, j, k]) * invhx - 2.0 * xs[i] * dl
                    xv = 0.5 * (dux[i, j, k] + dux[i, j + 1, k]) \
                        + 2.0 * (ys[j] + hxh) * dl
                    phi = (xv * xv + yv * yv + eta2) ** pm22
                    if phi > dmax:
                        phi = dmax
                    F2y[i, j, k] = phi * yv
                else:
                    F2y[i, j, k] = 0.0


@njit(cache=True, parallel=True)
def _update_numba(u, V, F1x, F2y, G, invhx, inv2hl, pm1, dt, unew):
    nx, ny, nl = u.shape
    negsum = 0.0
    possum = 0.0
    maxval = 0.0
    badcount = 0
    for i in prange(nx):
        for j in range(ny):
            for k in range(nl):
                if i == 0 or j == 0 or k == 0 or i == nx - 1 or j == ny - 1 or k == nl - 1:
                    unew[i, j, k] = 0.0
                    continue
                div = ((F1x[i, j, k] - F1x[i - 1, j, k]) * invhx
                       + (F2y[i, j, k] - F2y[i, j - 1, k]) * invhx
                       + (G[i, j, k + 1] - G[i, j, k - 1]) * inv2hl)
                val = u[i, j, k] + dt * (div + V[i, j, k] * u[i, j, k] ** pm1)
                if val != val or val > 1e150:
                    badcount += 1
                if val < 0.0:
                    negsum += -val
                    val = 0.0
                else:
                    possum += val
                maxval = max(maxval, val)
                unew[i, j, k] = val
    return negsum, possum, maxval, badcount


def _step_numba(u, V, xs, ys, hx, hl, p, eta, dmax, dt):
    dux = np.empty_like(u)
    duy = np.empty_like(u)
    dul = np.empty_like(u)
    G = np.empty_like(u)
    F1x = np.empty_like(u)
    F2y = np.empty_like(u)
    unew = np.empty_like(u)
    pm22 = (p - 2.0) / 2.0
    _node_pass_numba(u, xs, ys, 1.0 / (2 * hx), 1.0 / (2 * hl),
                     pm22, eta * eta, dmax, dux, duy, dul, G)
    _face_pass_numba(u, xs, ys, 1.0 / hx, pm22, eta * eta, dmax,
                     dux, duy, dul, F1x, F2y)
    negsum, possum, maxval, badcount = _update_numba(u, V, F1x, F2y, G, 1.0 / hx,
                                                     1.0 / (2 * hl), p - 1.0, dt, unew)
    return unew, negsum, possum, maxval, badcount > 0


def gradient_grid(u, xs, ys, hx, hl):
    """Horizontal gradient (Xu, Yu) on the full grid, zero-extended."""
    up = np.pad(u, 1)
    inv2hx, inv2hl = 1.0 / (2 * hx), 1.0 / (2 * hl)
    dux = (up[2:, 1:-1, 1:-1] - up[:-2, 1:-1, 1:-1]) * inv2hx
    duy = (up[1:-1, 2:, 1:-1] - up[1:-1, :-2, 1:-1]) * inv2hx
    dul = (up[1:-1, 1:-1, 2:] - up[1:-1, 1:-1, :-2]) * inv2hl
    Y = ys[None, :, None]
    X = xs[:, None, None]
    gx = dux + 2.0 * Y * dul
    gy = duy - 2.0 * X * dul
    return gx, gy


def _phi(gx, gy, pm22, eta2, dmax):
    return np.minimum((gx * gx + gy * gy + eta2) ** pm22, dmax)


def _step_numpy(u, V, xs, ys, hx, hl, p, eta, dmax, dt):
    invhx, inv2hl = 1.0 / hx, 1.0 / (2 * hl)
    pm22, eta2 = (p - 2.0) / 2.0, eta * eta
    up = np.pad(u, 1)
    dux = (up[2:, 1:-1, 1:-1] - up[:-2, 1:-1, 1:-1]) * (0.5 * invhx)
    duy = (up[1:-1, 2:, 1:-1] - up[1:-1, :-2, 1:-1]) * (0.5 * invhx)
    dul = (up[1:-1, 1:-1, 2:] - up[1:-1, 1:-1, :-2]) * inv2hl
    Y = ys[None, :, None]
    X = xs[:, None, None]
    gx = dux + 2.0 * Y * dul
    gy = duy - 2.0 * X * dul
    G = _phi(gx, gy, pm22, eta2, dmax) * (2.0 * Y * gx - 2.0 * X * gy)

    # x-faces (i+1/2): arrays indexed by the lower node, length nx-1
    dlf = 0.5 * (dul[:-1] + dul[1:])
    xu = (u[1:] - u[:-1]) * invhx + 2.0 * Y * dlf
    yu = 0.5 * (duy[:-1] + duy[1:]) - 2.0 * (X[:-1] + 0.5 * hx) * dlf
    F1x = np.zeros_like(u)
    F1x[:-1] = _phi(xu, yu, pm22, eta2, dmax) * xu
    # y-faces (j+1/2)
    dlf = 0.5 * (dul[:, :-1] + dul[:, 1:])
    yv = (u[:, 1:] - u[:, :-1]) * invhx - 2.0 * X * dlf
    xv = 0.5 * (dux[:, :-1] + dux[:, 1:]) + 2.0 * (Y[:, :-1] + 0.5 * hx) * dlf
    F2y = np.zeros_like(u)
    F2y[:, :-1] = _phi(xv, yv, pm22, eta2, dmax) * yv

    div = np.zeros_like(u)
    div[1:-1, 1:-1, 1:-1] = (
        (F1x[1:-1, 1:-1, 1:-1] - F1x[:-2, 1:-1, 1:-1]) * invhx
        + (F2y[1:-1, 1:-1, 1:-1] - F2y[1:-1, :-2, 1:-1]) * invhx
        + (G[1:-1, 1:-1, 2:] - G[1:-1, 1:-1, :-2]) * inv2hl)
    with np.errstate(over="ignore", invalid="ignore"):
        unew = u + dt * (div + V * u ** (p - 1.0))
    unew[0, :, :] = unew[-1, :, :] = 0.0
    unew[:, 0, :] = unew[:, -1, :] = 0.0
    unew[:, :, 0] = unew[:, :, -1] = 0.0
    bad = bool(~np.all(np.isfinite(unew)) or np.nanmax(unew) > 1e150)
    neg = unew < 0
    negsum = float(-unew[neg].sum())
    unew[neg] = 0.0
    possum = float(unew.sum())
    maxval = float(np.nanmax(unew)) if unew.size else 0.0
    return unew, negsum, possum, maxval, bad


def step_grid(u, V, xs, ys, hx, hl, p, eta, dmax, dt, backend: str | None = None):
    """One explicit Euler step of du/dt = div(phi grad u) + V u^(p-1).

    Undershoots (the l-coupling of the flux is advective and not
    positivity-preserving) are clipped to zero and the positive part is
    rescaled so the step conserves the pre-clip total: mass then changes
    only through boundary outflux and the reaction term.

    Returns (u_new, clipped_negative_sum, max_value, diverged_flag).
    """
    backend = backend or default_backend()
    if backend == "numba":
        unew, negsum, possum, maxval, bad = _step_numba(
            u, V, xs, ys, hx, hl, p, eta, dmax, dt)
    elif backend == "numpy":
        unew, negsum, possum, maxval, bad = _step_numpy(
            u, V, xs, ys, hx, hl, p, eta, dmax, dt)
    else:
        raise InvalidParameterError(f"unknown backend {backend!r}")
    if negsum > 0.0 and possum > negsum and np.isfinite(possum):
        scale = (possum - negsum) / possum
        unew *= scale
        maxval *= scale
    return unew, negsum, maxval, bad
