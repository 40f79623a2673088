import numpy as np
import pytest

import carnot as C
from carnot.errors import InvalidParameterError
from carnot.hardy import PotentialKind, PotentialSpec
from carnot.parabolic import (
    EvolutionConfig,
    GridSpec,
    evolve,
    init_state,
    potential_grid,
    refinement_study,
    stable_dt,
    step,
)
from carnot._kernels import available_backends, step_grid

H1 = C.make_heisenberg(1)
C_HARDY = C.hardy_constant(H1, 1.7)


def small_grid(n=16):
    return GridSpec(n_xy=n, n_ell=n)


def test_grid_spec_geometry():
    grid = GridSpec(n_xy=32, n_ell=16, L_xy=1.0, L_ell=2.0)
    assert np.isclose(grid.h_xy, 2.0 / 32)
    assert np.isclose(grid.h_ell, 4.0 / 16)
    assert grid.xs.shape == (33,)
    assert grid.ls.shape == (17,)
    fine = grid.refine(2)
    assert fine.n_xy == 64 and fine.n_ell == 32
    with pytest.raises(InvalidParameterError):
        GridSpec(n_xy=4, n_ell=4)


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        EvolutionConfig(p=2.5, potential=None)  # solver covers 1 < p < 2
    with pytest.raises(InvalidParameterError):
        EvolutionConfig(p=1.7, potential=None, eta=0.0)


def test_init_state_bump():
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=None, u0_radius=0.4, u0_amplitude=2.0)
    st = init_state(grid, cfg)
    assert st.u.max() == pytest.approx(2.0 * np.exp(-1.0))
    assert st.u.min() == 0.0
    # boundary zero
    assert np.all(st.u[0] == 0) and np.all(st.u[:, :, -1] == 0)
    with pytest.raises(InvalidParameterError):
        init_state(grid, EvolutionConfig(p=1.7, potential=None, u0_radius=0.9))


def test_potential_grid_cap():
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=PotentialSpec(PotentialKind.HARDY_PURE, lam=1.0))
    V = potential_grid(grid, cfg)
    cap = (cfg.c_cap * grid.h_xy) ** -1.7
    assert V.max() <= cap + 1e-12
    assert V.min() >= 0.0
    # far from the origin the cap is inactive: V = lam * (|z|/N^2)^p
    i, j, k = 2, 2, 2
    x, y, l = grid.xs[i], grid.xs[j], grid.ls[k]
    z = np.hypot(x, y)
    N4 = (x * x + y * y) ** 2 + l * l
    assert V[i, j, k] == pytest.approx(z ** 1.7 / N4 ** (1.7 / 2.0))


def test_backends_agree():
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=None, D_max=2.0)
    st = init_state(grid, cfg)
    V = np.zeros_like(st.u)
    dt = stable_dt(grid, cfg)
    if "numba" not in available_backends():
        pytest.skip("numba unavailable")
    a = step_grid(st.u, V, grid.xs, grid.xs, grid.h_xy, grid.h_ell,
                  1.7, cfg.eta, 2.0, dt, backend="numba")
    b = step_grid(st.u, V, grid.xs, grid.xs, grid.h_xy, grid.h_ell,
                  1.7, cfg.eta, 2.0, dt, backend="numpy")
    assert np.allclose(a[0], b[0], rtol=1e-13, atol=0)
    # reduction order differs between backends: agree to roundoff only
    assert a[1] == pytest.approx(b[1], rel=1e-12)
    assert a[2] == pytest.approx(b[2], rel=1e-12)
    assert a[3] == b[3]


def test_pure_diffusion_mass_non_increasing():
    grid = small_grid(24)
    cfg = EvolutionConfig(p=1.7, potential=None, t_final=0.004, D_max=2.0)
    diag = evolve(grid, cfg)
    assert not diag.diverged
    assert all(b <= a + 1e-8 for a, b in zip(diag.mass, diag.mass[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(diag.sup, diag.sup[1:]))


def test_flat_state_is_stationary_without_potential():
    # u identically zero stays zero
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=None, D_max=2.0)
    u = np.zeros((grid.n_xy + 1, grid.n_xy + 1, grid.n_ell + 1))
    out, neg, mx, bad = step_grid(u, u.copy(), grid.xs, grid.xs, grid.h_xy,
                                  grid.h_ell, 1.7, cfg.eta, 2.0, 1e-5)
    assert not bad and mx == 0.0 and np.all(out == 0.0)


def test_supercritical_grows_subcritical_does_not():
    grid = small_grid(32)
    sups = {}
    for mult in (0.5, 2.0):
        V = PotentialSpec(PotentialKind.HARDY_PURE, lam=mult * C_HARDY)
        cfg = EvolutionConfig(p=1.7, potential=V, t_final=0.004, D_max=2.0)
        diag = evolve(grid, cfg)
        sups[mult] = diag.sup[-1]
    assert sups[2.0] > 1.2 * sups[0.5]


def test_evolve_records_checkpoints():
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=None, t_final=0.002, D_max=2.0,
                          record_interval=0.0005)
    diag = evolve(grid, cfg)
    assert diag.times[0] == 0.0
    assert diag.times[-1] == pytest.approx(0.002, abs=1e-9)
    assert len(diag.times) == len(diag.mass) == len(diag.sup) == len(diag.energy)


def test_refinement_study_rows():
    grid = small_grid(8)
    cfg = EvolutionConfig(p=1.7, potential=None, t_final=0.001, D_max=2.0)
    rows = refinement_study(grid, cfg, levels=2)
    assert len(rows) == 2
    assert rows[1]["h"] == pytest.approx(rows[0]["h"] / 2)
    assert not rows[0]["diverged"] and not rows[1]["diverged"]
    with pytest.raises(InvalidParameterError):
        refinement_study(grid, cfg, levels=1)


def test_evolve_deterministic():
    grid = small_grid()
    cfg = EvolutionConfig(p=1.7, potential=None, t_final=0.001, D_max=2.0)
    d1 = evolve(grid, cfg)
    d2 = evolve(grid, cfg)
    assert d1.mass == d2.mass and d1.sup == d2.sup
