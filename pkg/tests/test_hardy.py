import numpy as np
import pytest

import carnot as C
from carnot.errors import (
    DegenerateTestFunctionError,
    InvalidParameterError,
    OutOfRangeError,
    ResolutionError,
)
from carnot.hardy import (
    ConcentratingFamilySpec,
    ExtremalFamilySpec,
    PotentialKind,
    PotentialSpec,
    _oscillatory_sin_integral,
)

H1 = C.make_heisenberg(1)
EUC = C.make_euclidean(3)


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(3)


@pytest.fixture(scope="module")
def mesh():
    return C.build_annular_mesh(H1, 0.05, 6.0, levels=22, cells_per_dim=12)


def test_hardy_constant_values():
    # ((Q-p)/p)^p with Q=4
    assert np.isclose(C.hardy_constant(H1, 2.0), 1.0)
    assert np.isclose(C.hardy_constant(H1, 1.5), (2.5 / 1.5) ** 1.5)
    with pytest.raises(OutOfRangeError):
        C.hardy_constant(H1, 4.0)
    with pytest.raises(OutOfRangeError):
        C.hardy_constant(H1, 1.0)


def test_potential_spec_validation():
    with pytest.raises(InvalidParameterError):
        PotentialSpec(PotentialKind.HARDY_PURE, lam=-1.0)
    with pytest.raises(InvalidParameterError):
        PotentialSpec(PotentialKind.HARDY_OSCILLATING, lam=1.0, beta=0.0)


def test_evaluate_potential_pure_vs_oscillating(rng):
    pts = C.random_annulus_points(H1, rng, 100, 0.5, 2.0)
    pure = PotentialSpec(PotentialKind.HARDY_PURE, lam=2.0)
    osc = PotentialSpec(PotentialKind.HARDY_OSCILLATING, lam=2.0, beta=1.0, alpha=1.0)
    W = C.hardy_weight(H1, 2.0, pts)
    assert np.allclose(C.evaluate_potential(H1, pure, 2.0, pts), 2.0 * W)
    N = C.homogeneous_norm(H1, pts)
    assert np.allclose(C.evaluate_potential(H1, osc, 2.0, pts),
                       2.0 * W + W * np.sin(1.0 / N))


def test_quotient_nonnegative_at_sharp_constant(rng, mesh):
    for p in (1.5, 2.0, 3.0):
        V = PotentialSpec(PotentialKind.HARDY_PURE, lam=C.hardy_constant(H1, p))
        for phi in C.random_test_fields(H1, rng, 10):
            assert C.rayleigh_quotient(H1, p, V, phi, mesh) > -1e-2


def test_quotient_degenerate_field_raises(mesh):
    dead = C.radial_field(H1, lambda r: np.zeros_like(r), lambda r: np.zeros_like(r))
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=1.0)
    with pytest.raises(DegenerateTestFunctionError):
        C.rayleigh_quotient(H1, 2.0, V, dead, mesh)


def test_rayleigh_parts_consistency(rng, mesh):
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=1.0)
    phi = C.random_test_fields(H1, rng, 1)[0]
    parts = C.rayleigh_parts(H1, 2.0, V, phi, mesh)
    assert np.isclose(
        parts["quotient"],
        (parts["numerator_energy"] - parts["potential_term"]) / parts["denominator"])
    assert parts["denominator"] > 0
    assert parts["numerator_energy"] > 0


def test_extremal_profile_shape():
    spec = ExtremalFamilySpec(epsilon=0.1, r_out=50.0)
    prof, dprof = C.extremal_profile(H1, 2.0, spec)
    r = np.array([0.2, 0.9, 2.0, 10.0, 60.0])
    vals = prof(r)
    assert vals[0] == 1.0 and vals[1] == 1.0          # plateau inside the ball
    assert 0 < vals[3] < vals[2] < 1.0                # decaying power tail
    assert vals[4] == 0.0                             # beyond the cutoff
    assert np.all(dprof(np.array([0.2, 60.0])) == 0.0)


def test_sharpness_scan_decreasing_heisenberg():
    eps = [0.2, 0.1, 0.05]
    base = ExtremalFamilySpec(epsilon=0.2, r_out=50.0)
    rows = C.sharpness_scan(H1, 2.0, eps, base)
    qs = [r["quotient"] for r in rows]
    assert all(q > 0 for q in qs)
    assert all(b < a for a, b in zip(qs, qs[1:]))


def test_sharpness_scan_requires_decreasing_epsilons():
    base = ExtremalFamilySpec(epsilon=0.2, r_out=50.0)
    with pytest.raises(InvalidParameterError):
        C.sharpness_scan(H1, 2.0, [0.1, 0.2], base)


def test_sharpness_euclidean_matches_radial_oracle():
    eps = [0.2, 0.1]
    base = ExtremalFamilySpec(epsilon=0.2, r_out=50.0)
    rows = C.sharpness_scan(EUC, 2.0, eps, base)
    oracle = C.radial_sharpness_scan(EUC, 2.0, eps, base)
    for r, o in zip(rows, oracle):
        assert abs(r["quotient"] - o["quotient"]) / abs(o["quotient"]) < 0.01


def test_subcritical_scan_has_relative_gap():
    # lam = 0.5 * constant leaves a clearly larger final quotient
    eps = [0.2, 0.1, 0.05]
    base = ExtremalFamilySpec(epsilon=0.2, r_out=50.0)
    crit = C.sharpness_scan(H1, 2.0, eps, base)
    sub = C.sharpness_scan(H1, 2.0, eps, base, lam=0.5 * C.hardy_constant(H1, 2.0))
    assert sub[-1]["quotient"] > 2.0 * crit[-1]["quotient"]


def test_concentrating_family_validation():
    with pytest.raises(InvalidParameterError):
        ConcentratingFamilySpec(inner_radii=(0.01, 0.02), plateau_radius=0.05)
    with pytest.raises(InvalidParameterError):
        ConcentratingFamilySpec(inner_radii=(0.1,), plateau_radius=0.05)
    with pytest.raises(InvalidParameterError):
        ConcentratingFamilySpec(inner_radii=(0.01,), plateau_radius=0.05,
                                profile="nope")


def test_concentrating_profile_support():
    fam = ConcentratingFamilySpec.geometric()
    prof, dprof = C.concentrating_profile(H1, 1.7, fam, 2)
    a = fam.inner_radii[1]
    b = fam.plateau_radius
    r = np.array([0.5 * a * a, a * a, 0.5 * (a * a + a), b, 1.5 * b, 2 * b, 3 * b])
    vals = prof(r)
    assert vals[0] == 0.0 and vals[1] == 0.0 and vals[-2] == 0.0 and vals[-1] == 0.0
    assert vals[2] > 0 and vals[3] == 1.0


def test_sigma_inf_supercritical_diverges():
    p = 1.7
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=2.0 * C.hardy_constant(H1, p))
    fam = ConcentratingFamilySpec.geometric()
    rows = C.sigma_inf_probe(H1, p, V, fam, n_max=6)
    qs = [r["quotient"] for r in rows]
    assert all(b < a for a, b in zip(qs, qs[1:]))
    assert qs[-1] < -500


def test_sigma_inf_subcritical_bounded():
    p = 1.7
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=0.5 * C.hardy_constant(H1, p))
    fam = ConcentratingFamilySpec.geometric()
    rows = C.sigma_inf_probe(H1, p, V, fam, n_max=10)
    assert all(abs(r["quotient"]) < 2e3 for r in rows)
    assert all(r["quotient"] > 0 for r in rows)


def test_sigma_inf_matches_radial_oracle_trend():
    p = 1.7
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=2.0 * C.hardy_constant(H1, p))
    fam = ConcentratingFamilySpec.geometric()
    mesh_rows = C.sigma_inf_probe(H1, p, V, fam, n_max=4)
    oracle = C.radial_sigma_inf_probe(H1, p, V, fam, n_max=4)
    # same divergence rate: successive differences agree within 40%
    for m, o in zip(np.diff([r["quotient"] for r in mesh_rows]),
                    np.diff([r["quotient"] for r in oracle])):
        assert abs(m - o) / abs(o) < 0.4


def test_sigma_inf_resolution_guard():
    V = PotentialSpec(PotentialKind.HARDY_PURE, lam=1.0)
    fam = ConcentratingFamilySpec.geometric()
    with pytest.raises(ResolutionError):
        C.sigma_inf_probe(H1, 1.7, V, fam, n_max=2, shells_per_decade=3)
    with pytest.raises(InvalidParameterError):
        C.sigma_inf_probe(H1, 1.7, V, fam, n_max=99)


def test_oscillatory_integral_against_brute_force():
    f = lambda r: r ** 2
    rs = np.linspace(0.05, 0.5, 2_000_001)
    ref = np.trapezoid(f(rs) * np.sin(rs ** -2.0), rs)
    assert abs(_oscillatory_sin_integral(f, 0.05, 0.5, 2.0) - ref) < 1e-9
    rs = np.linspace(0.5, 2.0, 2_000_001)
    ref = np.trapezoid(f(rs) * np.sin(1.0 / rs), rs)
    assert abs(_oscillatory_sin_integral(f, 0.5, 2.0, 1.0) - ref) < 1e-9


def test_oscillating_potential_lambda_only_dependence():
    p = 1.7
    lam = 2.0 * C.hardy_constant(H1, p)
    fam = ConcentratingFamilySpec.geometric()
    pure = C.sigma_inf_probe(
        H1, p, PotentialSpec(PotentialKind.HARDY_PURE, lam=lam), fam, n_max=4)
    for beta in (5 * lam, -5 * lam):
        osc = C.sigma_inf_probe(
            H1, p, PotentialSpec(PotentialKind.HARDY_OSCILLATING, lam=lam,
                                 beta=beta, alpha=2.0), fam, n_max=4)
        for a, b in zip(pure, osc):
            # the oscillating term integrates to nearly nothing
            assert abs(b["quotient"] - a["quotient"]) < 0.05 * abs(a["quotient"])


def test_sobolev_quotient_positive(rng, mesh):
    phi = C.random_test_fields(H1, rng, 1)[0]
    q = C.sobolev_quotient(H1, 2.0, phi, mesh)
    assert q > 0
