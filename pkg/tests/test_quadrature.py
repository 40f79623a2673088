import numpy as np
import pytest

import carnot as C
from carnot.errors import EvaluationError, InvalidParameterError
from carnot.quadrature import build_box_mesh

H1 = C.make_heisenberg(1)
EUC = C.make_euclidean(3)


def test_box_mesh_total_weight():
    mesh = build_box_mesh([(-1, 1), (0, 2), (-0.5, 0.5)], [4, 5, 6])
    assert np.isclose(mesh.weights.sum(), 2.0 * 2.0 * 1.0)
    assert len(mesh.nodes) == 4 * 5 * 6


def test_unit_ball_volume_heisenberg():
    # Koranyi unit ball |B(1)| = pi^2/2 (analytic value)
    vol = C.unit_ball_volume(H1, resolution=60)
    assert abs(vol - np.pi ** 2 / 2) / (np.pi ** 2 / 2) < 5e-3


def test_unit_ball_volume_euclidean():
    vol = C.unit_ball_volume(EUC, resolution=60)
    assert abs(vol - 4 * np.pi / 3) / (4 * np.pi / 3) < 5e-3


def test_radial_integrate_power_law():
    # int over 1<N<2 of N^-Q dx = Q |B(1)| log 2
    vol = C.unit_ball_volume(H1, resolution=120)
    got = C.radial_integrate(H1, lambda r: r ** -4.0, 1.0, 2.0)
    # same ball volume factor -> the 1-D part is Gauss-exact to roundoff
    assert abs(got - 4 * vol * np.log(2)) / got < 1e-12
    # against the analytic ball volume the error is the midpoint-count error
    assert abs(got - 4 * (np.pi ** 2 / 2) * np.log(2)) / got < 5e-3


def test_annular_mesh_converges_to_radial():
    exact = C.radial_integrate(H1, lambda r: r ** -4.0, 1.0, 2.0)
    f = lambda q: C.homogeneous_norm(H1, q) ** -4.0
    coarse = C.integrate(C.build_annular_mesh(H1, 1.0, 2.0, levels=6, cells_per_dim=10), f)
    fine = C.integrate(C.build_annular_mesh(H1, 1.0, 2.0, levels=12, cells_per_dim=20), f)
    assert abs(fine - exact) < abs(coarse - exact) / 4
    assert abs(fine - exact) / exact < 2e-3


def test_annular_mesh_nodes_in_annulus():
    mesh = C.build_annular_mesh(H1, 0.5, 3.0, levels=8, cells_per_dim=8)
    N = C.homogeneous_norm(H1, mesh.nodes)
    assert N.min() >= 0.5 and N.max() <= 3.0
    assert np.all(mesh.weights > 0)


def test_integrate_deterministic_order():
    mesh = C.build_annular_mesh(H1, 0.5, 2.0, levels=6, cells_per_dim=8)
    f = lambda q: np.sin(q[:, 0]) + C.homogeneous_norm(H1, q)
    a = C.integrate(mesh, f)
    b = C.integrate(mesh, f)
    assert a == b  # bit-identical


def test_integrate_rejects_nonfinite():
    mesh = C.build_annular_mesh(H1, 0.5, 2.0, levels=4, cells_per_dim=6)
    with pytest.raises(EvaluationError):
        C.integrate(mesh, lambda q: np.full(len(q), np.nan))


def test_build_annular_mesh_validation():
    with pytest.raises(InvalidParameterError):
        C.build_annular_mesh(H1, 2.0, 1.0, levels=4, cells_per_dim=6)
    with pytest.raises(InvalidParameterError):
        C.build_annular_mesh(H1, 0.5, 2.0, levels=0, cells_per_dim=6)


def test_annular_csv_round_trip(tmp_path):
    mesh = C.build_annular_mesh(H1, 0.5, 1.0, levels=3, cells_per_dim=4)
    path = tmp_path / "mesh.csv"
    mesh.to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.array_equal(data[:, :3], mesh.nodes)
    assert np.array_equal(data[:, 3], mesh.weights)
