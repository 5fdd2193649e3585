import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rstab.errors import BadParams, DegenerateMetric, MeshFormatError, NotSpaceForm, UnknownSurface
from rstab.geometry import (
    Ambient,
    ambient_curvature_term,
    catalog_surface,
    discretize,
    geodesic_distance,
    r_area,
    read_off,
    surface_from_mesh,
    write_off,
)
from rstab.geometry.meshes import icosphere

from conftest import mesh


@pytest.mark.parametrize("name,params,k", [
    ("sphere", {}, (1.0, 1.0)),
    ("sphere", {"radius": 2.0}, (0.5, 0.5)),
    ("horosphere", {}, (1.0, 1.0)),
    ("equidistant", {"distance": 0.5}, (np.tanh(0.5),) * 2),
    ("geodesic_sphere", {"radius": 1.0}, (1 / np.tanh(1.0),) * 2),
    ("geodesic_sphere_s3", {"radius": 0.7}, (1 / np.tan(0.7),) * 2),
    ("clifford_torus", {}, (-1.0, 1.0)),
    ("cylinder", {"radius": 2.0}, (0.0, 0.5)),
    ("flat_torus_chart", {}, (0.0, 0.0)),
])
def test_catalog_curvatures(name, params, k):
    s = mesh(name, 2, **params)
    assert np.allclose(s.principal, np.sort(k), atol=1e-8)


def test_clifford_torus_S2():
    s = mesh("clifford_torus", 2)
    assert np.allclose(s.S(2), -1.0, atol=1e-9)


def test_flat_torus_shape_exact():
    assert np.max(np.abs(mesh("flat_torus_chart", 2).shape)) <= 1e-10


def test_catalog_errors():
    with pytest.raises(UnknownSurface):
        catalog_surface("klein_bottle")
    with pytest.raises(BadParams):
        catalog_surface("sphere", radius=-1.0)
    with pytest.raises(BadParams):
        catalog_surface("sphere", colour="red")


def test_normals_are_unit_and_orthogonal():
    for name in ("sphere", "horosphere", "clifford_torus", "geodesic_sphere"):
        s = mesh(name, 2)
        amb = s.ambient
        assert np.allclose(amb.inner(s.normal, s.normal), 1.0)
        for i in range(2):
            assert np.allclose(amb.inner(s.frame[..., i], s.normal), 0.0, atol=1e-9)
        if amb.model != "euclidean":
            # tangent to the model space as well
            assert np.allclose(amb.inner(s.X, s.normal), 0.0, atol=1e-9)


def test_horosphere_on_hyperboloid():
    s = mesh("horosphere", 2)
    assert np.allclose(s.ambient.inner(s.X, s.X), -1.0)


@pytest.mark.parametrize("model,p,q,d", [
    ("euclidean", (0, 0, 0), (3, 4, 0), 5.0),
    ("sphere", (1, 0, 0, 0), (-1, 0, 0, 0), np.pi),
    ("sphere", (1, 0, 0, 0), (0, 1, 0, 0), np.pi / 2),
])
def test_geodesic_distance_examples(model, p, q, d):
    amb = {"euclidean": Ambient.euclidean, "sphere": Ambient.sphere}[model]()
    assert geodesic_distance(amb, np.array(p, float), np.array(q, float)) == pytest.approx(d)


@given(st.floats(0.0, 6.0))
def test_hyperbolic_distance_along_geodesic(s):
    H = Ambient.hyperbolic()
    apex = np.array([0.0, 0.0, 0.0, 1.0])
    q, _ = H.exp_normal(apex, np.array([0.6, 0.8, 0.0, 0.0]), s)
    assert geodesic_distance(H, apex, q) == pytest.approx(s, abs=1e-9)


def test_sphere_curvature_fd_error_small():
    # no analytic jet: fourth-order differences, independent of the mesh
    for level in (2, 3, 4):
        assert np.max(np.abs(mesh("sphere", level).principal - 1.0)) < 1e-8


def test_cylinder_k():
    s = mesh("cylinder", 3, radius=2.0)
    assert np.allclose(s.principal, [0.0, 0.5], atol=1e-8)


@pytest.mark.parametrize("name,params,r,expected", [
    ("sphere", {}, 0, lambda s: np.zeros(s.n_nodes)),
    ("sphere", {}, 1, lambda s: np.zeros(s.n_nodes)),
    ("horosphere", {}, 0, lambda s: -2.0 * np.ones(s.n_nodes)),
    ("geodesic_sphere", {"radius": 1.0}, 1, lambda s: -2.0 / np.tanh(1.0) * np.ones(s.n_nodes)),
])
def test_ambient_curvature_term(name, params, r, expected):
    s = mesh(name, 2, **params)
    assert np.allclose(ambient_curvature_term(s, r), expected(s), atol=1e-8)
    # the oracle path of the same model agrees
    general = s.ambient.as_general()
    assert np.allclose(ambient_curvature_term(s, r, ambient=general), expected(s), atol=1e-8)


@pytest.mark.parametrize("rho", [1.0, 2.0])
def test_r_area_sphere(rho):
    areas = [r_area(mesh("sphere", L, radius=rho), 0) for L in (3, 4)]
    errs = [abs(a - 4 * np.pi * rho**2) for a in areas]
    assert errs[1] < 0.01 * 4 * np.pi * rho**2
    assert errs[1] < errs[0] / 3  # second order in h
    s = mesh("sphere", 4, radius=rho)
    assert r_area(s, 1) == pytest.approx(8 * np.pi * rho, rel=1e-2)


def test_r_area_flat_and_errors():
    assert r_area(mesh("flat_torus_chart", 2), 1) == pytest.approx(0.0, abs=1e-12)
    s = mesh("sphere", 1)
    with pytest.raises(NotSpaceForm):
        r_area(s.with_ambient(s.ambient.as_general()), 0)
    with pytest.raises(BadParams):
        r_area(s, 2)


def test_orientation_flip_parity():
    s = mesh("sphere", 2, radius=2.0)
    f = s.flipped()
    assert np.allclose(f.shape, -s.shape)
    for r in range(3):
        assert np.allclose(f.S(r), (-1) ** r * s.S(r))
        assert np.allclose(f.newton(r), (-1) ** r * s.newton(r))


def test_mesh_levels():
    counts = [mesh("sphere", L).n_nodes for L in range(4)]
    assert counts == [12, 42, 162, 642]
    hemi = mesh("hemisphere", 2)
    assert hemi.boundary.any() and not mesh("sphere", 2).boundary.any()
    assert np.allclose(hemi.X[hemi.boundary, 2], 0.0, atol=1e-12)
    torus = mesh("flat_torus_chart", 0)
    assert torus.closed and not torus.boundary.any()
    with pytest.raises(BadParams):
        discretize(catalog_surface("sphere"), -1)


def test_plane_chart_area():
    s = mesh("flat_square", 1)
    assert s.area == pytest.approx(1.0)
    assert s.boundary.sum() == 4 * 16


def test_off_round_trip(tmp_path):
    V, F = icosphere(2)
    path = tmp_path / "s.off"
    write_off(path, V, F)
    V2, F2 = read_off(path)
    assert np.array_equal(F, F2) and np.allclose(V, V2, rtol=0, atol=0)


def test_off_polygons_and_comments(tmp_path):
    path = tmp_path / "quad.off"
    path.write_text("OFF\n# a square\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n")
    V, F = read_off(path)
    assert V.shape == (4, 3) and F.tolist() == [[0, 1, 2], [0, 2, 3]]


@pytest.mark.parametrize("text,where", [
    ("", "empty"),
    ("PLY\n", ":1:"),
    ("OFF\n2 x 0\n", ":2:"),
    ("OFF\n3 1 0\n0 0 0\n1 0 0\n", "too short"),
    ("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 7\n", ":6:"),
    ("OFF\n3 1 0\n0 0 0\n1 a 0\n0 1 0\n3 0 1 2\n", ":4:"),
])
def test_off_diagnostics(tmp_path, text, where):
    path = tmp_path / "bad.off"
    path.write_text(text)
    with pytest.raises(MeshFormatError, match=where):
        read_off(path)


def test_off_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_off(tmp_path / "none.off")


def test_mesh_curvature_fit_converges():
    errs, hs = [], []
    for L in (3, 4, 5):
        V, F = icosphere(L)
        s = surface_from_mesh(V, F)
        errs.append(np.max(np.abs(s.principal - 1.0)))
        hs.append(s.h)
    order = np.log(errs[-2] / errs[-1]) / np.log(hs[-2] / hs[-1])
    assert order >= 1.8
    assert s.accuracy == "quadratic-fit"


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 4.0))
def test_scaled_mesh_fit(rho):
    V, F = icosphere(3)
    s = surface_from_mesh(rho * V, F)
    assert np.allclose(s.principal, 1 / rho, rtol=0.05)


def test_degenerate_metric():
    imm = catalog_surface("flat_square")
    from dataclasses import replace

    squashed = replace(imm, jet=None, position=lambda p: np.stack([p[..., 0], 0 * p[..., 1],
                                                                    0 * p[..., 0]], -1))
    with pytest.raises(DegenerateMetric):
        discretize(squashed, 0)
